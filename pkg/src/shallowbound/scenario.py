"""Scenario ingestion (strict JSON schema, version 1) and CSV result rows."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional

from .geometry import RectDomain
from .logpotential import DivergenceForm, Multiplicative, Perturbation, RankOne
from .potentials import (ConstantOnDomain, CosineBump, DiskIndicator, LaplacianOf,
                         PartialDerivative, PolynomialBump, Potential, Scaled,
                         SumPotential, TabulatedPotential)


class ScenarioValidationError(ValueError):
    """Scenario file rejected; message carries the JSON path of the offender."""


def _fail(path: str, msg: str):
    raise ScenarioValidationError(f"{path}: {msg}")


def _take(d: dict, path: str, key: str, required=True, default=None):
    if key not in d:
        if required:
            _fail(path, f"missing required key {key!r}")
        return default
    return d[key]


def _no_extras(d: dict, path: str, allowed):
    extra = set(d) - set(allowed)
    if extra:
        _fail(path, f"unknown keys {sorted(extra)} (schema version 1 is strict)")


def _number(v, path: str) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(path, f"expected a number, got {v!r}")
    return float(v)


def _complex_number(v, path: str) -> complex:
    if isinstance(v, (list, tuple)):
        if len(v) != 2:
            _fail(path, "complex values are [re, im] pairs")
        return complex(_number(v[0], path), _number(v[1], path))
    return complex(_number(v, path))


@dataclass(frozen=True)
class SolverParams:
    grid_n: int = 48
    terms: int = 3
    alpha: float = 0.5
    margin: float = 0.0
    r0: float = 0.5
    fp_tol: float = 1e-12
    max_iter: int = 50
    count_grid_n: int = 24
    eval_grid_n: int = 64
    eval_scale: float = 2.0
    oracle_mesh: int = 2000
    identity_grid_n: int = 96
    identity_enlargement: float = 3.0


@dataclass(frozen=True)
class Expectations:
    verdict: Optional[str] = None
    solver: Optional[str] = None
    im_lambda_ratio_min: Optional[float] = None
    match_scenario: Optional[str] = None
    m_tilde_rtol: Optional[float] = None
    m_solved_rtol: Optional[float] = None


@dataclass(frozen=True)
class Scenario:
    name: str
    domain: RectDomain
    perturbation: Perturbation
    epsilons: tuple
    solver: SolverParams
    seed: int
    group: str = "auxiliary"
    expect: Optional[Expectations] = None


def _parse_potential(d, path: str, domain: RectDomain, base_dir: Path) -> Potential:
    if not isinstance(d, dict):
        _fail(path, "potential must be an object")
    family = _take(d, path, "family")
    common = {"family"}
    if family == "polynomial-bump":
        _no_extras(d, path, common | {"amplitude", "center", "radius", "exponent"})
        return PolynomialBump(
            _complex_number(_take(d, path, "amplitude"), path + ".amplitude"),
            tuple(_take(d, path, "center", default=[0.0, 0.0], required=False)),
            _number(_take(d, path, "radius"), path + ".radius"),
            int(_take(d, path, "exponent")))
    if family == "cosine-bump":
        _no_extras(d, path, common | {"amplitude", "center", "radius"})
        return CosineBump(
            _complex_number(_take(d, path, "amplitude"), path + ".amplitude"),
            tuple(_take(d, path, "center", default=[0.0, 0.0], required=False)),
            _number(_take(d, path, "radius"), path + ".radius"))
    if family == "disk-indicator":
        _no_extras(d, path, common | {"amplitude", "center", "radius"})
        return DiskIndicator(
            _complex_number(_take(d, path, "amplitude"), path + ".amplitude"),
            tuple(_take(d, path, "center", default=[0.0, 0.0], required=False)),
            _number(_take(d, path, "radius"), path + ".radius"))
    if family == "constant":
        _no_extras(d, path, common | {"amplitude"})
        return ConstantOnDomain(
            _complex_number(_take(d, path, "amplitude"), path + ".amplitude"), domain)
    if family == "tabulated":
        _no_extras(d, path, common | {"path"})
        rel = _take(d, path, "path")
        try:
            return TabulatedPotential.from_csv(base_dir / rel)
        except (OSError, ValueError) as exc:
            _fail(path, f"tabulated potential: {exc}")
    if family == "sum":
        _no_extras(d, path, common | {"terms"})
        terms = _take(d, path, "terms")
        if not isinstance(terms, list) or not terms:
            _fail(path + ".terms", "must be a nonempty list")
        return SumPotential([_parse_potential(t, f"{path}.terms[{i}]", domain, base_dir)
                             for i, t in enumerate(terms)])
    if family == "scaled":
        _no_extras(d, path, common | {"factor", "base"})
        return Scaled(
            _parse_potential(_take(d, path, "base"), path + ".base", domain, base_dir),
            _complex_number(_take(d, path, "factor"), path + ".factor"))
    if family == "laplacian-of":
        _no_extras(d, path, common | {"base"})
        return LaplacianOf(
            _parse_potential(_take(d, path, "base"), path + ".base", domain, base_dir))
    if family in ("dx-of", "dy-of"):
        _no_extras(d, path, common | {"base"})
        return PartialDerivative(
            _parse_potential(_take(d, path, "base"), path + ".base", domain, base_dir),
            0 if family == "dx-of" else 1)
    _fail(path + ".family", f"unknown family {family!r}")


def _parse_perturbation(d, path: str, domain: RectDomain, base_dir: Path) -> Perturbation:
    if not isinstance(d, dict):
        _fail(path, "perturbation must be an object")
    kind = _take(d, path, "kind")
    bc = d.get("bound_constant")
    if bc is not None:
        bc = _number(bc, path + ".bound_constant")
    if kind == "multiplicative":
        _no_extras(d, path, {"kind", "v", "v1", "bound_constant"})
        v = _parse_potential(_take(d, path, "v"), path + ".v", domain, base_dir)
        v1 = d.get("v1")
        if v1 is not None:
            v1 = _parse_potential(v1, path + ".v1", domain, base_dir)
        p = Multiplicative(v, v1, bc)
        supports = [v.support] + ([v1.support] if v1 is not None else [])
        for i, s in enumerate(supports):
            if not domain.contains(s):
                _fail(path, f"potential #{i} support {s} exceeds the domain {domain}")
        return p
    if kind == "rank-one":
        _no_extras(d, path, {"kind", "rho", "bound_constant"})
        rho = _parse_potential(_take(d, path, "rho"), path + ".rho", domain, base_dir)
        try:
            return RankOne(rho, domain, bc)
        except ValueError as exc:
            _fail(path, str(exc))
    if kind == "divergence-form":
        _no_extras(d, path, {"kind", "a", "b", "zero_order", "bound_constant"})
        a_raw = _take(d, path, "a")
        b_raw = _take(d, path, "b")
        if (not isinstance(a_raw, list) or len(a_raw) != 2
                or any(not isinstance(r, list) or len(r) != 2 for r in a_raw)):
            _fail(path + ".a", "must be a 2x2 array of potentials or nulls")
        if not isinstance(b_raw, list) or len(b_raw) != 2:
            _fail(path + ".b", "must be a 2-vector of potentials or nulls")
        def opt(e, pth):
            return None if e is None else _parse_potential(e, pth, domain, base_dir)
        a = tuple(tuple(opt(a_raw[i][j], f"{path}.a[{i}][{j}]") for j in range(2))
                  for i in range(2))
        b = tuple(opt(b_raw[i], f"{path}.b[{i}]") for i in range(2))
        for c in [c for row in a for c in row] + list(b):
            if c is not None:
                if c.max_derivative_order < 1:
                    _fail(path, "divergence-form coefficients need analytic gradients")
                if not domain.contains(c.support):
                    _fail(path, "coefficient support exceeds the domain")
        zo = _parse_perturbation(_take(d, path, "zero_order"), path + ".zero_order",
                                 domain, base_dir)
        if isinstance(zo, DivergenceForm):
            _fail(path + ".zero_order", "must be multiplicative or rank-one")
        return DivergenceForm(a, b, zo, bc)
    _fail(path + ".kind", f"unknown perturbation kind {kind!r}")


def parse_scenario(source, base_dir: Optional[Path] = None) -> Scenario:
    """Load and validate a scenario from a path or already-parsed dict."""
    if isinstance(source, (str, Path)):
        path = Path(source)
        base_dir = path.parent
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ScenarioValidationError(f"{path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ScenarioValidationError(
                f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        label = str(path)
    else:
        data = source
        base_dir = base_dir or Path(".")
        label = "<scenario>"
    if not isinstance(data, dict):
        _fail(label, "scenario must be a JSON object")
    _no_extras(data, label, {"version", "name", "group", "domain", "perturbation",
                             "epsilons", "solver", "seed", "expect"})
    version = _take(data, label, "version")
    if version != 1:
        _fail(label + ".version", f"unsupported scenario version {version!r}")
    name = _take(data, label, "name")
    if not isinstance(name, str) or not name:
        _fail(label + ".name", "must be a nonempty string")

    dd = _take(data, label, "domain")
    _no_extras(dd, label + ".domain", {"x0", "x1", "y0", "y1"})
    try:
        domain = RectDomain(*(_number(_take(dd, label + ".domain", k), label) for k in
                              ("x0", "x1", "y0", "y1")))
    except ValueError as exc:
        _fail(label + ".domain", str(exc))

    eps_raw = _take(data, label, "epsilons")
    if not isinstance(eps_raw, list) or not eps_raw:
        _fail(label + ".epsilons", "must be a nonempty list")
    epsilons = tuple(_number(e, label + ".epsilons") for e in eps_raw)
    if any(e <= 0 for e in epsilons):
        _fail(label + ".epsilons", "all values must be positive")
    if list(epsilons) != sorted(epsilons, reverse=True):
        _fail(label + ".epsilons", "must be sorted in descending order")

    sp_raw = data.get("solver", {})
    allowed = {f.name for f in fields(SolverParams)}
    _no_extras(sp_raw, label + ".solver", allowed)
    solver = SolverParams(**sp_raw)

    seed = data.get("seed", 0)
    if not isinstance(seed, int):
        _fail(label + ".seed", "must be an integer")

    group = data.get("group", "auxiliary")
    if group not in ("paper-examples", "auxiliary"):
        _fail(label + ".group", f"unknown group {group!r}")

    expect = None
    if "expect" in data:
        e = data["expect"]
        allowed = {f.name for f in fields(Expectations)}
        _no_extras(e, label + ".expect", allowed)
        expect = Expectations(**e)

    perturbation = _parse_perturbation(_take(data, label, "perturbation"),
                                       label + ".perturbation", domain, base_dir)
    return Scenario(name, domain, perturbation, epsilons, solver, seed, group, expect)


# ---------------------------------------------------------------------------
# result rows
# ---------------------------------------------------------------------------

CSV_COLUMNS = [
    "scenario", "epsilon", "verdict",
    "m_tilde_re", "m_tilde_im", "m_solved_re", "m_solved_im",
    "k_pred_re", "k_pred_im", "k_solved_re", "k_solved_im",
    "lambda_pred_re", "lambda_pred_im", "lambda_solved_re", "lambda_solved_im",
    "k_oracle_re", "k_oracle_im", "lambda_oracle_re", "lambda_oracle_im",
    "residual_norm", "root_count", "wall_ms",
]

VERDICTS = ("Exists", "Absent", "Indeterminate", "AbsentBySolver", "Degenerate")


@dataclass
class ResultRow:
    scenario: str
    epsilon: float
    verdict: str
    m_tilde: Optional[complex] = None
    m_solved: Optional[complex] = None
    k_pred: Optional[complex] = None
    k_solved: Optional[complex] = None
    lambda_pred: Optional[complex] = None
    lambda_solved: Optional[complex] = None
    k_oracle: Optional[complex] = None
    lambda_oracle: Optional[complex] = None
    residual_norm: Optional[float] = None
    root_count: Optional[int] = None
    wall_ms: Optional[float] = None

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"unknown verdict {self.verdict!r}")

    def to_csv_fields(self) -> list[str]:
        def num(v):
            return "" if v is None else repr(float(v))
        def pair(z):
            return ("", "") if z is None else (repr(float(z.real)), repr(float(z.imag)))
        cells = [self.scenario, repr(float(self.epsilon)), self.verdict]
        for z in (self.m_tilde, self.m_solved, self.k_pred, self.k_solved,
                  self.lambda_pred, self.lambda_solved, self.k_oracle,
                  self.lambda_oracle):
            cells.extend(pair(z))
        cells.append(num(self.residual_norm))
        cells.append("" if self.root_count is None else str(self.root_count))
        cells.append("" if self.wall_ms is None else f"{self.wall_ms:.1f}")
        return cells


def rows_to_csv(rows) -> str:
    lines = [",".join(CSV_COLUMNS)]
    for r in rows:
        lines.append(",".join(r.to_csv_fields()))
    return "\n".join(lines) + "\n"


def parse_csv(text: str) -> list[dict]:
    """Round-trip reader for the documented schema."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    header = lines[0].split(",")
    if header != CSV_COLUMNS:
        raise ValueError("CSV header does not match the documented schema")
    out = []
    for ln in lines[1:]:
        cells = ln.split(",")
        if len(cells) != len(CSV_COLUMNS):
            raise ValueError("CSV row width mismatch")
        rec = dict(zip(CSV_COLUMNS, cells))
        for key, val in rec.items():
            if key in ("scenario", "verdict"):
                continue
            rec[key] = None if val == "" else float(val)
        out.append(rec)
    return out
