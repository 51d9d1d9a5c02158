"""Scenario execution: predict / solve / oracle / sweep / identities / examples."""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .charsolver import AnnulusSector, NoRootFoundError, count_roots, find_root
from .geometry import TensorGrid, build_grid
from .logpotential import IdentityReport, Multiplicative, check_identities
from .potentials import LaplacianOf
from .predictor import DegenerateSeriesError, Verdict, predict
from .radial import NoBoundStateInBracket, RadialProfile, radial_bound_state
from .scenario import ResultRow, Scenario, SolverParams, parse_scenario


class UnsupportedOracleError(RuntimeError):
    """The radial oracle only covers real, radially symmetric multiplicative wells."""


def _max_workers(n_tasks: int) -> int:
    env = os.environ.get("SHALLOWBOUND_THREADS")
    if env is not None:
        try:
            cap = max(1, int(env))
        except ValueError:
            cap = 1
    else:
        cap = min(4, os.cpu_count() or 1)
    return max(1, min(cap, n_tasks))


def _run_parallel(task, items):
    """Run task over items, preserving input order in the output."""
    workers = _max_workers(len(items))
    if workers == 1:
        return [task(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(task, items))


def apply_overrides(scenario: Scenario, **kw) -> Scenario:
    """CLI-level solver parameter overrides (grid_n, terms, alpha, margin)."""
    kw = {k: v for k, v in kw.items() if v is not None}
    if not kw:
        return scenario
    return replace(scenario, solver=replace(scenario.solver, **kw))


def _grid(scenario: Scenario) -> TensorGrid:
    return build_grid(scenario.domain, scenario.solver.grid_n)


def _predict_row(scenario: Scenario, grid: TensorGrid, eps: float) -> ResultRow:
    sp = scenario.solver
    t0 = time.perf_counter()
    try:
        pr = predict(scenario.perturbation, grid, eps, J=sp.terms,
                     alpha=sp.alpha, margin=sp.margin)
    except DegenerateSeriesError:
        return ResultRow(scenario.name, eps, "Degenerate",
                         wall_ms=1e3 * (time.perf_counter() - t0))
    return ResultRow(scenario.name, eps, pr.verdict.value,
                     m_tilde=pr.m_tilde, k_pred=pr.k, lambda_pred=pr.lam,
                     wall_ms=1e3 * (time.perf_counter() - t0))


def run_predict(scenario: Scenario) -> list[ResultRow]:
    grid = _grid(scenario)
    return _run_parallel(lambda eps: _predict_row(scenario, grid, eps),
                         list(scenario.epsilons))


def _solve_row(scenario: Scenario, grid: TensorGrid, eps: float,
               with_count: bool = False) -> ResultRow:
    sp = scenario.solver
    t0 = time.perf_counter()
    eval_grid = build_grid(scenario.domain.scaled(sp.eval_scale),
                           sp.eval_grid_n, kind="uniform")
    try:
        res = find_root(scenario.perturbation, grid, eps, r0=sp.r0, tol=sp.fp_tol,
                        max_iter=sp.max_iter, J=sp.terms, eval_grid=eval_grid)
    except DegenerateSeriesError:
        return ResultRow(scenario.name, eps, "Degenerate",
                         wall_ms=1e3 * (time.perf_counter() - t0))
    count = None
    if with_count:
        cgrid = build_grid(scenario.domain, sp.count_grid_n)
        count = count_roots(scenario.perturbation, cgrid, eps,
                            AnnulusSector(1e-12, 0.3, np.pi / 2 - 0.05))
    if res.found:
        sol = res.solution
        return ResultRow(scenario.name, eps, "Exists",
                         m_solved=sol.m_solved, k_solved=sol.k_root,
                         lambda_solved=sol.lam, residual_norm=sol.residual_norm,
                         root_count=count,
                         wall_ms=1e3 * (time.perf_counter() - t0))
    return ResultRow(scenario.name, eps, "AbsentBySolver", m_solved=res.m_last,
                     root_count=count, wall_ms=1e3 * (time.perf_counter() - t0))


def run_solve(scenario: Scenario, with_count: bool = False) -> list[ResultRow]:
    grid = _grid(scenario)
    return _run_parallel(lambda eps: _solve_row(scenario, grid, eps, with_count),
                         list(scenario.epsilons))


def _oracle_profile(scenario: Scenario, eps: float) -> RadialProfile:
    p = scenario.perturbation
    if not isinstance(p, Multiplicative) or not p.is_real:
        raise UnsupportedOracleError(
            "oracle needs a real multiplicative perturbation")
    pot = p.potential_at(eps)
    if pot.radial_profile() is None:
        raise UnsupportedOracleError(
            "oracle needs a radially symmetric potential (common center)")
    return RadialProfile.from_potential(pot, n=scenario.solver.oracle_mesh)


def _oracle_row(scenario: Scenario, grid: TensorGrid, eps: float) -> ResultRow:
    sp = scenario.solver
    t0 = time.perf_counter()
    profile = _oracle_profile(scenario, eps)
    k_hi = 0.4 * sp.r0 + 0.3  # 0.5 at the default disk radius
    try:
        pr = predict(scenario.perturbation, grid, eps, J=sp.terms,
                     alpha=sp.alpha, margin=sp.margin)
        m_re = pr.m_tilde.real if pr.m_tilde is not None else 0.0
    except DegenerateSeriesError:
        m_re = 0.0
    k_lo = float(np.exp(-2.0 * m_re)) if m_re > 0 else 1e-10
    k_lo = min(k_lo, 0.4 * k_hi)
    try:
        out = radial_bound_state(profile, eps, (k_lo, k_hi))
    except NoBoundStateInBracket:
        return ResultRow(scenario.name, eps, "Absent",
                         wall_ms=1e3 * (time.perf_counter() - t0))
    return ResultRow(scenario.name, eps, "Exists",
                     k_oracle=complex(out["k"]), lambda_oracle=complex(out["lambda"]),
                     wall_ms=1e3 * (time.perf_counter() - t0))


def run_oracle(scenario: Scenario) -> list[ResultRow]:
    _oracle_profile(scenario, scenario.epsilons[0])  # applicability check up front
    grid = _grid(scenario)
    return _run_parallel(lambda eps: _oracle_row(scenario, grid, eps),
                         list(scenario.epsilons))


def _merge(base: ResultRow, *others: ResultRow) -> ResultRow:
    for other in others:
        for name in ("m_tilde", "m_solved", "k_pred", "k_solved", "lambda_pred",
                     "lambda_solved", "k_oracle", "lambda_oracle",
                     "residual_norm", "root_count"):
            if getattr(base, name) is None:
                setattr(base, name, getattr(other, name))
    return base


def run_sweep(scenario: Scenario, with_count: bool = False) -> list[ResultRow]:
    """Predict + solve (+ oracle where applicable) merged, one row per eps."""
    grid = _grid(scenario)

    def one(eps: float) -> ResultRow:
        t0 = time.perf_counter()
        prow = _predict_row(scenario, grid, eps)
        srow = _solve_row(scenario, grid, eps, with_count)
        rows = [srow, prow]
        try:
            rows.append(_oracle_row(scenario, grid, eps))
        except UnsupportedOracleError:
            pass
        merged = _merge(*rows)
        merged.wall_ms = 1e3 * (time.perf_counter() - t0)
        return merged

    return _run_parallel(one, list(scenario.epsilons))


def run_check_identities(scenario: Scenario) -> IdentityReport:
    """The zero-mean integration-by-parts identity suite on U = lap(v)."""
    p = scenario.perturbation
    if not isinstance(p, Multiplicative):
        raise UnsupportedOracleError("identity suite needs a multiplicative scenario")
    if p.v.max_derivative_order < 5:
        raise UnsupportedOracleError(
            "identity suite needs a polynomial-bump base potential")
    sp = scenario.solver
    return check_identities(LaplacianOf(p.v), scenario.domain,
                            n=sp.identity_grid_n,
                            enlargement=sp.identity_enlargement)


# ---------------------------------------------------------------------------
# bundled example scenarios
# ---------------------------------------------------------------------------


def bundled_scenario_dir() -> Path:
    return Path(resources.files("shallowbound") / "scenarios")


def load_bundled() -> list[Scenario]:
    paths = sorted(bundled_scenario_dir().glob("*.json"))
    return [parse_scenario(p) for p in paths]


def _check_expectations(scenario: Scenario, reference: Optional[Scenario]) -> list[str]:
    """Run a bundled scenario against its embedded expectations; returns
    failure messages (empty = pass)."""
    fails: list[str] = []
    exp = scenario.expect
    if exp is None:
        return fails
    grid = _grid(scenario)
    predictions = {eps: _predict_row(scenario, grid, eps) for eps in scenario.epsilons}
    if exp.verdict is not None:
        for eps, row in predictions.items():
            if row.verdict != exp.verdict:
                fails.append(f"eps={eps}: predicted {row.verdict}, expected {exp.verdict}")
    solves = {}
    if exp.solver is not None or exp.m_solved_rtol is not None:
        for eps in scenario.epsilons:
            solves[eps] = _solve_row(scenario, grid, eps)
    if exp.solver is not None:
        want = "Exists" if exp.solver == "root" else "AbsentBySolver"
        for eps, row in solves.items():
            if row.verdict != want:
                fails.append(f"eps={eps}: solver said {row.verdict}, expected {want}")
    if exp.im_lambda_ratio_min is not None:
        for eps, row in solves.items():
            lam = row.lambda_solved
            if lam is None:
                fails.append(f"eps={eps}: no solver eigenvalue for the Im-lambda check")
            elif abs(lam.imag) / abs(lam) < exp.im_lambda_ratio_min:
                fails.append(f"eps={eps}: |Im lambda|/|lambda| = "
                             f"{abs(lam.imag) / abs(lam):.3f} below "
                             f"{exp.im_lambda_ratio_min}")
    if exp.match_scenario is not None:
        if reference is None:
            fails.append(f"reference scenario {exp.match_scenario!r} not found")
        else:
            ref = replace(reference, solver=scenario.solver, epsilons=scenario.epsilons)
            ref_grid = _grid(ref)
            for eps in scenario.epsilons:
                a = predictions[eps].m_tilde
                b = _predict_row(ref, ref_grid, eps).m_tilde
                if a is None or b is None:
                    fails.append(f"eps={eps}: missing exponent for the match check")
                elif abs(a - b) > (exp.m_tilde_rtol or 1e-8) * abs(b):
                    fails.append(f"eps={eps}: exponent mismatch {abs(a - b):.3e} "
                                 f"vs reference {abs(b):.3e}")
                if exp.m_solved_rtol is not None:
                    sa = solves.get(eps) or _solve_row(scenario, grid, eps)
                    sb = _solve_row(ref, ref_grid, eps)
                    if sa.m_solved is None or sb.m_solved is None:
                        fails.append(f"eps={eps}: missing solver root for match check")
                    elif abs(sa.m_solved - sb.m_solved) > exp.m_solved_rtol * abs(sb.m_solved):
                        fails.append(
                            f"eps={eps}: solver root mismatch "
                            f"{abs(sa.m_solved - sb.m_solved):.3e} vs {abs(sb.m_solved):.3e}")
    return fails


def run_examples() -> tuple[bool, list[str]]:
    """Execute every bundled paper-example scenario against its embedded
    expectations; returns (all_passed, report lines)."""
    scenarios = [s for s in load_bundled() if s.group == "paper-examples"]
    by_name = {s.name: s for s in scenarios}
    lines = []
    ok = True

    def one(sc: Scenario):
        ref = by_name.get(sc.expect.match_scenario) if (
            sc.expect and sc.expect.match_scenario) else None
        return sc.name, _check_expectations(sc, ref)

    for name, fails in _run_parallel(one, scenarios):
        if fails:
            ok = False
            lines.append(f"FAIL {name}")
            lines.extend(f"  - {f}" for f in fails)
        else:
            lines.append(f"PASS {name}")
    return ok, lines
