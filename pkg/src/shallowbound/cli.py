"""Command-line interface.

Commands: predict | solve | oracle | sweep | check-identities | examples.
Exit codes: 0 success, 2 scenario validation error, 3 oracle not applicable,
4 solver non-convergence, 5 numerical conditioning guard.
"""

from __future__ import annotations

import argparse
import sys

from .charsolver import NearSingularOperatorError, NoRootFoundError
from .runner import (UnsupportedOracleError, apply_overrides, run_check_identities,
                     run_examples, run_oracle, run_predict, run_solve, run_sweep)
from .scenario import CSV_COLUMNS, ScenarioValidationError, parse_scenario, rows_to_csv

_EPILOG = f"""\
CSV columns (complex values as paired re/im): {", ".join(CSV_COLUMNS)}.
The wall_ms column is timing only; everything else is deterministic for a
given scenario file and seed.  Scenario files are strict JSON, version 1:
{{version, name, group?, domain{{x0,x1,y0,y1}}, perturbation, epsilons (descending),
solver?, seed?, expect?}}.  Potentials: polynomial-bump | cosine-bump |
disk-indicator | constant | tabulated (CSV 'x,y,re,im' on a regular lattice)
plus the combinators sum | scaled | laplacian-of | dx-of | dy-of.
SHALLOWBOUND_THREADS caps sweep parallelism.
"""


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="shallowbound",
        description="Shallow-eigenvalue prediction and verification for locally "
                    "perturbed planar Schrodinger operators.",
        epilog=_EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_, scenario=True):
        sp = sub.add_parser(name, help=help_)
        if scenario:
            sp.add_argument("--scenario", required=True, help="scenario JSON path")
        sp.add_argument("--out", default=None, help="write CSV/report here instead of stdout")
        sp.add_argument("--grid-n", type=int, default=None, help="override quadrature nodes per axis")
        sp.add_argument("--terms", type=int, default=None, help="override moment truncation order")
        sp.add_argument("--alpha", type=float, default=None, help="override classification exponent")
        sp.add_argument("--margin", type=float, default=None, help="override classification margin")
        return sp

    add("predict", "asymptotic prediction only")
    sp = add("solve", "characteristic-equation root finding")
    sp.add_argument("--count-roots", action="store_true",
                    help="also count roots in the standard small-k sector")
    add("oracle", "radial ODE ground truth (radial real multiplicative scenarios)")
    sp = add("sweep", "predict + solve + oracle merged")
    sp.add_argument("--count-roots", action="store_true",
                    help="also count roots in the standard small-k sector")
    add("check-identities", "zero-mean integration-by-parts identity residuals")
    add("examples", "run all bundled example scenarios against their expectations",
        scenario=False)
    return ap


def _emit(text: str, out: str | None):
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "examples":
            ok, lines = run_examples()
            _emit("\n".join(lines) + "\n", args.out)
            return 0 if ok else 1

        scenario = parse_scenario(args.scenario)
        scenario = apply_overrides(scenario, grid_n=args.grid_n, terms=args.terms,
                                   alpha=args.alpha, margin=args.margin)
        if args.command == "predict":
            rows = run_predict(scenario)
        elif args.command == "solve":
            rows = run_solve(scenario, with_count=args.count_roots)
        elif args.command == "oracle":
            rows = run_oracle(scenario)
        elif args.command == "sweep":
            rows = run_sweep(scenario, with_count=args.count_roots)
        else:  # check-identities
            rep = run_check_identities(scenario)
            names = ("pairing-vs-gradient-energy", "second-moment-symmetry",
                     "third-moment-symmetry")
            lines = [f"{n}: lhs={l:.12e} rhs={r:.12e} rel={e:.3e}"
                     for n, l, r, e in zip(names, rep.lhs, rep.rhs, rep.rel)]
            lines.append(f"worst relative residual: {rep.worst():.3e}")
            _emit("\n".join(lines) + "\n", args.out)
            return 0
        _emit(rows_to_csv(rows), args.out)
        return 0
    except ScenarioValidationError as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return 2
    except UnsupportedOracleError as exc:
        print(f"not applicable: {exc}", file=sys.stderr)
        return 3
    except NoRootFoundError as exc:
        print(f"solver did not converge: {exc}", file=sys.stderr)
        return 4
    except NearSingularOperatorError as exc:
        print(f"numerical guard: {exc}", file=sys.stderr)
        return 5


if __name__ == "__main__":
    raise SystemExit(main())
