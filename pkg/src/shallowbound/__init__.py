"""Shallow-eigenvalue asymptotics for locally perturbed planar Schrodinger operators.

A small coupling eps turns -lap into -(lap + eps L) with L supported on a
bounded set; when a bound state emerges from the continuum edge its
eigenvalue is exponentially small, lambda = -exp(-2 M(eps)) with M = O(1/eps).
This package predicts M from a moment series, solves the discretized
characteristic equation for the same root, and cross-checks radially
symmetric cases against an independent radial ODE.
"""

from .geometry import Field, RectDomain, TensorGrid, build_grid, integrate
from .potentials import (ConstantOnDomain, CosineBump, DiskIndicator, LaplacianOf,
                         PartialDerivative, PolynomialBump, Potential, Scaled,
                         SumPotential, TabulatedPotential, sample_derivative,
                         sample_potential)
from .special import (EULER_GAMMA, SERIES_ASYMPTOTIC_SWITCH, bessel_k0,
                      bessel_k0_highprec, digamma_nat, k0_plus_log)
from .logpotential import (DivergenceForm, MomentSeries, Multiplicative, Perturbation,
                           RankOne, apply_inverse_laplacian, apply_perturbation,
                           check_identities, grad_inverse_laplacian, moment_series)
from .predictor import (DegenerateSeriesError, Prediction, Verdict, classify,
                        complex_threshold_example, m_tilde, predict,
                        tilted_potential)
from .charsolver import (AnnulusSector, CharEqSolution, NearSingularOperatorError,
                         NoRootFoundError, SolverResult, assemble_t0, char_function,
                         count_roots, eigenfunction_and_residual, find_root)
from .radial import (NoBoundStateInBracket, RadialProfile, default_bracket,
                     matching_mismatch, radial_bound_state)
from .scenario import ResultRow, Scenario, ScenarioValidationError, parse_scenario
from .runner import (run_check_identities, run_examples, run_oracle, run_predict,
                     run_solve, run_sweep)

__version__ = "0.1.0"
