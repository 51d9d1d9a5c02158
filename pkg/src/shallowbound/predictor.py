"""Asymptotic exponent, existence classification, and eigenvalue prediction.

The exponent is M(eps) = 2*pi / (eps * sum_j (-eps)^j c_j) + gamma - ln 2 and
the eigenvalue estimate is lambda = -exp(-2M).  Existence hinges on
Re M > 0 (with an eps^alpha buffer) and |Im M| < pi/2.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import TensorGrid, integrate
from .logpotential import (Multiplicative, MomentSeries, Perturbation,
                           l_of_one, moment_series)
from .potentials import LaplacianOf, Potential, Scaled, SumPotential, sample_potential
from .special import EULER_GAMMA, LN2

TWO_PI = 2.0 * np.pi


class Verdict(str, enum.Enum):
    EXISTS = "Exists"
    ABSENT = "Absent"
    INDETERMINATE = "Indeterminate"


class DegenerateSeriesError(ArithmeticError):
    """The truncated moment sum vanishes; the exponent is undefined."""


@dataclass(frozen=True)
class Prediction:
    epsilon: float
    m_tilde: Optional[complex]
    verdict: Verdict
    k: Optional[complex]
    lam: Optional[complex]
    kappa: Optional[complex]
    singular_part: Optional[complex]
    margin_used: float

    def lambda_leading(self) -> Optional[complex]:
        """Two-term closed-form eigenvalue -kappa^2 exp(-2 * singular part):
        the exponent truncated at its O(1) coefficient."""
        if self.kappa is None or self.singular_part is None:
            return None
        return complex(-self.kappa ** 2 * np.exp(-2.0 * self.singular_part))


def _partial_sum(moments: MomentSeries, eps: float) -> complex:
    if moments.provenance == "closed-form-rank-one" and moments.ratio is not None:
        # exact geometric resummation
        return moments.coeffs[0] / (1.0 + eps * moments.ratio)
    powers = (-eps) ** np.arange(len(moments.coeffs))
    return complex(np.dot(powers, moments.coeffs))


def m_tilde(moments: MomentSeries, eps: float) -> complex:
    """The truncated asymptotic exponent; degenerate if the sum cancels away."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    mags = float(np.sum(np.abs(moments.coeffs) * eps ** np.arange(len(moments.coeffs))))
    S = _partial_sum(moments, eps)
    if mags == 0.0 or abs(S) < 1e-12 * mags:
        raise DegenerateSeriesError(
            f"moment sum {S:.3e} vanishes against scale {mags:.3e}")
    return TWO_PI / (eps * S) + EULER_GAMMA - LN2


def classify(m: complex, eps: float, alpha: float = 0.5, margin: float = 0.0) -> Verdict:
    """Existence test on the exponent with the eps^alpha buffer zone."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if margin < 0:
        raise ValueError("margin must be nonnegative")
    buf = alpha * eps ** alpha
    re, im = m.real, abs(m.imag)
    if re > buf + margin and im < np.pi / 2 - buf - margin:
        return Verdict.EXISTS
    if re < -buf - margin or im > np.pi / 2 + buf + margin:
        return Verdict.ABSENT
    return Verdict.INDETERMINATE


def laurent_split(moments: MomentSeries, eps: float):
    """Split the exponent into its eps-singular part and the O(1) coefficient.

    Returns (singular_value_at_eps, o1_coefficient) or None when the split is
    unavailable (all moments negligible, or truncation too short to reach the
    O(1) term).
    """
    c = moments.coeffs
    scale = float(np.max(np.abs(c))) if len(c) else 0.0
    if scale == 0.0:
        return None
    # a coefficient counts as the leading one only if it is not a quadrature
    # residue of an exact zero, judged against the later coefficients
    j0 = None
    for j, cj in enumerate(c):
        tail = float(np.max(np.abs(c[j + 1:]))) if j + 1 < len(c) else 0.0
        if abs(cj) > 1e-6 * tail and abs(cj) > 0:
            j0 = j
            break
    if j0 is None or len(c) < j0 + 2:
        return None
    # 2pi/(eps S), S = t^j0 (c_j0 + c_{j0+1} t + ...), t = -eps; invert the bracket
    d = c[j0:] / c[j0]
    m = len(d)
    b = np.zeros(m, dtype=complex)
    b[0] = 1.0
    for i in range(1, m):
        b[i] = -np.dot(d[1:i + 1], b[i - 1::-1])
    b /= c[j0]
    # term m of the expansion carries eps^(m - j0 - 1)
    sing = 0.0 + 0.0j
    for mm in range(j0 + 1):
        sing += TWO_PI * (-1.0) ** (j0 + mm) * b[mm] * eps ** (mm - j0 - 1)
    o1 = -TWO_PI * b[j0 + 1]
    if not np.isfinite(o1) or abs(o1) > 700.0:
        return None
    return sing, o1


def predict(p: Perturbation, grid: TensorGrid, eps: float, J: int = 3,
            alpha: float = 0.5, margin: float = 0.0) -> Prediction:
    """Moment series -> exponent -> classification -> (k, lambda, kappa)."""
    src = l_of_one(p, grid, eps)
    scale = float(np.dot(grid.w, np.abs(src.values)))
    if scale == 0.0:
        # L[1] = 0: no shallow eigenvalue
        return Prediction(eps, None, Verdict.ABSENT, None, None, None, None, margin)
    moments = moment_series(p, grid, eps, J)
    if np.all(np.abs(moments.coeffs) <= 1e-14 * max(scale, 1.0)):
        return Prediction(eps, None, Verdict.ABSENT, None, None, None, None, margin)
    m = m_tilde(moments, eps)
    verdict = classify(m, eps, alpha, margin)
    k = lam = None
    if verdict is Verdict.EXISTS:
        k = complex(np.exp(-m))
        lam = -k ** 2
    kappa = sing = None
    if isinstance(p, Multiplicative) and p.v1 is None:
        split = laurent_split(moments, eps)
        if split is not None:
            sing, o1 = split
            kappa = complex(2.0 * np.exp(-o1 - EULER_GAMMA))
    return Prediction(eps, m, verdict, k, lam, kappa, sing, margin)


@dataclass(frozen=True)
class ThresholdResult:
    threshold: float
    side: Verdict


def complex_threshold_example(v: Potential, a: float, grid: TensorGrid) -> ThresholdResult:
    """For V = v + i a (lap v), the imaginary tilt a has a sharp threshold
    T = <v>^2 / (8 ||v||^2): below it the shallow eigenvalue survives, above
    it none exists.  Returns the threshold and the side for the given a."""
    vf = sample_potential(v, grid)
    if not v.is_real:
        raise ValueError("threshold construction needs a real base potential")
    mean = integrate(vf).real
    if mean <= 0:
        raise ValueError(f"threshold construction needs <v> > 0, got {mean:.3e}")
    norm2 = float(np.dot(grid.w, np.abs(vf.values) ** 2))
    T = mean ** 2 / (8.0 * norm2)
    if abs(a) < T:
        side = Verdict.EXISTS
    elif abs(a) > T:
        side = Verdict.ABSENT
    else:
        side = Verdict.INDETERMINATE
    return ThresholdResult(T, side)


def tilted_potential(v: Potential, a: float) -> Potential:
    """V = v + i a (lap v), the complex-threshold construction."""
    return SumPotential([v, Scaled(LaplacianOf(v), 1j * a)])
