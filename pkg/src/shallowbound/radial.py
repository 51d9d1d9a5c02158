"""Independent radial ground truth for radially symmetric multiplicative wells.

Solves u'' + u'/r + (eps V(r) - k^2) u = 0 outward from a regular series
start, then matches the logarithmic derivative at the support edge against
the decaying exterior solution K0(k r).  Bisection in k localizes the bound
state.  Shares nothing with the planar quadrature stack except bessel_k0.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .potentials import Potential
from .special import bessel_k0


class NoBoundStateInBracket(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class RadialProfile:
    """Radial potential samples on [0, r_support], cubic-spline interpolated."""

    r: np.ndarray
    values: np.ndarray
    r_support: float
    _spline: CubicSpline = field(init=False, repr=False)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or len(r) < 8:
            raise ValueError("radial profile needs matching 1D arrays, >= 8 samples")
        if r[0] < 0 or np.any(np.diff(r) <= 0):
            raise ValueError("radial mesh must increase strictly from 0")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "_spline", CubicSpline(r, v))

    def __call__(self, rr):
        rr = np.asarray(rr, dtype=float)
        out = self._spline(np.clip(rr, self.r[0], self.r[-1]))
        return np.where(rr <= self.r_support, out, 0.0)

    def mean(self) -> float:
        """<V> = 2 pi int V(r) r dr, from the radial samples alone."""
        s = CubicSpline(self.r, self.values * self.r)
        return float(2.0 * np.pi * s.integrate(self.r[0], self.r[-1]))

    @classmethod
    def from_potential(cls, pot: Potential, n: int = 2000) -> "RadialProfile":
        rp = pot.radial_profile()
        if rp is None:
            raise ValueError("potential is not radially symmetric")
        profile, R, _ = rp
        r = np.linspace(0.0, R, n + 1)
        return cls(r, np.asarray(profile(r), dtype=float), R)

    @classmethod
    def from_callable(cls, f, r_support: float, n: int = 2000) -> "RadialProfile":
        r = np.linspace(0.0, r_support, n + 1)
        return cls(r, np.asarray(f(r), dtype=float), r_support)


def _k0_logderivative(z: float) -> float:
    """k-side matching data K0'(z)/K0(z) by central differences of the kernel;
    the step shrinks with z so the stencil stays on the positive axis."""
    dz = min(1e-6 * max(1.0, z), 0.5 * z)
    kp = (bessel_k0(z + dz) - bessel_k0(z - dz)) / (2.0 * dz)
    return float((kp / bessel_k0(z)).real)


def matching_mismatch(profile: RadialProfile, eps: float, k: float,
                      r_min: float = 1e-8) -> float:
    """u'(R)/u(R) - k K0'(kR)/K0(kR) for the regular interior solution.

    RK4 on the profile mesh from the two-term series start
    u = 1 + (k^2 - eps V(0)) r^2 / 4.  A node at R shows up as +-inf, which
    the bisection driver treats through its sign.
    """
    if k <= 0:
        raise ValueError("k must be positive")
    R = profile.r_support
    nstep = len(profile.r) - 1
    h = (R - r_min) / nstep
    c = (k * k - eps * float(profile(0.0))) / 4.0
    u = 1.0 + c * r_min * r_min
    up = 2.0 * c * r_min

    def accel(r, u_, up_):
        return -up_ / r - (eps * float(profile(r)) - k * k) * u_

    r = r_min
    for _ in range(nstep):
        k1u, k1p = up, accel(r, u, up)
        k2u = up + 0.5 * h * k1p
        k2p = accel(r + 0.5 * h, u + 0.5 * h * k1u, k2u)
        k3u = up + 0.5 * h * k2p
        k3p = accel(r + 0.5 * h, u + 0.5 * h * k2u, k3u)
        k4u = up + h * k3p
        k4p = accel(r + h, u + h * k3u, k4u)
        u += (h / 6.0) * (k1u + 2 * k2u + 2 * k3u + k4u)
        up += (h / 6.0) * (k1p + 2 * k2p + 2 * k3p + k4p)
        r += h

    if u == 0.0:
        return float(np.inf) if up > 0 else float(-np.inf)
    return up / u - k * _k0_logderivative(k * R)


def radial_bound_state(profile: RadialProfile, eps: float,
                       bracket: tuple[float, float],
                       rtol: float = 1e-10) -> dict:
    """Bisection for the matching root inside the bracket; lambda = -k^2."""
    k_lo, k_hi = bracket
    if not (0 < k_lo < k_hi):
        raise ValueError(f"invalid bracket {bracket}")
    f_lo = matching_mismatch(profile, eps, k_lo)
    f_hi = matching_mismatch(profile, eps, k_hi)
    if not np.isfinite(f_lo) or not np.isfinite(f_hi) or np.sign(f_lo) == np.sign(f_hi):
        raise NoBoundStateInBracket(
            f"no sign change on [{k_lo:.3e}, {k_hi:.3e}]: ({f_lo:.3e}, {f_hi:.3e})")
    while (k_hi - k_lo) > rtol * k_hi:
        k_mid = 0.5 * (k_lo + k_hi)
        f_mid = matching_mismatch(profile, eps, k_mid)
        if f_mid == 0.0:
            k_lo = k_hi = k_mid
            break
        if np.sign(f_mid) == np.sign(f_lo):
            k_lo, f_lo = k_mid, f_mid
        else:
            k_hi, f_hi = k_mid, f_mid
    k_root = 0.5 * (k_lo + k_hi)
    return {"k": k_root, "lambda": -k_root * k_root}


def default_bracket(m_tilde_real: float, k_hi: float = 0.5) -> tuple[float, float]:
    """Bracket (exp(-2 Re M), k_hi): the lower end sits far below the
    predicted root magnitude exp(-Re M)."""
    return float(np.exp(-2.0 * m_tilde_real)), k_hi
