"""Nystrom discretization of the characteristic equation and its root finder.

The resolvent-kernel operator splits as K0(k r) = -ln r + [k0_plus_log(k r)],
so the assembled matrix carries no ln k at all: the explicit ln k of the
characteristic function is the only place the branch enters.  Root finding
runs in M = -ln k, where the root is O(1/eps) and well conditioned; k itself
is exponentially small.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
import scipy.linalg as sla

from .geometry import Field, RectDomain, TensorGrid
from .logpotential import (DivergenceForm, Multiplicative, Perturbation, RankOne,
                           _diff_matrix_1d, inverse_laplacian_matrix, l_of_one,
                           moment_series)
from .potentials import sample_potential
from .predictor import m_tilde
from .special import EULER_GAMMA, LN2, bessel_k0, k0_plus_log

TWO_PI = 2.0 * np.pi
K0PL_AT_ZERO = LN2 - EULER_GAMMA


class NearSingularOperatorError(RuntimeError):
    def __init__(self, k, cond):
        super().__init__(f"I + eps*T0 nearly singular at k={k} (cond ~ {cond:.2e})")
        self.k = k
        self.cond = cond


class NoRootFoundError(RuntimeError):
    pass


class InconclusiveContourError(RuntimeError):
    pass


@dataclass
class DiscretizedOperator:
    k: complex
    eps: float
    matrix: np.ndarray
    grid: TensorGrid
    perturbation: Perturbation


@dataclass
class CharEqSolution:
    k_root: complex
    lam: complex
    m_solved: complex
    iterations: int
    char_value: complex
    eigenfunction: Optional[Field] = None
    residual_norm: Optional[float] = None
    region_root_count: Optional[int] = None


@dataclass
class SolverResult:
    """Either a located root or a certified small-k absence."""

    outcome: str                     # "root" | "absent"
    solution: Optional[CharEqSolution]
    reason: str = ""                 # for "absent": exited-disk | nonpositive-real-k
    m_last: Optional[complex] = None
    iterations: int = 0

    @property
    def found(self) -> bool:
        return self.outcome == "root"


def _check_k(k: complex, grid: TensorGrid):
    k = complex(k)
    if k == 0 or (k.imag == 0 and k.real < 0):
        raise ValueError(f"k={k} lies on the closed negative real axis")
    if abs(k) * grid.domain.diameter() > 50.0:
        raise ValueError(f"|k|*diam(Q) = {abs(k) * grid.domain.diameter():.3g} "
                         "exceeds the kernel accuracy envelope (50)")
    return k


class _Assembly:
    """Grid- and perturbation-dependent pieces reused across k evaluations."""

    def __init__(self, p: Perturbation, grid: TensorGrid, eps: float,
                 cond_limit: float = 1e12):
        self.p = p
        self.grid = grid
        self.eps = eps
        self.cond_limit = cond_limit
        x, y = grid.x, grid.y
        dx = x[:, None] - x[None, :]
        dy = y[:, None] - y[None, :]
        self.r = np.sqrt(dx * dx + dy * dy)
        self.invlap = inverse_laplacian_matrix(grid)
        self.l1 = l_of_one(p, grid, eps).values
        self._lmat = None
        if isinstance(p, Multiplicative):
            self._vscale = p.potential_at(eps).values(x, y)
        elif isinstance(p, RankOne):
            self._chi = p.indicator(grid)
            self._rho_w = sample_potential(p.rho, grid).values * grid.w
        else:
            self._lmat = _divergence_matrix(p, grid, eps)

    def _a_part(self, k: complex) -> np.ndarray:
        """invlap - k0_plus_log(k r) w / (2pi): all k-dependence, no ln k."""
        Kp = k0_plus_log(k * self.r)
        np.fill_diagonal(Kp, K0PL_AT_ZERO)
        return self.invlap - (Kp * self.grid.w[None, :]) / TWO_PI

    def t0(self, k: complex) -> np.ndarray:
        k = _check_k(k, self.grid)
        A = self._a_part(k)
        if isinstance(self.p, Multiplicative):
            T = self._vscale[:, None] * A
        elif isinstance(self.p, RankOne):
            T = np.outer(self._chi, self._rho_w @ A)
        else:
            T = self._lmat @ A
        T -= ((EULER_GAMMA - LN2) / TWO_PI) * np.outer(self.l1, self.grid.w)
        return T

    def solve(self, k: complex):
        """Returns (F(k), <B L1>, B L1) with a conditioning guard."""
        T = self.t0(k)
        N = self.grid.size
        A = np.eye(N, dtype=complex) + self.eps * T
        anorm = np.linalg.norm(A, 1)
        lu, piv = sla.lu_factor(A)
        gecon = sla.get_lapack_funcs("gecon", (A,))
        rcond, _ = gecon(lu, anorm, norm="1")
        if rcond == 0.0 or 1.0 / rcond > self.cond_limit:
            raise NearSingularOperatorError(k, np.inf if rcond == 0 else 1.0 / rcond)
        u = sla.lu_solve((lu, piv), self.l1.astype(complex))
        s = complex(np.dot(self.grid.w, u))
        F = 1.0 + self.eps * (np.log(k) + EULER_GAMMA - LN2) / TWO_PI * s
        return F, s, u


def _divergence_matrix(p: DivergenceForm, grid: TensorGrid, eps: float) -> np.ndarray:
    """Dense matrix of the divergence-form operator on the tensor grid."""
    n = grid.n
    Dx1 = _diff_matrix_1d(grid.xs, 0.5 * (grid.domain.x1 - grid.domain.x0))
    Dy1 = _diff_matrix_1d(grid.ys, 0.5 * (grid.domain.y1 - grid.domain.y0))
    eye = np.eye(n)
    D = [np.kron(Dx1, eye), np.kron(eye, Dy1)]
    X, Y = grid.x, grid.y
    N = grid.size
    L = np.zeros((N, N), dtype=complex)
    for i in range(2):
        for j in range(2):
            aij = p.a[i][j]
            if aij is None:
                continue
            da = aij.derivative(X, Y, 1 - i, i)
            L += da[:, None] * D[j] + aij.values(X, Y)[:, None] * (D[i] @ D[j])
    for i, bi in enumerate(p.b):
        if bi is None:
            continue
        L += np.diag(bi.derivative(X, Y, 1 - i, i)) + bi.values(X, Y)[:, None] * D[i]
    z = p.zero_order
    if isinstance(z, Multiplicative):
        L += np.diag(z.potential_at(eps).values(X, Y))
    else:
        L += np.outer(z.indicator(grid), sample_potential(z.rho, grid).values * grid.w)
    return L


def assemble_t0(p: Perturbation, grid: TensorGrid, k: complex, eps: float) -> DiscretizedOperator:
    """The discretized compact part of the characteristic operator at k."""
    asm = _Assembly(p, grid, eps)
    return DiscretizedOperator(complex(k), eps, asm.t0(k), grid, p)


def char_function(p: Perturbation, grid: TensorGrid, k: complex, eps: float) -> complex:
    """F(k) = 1 + eps (ln k + gamma - ln 2) <B(k) L[1]> / (2 pi)."""
    asm = _Assembly(p, grid, eps)
    F, _, _ = asm.solve(k)
    return F


def find_root(p: Perturbation, grid: TensorGrid, eps: float,
              init: Optional[complex] = None, r0: float = 0.5,
              tol: float = 1e-12, max_iter: int = 50, J: int = 3,
              eval_grid: Optional[TensorGrid] = None,
              compute_eigenfunction: bool = True,
              cond_limit: float = 1e12) -> SolverResult:
    """Locate the small-k characteristic root by fixed-point iteration in
    M = -ln k, with a secant fallback; certify absence when the iteration
    leaves the disk |k| <= r0 or lands at Re k <= 0."""
    asm = _Assembly(p, grid, eps, cond_limit)
    if init is None:
        M = m_tilde(moment_series(p, grid, eps, J), eps)
    else:
        M = -np.log(complex(init))

    history = []
    iterations = 0
    converged = False
    for _ in range(max_iter):
        k = np.exp(-M)
        if abs(k) > r0:
            return SolverResult("absent", None, "exited-disk", M, iterations)
        F, s, _ = asm.solve(k)
        history.append((M, F))
        Mn = TWO_PI / (eps * s) + EULER_GAMMA - LN2
        iterations += 1
        if abs(Mn - M) <= tol * (1.0 + abs(M)):
            M = Mn
            converged = True
            break
        M = Mn

    if not converged and len(history) >= 2:
        # secant on F along the M-parametrization
        (m0, f0), (m1, f1) = history[-2], history[-1]
        for _ in range(30):
            if f1 == f0:
                break
            m2 = m1 - f1 * (m1 - m0) / (f1 - f0)
            k2 = np.exp(-m2)
            if abs(k2) > r0:
                return SolverResult("absent", None, "exited-disk", m2, iterations)
            F2, _, _ = asm.solve(k2)
            iterations += 1
            m0, f0, m1, f1 = m1, f1, m2, F2
            if abs(m1 - m0) <= tol * (1.0 + abs(m1)):
                M = m1
                converged = True
                break

    if not converged:
        raise NoRootFoundError(
            f"no convergence after {iterations} characteristic evaluations")

    k_root = complex(np.exp(-M))
    if abs(k_root) > r0:
        return SolverResult("absent", None, "exited-disk", M, iterations)
    # the characteristic function carries the principal logarithm: a fixed
    # point with |Im M| > pi solves a different sheet, not F(k) = 0
    if abs(M.imag) > np.pi or k_root.real <= 0:
        return SolverResult("absent", None, "nonpositive-real-k", M, iterations)

    F, s, u = asm.solve(k_root)
    if abs(F) > 1e-6:
        raise NoRootFoundError(
            f"iteration settled at k={k_root:.3e} but |F| = {abs(F):.2e}")
    lam = -k_root ** 2
    sol = CharEqSolution(k_root, lam, complex(M), iterations, complex(F))
    if compute_eigenfunction:
        if eval_grid is None:
            eval_grid = TensorGrid(grid.domain.scaled(2.0), 64, kind="uniform")
        sol.eigenfunction, sol.residual_norm = eigenfunction_and_residual(
            p, grid, u, k_root, lam, eps, eval_grid)
    return SolverResult("root", sol, "", M, iterations)


def apply_resolvent_kernel(grid: TensorGrid, density: np.ndarray, k: complex,
                           tx: np.ndarray, ty: np.ndarray) -> np.ndarray:
    """A(k) applied to a grid density, evaluated at arbitrary points:
    -(1/2pi) int K0(k |x - y|) g(y) dy.

    Split as K0(k r) = -ln r - ln k + k0_plus_log(k r): the log part uses the
    moment-corrected off-grid rule, so targets arbitrarily close to source
    nodes stay accurate; only the explicit ln k carries the branch.
    """
    from .logpotential import _offgrid_log_apply

    ln_part = _offgrid_log_apply(grid, density, tx, ty)
    total = complex(np.dot(grid.w, density))
    wg = grid.w * density
    smooth = np.empty(len(tx), dtype=complex)
    for i0 in range(0, len(tx), 512):
        i1 = min(i0 + 512, len(tx))
        dx = tx[i0:i1, None] - grid.x[None, :]
        dy = ty[i0:i1, None] - grid.y[None, :]
        z = k * np.sqrt(dx * dx + dy * dy)
        smooth[i0:i1] = k0_plus_log(z) @ wg
    return ln_part + (np.log(k) * total - smooth) / TWO_PI


def _fd_laplacian(vals: np.ndarray, n: int, hx: float, hy: float):
    """5-point Laplacian on the uniform lattice; interior mask returned."""
    v = vals.reshape(n, n)
    lap = np.zeros_like(v)
    lap[1:-1, 1:-1] = ((v[2:, 1:-1] - 2 * v[1:-1, 1:-1] + v[:-2, 1:-1]) / hx ** 2
                       + (v[1:-1, 2:] - 2 * v[1:-1, 1:-1] + v[1:-1, :-2]) / hy ** 2)
    mask = np.zeros((n, n), dtype=bool)
    mask[1:-1, 1:-1] = True
    return lap.ravel(), mask.ravel()


def _fd_partial(vals: np.ndarray, n: int, h: float, axis: int):
    v = vals.reshape(n, n)
    out = np.zeros_like(v)
    if axis == 0:
        out[1:-1, :] = (v[2:, :] - v[:-2, :]) / (2 * h)
    else:
        out[:, 1:-1] = (v[:, 2:] - v[:, :-2]) / (2 * h)
    return out.ravel()


def _apply_perturbation_uniform(p: Perturbation, grid: TensorGrid,
                                vals: np.ndarray, eps: float) -> np.ndarray:
    """L[phi] on the uniform evaluation lattice (FD derivatives for the
    divergence variant)."""
    X, Y = grid.x, grid.y
    if isinstance(p, Multiplicative):
        return p.potential_at(eps).values(X, Y) * vals
    if isinstance(p, RankOne):
        rho = p.rho.values(X, Y)
        return p.indicator(grid) * np.dot(grid.w, rho * vals)
    n = grid.n
    hx = grid.xs[1] - grid.xs[0]
    hy = grid.ys[1] - grid.ys[0]
    d = [_fd_partial(vals, n, hx, 0), _fd_partial(vals, n, hy, 1)]
    out = _apply_perturbation_uniform(p.zero_order, grid, vals, eps)
    dd = {}
    for i in range(2):
        for j in range(2):
            aij = p.a[i][j]
            if aij is None:
                continue
            if (i, j) not in dd:
                dd[(i, j)] = _fd_partial(d[j], n, hx if i == 0 else hy, i)
            out = out + aij.derivative(X, Y, 1 - i, i) * d[j] \
                + aij.values(X, Y) * dd[(i, j)]
    for i, bi in enumerate(p.b):
        if bi is None:
            continue
        out = out + bi.derivative(X, Y, 1 - i, i) * vals + bi.values(X, Y) * d[i]
    return out


def eigenfunction_and_residual(p: Perturbation, grid: TensorGrid, density: np.ndarray,
                               k: complex, lam: complex, eps: float,
                               eval_grid: TensorGrid) -> tuple[Field, float]:
    """phi = A(k) B(k) L[1] on the evaluation lattice, normalized to unit
    peak with real-positive phase there, plus the eigen-equation residual
    |-lap(phi) - eps L[phi] - lam phi| / |phi| under 5-point differences."""
    if eval_grid.kind != "uniform":
        raise ValueError("residual evaluation needs a uniform lattice")
    phi = apply_resolvent_kernel(grid, density, k, eval_grid.x, eval_grid.y)
    peak = np.argmax(np.abs(phi))
    phi = phi / phi[peak]
    n = eval_grid.n
    hx = eval_grid.xs[1] - eval_grid.xs[0]
    hy = eval_grid.ys[1] - eval_grid.ys[0]
    lap, interior = _fd_laplacian(phi, n, hx, hy)
    lphi = _apply_perturbation_uniform(p, eval_grid, phi, eps)
    res = -lap - eps * lphi - lam * phi
    rnorm = float(np.linalg.norm(res[interior]) / np.linalg.norm(phi[interior]))
    return Field(eval_grid, phi), rnorm


@dataclass(frozen=True)
class AnnulusSector:
    """{ r_inner <= |k| <= r_outer, |arg k| <= half_angle }, kept off the cut."""

    r_inner: float
    r_outer: float
    half_angle: float

    def __post_init__(self):
        if not (0 < self.r_inner < self.r_outer):
            raise ValueError("need 0 < r_inner < r_outer")
        if not (0 < self.half_angle < np.pi):
            raise ValueError("half_angle must avoid the negative real axis")


def count_roots(p: Perturbation, grid: TensorGrid, eps: float,
                region: AnnulusSector, n_init: int = 24,
                fmin: float = 1e-8, max_depth: int = 12) -> int:
    """Winding number of the characteristic function around the sector
    boundary; adaptive refinement until every phase step is below pi/2."""
    asm = _Assembly(p, grid, eps)
    th, ri, ro = region.half_angle, region.r_inner, region.r_outer

    def boundary(t):
        # t in [0,4): outer arc, right edge inward, inner arc (reversed), left edge outward
        t = t % 4.0
        if t < 1.0:
            return ro * np.exp(1j * (-th + 2 * th * t))
        if t < 2.0:
            return (ro + (ri - ro) * (t - 1.0)) * np.exp(1j * th)
        if t < 3.0:
            return ri * np.exp(1j * (th - 2 * th * (t - 2.0)))
        return (ri + (ro - ri) * (t - 3.0)) * np.exp(-1j * th)

    cache: dict[float, complex] = {}

    def F(t):
        if t not in cache:
            cache[t] = asm.solve(boundary(t))[0]
        return cache[t]

    ts = list(np.linspace(0.0, 4.0, 4 * n_init + 1))
    total = 0.0
    segments = [(ts[i], ts[i + 1]) for i in range(len(ts) - 1)]
    while segments:
        a, b = segments.pop()
        fa, fb = F(a), F(b)
        if abs(fa) < fmin or abs(fb) < fmin:
            raise InconclusiveContourError(
                f"|F| < {fmin} on the contour near t={a:.4f}")
        dphase = np.angle(fb / fa)
        if abs(dphase) >= np.pi / 2:
            if (b - a) < 4.0 * 2.0 ** -max_depth:
                raise InconclusiveContourError(
                    f"phase step {dphase:.3f} persists at the refinement floor")
            mid = 0.5 * (a + b)
            segments.append((a, mid))
            segments.append((mid, b))
            continue
        total += dphase
    winding = total / TWO_PI
    count = int(round(winding))
    if abs(winding - count) > 0.25:
        raise InconclusiveContourError(f"non-integer winding {winding:.3f}")
    return count
