"""The logarithmic potential, the three perturbation variants, and moment series.

The Nystrom rule for the log kernel punctures the singular node and restores
accuracy through closed-form rectangle integrals: every row is made exact on
constants, and optionally on linear/quadratic local behaviour when analytic
derivative samples of the density are supplied.  The same off-diagonal /
corrected-diagonal split is reused by the characteristic solver.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .geometry import Field, RectDomain, TensorGrid, integrate
from .potentials import Potential, sample_potential

TWO_PI = 2.0 * np.pi

# ---------------------------------------------------------------------------
# closed-form rectangle integrals of the kernels times low-order monomials
# (corner primitives P with d2P/du dv = integrand, vanishing on the axes)
# ---------------------------------------------------------------------------


def _atan(a, b):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(np.abs(b) > 0, np.arctan(np.divide(a, np.where(b == 0, 1.0, b))), 0.0)


def _lnr2(r2):
    with np.errstate(divide="ignore"):
        return np.where(r2 > 0, np.log(np.where(r2 == 0, 1.0, r2)), 0.0)


def _P_ln(u, v):
    r2 = u * u + v * v
    return 0.5 * (u * v * _lnr2(r2) - 3.0 * u * v
                  + u * u * _atan(v, u) + v * v * _atan(u, v))


def _P_ln_u(u, v):
    r2 = u * u + v * v
    P = (0.25 * v * (u * u + v * v / 3.0) * _lnr2(r2)
         + (u ** 3 / 3.0) * _atan(v, u)
         - (7.0 / 12.0) * u * u * v - (5.0 / 36.0) * v ** 3)
    return P - ((v ** 3 / 12.0) * _lnr2(v * v) - (5.0 / 36.0) * v ** 3)


def _P_ln_uu(u, v):
    r2 = u * u + v * v
    return ((u ** 4 / 4.0) * _atan(v, u) - (v ** 4 / 12.0) * _atan(u, v)
            + (u ** 3 * v / 6.0) * _lnr2(r2)
            - (13.0 / 36.0) * u ** 3 * v + u * v ** 3 / 12.0)


def _P_ln_uv(u, v):
    r2 = u * u + v * v
    return (r2 * r2 * _lnr2(r2) - u ** 4 * _lnr2(u * u)
            - v ** 4 * _lnr2(v * v) - 3.0 * u * u * v * v) / 16.0


def _P_grad(u, v):
    # d2P/dudv = u / (u^2 + v^2)
    r2 = u * u + v * v
    return 0.5 * v * (_lnr2(r2) - _lnr2(v * v)) + u * _atan(v, u)


def _P_grad_uu(u, v):
    # d2P/dudv = u^2 / (u^2 + v^2)
    return 0.5 * (u * v + u * u * _atan(v, u) - v * v * _atan(u, v))


def _P_grad_uv(u, v):
    # d2P/dudv = u v / (u^2 + v^2)
    r2 = u * u + v * v
    return 0.25 * (r2 * _lnr2(r2) - u * u * _lnr2(u * u) - v * v * _lnr2(v * v))


def _corners(P, x, y, rect, swap=False):
    x0, x1, y0, y1 = rect
    if swap:
        return (P(y - y0, x - x0) - P(y - y1, x - x0)
                - P(y - y0, x - x1) + P(y - y1, x - x1))
    return (P(x - x0, y - y0) - P(x - x1, y - y0)
            - P(x - x0, y - y1) + P(x - x1, y - y1))


def rect_log_moments(x, y, rect):
    """Exact integrals over the rectangle of ln|x-y| times 1, (y-x)_m and
    (y-x)_m (y-x)_n, as functions of the target x."""
    I = _corners(_P_ln, x, y, rect)
    J1 = -_corners(_P_ln_u, x, y, rect)
    J2 = -_corners(_P_ln_u, x, y, rect, swap=True)
    K11 = _corners(_P_ln_uu, x, y, rect)
    K22 = _corners(_P_ln_uu, x, y, rect, swap=True)
    K12 = _corners(_P_ln_uv, x, y, rect)
    return I, J1, J2, K11, K22, K12


def rect_grad_moments(x, y, rect):
    """Exact integrals over the rectangle of (x-y)_l / |x-y|^2 times 1 and
    (y-x)_m: (Gx, Gy, Mx1, Mx2, My1, My2)."""
    Gx = _corners(_P_grad, x, y, rect)
    Gy = _corners(_P_grad, x, y, rect, swap=True)
    Mx1 = -_corners(_P_grad_uu, x, y, rect)
    Mx2 = -_corners(_P_grad_uv, x, y, rect)
    My2 = -_corners(_P_grad_uu, x, y, rect, swap=True)
    return Gx, Gy, Mx1, Mx2, Mx2, My2


# ---------------------------------------------------------------------------
# log potential application
# ---------------------------------------------------------------------------

_BLOCK = 1024


def _selfgrid_log_apply(grid: TensorGrid, jobs):
    """Batched self-grid application of (1/2pi) int ln|x-y| g(y) dy.

    jobs: list of (values, derivs) with derivs None, (gx, gy) or
    (gx, gy, gxx, gxy, gyy) as plain arrays.  One kernel pass serves all jobs.
    """
    rect = grid.domain.as_tuple()
    x, y, w = grid.x, grid.y, grid.w
    N = grid.size
    need_lin = any(d is not None for _, d in jobs)
    need_quad = any(d is not None and len(d) == 5 for _, d in jobs)
    I, J1, J2, K11, K22, K12 = rect_log_moments(x, y, rect)
    outs = [np.empty(N, dtype=complex) for _ in jobs]
    for i0 in range(0, N, _BLOCK):
        i1 = min(i0 + _BLOCK, N)
        s = slice(i0, i1)
        dx = x[s, None] - x[None, :]
        dy = y[s, None] - y[None, :]
        r2 = dx * dx + dy * dy
        ii = np.arange(i1 - i0)
        r2[ii, np.arange(i0, i1)] = 1.0
        K = 0.5 * np.log(r2) * w[None, :]
        S0 = K.sum(axis=1)
        if need_lin:
            Sx = (K * dx).sum(axis=1)
            Sy = (K * dy).sum(axis=1)
        if need_quad:
            Sxx = (K * dx * dx).sum(axis=1)
            Sxy = (K * dx * dy).sum(axis=1)
            Syy = (K * dy * dy).sum(axis=1)
        for out, (g, d) in zip(outs, jobs):
            acc = K @ g + (I[s] - S0) * g[s]
            if d is not None:
                gx, gy = d[0], d[1]
                acc += (J1[s] + Sx) * gx[s] + (J2[s] + Sy) * gy[s]
                if len(d) == 5:
                    gxx, gxy, gyy = d[2], d[3], d[4]
                    acc += (0.5 * (K11[s] - Sxx) * gxx[s]
                            + 0.5 * (K22[s] - Syy) * gyy[s]
                            + (K12[s] - Sxy) * gxy[s])
            out[i0:i1] = acc
    return [o / TWO_PI for o in outs]


def _density_interpolant(grid: TensorGrid, g: np.ndarray):
    """Cubic-spline surrogate of a grid density (zero outside the domain),
    with first derivatives; None when the grid is too small to spline."""
    if grid.n < 4:
        return None
    from scipy.interpolate import RectBivariateSpline
    g2 = g.reshape(grid.n, grid.n)
    sre = RectBivariateSpline(grid.xs, grid.ys, g2.real)
    sim = RectBivariateSpline(grid.xs, grid.ys, g2.imag)
    d = grid.domain

    def ev(tx, ty, dx=0, dy=0):
        inside = (tx >= d.x0) & (tx <= d.x1) & (ty >= d.y0) & (ty <= d.y1)
        vals = sre.ev(tx, ty, dx=dx, dy=dy) + 1j * sim.ev(tx, ty, dx=dx, dy=dy)
        return np.where(inside, vals, 0.0)

    return ev


def _offgrid_log_apply(grid: TensorGrid, g: np.ndarray, tx, ty):
    """Log-kernel quadrature at arbitrary targets.  Local behaviour of the
    density through second order (via its spline surrogate) is subtracted and
    restored through the closed-form moments, so targets close to source
    nodes stay accurate."""
    interp = _density_interpolant(grid, g)
    if interp is not None:
        u_at = interp(tx, ty)
        ux_at = interp(tx, ty, dx=1)
        uy_at = interp(tx, ty, dy=1)
        uxx_at = interp(tx, ty, dx=2)
        uxy_at = interp(tx, ty, dx=1, dy=1)
        uyy_at = interp(tx, ty, dy=2)
        I, J1, J2, K11, K22, K12 = rect_log_moments(tx, ty, grid.domain.as_tuple())
    wg = grid.w * g
    out = np.empty(len(tx), dtype=complex)
    for i0 in range(0, len(tx), _BLOCK):
        i1 = min(i0 + _BLOCK, len(tx))
        s = slice(i0, i1)
        dx = tx[s, None] - grid.x[None, :]
        dy = ty[s, None] - grid.y[None, :]
        r2 = dx * dx + dy * dy
        if np.any(r2 == 0.0):
            r2 = np.where(r2 == 0.0, 1.0, r2)  # coincident node: ln 1 = 0
        if interp is None:
            out[s] = (0.5 * np.log(r2)) @ wg
            continue
        K = 0.5 * np.log(r2) * grid.w[None, :]
        out[s] = (K @ g + (I[s] - K.sum(axis=1)) * u_at[s]
                  + (J1[s] + (K * dx).sum(axis=1)) * ux_at[s]
                  + (J2[s] + (K * dy).sum(axis=1)) * uy_at[s]
                  + 0.5 * (K11[s] - (K * dx * dx).sum(axis=1)) * uxx_at[s]
                  + 0.5 * (K22[s] - (K * dy * dy).sum(axis=1)) * uyy_at[s]
                  + (K12[s] - (K * dx * dy).sum(axis=1)) * uxy_at[s])
    return out / TWO_PI


def apply_inverse_laplacian(g: Field, targets: Optional[TensorGrid] = None,
                            derivs: Optional[tuple] = None) -> Field:
    """(1/2pi) int ln|x-y| g(y) dy evaluated at the target nodes.

    On the source grid itself the singular node is punctured and the row is
    corrected with closed-form rectangle moments; passing ``derivs`` (fields
    (gx, gy) or (gx, gy, gxx, gxy, gyy)) raises the local exactness from
    constants to linear or quadratic densities.
    """
    if targets is None or targets is g.grid:
        d = None
        if derivs is not None:
            d = tuple(f.values for f in derivs)
            if len(d) not in (2, 5):
                raise ValueError("derivs must be (gx, gy) or (gx, gy, gxx, gxy, gyy)")
        (out,) = _selfgrid_log_apply(g.grid, [(g.values, d)])
        return Field(g.grid, out)
    out = _offgrid_log_apply(g.grid, g.values, targets.x, targets.y)
    return Field(targets, out)


def grad_inverse_laplacian(g: Field, targets: Optional[TensorGrid] = None,
                           derivs: Optional[tuple] = None):
    """(1/2pi) int (x-y)/|x-y|^2 g(y) dy componentwise.

    On the source grid the singular node contributes zero (odd kernel) and
    each row is made exact on constants via the closed-form rectangle
    integral of the kernel; supplying ``derivs = (gx, gy)`` raises that
    to exactness on linear densities.
    """
    src = g.grid
    selfgrid = targets is None or targets is src
    tgt = src if selfgrid else targets
    tx, ty = tgt.x, tgt.y
    rect = src.domain.as_tuple()
    GX, GY, MX1, MX2, MY1, MY2 = rect_grad_moments(tx, ty, rect)
    lin = None
    if selfgrid and derivs is not None:
        lin = (derivs[0].values, derivs[1].values)
    gx = np.empty(tgt.size, dtype=complex)
    gy = np.empty(tgt.size, dtype=complex)
    vals = g.values
    w = src.w
    for i0 in range(0, tgt.size, _BLOCK):
        i1 = min(i0 + _BLOCK, tgt.size)
        dx = tx[i0:i1, None] - src.x[None, :]
        dy = ty[i0:i1, None] - src.y[None, :]
        r2 = dx * dx + dy * dy
        if selfgrid:
            ii = np.arange(i1 - i0)
            jj = np.arange(i0, i1)
            r2[ii, jj] = 1.0
            dx[ii, jj] = 0.0
            dy[ii, jj] = 0.0
        KX = (dx / r2) * w[None, :]
        KY = (dy / r2) * w[None, :]
        s = slice(i0, i1)
        gx[s] = KX @ vals
        gy[s] = KY @ vals
        if selfgrid:
            gx[s] += (GX[s] - KX.sum(axis=1)) * vals[s]
            gy[s] += (GY[s] - KY.sum(axis=1)) * vals[s]
            if lin is not None:
                gx[s] += ((MX1[s] + (KX * dx).sum(axis=1)) * lin[0][s]
                          + (MX2[s] + (KX * dy).sum(axis=1)) * lin[1][s])
                gy[s] += ((MY1[s] + (KY * dx).sum(axis=1)) * lin[0][s]
                          + (MY2[s] + (KY * dy).sum(axis=1)) * lin[1][s])
    return Field(tgt, gx / TWO_PI), Field(tgt, gy / TWO_PI)


def inverse_laplacian_matrix(grid: TensorGrid) -> np.ndarray:
    """Dense matrix of the self-grid log-potential rule (constants-exact
    diagonal); the k -> 0 limit block of the characteristic-solver assembly."""
    x, y, w = grid.x, grid.y, grid.w
    dx = x[:, None] - x[None, :]
    dy = y[:, None] - y[None, :]
    r2 = dx * dx + dy * dy
    np.fill_diagonal(r2, 1.0)
    M = 0.5 * np.log(r2) * w[None, :]
    I = rect_log_moments(x, y, grid.domain.as_tuple())[0]
    np.fill_diagonal(M, np.diag(M) + I - M.sum(axis=1))
    return M / TWO_PI


# ---------------------------------------------------------------------------
# spectral differentiation on the tensor grid (divergence-form derivatives)
# ---------------------------------------------------------------------------


def _diff_matrix_1d(nodes: np.ndarray, halfwidth: float) -> np.ndarray:
    """Barycentric differentiation matrix on Gauss-Legendre nodes."""
    t = (nodes - nodes.mean()) / halfwidth
    lam = np.array([(-1.0) ** j for j in range(len(t))]) * np.sqrt(1.0 - t * t)
    D = np.zeros((len(t), len(t)))
    for i in range(len(t)):
        for j in range(len(t)):
            if i != j:
                D[i, j] = (lam[j] / lam[i]) / (t[i] - t[j])
    np.fill_diagonal(D, -D.sum(axis=1))
    return D / halfwidth


def grid_derivative(g: Field, axis: int) -> Field:
    """d/dx or d/dy of a field on its Gauss tensor grid."""
    grid = g.grid
    if grid.kind != "gauss":
        raise ValueError("spectral differentiation needs a gauss grid")
    n = grid.n
    vals = g.values.reshape(n, n)
    if axis == 0:
        D = _diff_matrix_1d(grid.xs, 0.5 * (grid.domain.x1 - grid.domain.x0))
        out = D @ vals
    else:
        D = _diff_matrix_1d(grid.ys, 0.5 * (grid.domain.y1 - grid.domain.y0))
        out = vals @ D.T
    return Field(grid, out.ravel())


# ---------------------------------------------------------------------------
# perturbation variants
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Multiplicative:
    """L[g] = (V + eps*V1) g."""

    v: Potential
    v1: Optional[Potential] = None
    bound_constant: Optional[float] = None

    def __post_init__(self):
        if self.bound_constant is not None and self.bound_constant <= 0:
            raise ValueError("bound_constant must be positive")

    @property
    def is_real(self) -> bool:
        return self.v.is_real and (self.v1 is None or self.v1.is_real)

    def potential_at(self, eps: float) -> Potential:
        from .potentials import Scaled, SumPotential
        if self.v1 is None:
            return self.v
        return SumPotential([self.v, Scaled(self.v1, eps)])


@dataclass(frozen=True)
class RankOne:
    """L[g] = chi(Q) <rho g>."""

    rho: Potential
    domain: RectDomain
    bound_constant: Optional[float] = None

    def __post_init__(self):
        if not self.domain.contains(self.rho.support):
            raise ValueError("rank-one density support exceeds its domain")
        if self.bound_constant is not None and self.bound_constant <= 0:
            raise ValueError("bound_constant must be positive")

    @property
    def is_real(self) -> bool:
        return self.rho.is_real

    def indicator(self, grid: TensorGrid) -> np.ndarray:
        d = self.domain
        return (((grid.x >= d.x0) & (grid.x <= d.x1)
                 & (grid.y >= d.y0) & (grid.y <= d.y1)).astype(complex))


@dataclass(frozen=True)
class DivergenceForm:
    """L[g] = sum_ij d_i(a_ij d_j g) + sum_i d_i(b_i g) + zero-order part."""

    a: tuple  # 2x2 of Potential | None
    b: tuple  # 2 of Potential | None
    zero_order: Union[Multiplicative, RankOne]
    bound_constant: Optional[float] = None

    def __post_init__(self):
        if len(self.a) != 2 or any(len(row) != 2 for row in self.a) or len(self.b) != 2:
            raise ValueError("divergence form needs a 2x2 matrix and a 2-vector")
        if self.bound_constant is not None and self.bound_constant <= 0:
            raise ValueError("bound_constant must be positive")

    @property
    def is_real(self) -> bool:
        coeffs = [c for row in self.a for c in row] + list(self.b)
        return (all(c is None or c.is_real for c in coeffs)
                and self.zero_order.is_real)


Perturbation = Union[Multiplicative, RankOne, DivergenceForm]


def effective_bound_constant(p: Perturbation) -> float:
    """User bound if given, else a crude sup/L1-type estimate (reporting only)."""
    if isinstance(p, Multiplicative):
        if p.bound_constant is not None:
            return p.bound_constant
        c = p.v.sup_norm() + (p.v1.sup_norm() if p.v1 is not None else 0.0)
    elif isinstance(p, RankOne):
        if p.bound_constant is not None:
            return p.bound_constant
        c = p.rho.one_norm()
    else:
        if p.bound_constant is not None:
            return p.bound_constant
        c = effective_bound_constant(p.zero_order)
        c += sum(q.sup_norm() for row in p.a for q in row if q is not None)
        c += sum(q.sup_norm() for q in p.b if q is not None)
    return max(c, 1e-12)


def l_of_one(p: Perturbation, grid: TensorGrid, eps: float) -> Field:
    """The source field L[1]."""
    if isinstance(p, Multiplicative):
        return sample_potential(p.potential_at(eps), grid)
    if isinstance(p, RankOne):
        rho = sample_potential(p.rho, grid)
        return Field(grid, p.indicator(grid) * integrate(rho))
    # divergence form: a_ij d_j 1 = 0; d_i(b_i * 1) = d_i b_i
    vals = l_of_one(p.zero_order, grid, eps).values.copy()
    for i, bi in enumerate(p.b):
        if bi is not None:
            vals += bi.derivative(grid.x, grid.y, 1 - i, i)  # d/dx for i=0, d/dy for i=1
    return Field(grid, vals)


def apply_perturbation(p: Perturbation, g: Field, eps: float) -> Field:
    """Apply the perturbation operator to a sampled function."""
    grid = g.grid
    if isinstance(p, Multiplicative):
        pot = p.potential_at(eps)
        if not grid.domain.contains(pot.support):
            raise ValueError("grid does not cover the perturbation support")
        return Field(grid, pot.values(grid.x, grid.y) * g.values)
    if isinstance(p, RankOne):
        if not grid.domain.contains(p.domain):
            raise ValueError("grid does not cover the rank-one domain")
        rho = sample_potential(p.rho, grid)
        coupling = complex(np.dot(grid.w, rho.values * g.values))
        return Field(grid, p.indicator(grid) * coupling)
    # divergence form
    gx = grid_derivative(g, 0)
    gy = grid_derivative(g, 1)
    dg = (gx.values, gy.values)
    out = apply_perturbation(p.zero_order, g, eps).values.copy()
    second = {}
    X, Y = grid.x, grid.y
    for i in range(2):
        for j in range(2):
            aij = p.a[i][j]
            if aij is None:
                continue
            # d_i(a_ij d_j g) = (d_i a_ij)(d_j g) + a_ij d_i d_j g
            da = aij.derivative(X, Y, 1 - i, i)
            out += da * dg[j]
            if (i, j) not in second:
                base = gx if j == 0 else gy
                second[(i, j)] = grid_derivative(base, i).values
            out += aij.values(X, Y) * second[(i, j)]
    for i, bi in enumerate(p.b):
        if bi is None:
            continue
        out += bi.derivative(X, Y, 1 - i, i) * g.values + bi.values(X, Y) * dg[i]
    return Field(grid, out)


# ---------------------------------------------------------------------------
# moment series
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MomentSeries:
    """Coefficients c_j of the nested functionals driving the asymptotic
    exponent; ``ratio`` is the geometric ratio for the rank-one closed form."""

    coeffs: np.ndarray
    provenance: str
    ratio: Optional[complex] = None

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1


def moment_series(p: Perturbation, grid: TensorGrid, eps: float, J: int) -> MomentSeries:
    """c_j for j = 0..J.

    Multiplicative perturbations iterate multiply-then-log-potential on the
    grid; rank-one uses the exact geometric closed form; a divergence-form
    operator reduces to its zero-order part (the first- and second-order
    pieces integrate to zero against everything the series produces).
    """
    if J < 0:
        raise ValueError("moment order J must be >= 0")
    if isinstance(p, DivergenceForm):
        return moment_series(p.zero_order, grid, eps, J)
    if isinstance(p, RankOne):
        rho = sample_potential(p.rho, grid)
        chi = Field(grid, p.indicator(grid))
        r0 = integrate(rho)
        q = complex(np.dot(grid.w, rho.values
                           * apply_inverse_laplacian(chi).values))
        area = p.domain.area()
        coeffs = np.array([r0 * area * q ** j for j in range(J + 1)])
        return MomentSeries(coeffs, "closed-form-rank-one", ratio=q)
    f = l_of_one(p, grid, eps)
    coeffs = [integrate(f)]
    for _ in range(J):
        f = apply_perturbation(p, apply_inverse_laplacian(f), eps)
        coeffs.append(integrate(f))
    return MomentSeries(np.array(coeffs), "quadrature")


# ---------------------------------------------------------------------------
# the integration-by-parts identity suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IdentityReport:
    lhs: tuple
    rhs: tuple
    rel: tuple

    def worst(self) -> float:
        return max(self.rel)


def check_identities(u: Potential, domain: RectDomain, n: int = 96,
                     enlargement: float = 3.0, n_exterior: int = 24) -> IdentityReport:
    """Check the three zero-mean integration-by-parts identities.

    ``u`` must be (numerically) zero-mean with analytic derivatives through
    order 3; the gradient-energy side is integrated over the ``enlargement``-
    times-scaled rectangle, the tail beyond it decaying like a dipole.
    """
    if u.max_derivative_order < 3:
        raise ValueError("identity suite needs derivatives through order 3")
    grid = TensorGrid(domain, n)
    X, Y = grid.x, grid.y

    def d(ax, ay):
        return np.asarray(u.derivative(X, Y, ax, ay), dtype=complex)

    U = d(0, 0)
    mean = np.dot(grid.w, U)
    scale = np.dot(grid.w, np.abs(U))
    if abs(mean) > 1e-8 * scale:
        raise ValueError(f"identity suite needs <U> = 0, got <U> = {mean:.3e}")

    jobs = [
        (U, (d(1, 0), d(0, 1), d(2, 0), d(1, 1), d(0, 2))),
        (d(1, 0), (d(2, 0), d(1, 1), d(3, 0), d(2, 1), d(1, 2))),
        (d(0, 1), (d(1, 1), d(0, 2), d(2, 1), d(1, 2), d(0, 3))),
        (U, None),
    ]
    phi, gx, gy, phi0 = _selfgrid_log_apply(grid, jobs)
    w = grid.w

    # identity 1: <U invlap U> = -<|grad invlap U|^2> over the enlarged plane
    lhs1 = complex(np.dot(w, U * phi))
    interior = np.dot(w, gx * gx + gy * gy)
    exterior = 0.0 + 0.0j
    ux, uy = jobs[1][0], jobs[2][0]
    big = domain.scaled(enlargement)
    xs_panels = [big.x0, domain.x0, domain.x1, big.x1]
    ys_panels = [big.y0, domain.y0, domain.y1, big.y1]
    for i in range(3):
        for j in range(3):
            if i == 1 and j == 1:
                continue
            panel = RectDomain(xs_panels[i], xs_panels[i + 1],
                               ys_panels[j], ys_panels[j + 1])
            pg = TensorGrid(panel, n_exterior)
            egx = _offgrid_log_apply(grid, ux, pg.x, pg.y)
            egy = _offgrid_log_apply(grid, uy, pg.x, pg.y)
            exterior += np.dot(pg.w, egx * egx + egy * egy)
    rhs1 = -complex(interior + exterior)

    # identities 2 and 3 through the plain (constants-exact) rule, whose
    # weighted matrix is symmetric
    f2 = U * phi0
    (h2,) = _selfgrid_log_apply(grid, [(f2, None)])
    lhs2 = complex(np.dot(w, U * h2))
    rhs2 = complex(np.dot(w, U * phi0 * phi0))
    f3 = U * h2
    (h3,) = _selfgrid_log_apply(grid, [(f3, None)])
    lhs3 = complex(np.dot(w, U * h3))
    rhs3 = complex(np.dot(w, f2 * h2))

    def rel(a, b):
        return abs(a - b) / max(abs(a), abs(b), 1e-300)

    return IdentityReport(
        lhs=(lhs1, lhs2, lhs3),
        rhs=(rhs1, rhs2, rhs3),
        rel=(rel(lhs1, rhs1), rel(lhs2, rhs2), rel(lhs3, rhs3)),
    )
