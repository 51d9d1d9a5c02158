"""Compactly supported potential families and the combinators the examples need.

Primitive families: cosine-bump, polynomial-bump, disk-indicator, constant,
tabulated (CSV).  Combinators: scaled, sum, laplacian-of, dx-of, dy-of; these
realize constructions like v + i*a*(lap v) or divergence-free first-order
coefficients without leaving the family system.

Every potential reports how many derivative orders it supports analytically;
polynomial bumps (and anything derived from them) support all orders through
an exact 2D polynomial representation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import comb

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.interpolate import RegularGridInterpolator

from .geometry import Field, RectDomain, TensorGrid


class UnsupportedDerivative(ValueError):
    """Requested an analytic derivative order the family does not provide."""


class Potential:
    """Base class: a complex-valued function with compact support."""

    support: RectDomain

    def derivative(self, x: np.ndarray, y: np.ndarray, ax: int, ay: int) -> np.ndarray:
        raise NotImplementedError

    def values(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.derivative(x, y, 0, 0)

    def grad(self, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        return self.derivative(x, y, 1, 0), self.derivative(x, y, 0, 1)

    def laplacian(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return self.derivative(x, y, 2, 0) + self.derivative(x, y, 0, 2)

    @property
    def max_derivative_order(self) -> int:
        return 0

    @property
    def is_real(self) -> bool:
        raise NotImplementedError

    def radial_profile(self):
        """(profile callable in r, support radius, center) for radially
        symmetric potentials, else None."""
        return None

    def sup_norm(self) -> float:
        x, y = _probe_points(self.support)
        return float(np.max(np.abs(self.values(x, y))))

    def one_norm(self) -> float:
        x, y = _probe_points(self.support)
        cell = self.support.area() / x.size
        return float(np.sum(np.abs(self.values(x, y))) * cell)


def _probe_points(rect: RectDomain, n: int = 160):
    gx = np.linspace(rect.x0, rect.x1, n)
    gy = np.linspace(rect.y0, rect.y1, n)
    X, Y = np.meshgrid(gx, gy, indexing="ij")
    return X.ravel(), Y.ravel()


def _disk_support(center, radius) -> RectDomain:
    cx, cy = center
    return RectDomain(cx - radius, cx + radius, cy - radius, cy + radius)


class PolynomialBump(Potential):
    """amplitude * (1 - (r/R)^2)^p inside r < R, extended by zero.

    Held as an exact bivariate polynomial, so partial derivatives of any
    order are available in closed form.
    """

    def __init__(self, amplitude: complex, center=(0.0, 0.0), radius: float = 1.0,
                 exponent: int = 3):
        if radius <= 0:
            raise ValueError("radius must be positive")
        if exponent < 1:
            raise ValueError("exponent must be >= 1 (use disk-indicator for p = 0)")
        self.amplitude = complex(amplitude)
        self.center = (float(center[0]), float(center[1]))
        self.radius = float(radius)
        self.exponent = int(exponent)
        self.support = _disk_support(self.center, self.radius)
        # (1 - s/R^2)^p expanded over dx^(2j) dy^(2(m-j))
        p, R2 = self.exponent, self.radius ** 2
        C = np.zeros((2 * p + 1, 2 * p + 1), dtype=complex)
        for m in range(p + 1):
            cm = self.amplitude * comb(p, m) * (-1.0 / R2) ** m
            for j in range(m + 1):
                C[2 * j, 2 * (m - j)] += cm * comb(m, j)
        self._poly = _Poly2D(C, self.center, self.support,
                             mask_disk=(self.center, self.radius))

    def derivative(self, x, y, ax, ay):
        return self._poly.derivative(x, y, ax, ay)

    @property
    def max_derivative_order(self) -> int:
        return 10 ** 9

    @property
    def is_real(self) -> bool:
        return self.amplitude.imag == 0.0

    def radial_profile(self):
        A, R, p = self.amplitude, self.radius, self.exponent
        def profile(r):
            r = np.asarray(r, dtype=float)
            return A.real * np.maximum(1.0 - (r / R) ** 2, 0.0) ** p
        return profile, R, self.center


class _Poly2D(Potential):
    """Bivariate polynomial about a center, cut off outside a disk."""

    def __init__(self, coeffs: np.ndarray, center, support: RectDomain, mask_disk):
        self.coeffs = coeffs
        self.center = center
        self.support = support
        self._mask_center, self._mask_radius = mask_disk

    def derivative(self, x, y, ax, ay):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        C = self.coeffs
        if ax >= C.shape[0] or ay >= C.shape[1]:
            return np.zeros(np.broadcast(x, y).shape, dtype=complex)
        if ax:
            C = npoly.polyder(C, m=ax, axis=0)
        if ay:
            C = npoly.polyder(C, m=ay, axis=1)
        dx = x - self.center[0]
        dy = y - self.center[1]
        vals = npoly.polyval2d(dx, dy, C)
        mx, my = self._mask_center
        inside = (x - mx) ** 2 + (y - my) ** 2 <= self._mask_radius ** 2
        return np.where(inside, vals, 0.0).astype(complex)

    @property
    def max_derivative_order(self) -> int:
        return 10 ** 9

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.coeffs.imag == 0))


class CosineBump(Potential):
    """amplitude * cos^2(pi r / (2R)) inside r < R; analytic through order 2."""

    def __init__(self, amplitude: complex, center=(0.0, 0.0), radius: float = 1.0):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.amplitude = complex(amplitude)
        self.center = (float(center[0]), float(center[1]))
        self.radius = float(radius)
        self.support = _disk_support(self.center, self.radius)

    def _uv(self, x, y):
        dx = np.asarray(x, dtype=float) - self.center[0]
        dy = np.asarray(y, dtype=float) - self.center[1]
        r = np.hypot(dx, dy)
        inside = r < self.radius
        u = np.pi * r / self.radius
        return dx, dy, r, u, inside

    def derivative(self, x, y, ax, ay):
        order = ax + ay
        if order > 2:
            raise UnsupportedDerivative(
                f"cosine-bump supports derivatives through order 2, asked for {order}")
        A, R = self.amplitude, self.radius
        dx, dy, r, u, inside = self._uv(x, y)
        if order == 0:
            vals = 0.5 * A * (1.0 + np.cos(u))
        else:
            # q1 = f'(r)/r, stable via sin(u)/u
            q1 = -(A * np.pi ** 2 / (2 * R * R)) * np.sinc(u / np.pi)
            if order == 1:
                vals = (dx if ax == 1 else dy) * q1
            else:
                q3 = -(A * np.pi ** 4 / (2 * R ** 4)) * _cos_minus_sinc_over_u2(u)
                if ax == 2:
                    vals = q1 + dx * dx * q3
                elif ay == 2:
                    vals = q1 + dy * dy * q3
                else:
                    vals = dx * dy * q3
        return np.where(inside, vals, 0.0).astype(complex)

    @property
    def max_derivative_order(self) -> int:
        return 2

    @property
    def is_real(self) -> bool:
        return self.amplitude.imag == 0.0

    def radial_profile(self):
        A, R = self.amplitude, self.radius
        def profile(r):
            r = np.asarray(r, dtype=float)
            return np.where(r < R, 0.5 * A.real * (1.0 + np.cos(np.pi * r / R)), 0.0)
        return profile, R, self.center


def _cos_minus_sinc_over_u2(u):
    """(cos u - sin(u)/u) / u^2, series-guarded near zero (limit -1/3)."""
    small = np.abs(u) < 1e-4
    us = np.where(small, 1.0, u)
    exact = (np.cos(us) - np.sinc(us / np.pi)) / (us * us)
    series = -1.0 / 3.0 + u * u / 30.0
    return np.where(small, series, exact)


class DiskIndicator(Potential):
    """amplitude on the disk r < R, zero outside; values only."""

    def __init__(self, amplitude: complex, center=(0.0, 0.0), radius: float = 1.0):
        if radius <= 0:
            raise ValueError("radius must be positive")
        self.amplitude = complex(amplitude)
        self.center = (float(center[0]), float(center[1]))
        self.radius = float(radius)
        self.support = _disk_support(self.center, self.radius)

    def derivative(self, x, y, ax, ay):
        if ax + ay > 0:
            raise UnsupportedDerivative("disk-indicator has no analytic derivatives")
        dx = np.asarray(x, dtype=float) - self.center[0]
        dy = np.asarray(y, dtype=float) - self.center[1]
        inside = dx * dx + dy * dy < self.radius ** 2
        return np.where(inside, self.amplitude, 0.0).astype(complex)

    @property
    def is_real(self) -> bool:
        return self.amplitude.imag == 0.0

    def radial_profile(self):
        A, R = self.amplitude, self.radius
        def profile(r):
            return np.where(np.asarray(r, dtype=float) < R, A.real, 0.0)
        return profile, R, self.center


class ConstantOnDomain(Potential):
    """amplitude on a whole rectangle; the rank-one density rho == const."""

    def __init__(self, amplitude: complex, domain: RectDomain):
        self.amplitude = complex(amplitude)
        self.support = domain

    def derivative(self, x, y, ax, ay):
        if ax + ay > 0:
            raise UnsupportedDerivative("constant density has no analytic derivatives")
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = self.support
        inside = (x >= d.x0) & (x <= d.x1) & (y >= d.y0) & (y <= d.y1)
        return np.where(inside, self.amplitude, 0.0).astype(complex)

    @property
    def is_real(self) -> bool:
        return self.amplitude.imag == 0.0


class TabulatedPotential(Potential):
    """Potential given on a regular lattice, bilinearly interpolated.

    Gradients come from 4th-order central differences on the sample lattice,
    themselves bilinearly interpolated; no higher orders.
    """

    def __init__(self, xs: np.ndarray, ys: np.ndarray, table: np.ndarray):
        xs = np.asarray(xs, dtype=float)
        ys = np.asarray(ys, dtype=float)
        table = np.asarray(table, dtype=complex)
        if xs.ndim != 1 or ys.ndim != 1 or table.shape != (xs.size, ys.size):
            raise ValueError("tabulated potential: table shape must be (len(xs), len(ys))")
        if np.any(np.diff(xs) <= 0) or np.any(np.diff(ys) <= 0):
            raise ValueError("tabulated potential: coordinates must be strictly increasing")
        for name, g in (("x", xs), ("y", ys)):
            steps = np.diff(g)
            if np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]):
                raise ValueError(f"tabulated potential: {name} lattice is not regular")
        self.xs, self.ys, self.table = xs, ys, table
        self.support = RectDomain(xs[0], xs[-1], ys[0], ys[-1])
        self._interp = {(0, 0): self._make_interp(table)}

    def _make_interp(self, tab):
        re = RegularGridInterpolator((self.xs, self.ys), tab.real, method="linear",
                                     bounds_error=False, fill_value=0.0)
        im = RegularGridInterpolator((self.xs, self.ys), tab.imag, method="linear",
                                     bounds_error=False, fill_value=0.0)
        return re, im

    @staticmethod
    def _diff4(tab, h, axis):
        d = np.zeros_like(tab)
        f = np.moveaxis(tab, axis, 0)
        g = np.moveaxis(d, axis, 0)
        g[2:-2] = (-f[4:] + 8 * f[3:-1] - 8 * f[1:-3] + f[:-4]) / (12 * h)
        g[0] = (f[1] - f[0]) / h
        g[1] = (f[2] - f[0]) / (2 * h)
        g[-2] = (f[-1] - f[-3]) / (2 * h)
        g[-1] = (f[-1] - f[-2]) / h
        return d

    def derivative(self, x, y, ax, ay):
        if ax + ay > 1:
            raise UnsupportedDerivative("tabulated potential: first derivatives only")
        key = (ax, ay)
        if key not in self._interp:
            if ax == 1:
                tab = self._diff4(self.table, self.xs[1] - self.xs[0], 0)
            else:
                tab = self._diff4(self.table, self.ys[1] - self.ys[0], 1)
            self._interp[key] = self._make_interp(tab)
        re, im = self._interp[key]
        pts = np.stack([np.asarray(x, dtype=float).ravel(),
                        np.asarray(y, dtype=float).ravel()], axis=-1)
        out = re(pts) + 1j * im(pts)
        return out.reshape(np.shape(x)).astype(complex) if np.ndim(x) else complex(out[0])

    @property
    def max_derivative_order(self) -> int:
        return 1

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.table.imag == 0))

    @classmethod
    def from_csv(cls, path) -> "TabulatedPotential":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or [c.strip() for c in header] != ["x", "y", "re", "im"]:
                raise ValueError(f"{path}: expected header 'x,y,re,im'")
            rows = [[float(c) for c in row] for row in reader if row]
        if not rows:
            raise ValueError(f"{path}: no data rows")
        data = np.asarray(rows)
        xs = np.unique(data[:, 0])
        ys = np.unique(data[:, 1])
        if xs.size * ys.size != data.shape[0]:
            raise ValueError(f"{path}: rows do not form a full lattice")
        # row-major: x outer, y inner
        order = np.lexsort((data[:, 1], data[:, 0]))
        tab = (data[order, 2] + 1j * data[order, 3]).reshape(xs.size, ys.size)
        return cls(xs, ys, tab)


class Scaled(Potential):
    def __init__(self, base: Potential, factor: complex):
        self.base = base
        self.factor = complex(factor)
        self.support = base.support

    def derivative(self, x, y, ax, ay):
        return self.factor * self.base.derivative(x, y, ax, ay)

    @property
    def max_derivative_order(self):
        return self.base.max_derivative_order

    @property
    def is_real(self):
        return self.factor.imag == 0.0 and self.base.is_real

    def radial_profile(self):
        rp = self.base.radial_profile()
        if rp is None or self.factor.imag != 0:
            return None
        f, R, c = rp
        return (lambda r: self.factor.real * f(r)), R, c


class SumPotential(Potential):
    def __init__(self, terms):
        if not terms:
            raise ValueError("sum potential needs at least one term")
        self.terms = list(terms)
        self.support = RectDomain(
            min(t.support.x0 for t in self.terms),
            max(t.support.x1 for t in self.terms),
            min(t.support.y0 for t in self.terms),
            max(t.support.y1 for t in self.terms),
        )

    def derivative(self, x, y, ax, ay):
        acc = self.terms[0].derivative(x, y, ax, ay)
        for t in self.terms[1:]:
            acc = acc + t.derivative(x, y, ax, ay)
        return acc

    @property
    def max_derivative_order(self):
        return min(t.max_derivative_order for t in self.terms)

    @property
    def is_real(self):
        return all(t.is_real for t in self.terms)

    def radial_profile(self):
        rps = [t.radial_profile() for t in self.terms]
        if any(rp is None for rp in rps):
            return None
        centers = {rp[2] for rp in rps}
        if len(centers) != 1:
            return None
        R = max(rp[1] for rp in rps)
        fns = [rp[0] for rp in rps]
        return (lambda r: sum(f(r) for f in fns)), R, rps[0][2]


class LaplacianOf(Potential):
    def __init__(self, base: Potential):
        if base.max_derivative_order < 2:
            raise UnsupportedDerivative("base family has no analytic laplacian")
        self.base = base
        self.support = base.support

    def derivative(self, x, y, ax, ay):
        return (self.base.derivative(x, y, ax + 2, ay)
                + self.base.derivative(x, y, ax, ay + 2))

    @property
    def max_derivative_order(self):
        return self.base.max_derivative_order - 2

    @property
    def is_real(self):
        return self.base.is_real

    def radial_profile(self):
        rp = self.base.radial_profile()
        if rp is None:
            return None
        _, R, c = rp
        cx, cy = c
        def profile(r):
            r = np.asarray(r, dtype=float)
            return self.values(cx + r, cy + np.zeros_like(r)).real
        return profile, R, c


class PartialDerivative(Potential):
    """d/dx or d/dy of a base potential (axis 0 -> x, 1 -> y)."""

    def __init__(self, base: Potential, axis: int):
        if base.max_derivative_order < 1:
            raise UnsupportedDerivative("base family has no analytic gradient")
        if axis not in (0, 1):
            raise ValueError("axis must be 0 or 1")
        self.base = base
        self.axis = axis
        self.support = base.support

    def derivative(self, x, y, ax, ay):
        if self.axis == 0:
            return self.base.derivative(x, y, ax + 1, ay)
        return self.base.derivative(x, y, ax, ay + 1)

    @property
    def max_derivative_order(self):
        return self.base.max_derivative_order - 1

    @property
    def is_real(self):
        return self.base.is_real


def sample_potential(spec: Potential, grid: TensorGrid) -> Field:
    """Evaluate a potential at the grid nodes.

    The potential's support must sit inside the grid's domain.
    """
    if not grid.domain.contains(spec.support):
        raise ValueError(
            f"potential support {spec.support} exceeds grid domain {grid.domain}")
    return Field(grid, spec.values(grid.x, grid.y))


def sample_derivative(spec: Potential, grid: TensorGrid, ax: int, ay: int) -> Field:
    return Field(grid, spec.derivative(grid.x, grid.y, ax, ay))
