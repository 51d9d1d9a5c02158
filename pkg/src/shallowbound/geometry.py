"""Rectangular support domains, tensor-product quadrature grids, sampled fields."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class RectDomain:
    """Axis-aligned rectangle [x0, x1] x [y0, y1]."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not (self.x0 < self.x1 and self.y0 < self.y1):
            raise ValueError(f"degenerate rectangle {self}")

    def area(self) -> float:
        return (self.x1 - self.x0) * (self.y1 - self.y0)

    def diameter(self) -> float:
        return float(np.hypot(self.x1 - self.x0, self.y1 - self.y0))

    def center(self) -> tuple[float, float]:
        return 0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1)

    def contains(self, other: "RectDomain", tol: float = 1e-12) -> bool:
        return (self.x0 - tol <= other.x0 and other.x1 <= self.x1 + tol
                and self.y0 - tol <= other.y0 and other.y1 <= self.y1 + tol)

    def contains_point(self, x: float, y: float) -> bool:
        return self.x0 <= x <= self.x1 and self.y0 <= y <= self.y1

    def scaled(self, factor: float) -> "RectDomain":
        """Rectangle grown about its center by ``factor``."""
        cx, cy = self.center()
        hx = 0.5 * (self.x1 - self.x0) * factor
        hy = 0.5 * (self.y1 - self.y0) * factor
        return RectDomain(cx - hx, cx + hx, cy - hy, cy + hy)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x0, self.x1, self.y0, self.y1)


def _axis_rule(a: float, b: float, n: int, kind: str) -> tuple[np.ndarray, np.ndarray]:
    if kind == "gauss":
        t, u = np.polynomial.legendre.leggauss(n)
        nodes = 0.5 * (a + b) + 0.5 * (b - a) * t
        weights = 0.5 * (b - a) * u
    elif kind == "uniform":
        h = (b - a) / n
        nodes = a + h * (np.arange(n) + 0.5)
        weights = np.full(n, h)
    else:
        raise ValueError(f"unknown grid kind {kind!r}")
    return nodes, weights


@dataclass(frozen=True, eq=False)
class TensorGrid:
    """Tensor-product quadrature grid on a rectangle.

    ``kind='gauss'`` is Gauss-Legendre per axis (the working quadrature);
    ``kind='uniform'`` is a cell-centered midpoint lattice, used for
    eigenfunction evaluation where finite differences need equal spacing.
    Flattened index convention: ``i = ix * n + iy``.
    """

    domain: RectDomain
    n: int
    kind: str = "gauss"
    xs: np.ndarray = field(init=False, repr=False)
    ys: np.ndarray = field(init=False, repr=False)
    wx: np.ndarray = field(init=False, repr=False)
    wy: np.ndarray = field(init=False, repr=False)
    x: np.ndarray = field(init=False, repr=False)
    y: np.ndarray = field(init=False, repr=False)
    w: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"grid needs n >= 2 nodes per axis, got {self.n}")
        xs, wx = _axis_rule(self.domain.x0, self.domain.x1, self.n, self.kind)
        ys, wy = _axis_rule(self.domain.y0, self.domain.y1, self.n, self.kind)
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        W = np.outer(wx, wy)
        for name, arr in (("xs", xs), ("ys", ys), ("wx", wx), ("wy", wy),
                          ("x", X.ravel()), ("y", Y.ravel()), ("w", W.ravel())):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        return self.n * self.n


def build_grid(domain: RectDomain, n: int, kind: str = "gauss") -> TensorGrid:
    """Tensor-product quadrature grid with n nodes per axis (n >= 2)."""
    return TensorGrid(domain, n, kind)


@dataclass(frozen=True, eq=False)
class Field:
    """Complex samples of a function at the nodes of a grid."""

    grid: TensorGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.grid.size,):
            raise ValueError(
                f"field has {vals.shape} values for a grid of {self.grid.size} nodes")
        object.__setattr__(self, "values", vals)

    def __add__(self, other: "Field") -> "Field":
        _same_grid(self, other)
        return Field(self.grid, self.values + other.values)

    def __mul__(self, scalar) -> "Field":
        return Field(self.grid, self.values * scalar)

    __rmul__ = __mul__


def _same_grid(a: Field, b: Field) -> None:
    if a.grid is not b.grid:
        raise ValueError("fields live on different grids")


def integrate(f: Field) -> complex:
    """The functional <g> = integral of g over the plane, by the grid rule."""
    return complex(np.dot(f.grid.w, f.values))
