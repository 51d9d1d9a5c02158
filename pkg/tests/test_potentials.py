import numpy as np
import pytest

import shallowbound as sb
from shallowbound.potentials import UnsupportedDerivative


def fd_partial(pot, x, y, ax, ay, h=1e-5):
    if ax == 1 and ay == 0:
        return (pot.values(x + h, y) - pot.values(x - h, y)) / (2 * h)
    if ax == 0 and ay == 1:
        return (pot.values(x, y + h) - pot.values(x, y - h)) / (2 * h)
    if ax == 2 and ay == 0:
        return (pot.values(x + h, y) - 2 * pot.values(x, y) + pot.values(x - h, y)) / h ** 2
    if ax == 0 and ay == 2:
        return (pot.values(x, y + h) - 2 * pot.values(x, y) + pot.values(x, y - h)) / h ** 2
    if ax == 1 and ay == 1:
        return (pot.values(x + h, y + h) - pot.values(x + h, y - h)
                - pot.values(x - h, y + h) + pot.values(x - h, y - h)) / (4 * h ** 2)
    raise ValueError


def test_disk_indicator_area():
    d = sb.RectDomain(0, 1, 0, 1)
    g = sb.build_grid(d, 128)
    pot = sb.DiskIndicator(1.0, (0.5, 0.5), 0.3)
    val = sb.integrate(sb.sample_potential(pot, g))
    assert abs(val - np.pi * 0.09) <= 1e-3


def test_polynomial_bump_support():
    g = sb.build_grid(sb.RectDomain(-1.2, 1.2, -1.2, 1.2), 24)
    pot = sb.PolynomialBump(2.0, (0.0, 0.0), 1.0, 4)
    f = sb.sample_potential(pot, g)
    outside = g.x ** 2 + g.y ** 2 > 1.0
    assert np.all(f.values[outside] == 0)


def test_cosine_bump_center_amplitude():
    pot = sb.CosineBump(3.5, (0.2, -0.1), 0.5)
    assert pot.values(np.array([0.2]), np.array([-0.1]))[0] == pytest.approx(3.5)


def test_polynomial_bump_derivatives_vs_fd():
    pot = sb.PolynomialBump(1.3, (0.1, -0.2), 0.9, 5)
    rng = np.random.default_rng(0)
    x = rng.uniform(-0.4, 0.5, 12)
    y = rng.uniform(-0.6, 0.3, 12)
    for ax, ay, tol in ((1, 0, 1e-8), (0, 1, 1e-8), (2, 0, 1e-4),
                        (0, 2, 1e-4), (1, 1, 1e-4)):
        got = pot.derivative(x, y, ax, ay)
        ref = fd_partial(pot, x, y, ax, ay)
        assert np.max(np.abs(got - ref)) <= tol


def test_cosine_bump_derivatives_vs_fd():
    pot = sb.CosineBump(2.0, (0.0, 0.1), 0.8)
    rng = np.random.default_rng(1)
    x = rng.uniform(-0.4, 0.4, 12)
    y = rng.uniform(-0.3, 0.5, 12)
    for ax, ay, tol in ((1, 0, 1e-8), (0, 1, 1e-8), (2, 0, 1e-4),
                        (0, 2, 1e-4), (1, 1, 1e-4)):
        got = pot.derivative(x, y, ax, ay)
        ref = fd_partial(pot, x, y, ax, ay)
        assert np.max(np.abs(got - ref)) <= tol
    with pytest.raises(UnsupportedDerivative):
        pot.derivative(x, y, 3, 0)


def test_laplacian_of_polynomial_closed_form():
    # lap (1 - r^2)^p = 4 p (p r^2 - 1)(1 - r^2)^(p-2)
    p = 6
    pot = sb.LaplacianOf(sb.PolynomialBump(1.0, (0.0, 0.0), 1.0, p))
    rng = np.random.default_rng(2)
    x = rng.uniform(-0.6, 0.6, 20)
    y = rng.uniform(-0.6, 0.6, 20)
    r2 = x * x + y * y
    ref = 4 * p * (p * r2 - 1) * (1 - r2) ** (p - 2)
    assert np.max(np.abs(pot.values(x, y) - ref)) <= 1e-10


def test_cosine_bump_laplacian_radial_form():
    A, R = 1.7, 0.9
    pot = sb.CosineBump(A, (0.0, 0.0), R)
    r = np.array([0.2, 0.5, 0.8])
    got = pot.laplacian(r, np.zeros_like(r))
    u = np.pi * r / R
    ref = -(A * np.pi ** 2 / (2 * R * R)) * (np.cos(u) + np.sin(u) / u)
    assert np.max(np.abs(got - ref)) <= 1e-12


def test_combinators():
    v = sb.PolynomialBump(1.0, (0.0, 0.0), 1.0, 3)
    x = np.array([0.3])
    y = np.array([-0.2])
    s = sb.Scaled(v, 2.0 - 1.0j)
    assert s.values(x, y)[0] == pytest.approx((2.0 - 1.0j) * v.values(x, y)[0])
    assert not s.is_real
    tot = sb.SumPotential([v, sb.Scaled(v, -1.0)])
    assert abs(tot.values(x, y)[0]) <= 1e-16
    dx = sb.PartialDerivative(v, 0)
    assert dx.values(x, y)[0] == pytest.approx(v.derivative(x, y, 1, 0)[0])


def test_divergence_free_pair():
    psi = sb.PolynomialBump(0.05, (0.0, 0.0), 1.0, 5)
    b1 = sb.PartialDerivative(psi, 1)
    b2 = sb.Scaled(sb.PartialDerivative(psi, 0), -1.0)
    rng = np.random.default_rng(3)
    x = rng.uniform(-0.7, 0.7, 30)
    y = rng.uniform(-0.7, 0.7, 30)
    div = b1.derivative(x, y, 1, 0) + b2.derivative(x, y, 0, 1)
    assert np.max(np.abs(div)) <= 1e-14


def test_radial_profiles():
    v = sb.PolynomialBump(2.0, (0.3, 0.3), 0.8, 4)
    prof, R, c = v.radial_profile()
    assert R == 0.8 and c == (0.3, 0.3)
    assert prof(np.array([0.0]))[0] == pytest.approx(2.0)
    lap = sb.LaplacianOf(v)
    prof2, _, _ = lap.radial_profile()
    assert prof2(np.array([0.1]))[0] == pytest.approx(
        lap.values(np.array([0.4]), np.array([0.3]))[0].real)
    # mixed centers are not radial
    other = sb.PolynomialBump(1.0, (0.0, 0.0), 0.5, 3)
    assert sb.SumPotential([v, other]).radial_profile() is None


def test_radial_mean_matches_2d_quadrature():
    # exponent 8 keeps the circular support kink below the 1e-8 agreement bar
    v = sb.PolynomialBump(16 / np.pi, (0.0, 0.0), 1.0, 8)
    prof = sb.RadialProfile.from_potential(v, n=4000)
    g = sb.build_grid(sb.RectDomain(-1.2, 1.2, -1.2, 1.2), 64)
    mean2d = sb.integrate(sb.sample_potential(v, g)).real
    assert abs(prof.mean() - mean2d) <= 1e-8 * abs(mean2d)


def test_support_validation():
    g = sb.build_grid(sb.RectDomain(0, 1, 0, 1), 8)
    with pytest.raises(ValueError):
        sb.sample_potential(sb.PolynomialBump(1.0, (0.5, 0.5), 0.8, 3), g)


def test_tabulated_csv_roundtrip(tmp_path):
    xs = np.linspace(-1, 1, 21)
    ys = np.linspace(-1, 1, 21)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    table = 2.0 * X + 3.0 * Y + 0.5 * X * Y
    path = tmp_path / "table.csv"
    with open(path, "w") as fh:
        fh.write("x,y,re,im\n")
        for i in range(21):
            for j in range(21):
                fh.write(f"{xs[i]},{ys[j]},{table[i, j]},0.0\n")
    pot = sb.TabulatedPotential.from_csv(path)
    # bilinear interpolation is exact for bilinear data
    px = np.array([-0.53, 0.11, 0.77])
    py = np.array([0.31, -0.92, 0.05])
    ref = 2.0 * px + 3.0 * py + 0.5 * px * py
    assert np.max(np.abs(pot.values(px, py) - ref)) <= 1e-12
    # gradients from the fourth-order lattice stencil
    gx = pot.derivative(px, py, 1, 0)
    assert np.max(np.abs(gx - (2.0 + 0.5 * py))) <= 1e-9


def test_tabulated_csv_errors(tmp_path):
    bad_header = tmp_path / "bad1.csv"
    bad_header.write_text("a,b,c\n0,0,1\n")
    with pytest.raises(ValueError):
        sb.TabulatedPotential.from_csv(bad_header)
    partial = tmp_path / "bad2.csv"
    partial.write_text("x,y,re,im\n0,0,1,0\n0,1,1,0\n1,0,1,0\n")
    with pytest.raises(ValueError):
        sb.TabulatedPotential.from_csv(partial)
