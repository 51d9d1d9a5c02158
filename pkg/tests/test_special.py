import json
from pathlib import Path

import mpmath as mp
import numpy as np
import pytest

from shallowbound.special import (EULER_GAMMA, FAST_SERIES_LIMIT, LN2,
                                  SERIES_ASYMPTOTIC_SWITCH, _asymptotic, _k0_mp,
                                  bessel_k0, bessel_k0_highprec, digamma_nat,
                                  k0_plus_log)

DATA = Path(__file__).parent / "data"


def test_k0_at_one():
    # frozen from a 50-digit series evaluation
    assert abs(bessel_k0(1.0) - 0.42102443824070834) <= 1e-12


def test_k0_small_argument_limit():
    for z in (1e-4, 1e-6, 1e-8):
        val = bessel_k0(z) + np.log(z / 2.0) + EULER_GAMMA
        assert abs(val) <= 1e-7 * max(abs(np.log(z)), 1.0)


def test_k0_conjugate_symmetry():
    rng = np.random.default_rng(7)
    for _ in range(20):
        z = complex(rng.uniform(0.05, 15.0), rng.uniform(-10.0, 10.0))
        a = bessel_k0(np.conj(z))
        b = np.conj(bessel_k0(z))
        assert abs(a - b) <= 1e-14 * abs(b)


def test_k0_domain_errors():
    with pytest.raises(ValueError):
        bessel_k0(0.0)
    with pytest.raises(ValueError):
        bessel_k0(-2.0)
    with pytest.raises(ValueError):
        k0_plus_log(-0.5)


def test_k0_plus_log_values():
    assert k0_plus_log(0.0) == pytest.approx(LN2 - EULER_GAMMA, abs=1e-15)
    assert abs(k0_plus_log(1.0) - bessel_k0(1.0)) <= 1e-14
    assert abs(k0_plus_log(1e-8) - (LN2 - EULER_GAMMA)) <= 1e-14


def test_k0_plus_log_bounded_near_zero():
    ring = 1e-3 * np.exp(1j * np.linspace(-3.0, 3.0, 17))
    vals = k0_plus_log(ring)
    assert np.all(np.abs(vals - (LN2 - EULER_GAMMA)) < 1e-5)


def test_digamma_values():
    assert digamma_nat(1) == pytest.approx(-EULER_GAMMA, abs=1e-16)
    assert digamma_nat(2) == pytest.approx(1.0 - EULER_GAMMA, abs=1e-15)
    assert digamma_nat(5) == pytest.approx(25.0 / 12.0 - EULER_GAMMA, abs=1e-14)
    with pytest.raises(ValueError):
        digamma_nat(0)


def test_against_frozen_oracle():
    rows = json.loads((DATA / "k0_oracle.json").read_text())
    assert len(rows) == 200
    z = np.array([complex(r[0], r[1]) for r in rows])
    ref = np.array([complex(r[2], r[3]) for r in rows])
    got = bessel_k0(z)
    rel = np.abs(got - ref) / np.abs(ref)
    assert rel.max() <= 1e-11


def test_seam_stitching():
    # both branches agree on a ring at the switch radius
    ring = SERIES_ASYMPTOTIC_SWITCH * np.exp(
        1j * np.linspace(-0.97 * np.pi, 0.97 * np.pi, 32))
    series_side = np.array([bessel_k0_highprec(z) for z in ring])
    asym_side = _asymptotic(ring)
    rel = np.abs(series_side - asym_side) / np.abs(series_side)
    assert rel.max() <= 1e-11


def test_fast_path_matches_extended_precision():
    ring = FAST_SERIES_LIMIT * np.exp(1j * np.linspace(-0.9 * np.pi, 0.9 * np.pi, 16))
    fast = bessel_k0(ring)
    ref = np.array([bessel_k0_highprec(z) for z in ring])
    rel = np.abs(fast - ref) / np.abs(ref)
    assert rel.max() <= 1e-11


def test_ode_residual():
    # K0'' + K0'/z - K0 = 0, by high-precision central differences of the
    # series evaluation (double-precision samples bottom out near 1e-4 of K0
    # for |z| ~ 0.1, far above the tolerance being certified here)
    rng = np.random.default_rng(11)
    with mp.workdps(50):
        for _ in range(25):
            r = np.exp(rng.uniform(np.log(0.1), np.log(20.0)))
            th = rng.uniform(-0.45 * np.pi, 0.45 * np.pi)
            z = mp.mpc(r * np.cos(th), r * np.sin(th))
            h = mp.mpf(1e-5) * abs(z)
            f0 = _k0_mp(z)
            fp = _k0_mp(z + h)
            fm = _k0_mp(z - h)
            d1 = (fp - fm) / (2 * h)
            d2 = (fp - 2 * f0 + fm) / (h * h)
            resid = d2 + d1 / z - f0
            assert abs(resid) <= 1e-6 * abs(f0)


def test_vector_and_scalar_shapes():
    z = np.array([[0.5, 1.0], [2.0, 3.0]])
    out = bessel_k0(z)
    assert out.shape == z.shape
    assert isinstance(bessel_k0(1.5), complex)
    assert isinstance(k0_plus_log(0.0), complex)
