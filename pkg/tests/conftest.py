import numpy as np
import pytest

import shallowbound as sb

# <V> = 4 for the standard bump: amplitude 16/pi on the unit disk, exponent 3
STD_AMPLITUDE = 16.0 / np.pi


@pytest.fixture(scope="session")
def std_domain():
    return sb.RectDomain(-1.2, 1.2, -1.2, 1.2)


@pytest.fixture(scope="session")
def std_grid(std_domain):
    return sb.build_grid(std_domain, 48)


@pytest.fixture(scope="session")
def std_bump():
    return sb.PolynomialBump(STD_AMPLITUDE, (0.0, 0.0), 1.0, 3)


@pytest.fixture(scope="session")
def std_perturbation(std_bump):
    return sb.Multiplicative(std_bump)
