import numpy as np
import pytest

from smile_moments import (
    ConstantVolSlice,
    SsviParams,
    SsviSlice,
    gauss_hermite_rule,
)

# Arbitrage-free SSVI slice used throughout: theta=0.25^2, rho=-0.8, phi=1.40.
PAPER_PARAMS = SsviParams(0.0625, -0.8, 1.40)


@pytest.fixture(scope="session")
def ssvi():
    return SsviSlice(PAPER_PARAMS)


@pytest.fixture(scope="session")
def bs():
    return ConstantVolSlice(0.2)


@pytest.fixture(scope="session")
def rule128():
    return gauss_hermite_rule(128)


@pytest.fixture(scope="session")
def rule64():
    return gauss_hermite_rule(64)


def central_diff(f, x, h=1e-5):
    return (f(x + h) - f(x - h)) / (2.0 * h)


def second_diff(f, x, h=1e-5):
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / h ** 2


def k_grid(lo, hi, n):
    return np.linspace(lo, hi, n)
