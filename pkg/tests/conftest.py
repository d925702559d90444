"""Shared fixtures: small boxes, parameter sets and nonlinearities.

Boxes are kept small (n ≤ 8) so that every suite runs in seconds on one core.
"""

import math

import pytest

from thermoplate import BoxDomain, CoefficientFunction, NonlinearitySpec, PhysicalParams
from thermoplate.testing import default_params, sinusoidal_params


@pytest.fixture
def square():
    """The 2D box (0, π)² with 4 modes per axis; λ₁ = 2."""
    return BoxDomain(2, math.pi, 4)


@pytest.fixture
def single_mode():
    """One sine mode on (0, π): mu = 1."""
    return BoxDomain(1, math.pi, 1)


@pytest.fixture
def unit_params():
    return default_params()


@pytest.fixture
def periodic_params():
    return sinusoidal_params(base=1.0, amplitude=0.25, frequency=1.0)


@pytest.fixture
def zero_f():
    return NonlinearitySpec.zero()


@pytest.fixture
def sine_f():
    return NonlinearitySpec.modulated_sine(CoefficientFunction.constant(0.5))


@pytest.fixture
def params_factory():
    def make(eta=1.0, kappa=1.0, a=1.0):
        return PhysicalParams(eta, kappa, CoefficientFunction.constant(a))

    return make
