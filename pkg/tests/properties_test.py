"""Property-based tests for the spectral transforms, scalar bounds and ensemble distances."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thermoplate import (
    BoxDomain,
    CoefficientFunction,
    NonlinearitySpec,
    choose_constants,
    eigenvalue_mu,
    hausdorff_semidist,
    sample_ball,
    verify_equivalence,
)
from thermoplate.coeffs import eval_antiderivative, eval_f
from thermoplate.constants import NormSpace
from thermoplate.dynamics import step_schedule
from thermoplate.spectral import dst_forward, dst_inverse, grid_integral, l2_embedding_constant, norm
from thermoplate.testing import default_params, seeded_state

S_GRID = np.linspace(-50.0, 50.0, 20001)

domains = st.builds(
    BoxDomain,
    st.integers(min_value=1, max_value=2),
    st.floats(min_value=0.5, max_value=10.0),
    st.integers(min_value=2, max_value=6),
)


def _nonlinearities():
    amplitude = st.floats(min_value=0.01, max_value=5.0)
    return st.one_of(
        st.just(NonlinearitySpec.zero()),
        amplitude.map(lambda p: NonlinearitySpec.modulated_sine(CoefficientFunction.constant(p))),
        amplitude.map(lambda p: NonlinearitySpec.modulated_saturating(CoefficientFunction.constant(p))),
        amplitude.map(NonlinearitySpec.soft_cubic),
    )


@settings(max_examples=50, deadline=None)
@given(domain=domains, seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_dst_round_trip_and_parseval(domain, seed):
    values = np.random.default_rng(seed).standard_normal(domain.shape)
    field = dst_forward(domain, values)
    assert np.allclose(dst_inverse(field), values, rtol=1e-10, atol=1e-10)
    assert norm(field) ** 2 == pytest.approx(grid_integral(domain, values**2), rel=1e-9)


@settings(max_examples=50, deadline=None)
@given(domain=domains, seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_norm_scale_is_ordered(domain, seed):
    field = dst_forward(domain, np.random.default_rng(seed).standard_normal(domain.shape))
    l2 = norm(field, NormSpace.L2)
    h2 = norm(field, NormSpace.H2)
    assert l2**2 <= l2_embedding_constant(domain) * h2**2 * (1 + 1e-12)
    assert norm(field, NormSpace.H_NEG2) <= l2 / domain.lambda1 * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(f=_nonlinearities(), nu=st.floats(min_value=0.01, max_value=10.0))
def test_c_nu_bounds_the_dissipativity_product(f, nu):
    product = eval_f(f, 0.0, S_GRID) * S_GRID - nu * S_GRID**2
    bound = f.c_nu(nu)
    assert float(np.max(product)) <= bound + 1e-9 * (1.0 + bound)


@settings(max_examples=100, deadline=None)
@given(f=_nonlinearities(), eps=st.floats(min_value=0.01, max_value=10.0))
def test_c_eps_bounds_the_potential(f, eps):
    excess = eval_antiderivative(f, 0.0, S_GRID) - eps * S_GRID**2
    bound = f.c_eps(eps)
    assert float(np.max(excess)) <= bound + 1e-9 * (1.0 + bound)


@settings(max_examples=100, deadline=None)
@given(
    tau=st.floats(min_value=-100.0, max_value=100.0),
    span=st.floats(min_value=0.0, max_value=50.0),
    dt=st.floats(min_value=1e-2, max_value=5.0),
)
def test_step_schedule_covers_the_interval(tau, span, dt):
    steps = list(step_schedule(tau, tau + span, dt))
    assert math.fsum(length for _, length in steps) == pytest.approx(span, rel=1e-12, abs=1e-8)
    assert all(0 < length <= dt * (1 + 1e-9) for _, length in steps)
    assert all(start == tau + i * dt for i, (start, _) in enumerate(steps))


@settings(max_examples=25, deadline=None)
@given(seeds=st.tuples(*(st.integers(min_value=0, max_value=10_000) for _ in range(3))))
def test_semidistance_triangle_inequality(seeds):
    domain = BoxDomain(2, math.pi, 3)
    first, second, third = (sample_ball(domain, 1.0, 4, seed=seed) for seed in seeds)
    direct = hausdorff_semidist(first, third)
    assert direct >= 0.0
    assert direct <= hausdorff_semidist(first, second) + hausdorff_semidist(second, third) + 1e-12


@given(
    domain=domains,
    k=st.lists(st.integers(min_value=1, max_value=5), min_size=2, max_size=2),
    axis=st.integers(min_value=0, max_value=1),
)
def test_eigenvalues_grow_with_each_index(domain, k, axis):
    k = [min(component, domain.modes - 1) for component in k[: domain.dimension]]
    axis = min(axis, domain.dimension - 1)
    larger = list(k)
    larger[axis] += 1
    assert eigenvalue_mu(domain, larger) > eigenvalue_mu(domain, k) >= domain.lambda1


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000), scale=st.floats(min_value=1e-3, max_value=1.0))
def test_lyapunov_equivalence_holds_state_wise(seed, scale):
    domain = BoxDomain(2, math.pi, 4)
    params = default_params()
    f = NonlinearitySpec.modulated_sine(CoefficientFunction.constant(0.5))
    constants = choose_constants(domain, params, f, radius=2.0)
    report = verify_equivalence([seeded_state(domain, seed, scale=scale)], params, f, constants)
    assert report.passed
