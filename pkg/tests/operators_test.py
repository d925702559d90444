"""Tests for the per-mode plate operator, its inverse and the generator."""

import math

import numpy as np
import pytest

from thermoplate import AdmissibilityError, CoefficientFunction, PhysicalParams
from thermoplate.constants import OperatorKind
from thermoplate.operators import (
    OperatorDomainError,
    OperatorUsageError,
    build,
    check_inverse,
    determinant,
    generator_batch,
    hoelder_gap,
    hurwitz_minors,
    mode_decay_rate,
    phase_weights,
    resolvent_bound,
    resolvent_sweep,
    standard_resolvent_samples,
    weighted_norm,
)
from thermoplate.testing import default_params, sinusoidal_params


def test_build_unit_matrices(unit_params):
    forward = build("operator_A", unit_params, 0.0, 1.0)
    assert forward.kind is OperatorKind.OPERATOR_A
    assert forward.entries.tolist() == [[0.0, 1.0, 0.0], [-1.0, 0.0, -1.0], [0.0, 1.0, 1.0]]
    generator = build(OperatorKind.GENERATOR_G, unit_params, 0.0, 1.0)
    assert generator.entries.tolist() == [[0.0, 1.0, 0.0], [-1.0, 0.0, 1.0], [0.0, -1.0, -1.0]]
    assert not generator.entries.flags.writeable


@pytest.mark.parametrize(
    ("eta", "kappa", "mu", "expected"),
    [(1.0, 1.0, 1.0, 1.0), (2.0, 3.0, 2.0, 48.0), (0.5, 0.1, 10.0, 50.0)],
)
def test_determinant(eta, kappa, mu, expected):
    op = build(OperatorKind.OPERATOR_A, default_params(eta, kappa, 1.7), 0.0, mu)
    assert determinant(op) == pytest.approx(expected, rel=1e-12)


def test_determinant_rejects_other_kinds(unit_params):
    with pytest.raises(OperatorUsageError):
        determinant(build(OperatorKind.OPERATOR_A_INVERSE, unit_params, 0.0, 1.0))


def test_build_rejects_non_positive_mu(unit_params):
    with pytest.raises(OperatorDomainError):
        build(OperatorKind.OPERATOR_A, unit_params, 0.0, 0.0)
    with pytest.raises(OperatorDomainError):
        build(OperatorKind.GENERATOR_G, unit_params, 0.0, -2.0)


def test_build_rejects_unknown_kind(unit_params):
    with pytest.raises(ValueError):
        build("mass_matrix", unit_params, 0.0, 1.0)


def test_physical_params_validation():
    with pytest.raises(ValueError, match="eta"):
        PhysicalParams(0.0, 1.0, CoefficientFunction.constant(1.0))
    with pytest.raises(ValueError, match="kappa"):
        PhysicalParams(1.0, math.inf, CoefficientFunction.constant(1.0))


@pytest.mark.parametrize("eta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("kappa", [0.1, 1.0, 3.0])
def test_inverse_residual_sweep(eta, kappa):
    params = sinusoidal_params(eta=eta, kappa=kappa, base=1.0, amplitude=0.5, frequency=2.0)
    for t in np.linspace(0.0, math.pi, 5):
        for mu in (1.0, 2.0, 5.0, 20.0, 100.0):
            assert check_inverse(params, float(t), mu) <= 1e-12


def test_inverse_residual_random_sweep():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        eta, kappa = rng.uniform(0.1, 5.0, size=2)
        base = rng.uniform(0.1, 3.0)
        params = sinusoidal_params(eta=eta, kappa=kappa, base=base, amplitude=0.9 * base * rng.uniform())
        t = rng.uniform(0.0, 10.0)
        mu = rng.uniform(1.0, 100.0)
        a = params.coupling(t)
        # The residual cancels terms of size a²mu/kappa.
        assert check_inverse(params, t, mu) <= 1e-12 * max(1.0, a * a * mu / kappa), (eta, kappa, a, mu)


def test_resolvent_at_zero_is_weighted_inverse_norm(unit_params):
    mu = 2.0
    report = resolvent_bound(unit_params, 0.0, mu, samples=[0j])
    inverse = build(OperatorKind.OPERATOR_A_INVERSE, unit_params, 0.0, mu).entries
    weights = phase_weights(mu)
    assert report.bound == pytest.approx(weighted_norm(inverse, weights, weights), rel=1e-12)
    assert report.worst_sample == 0j
    assert report.singular_samples == []


def test_resolvent_rejects_left_half_plane(unit_params):
    with pytest.raises(ValueError, match="Re"):
        resolvent_bound(unit_params, 0.0, 1.0, samples=[complex(-1.0, 0.0)])


def test_standard_samples_cover_right_half_plane():
    samples = standard_resolvent_samples()
    assert samples[0] == 0j
    assert len(samples) == 22
    assert all(sample.real >= -1e-12 for sample in samples)
    assert {round(abs(sample), 9) for sample in samples} == {0.0, 1.0, 10.0, 1000.0}


def test_resolvent_sweep_is_finite(periodic_params):
    sweep = resolvent_sweep(periodic_params, [0.0, 1.0, 2.0], [1.0, 4.0, 16.0])
    assert set(sweep) == {0.0, 1.0, 2.0}
    assert all(math.isfinite(value) and value > 0 for value in sweep.values())


def test_hoelder_gap_values(periodic_params):
    assert hoelder_gap(periodic_params, 0.0, math.pi) == pytest.approx(0.0, abs=1e-12)
    assert hoelder_gap(periodic_params, 0.0, math.pi / 2) == pytest.approx(0.25, rel=1e-12)
    assert hoelder_gap(default_params(), 0.0, 5.0) == 0.0


def test_hoelder_gap_rejects_understated_constant():
    params = PhysicalParams(1.0, 1.0, CoefficientFunction.sinusoidal(1.0, 0.25, 1.0, hoelder_c=0.01))
    with pytest.raises(AdmissibilityError, match="Hölder"):
        hoelder_gap(params, 0.0, math.pi / 2)


def test_generator_batch_matches_single_builds(periodic_params):
    mu = np.array([1.0, 2.0, 5.0])
    t = 0.4
    batch = generator_batch(periodic_params.eta, periodic_params.kappa, periodic_params.coupling(t), mu)
    assert batch.shape == (3, 3, 3)
    for i, value in enumerate(mu):
        assert batch[i] == pytest.approx(build(OperatorKind.GENERATOR_G, periodic_params, t, float(value)).entries)


def test_generator_trace_and_hurwitz(unit_params):
    for mu in (1.0, 2.0, 8.0):
        generator = build(OperatorKind.GENERATOR_G, unit_params, 0.0, mu).entries
        assert float(np.trace(generator)) == pytest.approx(-mu)
        minors = hurwitz_minors(unit_params, 0.0, mu)
        assert all(minor > 0 for minor in minors)
    assert hurwitz_minors(unit_params, 0.0, 1.0) == pytest.approx((1.0, 1.0, 1.0))


def test_mode_decay_rate_single_mode(unit_params):
    # λ³ + λ² + 2λ + 1 has the complex pair −0.2151 ± 1.3071i
    assert mode_decay_rate(unit_params, 0.0, 1.0) == pytest.approx(0.2151, abs=1e-4)


def test_mode_decay_rate_positive_for_sampled_parameters(periodic_params):
    for t in np.linspace(0.0, 2 * math.pi, 7):
        for mu in (1.0, 2.0, 10.0, 50.0):
            assert mode_decay_rate(periodic_params, float(t), mu) > 0
