"""Tests for the energy, the Lyapunov constants and the trajectory checks."""

import math
from dataclasses import replace

import pytest

from thermoplate import (
    CoefficientFunction,
    EvolutionConfig,
    HypothesisError,
    InfeasibleWindowError,
    LyapunovConfigError,
    NonlinearitySpec,
    State,
)
from thermoplate.dynamics import evolve
from thermoplate.energy import (
    apriori_bound,
    choose_constants,
    decay_envelope_check,
    energy_E,
    energy_rate,
    lyapunov_L,
    phi,
    psi,
    trajectory_radius,
    verify_decay_inequality,
    verify_equivalence,
)
from thermoplate.spectral import y_norm, y_norm_squared
from thermoplate.testing import default_params, seeded_state, single_mode_state, sinusoidal_params


def test_energy_of_single_mode(square):
    params = default_params(eta=2.0)
    state = single_mode_state(square, (1, 1), u=1.0, v=0.5, theta=-1.0)
    report = energy_E(state, params, NonlinearitySpec.zero())
    assert report.plate == pytest.approx(0.5 * 2.0 * 4.0)
    assert report.kinetic == pytest.approx(0.125)
    assert report.thermal == pytest.approx(0.5)
    assert report.potential == 0.0
    assert report.total == pytest.approx(4.625)
    assert report.phi == pytest.approx(0.5)
    assert report.psi == pytest.approx(-0.25)
    assert report.lyapunov is None
    assert report.h2_norm_u(2.0) == pytest.approx(2.0)
    assert report.y_norm_squared(2.0) == pytest.approx(y_norm_squared(state))


def test_phi_and_psi_vanish_on_zero_state(square):
    state = State.zero(square)
    assert phi(state) == 0.0
    assert psi(state) == 0.0


def test_potential_uses_collocation_quadrature(square):
    f = NonlinearitySpec.modulated_saturating(CoefficientFunction.constant(2.0))
    state = seeded_state(square, 3)
    report = energy_E(state, default_params(), f)
    assert report.potential > 0
    assert report.total == pytest.approx(report.kinetic + report.plate + report.thermal - report.potential)


def test_energy_rate_is_dissipative_for_autonomous_f(square, unit_params, sine_f):
    for seed in range(5):
        rate = energy_rate(seeded_state(square, seed), unit_params, sine_f)
        assert rate.potential_rate == 0.0
        assert rate.dissipation <= 0.0
        assert rate.total == rate.dissipation


def test_energy_rate_carries_explicit_time_dependence(square, unit_params):
    f = NonlinearitySpec.modulated_sine(CoefficientFunction.sinusoidal(0.5, 0.25, 1.0))
    state = seeded_state(square, 4, scale=2.0, time=0.3)
    h = 1e-5
    later = energy_E(state.at_time(0.3 + h), unit_params, f).total
    earlier = energy_E(state.at_time(0.3 - h), unit_params, f).total
    assert energy_rate(state, unit_params, f).potential_rate == pytest.approx((later - earlier) / (2 * h), abs=1e-8)


@pytest.mark.parametrize("eta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("f_name", ["zero", "sine", "saturating"])
def test_choose_constants_admissible(square, eta, f_name):
    f = {
        "zero": NonlinearitySpec.zero(),
        "sine": NonlinearitySpec.modulated_sine(CoefficientFunction.constant(0.5)),
        "saturating": NonlinearitySpec.modulated_saturating(CoefficientFunction.sinusoidal(0.5, 0.25, 1.0)),
    }[f_name]
    config = choose_constants(square, sinusoidal_params(eta=eta, base=1.0, amplitude=0.25), f, radius=2.0)
    assert config.check_invariants() == []
    lower, upper = config.window
    assert 0 < lower < config.delta1 < upper
    assert config.delta1 < config.delta2 < 1
    assert all(margin > 0 for margin in config.margins.values())
    assert config.beta3 > 0
    assert config.omega_bar == pytest.approx(config.M1 / config.beta1)


def test_choose_constants_linear_case(square, unit_params, zero_f):
    config = choose_constants(square, unit_params, zero_f, radius=1.0)
    assert config.M2 == 0.0
    assert config.beta2 == 0.0
    assert config.beta4 == 0.0
    assert config.gamma2 == 0.0


def test_choose_constants_rejects_stiff_plate(square, zero_f):
    with pytest.raises(HypothesisError, match="eta <= 2"):
        choose_constants(square, default_params(eta=3.0), zero_f, radius=1.0)


def test_choose_constants_infeasible_window(square, unit_params, zero_f):
    with pytest.raises(InfeasibleWindowError) as excinfo:
        choose_constants(square, unit_params, zero_f, radius=1.0, delta2=0.99)
    assert excinfo.value.lower >= excinfo.value.upper


def test_choose_constants_explicit_delta2(square, unit_params, sine_f):
    config = choose_constants(square, unit_params, sine_f, radius=1.0, delta2=0.1)
    assert config.delta2 == 0.1
    with pytest.raises(ValueError, match="delta2"):
        choose_constants(square, unit_params, sine_f, radius=1.0, delta2=1.5)
    with pytest.raises(ValueError, match="radius"):
        choose_constants(square, unit_params, sine_f, radius=0.0)


def test_tampered_constants_are_rejected(square, unit_params, zero_f):
    config = replace(choose_constants(square, unit_params, zero_f, radius=1.0), M=-1.0)
    assert "M > 0" in config.check_invariants()
    with pytest.raises(LyapunovConfigError):
        lyapunov_L(State.zero(square), unit_params, zero_f, config)


def test_lyapunov_matches_functional(square, unit_params, sine_f):
    config = choose_constants(square, unit_params, sine_f, radius=2.0)
    state = seeded_state(square, 5)
    report = energy_E(state, unit_params, sine_f, config)
    expected = config.M * report.total + config.delta1 * report.phi + config.delta2 * report.psi
    assert report.lyapunov == pytest.approx(expected)
    assert lyapunov_L(state, unit_params, sine_f, config) == pytest.approx(expected)
    assert config.to_dict()["M"] == config.M


@pytest.mark.parametrize("f_name", ["zero", "sine"])
def test_decay_inequality_along_trajectory(square, f_name):
    params = sinusoidal_params(base=1.0, amplitude=0.25)
    f = NonlinearitySpec.zero()
    if f_name == "sine":
        f = NonlinearitySpec.modulated_sine(CoefficientFunction.constant(0.5))
    config = choose_constants(square, params, f, radius=3.0)
    w0 = seeded_state(square, 6, scale=0.3)
    record = evolve(w0, params, f, 0.0, 5.0, EvolutionConfig(dt=0.01))
    report = verify_decay_inequality(record, params, f, config)
    assert report.applicable
    assert report.passed, report.max_violation
    assert len(report.margins) == len(record.times) - 2


def test_decay_inequality_not_applicable_outside_ball(square, unit_params, zero_f):
    config = choose_constants(square, unit_params, zero_f, radius=0.01)
    record = evolve(seeded_state(square, 7), unit_params, zero_f, 0.0, 0.5, EvolutionConfig(dt=0.05))
    report = verify_decay_inequality(record, unit_params, zero_f, config)
    assert not report.applicable
    assert not report.passed


def test_equivalence_on_random_states(square, unit_params, sine_f):
    config = choose_constants(square, unit_params, sine_f, radius=2.0)
    states = [seeded_state(square, seed, scale=scale) for seed in range(40) for scale in (0.1, 1.0, 5.0)]
    report = verify_equivalence(states, unit_params, sine_f, config)
    assert report.passed
    assert report.samples == len(states)
    assert report.lower_slack >= 0
    assert report.upper_slack >= 0


def test_apriori_bound_dominates_phase_norm(square, unit_params, sine_f):
    config = choose_constants(square, unit_params, sine_f, radius=2.0)
    for seed in range(20):
        state = seeded_state(square, seed, scale=3.0)
        assert y_norm(state) ** 2 <= apriori_bound(state, unit_params, sine_f, config) * (1 + 1e-12)


def test_envelope_along_trajectory(square, periodic_params, zero_f):
    config = choose_constants(square, periodic_params, zero_f, radius=2.0)
    record = evolve(seeded_state(square, 8, scale=0.3), periodic_params, zero_f, 0.0, 10.0, EvolutionConfig(dt=0.02))
    report = decay_envelope_check(record, periodic_params, zero_f, config)
    assert report.passed
    assert report.gamma2 == 0.0
    assert 0 < report.worst_ratio <= 1.0 + 1e-9
    assert math.isfinite(report.gamma1)


NONLINEAR_CASES = {
    "sine": (NonlinearitySpec.modulated_sine(CoefficientFunction.constant(0.5)), default_params()),
    "saturating": (
        NonlinearitySpec.modulated_saturating(CoefficientFunction.sinusoidal(0.5, 0.25, 1.0)),
        sinusoidal_params(base=1.0, amplitude=0.25),
    ),
    "stiff_sine": (
        NonlinearitySpec.modulated_sine(CoefficientFunction.constant(0.5)),
        sinusoidal_params(eta=2.0, base=1.0, amplitude=0.25),
    ),
}


@pytest.mark.parametrize("case", sorted(NONLINEAR_CASES))
def test_decay_inequality_with_trajectory_radius(square, case):
    f, params = NONLINEAR_CASES[case]
    for seed in range(10):
        record = evolve(seeded_state(square, seed, scale=0.3), params, f, 0.0, 2.0, EvolutionConfig(dt=0.01))
        radius = max(2.0, 1.05 * trajectory_radius(record, params, f))
        report = verify_decay_inequality(record, params, f, choose_constants(square, params, f, radius=radius))
        assert report.applicable, seed
        assert report.violations == 0, (seed, report.max_violation)


def test_trajectory_radius_is_largest_plate_norm(square, unit_params, sine_f):
    record = evolve(seeded_state(square, 2), unit_params, sine_f, 0.0, 1.0, EvolutionConfig(dt=0.05))
    radius = trajectory_radius(record, unit_params, sine_f)
    assert radius == pytest.approx(max(report.h2_norm_u(1.0) for report in record.energies))
    assert radius >= record.energies[0].h2_norm_u(1.0)


@pytest.mark.parametrize("case", ["sine", "saturating"])
def test_envelope_on_nonlinear_trajectory(square, case):
    f, params = NONLINEAR_CASES[case]
    record = evolve(seeded_state(square, 9, scale=0.5), params, f, 0.0, 50.0, EvolutionConfig(dt=0.05))
    config = choose_constants(square, params, f, radius=max(2.0, 1.05 * trajectory_radius(record, params, f)))
    report = decay_envelope_check(record, params, f, config)
    assert report.passed, report.worst_ratio
    assert report.gamma2 > 0.0
