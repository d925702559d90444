"""Batch front end: simulate, verify, attractor, decay-fit and operator-check runs from an INI file."""

from __future__ import annotations

import argparse
import itertools
import logging
import math
import sys
import time
from collections.abc import Callable, Sequence
from pathlib import Path

import numpy as np

from .._serializers import (
    RunReport,
    write_distances_csv,
    write_report_csv,
    write_report_json,
    write_snapshot,
    write_svg_chart,
    write_trajectory_csv,
)
from ..attractor import EnsembleSet, PullbackLevel, absorbing_radius, distances, pullback_iterate, sample_ball
from ..coeffs import AdmissibilityError, NonlinearitySpec, validate_a, validate_nonlinearity
from ..config import ConfigError, ExperimentConfig, dump_config, load_config
from ..constants import ExitCode, OperatorKind, OutputFormat
from ..data_classes import State
from ..dynamics import (
    BlowUpError,
    EvolutionConfig,
    composition_gap,
    decay_fit,
    energy_identity_order,
    evolve,
    process_norm,
    self_convergence,
)
from ..energy import (
    HypothesisError,
    InfeasibleWindowError,
    LyapunovConfig,
    LyapunovConfigError,
    choose_constants,
    decay_envelope_check,
    trajectory_radius,
    verify_decay_inequality,
    verify_equivalence,
)
from ..operators import (
    build,
    check_inverse,
    determinant,
    hoelder_gap,
    hurwitz_minors,
    mode_decay_rate,
    resolvent_bound,
)
from ..spectral import y_norm

_LOGGER = logging.getLogger(__name__)

INVERSE_TOLERANCE = 1e-12
DETERMINANT_TOLERANCE = 1e-10
RESOLVENT_SPREAD = 0.1
ORACLE_TOLERANCE = 0.1
# Energy may rise by this share of E(τ) under the splitting when f is nonlinear.
NONLINEAR_ENERGY_DRIFT = 1e-3
EQUIVALENCE_SAMPLES = 200
RADIUS_MARGIN = 0.05
ENERGY_IDENTITY_STEPS = (1e-2, 5e-3, 2.5e-3)
ENERGY_IDENTITY_ORDER = 1.9
CONVERGENCE_RATIO = (3.5, 4.5)
COMPOSITION_TOLERANCE = 1e-10
# Integrator checks run over [τ, τ + CHECK_HORIZON] from data with coefficients ~ mu^(−SMOOTH_DATA).
CHECK_HORIZON = 1.0
SMOOTH_DATA = 4
DECAY_HORIZON = 60.0
DECAY_WINDOW = (10.0, 60.0)
DECAY_SPACING = 0.1

Command = Callable[[ExperimentConfig, RunReport, Path, int], ExitCode]


def setup_arguments(argv: Sequence[str] | None = None) -> argparse.Namespace:
    """Setup the arguments for the script."""
    parser = argparse.ArgumentParser(description="Run thermoelastic plate experiments")
    parser.add_argument("command", choices=sorted(COMMANDS), help="Experiment to run")
    parser.add_argument("--config", required=True, help="Path of the INI experiment file")
    parser.add_argument("--output", help="Output directory (overrides output.directory)")
    parser.add_argument("--seed", type=int, help="Seed for initial data and ensembles (overrides the config)")
    parser.add_argument("--threads", type=int, default=1, help="Worker threads for ensemble members")
    parser.add_argument(
        "--format", choices=[item.value for item in OutputFormat], help="Report format (overrides output.format)"
    )
    parser.add_argument("--verbose", action="store_true", help="output verbose logging information")
    return parser.parse_args(argv)


def _sample_times(config: ExperimentConfig, count: int = 9) -> list[float]:
    period = config.physics.a.period or 1.0
    tau = config.integrator.tau
    return [float(t) for t in np.linspace(tau, tau + period, count)]


def _try_constants(
    config: ExperimentConfig, report: RunReport | None = None, radius: float | None = None
) -> LyapunovConfig | None:
    radius = config.nonlinearity.radius if radius is None else radius
    try:
        constants = choose_constants(
            config.box(), config.params(), config.nonlinearity.f, radius, config.lyapunov.delta2
        )
    except (HypothesisError, InfeasibleWindowError, LyapunovConfigError) as err:
        if report is None:
            _LOGGER.warning("No Lyapunov constants for this configuration: %s", err)
            return None
        raise
    if report is not None:
        report.add("lyapunov_constants", True, min(constants.margins.values()))
        report.constants.update(constants.to_dict())
    return constants


def operator_checks(config: ExperimentConfig, report: RunReport) -> None:
    """Inverse, determinant, Hölder, resolvent and stability checks over the retained modes."""
    params = config.params()
    times = _sample_times(config)
    mus = [float(mu) for mu in np.unique(config.box().spectrum.mu)]
    pairs = list(itertools.product(times, mus))

    residual = max(check_inverse(params, t, mu) for t, mu in pairs)
    report.add("operator_inverse", residual <= INVERSE_TOLERANCE, INVERSE_TOLERANCE - residual)

    worst = 0.0
    for t, mu in pairs:
        expected = params.eta * params.kappa * mu**3
        worst = max(worst, abs(determinant(build(OperatorKind.OPERATOR_A, params, t, mu)) - expected) / expected)
    report.add("determinant", worst <= DETERMINANT_TOLERANCE, DETERMINANT_TOLERANCE - worst)

    try:
        largest = max(hoelder_gap(params, t, s) for t, s in itertools.product(times, times))
    except AdmissibilityError as err:
        report.add("hoelder_gap", False, None, str(err))
    else:
        report.add("hoelder_gap", True, None, f"largest gap {largest:.6g}")

    resolvents = {(t, mu): resolvent_bound(params, t, mu) for t, mu in pairs}
    singular = [key for key, item in resolvents.items() if item.singular_samples]
    per_time = [max(resolvents[t, mu].bound for mu in mus) for t in times]
    sup = max(per_time)
    detail = f"λI + A singular at (t, mu) = {singular[0]}" if singular else f"sup bound {sup:.6g}"
    report.add("resolvent_bounded", not singular and math.isfinite(sup), None, detail)
    # The spread over t tracks a(t) and is reported as a fitted value.
    spread = (sup - min(per_time)) / sup
    report.fitted.update(resolvent_sup=sup, resolvent_spread=spread)
    if spread > RESOLVENT_SPREAD:
        _LOGGER.info("Resolvent bound varies by %.1f%% over the sampled times", 100 * spread)

    minors = min(min(hurwitz_minors(params, t, mu)) for t, mu in pairs)
    report.add("hurwitz_minors", minors > 0, minors)
    slowest = min(mode_decay_rate(params, t, mu) for t, mu in pairs)
    report.add("mode_decay", slowest > 0, slowest)
    report.fitted["oracle_alpha"] = slowest


def admissibility_checks(config: ExperimentConfig, report: RunReport) -> None:
    coefficient = validate_a(config.physics.a)
    detail = "; ".join(f"{w.kind} at t={w.t}" for w in coefficient.witnesses)
    report.add("coefficient", coefficient.passed, config.physics.a.c_hoelder - coefficient.c_emp, detail)
    try:
        margin = validate_nonlinearity(config.nonlinearity.f, config.box())
    except AdmissibilityError as err:
        report.add("nonlinearity", False, None, str(err))
    else:
        report.add("nonlinearity", True, margin)


def cmd_operator_check(config: ExperimentConfig, report: RunReport, output: Path, threads: int) -> ExitCode:
    del output, threads
    operator_checks(config, report)
    return ExitCode.SUCCESS


def cmd_simulate(config: ExperimentConfig, report: RunReport, output: Path, threads: int) -> ExitCode:
    del threads
    params, f = config.params(), config.nonlinearity.f
    constants = _try_constants(config)
    record = evolve(
        config.initial_state(),
        params,
        f,
        config.integrator.tau,
        config.integrator.t_final,
        config.evolution(),
        lyapunov=constants,
    )
    write_trajectory_csv(output / "trajectory.csv", record)
    if config.integrator.snapshots:
        write_snapshot(output / "final.tplt", EnsembleSet((record.terminal,)))
    if config.output.plots:
        write_svg_chart(
            output / "energy.svg", record.times, {"E": [e.total for e in record.energies]}, "t", "energy"
        )
    report.fitted.update(final_y_norm=record.y_norms[-1], final_energy=record.energies[-1].total)
    return ExitCode.SUCCESS


def _smooth_state(config: ExperimentConfig, radius: float) -> State:
    ball = sample_ball(config.box(), radius, 1, config.initial.seed, config.integrator.tau, SMOOTH_DATA)
    return ball.members[0]


def integrator_checks(config: ExperimentConfig, report: RunReport) -> None:
    """Energy identity order, self-convergence and process composition on smooth data."""
    params, f = config.params(), config.nonlinearity.f
    tau, dt = config.integrator.tau, config.integrator.dt
    w0 = _smooth_state(config, max(config.initial.radius, 1e-3))
    horizon = tau + CHECK_HORIZON

    order, residuals = energy_identity_order(w0, params, tau, horizon, ENERGY_IDENTITY_STEPS)
    report.add("energy_identity_order", order >= ENERGY_IDENTITY_ORDER, order - ENERGY_IDENTITY_ORDER)
    report.fitted.update(energy_identity_order=order, energy_identity_residuals=residuals)

    convergence = self_convergence(w0, params, f, tau, horizon, dt)
    low, high = CONVERGENCE_RATIO
    if convergence.exact:
        report.add("self_convergence", True, None, "step size does not change the solution")
    else:
        ratio = convergence.ratio
        report.add("self_convergence", low <= ratio <= high, min(ratio - low, high - ratio), f"ratio {ratio:.6g}")
        report.fitted["self_convergence_ratio"] = ratio

    sigma = tau + dt * max(1, round(CHECK_HORIZON / (2 * dt)))
    gap = composition_gap(w0, params, f, tau, sigma, horizon, dt)
    allowed = COMPOSITION_TOLERANCE * max(1.0, y_norm(w0))
    report.add("process_composition", gap <= allowed, allowed - gap)


def decay_checks(config: ExperimentConfig, report: RunReport) -> None:
    """Fitted linear decay rate against the slowest frozen-mode rate."""
    domain, params = config.box(), config.params()
    tau, dt = config.integrator.tau, config.integrator.dt
    record = evolve(
        _smooth_state(config, 1.0),
        params,
        NonlinearitySpec.zero(),
        tau,
        tau + DECAY_HORIZON,
        EvolutionConfig(dt=dt, record_stride=max(1, round(DECAY_SPACING / dt))),
    )
    fit = decay_fit(record, window=DECAY_WINDOW)
    mus = [float(mu) for mu in np.unique(domain.spectrum.mu)]
    oracle = max(min(mode_decay_rate(params, t, mu) for mu in mus) for t in _sample_times(config))
    ceiling = oracle * (1 + ORACLE_TOLERANCE)
    report.add("decay_rate", 0 < fit.alpha <= ceiling, min(fit.alpha, ceiling - fit.alpha), f"alpha {fit.alpha:.6g}")
    report.fitted.update(decay_alpha=fit.alpha, decay_K=fit.k, decay_oracle=oracle)


def pullback_checks(
    config: ExperimentConfig, report: RunReport, constants: LyapunovConfig | None, threads: int
) -> list[PullbackLevel]:
    """Pullback iteration: d_n decreasing for f = 0, d_n below tol inside the absorbing ball otherwise."""
    run = config.pullback_run()
    f = config.nonlinearity.f
    levels = pullback_iterate(run, config.box(), config.params(), f, config.evolution(), threads)
    steps = distances(levels)
    radius = levels[-1].cloud.radius_max()
    report.fitted.update(levels=len(levels), final_radius=radius, final_distance=steps[-1] if steps else None)
    if f.is_zero:
        decreasing = bool(steps) and all(later < earlier for earlier, later in zip(steps, steps[1:]))
        report.add("pullback_decreasing", decreasing, None, f"d_n = {steps}")
        return levels
    report.add("pullback_converged", bool(steps) and steps[-1] < run.tol, run.tol - steps[-1] if steps else None)
    if constants is not None and constants.gamma2 > 0:
        bound = absorbing_radius(constants)
        report.add("inside_absorbing_ball", radius <= bound, bound - radius)
    return levels


def cmd_verify(config: ExperimentConfig, report: RunReport, output: Path, threads: int) -> ExitCode:
    """Admissibility, operator, integrator, Lyapunov, decay and pullback checks."""
    del output
    admissibility_checks(config, report)
    operator_checks(config, report)
    if not report.passed:
        return ExitCode.SUCCESS

    domain, params, f = config.box(), config.params(), config.nonlinearity.f
    record = evolve(
        config.initial_state(), params, f, config.integrator.tau, config.integrator.t_final, config.evolution()
    )
    # The constants must cover the whole trajectory, not only the configured ball.
    radius = max(config.nonlinearity.radius, trajectory_radius(record, params, f) * (1 + RADIUS_MARGIN))
    if radius > config.nonlinearity.radius:
        _LOGGER.info("Trajectory leaves the ball of radius %s; using radius %s", config.nonlinearity.radius, radius)
    try:
        constants = _try_constants(config, report, radius)
    except (HypothesisError, InfeasibleWindowError, LyapunovConfigError) as err:
        _LOGGER.error("Lyapunov constants unavailable: %s", err)
        report.add("lyapunov_constants", False, None, str(err))
        return ExitCode.CONFIG_ERROR
    assert constants is not None
    report.fitted["lyapunov_radius"] = constants.radius

    integrator_checks(config, report)
    energies = np.asarray([e.total for e in record.energies])
    if f.is_autonomous:
        allowed = (1e-12 if f.is_zero else NONLINEAR_ENERGY_DRIFT) * abs(energies[0])
        rise = float(np.max(np.diff(energies), initial=0.0))
        report.add("energy_monotone", rise <= allowed, allowed - rise)

    inequality = verify_decay_inequality(record, params, f, constants)
    detail = "" if inequality.applicable else "trajectory leaves the ball of the constants"
    report.add("decay_inequality", inequality.passed, inequality.worst_margin, detail)

    along = verify_equivalence(record, params, f, constants)
    report.add("equivalence_trajectory", along.passed, min(along.lower_slack, along.upper_slack))
    ball = sample_ball(domain, constants.radius, EQUIVALENCE_SAMPLES, config.initial.seed)
    sampled = verify_equivalence(ball.members, params, f, constants)
    report.add("equivalence_random", sampled.passed, min(sampled.lower_slack, sampled.upper_slack))

    envelope = decay_envelope_check(record, params, f, constants)
    report.add("envelope", envelope.passed, 1.0 - envelope.worst_ratio)
    report.fitted.update(gamma1=envelope.gamma1, gamma2=envelope.gamma2, omega_bar=envelope.omega_bar)

    decay_checks(config, report)
    pullback_checks(config, report, constants, threads)
    return ExitCode.SUCCESS


def cmd_decay_fit(config: ExperimentConfig, report: RunReport, output: Path, threads: int) -> ExitCode:
    """Fit K, α of the linear process from the configured initial state."""
    del threads
    w0 = config.initial_state()
    if y_norm(w0) == 0:
        raise ConfigError("initial.kind", "decay fit needs nonzero initial data")
    params, domain = config.params(), config.box()
    tau, t_final = config.integrator.tau, config.integrator.t_final
    record = evolve(w0, params, NonlinearitySpec.zero(), tau, t_final, config.evolution())
    fit = decay_fit(record)
    oracle = min(mode_decay_rate(params, tau, float(mu)) for mu in np.unique(domain.spectrum.mu))
    report.fitted.update(
        K=fit.k,
        alpha=fit.alpha,
        k_sup=fit.k_sup,
        samples=fit.samples,
        oracle_alpha=oracle,
        process_norm=process_norm(domain, params, tau, t_final, config.evolution()),
    )
    report.add("alpha_positive", fit.alpha > 0, fit.alpha)
    if config.physics.a.is_constant and domain.mode_count == 1:
        error = abs(fit.alpha - oracle) / oracle
        report.add("alpha_oracle", error <= ORACLE_TOLERANCE, ORACLE_TOLERANCE - error)
    write_trajectory_csv(output / "decay.csv", record)
    if config.output.plots:
        write_svg_chart(output / "decay.svg", record.times, {"y_norm": record.y_norms}, "t", "‖w‖_Y", log_y=True)
    return ExitCode.SUCCESS


def cmd_attractor(config: ExperimentConfig, report: RunReport, output: Path, threads: int) -> ExitCode:
    """Pullback iteration towards the attractor snapshot at the target time."""
    levels = pullback_checks(config, report, _try_constants(config), threads)
    write_distances_csv(output / "distances.csv", levels)
    write_snapshot(output / "attractor.tplt", levels[-1].cloud)
    if config.integrator.snapshots:
        for index, level in enumerate(levels):
            write_snapshot(output / f"pullback_{index:02d}.tplt", level.cloud)
    steps = distances(levels)
    if config.output.plots and steps:
        horizons = [level.horizon for level in levels if level.distance is not None]
        write_svg_chart(output / "distances.svg", horizons, {"d_n": steps}, "T_n", "d_n", log_y=True)
    return ExitCode.SUCCESS


COMMANDS: dict[str, Command] = {
    "attractor": cmd_attractor,
    "decay-fit": cmd_decay_fit,
    "operator-check": cmd_operator_check,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


def run(args: argparse.Namespace) -> ExitCode:
    started = time.perf_counter()
    # verify reports admissibility failures instead of stopping on them
    config = load_config(args.config, check_admissibility=args.command != "verify")
    config = config.with_overrides(
        seed=args.seed,
        directory=args.output,
        output_format=OutputFormat(args.format) if args.format else None,
    )
    output = Path(config.output.directory)
    output.mkdir(parents=True, exist_ok=True)

    report = RunReport(command=args.command, config=dump_config(config))
    code = COMMANDS[args.command](config, report, output, args.threads)
    report.timing["seconds"] = time.perf_counter() - started
    if config.output.format is OutputFormat.JSON:
        write_report_json(output / "report.json", report)
    else:
        write_report_csv(output / "report.csv", report)

    for check in report.checks:
        if not check.passed:
            _LOGGER.warning("Check %s failed: %s", check.name, check.detail or check.margin)
    if code is ExitCode.SUCCESS and not report.passed:
        return ExitCode.VERIFICATION_FAILED
    return code


def main(argv: Sequence[str] | None = None) -> int:
    """Entry point of thermoplate-run; returns the exit code."""
    args = setup_arguments(argv)
    # Configure logging
    log_level = logging.INFO if args.verbose else logging.WARNING
    logging.basicConfig(level=log_level, format="%(asctime)s - %(name)s - %(levelname)s - [%(thread)d] - %(message)s")

    try:
        return int(run(args))
    except (ConfigError, AdmissibilityError, HypothesisError, InfeasibleWindowError) as err:
        _LOGGER.error("Configuration error: %s", err)
        return int(ExitCode.CONFIG_ERROR)
    except BlowUpError as err:
        _LOGGER.error("Run stopped: %s", err)
        return int(ExitCode.BLOW_UP)


if __name__ == "__main__":
    sys.exit(main())
