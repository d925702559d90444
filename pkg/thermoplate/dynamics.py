"""Time integration of the plate system: the full process S(t,τ) and the linear process L(t,τ).

Every step is a Strang splitting: half a nonlinear kick on v, the exact
per-mode exponential of dt·generator_G frozen at the step midpoint, and the
second half kick at the end of the step.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import linalg

from .coeffs import NonlinearitySpec, nemytskii
from .constants import UNDERFLOW_FLOOR
from .data_classes import BoxDomain, FloatArray, SpectralField, State
from .energy import EnergyReport, LyapunovConfig, energy_E, energy_rate
from .operators import PhysicalParams, generator_batch
from .spectral import y_norm

_LOGGER = logging.getLogger(__name__)

Forcing = Callable[[float], SpectralField]

# Relative tolerance under which a leftover interval counts as a whole step.
_STEP_SNAP = 1e-9
_MIN_FIT_SAMPLES = 10
# Step-size gaps below this share of the state norm are rounding.
_EXACT_GAP = 1e-12


@dataclass(frozen=True)
class EvolutionConfig:
    """Step size and recording policy of `evolve`.

    The scheme is fixed (Strang splitting around a Magnus midpoint exponential),
    so the linear substep is unconditionally stable and dt is limited only by
    accuracy.
    """

    dt: float
    record_stride: int = 1
    keep_states: bool = False

    def __post_init__(self) -> None:
        if not self.dt > 0 or not math.isfinite(self.dt):
            raise ValueError(f"dt must be a positive real, got {self.dt}")
        if self.record_stride < 1:
            raise ValueError(f"record_stride must be >= 1, got {self.record_stride}")


@dataclass
class TrajectoryRecord:
    """Sampled output of `evolve`."""

    tau: float
    times: list[float] = field(default_factory=list)
    y_norms: list[float] = field(default_factory=list)
    energies: list[EnergyReport] = field(default_factory=list)
    states: list[State] = field(default_factory=list)
    final: State | None = None

    def append(self, state: State, energy: EnergyReport, keep_state: bool) -> None:
        assert not self.times or state.time > self.times[-1], "trajectory times must increase"
        self.times.append(state.time)
        self.y_norms.append(y_norm(state))
        self.energies.append(energy)
        if keep_state:
            self.states.append(state)

    @property
    def terminal(self) -> State:
        assert self.final is not None, "trajectory has no states"
        return self.final

    def elapsed(self) -> FloatArray:
        return np.asarray(self.times) - self.tau


@dataclass(frozen=True)
class DecayFit:
    """Least-squares fit of log(y_norm/y_norm(τ)) ≈ log K − α(t − τ).

    `k_sup` is the smallest K for which the envelope K e^{−α(t−τ)} holds at
    every fitted sample.
    """

    k: float
    alpha: float
    k_sup: float
    samples: int


def _propagators(domain: BoxDomain, params: PhysicalParams, t_mid: float, dt: float) -> FloatArray:
    return _cached_propagators(domain, params.eta, params.kappa, params.coupling(t_mid), dt)


@lru_cache(maxsize=128)
def _cached_propagators(domain: BoxDomain, eta: float, kappa: float, a_mid: float, dt: float) -> FloatArray:
    batch = linalg.expm(dt * generator_batch(eta, kappa, a_mid, domain.spectrum.mu))
    batch.setflags(write=False)
    return batch


def _advance_linear(stacked: FloatArray, propagators: FloatArray) -> FloatArray:
    return np.einsum("kij,jk->ik", propagators, stacked)


def _require_finite(stacked: FloatArray, domain: BoxDomain, time: float) -> None:
    finite = np.isfinite(stacked)
    if finite.all():
        return
    component, position = (int(i) for i in np.argwhere(~finite)[0])
    mode = domain.multi_indices[position]
    _LOGGER.error("Non-finite %s at time %s in mode %s", ("u", "v", "theta")[component], time, mode)
    raise BlowUpError(time, mode, ("u", "v", "theta")[component])


def _kick(f: NonlinearitySpec, forcing: Forcing | None, t: float, u: FloatArray, domain: BoxDomain) -> FloatArray:
    total = np.zeros(domain.mode_count)
    if not f.is_zero:
        with np.errstate(over="ignore", invalid="ignore"):
            try:
                total += nemytskii(f, t, SpectralField(domain, u)).coeffs
            except ValueError:
                total[:] = np.nan
    if forcing is not None:
        total += forcing(t).coeffs
    return total


def step_linear(state: State, params: PhysicalParams, dt: float) -> State:
    """Advance every mode by the exact exponential of dt·generator_G(time + dt/2)."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    domain = state.domain
    stacked = _advance_linear(state.stacked(), _propagators(domain, params, state.time + dt / 2, dt))
    _require_finite(stacked, domain, state.time + dt)
    return State.from_stacked(domain, stacked, state.time + dt)


def step_full(
    state: State,
    params: PhysicalParams,
    f: NonlinearitySpec,
    dt: float,
    forcing: Forcing | None = None,
) -> State:
    """One Strang step of w' = G(t)w + [0, f(t, u) + g(t), 0]; g is an optional load on v."""
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if f.is_zero and forcing is None:
        return step_linear(state, params, dt)
    domain = state.domain
    t = state.time
    stacked = state.stacked()
    stacked[1] += 0.5 * dt * _kick(f, forcing, t, stacked[0], domain)
    _require_finite(stacked, domain, t)
    stacked = _advance_linear(stacked, _propagators(domain, params, t + dt / 2, dt))
    _require_finite(stacked, domain, t + dt)
    stacked[1] += 0.5 * dt * _kick(f, forcing, t + dt, stacked[0], domain)
    _require_finite(stacked, domain, t + dt)
    return State.from_stacked(domain, stacked, t + dt)


def step_schedule(tau: float, t: float, dt: float) -> Iterator[tuple[float, float]]:
    """(start, length) of every step from τ to t; start times are τ + i·dt.

    A leftover shorter than dt becomes one final partial step.
    """
    if t < tau:
        raise ValueError(f"final time {t} precedes initial time {tau}")
    span = t - tau
    whole = math.floor(span / dt)
    if (whole + 1) * dt - span <= _STEP_SNAP * dt:
        whole += 1
    for i in range(whole):
        yield tau + i * dt, dt
    rest = span - whole * dt
    if rest > _STEP_SNAP * dt:
        yield tau + whole * dt, rest


def evolve(
    w0: State,
    params: PhysicalParams,
    f: NonlinearitySpec,
    tau: float,
    t: float,
    config: EvolutionConfig,
    forcing: Forcing | None = None,
    lyapunov: LyapunovConfig | None = None,
) -> TrajectoryRecord:
    """Realise S(t, τ)w₀, recording every `record_stride` steps and the final state."""
    state = w0.at_time(tau)
    record = TrajectoryRecord(tau=tau)
    record.append(state, energy_E(state, params, f, lyapunov), config.keep_states)
    schedule = list(step_schedule(tau, t, config.dt))
    for index, (start, length) in enumerate(schedule, start=1):
        state = step_full(state.at_time(start), params, f, length, forcing)
        last = index == len(schedule)
        if last:
            state = state.at_time(t)
        if last or index % config.record_stride == 0:
            record.append(state, energy_E(state, params, f, lyapunov), config.keep_states)
    record.final = state
    _LOGGER.debug("Evolved %d steps from %s to %s, %d samples", len(schedule), tau, t, len(record.times))
    return record


def propagate(
    w0: State,
    params: PhysicalParams,
    f: NonlinearitySpec,
    tau: float,
    t: float,
    dt: float,
    forcing: Forcing | None = None,
) -> State:
    """S(t, τ)w₀ on the same step grid as `evolve`, without recording."""
    state = w0.at_time(tau)
    for start, length in step_schedule(tau, t, dt):
        state = step_full(state.at_time(start), params, f, length, forcing)
    return state.at_time(t)


def linear_process(w0: State, params: PhysicalParams, tau: float, t: float, config: EvolutionConfig) -> State:
    """L(t, τ)w₀: the f = 0 evolution."""
    return evolve(w0, params, NonlinearitySpec.zero(), tau, t, config).terminal


def compact_part(
    w0: State, params: PhysicalParams, f: NonlinearitySpec, tau: float, t: float, config: EvolutionConfig
) -> State:
    """U(t, τ)w₀ = S(t, τ)w₀ − L(t, τ)w₀."""
    full = evolve(w0, params, f, tau, t, config).terminal
    return full - linear_process(w0, params, tau, t, config)


def composition_gap(
    w0: State, params: PhysicalParams, f: NonlinearitySpec, tau: float, sigma: float, t: float, dt: float
) -> float:
    """‖S(t, τ)w₀ − S(t, σ)S(σ, τ)w₀‖_Y; zero up to rounding when σ − τ is a whole number of steps."""
    if not tau <= sigma <= t:
        raise ValueError(f"composition needs tau <= sigma <= t, got {tau}, {sigma}, {t}")
    direct = propagate(w0, params, f, tau, t, dt)
    composed = propagate(propagate(w0, params, f, tau, sigma, dt), params, f, sigma, t, dt)
    return y_norm(direct - composed)


@dataclass(frozen=True)
class SelfConvergence:
    """Gaps between S(t, τ)w₀ computed with steps dt, dt/2 and dt/4."""

    coarse_gap: float
    fine_gap: float
    reference_norm: float

    @property
    def ratio(self) -> float:
        """≈ 4 for a second-order scheme in its asymptotic range."""
        return self.coarse_gap / self.fine_gap if self.fine_gap > 0 else math.inf

    @property
    def exact(self) -> bool:
        """True when every step size gives the same state to rounding, as for f = 0 with constant a."""
        return self.coarse_gap <= _EXACT_GAP * max(1.0, self.reference_norm)


def self_convergence(
    w0: State, params: PhysicalParams, f: NonlinearitySpec, tau: float, t: float, dt: float
) -> SelfConvergence:
    """Richardson-style convergence check without a known solution."""
    coarse, medium, fine = (propagate(w0, params, f, tau, t, dt / factor) for factor in (1, 2, 4))
    convergence = SelfConvergence(y_norm(coarse - medium), y_norm(medium - fine), y_norm(fine))
    _LOGGER.info(
        "Self-convergence gaps %s, %s (ratio %s)", convergence.coarse_gap, convergence.fine_gap, convergence.ratio
    )
    return convergence


def energy_identity_residual(w0: State, params: PhysicalParams, tau: float, t: float, dt: float) -> float:
    """Largest |E_{n+1} − E_n + κh(‖∇θ_n‖² + ‖∇θ_{n+1}‖²)/2| / h over the f = 0 steps.

    Each linear step is exact, so this is the trapezoid error of ∫κ‖∇θ‖² and
    shrinks like h².
    """
    zero = NonlinearitySpec.zero()
    state = w0.at_time(tau)
    energy = energy_E(state, params, zero).total
    rate = energy_rate(state, params, zero).dissipation
    worst = 0.0
    for start, length in step_schedule(tau, t, dt):
        state = step_linear(state.at_time(start), params, length)
        next_energy = energy_E(state, params, zero).total
        next_rate = energy_rate(state, params, zero).dissipation
        worst = max(worst, abs(next_energy - energy - 0.5 * length * (rate + next_rate)) / length)
        energy, rate = next_energy, next_rate
    return worst


def energy_identity_order(
    w0: State, params: PhysicalParams, tau: float, t: float, dts: Sequence[float]
) -> tuple[float, list[float]]:
    """Smallest observed order of `energy_identity_residual` between consecutive step sizes."""
    if len(dts) < 2:
        raise ValueError("an observed order needs at least two step sizes")
    residuals = [energy_identity_residual(w0, params, tau, t, dt) for dt in dts]
    if not all(residual > 0 for residual in residuals):
        raise ValueError(f"energy identity residuals vanish: {residuals}")
    orders = [
        math.log(residuals[i] / residuals[i + 1]) / math.log(dts[i] / dts[i + 1]) for i in range(len(dts) - 1)
    ]
    _LOGGER.info("Energy identity residuals %s, observed orders %s", residuals, orders)
    return min(orders), residuals


def process_norm(domain: BoxDomain, params: PhysicalParams, tau: float, t: float, config: EvolutionConfig) -> float:
    """‖L(t, τ)‖ on Y for the discrete process, i.e. the largest weighted per-mode norm."""
    product = np.broadcast_to(np.eye(3), (domain.mode_count, 3, 3)).copy()
    for start, length in step_schedule(tau, t, config.dt):
        product = _propagators(domain, params, start + length / 2, length) @ product
    weights = np.ones((domain.mode_count, 3))
    weights[:, 0] = domain.spectrum.mu
    weighted = weights[:, :, None] * product / weights[:, None, :]
    return float(np.max(np.linalg.norm(weighted, ord=2, axis=(1, 2))))


def decay_fit(
    trajectories: TrajectoryRecord | Sequence[TrajectoryRecord],
    window: tuple[float, float] | None = None,
) -> DecayFit:
    """Fit K, α with ‖L(t, τ)w₀‖ ≈ K e^{−α(t−τ)}‖w₀‖ from linear trajectories."""
    records = [trajectories] if isinstance(trajectories, TrajectoryRecord) else list(trajectories)
    elapsed_parts: list[FloatArray] = []
    log_parts: list[FloatArray] = []
    for record in records:
        elapsed = record.elapsed()
        norms = np.asarray(record.y_norms)
        if norms.size == 0 or norms[0] <= UNDERFLOW_FLOOR:
            continue
        usable = np.cumprod(norms > UNDERFLOW_FLOOR).astype(bool)
        if not usable.all():
            _LOGGER.warning("Truncating decay window at %s after underflow", elapsed[~usable][0])
        if window is not None:
            usable &= (elapsed >= window[0]) & (elapsed <= window[1])
        elapsed_parts.append(elapsed[usable])
        log_parts.append(np.log(norms[usable] / norms[0]))
    elapsed = np.concatenate(elapsed_parts) if elapsed_parts else np.zeros(0)
    logs = np.concatenate(log_parts) if log_parts else np.zeros(0)
    if elapsed.size < _MIN_FIT_SAMPLES:
        raise DecayFitError(f"decay fit needs at least {_MIN_FIT_SAMPLES} samples above underflow, got {elapsed.size}")
    slope, intercept = np.polyfit(elapsed, logs, 1)
    alpha = float(-slope)
    k_sup = float(np.max(np.exp(logs + alpha * elapsed)))
    _LOGGER.info("Decay fit over %d samples: K=%s alpha=%s", elapsed.size, math.exp(intercept), alpha)
    return DecayFit(k=math.exp(float(intercept)), alpha=alpha, k_sup=k_sup, samples=int(elapsed.size))


class BlowUpError(Exception):
    """Error to indicate a non-finite value after a time step."""

    def __init__(self, time: float, mode: tuple[int, ...], component: str, member: int | None = None) -> None:
        where = "" if member is None else f" (ensemble member {member})"
        super().__init__(f"non-finite {component} at time {time} in mode {mode}{where}")
        self.time = time
        self.mode = mode
        self.component = component
        self.member = member


class DecayFitError(Exception):
    """Error to indicate that no usable decay window remains."""
