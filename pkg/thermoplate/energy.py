"""Energy and Lyapunov functionals, selection of the decay constants and trajectory checks.

All constants are computed for the retained modes: the embedding constants are
the exact ones of the truncated sine basis, and the nonlinearity enters only
through the closed-form scalar bounds of `NonlinearitySpec`.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field, replace
from typing import TYPE_CHECKING, Any

import numpy as np

from .coeffs import NonlinearitySpec, eval_antiderivative, eval_antiderivative_rate
from .constants import DELTA0, ETA_MAX_FOR_LYAPUNOV, NormSpace
from .data_classes import BoxDomain, State
from .spectral import (
    dst_inverse,
    gradient_embedding_constant,
    grid_integral,
    inverse_laplacian_constant,
    l2_embedding_constant,
    norm,
    sup_norm_constant,
)

if TYPE_CHECKING:
    from .dynamics import TrajectoryRecord
    from .operators import PhysicalParams

_LOGGER = logging.getLogger(__name__)

# Relative slack of the pointwise inequality checks.
_CHECK_SLACK = 1e-9


@dataclass(frozen=True)
class EnergyReport:
    """Decomposition of the energy E = kinetic + plate + thermal − potential at one time."""

    time: float
    kinetic: float
    plate: float
    thermal: float
    potential: float
    phi: float
    psi: float
    lyapunov: float | None = None

    @property
    def total(self) -> float:
        return self.kinetic + self.plate + self.thermal - self.potential

    def h2_norm_u(self, eta: float) -> float:
        return math.sqrt(2.0 * self.plate / eta)

    def y_norm_squared(self, eta: float) -> float:
        return 2.0 * (self.kinetic + self.thermal) + 2.0 * self.plate / eta


@dataclass(frozen=True)
class EnergyRate:
    """dE/dt = dissipation + potential_rate along the semi-discrete flow."""

    dissipation: float
    potential_rate: float

    @property
    def total(self) -> float:
        return self.dissipation + self.potential_rate


def _potential(state: State, f: NonlinearitySpec) -> float:
    if f.is_zero:
        return 0.0
    values = eval_antiderivative(f, state.time, dst_inverse(state.u))
    return grid_integral(state.domain, np.asarray(values))


def phi(state: State) -> float:
    """∫ u v dx."""
    return float(np.dot(state.u.coeffs, state.v.coeffs))


def psi(state: State) -> float:
    """−∫ v Δ⁻¹θ dx = Σ v_k θ_k / mu_k."""
    return float(np.dot(state.v.coeffs, state.theta.coeffs / state.domain.spectrum.mu))


def energy_E(
    state: State, params: PhysicalParams, f: NonlinearitySpec, config: LyapunovConfig | None = None
) -> EnergyReport:
    """Energy terms of a state, plus φ, ψ and 𝓛 when a Lyapunov config is given."""
    report = EnergyReport(
        time=state.time,
        kinetic=0.5 * norm(state.v, NormSpace.L2) ** 2,
        plate=0.5 * params.eta * norm(state.u, NormSpace.H2) ** 2,
        thermal=0.5 * norm(state.theta, NormSpace.L2) ** 2,
        potential=_potential(state, f),
        phi=phi(state),
        psi=psi(state),
    )
    if config is None:
        return report
    return replace(report, lyapunov=config.functional(report))


def energy_rate(state: State, params: PhysicalParams, f: NonlinearitySpec) -> EnergyRate:
    """Exact dE/dt of the semi-discrete system at a state."""
    dissipation = -params.kappa * norm(state.theta, NormSpace.H1_SEMINORM) ** 2
    if f.is_autonomous:
        return EnergyRate(dissipation, 0.0)
    rates = eval_antiderivative_rate(f, state.time, dst_inverse(state.u))
    return EnergyRate(dissipation, -grid_integral(state.domain, np.asarray(rates)))


@dataclass(frozen=True)
class LyapunovConfig:
    """Constants of 𝓛 = M·E + δ₁φ + δ₂ψ and of the inequalities it satisfies.

    Decay: 𝓛' ≤ −M₁E + M₂ while ‖Δu‖ ≤ radius.
    Equivalence: β₃E − β₄ ≤ 𝓛 ≤ β₁E + β₂.
    Envelope: ‖w‖²_Y ≤ γ₁e^{−ω̄(t−τ)} + γ₂.
    """

    eta: float
    kappa: float
    a0: float
    a1: float
    lambda1: float
    mu1: float
    c0: float
    embedding_l2: float
    measure: float
    radius: float
    sup_u: float
    nu: float
    c_eta: float
    c_kappa: float
    c_bar1: float
    c_bar2: float
    c_tilde0: float
    c_nu: float
    eps: float
    c_eps: float
    c1: float
    potential_rate: float
    delta1: float
    delta2: float
    window: tuple[float, float]
    M: float
    margins: dict[str, float] = field(default_factory=dict)
    d_bar: float = 0.0
    M1: float = 0.0
    M2: float = 0.0
    beta1: float = 0.0
    beta2: float = 0.0
    beta3: float = 0.0
    beta4: float = 0.0
    omega_bar: float = 0.0
    sigma2: float = 0.0
    gamma2: float = 0.0

    def functional(self, report: EnergyReport) -> float:
        return self.M * report.total + self.delta1 * report.phi + self.delta2 * report.psi

    def gamma1(self, lyapunov_at_tau: float) -> float:
        return self.c1 * max(lyapunov_at_tau, 0.0) / self.beta3

    def check_invariants(self) -> list[str]:
        """Names of the violated admissibility conditions; empty when admissible."""
        failures: list[str] = []
        lower, upper = self.window

        def require(condition: bool, name: str) -> None:
            if not condition:
                failures.append(name)

        require(0 < self.eta <= ETA_MAX_FOR_LYAPUNOV, "0 < eta <= 2")
        require(0 < self.delta1 < self.delta2 < 1, "0 < delta1 < delta2 < 1")
        require(self.M > 0, "M > 0")
        require(0 < self.nu < self.lambda1 * self.eta / self.mu1, "0 < nu < lambda1*eta/mu1")
        require(0 < lower < self.delta1 < upper, "delta1 inside its window")
        require(upper <= self.a0 * self.delta2 / self.c_kappa, "window below a0*delta2/C_kappa")
        for name, value in self.margins.items():
            require(value > 0, f"margin {name} > 0")
        for name in ("M1", "beta1", "beta3", "omega_bar"):
            require(getattr(self, name) > 0, f"{name} > 0")
        for name in ("M2", "beta2", "beta4", "gamma2"):
            require(getattr(self, name) >= 0, f"{name} >= 0")
        values = [value for value in asdict(self).values() if isinstance(value, float)]
        require(all(math.isfinite(value) for value in values), "all constants finite")
        return failures

    def require_admissible(self) -> None:
        failures = self.check_invariants()
        if failures:
            raise LyapunovConfigError(f"inadmissible Lyapunov constants: {', '.join(failures)}")

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


def choose_constants(
    domain: BoxDomain,
    params: PhysicalParams,
    f: NonlinearitySpec,
    radius: float,
    delta2: float | None = None,
) -> LyapunovConfig:
    """Pick every constant of the Lyapunov functional so that all its inequalities hold.

    Raises HypothesisError for η > 2 and InfeasibleWindowError when an explicit
    δ₂ leaves no room for δ₁.
    """
    eta, kappa = params.eta, params.kappa
    if not eta <= ETA_MAX_FOR_LYAPUNOV:
        raise HypothesisError(f"the Lyapunov decay estimate requires 0 < eta <= 2, got eta={eta}")
    if not radius > 0:
        raise ValueError(f"ball radius must be positive, got {radius}")
    a0, a1 = params.a.a0, params.a.a1
    lambda1 = domain.lambda1
    mu1 = gradient_embedding_constant(domain)
    c0 = inverse_laplacian_constant(domain)
    embedding = l2_embedding_constant(domain)
    measure = domain.measure
    sup_u = sup_norm_constant(domain) * radius

    nu = 0.5 * lambda1 * eta / mu1
    c_eta = eta - mu1 * nu / lambda1
    c_kappa = 1.0 + kappa / 2.0
    c_bar1 = f.ratio_sup(sup_u) ** 2 * embedding
    c_bar2 = 0.0
    # Young on a(t)∫θΔu uses the upper bound a₁.
    c_tilde0 = mu1 * eta / 2.0 + c_bar1 / 2.0 + a1 / 2.0

    if delta2 is None:
        delta2 = 0.5 * min(1.0, a0 * c_eta / (c_tilde0 * c_kappa), c_eta / c_tilde0)
    elif not 0 < delta2 < 1:
        raise ValueError(f"delta2 must lie in (0, 1), got {delta2}")
    lower = c_tilde0 / c_eta * delta2**2
    upper = min(a0 / c_kappa * delta2, delta2)
    if not lower < upper:
        raise InfeasibleWindowError(lower, upper)
    delta1 = math.sqrt(lower * upper)

    eps = eta / (4.0 * embedding)
    c_eps = f.c_eps(eps)
    c1 = max(2.0, 4.0 / eta)
    # |δ₁φ + δ₂ψ| ≤ cross·‖w‖²_Y, with |ψ| ≤ (C_{δ₀}‖v‖² + δ₀‖θ‖²)/λ₁.
    c_delta0 = 1.0 / (4.0 * DELTA0)
    cross = max(
        delta1 * embedding / 2.0,
        delta1 / 2.0 + delta2 * c_delta0 / lambda1,
        delta2 * DELTA0 / lambda1,
    )
    m_gradient = (eta + c0 / lambda1) / kappa
    m_thermal = (a1 + kappa / delta1 + 2.0 * a1 * delta2) / (kappa * lambda1)
    m_equivalence = cross * c1
    M = 2.0 * max(m_gradient, m_thermal, m_equivalence)

    margins = {
        "velocity": delta2 * a0 - delta1 * (1.0 + delta2 * kappa / 2.0),
        "plate": delta1 * c_eta - c_tilde0 * delta2**2,
        "thermal": kappa * lambda1 * M / 2.0 - a1 / 2.0 - kappa / (2.0 * delta1) - a1 * delta2,
        "gradient": M * kappa / 2.0 - eta / 2.0 - c0 / (2.0 * lambda1),
    }
    m_bar1 = min(2.0 * margins["velocity"], 2.0 * margins["plate"] / eta, 2.0 * margins["thermal"])
    c_bar = max(1.0, f.negative_potential_ratio_sup(sup_u) * embedding)
    d_bar = 1.0 / (c_bar * (1.0 + radius ** (f.growth_exponent - 1.0)))
    M1 = m_bar1 * eta * d_bar / 4.0

    c_nu = f.c_nu(nu) * measure
    potential_rate = f.potential_rate_sup(sup_u) * measure
    M2 = delta2**2 * c_bar2 / 2.0 + delta1 * c_nu + M * potential_rate

    beta1 = M + cross * c1
    beta2 = cross * c1 * c_eps * measure
    beta3 = M - cross * c1
    beta4 = beta2
    omega_bar = M1 / beta1
    sigma2 = M1 * beta2 / beta1 + M2
    gamma2 = c1 * (sigma2 / omega_bar + beta4) / beta3 + c1 * c_eps * measure if omega_bar > 0 else math.inf

    config = LyapunovConfig(
        eta=eta,
        kappa=kappa,
        a0=a0,
        a1=a1,
        lambda1=lambda1,
        mu1=mu1,
        c0=c0,
        embedding_l2=embedding,
        measure=measure,
        radius=radius,
        sup_u=sup_u,
        nu=nu,
        c_eta=c_eta,
        c_kappa=c_kappa,
        c_bar1=c_bar1,
        c_bar2=c_bar2,
        c_tilde0=c_tilde0,
        c_nu=c_nu,
        eps=eps,
        c_eps=c_eps,
        c1=c1,
        potential_rate=potential_rate,
        delta1=delta1,
        delta2=delta2,
        window=(lower, upper),
        M=M,
        margins=margins,
        d_bar=d_bar,
        M1=M1,
        M2=M2,
        beta1=beta1,
        beta2=beta2,
        beta3=beta3,
        beta4=beta4,
        omega_bar=omega_bar,
        sigma2=sigma2,
        gamma2=gamma2,
    )
    config.require_admissible()
    _LOGGER.info(
        "Chose Lyapunov constants: delta1=%s delta2=%s M=%s M1=%s M2=%s", delta1, delta2, M, M1, M2
    )
    return config


def lyapunov_L(state: State, params: PhysicalParams, f: NonlinearitySpec, config: LyapunovConfig) -> float:
    """𝓛 = M·E + δ₁φ + δ₂ψ."""
    config.require_admissible()
    return config.functional(energy_E(state, params, f))


def apriori_bound(state: State, params: PhysicalParams, f: NonlinearitySpec, config: LyapunovConfig) -> float:
    """C₁·E + C₁·C_ε|Ω|, a bound on ‖w‖²_Y at this state and, for autonomous f, at all later times."""
    return config.c1 * (energy_E(state, params, f).total + config.c_eps * config.measure)


@dataclass(frozen=True)
class DecayInequalityReport:
    """Outcome of `verify_decay_inequality`."""

    applicable: bool
    violations: int
    max_violation: float
    worst_margin: float
    tol_fd: float
    margins: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.applicable and self.violations == 0


@dataclass(frozen=True)
class EquivalenceReport:
    """Outcome of `verify_equivalence`; slacks are negative where a side fails."""

    lower_slack: float
    upper_slack: float
    violations: int
    samples: int

    @property
    def passed(self) -> bool:
        return self.violations == 0


@dataclass(frozen=True)
class EnvelopeReport:
    """Outcome of `decay_envelope_check`."""

    gamma1: float
    gamma2: float
    omega_bar: float
    violations: int
    worst_ratio: float

    @property
    def passed(self) -> bool:
        return self.violations == 0


def _reports(
    trajectory: TrajectoryRecord | Sequence[State], params: PhysicalParams, f: NonlinearitySpec
) -> list[EnergyReport]:
    if isinstance(trajectory, Sequence):
        return [energy_E(state, params, f) for state in trajectory]
    return list(trajectory.energies)


def trajectory_radius(
    trajectory: TrajectoryRecord | Sequence[State], params: PhysicalParams, f: NonlinearitySpec
) -> float:
    """Largest ‖Δu‖ along a trajectory: the smallest ball radius whose constants cover it."""
    return max(report.h2_norm_u(params.eta) for report in _reports(trajectory, params, f))


def verify_decay_inequality(
    trajectory: TrajectoryRecord, params: PhysicalParams, f: NonlinearitySpec, config: LyapunovConfig
) -> DecayInequalityReport:
    """Check 𝓛' ≤ −M₁E + M₂ at interior samples with centred differences.

    The finite-difference tolerance c_fd·h² is calibrated by comparing the
    centred differences of spacing h and 2h.
    """
    config.require_admissible()
    reports = _reports(trajectory, params, f)
    if any(report.h2_norm_u(params.eta) > config.radius * (1 + _CHECK_SLACK) for report in reports):
        _LOGGER.warning("Trajectory leaves the ball of radius %s; decay constants do not apply", config.radius)
        return DecayInequalityReport(False, 0, 0.0, 0.0, 0.0)
    times = np.asarray([report.time for report in reports])
    if times.size < 3:
        raise ValueError("decay check needs at least three samples")
    spacing = np.diff(times)
    h = float(spacing[0])
    if not math.isclose(float(spacing[-1]), h, rel_tol=1e-6):
        # Final partial step.
        reports, times, spacing = reports[:-1], times[:-1], spacing[:-1]
    if not np.allclose(spacing, h, rtol=1e-6, atol=0.0):
        raise ValueError("decay check needs uniformly spaced samples")

    lyapunov = np.asarray([config.functional(report) for report in reports])
    energy = np.asarray([report.total for report in reports])
    derivative = (lyapunov[2:] - lyapunov[:-2]) / (2 * h)
    if lyapunov.size >= 5:
        coarse = (lyapunov[4:] - lyapunov[:-4]) / (4 * h)
        c_fd = float(np.max(np.abs(coarse - derivative[1:-1]))) / h**2
    else:
        c_fd = 0.0
    tol_fd = c_fd * h**2 + _CHECK_SLACK * float(np.max(np.abs(derivative), initial=0.0))

    margins = -config.M1 * energy[1:-1] + config.M2 - derivative
    violations = int(np.sum(margins < -tol_fd))
    report = DecayInequalityReport(
        applicable=True,
        violations=violations,
        max_violation=float(max(0.0, -float(np.min(margins)))),
        worst_margin=float(np.min(margins)),
        tol_fd=tol_fd,
        margins=margins.tolist(),
    )
    if violations:
        _LOGGER.warning("Decay inequality violated at %d of %d samples", violations, margins.size)
    return report


def verify_equivalence(
    trajectory: TrajectoryRecord | Sequence[State],
    params: PhysicalParams,
    f: NonlinearitySpec,
    config: LyapunovConfig,
) -> EquivalenceReport:
    """Check β₃E − β₄ ≤ 𝓛 ≤ β₁E + β₂ at every sample."""
    config.require_admissible()
    lower_slack = math.inf
    upper_slack = math.inf
    violations = 0
    reports = _reports(trajectory, params, f)
    for report in reports:
        energy = report.total
        value = config.functional(report)
        tolerance = _CHECK_SLACK * (1.0 + abs(value) + config.beta1 * abs(energy))
        low = value - (config.beta3 * energy - config.beta4)
        high = config.beta1 * energy + config.beta2 - value
        lower_slack = min(lower_slack, low)
        upper_slack = min(upper_slack, high)
        if low < -tolerance or high < -tolerance:
            violations += 1
    return EquivalenceReport(lower_slack, upper_slack, violations, len(reports))


def decay_envelope_check(
    trajectory: TrajectoryRecord, params: PhysicalParams, f: NonlinearitySpec, config: LyapunovConfig
) -> EnvelopeReport:
    """Check ‖w(t)‖²_Y ≤ γ₁e^{−ω̄(t−τ)} + γ₂ with γ₁ taken from 𝓛(τ)."""
    config.require_admissible()
    reports = _reports(trajectory, params, f)
    gamma1 = config.gamma1(config.functional(reports[0]))
    violations = 0
    worst = 0.0
    for report in reports:
        bound = gamma1 * math.exp(-config.omega_bar * (report.time - trajectory.tau)) + config.gamma2
        value = report.y_norm_squared(params.eta)
        if value > bound * (1 + _CHECK_SLACK) + 1e-300:
            violations += 1
        if bound > 0:
            worst = max(worst, value / bound)
    return EnvelopeReport(gamma1, config.gamma2, config.omega_bar, violations, worst)


class HypothesisError(Exception):
    """Error to indicate physical parameters outside the range of the Lyapunov estimates."""


class InfeasibleWindowError(Exception):
    """Error to indicate an empty admissible window for δ₁."""

    def __init__(self, lower: float, upper: float) -> None:
        super().__init__(f"empty delta1 window: lower end {lower} >= upper end {upper}")
        self.lower = lower
        self.upper = upper


class LyapunovConfigError(Exception):
    """Error to indicate Lyapunov constants that fail their admissibility conditions."""
