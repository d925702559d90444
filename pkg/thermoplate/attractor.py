"""Pullback iteration: ensembles evolved from receding initial times to a fixed target time."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
from scipy.spatial.distance import cdist

from .constants import ABSORBING_MARGIN, DEFAULT_PULLBACK_LEVELS, DEFAULT_PULLBACK_T0, DEFAULT_PULLBACK_TOL
from .data_classes import BoxDomain, FloatArray, ShapeError, State
from .dynamics import BlowUpError, EvolutionConfig, propagate
from .spectral import y_norm

if TYPE_CHECKING:
    from .coeffs import NonlinearitySpec
    from .energy import LyapunovConfig
    from .operators import PhysicalParams

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EnsembleSet:
    """A finite cloud of states sharing one time and one domain."""

    members: tuple[State, ...]
    seed: int | None = None
    radius: float | None = None

    def __post_init__(self) -> None:
        if not self.members:
            raise EmptyEnsembleError("an ensemble needs at least one member")
        first = self.members[0]
        for member in self.members[1:]:
            if member.domain != first.domain:
                raise ShapeError("ensemble members live on different domains")
            if member.time != first.time:
                raise ValueError(f"ensemble members have different times: {first.time} vs {member.time}")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def time(self) -> float:
        return self.members[0].time

    @property
    def domain(self) -> BoxDomain:
        return self.members[0].domain

    def y_vectors(self) -> FloatArray:
        """Rows (mu·u, v, θ) so that Euclidean distance between rows is the Y distance."""
        mu = self.domain.spectrum.mu
        return np.stack([np.concatenate([mu * m.u.coeffs, m.v.coeffs, m.theta.coeffs]) for m in self.members])

    def radius_max(self) -> float:
        return max(y_norm(member) for member in self.members)


def sample_ball(
    domain: BoxDomain, radius: float, members: int, seed: int, time: float = 0.0, smoothness: int = 1
) -> EnsembleSet:
    """Seeded states in the Y-ball of the given radius.

    Coefficients are standard normals times mu^(−smoothness), rescaled to
    y_norm = radius·U with U uniform on [0, 1).
    """
    if not radius >= 0:
        raise ValueError(f"ball radius must be non-negative, got {radius}")
    if members < 1:
        raise ValueError(f"member count must be >= 1, got {members}")
    if smoothness < 0:
        raise ValueError(f"smoothness must be non-negative, got {smoothness}")
    rng = np.random.default_rng(seed)
    mu = domain.spectrum.mu
    states: list[State] = []
    for _ in range(members):
        raw = rng.standard_normal((3, domain.mode_count)) / mu**smoothness
        target = radius * rng.uniform()
        state = State.from_stacked(domain, raw, time)
        size = y_norm(state)
        scale = target / size if size > 0 else 0.0
        states.append(State.from_stacked(domain, raw * scale, time))
    return EnsembleSet(tuple(states), seed=seed, radius=radius)


def hausdorff_semidist(first: EnsembleSet, second: EnsembleSet) -> float:
    """sup over a in `first` of inf over b in `second` of ‖a − b‖_Y; not symmetric."""
    if first.domain != second.domain:
        raise ShapeError("semidistance between ensembles on different domains")
    distances = cdist(first.y_vectors(), second.y_vectors())
    return float(np.max(np.min(distances, axis=1)))


def tail_fraction(state: State, cutoff_ratio: float = 0.5) -> float:
    """Share of ‖w‖²_Y carried by modes with mu above cutoff_ratio·max mu."""
    mu = state.domain.spectrum.mu
    mass = (mu * state.u.coeffs) ** 2 + state.v.coeffs**2 + state.theta.coeffs**2
    total = float(np.sum(mass))
    if total == 0:
        return 0.0
    return float(np.sum(mass[mu > cutoff_ratio * float(np.max(mu))])) / total


def default_schedule(t0: float = DEFAULT_PULLBACK_T0, levels: int = DEFAULT_PULLBACK_LEVELS) -> tuple[float, ...]:
    """Horizons T_n = T₀·2ⁿ."""
    return tuple(t0 * 2.0**n for n in range(levels))


@dataclass(frozen=True)
class PullbackRun:
    """Target time, horizon schedule and ensemble of a pullback iteration."""

    target_time: float
    schedule: tuple[float, ...]
    radius: float
    members: int
    seed: int
    tol: float = DEFAULT_PULLBACK_TOL

    def __post_init__(self) -> None:
        if not self.schedule:
            raise ValueError("pullback schedule must not be empty")
        if any(later <= earlier for earlier, later in zip(self.schedule, self.schedule[1:])):
            raise ValueError(f"pullback schedule must increase strictly, got {self.schedule}")
        if self.schedule[0] < 0:
            raise ValueError("pullback horizons must be non-negative")
        if not self.radius > 0:
            raise ValueError(f"ensemble radius must be positive, got {self.radius}")
        if self.members < 1:
            raise ValueError(f"member count must be >= 1, got {self.members}")
        if not self.tol > 0:
            raise ValueError(f"pullback tolerance must be positive, got {self.tol}")


@dataclass(frozen=True)
class PullbackLevel:
    """One horizon of a pullback iteration; `distance` is d_n against the previous cloud."""

    horizon: float
    tau: float
    cloud: EnsembleSet
    distance: float | None


def evolve_ensemble(
    ensemble: EnsembleSet,
    params: PhysicalParams,
    f: NonlinearitySpec,
    t: float,
    config: EvolutionConfig,
    threads: int = 1,
) -> EnsembleSet:
    """Evolve every member to time t; results come back in member order."""
    tau = ensemble.time

    def run(indexed: tuple[int, State]) -> State:
        index, member = indexed
        try:
            return propagate(member, params, f, tau, t, config.dt)
        except BlowUpError as err:
            raise BlowUpError(err.time, err.mode, err.component, member=index) from err

    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        evolved = tuple(executor.map(run, enumerate(ensemble.members)))
    return EnsembleSet(evolved, seed=ensemble.seed, radius=ensemble.radius)


def pullback_iterate(
    run: PullbackRun,
    domain: BoxDomain,
    params: PhysicalParams,
    f: NonlinearitySpec,
    config: EvolutionConfig,
    threads: int = 1,
) -> list[PullbackLevel]:
    """Evolve the same seeded ball from τ_n = t* − T_n to t* for each horizon.

    Stops once the semidistance between successive clouds drops below the
    tolerance; the last cloud is the attractor snapshot at t*.
    """
    levels: list[PullbackLevel] = []
    previous: EnsembleSet | None = None
    for horizon in run.schedule:
        tau = run.target_time - horizon
        ball = sample_ball(domain, run.radius, run.members, run.seed, time=tau)
        cloud = evolve_ensemble(ball, params, f, run.target_time, config, threads)
        distance = None if previous is None else hausdorff_semidist(cloud, previous)
        levels.append(PullbackLevel(horizon=horizon, tau=tau, cloud=cloud, distance=distance))
        _LOGGER.info("Pullback horizon %s done: cloud radius %s, d_n %s", horizon, cloud.radius_max(), distance)
        if distance is not None and distance < run.tol:
            break
        previous = cloud
    return levels


def distances(levels: Sequence[PullbackLevel]) -> list[float]:
    return [level.distance for level in levels if level.distance is not None]


def absorbing_radius(config: LyapunovConfig) -> float:
    """sqrt(γ₂) widened by the absorbing margin; zero for the linear system."""
    return math.sqrt(config.gamma2) * (1.0 + ABSORBING_MARGIN)


class EmptyEnsembleError(Exception):
    """Error to indicate an ensemble without members."""
