"""Data classes shared by the spectral, dynamics and energy layers."""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import numpy.typing as npt

from .constants import DEFAULT_SIDE_LENGTH, SUPPORTED_DIMENSIONS

_LOGGER = logging.getLogger(__name__)

FloatArray = npt.NDArray[np.float64]


@dataclass(frozen=True)
class BoxDomain:
    """The box (0, length)^d with n sine modes per axis.

    The hinged conditions u = Δu = 0 and the Dirichlet condition on θ are
    satisfied exactly by the sine basis, so Λ = Δ² is diagonal.
    """

    dimension: int
    length: float = DEFAULT_SIDE_LENGTH
    modes: int = 8

    def __post_init__(self) -> None:
        if self.dimension not in SUPPORTED_DIMENSIONS:
            raise ValueError(f"dimension must be one of {SUPPORTED_DIMENSIONS}, got {self.dimension}")
        if not self.length > 0 or not math.isfinite(self.length):
            raise ValueError(f"length must be a positive real, got {self.length}")
        if self.modes < 1:
            raise ValueError(f"modes must be >= 1, got {self.modes}")
        if self.dimension == 1:
            _LOGGER.debug("1D box requested; outside the N >= 2 hypotheses, testing only")

    @property
    def mode_count(self) -> int:
        return self.modes**self.dimension

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.modes,) * self.dimension

    @property
    def spacing(self) -> float:
        """Collocation spacing h = ℓ/(n+1)."""
        return self.length / (self.modes + 1)

    @property
    def cell_volume(self) -> float:
        """Quadrature weight h^d of one collocation point."""
        return self.spacing**self.dimension

    @property
    def measure(self) -> float:
        """Discrete measure of the collocation grid, (n h)^d."""
        return self.cell_volume * self.mode_count

    @cached_property
    def multi_indices(self) -> list[tuple[int, ...]]:
        """Multi-indices k in row-major order, k₁ slowest."""
        return list(itertools.product(range(1, self.modes + 1), repeat=self.dimension))

    @cached_property
    def spectrum(self) -> ModeSpectrum:
        wave = (np.arange(1, self.modes + 1, dtype=np.float64) * math.pi / self.length) ** 2
        grids = np.meshgrid(*([wave] * self.dimension), indexing="ij")
        mu = np.sum(np.stack(grids), axis=0).reshape(-1)
        mu.setflags(write=False)
        return ModeSpectrum(mu=mu)

    @property
    def lambda1(self) -> float:
        """First Dirichlet eigenvalue of −Δ, attained at k = (1, ..., 1)."""
        return self.dimension * (math.pi / self.length) ** 2

    @cached_property
    def grid_points(self) -> FloatArray:
        """Interior collocation nodes x_i = iℓ/(n+1), i = 1..n."""
        nodes = np.arange(1, self.modes + 1, dtype=np.float64) * self.spacing
        nodes.setflags(write=False)
        return nodes

    def zeros(self) -> SpectralField:
        return SpectralField(self, np.zeros(self.mode_count))


@dataclass(frozen=True, eq=False)
class ModeSpectrum:
    """Eigenvalues of −Δ (= Λ^{1/2}) per retained mode; Λ has mu²."""

    mu: FloatArray

    @property
    def sorted_ascending(self) -> FloatArray:
        return np.sort(self.mu)

    @property
    def bilaplacian(self) -> FloatArray:
        return self.mu**2


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Coefficients of a scalar field in the L²-orthonormal sine basis."""

    domain: BoxDomain
    coeffs: FloatArray

    def __post_init__(self) -> None:
        coeffs = np.array(self.coeffs, dtype=np.float64).reshape(-1)
        if coeffs.size != self.domain.mode_count:
            raise ShapeError(f"field has {coeffs.size} coefficients, domain expects {self.domain.mode_count}")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("field coefficients must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def __add__(self, other: SpectralField) -> SpectralField:
        _require_same_domain(self.domain, other.domain)
        return SpectralField(self.domain, self.coeffs + other.coeffs)

    def __sub__(self, other: SpectralField) -> SpectralField:
        _require_same_domain(self.domain, other.domain)
        return SpectralField(self.domain, self.coeffs - other.coeffs)

    def __mul__(self, scale: float) -> SpectralField:
        return SpectralField(self.domain, self.coeffs * scale)

    __rmul__ = __mul__

    def as_grid_shaped(self) -> FloatArray:
        return self.coeffs.reshape(self.domain.shape)


@dataclass(frozen=True, eq=False)
class State:
    """One point (u, v, θ) of the phase space Y at a given time; v is u_t."""

    u: SpectralField
    v: SpectralField
    theta: SpectralField
    time: float = 0.0
    label: str = field(default="", compare=False)

    def __post_init__(self) -> None:
        _require_same_domain(self.u.domain, self.v.domain)
        _require_same_domain(self.u.domain, self.theta.domain)
        if not math.isfinite(self.time):
            raise ValueError("state time must be finite")

    @property
    def domain(self) -> BoxDomain:
        return self.u.domain

    @classmethod
    def zero(cls, domain: BoxDomain, time: float = 0.0) -> State:
        return cls(domain.zeros(), domain.zeros(), domain.zeros(), time)

    @classmethod
    def from_stacked(cls, domain: BoxDomain, stacked: FloatArray, time: float) -> State:
        """Build from an array of shape (3, n^d) holding u, v, θ rows."""
        assert stacked.shape == (3, domain.mode_count), f"unexpected stacked shape {stacked.shape}"
        return cls(
            SpectralField(domain, stacked[0]),
            SpectralField(domain, stacked[1]),
            SpectralField(domain, stacked[2]),
            time,
        )

    def stacked(self) -> FloatArray:
        return np.stack([self.u.coeffs, self.v.coeffs, self.theta.coeffs])

    def __sub__(self, other: State) -> State:
        return State(self.u - other.u, self.v - other.v, self.theta - other.theta, self.time)

    def __add__(self, other: State) -> State:
        return State(self.u + other.u, self.v + other.v, self.theta + other.theta, self.time)

    def at_time(self, time: float) -> State:
        return State(self.u, self.v, self.theta, time)


def _require_same_domain(first: BoxDomain, second: BoxDomain) -> None:
    if first != second:
        raise ShapeError(f"domain mismatch: {first} vs {second}")


class ShapeError(Exception):
    """Error to indicate mismatched sizes or domains between spectral objects."""


class IndexRangeError(ShapeError):
    """A multi-index lies outside 1..n on some axis."""
