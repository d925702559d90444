"""Per-mode 3x3 realisations of the plate operator, its inverse and the dynamics generator."""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .coeffs import AdmissibilityError, CoefficientFunction, Witness
from .constants import OperatorKind
from .data_classes import FloatArray

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class PhysicalParams:
    """Plate stiffness η, heat diffusivity κ and the coupling coefficient a(t)."""

    eta: float
    kappa: float
    a: CoefficientFunction

    def __post_init__(self) -> None:
        if not self.eta > 0 or not math.isfinite(self.eta):
            raise ValueError(f"eta must be a positive real, got {self.eta}")
        if not self.kappa > 0 or not math.isfinite(self.kappa):
            raise ValueError(f"kappa must be a positive real, got {self.kappa}")

    def coupling(self, t: float) -> float:
        return float(self.a.values(t))


@dataclass(frozen=True, eq=False)
class ModeOperator:
    """One of the per-mode matrices, evaluated at time t for eigenvalue mu."""

    kind: OperatorKind
    entries: FloatArray
    mu: float
    t: float

    def __post_init__(self) -> None:
        entries = np.array(self.entries, dtype=np.float64)
        assert entries.shape == (3, 3), f"mode operator must be 3x3, got {entries.shape}"
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)


def build(kind: OperatorKind | str, params: PhysicalParams, t: float, mu: float) -> ModeOperator:
    """Build the per-mode matrix of the given kind.

    operator_A and operator_A_inverse use the sign convention of the abstract
    operator; generator_G is the matrix of (u, v, θ)' for the hinged plate and
    is what the integrator exponentiates.
    """
    kind = OperatorKind(kind)
    if not mu > 0:
        raise OperatorDomainError(f"mode eigenvalue must be positive, got {mu}")
    eta, kappa, a = params.eta, params.kappa, params.coupling(t)
    if kind is OperatorKind.OPERATOR_A:
        entries = [
            [0.0, 1.0, 0.0],
            [-eta * mu**2, 0.0, -a * mu],
            [0.0, a * mu, kappa * mu],
        ]
    elif kind is OperatorKind.OPERATOR_A_INVERSE:
        entries = [
            [a**2 / (eta * kappa) / mu, -1.0 / (eta * mu**2), -a / (eta * kappa) / mu**2],
            [1.0, 0.0, 0.0],
            [-a / kappa, 0.0, 1.0 / (kappa * mu)],
        ]
    else:
        entries = [
            [0.0, 1.0, 0.0],
            [-eta * mu**2, 0.0, a * mu],
            [0.0, -a * mu, -kappa * mu],
        ]
    return ModeOperator(kind=kind, entries=np.array(entries), mu=mu, t=t)


def generator_batch(eta: float, kappa: float, a: float, mu: FloatArray) -> FloatArray:
    """generator_G for every mode at once, shape (len(mu), 3, 3)."""
    batch = np.zeros((mu.size, 3, 3))
    batch[:, 0, 1] = 1.0
    batch[:, 1, 0] = -eta * mu**2
    batch[:, 1, 2] = a * mu
    batch[:, 2, 1] = -a * mu
    batch[:, 2, 2] = -kappa * mu
    return batch


def determinant(op: ModeOperator) -> float:
    """Determinant of operator_A; equals η·κ·mu³."""
    if op.kind is not OperatorKind.OPERATOR_A:
        raise OperatorUsageError(f"determinant is defined for operator_A only, got {op.kind.value}")
    return float(np.linalg.det(op.entries))


def check_inverse(params: PhysicalParams, t: float, mu: float) -> float:
    """Max-abs residual of operator_A · operator_A_inverse − I."""
    forward = build(OperatorKind.OPERATOR_A, params, t, mu).entries
    inverse = build(OperatorKind.OPERATOR_A_INVERSE, params, t, mu).entries
    return float(np.max(np.abs(forward @ inverse - np.eye(3))))


def phase_weights(mu: float) -> FloatArray:
    """Diagonal weights of Y = H² × L² × L² on one mode."""
    return np.array([mu, 1.0, 1.0])


def weighted_norm(matrix: FloatArray, left: FloatArray, right: FloatArray) -> float:
    """Spectral norm of diag(left) · matrix · diag(right)⁻¹."""
    return float(np.linalg.norm(left[:, None] * matrix / right[None, :], ord=2))


def standard_resolvent_samples() -> list[complex]:
    """|λ| ∈ {0, 1, 10, 10³} at seven phases across the closed right half-plane."""
    samples: list[complex] = [0j]
    for radius in (1.0, 10.0, 1e3):
        phases = np.linspace(-math.pi / 2, math.pi / 2, 7)
        samples.extend(radius * complex(math.cos(phase), math.sin(phase)) for phase in phases)
    return samples


@dataclass(frozen=True)
class ResolventReport:
    """Outcome of `resolvent_bound`."""

    bound: float
    worst_sample: complex
    singular_samples: list[complex] = field(default_factory=list)


def resolvent_bound(
    params: PhysicalParams,
    t: float,
    mu: float,
    samples: Iterable[complex] | None = None,
    kind: OperatorKind = OperatorKind.OPERATOR_A,
) -> ResolventReport:
    """sup over samples of (|λ|+1)·‖(λI + A)⁻¹‖ on the phase space of one mode.

    Samples with Re λ < 0 are rejected. Singular samples are reported, not raised.
    """
    operator = build(kind, params, t, mu).entries
    weights = phase_weights(mu)
    bound = 0.0
    worst = 0j
    singular: list[complex] = []
    for sample in standard_resolvent_samples() if samples is None else samples:
        if sample.real < 0:
            raise ValueError(f"resolvent samples need Re λ >= 0, got {sample}")
        shifted = sample * np.eye(3) + operator
        try:
            resolvent = np.linalg.inv(shifted)
        except np.linalg.LinAlgError:
            _LOGGER.warning("λI + A singular at λ=%s, t=%s, mu=%s", sample, t, mu)
            singular.append(sample)
            continue
        scaled = (abs(sample) + 1.0) * weighted_norm(resolvent, weights, weights)
        if scaled > bound:
            bound, worst = scaled, sample
    return ResolventReport(bound=bound, worst_sample=worst, singular_samples=singular)


def resolvent_sweep(params: PhysicalParams, times: Sequence[float], mus: Sequence[float]) -> dict[float, float]:
    """Sup of `resolvent_bound` over mus and the standard samples, per time."""
    return {t: max(resolvent_bound(params, t, mu).bound for mu in mus) for t in times}


def hoelder_gap(params: PhysicalParams, t: float, s: float) -> float:
    """Norm of A(t) − A(s) from Y to L² × H⁻² × H⁻² on one mode; equals |a(t) − a(s)|.

    Raises when the gap exceeds the declared C|t − s|^β.
    """
    mu = 1.0
    kind = OperatorKind.OPERATOR_A
    difference = build(kind, params, t, mu).entries - build(kind, params, s, mu).entries
    gap = weighted_norm(difference, np.array([1.0, 1.0 / mu, 1.0 / mu]), phase_weights(mu))
    a = params.a
    allowed = a.c_hoelder * abs(t - s) ** a.hoelder_beta
    if gap > allowed + 1e-12:
        raise AdmissibilityError(
            f"Hölder bound fails at (t, s) = ({t}, {s}): gap {gap} > {allowed}",
            witnesses=[Witness("hoelder", t, s, gap)],
        )
    return gap


def mode_decay_rate(params: PhysicalParams, t: float, mu: float) -> float:
    """−max Re of the eigenvalues of generator_G, the decay rate of the mode."""
    eigenvalues = np.linalg.eigvals(build(OperatorKind.GENERATOR_G, params, t, mu).entries)
    return float(-np.max(eigenvalues.real))


def hurwitz_minors(params: PhysicalParams, t: float, mu: float) -> tuple[float, float, float]:
    """Routh–Hurwitz minors of λ³ + κmuλ² + (η + a²)mu²λ + ηκmu³."""
    a = params.coupling(t)
    c2 = params.kappa * mu
    c1 = (params.eta + a**2) * mu**2
    c0 = params.eta * params.kappa * mu**3
    second = c2 * c1 - c0
    return (c2, second, c0 * second)


class OperatorDomainError(Exception):
    """Error to indicate a non-positive mode eigenvalue."""


class OperatorUsageError(Exception):
    """Error to indicate an operation applied to the wrong matrix kind."""
