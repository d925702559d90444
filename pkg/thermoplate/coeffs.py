"""Coupling coefficients a(t), nonlinearities f(t, s) and their admissibility checks."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
import numpy.typing as npt

from .constants import (
    BOUND_SLACK,
    DEFAULT_DISSIPATIVITY_SAMPLES,
    DEFAULT_DISSIPATIVITY_SCALE,
    HOELDER_SLACK,
    CoefficientVariant,
    NonlinearityVariant,
)
from .data_classes import BoxDomain, FloatArray, SpectralField
from .spectral import dst_forward, dst_inverse, norm, sup_norm_constant

_LOGGER = logging.getLogger(__name__)

ArrayOrFloat = float | FloatArray

# Witness lists are cut to this length in reports.
_MAX_WITNESSES = 10
# Grids longer than _PAIR_LIMIT check every pair within _NEAR_OFFSETS samples plus a strided subset of all pairs.
_PAIR_LIMIT = 4096
_NEAR_OFFSETS = 64
_PAIR_BLOCK = 512


@dataclass(frozen=True)
class CoefficientFunction:
    """A bounded, Hölder continuous coefficient such as the coupling a(t).

    `lower`/`upper` are the declared bounds a₀, a₁ and (`hoelder_c`,
    `hoelder_beta`) the declared Hölder data. They default to the exact values
    of the variant; declaring tighter values is allowed and caught by
    `validate_a`.
    """

    variant: CoefficientVariant
    base: float
    amplitude: float = 0.0
    frequency: float = 0.0
    phase: float = 0.0
    lower: float | None = None
    upper: float | None = None
    hoelder_c: float | None = None
    hoelder_beta: float = 1.0

    def __post_init__(self) -> None:
        if self.variant is CoefficientVariant.CONSTANT and (self.amplitude != 0.0 or self.frequency != 0.0):
            raise ValueError("constant coefficient takes no amplitude or frequency")
        if self.lower is None:
            object.__setattr__(self, "lower", self.base - abs(self.amplitude))
        if self.upper is None:
            object.__setattr__(self, "upper", self.base + abs(self.amplitude))
        if self.hoelder_c is None:
            object.__setattr__(self, "hoelder_c", self.sup_abs_derivative)
        if not 0 < self.a0 <= self.a1:
            raise ValueError(f"coefficient bounds must satisfy 0 < a0 <= a1, got a0={self.a0}, a1={self.a1}")
        if not 0 < self.hoelder_beta <= 1:
            raise ValueError(f"hoelder_beta must lie in (0, 1], got {self.hoelder_beta}")
        if self.c_hoelder < 0:
            raise ValueError("hoelder_c must be non-negative")

    @classmethod
    def constant(cls, value: float, **declared: float) -> CoefficientFunction:
        return cls(CoefficientVariant.CONSTANT, base=value, **declared)

    @classmethod
    def sinusoidal(
        cls, base: float, amplitude: float, frequency: float, phase: float = 0.0, **declared: float
    ) -> CoefficientFunction:
        return cls(
            CoefficientVariant.SINUSOIDAL,
            base=base,
            amplitude=amplitude,
            frequency=frequency,
            phase=phase,
            **declared,
        )

    @property
    def a0(self) -> float:
        assert self.lower is not None
        return self.lower

    @property
    def a1(self) -> float:
        assert self.upper is not None
        return self.upper

    @property
    def c_hoelder(self) -> float:
        assert self.hoelder_c is not None
        return self.hoelder_c

    @property
    def is_constant(self) -> bool:
        return self.variant is CoefficientVariant.CONSTANT or self.amplitude == 0.0 or self.frequency == 0.0

    @property
    def sup_abs(self) -> float:
        return abs(self.base) + abs(self.amplitude)

    @property
    def sup_abs_derivative(self) -> float:
        return abs(self.amplitude * self.frequency)

    @property
    def period(self) -> float | None:
        if self.is_constant:
            return None
        return 2 * math.pi / abs(self.frequency)

    def values(self, t: ArrayOrFloat) -> ArrayOrFloat:
        """Unchecked evaluation, vectorised over t."""
        if isinstance(t, np.ndarray):
            if self.variant is CoefficientVariant.CONSTANT:
                return np.full_like(t, self.base, dtype=np.float64)
            return self.base + self.amplitude * np.sin(self.frequency * t + self.phase)
        if self.variant is CoefficientVariant.CONSTANT:
            return self.base
        return self.base + self.amplitude * math.sin(self.frequency * t + self.phase)

    def derivative(self, t: ArrayOrFloat) -> ArrayOrFloat:
        if self.variant is CoefficientVariant.CONSTANT:
            return 0.0 * np.asarray(t) if isinstance(t, np.ndarray) else 0.0
        if isinstance(t, np.ndarray):
            return self.amplitude * self.frequency * np.cos(self.frequency * t + self.phase)
        return self.amplitude * self.frequency * math.cos(self.frequency * t + self.phase)

    def spec_string(self) -> str:
        if self.variant is CoefficientVariant.CONSTANT:
            return f"constant({self.base!r})"
        return f"sinusoidal({self.base!r}, {self.amplitude!r}, {self.frequency!r}, {self.phase!r})"


def eval_a(a: CoefficientFunction, t: float) -> float:
    """Evaluate a(t), enforcing the declared bounds a₀ ≤ a(t) ≤ a₁."""
    value = float(a.values(t))
    if value < a.a0 - BOUND_SLACK or value > a.a1 + BOUND_SLACK:
        raise AdmissibilityError(
            f"a({t}) = {value} outside declared bounds [{a.a0}, {a.a1}]",
            witnesses=[Witness("bounds", t, None, value)],
        )
    return value


@dataclass(frozen=True)
class Witness:
    """A sampled point at which a hypothesis fails."""

    kind: str
    t: float
    s: float | None
    value: float


@dataclass(frozen=True)
class CoefficientReport:
    """Outcome of `validate_a`."""

    a0_emp: float
    a1_emp: float
    c_emp: float
    passed: bool
    witnesses: list[Witness] = field(default_factory=list)

    def raise_if_failed(self) -> None:
        if not self.passed:
            raise AdmissibilityError(
                f"coefficient fails its declared hypotheses: a0_emp={self.a0_emp}, a1_emp={self.a1_emp}, "
                f"c_emp={self.c_emp}",
                witnesses=self.witnesses,
            )


def _pair_quotients(
    times: FloatArray, values: FloatArray, rows: npt.NDArray[np.intp], columns: npt.NDArray[np.intp], beta: float
) -> tuple[float, int, int]:
    """Largest |a(t) − a(s)| / |t − s|^β between each sample in `rows` and every sample in `columns`."""
    best, best_i, best_j = 0.0, 0, 0
    for first in range(0, rows.size, _PAIR_BLOCK):
        block = rows[first : first + _PAIR_BLOCK]
        gaps = np.abs(values[block][:, None] - values[columns][None, :])
        spans = np.abs(times[block][:, None] - times[columns][None, :]) ** beta
        with np.errstate(divide="ignore", invalid="ignore"):
            quotients = np.where(spans > 0, gaps / np.where(spans > 0, spans, 1.0), 0.0)
        row, column = np.unravel_index(int(np.argmax(quotients)), quotients.shape)
        if quotients[row, column] > best:
            best, best_i, best_j = float(quotients[row, column]), int(block[row]), int(columns[column])
    return best, best_i, best_j


def _hoelder_quotient(times: FloatArray, values: FloatArray, beta: float) -> tuple[float, int, int]:
    """Empirical Hölder constant on a grid and the pair of indices attaining it.

    Memory stays O(_PAIR_BLOCK · n); long grids scan near neighbours in full
    and the remaining pairs on a strided subset.
    """
    count = times.size
    if count < 2:
        return 0.0, 0, 0
    indices = np.arange(count)
    if count <= _PAIR_LIMIT:
        return _pair_quotients(times, values, indices, indices, beta)
    best, best_i, best_j = 0.0, 0, 0
    for offset in range(1, _NEAR_OFFSETS + 1):
        quotients = np.abs(values[offset:] - values[:-offset]) / np.abs(times[offset:] - times[:-offset]) ** beta
        k = int(np.argmax(quotients))
        if quotients[k] > best:
            best, best_i, best_j = float(quotients[k]), k + offset, k
    subset = indices[:: math.ceil(count / _PAIR_LIMIT)]
    far, far_i, far_j = _pair_quotients(times, values, subset, subset, beta)
    if far > best:
        best, best_i, best_j = far, far_i, far_j
    return best, best_i, best_j


def validate_a(
    a: CoefficientFunction, t_window: tuple[float, float] | None = None, step: float = 0.01
) -> CoefficientReport:
    """Scan a(t) on a grid for the bounds and the Hölder quotient.

    The default window covers one period (or [0, 1] for constants).
    """
    if not step > 0:
        raise ValueError(f"grid step must be positive, got {step}")
    if t_window is None:
        t_window = (0.0, a.period or 1.0)
    start, stop = t_window
    times = np.arange(start, stop + 0.5 * step, step)
    values = np.asarray(a.values(times), dtype=np.float64)

    witnesses: list[Witness] = []
    low = values < a.a0 - BOUND_SLACK
    high = values > a.a1 + BOUND_SLACK
    # Worst offender first.
    for mask, order in ((low, np.argsort(values)), (high, np.argsort(-values))):
        witnesses.extend(Witness("bounds", float(times[i]), None, float(values[i])) for i in order if mask[i])

    c_emp, i, j = _hoelder_quotient(times, values, a.hoelder_beta)
    if c_emp > a.c_hoelder + HOELDER_SLACK:
        witnesses.append(Witness("hoelder", float(times[i]), float(times[j]), c_emp))

    report = CoefficientReport(
        a0_emp=float(values.min()),
        a1_emp=float(values.max()),
        c_emp=c_emp,
        passed=not witnesses,
        witnesses=witnesses[:_MAX_WITNESSES],
    )
    if report.passed:
        _LOGGER.debug("Coefficient %s passes: %s", a.spec_string(), report)
    else:
        _LOGGER.warning("Coefficient %s fails validation with %d witnesses", a.spec_string(), len(witnesses))
    return report


@dataclass(frozen=True)
class NonlinearitySpec:
    """A nonlinearity f(t, s) with closed-form antiderivative Φ(t, s) = ∫₀^s f(t, σ)dσ."""

    variant: NonlinearityVariant
    modulation: CoefficientFunction | None = None
    gamma: float = 0.0

    def __post_init__(self) -> None:
        modulated = self.variant in (NonlinearityVariant.MODULATED_SINE, NonlinearityVariant.MODULATED_SATURATING)
        if modulated and self.modulation is None:
            raise ValueError(f"{self.variant.value} requires a modulation p(t)")
        if not modulated and self.modulation is not None:
            raise ValueError(f"{self.variant.value} takes no modulation")

    @classmethod
    def zero(cls) -> NonlinearitySpec:
        return cls(NonlinearityVariant.ZERO)

    @classmethod
    def identity(cls) -> NonlinearitySpec:
        return cls(NonlinearityVariant.IDENTITY)

    @classmethod
    def modulated_sine(cls, modulation: CoefficientFunction) -> NonlinearitySpec:
        return cls(NonlinearityVariant.MODULATED_SINE, modulation=modulation)

    @classmethod
    def modulated_saturating(cls, modulation: CoefficientFunction) -> NonlinearitySpec:
        return cls(NonlinearityVariant.MODULATED_SATURATING, modulation=modulation)

    @classmethod
    def soft_cubic(cls, gamma: float) -> NonlinearitySpec:
        return cls(NonlinearityVariant.SOFT_CUBIC, gamma=gamma)

    @property
    def is_zero(self) -> bool:
        return self.variant is NonlinearityVariant.ZERO

    @property
    def is_autonomous(self) -> bool:
        return self.modulation is None or self.modulation.is_constant

    @property
    def growth_exponent(self) -> float:
        """ρ of the growth condition |f_s| ≤ c(1 + |s|^{ρ-1})."""
        return 3.0 if self.variant is NonlinearityVariant.SOFT_CUBIC else 1.0

    @property
    def growth_constant(self) -> float:
        """c of the growth condition, taking the sup over the modulation."""
        if self.variant is NonlinearityVariant.ZERO:
            return 0.0
        if self.variant is NonlinearityVariant.IDENTITY:
            return 0.5
        if self.variant is NonlinearityVariant.SOFT_CUBIC:
            return max(abs(self.gamma), 3.0)
        return 0.5 * self.p_max

    @property
    def p_max(self) -> float:
        return self.modulation.sup_abs if self.modulation is not None else 1.0

    def modulation_at(self, t: float) -> float:
        assert self.modulation is not None
        return float(self.modulation.values(t))

    def spec_string(self) -> str:
        if self.modulation is not None:
            return f"{self.variant.value}({self.modulation.spec_string()})"
        if self.variant is NonlinearityVariant.SOFT_CUBIC:
            return f"soft_cubic({self.gamma!r})"
        return self.variant.value

    # -- closed-form scalar bounds used by the Lyapunov constants -----------------

    def c_nu(self, nu: float) -> float:
        """Upper bound of sup_{t,s} (f(t,s)s − νs²), the pointwise form of C_ν."""
        if self.variant is NonlinearityVariant.ZERO:
            return 0.0
        if self.variant is NonlinearityVariant.IDENTITY:
            return 0.0 if nu >= 1.0 else math.inf
        if self.variant is NonlinearityVariant.MODULATED_SINE:
            return self.p_max**2 / (4.0 * nu)
        if self.variant is NonlinearityVariant.MODULATED_SATURATING:
            return max(math.sqrt(self.p_max) - math.sqrt(nu), 0.0) ** 2
        return max(self.gamma - nu, 0.0) ** 2 / 4.0

    def c_eps(self, eps: float) -> float:
        """Upper bound of sup_{t,s} (Φ(t,s) − εs²), the pointwise form of C_ε."""
        if self.variant is NonlinearityVariant.ZERO:
            return 0.0
        if self.variant is NonlinearityVariant.IDENTITY:
            return 0.0 if eps >= 0.5 else math.inf
        if self.variant is NonlinearityVariant.MODULATED_SINE:
            return 2.0 * self.p_max
        if self.variant is NonlinearityVariant.MODULATED_SATURATING:
            p = self.p_max
            if p / 2.0 <= eps:
                return 0.0
            return (p / 2.0) * math.log(p / (2.0 * eps)) - p / 2.0 + eps
        return max(self.gamma / 2.0 - eps, 0.0) ** 2

    def ratio_sup(self, s_max: float) -> float:
        """sup over |s| ≤ s_max of |f(t,s)/s|."""
        if self.variant is NonlinearityVariant.ZERO:
            return 0.0
        if self.variant is NonlinearityVariant.IDENTITY:
            return 1.0
        if self.variant is NonlinearityVariant.SOFT_CUBIC:
            return max(abs(self.gamma), abs(self.gamma - s_max**2))
        return self.p_max

    def negative_potential_ratio_sup(self, s_max: float) -> float:
        """sup over 0 < |s| ≤ s_max of (−Φ(t,s))₊ / s²."""
        if self.variant is NonlinearityVariant.SOFT_CUBIC:
            return max(-self.gamma / 2.0 + s_max**2 / 4.0, 0.0)
        # Φ ≥ 0 for the remaining variants (positive modulation).
        return 0.0

    def potential_rate_sup(self, s_max: float) -> float:
        """sup over |s| ≤ s_max of |∂ₜΦ(t,s)|; zero for autonomous f."""
        if self.is_autonomous:
            return 0.0
        assert self.modulation is not None
        rate = self.modulation.sup_abs_derivative
        if self.variant is NonlinearityVariant.MODULATED_SINE:
            return 2.0 * rate
        return 0.5 * rate * math.log1p(s_max**2)


def eval_f(f: NonlinearitySpec, t: float, s: ArrayOrFloat) -> ArrayOrFloat:
    """Evaluate f(t, s), vectorised over s."""
    s_arr = np.asarray(s, dtype=np.float64)
    if f.variant is NonlinearityVariant.ZERO:
        result = np.zeros_like(s_arr)
    elif f.variant is NonlinearityVariant.IDENTITY:
        result = s_arr.copy()
    elif f.variant is NonlinearityVariant.MODULATED_SINE:
        result = f.modulation_at(t) * np.sin(s_arr)
    elif f.variant is NonlinearityVariant.MODULATED_SATURATING:
        result = f.modulation_at(t) * s_arr / (1.0 + s_arr**2)
    else:
        result = f.gamma * s_arr - s_arr**3
    return result if isinstance(s, np.ndarray) else float(result)


def eval_antiderivative(f: NonlinearitySpec, t: float, s: ArrayOrFloat) -> ArrayOrFloat:
    """Evaluate Φ(t, s) = ∫₀^s f(t, σ) dσ in closed form."""
    s_arr = np.asarray(s, dtype=np.float64)
    if f.variant is NonlinearityVariant.ZERO:
        result = np.zeros_like(s_arr)
    elif f.variant is NonlinearityVariant.IDENTITY:
        result = 0.5 * s_arr**2
    elif f.variant is NonlinearityVariant.MODULATED_SINE:
        result = f.modulation_at(t) * (1.0 - np.cos(s_arr))
    elif f.variant is NonlinearityVariant.MODULATED_SATURATING:
        result = 0.5 * f.modulation_at(t) * np.log1p(s_arr**2)
    else:
        result = 0.5 * f.gamma * s_arr**2 - 0.25 * s_arr**4
    return result if isinstance(s, np.ndarray) else float(result)


def eval_antiderivative_rate(f: NonlinearitySpec, t: float, s: ArrayOrFloat) -> ArrayOrFloat:
    """Evaluate ∂ₜΦ(t, s); zero unless f carries a time-dependent modulation."""
    s_arr = np.asarray(s, dtype=np.float64)
    if f.is_autonomous:
        result = np.zeros_like(s_arr)
    else:
        assert f.modulation is not None
        rate = float(f.modulation.derivative(t))
        if f.variant is NonlinearityVariant.MODULATED_SINE:
            result = rate * (1.0 - np.cos(s_arr))
        else:
            result = 0.5 * rate * np.log1p(s_arr**2)
    return result if isinstance(s, np.ndarray) else float(result)


def _time_samples(f: NonlinearitySpec, count: int = 64) -> FloatArray:
    if f.modulation is None or f.modulation.period is None:
        return np.zeros(1)
    return np.linspace(0.0, f.modulation.period, count)


def dissipativity_margin(
    f: NonlinearitySpec,
    lambda1: float,
    scale: float = DEFAULT_DISSIPATIVITY_SCALE,
    samples: int = DEFAULT_DISSIPATIVITY_SAMPLES,
) -> float:
    """λ₁ minus the sup of f(t,s)/s over |s| ∈ [S/10, S] and sampled t."""
    magnitudes = np.linspace(scale / 10.0, scale, samples)
    s = np.concatenate([-magnitudes[::-1], magnitudes])
    sup_ratio = max(float(np.max(np.asarray(eval_f(f, float(t), s)) / s)) for t in _time_samples(f))
    margin = lambda1 - sup_ratio
    if margin <= 0:
        raise AdmissibilityError(
            f"dissipativity fails for {f.spec_string()}: sup f(t,s)/s = {sup_ratio} >= lambda1 = {lambda1}",
            witnesses=[Witness("dissipativity", 0.0, scale, sup_ratio)],
        )
    _LOGGER.debug("Dissipativity margin of %s: %s", f.spec_string(), margin)
    return margin


def antiderivative_error(f: NonlinearitySpec, s_max: float = 10.0, samples: int = 401, h: float = 1e-4) -> float:
    """Max |central difference of Φ − f| over s ∈ [−s_max, s_max] and sampled t."""
    s = np.linspace(-s_max, s_max, samples)
    worst = 0.0
    for t in _time_samples(f, 8):
        t = float(t)
        derivative = (np.asarray(eval_antiderivative(f, t, s + h)) - np.asarray(eval_antiderivative(f, t, s - h))) / (
            2 * h
        )
        worst = max(worst, float(np.max(np.abs(derivative - np.asarray(eval_f(f, t, s))))))
    return worst


def admissible_rho(dimension: int) -> tuple[float, float]:
    """Growth exponents for which H² embeds in L^{2ρ} on a d-dimensional box."""
    if dimension <= 4:
        return (1.0, math.inf)
    return (1.0, dimension / (dimension - 4))


def validate_nonlinearity(f: NonlinearitySpec, domain: BoxDomain) -> float:
    """Run every admissibility check for f on the domain; return the dissipativity margin."""
    if f.variant is NonlinearityVariant.SOFT_CUBIC and domain.dimension != 2:
        raise AdmissibilityError("soft_cubic is admitted only on 2D boxes")
    low, high = admissible_rho(domain.dimension)
    if not low <= f.growth_exponent <= high:
        raise AdmissibilityError(f"growth exponent {f.growth_exponent} outside [{low}, {high}]")
    if f.modulation is not None:
        validate_a(f.modulation).raise_if_failed()
    error = antiderivative_error(f)
    if error > 1e-6:
        raise AdmissibilityError(f"antiderivative of {f.spec_string()} is inconsistent (error {error})")
    return dissipativity_margin(f, domain.lambda1)


def nemytskii(f: NonlinearitySpec, t: float, u: SpectralField) -> SpectralField:
    """Pseudo-spectral superposition operator: analysis of f(t, u(x_j))."""
    if f.is_zero:
        return u.domain.zeros()
    grid = dst_inverse(u)
    return dst_forward(u.domain, np.asarray(eval_f(f, t, grid)))


@dataclass(frozen=True)
class LipschitzReport:
    """Outcome of `lipschitz_estimate`."""

    empirical: float
    scalar_bound: float
    pointwise_ok: bool
    sup_abs_u: float


def random_field(domain: BoxDomain, rng: np.random.Generator, h2_radius: float) -> SpectralField:
    """Seeded field with coefficients ∝ mu⁻¹ · N(0,1), rescaled to ‖Δu‖ = h2_radius."""
    raw = rng.standard_normal(domain.mode_count) / domain.spectrum.mu
    field_ = SpectralField(domain, raw)
    size = norm(field_, "H2")
    return field_ * (h2_radius / size) if size > 0 else field_


def lipschitz_estimate(
    f: NonlinearitySpec,
    domain: BoxDomain,
    radius: float,
    samples: int = 32,
    seed: int = 0,
    t: float = 0.0,
) -> LipschitzReport:
    """Empirical Lipschitz constant of u ↦ f(t, u) from the H²-ball into L².

    Also checks the scalar estimate
    |f(t,s₁) − f(t,s₂)| ≤ 2^{ρ−1}c|s₁ − s₂|(1 + |s₁|^{ρ−1} + |s₂|^{ρ−1})
    on every sampled pair of grid values.
    """
    if not radius > 0:
        raise ValueError("radius must be positive")
    if samples < 2:
        raise ValueError("need at least two samples")
    rng = np.random.default_rng(seed)
    rho = f.growth_exponent
    c = f.growth_constant
    sup_u = sup_norm_constant(domain) * radius

    empirical = 0.0
    pointwise_ok = True
    for _ in range(samples):
        first = random_field(domain, rng, radius * rng.uniform())
        second = random_field(domain, rng, radius * rng.uniform())
        gap = norm(first - second, "H2")
        if gap == 0:
            continue
        image_gap = nemytskii(f, t, first) - nemytskii(f, t, second)
        empirical = max(empirical, norm(image_gap, "L2") / gap)

        s1 = dst_inverse(first).reshape(-1)
        s2 = dst_inverse(second).reshape(-1)
        lhs = np.abs(np.asarray(eval_f(f, t, s1)) - np.asarray(eval_f(f, t, s2)))
        rhs = 2 ** (rho - 1) * c * np.abs(s1 - s2) * (1 + np.abs(s1) ** (rho - 1) + np.abs(s2) ** (rho - 1))
        pointwise_ok = pointwise_ok and bool(np.all(lhs <= rhs + 1e-12))

    # Brute-force sup of |f_s| over |s| ≤ sup|u|, converted with ‖w‖ ≤ ‖Δw‖/λ₁.
    s_grid = np.linspace(-sup_u, sup_u, 20001)
    slopes = np.abs(np.diff(np.asarray(eval_f(f, t, s_grid)))) / np.diff(s_grid)
    scalar_bound = float(np.max(slopes)) / domain.lambda1 if slopes.size else 0.0
    return LipschitzReport(empirical=empirical, scalar_bound=scalar_bound, pointwise_ok=pointwise_ok, sup_abs_u=sup_u)


class AdmissibilityError(Exception):
    """A coefficient or nonlinearity violates one of its declared hypotheses."""

    def __init__(self, message: str, witnesses: list[Witness] | None = None) -> None:
        super().__init__(message)
        self.witnesses: list[Witness] = witnesses or []
