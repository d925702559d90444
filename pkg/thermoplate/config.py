"""Experiment configuration: a flat INI file with typed keys.

Grammar of the variant strings::

    coefficient  := "constant(" c ")" | "sinusoidal(" base "," amplitude "," frequency "," phase ")"
    nonlinearity := "zero" | "identity" | "soft_cubic(" gamma ")"
                  | "modulated_sine(" coefficient ")" | "modulated_saturating(" coefficient ")"
"""

from __future__ import annotations

import configparser
import logging
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

from .attractor import PullbackRun, default_schedule, sample_ball
from .coeffs import CoefficientFunction, NonlinearitySpec, validate_a, validate_nonlinearity
from .constants import (
    DEFAULT_PULLBACK_TOL,
    DEFAULT_SIDE_LENGTH,
    SUPPORTED_DIMENSIONS,
    CoefficientVariant,
    NonlinearityVariant,
    OutputFormat,
)
from .data_classes import BoxDomain, State
from .dynamics import EvolutionConfig
from .operators import PhysicalParams

_LOGGER = logging.getLogger(__name__)

# Config keys of the declared coupling bounds and their CoefficientFunction fields.
_DECLARED_COEFFICIENT_KEYS = {
    "a_lower": "lower",
    "a_upper": "upper",
    "hoelder_c": "hoelder_c",
    "hoelder_beta": "hoelder_beta",
}

_CALL = re.compile(r"^\s*(?P<name>[a-z_]+)\s*(?:\((?P<args>.*)\))?\s*$")
_INITIAL_KINDS = ("zero", "ball")


@dataclass(frozen=True)
class DomainBlock:
    d: int = 2
    length: float = DEFAULT_SIDE_LENGTH
    modes: int = 8


@dataclass(frozen=True)
class PhysicsBlock:
    eta: float = 1.0
    kappa: float = 1.0
    a: CoefficientFunction = field(default_factory=lambda: CoefficientFunction.constant(1.0))


@dataclass(frozen=True)
class NonlinearityBlock:
    f: NonlinearitySpec = field(default_factory=NonlinearitySpec.zero)
    radius: float = 1.0


@dataclass(frozen=True)
class IntegratorBlock:
    dt: float = 1e-2
    t_final: float = 10.0
    tau: float = 0.0
    record_stride: int = 1
    snapshots: bool = False


@dataclass(frozen=True)
class InitialBlock:
    kind: str = "ball"
    radius: float = 1.0
    seed: int = 0


@dataclass(frozen=True)
class LyapunovBlock:
    delta2: float | None = None


@dataclass(frozen=True)
class AttractorBlock:
    radius: float = 1.0
    members: int = 16
    seed: int = 0
    schedule: tuple[float, ...] = field(default_factory=default_schedule)
    tol: float = DEFAULT_PULLBACK_TOL
    target: float = 0.0


@dataclass(frozen=True)
class OutputBlock:
    directory: str = "output"
    format: OutputFormat = OutputFormat.CSV
    plots: bool = False


@dataclass(frozen=True)
class ExperimentConfig:
    """Every input of one experiment, one block per INI section."""

    domain: DomainBlock = field(default_factory=DomainBlock)
    physics: PhysicsBlock = field(default_factory=PhysicsBlock)
    nonlinearity: NonlinearityBlock = field(default_factory=NonlinearityBlock)
    integrator: IntegratorBlock = field(default_factory=IntegratorBlock)
    initial: InitialBlock = field(default_factory=InitialBlock)
    lyapunov: LyapunovBlock = field(default_factory=LyapunovBlock)
    attractor: AttractorBlock = field(default_factory=AttractorBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def box(self) -> BoxDomain:
        return BoxDomain(self.domain.d, self.domain.length, self.domain.modes)

    def params(self) -> PhysicalParams:
        return PhysicalParams(self.physics.eta, self.physics.kappa, self.physics.a)

    def evolution(self, keep_states: bool = False) -> EvolutionConfig:
        return EvolutionConfig(self.integrator.dt, self.integrator.record_stride, keep_states)

    def initial_state(self) -> State:
        domain = self.box()
        if self.initial.kind == "zero":
            return State.zero(domain, self.integrator.tau)
        ball = sample_ball(domain, self.initial.radius, 1, self.initial.seed, time=self.integrator.tau)
        return ball.members[0]

    def pullback_run(self) -> PullbackRun:
        block = self.attractor
        return PullbackRun(block.target, block.schedule, block.radius, block.members, block.seed, block.tol)

    def with_overrides(
        self, seed: int | None = None, directory: str | None = None, output_format: OutputFormat | None = None
    ) -> ExperimentConfig:
        config = self
        if seed is not None:
            config = replace(
                config,
                initial=replace(config.initial, seed=seed),
                attractor=replace(config.attractor, seed=seed),
            )
        if directory is not None:
            config = replace(config, output=replace(config.output, directory=directory))
        if output_format is not None:
            config = replace(config, output=replace(config.output, format=output_format))
        return config


def _split_args(text: str) -> list[str]:
    """Split on top-level commas."""
    parts: list[str] = []
    depth = 0
    current = ""
    for char in text:
        if char == "," and depth == 0:
            parts.append(current.strip())
            current = ""
            continue
        depth += {"(": 1, ")": -1}.get(char, 0)
        current += char
    if current.strip():
        parts.append(current.strip())
    return parts


def _floats(args: list[str], count: int, what: str) -> list[float]:
    if len(args) != count:
        raise ValueError(f"{what} takes {count} argument(s), got {len(args)}")
    values = [float(arg) for arg in args]
    if not all(math.isfinite(value) for value in values):
        raise ValueError(f"{what} arguments must be finite")
    return values


def parse_coefficient(text: str, **declared: float) -> CoefficientFunction:
    """Parse `constant(c)` or `sinusoidal(base, amplitude, frequency, phase)`."""
    match = _CALL.match(text)
    if match is None or match.group("args") is None:
        raise ValueError(f"cannot parse coefficient '{text}'")
    name, args = match.group("name"), _split_args(match.group("args"))
    if name == CoefficientVariant.CONSTANT.value:
        (value,) = _floats(args, 1, name)
        return CoefficientFunction.constant(value, **declared)
    if name == CoefficientVariant.SINUSOIDAL.value:
        base, amplitude, frequency, phase = _floats(args, 4, name)
        return CoefficientFunction.sinusoidal(base, amplitude, frequency, phase, **declared)
    raise ValueError(f"unknown coefficient variant '{name}'")


def parse_nonlinearity(text: str) -> NonlinearitySpec:
    """Parse a nonlinearity variant string."""
    match = _CALL.match(text)
    if match is None:
        raise ValueError(f"cannot parse nonlinearity '{text}'")
    name, raw = match.group("name"), match.group("args")
    try:
        variant = NonlinearityVariant(name)
    except ValueError:
        raise ValueError(f"unknown nonlinearity variant '{name}'") from None
    if variant in (NonlinearityVariant.ZERO, NonlinearityVariant.IDENTITY):
        if raw is not None:
            raise ValueError(f"{name} takes no arguments")
        return NonlinearitySpec(variant)
    if raw is None:
        raise ValueError(f"{name} needs arguments")
    if variant is NonlinearityVariant.SOFT_CUBIC:
        (gamma,) = _floats(_split_args(raw), 1, name)
        return NonlinearitySpec.soft_cubic(gamma)
    return NonlinearitySpec(variant, modulation=parse_coefficient(raw))


class _Section:
    """Typed access to one INI section that remembers which keys were read."""

    def __init__(self, parser: configparser.ConfigParser, name: str) -> None:
        self._name = name
        self._values: dict[str, str] = dict(parser[name]) if parser.has_section(name) else {}
        self._seen: set[str] = set()

    def field_name(self, key: str) -> str:
        return f"{self._name}.{key}"

    def raw(self, key: str) -> str | None:
        self._seen.add(key)
        return self._values.get(key)

    def get(self, key: str, kind: type[Any], default: Any) -> Any:
        text = self.raw(key)
        if text is None:
            return default
        try:
            if kind is bool:
                lowered = text.strip().lower()
                if lowered not in ("true", "false", "yes", "no", "1", "0", "on", "off"):
                    raise ValueError(f"not a boolean: {text}")
                return lowered in ("true", "yes", "1", "on")
            if kind is float:
                value = float(text)
                if not math.isfinite(value):
                    raise ValueError("must be finite")
                return value
            return kind(text.strip())
        except ValueError as err:
            raise ConfigError(self.field_name(key), str(err)) from err

    def reject_unknown(self) -> None:
        unknown = sorted(set(self._values) - self._seen)
        if unknown:
            raise ConfigError(self.field_name(unknown[0]), "unknown key")


def _require(condition: bool, field_name: str, message: str) -> None:
    if not condition:
        raise ConfigError(field_name, message)


def parse_config(text: str, check_admissibility: bool = True) -> ExperimentConfig:
    """Parse INI text into a validated ExperimentConfig."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # type: ignore[assignment,method-assign]
    try:
        parser.read_string(text)
    except configparser.Error as err:
        raise ConfigError("<file>", str(err)) from err
    known = ("domain", "physics", "nonlinearity", "integrator", "initial", "lyapunov", "attractor", "output")
    for section in parser.sections():
        _require(section in known, section, "unknown section")
    sections = {name: _Section(parser, name) for name in known}

    domain_section = sections["domain"]
    domain = DomainBlock(
        d=domain_section.get("d", int, 2),
        length=domain_section.get("length", float, DEFAULT_SIDE_LENGTH),
        modes=domain_section.get("modes", int, 8),
    )
    _require(domain.d in SUPPORTED_DIMENSIONS, "domain.d", f"must be one of {SUPPORTED_DIMENSIONS}")
    _require(domain.length > 0, "domain.length", "must be positive")
    _require(domain.modes >= 1, "domain.modes", "must be >= 1")

    physics_section = sections["physics"]
    eta = physics_section.get("eta", float, 1.0)
    kappa = physics_section.get("kappa", float, 1.0)
    _require(eta > 0, "physics.eta", f"must be positive, got {eta}")
    _require(kappa > 0, "physics.kappa", f"must be positive, got {kappa}")
    declared = {
        name: value
        for key, name in _DECLARED_COEFFICIENT_KEYS.items()
        if (value := physics_section.get(key, float, None)) is not None
    }
    try:
        a = parse_coefficient(physics_section.raw("a") or "constant(1.0)", **declared)
    except ValueError as err:
        raise ConfigError("physics.a", str(err)) from err

    nonlinearity_section = sections["nonlinearity"]
    try:
        f = parse_nonlinearity(nonlinearity_section.raw("f") or "zero")
    except ValueError as err:
        raise ConfigError("nonlinearity.f", str(err)) from err
    nonlinearity = NonlinearityBlock(f=f, radius=nonlinearity_section.get("radius", float, 1.0))
    _require(nonlinearity.radius > 0, "nonlinearity.radius", "must be positive")

    integrator_section = sections["integrator"]
    integrator = IntegratorBlock(
        dt=integrator_section.get("dt", float, 1e-2),
        t_final=integrator_section.get("t_final", float, 10.0),
        tau=integrator_section.get("tau", float, 0.0),
        record_stride=integrator_section.get("record_stride", int, 1),
        snapshots=integrator_section.get("snapshots", bool, False),
    )
    _require(integrator.dt > 0, "integrator.dt", "must be positive")
    _require(integrator.t_final >= integrator.tau, "integrator.t_final", "must not precede integrator.tau")
    _require(integrator.record_stride >= 1, "integrator.record_stride", "must be >= 1")

    initial_section = sections["initial"]
    initial = InitialBlock(
        kind=initial_section.get("kind", str, "ball"),
        radius=initial_section.get("radius", float, 1.0),
        seed=initial_section.get("seed", int, 0),
    )
    _require(initial.kind in _INITIAL_KINDS, "initial.kind", f"must be one of {_INITIAL_KINDS}")
    _require(initial.radius >= 0, "initial.radius", "must be non-negative")

    lyapunov = LyapunovBlock(delta2=sections["lyapunov"].get("delta2", float, None))
    _require(lyapunov.delta2 is None or 0 < lyapunov.delta2 < 1, "lyapunov.delta2", "must lie in (0, 1)")

    attractor_section = sections["attractor"]
    schedule_text = attractor_section.raw("schedule")
    try:
        schedule = (
            tuple(float(part) for part in schedule_text.split(",")) if schedule_text else default_schedule()
        )
    except ValueError as err:
        raise ConfigError("attractor.schedule", str(err)) from err
    attractor = AttractorBlock(
        radius=attractor_section.get("radius", float, 1.0),
        members=attractor_section.get("members", int, 16),
        seed=attractor_section.get("seed", int, 0),
        schedule=schedule,
        tol=attractor_section.get("tol", float, DEFAULT_PULLBACK_TOL),
        target=attractor_section.get("target", float, 0.0),
    )
    _require(attractor.radius > 0, "attractor.radius", "must be positive")
    _require(attractor.members >= 1, "attractor.members", "must be >= 1")
    _require(attractor.tol > 0, "attractor.tol", "must be positive")
    _require(
        len(schedule) > 0 and all(b > a for a, b in zip(schedule, schedule[1:])) and schedule[0] >= 0,
        "attractor.schedule",
        "must be a non-empty, strictly increasing list of horizons",
    )

    output_section = sections["output"]
    output = OutputBlock(
        directory=output_section.get("directory", str, "output"),
        format=output_section.get("format", OutputFormat, OutputFormat.CSV),
        plots=output_section.get("plots", bool, False),
    )

    for section in sections.values():
        section.reject_unknown()

    config = ExperimentConfig(
        domain=domain,
        physics=PhysicsBlock(eta=eta, kappa=kappa, a=a),
        nonlinearity=nonlinearity,
        integrator=integrator,
        initial=initial,
        lyapunov=lyapunov,
        attractor=attractor,
        output=output,
    )
    if check_admissibility:
        check_config_admissibility(config)
    return config


def check_config_admissibility(config: ExperimentConfig) -> float:
    """Run the coefficient and nonlinearity checks; returns the dissipativity margin."""
    validate_a(config.physics.a).raise_if_failed()
    return validate_nonlinearity(config.nonlinearity.f, config.box())


def load_config(path: Path | str, check_admissibility: bool = True) -> ExperimentConfig:
    """Read and validate an INI experiment file."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigError("<file>", f"cannot read {path}: {err}") from err
    config = parse_config(text, check_admissibility)
    _LOGGER.info("Loaded configuration from %s", path)
    return config


def dump_config(config: ExperimentConfig) -> str:
    """Serialise to INI text; parse_config(dump_config(c)) == c."""
    a = config.physics.a
    sections: dict[str, dict[str, str]] = {
        "domain": {"d": str(config.domain.d), "length": repr(config.domain.length), "modes": str(config.domain.modes)},
        "physics": {
            "eta": repr(config.physics.eta),
            "kappa": repr(config.physics.kappa),
            "a": a.spec_string(),
            "a_lower": repr(a.a0),
            "a_upper": repr(a.a1),
            "hoelder_c": repr(a.c_hoelder),
            "hoelder_beta": repr(a.hoelder_beta),
        },
        "nonlinearity": {"f": config.nonlinearity.f.spec_string(), "radius": repr(config.nonlinearity.radius)},
        "integrator": {
            "dt": repr(config.integrator.dt),
            "t_final": repr(config.integrator.t_final),
            "tau": repr(config.integrator.tau),
            "record_stride": str(config.integrator.record_stride),
            "snapshots": str(config.integrator.snapshots).lower(),
        },
        "initial": {
            "kind": config.initial.kind,
            "radius": repr(config.initial.radius),
            "seed": str(config.initial.seed),
        },
        "lyapunov": {} if config.lyapunov.delta2 is None else {"delta2": repr(config.lyapunov.delta2)},
        "attractor": {
            "radius": repr(config.attractor.radius),
            "members": str(config.attractor.members),
            "seed": str(config.attractor.seed),
            "schedule": ", ".join(repr(horizon) for horizon in config.attractor.schedule),
            "tol": repr(config.attractor.tol),
            "target": repr(config.attractor.target),
        },
        "output": {
            "directory": config.output.directory,
            "format": config.output.format.value,
            "plots": str(config.output.plots).lower(),
        },
    }
    lines: list[str] = []
    for name, values in sections.items():
        lines.append(f"[{name}]")
        lines.extend(f"{key} = {value}" for key, value in values.items())
        lines.append("")
    return "\n".join(lines)


class ConfigError(Exception):
    """Error to indicate an invalid configuration field."""

    def __init__(self, field_name: str, message: str) -> None:
        super().__init__(f"{field_name}: {message}")
        self.field_name = field_name
