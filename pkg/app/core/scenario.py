"""Scenario files: TOML in, a validated Scenario out.

Every schema problem raises ConfigError naming the offending field as
"<block>.<key>", and TOML syntax errors keep tomllib's line and column.
Unknown keys are rejected so a typo never silently falls back to a default.
"""
import hashlib
import logging
import math
import os

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, replace
from typing import Any, Optional

from app.core.constants import AIR_MOLECULE_MASS, CARBON_ATOM_MASS, STANDARD_GRAVITY
from app.core.errors import ConfigError, InvalidArgument
from app.core.gaussian_state import CovarianceMatrix, thermal_state
from app.core.models import (
    BathParams, CasimirSpheres, GasParams, InteractionKind, MagneticTrap, ModeUnits,
    PendulumScenario, PowerLawInteraction, ProtocolSpec, Segment, TrapKind, WaitReference,
)
from app.core.physics_models import (
    bilinear_coupling, casimir_alpha_for_peak, casimir_interaction, gravity_interaction,
    pendulum_jump, pendulum_length, sphere_mass, trap_frequency_magnetic,
)
from app.core.protocol import build_schedule, forward_duration, schedule_duration
from app.util import paths

log = logging.getLogger("cvdyn.scenario")

_MISSING = object()

BLOCKS = ("scenario", "particle", "trap", "interaction", "protocol", "bath",
          "output", "noise", "sweep", "csl", "gas")


@dataclass(frozen=True)
class NoiseConfig:
    sigmas: tuple[float, ...]           # rad/s grid for the normalised E_N table
    samples: int
    seed: int
    perturb_durations: bool = False
    cutoff: float = 1e-6                # ebits; "destroyed" below this
    find_threshold: bool = True
    include_bath: bool = True           # False: noise study without dissipation
    threshold_cycles: tuple[int, ...] = ()   # extra cycle counts for the sigma* table


@dataclass(frozen=True)
class SweepConfig:
    ratios: tuple[float, ...]           # omega_2 / omega_1


@dataclass(frozen=True)
class CslConfig:
    collapse_rate: float                # Hz
    localization_length: float          # m
    sigma_max: Optional[float] = None   # m; None = take it from a simulation
    reference_mass: float = CARBON_ATOM_MASS
    safety: float = 10.0


@dataclass(frozen=True)
class Scenario:
    name: str
    description: str
    config_hash: str
    mass: float                         # kg per particle
    count: int                          # 1 or 2 particles
    initial_n_bar: float
    trap: TrapKind
    protocol: ProtocolSpec
    interaction_kind: InteractionKind
    interaction: Optional[PowerLawInteraction]
    coupling: float                     # N/m
    local_shift: float                  # N/m
    bath: BathParams
    quality: float
    sample_dt: float                    # s
    radius: Optional[float] = None
    density: Optional[float] = None
    magnetic: Optional[MagneticTrap] = None
    pendulum: Optional[PendulumScenario] = None
    noise: Optional[NoiseConfig] = None
    sweep: Optional[SweepConfig] = None
    csl: Optional[CslConfig] = None
    gas: Optional[GasParams] = None

    @property
    def units(self) -> ModeUnits:
        return ModeUnits(self.mass, self.protocol.omega_1)

    def initial_state(self) -> CovarianceMatrix:
        return thermal_state(self.count, self.initial_n_bar)

    def schedule(self, spec: Optional[ProtocolSpec] = None) -> list[Segment]:
        return build_schedule(spec or self.protocol, self.coupling, self.mass,
                              self.count, self.local_shift)

    def with_protocol(self, **changes) -> "Scenario":
        return replace(self, protocol=replace(self.protocol, **changes))

    def with_ratio(self, ratio: float) -> "Scenario":
        return self.with_protocol(omega_2=ratio * self.protocol.omega_1)

    def with_cycles(self, cycles: int) -> "Scenario":
        return self.with_protocol(cycles=cycles)


class _Block:
    """Typed, path-aware access to one TOML table."""

    def __init__(self, name: str, data: Any):
        if not isinstance(data, dict):
            raise ConfigError(f"{name}: expected a table")
        self.name = name
        self._data = data
        self._used: set[str] = set()

    def has(self, key: str) -> bool:
        return key in self._data

    def _raw(self, key: str, default):
        self._used.add(key)
        if key in self._data:
            return self._data[key]
        if default is _MISSING:
            raise ConfigError(f"{self.name}.{key}: required")
        return default

    def number(self, key: str, default=_MISSING, positive: bool = False,
               minimum: Optional[float] = None) -> Optional[float]:
        value = self._raw(key, default)
        if value is None or value is default:
            return value
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{self.name}.{key}: expected a number, got {value!r}")
        value = float(value)
        if math.isnan(value):
            raise ConfigError(f"{self.name}.{key}: NaN is not allowed")
        if positive and not value > 0:
            raise ConfigError(f"{self.name}.{key}: must be positive, got {value!r}")
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self.name}.{key}: must be >= {minimum:g}, got {value!r}")
        return value

    def integer(self, key: str, default=_MISSING, minimum: Optional[int] = None) -> int:
        value = self._raw(key, default)
        if value is default:
            return value
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{self.name}.{key}: expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            raise ConfigError(f"{self.name}.{key}: must be >= {minimum}, got {value}")
        return value

    def boolean(self, key: str, default=_MISSING) -> bool:
        value = self._raw(key, default)
        if not isinstance(value, bool):
            raise ConfigError(f"{self.name}.{key}: expected true or false, got {value!r}")
        return value

    def text(self, key: str, default=_MISSING) -> str:
        value = self._raw(key, default)
        if not isinstance(value, str):
            raise ConfigError(f"{self.name}.{key}: expected a string, got {value!r}")
        return value

    def choice(self, key: str, enum_cls, default=_MISSING):
        value = self.text(key, default if default is _MISSING else default.value)
        try:
            return enum_cls(value)
        except ValueError:
            allowed = ", ".join(e.value for e in enum_cls)
            raise ConfigError(f"{self.name}.{key}: {value!r} is not one of {allowed}") from None

    def numbers(self, key: str, default=_MISSING, minimum: Optional[float] = None) -> tuple[float, ...]:
        value = self._raw(key, default)
        if value is default:
            return tuple(value)
        if not isinstance(value, list) or not value:
            raise ConfigError(f"{self.name}.{key}: expected a non-empty list of numbers")
        out = []
        for i, item in enumerate(value):
            if isinstance(item, bool) or not isinstance(item, (int, float)) or math.isnan(item):
                raise ConfigError(f"{self.name}.{key}[{i}]: expected a number, got {item!r}")
            if minimum is not None and item < minimum:
                raise ConfigError(f"{self.name}.{key}[{i}]: must be >= {minimum:g}, got {item!r}")
            out.append(float(item))
        return tuple(out)

    def exclusive(self, *keys: str) -> Optional[str]:
        """The one of `keys` present, None if none; two present is an error."""
        present = [k for k in keys if k in self._data]
        if len(present) > 1:
            raise ConfigError(f"{self.name}: give only one of {', '.join(present)}")
        return present[0] if present else None

    def finish(self) -> None:
        unknown = sorted(set(self._data) - self._used)
        if unknown:
            raise ConfigError(f"{self.name}.{unknown[0]}: unknown key")


def _frequency(block: _Block) -> Optional[float]:
    key = block.exclusive("omega_1", "frequency_hz")
    if key is None:
        return None
    value = block.number(key, positive=True)
    return value if key == "omega_1" else 2.0 * math.pi * value


def _particle(block: _Block) -> tuple[float, Optional[float], Optional[float], int, float]:
    count = block.integer("count", 2, minimum=1)
    if count > 2:
        raise ConfigError("particle.count: only one or two particles are supported")
    radius = block.number("radius", None, positive=True)
    density = block.number("density", None, positive=True)
    if block.has("mass"):
        mass = block.number("mass", positive=True)
    elif radius is not None and density is not None:
        mass = sphere_mass(radius, density)
    else:
        raise ConfigError("particle.mass: required unless radius and density are both given")
    initial_n_bar = block.number("initial_n_bar", 0.0, minimum=0.0)
    block.finish()
    return mass, radius, density, count, initial_n_bar


def _trap(block: _Block, mass: float, density: Optional[float]):
    """(kind, omega_1, omega_2 or None, magnetic, pendulum)."""
    kind = block.choice("type", TrapKind, TrapKind.DIRECT)
    magnetic = pendulum = None
    omega_2 = None
    if kind is TrapKind.DIRECT:
        omega_1 = _frequency(block)
        if omega_1 is None:
            raise ConfigError("trap.omega_1: required for a direct trap (or trap.frequency_hz)")
    elif kind is TrapKind.MAGNETIC:
        if density is None:
            raise ConfigError("particle.density: required for a magnetic trap")
        magnetic = MagneticTrap(block.number("susceptibility"), density,
                                block.number("gradient", positive=True))
        try:
            omega_1 = trap_frequency_magnetic(magnetic)
        except InvalidArgument as e:
            raise ConfigError(f"trap: {e}") from None
    else:
        gravity = block.number("gravity", STANDARD_GRAVITY, positive=True)
        key = block.exclusive("length", "omega_1", "frequency_hz")
        if key is None:
            raise ConfigError("trap.length: required for a pendulum (or trap.omega_1)")
        if key == "length":
            length = block.number("length", positive=True)
        else:
            length = pendulum_length(_frequency(block), gravity)
        base = block.number("base_acceleration", 0.0)
        try:
            pendulum = PendulumScenario(length, base, mass, gravity)
        except InvalidArgument as e:
            raise ConfigError(f"trap.base_acceleration: {e}") from None
        omega_1, jumped, _ = pendulum_jump(pendulum)
        if base != 0.0:
            omega_2 = jumped
    block.finish()
    return kind, omega_1, omega_2, magnetic, pendulum


def _interaction(block: _Block, mass: float, radius: Optional[float], omega_1: float, count: int):
    kind = block.choice("type", InteractionKind, InteractionKind.NONE)
    if kind is not InteractionKind.NONE and count < 2:
        raise ConfigError("interaction.type: an interaction needs particle.count = 2")
    interaction = None
    if kind is not InteractionKind.NONE:
        separation = block.number("separation", positive=True)
        if kind is InteractionKind.CASIMIR:
            if radius is None:
                raise ConfigError("particle.radius: required for a Casimir interaction")
            key = block.exclusive("alpha", "peak_log_negativity")
            if key is None:
                raise ConfigError("interaction.alpha: required (or interaction.peak_log_negativity)")
            if key == "alpha":
                alpha = block.number("alpha", positive=True)
            else:
                target = block.number("peak_log_negativity", positive=True)
                alpha = casimir_alpha_for_peak(target, radius, separation, mass, omega_1)
            interaction = casimir_interaction(CasimirSpheres(alpha, radius), separation)
        elif kind is InteractionKind.GRAVITY:
            interaction = gravity_interaction(mass, separation)
        else:
            interaction = PowerLawInteraction(block.number("strength"),
                                              block.integer("exponent", minimum=1), separation)
    include_shift = block.boolean("local_shift", False)
    block.finish()
    if interaction is None:
        return kind, None, 0.0, 0.0
    coupling, shift = bilinear_coupling(interaction)
    return kind, interaction, coupling, shift if include_shift else 0.0


def _protocol(block: _Block, omega_1: float, jumped: Optional[float]) -> ProtocolSpec:
    key = block.exclusive("ratio", "omega_2")
    if key is not None and jumped is not None:
        raise ConfigError(f"protocol.{key}: the pendulum base acceleration already sets omega_2")
    if key == "ratio":
        omega_2 = omega_1 * block.number("ratio", positive=True)
    elif key == "omega_2":
        omega_2 = block.number("omega_2", positive=True)
    elif jumped is not None:
        omega_2 = jumped
    else:
        omega_2 = omega_1
    spec = ProtocolSpec(
        omega_1=omega_1,
        omega_2=omega_2,
        cycles=block.integer("cycles", 0, minimum=0),
        reverse=block.boolean("reverse", True),
        intermediate_wait=block.number("intermediate_wait", None, minimum=0.0),
        wait_reference=block.choice("wait_reference", WaitReference, WaitReference.OMEGA_1),
    )
    hold_key = block.exclusive("hold_after", "end_time")
    if hold_key == "hold_after":
        spec = replace(spec, hold_after=block.number("hold_after", minimum=0.0))
    elif hold_key == "end_time":
        end_time = block.number("end_time", positive=True)
        spec_end = end_time - _protocol_length(spec)
        if spec_end < 0:
            raise ConfigError(f"protocol.end_time: {end_time:g} s ends before the protocol does")
        spec = replace(spec, hold_after=spec_end)
    block.finish()
    return spec


def _protocol_length(spec: ProtocolSpec) -> float:
    if not spec.reverse:
        return forward_duration(spec)
    return schedule_duration(build_schedule(replace(spec, hold_after=0.0), 0.0, 1.0, 1))


def _bath(block: _Block, omega_1: float) -> tuple[BathParams, float]:
    n_bar = block.number("n_bar", 0.0, minimum=0.0)
    rethermalize = block.boolean("rethermalize", True)
    key = block.exclusive("quality", "gamma")
    if key == "gamma":
        gamma = block.number("gamma", minimum=0.0)
        quality = math.inf if gamma == 0 else omega_1 / gamma
        bath = BathParams(gamma, n_bar, rethermalize)
    else:
        quality = block.number("quality", math.inf, positive=True)
        bath = BathParams.from_quality(omega_1, quality, n_bar, rethermalize)
    block.finish()
    return bath, quality


def _cycle_counts(block: _Block) -> tuple[int, ...]:
    values = block.numbers("threshold_cycles", (), minimum=0)
    for i, value in enumerate(values):
        if value != int(value):
            raise ConfigError(f"noise.threshold_cycles[{i}]: expected an integer, got {value!r}")
    return tuple(int(v) for v in values)


def _noise(block: _Block) -> NoiseConfig:
    config = NoiseConfig(
        sigmas=block.numbers("sigmas", (0.0,), minimum=0.0),
        samples=block.integer("samples", 1000, minimum=1),
        seed=block.integer("seed", 0, minimum=0),
        perturb_durations=block.boolean("perturb_durations", False),
        cutoff=block.number("cutoff", 1e-6, positive=True),
        find_threshold=block.boolean("find_threshold", True),
        include_bath=block.boolean("include_bath", True),
        threshold_cycles=_cycle_counts(block),
    )
    if config.seed >= 2 ** 64:
        raise ConfigError("noise.seed: must fit in 64 unsigned bits")
    block.finish()
    return config


def _sweep(block: _Block) -> SweepConfig:
    ratios = block.numbers("ratios")
    if any(r <= 0 for r in ratios):
        raise ConfigError("sweep.ratios: every ratio must be positive")
    block.finish()
    return SweepConfig(ratios)


def _csl(block: _Block) -> CslConfig:
    config = CslConfig(
        collapse_rate=block.number("collapse_rate", positive=True),
        localization_length=block.number("localization_length", 1e-7, positive=True),
        sigma_max=block.number("sigma_max", None, positive=True),
        reference_mass=block.number("reference_mass", CARBON_ATOM_MASS, positive=True),
        safety=block.number("safety", 10.0, positive=True),
    )
    block.finish()
    return config


def _gas(block: _Block, radius: Optional[float]) -> GasParams:
    gas_radius = block.number("radius", radius, positive=True)
    if gas_radius is None:
        raise ConfigError("gas.radius: required when particle.radius is not given")
    gas = GasParams(
        pressure=block.number("pressure", positive=True),
        temperature=block.number("temperature", positive=True),
        radius=gas_radius,
        molecule_mass=block.number("molecule_mass", AIR_MOLECULE_MASS, positive=True),
    )
    block.finish()
    return gas


def parse_scenario(data: dict, config_hash: str = "") -> Scenario:
    """Validate a parsed TOML tree into a Scenario."""
    unknown = sorted(set(data) - set(BLOCKS))
    if unknown:
        raise ConfigError(f"{unknown[0]}: unknown block")
    blocks = {name: _Block(name, data.get(name, {})) for name in BLOCKS}

    head = blocks["scenario"]
    name = head.text("name", "unnamed")
    description = head.text("description", "")
    head.finish()

    try:
        mass, radius, density, count, initial_n_bar = _particle(blocks["particle"])
        kind, omega_1, jumped, magnetic, pendulum = _trap(blocks["trap"], mass, density)
        interaction_kind, interaction, coupling, shift = _interaction(
            blocks["interaction"], mass, radius, omega_1, count)
        protocol = _protocol(blocks["protocol"], omega_1, jumped)
        bath, quality = _bath(blocks["bath"], omega_1)
        output = blocks["output"]
        sample_dt = output.number("sample_dt", protocol.tau_1 / 25.0, positive=True)
        output.finish()
        noise = _noise(blocks["noise"]) if "noise" in data else None
        sweep = _sweep(blocks["sweep"]) if "sweep" in data else None
        csl = _csl(blocks["csl"]) if "csl" in data else None
        gas = _gas(blocks["gas"], radius) if "gas" in data else None
    except ConfigError:
        raise
    except InvalidArgument as e:
        raise ConfigError(str(e)) from None

    if noise is not None and count < 2:
        raise ConfigError("noise: a noise study needs particle.count = 2")
    if sweep is not None and count < 2:
        raise ConfigError("sweep: a ratio sweep needs particle.count = 2")

    scenario = Scenario(
        name=name, description=description, config_hash=config_hash,
        mass=mass, count=count, initial_n_bar=initial_n_bar, trap=kind,
        protocol=protocol, interaction_kind=interaction_kind, interaction=interaction,
        coupling=coupling, local_shift=shift, bath=bath, quality=quality,
        sample_dt=sample_dt, radius=radius, density=density, magnetic=magnetic,
        pendulum=pendulum, noise=noise, sweep=sweep, csl=csl, gas=gas,
    )
    log.info("Scenario %r: m=%.4g kg, omega_1=%.6g rad/s, omega_2/omega_1=%.6g, N=%d, lambda=%.4g N/m",
             name, mass, protocol.omega_1, protocol.ratio, protocol.cycles, coupling)
    return scenario


def config_hash(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def load_scenario_bytes(raw: bytes, source: str = "<config>") -> Scenario:
    try:
        data = tomllib.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise ConfigError(f"{source}: not UTF-8 text ({e.reason})") from None
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{source}: {e}") from None
    return parse_scenario(data, config_hash(raw))


def load_scenario(path: str) -> Scenario:
    try:
        with open(path, "rb") as f:
            raw = f.read()
    except OSError as e:
        raise ConfigError(f"{path}: cannot read ({e.strerror})") from None
    return load_scenario_bytes(raw, os.path.basename(path))


def load_preset(name: str) -> Scenario:
    path = paths.preset_path(name)
    if not os.path.isfile(path):
        available = ", ".join(paths.preset_names()) or "none"
        raise ConfigError(f"unknown preset {name!r} (available: {available})")
    return load_scenario(path)

