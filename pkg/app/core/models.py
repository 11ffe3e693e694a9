"""Data models for cvdyn.

Physical inputs are SI. Covariance matrices are numpy arrays in the internal
units defined by ModeUnits, ordered (x_1..x_m, p_1..p_m).
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from app.core.constants import AIR_MOLECULE_MASS, CARBON_ATOM_MASS, HBAR, STANDARD_GRAVITY
from app.core.errors import InvalidArgument


class TrapKind(Enum):
    MAGNETIC = "magnetic"
    PENDULUM = "pendulum"
    DIRECT = "direct"


class InteractionKind(Enum):
    NONE = "none"
    CASIMIR = "casimir"
    GRAVITY = "gravity"
    POWER_LAW = "power-law"


class WaitReference(Enum):
    OMEGA_1 = "omega_1"
    OMEGA_2 = "omega_2"


def _require_positive(name: str, value: float) -> None:
    if not (value > 0 and math.isfinite(value)):
        raise InvalidArgument(f"{name} must be positive and finite, got {value!r}")


@dataclass(frozen=True)
class ModeUnits:
    """SI <-> internal conversion for equal-mass modes.

    Internally hbar = 1 and time runs as tau = omega_ref * t. Quadratures are
    q = x / sqrt(hbar / (mass omega_ref)) and p / sqrt(hbar mass omega_ref),
    so the ground state at omega_ref has variance 1/2 in both.
    """
    mass: float
    omega_ref: float

    def __post_init__(self):
        _require_positive("mass", self.mass)
        _require_positive("omega_ref", self.omega_ref)

    @property
    def x0(self) -> float:
        return math.sqrt(HBAR / (2.0 * self.mass * self.omega_ref))

    @property
    def p0(self) -> float:
        return math.sqrt(HBAR * self.mass * self.omega_ref / 2.0)

    def to_internal_time(self, t: float) -> float:
        return t * self.omega_ref

    def to_si_time(self, tau: float) -> float:
        return tau / self.omega_ref

    def frequency_ratio(self, omega: float) -> float:
        return omega / self.omega_ref

    def coupling_to_internal(self, stiffness: float) -> float:
        """N/m -> dimensionless, relative to mass * omega_ref^2."""
        return stiffness / (self.mass * self.omega_ref ** 2)

    def rate_to_internal(self, rate: float) -> float:
        return rate / self.omega_ref

    def _quadrature_scales(self, modes: int) -> NDArray[np.float64]:
        x_scale = math.sqrt(2.0) * self.x0
        p_scale = math.sqrt(2.0) * self.p0
        return np.concatenate([np.full(modes, x_scale), np.full(modes, p_scale)])

    def covariance_to_si(self, V: NDArray[np.float64]) -> NDArray[np.float64]:
        d = self._quadrature_scales(V.shape[0] // 2)
        return V * np.outer(d, d)

    def covariance_from_si(self, V_si: NDArray[np.float64]) -> NDArray[np.float64]:
        d = self._quadrature_scales(V_si.shape[0] // 2)
        return V_si / np.outer(d, d)


@dataclass(frozen=True)
class HamiltonianParams:
    frequencies: tuple[float, ...]     # rad/s, one per mode
    mass: float                        # kg, shared by all modes
    coupling: float = 0.0              # N/m, coefficient of x_1 x_2
    local_shift: float = 0.0           # N/m added to each m omega_i^2

    def __post_init__(self):
        if not self.frequencies:
            raise InvalidArgument("at least one mode frequency is required")
        for omega in self.frequencies:
            _require_positive("frequency", omega)
        _require_positive("mass", self.mass)
        if self.mode_count < 2 and self.coupling != 0.0:
            raise InvalidArgument("coupling needs two modes")

    @property
    def mode_count(self) -> int:
        return len(self.frequencies)

    def with_frequencies(self, frequencies) -> "HamiltonianParams":
        return replace(self, frequencies=tuple(float(w) for w in frequencies))


@dataclass(frozen=True)
class BathParams:
    gamma: float = 0.0          # 1/s energy decay rate
    n_bar: float = 0.0          # bath occupation, fixed across segments
    rethermalize: bool = True   # V_inf follows each segment's frequencies

    def __post_init__(self):
        if self.gamma < 0 or not math.isfinite(self.gamma):
            raise InvalidArgument(f"gamma must be >= 0, got {self.gamma!r}")
        if self.n_bar < 0 or not math.isfinite(self.n_bar):
            raise InvalidArgument(f"n_bar must be >= 0, got {self.n_bar!r}")

    @classmethod
    def from_quality(cls, omega: float, quality: float, n_bar: float,
                     rethermalize: bool = True) -> "BathParams":
        """Gamma = omega / Q; an infinite Q means no dissipation."""
        if not quality > 0:
            raise InvalidArgument(f"quality factor must be positive, got {quality!r}")
        gamma = 0.0 if math.isinf(quality) else omega / quality
        return cls(gamma=gamma, n_bar=n_bar, rethermalize=rethermalize)


@dataclass(frozen=True)
class Segment:
    params: HamiltonianParams
    duration: float             # s
    label: str = ""

    def __post_init__(self):
        if self.duration < 0 or not math.isfinite(self.duration):
            raise InvalidArgument(f"segment duration must be >= 0, got {self.duration!r}")


@dataclass
class Trajectory:
    times: NDArray[np.float64]              # s, strictly increasing
    states: NDArray[np.float64]             # (k, 2m, 2m) internal units
    frequencies: NDArray[np.float64]        # (k, m) rad/s in force at each sample
    segment_index: NDArray[np.int64]        # (k,) -1 for the initial sample
    # States with each segment's uncoupled harmonic motion undone; same
    # entanglement and purity as `states`, better conditioned when squeezed.
    frame_states: NDArray[np.float64]
    observables: dict[str, NDArray[np.float64]] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.times)

    @property
    def final_state(self) -> NDArray[np.float64]:
        return self.states[-1]


@dataclass(frozen=True)
class ProtocolSpec:
    omega_1: float                          # rad/s
    omega_2: float                          # rad/s
    cycles: int
    reverse: bool = True
    intermediate_wait: Optional[float] = None   # s; None = half period of the reference
    hold_after: float = 0.0                     # s at omega_1 after the protocol
    wait_reference: WaitReference = WaitReference.OMEGA_1

    def __post_init__(self):
        _require_positive("omega_1", self.omega_1)
        _require_positive("omega_2", self.omega_2)
        if self.cycles < 0:
            raise InvalidArgument(f"cycle count must be >= 0, got {self.cycles}")
        if self.hold_after < 0:
            raise InvalidArgument("hold_after must be >= 0")
        if self.intermediate_wait is not None and self.intermediate_wait < 0:
            raise InvalidArgument("intermediate_wait must be >= 0")

    @property
    def tau_1(self) -> float:
        return math.pi / (2.0 * self.omega_1)

    @property
    def tau_2(self) -> float:
        return math.pi / (2.0 * self.omega_2)

    @property
    def wait(self) -> float:
        if self.intermediate_wait is not None:
            return self.intermediate_wait
        omega = self.omega_1 if self.wait_reference is WaitReference.OMEGA_1 else self.omega_2
        return math.pi / omega

    @property
    def ratio(self) -> float:
        return self.omega_2 / self.omega_1


@dataclass(frozen=True)
class PowerLawInteraction:
    """U(d) = strength / d**exponent about the separation d0."""
    strength: float             # J m^n
    exponent: int
    separation: float           # m

    def __post_init__(self):
        _require_positive("separation", self.separation)
        if self.exponent < 1:
            raise InvalidArgument(f"exponent must be >= 1, got {self.exponent}")


@dataclass(frozen=True)
class CasimirSpheres:
    alpha: float                # J m
    radius: float               # m

    def __post_init__(self):
        _require_positive("sphere radius", self.radius)


@dataclass(frozen=True)
class MagneticTrap:
    susceptibility: float       # dimensionless, < 0 for a diamagnet
    density: float              # kg/m^3
    gradient: float             # T/m


@dataclass(frozen=True)
class PendulumScenario:
    length: float               # m
    base_acceleration: float    # m/s^2, upward pull during the omega_2 epoch
    mass: float                 # kg
    gravity: float = STANDARD_GRAVITY

    def __post_init__(self):
        _require_positive("pendulum length", self.length)
        if self.gravity + self.base_acceleration <= 0:
            raise InvalidArgument("g + a_up must be positive")


@dataclass(frozen=True)
class CslParams:
    collapse_rate: float        # Hz
    localization_length: float  # m
    mass: float                 # kg
    radius: float               # m
    reference_mass: float = CARBON_ATOM_MASS

    def __post_init__(self):
        for name in ("collapse_rate", "localization_length", "mass", "radius", "reference_mass"):
            _require_positive(name, getattr(self, name))


@dataclass(frozen=True)
class GasParams:
    pressure: float             # Pa
    temperature: float          # K
    radius: float               # m
    molecule_mass: float = AIR_MOLECULE_MASS

    def __post_init__(self):
        for name in ("pressure", "temperature", "radius", "molecule_mass"):
            _require_positive(name, getattr(self, name))


@dataclass(frozen=True)
class NoiseSpec:
    sigma: float                # rad/s std of each attained frequency
    samples: int = 1000
    seed: int = 0
    perturb_durations: bool = False

    def __post_init__(self):
        if self.sigma < 0 or not math.isfinite(self.sigma):
            raise InvalidArgument(f"sigma must be >= 0, got {self.sigma!r}")
        if self.samples < 1:
            raise InvalidArgument(f"samples must be >= 1, got {self.samples}")
        if not 0 <= self.seed < 2 ** 64:
            raise InvalidArgument("seed must fit in 64 unsigned bits")

    def with_sigma(self, sigma: float) -> "NoiseSpec":
        return replace(self, sigma=sigma)


@dataclass(frozen=True)
class Bipartition:
    modes_a: tuple[int, ...]
    modes_b: tuple[int, ...]

    def __post_init__(self):
        a, b = set(self.modes_a), set(self.modes_b)
        if not a or not b:
            raise InvalidArgument("both sides of a bipartition must be non-empty")
        if a & b:
            raise InvalidArgument("bipartition sides overlap")
        if a | b != set(range(len(a) + len(b))):
            raise InvalidArgument("bipartition must cover modes 0..m-1")

    @classmethod
    def split(cls, modes: int, modes_a=(0,)) -> "Bipartition":
        a = tuple(sorted(modes_a))
        return cls(a, tuple(i for i in range(modes) if i not in a))


@dataclass(frozen=True)
class Rk4Config:
    dt: float                   # s

    def __post_init__(self):
        _require_positive("dt", self.dt)
