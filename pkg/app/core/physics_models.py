"""Physical scenarios translated into simulator parameters and estimates.

Pure arithmetic in SI units. The coupling of two bodies interacting through
U(d) = C / d^n is read off the quadratic term of U about the separation d0;
linear terms only shift the equilibria and are reported, not simulated.
"""
import logging
import math

from app.core.constants import CARBON_ATOM_MASS, G_NEWTON, K_B, MU_0, STANDARD_GRAVITY
from app.core.errors import InvalidArgument
from app.core.models import (
    CasimirSpheres, CslParams, GasParams, MagneticTrap, PendulumScenario, PowerLawInteraction,
)

log = logging.getLogger("cvdyn.physics_models")

# Casimir-Polder energy between two spheres falls off as d^-7.
CASIMIR_EXPONENT = 7
# Upper limit returned for collapse-model coherence times (s).
COHERENCE_TIME_CAP = 1e30
# Below this argument the geometry factor is summed as a series.
_GEOMETRY_SERIES_LIMIT = 0.5


def sphere_mass(radius: float, density: float) -> float:
    if radius <= 0 or density <= 0:
        raise InvalidArgument("sphere radius and density must be positive")
    return 4.0 / 3.0 * math.pi * radius ** 3 * density


def casimir_interaction(spheres: CasimirSpheres, separation: float) -> PowerLawInteraction:
    return PowerLawInteraction(spheres.alpha * spheres.radius ** 6, CASIMIR_EXPONENT, separation)


def gravity_interaction(mass: float, separation: float) -> PowerLawInteraction:
    return PowerLawInteraction(-G_NEWTON * mass ** 2, 1, separation)


def bilinear_coupling(interaction: PowerLawInteraction) -> tuple[float, float]:
    """(lambda, delta_local) in N/m.

    lambda multiplies x_1 x_2 in the Hamiltonian; delta_local is the
    stiffness each oscillator gains from the same expansion.
    """
    n = interaction.exponent
    k = interaction.strength * n * (n + 1) / interaction.separation ** (n + 2)
    if k == 0:
        return 0.0, 0.0
    return -k, k


def equilibrium_displacement(interaction: PowerLawInteraction, mass: float, omega: float) -> float:
    """Shift (m) of each body away from the other; negative means towards."""
    n = interaction.exponent
    force = interaction.strength * n / interaction.separation ** (n + 1)
    return force / (mass * omega ** 2)


def peak_log_negativity(coupling: float, mass: float, omega: float) -> float:
    """Largest E_N reached from the ground state without any protocol: |lambda|/(m w^2 ln 2)."""
    return abs(coupling) / (mass * omega ** 2 * math.log(2.0))


def casimir_alpha_for_peak(target: float, radius: float, separation: float,
                           mass: float, omega: float) -> float:
    """Casimir coefficient alpha (J m) whose coupling peaks at E_N = target."""
    if target <= 0:
        raise InvalidArgument("target peak log negativity must be positive")
    n = CASIMIR_EXPONENT
    return (target * mass * omega ** 2 * separation ** (n + 2) * math.log(2.0)
            / (n * (n + 1) * radius ** 6))


def trap_frequency_magnetic(trap: MagneticTrap) -> float:
    """Diamagnetic trap: omega = sqrt(-chi / (mu_0 rho)) B'."""
    if trap.susceptibility >= 0:
        raise InvalidArgument("magnetic trapping needs a diamagnetic material (chi < 0)")
    if trap.density <= 0 or trap.gradient <= 0:
        raise InvalidArgument("density and field gradient must be positive")
    return math.sqrt(-trap.susceptibility / (MU_0 * trap.density)) * trap.gradient


def pendulum_jump(p: PendulumScenario) -> tuple[float, float, float]:
    """(omega_1, omega_2, base displacement in m) for an upward base pull."""
    omega_1 = math.sqrt(p.gravity / p.length)
    omega_2 = math.sqrt((p.gravity + p.base_acceleration) / p.length)
    tau_2 = math.pi / (2.0 * omega_2)
    return omega_1, omega_2, 0.5 * p.base_acceleration * tau_2 ** 2


def pendulum_length(omega_1: float, gravity: float = STANDARD_GRAVITY) -> float:
    return gravity / omega_1 ** 2


def csl_geometry_factor(x: float) -> float:
    """f(x) = (6/x^2) [1 - 2/x^2 + (1 + 2/x^2) e^{-x^2}]; tends to 6/x^2 for large x."""
    if x <= 0:
        raise InvalidArgument("geometry factor needs x > 0")
    y = x * x
    if y < _GEOMETRY_SERIES_LIMIT:
        # bracket = sum_{j>=2} (-1)^j (j-1) y^j / (j+1)!
        bracket = 0.0
        term = y * y / 6.0          # j = 2
        for j in range(2, 30):
            bracket += term
            term *= -y * j / ((j - 1) * (j + 2))
        return 6.0 / y * bracket
    return 6.0 / y * (1.0 - 2.0 / y + (1.0 + 2.0 / y) * math.exp(-y))


def csl_rate_coefficient(params: CslParams) -> float:
    """Lambda (1/(m^2 s)) = (m/m0)^2 gamma / (4 a^2) f(R/a)."""
    a = params.localization_length
    return ((params.mass / params.reference_mass) ** 2 * params.collapse_rate / (4.0 * a * a)
            * csl_geometry_factor(params.radius / a))


def csl_coherence_time(params: CslParams, distance: float) -> float:
    """1 / (Lambda d^2), capped at COHERENCE_TIME_CAP."""
    if distance < 0:
        raise InvalidArgument("distance must be >= 0")
    rate = csl_rate_coefficient(params) * distance ** 2
    if rate <= 1.0 / COHERENCE_TIME_CAP:
        return COHERENCE_TIME_CAP
    return 1.0 / rate


def csl_exposure_time(omega_1: float) -> float:
    """Time per cycle the spread stays above half its maximum: 4 tau_1 / 3."""
    return 4.0 / 3.0 * math.pi / (2.0 * omega_1)


def csl_bound(sigma_max: float, omega_1: float, mass: float, radius: float,
              localization_length: float, reference_mass: float = CARBON_ATOM_MASS,
              safety: float = 10.0) -> float:
    """Collapse rate (Hz) at which the coherence time at sigma_max is `safety` exposure times.

    An experiment that keeps its coherence over a protocol spreading the
    wave packet to sigma_max bounds the collapse rate from above by this value.
    """
    for name, value in (("sigma_max", sigma_max), ("omega_1", omega_1), ("mass", mass),
                        ("radius", radius), ("localization_length", localization_length),
                        ("reference_mass", reference_mass), ("safety", safety)):
        if value <= 0:
            raise InvalidArgument(f"{name} must be positive")
    a = localization_length
    tau = csl_exposure_time(omega_1)
    return (4.0 * reference_mass ** 2 * a * a
            / (safety * tau * mass ** 2 * sigma_max ** 2 * csl_geometry_factor(radius / a)))


def collision_rate(gas: GasParams) -> float:
    """Background-gas collision rate (Hz): pi v P R^2 / (k_B T), v = sqrt(3 k_B T / m_a)."""
    v_mean = math.sqrt(3.0 * K_B * gas.temperature / gas.molecule_mass)
    return math.pi * v_mean * gas.pressure * gas.radius ** 2 / (K_B * gas.temperature)
