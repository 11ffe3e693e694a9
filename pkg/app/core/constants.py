"""Physical constants (CODATA values shipped with scipy.constants)."""
from scipy import constants as _c

HBAR = _c.hbar                  # J s
G_NEWTON = _c.G                 # m^3 kg^-1 s^-2
K_B = _c.k                      # J/K
MU_0 = _c.mu_0                  # T m/A
STANDARD_GRAVITY = _c.g         # m/s^2
AMU = _c.physical_constants["atomic mass constant"][0]  # kg

# Reference mass for the collapse-model coefficient: one carbon atom.
CARBON_ATOM_MASS = 12.0 * AMU
# Mean molecular mass of air.
AIR_MOLECULE_MASS = 28.97 * AMU
