"""Scalar diagnostics of a covariance matrix."""
import logging
import math
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from app.core.constants import HBAR
from app.core.errors import InvalidArgument, InvalidState
from app.core.gaussian_state import (
    _balanced, mode_count, partial_transpose, require_physical, symplectic_eigenvalues,
)
from app.core.models import Bipartition, ModeUnits, Trajectory

log = logging.getLogger("cvdyn.measures")

# Column order of trajectory CSVs; variances are SI.
OBSERVABLE_COLUMNS = (
    "t_s", "E_N", "n_phonon_1", "n_phonon_2", "purity",
    "var_x1", "var_p1", "var_x2", "var_p2", "cov_x1x2",
)


def log_negativity(V, bipartition: Optional[Bipartition] = None) -> float:
    """Logarithmic negativity in ebits (log base 2).

    Each symplectic eigenvalue of the partially transposed state below 1/2
    contributes -log2(2 nu) once.
    """
    m = mode_count(V)
    if bipartition is None:
        if m < 2:
            raise InvalidArgument("log negativity needs at least two modes")
        bipartition = Bipartition.split(m)
    V = np.asarray(V, dtype=float)
    require_physical(V)
    a = list(bipartition.modes_a) + [m + i for i in bipartition.modes_a]
    b = list(bipartition.modes_b) + [m + i for i in bipartition.modes_b]
    if not np.any(V[np.ix_(a, b)]):
        return 0.0      # product state
    nu = symplectic_eigenvalues(partial_transpose(V, bipartition.modes_b))
    value = float(-np.sum(np.log2(np.minimum(1.0, 2.0 * nu))))
    return value if value > 0 else 0.0


def purity(V) -> float:
    """Tr(rho^2) = 1 / (2^m sqrt(det V)), evaluated as prod 1/(2 nu_k)."""
    mode_count(V)
    V = np.asarray(V, dtype=float)
    if np.min(np.linalg.eigvalsh(_balanced(V))) <= 0:
        raise InvalidState("covariance matrix is not positive definite (det V <= 0)")
    nu = symplectic_eigenvalues(V)
    return float(np.prod(1.0 / (2.0 * nu)))


def phonon_number(V, mode: int, units: ModeUnits, omega: float) -> float:
    """Mean occupation of `mode` measured in the ladder basis of frequency omega."""
    m = mode_count(V)
    if not 0 <= mode < m:
        raise InvalidArgument(f"mode {mode} out of range for {m} modes")
    s = units.frequency_ratio(omega)
    n = 0.5 * (V[mode, mode] * s + V[m + mode, m + mode] / s) - 0.5
    return max(0.0, float(n))


def effective_squeezing(V, mode: int) -> float:
    """r_eff = -ln(2 <x^2>)/2; positive when the position is squeezed."""
    return -0.5 * math.log(2.0 * float(V[mode, mode]))


def position_variance(V, mode: int, units: ModeUnits) -> float:
    """<x^2> in m^2."""
    return float(units.covariance_to_si(np.asarray(V, dtype=float))[mode, mode])


def position_spread(V, mode: int, units: ModeUnits) -> float:
    return math.sqrt(position_variance(V, mode, units))


def interaction_components(coupling: float, units: ModeUnits) -> tuple[float, float]:
    """Beam-splitter and two-mode-squeezing rates (rad/s) of lambda x1 x2.

    Both equal lambda x0^2 / hbar for a position-position coupling.
    """
    g = coupling * units.x0 ** 2 / HBAR
    return g, g


def beat_period(coupling: float, units: ModeUnits) -> float:
    """Period (s) of the excitation exchange driven by the beam-splitter term."""
    g, _ = interaction_components(coupling, units)
    return math.inf if g == 0 else 2.0 * math.pi / abs(g)


def trajectory_observables(trajectory: Trajectory, units: ModeUnits) -> dict[str, NDArray[np.float64]]:
    """Per-sample values for OBSERVABLE_COLUMNS.

    Entanglement and purity are read from the frame states, the rest from
    the lab-frame states. Single-mode trajectories carry NaN in the
    second-mode and entanglement columns.
    """
    k = len(trajectory)
    m = trajectory.states.shape[1] // 2
    columns = {name: np.full(k, np.nan) for name in OBSERVABLE_COLUMNS}
    columns["t_s"] = np.asarray(trajectory.times, dtype=float).copy()
    for j in range(k):
        V = trajectory.states[j]
        V_si = units.covariance_to_si(V)
        frame = trajectory.frame_states[j]
        freqs = trajectory.frequencies[j]
        columns["purity"][j] = purity(frame)
        columns["n_phonon_1"][j] = phonon_number(V, 0, units, freqs[0])
        columns["var_x1"][j] = V_si[0, 0]
        columns["var_p1"][j] = V_si[m, m]
        if m >= 2:
            columns["E_N"][j] = log_negativity(frame)
            columns["n_phonon_2"][j] = phonon_number(V, 1, units, freqs[1])
            columns["var_x2"][j] = V_si[1, 1]
            columns["var_p2"][j] = V_si[m + 1, m + 1]
            columns["cov_x1x2"][j] = V_si[0, 1]
    log.debug("Computed observables for %d samples", k)
    return columns
