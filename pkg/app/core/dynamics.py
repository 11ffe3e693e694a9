"""Covariance propagation for piecewise-constant quadratic Hamiltonians.

Each segment evolves V under dV/dt = K V + V K^T - Gamma V + Gamma V_inf,
solved exactly per segment. Frequency jumps are instantaneous: V is
continuous across a boundary and only K and V_inf change.
"""
import logging
import math
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from app.core.errors import InvalidArgument, NumericError
from app.core.gaussian_state import (
    CovarianceMatrix, is_physical, mode_count, require_physical, symmetrize, thermal_state,
)
from app.core.models import BathParams, HamiltonianParams, ModeUnits, Segment, Trajectory

log = logging.getLogger("cvdyn.dynamics")

# A grid sample this close to a segment end (relative to sample_dt) is
# dropped in favour of the boundary sample.
BOUNDARY_MERGE = 1e-9

# Quarter-period segments land on exact 0/+-1 phases within this relative
# slack, so a squeeze-and-reverse sequence composes to exactly +-I.
QUARTER_TURN_SNAP = 1e-12
_QUARTER_TURNS = ((1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0))


def drift_matrix(params: HamiltonianParams, units: ModeUnits) -> NDArray[np.float64]:
    """K = Omega H in internal units; dq/dtau = p, dp/dtau = -stiffness q."""
    m = params.mode_count
    stiffness = np.diag(
        (np.asarray(params.frequencies) / units.omega_ref) ** 2
        + units.coupling_to_internal(params.local_shift)
    )
    if m >= 2:
        g = units.coupling_to_internal(params.coupling)
        stiffness[0, 1] = stiffness[1, 0] = g
    K = np.zeros((2 * m, 2 * m))
    K[:m, m:] = np.eye(m)
    K[m:, :m] = -stiffness
    return K


def matrix_exponential(A, t: float = 1.0) -> NDArray[np.float64]:
    """e^{A t} by scipy's scaling-and-squaring Pade."""
    A = np.asarray(A, dtype=float)
    if not np.all(np.isfinite(A)) or not math.isfinite(t):
        raise InvalidArgument("matrix exponential needs finite input")
    with np.errstate(over="ignore", invalid="ignore"):
        out = linalg.expm(A * t)
    if not np.all(np.isfinite(out)):
        raise NumericError("matrix exponential overflowed")
    return out


def bath_covariance(params: HamiltonianParams, bath: BathParams, units: ModeUnits) -> CovarianceMatrix:
    """V_inf: thermal at the segment's frequencies, or at omega_ref when frozen."""
    ratios = None
    if bath.rethermalize:
        ratios = [units.frequency_ratio(w) for w in params.frequencies]
    return thermal_state(params.mode_count, bath.n_bar, ratios)


def transition(drift, gamma: float, v_inf, duration: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Return (Phi, D) with V(t) = Phi V0 Phi^T + D over `duration` (internal units).

    With M = K - gamma/2 I, Phi = e^{M t} and D = int_0^t e^{M s} gamma V_inf e^{M^T s} ds.
    Both come from one exponential of [[-M, gamma V_inf], [0, M^T]], which is
    exact for every gamma >= 0.
    """
    drift = np.asarray(drift, dtype=float)
    n = drift.shape[0]
    if gamma == 0.0:
        if _uncoupled(drift):
            return _local_rotation(drift, duration), np.zeros((n, n))
        return matrix_exponential(drift, duration), np.zeros((n, n))
    M = drift - 0.5 * gamma * np.eye(n)
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -M
    block[:n, n:] = gamma * np.asarray(v_inf, dtype=float)
    block[n:, n:] = M.T
    E = matrix_exponential(block, duration)
    phi = E[n:, n:].T
    return phi, phi @ E[:n, n:]


def propagate(V0, drift, gamma: float, v_inf, duration: float) -> CovarianceMatrix:
    """Closed-form propagation in internal units (duration = omega_ref t)."""
    if duration < 0:
        raise InvalidArgument(f"duration must be >= 0, got {duration!r}")
    V0 = np.asarray(V0, dtype=float)
    if duration == 0:
        return symmetrize(V0)
    phi, noise = transition(drift, gamma, v_inf, duration)
    return symmetrize(phi @ V0 @ phi.T + noise)


def stationary_covariance(drift, gamma: float, v_inf) -> CovarianceMatrix:
    """Fixed point of K X + X K^T - gamma X + gamma V_inf = 0."""
    if gamma <= 0:
        raise InvalidArgument("a stationary state needs gamma > 0")
    drift = np.asarray(drift, dtype=float)
    M = drift - 0.5 * gamma * np.eye(drift.shape[0])
    return symmetrize(linalg.solve_continuous_lyapunov(M, -gamma * np.asarray(v_inf, dtype=float)))


def evolve_segment(V0, segment: Segment, bath: BathParams, units: ModeUnits) -> CovarianceMatrix:
    require_physical(V0, "initial state")
    return _segment_end(V0, segment, bath, units)


def _segment_end(V0, segment: Segment, bath: BathParams, units: ModeUnits) -> CovarianceMatrix:
    return propagate(
        V0,
        drift_matrix(segment.params, units),
        units.rate_to_internal(bath.gamma),
        bath_covariance(segment.params, bath, units),
        units.to_internal_time(segment.duration),
    )


def _uncoupled(drift: NDArray[np.float64]) -> bool:
    m = drift.shape[0] // 2
    stiffness = -drift[m:, :m]
    return bool(np.all(stiffness == np.diag(np.diag(stiffness))) and np.all(np.diag(stiffness) > 0))


def _phase(angle: float) -> tuple[float, float]:
    """(cos, sin), exact when angle is a multiple of pi/2 up to round-off."""
    turns = round(angle / (0.5 * math.pi))
    if abs(angle - 0.5 * math.pi * turns) <= QUARTER_TURN_SNAP * max(1.0, abs(angle)):
        return _QUARTER_TURNS[turns % 4]
    return math.cos(angle), math.sin(angle)


def _local_rotation(drift: NDArray[np.float64], tau: float, inverse: bool = False) -> NDArray[np.float64]:
    """Uncoupled harmonic flow of each mode over internal time tau."""
    m = drift.shape[0] // 2
    s = np.sqrt(-np.diag(drift[m:, :m]))
    phases = np.array([_phase(float(a)) for a in (-s * tau if inverse else s * tau)]).reshape(m, 2)
    c, sn = phases[:, 0], phases[:, 1]
    return np.block([[np.diag(c), np.diag(sn / s)], [np.diag(-s * sn), np.diag(c)]])


def _sample_offsets(duration: float, sample_dt: float) -> list[float]:
    offsets = []
    j = 1
    while j * sample_dt < duration * (1.0 - BOUNDARY_MERGE):
        offsets.append(j * sample_dt)
        j += 1
    offsets.append(duration)
    return offsets


def evolve_schedule(V0, schedule: list[Segment], bath: BathParams, units: ModeUnits,
                    sample_dt: float, t0: float = 0.0) -> Trajectory:
    """Sample the evolution every sample_dt inside each segment and at every boundary.

    Samples inside a segment are propagated from that segment's start state.
    frame_states holds each sample rotated back by the uncoupled harmonic
    motion of its segment; entanglement and purity are invariant under that
    local map and stay well conditioned there when the lab-frame state is a
    strongly squeezed ellipse at an oblique angle.
    """
    if not schedule:
        raise InvalidArgument("schedule is empty")
    if not sample_dt > 0:
        raise InvalidArgument(f"sample_dt must be positive, got {sample_dt!r}")
    V = np.asarray(V0, dtype=float)
    require_physical(V, "initial state")
    m = mode_count(V)
    if schedule[0].params.mode_count != m:
        raise InvalidArgument("schedule mode count does not match the state")

    times = [t0]
    states = [symmetrize(V)]
    frames = [symmetrize(V)]
    freqs = [np.asarray(schedule[0].params.frequencies, dtype=float)]
    seg_index = [-1]
    gamma = units.rate_to_internal(bath.gamma)
    t_start = t0
    for k, segment in enumerate(schedule):
        if segment.duration == 0:
            continue
        drift = drift_matrix(segment.params, units)
        v_inf = bath_covariance(segment.params, bath, units)
        seg_freqs = np.asarray(segment.params.frequencies, dtype=float)
        V_end = None
        for offset in _sample_offsets(segment.duration, sample_dt):
            tau = units.to_internal_time(offset)
            phi, noise = transition(drift, gamma, v_inf, tau)
            lab = symmetrize(phi @ V @ phi.T + noise)
            back = _local_rotation(drift, tau, inverse=True)
            c = back @ phi
            frames.append(symmetrize(c @ V @ c.T + back @ noise @ back.T))
            states.append(lab)
            times.append(t_start + offset)
            freqs.append(seg_freqs)
            seg_index.append(k)
            V_end = lab
        t_start += segment.duration
        if not np.all(np.isfinite(V_end)) or not is_physical(frames[-1]):
            raise NumericError(f"state became unphysical in segment {k} ({segment.label})", t_start)
        V = V_end
    log.debug("Evolved %d segments into %d samples", len(schedule), len(times))
    return Trajectory(
        times=np.asarray(times),
        states=np.asarray(states),
        frequencies=np.asarray(freqs),
        segment_index=np.asarray(seg_index, dtype=np.int64),
        frame_states=np.asarray(frames),
    )


def evolve_final(V0, schedule: list[Segment], bath: BathParams, units: ModeUnits,
                 check: bool = True) -> CovarianceMatrix:
    """Boundary-to-boundary propagation without sampling."""
    V = np.asarray(V0, dtype=float)
    if check:
        require_physical(V, "initial state")
    elapsed = 0.0
    for segment in schedule:
        V = _segment_end(V, segment, bath, units)
        elapsed += segment.duration
    if not np.all(np.isfinite(V)):
        raise NumericError("state overflowed", elapsed)
    if check and not is_physical(V):
        raise NumericError("final state is unphysical", elapsed)
    return symmetrize(V)


def long_time_limit(params: HamiltonianParams, bath: BathParams, units: ModeUnits) -> Optional[CovarianceMatrix]:
    """Stationary state of a fixed segment, or None without dissipation."""
    if bath.gamma == 0:
        return None
    return stationary_covariance(
        drift_matrix(params, units),
        units.rate_to_internal(bath.gamma),
        bath_covariance(params, bath, units),
    )
