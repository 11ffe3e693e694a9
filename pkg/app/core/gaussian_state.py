"""Gaussian states of m modes, held as covariance matrices.

A state is a real symmetric 2m x 2m numpy array ordered
(x_1..x_m, p_1..p_m), in units where hbar = 1 and the vacuum has variance
1/2 per quadrature. Functions here return fresh read-only arrays, so a state
can be shared between worker threads without copying.
"""
import logging
import math
from typing import Iterable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from app.core.errors import InvalidArgument, InvalidState

log = logging.getLogger("cvdyn.gaussian_state")

CovarianceMatrix = NDArray[np.float64]

SYMMETRY_RTOL = 1e-12
PHYSICALITY_TOL = 1e-9
# Eigen-solver error is absolute in the largest entry; squeezed states in a
# long protocol reach |V| ~ 1e8, so the physicality check widens with it.
ROUNDOFF_ALLOWANCE = 64 * float(np.finfo(float).eps)
PAIRING_RTOL = 1e-8
SYMPLECTIC_TOL = 1e-9


def _frozen(V) -> CovarianceMatrix:
    out = np.array(V, dtype=float)
    out.setflags(write=False)
    return out


def mode_count(V) -> int:
    shape = np.shape(V)
    if len(shape) != 2 or shape[0] != shape[1] or shape[0] == 0 or shape[0] % 2:
        raise InvalidArgument(f"expected a 2m x 2m matrix, got shape {shape}")
    return shape[0] // 2


def symplectic_form(m: int) -> NDArray[np.float64]:
    if m < 1:
        raise InvalidArgument(f"mode count must be >= 1, got {m}")
    eye = np.eye(m)
    zero = np.zeros((m, m))
    return np.block([[zero, eye], [-eye, zero]])


def symmetrize(V) -> CovarianceMatrix:
    V = np.asarray(V, dtype=float)
    return _frozen(0.5 * (V + V.T))


def check_symmetric(V) -> None:
    V = np.asarray(V, dtype=float)
    scale = max(1.0, float(np.max(np.abs(V))))
    asym = float(np.max(np.abs(V - V.T)))
    if asym > SYMMETRY_RTOL * scale:
        raise InvalidArgument(f"covariance matrix is not symmetric (max asymmetry {asym:.3e})")


# ── Reference states ──

def vacuum_state(m: int) -> CovarianceMatrix:
    if m < 1:
        raise InvalidArgument(f"mode count must be >= 1, got {m}")
    return _frozen(0.5 * np.eye(2 * m))


def thermal_state(m: int, n_bar: float,
                  frequency_ratios: Optional[Sequence[float]] = None) -> CovarianceMatrix:
    """Thermal state with occupation n_bar per mode.

    frequency_ratios holds omega_i / omega_ref; a mode trapped at a frequency
    other than the reference has its x variance divided and its p variance
    multiplied by that ratio.
    """
    if m < 1:
        raise InvalidArgument(f"mode count must be >= 1, got {m}")
    if n_bar < 0 or not math.isfinite(n_bar):
        raise InvalidArgument(f"thermal occupation must be >= 0, got {n_bar!r}")
    if frequency_ratios is None:
        ratios = np.ones(m)
    else:
        ratios = np.asarray(frequency_ratios, dtype=float)
        if ratios.shape != (m,) or np.any(ratios <= 0):
            raise InvalidArgument("need one positive frequency ratio per mode")
    occ = n_bar + 0.5
    return _frozen(np.diag(np.concatenate([occ / ratios, occ * ratios])))


def squeezed_vacuum(r: float) -> CovarianceMatrix:
    """Single mode, x-squeezed for r > 0."""
    return _frozen(np.diag([math.exp(-2.0 * r) / 2.0, math.exp(2.0 * r) / 2.0]))


def two_mode_squeezed_vacuum(r: float) -> CovarianceMatrix:
    c = math.cosh(2.0 * r) / 2.0
    s = math.sinh(2.0 * r) / 2.0
    return _frozen([
        [c, s, 0.0, 0.0],
        [s, c, 0.0, 0.0],
        [0.0, 0.0, c, -s],
        [0.0, 0.0, -s, c],
    ])


# ── Symplectic matrices ──

def local_squeeze(m: int, r) -> NDArray[np.float64]:
    """diag(e^-r .., e^r ..); r is a scalar or one value per mode."""
    r = np.broadcast_to(np.asarray(r, dtype=float), (m,))
    return np.diag(np.concatenate([np.exp(-r), np.exp(r)]))


def rotation(m: int, angles) -> NDArray[np.float64]:
    """Phase-space rotation per mode: x -> x cos + p sin, p -> -x sin + p cos."""
    angles = np.broadcast_to(np.asarray(angles, dtype=float), (m,))
    c, s = np.diag(np.cos(angles)), np.diag(np.sin(angles))
    return np.block([[c, s], [-s, c]])


def random_symplectic(m: int, rng: np.random.Generator, scale: float = 1.0) -> NDArray[np.float64]:
    """exp(Omega H) for a random symmetric H."""
    h = rng.normal(scale=scale, size=(2 * m, 2 * m))
    h = 0.5 * (h + h.T)
    return linalg.expm(symplectic_form(m) @ h)


def random_local_symplectic(m: int, rng: np.random.Generator, scale: float = 1.0) -> NDArray[np.float64]:
    """Like random_symplectic but acting on each mode separately."""
    h = rng.normal(scale=scale, size=(2 * m, 2 * m))
    h = 0.5 * (h + h.T)
    own = np.tile(np.eye(m, dtype=bool), (2, 2))
    h[~own] = 0.0
    return linalg.expm(symplectic_form(m) @ h)


def is_symplectic(S, tol: float = SYMPLECTIC_TOL) -> bool:
    S = np.asarray(S, dtype=float)
    m = mode_count(S)
    omega = symplectic_form(m)
    err = float(np.max(np.abs(S @ omega @ S.T - omega)))
    return err <= tol * max(1.0, float(np.max(np.abs(S))) ** 2)


def apply_symplectic(S, V) -> CovarianceMatrix:
    S = np.asarray(S, dtype=float)
    V = np.asarray(V, dtype=float)
    if S.shape != V.shape:
        raise InvalidArgument(f"shape mismatch: S {S.shape} vs V {V.shape}")
    if not is_symplectic(S):
        raise InvalidArgument("matrix is not symplectic")
    return symmetrize(S @ V @ S.T)


# ── Spectra and validity ──

def _balanced(V: NDArray[np.float64]) -> NDArray[np.float64]:
    """Local diagonal symplectic rescaling giving each mode equal x/p variance.

    Leaves the symplectic spectrum unchanged (also after partial transpose,
    which commutes with it) and keeps axis-aligned squeezed states well
    conditioned.
    """
    m = V.shape[0] // 2
    vx = np.diag(V)[:m]
    vp = np.diag(V)[m:]
    with np.errstate(divide="ignore", invalid="ignore"):
        d = np.where((vx > 0) & (vp > 0), (vp / vx) ** 0.25, 1.0)
    scale = np.concatenate([d, 1.0 / d])
    return V * np.outer(scale, scale)


def symplectic_eigenvalues(V) -> NDArray[np.float64]:
    """Ascending symplectic eigenvalues (m values)."""
    m = mode_count(V)
    V = np.asarray(V, dtype=float)
    check_symmetric(V)
    omega = symplectic_form(m)
    values = np.sort(np.abs(linalg.eigvals(1j * omega @ _balanced(V))))
    lower, upper = values[0::2], values[1::2]
    gap = np.abs(upper - lower)
    if np.any(gap > PAIRING_RTOL * np.maximum(upper, 1e-300)):
        log.debug("Symplectic eigenvalue pairs differ by up to %.3e", float(np.max(gap)))
    return 0.5 * (lower + upper)


def physicality_allowance(V, tol: float = PHYSICALITY_TOL) -> float:
    return tol + ROUNDOFF_ALLOWANCE * float(np.max(np.abs(V)))


def is_physical(V, tol: float = PHYSICALITY_TOL) -> bool:
    V = np.asarray(V, dtype=float)
    if not np.all(np.isfinite(V)):
        return False
    if np.min(np.linalg.eigvalsh(_balanced(0.5 * (V + V.T)))) <= 0:
        return False
    nu = symplectic_eigenvalues(V)
    return bool(nu[0] >= 0.5 - physicality_allowance(V, tol))


def require_physical(V, what: str = "state") -> None:
    if not is_physical(V):
        V = np.asarray(V, dtype=float)
        nu_min = float(symplectic_eigenvalues(V)[0]) if np.all(np.isfinite(V)) else float("nan")
        raise InvalidState(f"{what} is unphysical (min symplectic eigenvalue {nu_min:.6g} < 1/2)")


def partial_transpose(V, modes: Iterable[int]) -> CovarianceMatrix:
    """Flip the momentum signs of the given modes."""
    m = mode_count(V)
    chosen = set(int(i) for i in modes)
    if not chosen or len(chosen) >= m:
        raise InvalidArgument("partial transpose needs a non-empty proper subset of modes")
    if min(chosen) < 0 or max(chosen) >= m:
        raise InvalidArgument(f"mode index out of range for {m} modes")
    signs = np.ones(2 * m)
    for i in chosen:
        signs[m + i] = -1.0
    return _frozen(np.asarray(V, dtype=float) * np.outer(signs, signs))
