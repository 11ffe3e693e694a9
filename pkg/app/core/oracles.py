"""Reference solutions the closed-form propagator is checked against.

rk4_evolve integrates the covariance equation step by step; the variance
map is the exact quarter-period bookkeeping of the squeezing protocol. Both
are independent of app.core.dynamics apart from the drift matrix.
"""
import logging
import math
from typing import Optional, Sequence

import numpy as np
from numpy.typing import NDArray

from app.core.dynamics import bath_covariance, drift_matrix
from app.core.errors import InvalidArgument
from app.core.gaussian_state import CovarianceMatrix, symmetrize
from app.core.models import BathParams, HamiltonianParams, ModeUnits, Rk4Config

log = logging.getLogger("cvdyn.oracles")

# Largest step allowed, as a fraction of the fastest normal-mode period.
MAX_STEP_FRACTION = 1.0 / 200.0


def fastest_period(params: HamiltonianParams) -> float:
    """2 pi / omega_max with omega_max^2 = max omega_i^2 + (|lambda| + |delta|) / m."""
    stiffness = max(w * w for w in params.frequencies)
    stiffness += (abs(params.coupling) + abs(params.local_shift)) / params.mass
    return 2.0 * math.pi / math.sqrt(stiffness)


def rk4_integrate(V0, drift, gamma: float, v_inf, duration: float, steps: int) -> CovarianceMatrix:
    """Classical RK4 on dV/dtau = A V + V A^T + gamma V_inf, A = K - gamma/2 (internal units)."""
    if steps < 1:
        raise InvalidArgument("RK4 needs at least one step")
    V = np.asarray(V0, dtype=float).copy()
    A = np.asarray(drift, dtype=float) - 0.5 * gamma * np.eye(V.shape[0])
    source = gamma * np.asarray(v_inf, dtype=float)
    h = duration / steps

    def rhs(X: NDArray[np.float64]) -> NDArray[np.float64]:
        AX = A @ X
        return AX + AX.T + source

    for _ in range(steps):
        k1 = rhs(V)
        k2 = rhs(V + 0.5 * h * k1)
        k3 = rhs(V + 0.5 * h * k2)
        k4 = rhs(V + h * k3)
        V = V + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return symmetrize(V)


def rk4_evolve(V0, params: HamiltonianParams, bath: BathParams, duration: float,
               cfg: Rk4Config, units: Optional[ModeUnits] = None) -> CovarianceMatrix:
    """Fixed-step RK4 over one constant segment; duration and cfg.dt in seconds.

    The step actually taken is duration / ceil(duration / cfg.dt) so the
    integration ends exactly at `duration`.
    """
    if duration < 0:
        raise InvalidArgument(f"duration must be >= 0, got {duration!r}")
    period = fastest_period(params)
    if cfg.dt > MAX_STEP_FRACTION * period:
        raise InvalidArgument(
            f"RK4 step {cfg.dt:.3g} s exceeds 1/200 of the fastest period {period:.3g} s"
        )
    units = units or ModeUnits(params.mass, max(params.frequencies))
    if duration == 0:
        return symmetrize(np.asarray(V0, dtype=float))
    steps = max(1, math.ceil(duration / cfg.dt - 1e-9))
    return rk4_integrate(
        V0,
        drift_matrix(params, units),
        units.rate_to_internal(bath.gamma),
        bath_covariance(params, bath, units),
        units.to_internal_time(duration),
        steps,
    )


def variance_map_cycle(X: float, P: float, omega_1: float, omega_2: float) -> tuple[float, float]:
    """Variances (vacuum units) after one [omega_2 quarter, omega_1 quarter] cycle.

    Each quarter period swaps the quadratures and rescales them by the
    frequency of that epoch, giving (X / k, k P) with k = (omega_1 / omega_2)^2.
    """
    if X <= 0 or P <= 0:
        raise InvalidArgument("variances must be positive")
    if omega_1 <= 0 or omega_2 <= 0:
        raise InvalidArgument("frequencies must be positive")
    k = (omega_1 / omega_2) ** 2
    return X / k, k * P


def variance_map(X: float, P: float, omega_1: float, omega_2: float, cycles: int) -> tuple[float, float]:
    if cycles < 0:
        raise InvalidArgument("cycle count must be >= 0")
    for _ in range(cycles):
        X, P = variance_map_cycle(X, P, omega_1, omega_2)
    return X, P


def observed_order(errors: Sequence[float]) -> float:
    """Smallest convergence order seen on a ladder of errors at steps h, h/2, h/4, ..."""
    if len(errors) < 2:
        raise InvalidArgument("need errors for at least two step sizes")
    if any(e <= 0 for e in errors):
        raise InvalidArgument("errors must be positive to estimate an order")
    orders = [math.log2(a / b) for a, b in zip(errors, errors[1:])]
    log.debug("Observed orders %s", ", ".join(f"{o:.3f}" for o in orders))
    return min(orders)
