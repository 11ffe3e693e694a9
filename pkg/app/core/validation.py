"""Self-checks behind `cvdyn validate`.

Each check compares the production propagator against an independent
reference and reports one worst-case figure against its tolerance.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from app.core.dynamics import evolve_final, evolve_schedule, evolve_segment
from app.core.errors import InvalidArgument
from app.core.gaussian_state import (
    is_physical, random_local_symplectic, random_symplectic, symplectic_eigenvalues, symmetrize,
    thermal_state, vacuum_state,
)
from app.core.measures import log_negativity, purity
from app.core.models import BathParams, HamiltonianParams, ModeUnits, ProtocolSpec, Rk4Config, Segment
from app.core.oracles import fastest_period, observed_order, rk4_evolve, variance_map
from app.core.physics_models import peak_log_negativity
from app.core.protocol import build_forward, build_full
from app.workers.batch_worker import run_ordered

log = logging.getLogger("cvdyn.validation")

VALIDATION_SEED = 20240611
DEFAULT_TOLERANCES = {
    "rk4_vs_closed_form": 1e-7,
    "rk4_convergence_order": 3.7,       # minimum order
    "variance_map_vs_schedule": 1e-8,
    "reversal_identity": 1e-8,
    "symplectic_invariance": 1e-8,
    "peak_log_negativity": 0.05,
}
CHECK_NAMES = tuple(DEFAULT_TOLERANCES)

# Reference oscillator: a 1e-15 kg particle near 100 Hz.
_MASS = 1e-15
_OMEGA = 2.0 * math.pi * 100.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    value: float            # worst error, or the observed order
    tolerance: float
    passed: bool
    detail: str = ""


def _relative_error(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / max(1e-300, float(np.max(np.abs(b)))))


def _random_segment(rng: np.random.Generator) -> tuple[HamiltonianParams, BathParams, float]:
    freqs = tuple(_OMEGA * rng.uniform(0.5, 1.5, size=2))
    coupling = _MASS * _OMEGA ** 2 * rng.uniform(-0.1, 0.1)
    params = HamiltonianParams(freqs, _MASS, coupling)
    bath = BathParams(gamma=_OMEGA * rng.uniform(0.0, 0.1), n_bar=rng.uniform(0.0, 5.0))
    duration = fastest_period(params) * rng.uniform(0.1, 1.0)
    return params, bath, duration


def _random_state(rng: np.random.Generator, m: int = 2, scale: float = 0.3):
    S = random_symplectic(m, rng, scale)
    return symmetrize(S @ thermal_state(m, rng.uniform(0.0, 3.0)) @ S.T)


def check_rk4_vs_closed_form(tolerance: float, count: int = 100, threads: int = 0) -> CheckResult:
    def one(index: int) -> float:
        rng = np.random.default_rng([VALIDATION_SEED, 1, index])
        params, bath, duration = _random_segment(rng)
        V0 = _random_state(rng)
        units = ModeUnits(params.mass, max(params.frequencies))
        cfg = Rk4Config(dt=fastest_period(params) / 1000.0)
        reference = evolve_segment(V0, Segment(params, duration), bath, units)
        return _relative_error(rk4_evolve(V0, params, bath, duration, cfg, units), reference)

    errors = run_ordered(one, range(count), threads)
    worst = max(errors)
    return CheckResult("rk4_vs_closed_form", worst, tolerance, worst <= tolerance,
                       f"{count} random dissipative segments")


def convergence_errors(divisions: Sequence[int] = (200, 400, 800)) -> list[float]:
    """RK4 errors against the closed form over one period for each step period/d."""
    rng = np.random.default_rng([VALIDATION_SEED, 2])
    params = HamiltonianParams((_OMEGA, 1.2 * _OMEGA), _MASS, 0.05 * _MASS * _OMEGA ** 2)
    bath = BathParams(gamma=0.02 * _OMEGA, n_bar=1.0)
    period = fastest_period(params)
    units = ModeUnits(_MASS, max(params.frequencies))
    V0 = _random_state(rng)
    reference = evolve_segment(V0, Segment(params, period), bath, units)
    return [_relative_error(rk4_evolve(V0, params, bath, period, Rk4Config(period / d), units), reference)
            for d in divisions]


def check_rk4_convergence_order(tolerance: float) -> CheckResult:
    errors = convergence_errors()
    order = observed_order(errors)
    return CheckResult("rk4_convergence_order", order, tolerance, order >= tolerance,
                       "errors " + ", ".join(f"{e:.3e}" for e in errors))


def check_variance_map_vs_schedule(tolerance: float) -> CheckResult:
    units = ModeUnits(_MASS, _OMEGA)
    worst = 0.0
    for ratio, cycles in ((0.3, 10), (0.5, 12), (0.9, 12)):
        spec = ProtocolSpec(_OMEGA, ratio * _OMEGA, cycles, reverse=False)
        V = evolve_final(vacuum_state(2), build_forward(spec, 0.0, _MASS), BathParams(), units)
        X, P = variance_map(1.0, 1.0, spec.omega_1, spec.omega_2, cycles)
        worst = max(worst, abs(2.0 * V[0, 0] / X - 1.0), abs(2.0 * V[2, 2] / P - 1.0))
    return CheckResult("variance_map_vs_schedule", worst, tolerance, worst <= tolerance,
                       "ratios 0.3, 0.5, 0.9")


def check_reversal_identity(tolerance: float) -> CheckResult:
    rng = np.random.default_rng([VALIDATION_SEED, 3])
    units = ModeUnits(_MASS, _OMEGA)
    worst = 0.0
    for ratio, cycles in ((0.3, 12), (0.5, 10), (0.9, 12), (2.0, 10)):
        V0 = _random_state(rng)
        spec = ProtocolSpec(_OMEGA, ratio * _OMEGA, cycles)
        V = evolve_final(V0, build_full(spec, 0.0, _MASS), BathParams(), units)
        worst = max(worst, float(np.max(np.abs(V - V0))))
    return CheckResult("reversal_identity", worst, tolerance, worst <= tolerance,
                       "ratios 0.3, 0.5, 0.9 and 2 at N = 10-12")


def check_symplectic_invariance(tolerance: float, count: int = 250) -> CheckResult:
    """Randomised Gaussian-state properties; value is the worst relative deviation."""
    rng = np.random.default_rng([VALIDATION_SEED, 4])
    worst = 0.0
    failures = []
    for i in range(count):
        V = _random_state(rng, scale=0.4)
        S = random_symplectic(2, rng, 0.4)
        nu = symplectic_eigenvalues(V)
        moved = symmetrize(S @ V @ S.T)
        worst = max(worst, _relative_error(symplectic_eigenvalues(moved), nu))
        L = random_local_symplectic(2, rng, 0.4)
        en = log_negativity(V)
        en_local = log_negativity(symmetrize(L @ V @ L.T))
        worst = max(worst, abs(en_local - en) / max(1.0, en))
        if not 0.0 < purity(V) <= 1.0 + tolerance:
            failures.append(f"purity out of (0, 1] at draw {i}")
        if not is_physical(moved):
            failures.append(f"symplectic map broke physicality at draw {i}")
    passed = worst <= tolerance and not failures
    detail = failures[0] if failures else f"{count} random states"
    return CheckResult("symplectic_invariance", worst, tolerance, passed, detail)


def peak_errors(count: int = 20, seed: int = VALIDATION_SEED) -> list[float]:
    """Relative error of the simulated no-protocol E_N maximum for random weak couplings."""
    rng = np.random.default_rng([seed, 5])
    units = ModeUnits(_MASS, _OMEGA)
    period = 2.0 * math.pi / _OMEGA
    errors = []
    for g in 10.0 ** rng.uniform(-8.0, -3.0, size=count):
        coupling = float(rng.choice([-1.0, 1.0]) * g * _MASS * _OMEGA ** 2)
        params = HamiltonianParams((_OMEGA, _OMEGA), _MASS, coupling)
        trajectory = evolve_schedule(vacuum_state(2), [Segment(params, period)], BathParams(),
                                     units, sample_dt=period / 400.0)
        peak = max(log_negativity(V) for V in trajectory.frame_states)
        expected = peak_log_negativity(coupling, _MASS, _OMEGA)
        errors.append(abs(peak / expected - 1.0))
    return errors


def check_peak_log_negativity(tolerance: float) -> CheckResult:
    worst = max(peak_errors())
    return CheckResult("peak_log_negativity", worst, tolerance, worst <= tolerance,
                       "20 random couplings, g in [1e-8, 1e-3]")


_CHECKS: dict[str, Callable[..., CheckResult]] = {
    "rk4_vs_closed_form": check_rk4_vs_closed_form,
    "rk4_convergence_order": check_rk4_convergence_order,
    "variance_map_vs_schedule": check_variance_map_vs_schedule,
    "reversal_identity": check_reversal_identity,
    "symplectic_invariance": check_symplectic_invariance,
    "peak_log_negativity": check_peak_log_negativity,
}


def run_checks(names: Optional[Sequence[str]] = None,
               tolerances: Optional[Mapping[str, float]] = None,
               threads: int = 0) -> list[CheckResult]:
    """Run the named checks (all by default); tolerances override the defaults."""
    names = list(names or CHECK_NAMES)
    overrides = dict(tolerances or {})
    for name in list(names) + list(overrides):
        if name not in _CHECKS:
            raise InvalidArgument(f"unknown check {name!r} (known: {', '.join(CHECK_NAMES)})")
    results = []
    for name in names:
        tolerance = overrides.get(name, DEFAULT_TOLERANCES[name])
        if name == "rk4_vs_closed_form":
            result = _CHECKS[name](tolerance, threads=threads)
        else:
            result = _CHECKS[name](tolerance)
        level = logging.INFO if result.passed else logging.ERROR
        log.log(level, "%s: %s (%.3e vs %.3e) %s", name, "pass" if result.passed else "FAIL",
                result.value, result.tolerance, result.detail)
        results.append(result)
    return results
