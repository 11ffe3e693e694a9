"""Monte-Carlo study of frequency-control errors.

Every jump lands on a frequency drawn from a Gaussian centred on the nominal
value. Final covariance matrices of independent noisy runs are averaged and
the average is treated as a Gaussian state. Draw i always uses the generator
seeded with (seed, i) and the same standard-normal vector scaled by sigma,
so results are reproducible and E_N(sigma) is smooth enough to bisect.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from app.core.dynamics import evolve_final
from app.core.errors import InvalidArgument, InvalidScenario, NumericError
from app.core.gaussian_state import CovarianceMatrix, require_physical, symmetrize, vacuum_state
from app.core.measures import log_negativity
from app.core.models import BathParams, ModeUnits, NoiseSpec, ProtocolSpec, Segment
from app.core.protocol import build_schedule, predicted_squeezing
from app.workers.batch_worker import run_ordered

log = logging.getLogger("cvdyn.robustness")

# E_N (ebits) at or below which entanglement counts as destroyed.
DESTROYED_CUTOFF = 1e-6
BRACKET_RTOL = 0.05
BATCHES = 10
MAX_REDRAWS = 10_000
MAX_BRACKET_STEPS = 40


@dataclass(frozen=True)
class NoisePoint:
    sigma: float                    # rad/s
    covariance: CovarianceMatrix    # averaged final state
    log_negativity: float
    standard_error: float           # batch means; NaN with too few samples
    samples: int
    redraws: int                    # non-positive frequency draws replaced


@dataclass(frozen=True)
class ThresholdResult:
    sigma_star: float               # rad/s
    lower: float
    upper: float
    estimate: float                 # (4 omega_1 / pi) e^{-2r}
    noiseless_log_negativity: float
    samples: int
    evaluations: int
    cutoff: float


def draw_generator(seed: int, draw_index: int) -> np.random.Generator:
    return np.random.default_rng([seed, draw_index])


def sample_noisy_schedule(schedule: Sequence[Segment], noise: NoiseSpec,
                          draw_index: int) -> tuple[list[Segment], int]:
    """(perturbed schedule, redraw count) for draw `draw_index`.

    Each segment and each mode gets its own draw. Durations stay nominal
    unless noise.perturb_durations is set, in which case each segment keeps
    the phase it would have had, tau' = tau omega_nominal / omega.
    """
    if noise.sigma == 0:
        return list(schedule), 0
    rng = draw_generator(noise.seed, draw_index)
    out: list[Segment] = []
    redraws = 0
    for segment in schedule:
        nominal = np.asarray(segment.params.frequencies, dtype=float)
        omega = nominal + noise.sigma * rng.standard_normal(nominal.shape)
        bad = omega <= 0
        while np.any(bad):
            redraws += int(bad.sum())
            if redraws > MAX_REDRAWS:
                raise InvalidArgument(
                    f"sigma {noise.sigma:.6g} rad/s keeps drawing non-positive frequencies"
                )
            omega[bad] = nominal[bad] + noise.sigma * rng.standard_normal(int(bad.sum()))
            bad = omega <= 0
        duration = segment.duration
        if noise.perturb_durations:
            duration = segment.duration * float(np.mean(nominal / omega))
        out.append(Segment(segment.params.with_frequencies(omega), duration, segment.label))
    return out, redraws


def _batch_standard_error(finals: np.ndarray, batches: int) -> float:
    batches = min(batches, len(finals) // 2)
    if batches < 2:
        return math.nan
    values = [log_negativity(symmetrize(chunk.mean(axis=0)))
              for chunk in np.array_split(finals, batches)]
    return float(np.std(values, ddof=1) / math.sqrt(batches))


def noise_average(spec: ProtocolSpec, coupling: float, mass: float, bath: BathParams,
                  noise: NoiseSpec, units: Optional[ModeUnits] = None,
                  initial: Optional[CovarianceMatrix] = None, threads: int = 0,
                  local_shift: float = 0.0,
                  cancel_check: Optional[Callable[[], bool]] = None) -> NoisePoint:
    """Average the final state over noise.samples noisy runs of the protocol."""
    units = units or ModeUnits(mass, spec.omega_1)
    V0 = vacuum_state(2) if initial is None else np.asarray(initial, dtype=float)
    require_physical(V0, "initial state")
    schedule = build_schedule(spec, coupling, mass, V0.shape[0] // 2, local_shift)

    if noise.sigma == 0:
        V = evolve_final(V0, schedule, bath, units)
        return NoisePoint(0.0, V, log_negativity(V), 0.0, 1, 0)

    def one_draw(index: int):
        noisy, redraws = sample_noisy_schedule(schedule, noise, index)
        return evolve_final(V0, noisy, bath, units, check=False), redraws

    results = run_ordered(one_draw, range(noise.samples), threads, cancel_check=cancel_check)
    finals = np.asarray([r[0] for r in results])
    redraws = sum(r[1] for r in results)
    if not np.all(np.isfinite(finals)):
        raise NumericError(f"a noisy run overflowed at sigma = {noise.sigma:.6g} rad/s")
    if redraws:
        log.warning("sigma=%.6g: %d non-positive frequency draws were redrawn", noise.sigma, redraws)
    V = symmetrize(finals.mean(axis=0))
    point = NoisePoint(noise.sigma, V, log_negativity(V),
                       _batch_standard_error(finals, BATCHES), noise.samples, redraws)
    log.debug("sigma=%.6g E_N=%.6g +- %.2g", point.sigma, point.log_negativity, point.standard_error)
    return point


def averaged_covariance(spec: ProtocolSpec, coupling: float, mass: float, bath: BathParams,
                        noise: NoiseSpec, **kwargs) -> CovarianceMatrix:
    return noise_average(spec, coupling, mass, bath, noise, **kwargs).covariance


def noise_scan(spec: ProtocolSpec, coupling: float, mass: float, bath: BathParams,
               noise_base: NoiseSpec, sigmas: Sequence[float], **kwargs) -> list[NoisePoint]:
    """One NoisePoint per sigma, in grid order."""
    if any(s < 0 for s in sigmas):
        raise InvalidArgument("sigma grid values must be >= 0")
    return [noise_average(spec, coupling, mass, bath, noise_base.with_sigma(float(s)), **kwargs)
            for s in sigmas]


def sigma_star_estimate(spec: ProtocolSpec) -> float:
    """(4 omega_1 / pi) e^{-2r} with r = N |ln(omega_1/omega_2)|."""
    r = abs(predicted_squeezing(spec))
    return 4.0 * spec.omega_1 / math.pi * math.exp(-2.0 * r)


def threshold_sigma_star(spec: ProtocolSpec, coupling: float, mass: float, bath: BathParams,
                         noise_base: NoiseSpec, cutoff: float = DESTROYED_CUTOFF,
                         rtol: float = BRACKET_RTOL, **kwargs) -> ThresholdResult:
    """Largest sigma whose averaged state keeps E_N above `cutoff`.

    Starts from the analytic estimate, widens by 4x until entanglement is
    gone, then bisects until the bracket is within rtol of its upper end.
    """
    noiseless = noise_average(spec, coupling, mass, bath, noise_base.with_sigma(0.0), **kwargs)
    if noiseless.log_negativity <= cutoff:
        raise InvalidScenario(
            f"noiseless protocol reaches E_N = {noiseless.log_negativity:.3g}, "
            f"not above the cutoff {cutoff:g}"
        )
    evaluations = 0

    def entangled(sigma: float) -> bool:
        nonlocal evaluations
        evaluations += 1
        point = noise_average(spec, coupling, mass, bath, noise_base.with_sigma(sigma), **kwargs)
        return point.log_negativity > cutoff

    estimate = sigma_star_estimate(spec)
    lo, hi = 0.0, estimate
    steps = 0
    while entangled(hi):
        lo, hi = hi, 4.0 * hi
        steps += 1
        if steps > MAX_BRACKET_STEPS:
            raise NumericError(f"no sigma up to {hi:.3g} rad/s destroys the entanglement")
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if entangled(mid):
            lo = mid
        else:
            hi = mid
    sigma_star = 0.5 * (lo + hi)
    log.info("sigma* = %.4g rad/s (estimate %.4g, N=%d, %d evaluations of %d samples)",
             sigma_star, estimate, spec.cycles, evaluations, noise_base.samples)
    return ThresholdResult(sigma_star, lo, hi, estimate, noiseless.log_negativity,
                           noise_base.samples, evaluations, cutoff)
