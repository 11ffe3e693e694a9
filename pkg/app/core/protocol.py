"""Frequency-jump schedules.

A squeezing cycle is a sudden drop to omega_2 for a quarter of its period
followed by a return to omega_1 for a quarter of its period. The reversal
waits half a period at omega_1 and then replays each cycle backwards in
time, [omega_1 quarter, omega_2 quarter], which undoes the squeezing.
"""
import logging
import math

from app.core.errors import InvalidArgument
from app.core.models import HamiltonianParams, ProtocolSpec, Segment

log = logging.getLogger("cvdyn.protocol")

FLIP_MIN_RATIO = 20.0


def _segment(omegas: tuple[float, ...], duration: float, mass: float,
             coupling: float, local_shift: float, label: str) -> Segment:
    params = HamiltonianParams(omegas, mass, coupling, local_shift)
    return Segment(params, duration, label)


def build_forward(spec: ProtocolSpec, coupling: float, mass: float,
                  modes: int = 2, local_shift: float = 0.0) -> list[Segment]:
    low = _segment((spec.omega_2,) * modes, spec.tau_2, mass, coupling, local_shift, "forward-omega2")
    high = _segment((spec.omega_1,) * modes, spec.tau_1, mass, coupling, local_shift, "forward-omega1")
    return [low, high] * spec.cycles


def _reverse_tail(spec: ProtocolSpec, coupling: float, mass: float,
                  modes: int, local_shift: float) -> list[Segment]:
    high = _segment((spec.omega_1,) * modes, spec.tau_1, mass, coupling, local_shift, "reverse-omega1")
    low = _segment((spec.omega_2,) * modes, spec.tau_2, mass, coupling, local_shift, "reverse-omega2")
    return [high, low] * spec.cycles


def _hold(spec: ProtocolSpec, coupling: float, mass: float,
          modes: int, local_shift: float) -> list[Segment]:
    if spec.hold_after <= 0:
        return []
    return [_segment((spec.omega_1,) * modes, spec.hold_after, mass, coupling, local_shift, "hold")]


def build_full(spec: ProtocolSpec, coupling: float, mass: float,
               modes: int = 2, local_shift: float = 0.0) -> list[Segment]:
    """Forward cycles, the half-period wait, the time-reversed cycles, then the hold."""
    if not spec.reverse:
        raise InvalidArgument("build_full needs a protocol with reverse enabled")
    schedule = build_forward(spec, coupling, mass, modes, local_shift)
    if spec.wait > 0:
        schedule.append(_segment((spec.omega_1,) * modes, spec.wait, mass, coupling, local_shift, "wait"))
    schedule += _reverse_tail(spec, coupling, mass, modes, local_shift)
    schedule += _hold(spec, coupling, mass, modes, local_shift)
    log.debug("Built full protocol: %d cycles each way, %d segments", spec.cycles, len(schedule))
    return schedule


def build_schedule(spec: ProtocolSpec, coupling: float, mass: float,
                   modes: int = 2, local_shift: float = 0.0) -> list[Segment]:
    """Full protocol when spec.reverse is set, otherwise forward cycles plus hold."""
    if spec.reverse:
        return build_full(spec, coupling, mass, modes, local_shift)
    return (build_forward(spec, coupling, mass, modes, local_shift)
            + _hold(spec, coupling, mass, modes, local_shift))


def build_flip_schedule(omega: float, omega_flip: float, total: float, mass: float,
                        coupling: float = 0.0, modes: int = 2, target_mode: int = 1,
                        strict: bool = True, min_ratio: float = FLIP_MIN_RATIO) -> list[Segment]:
    """Half periods at omega interleaved with pi rotations of one mode at omega_flip.

    Each flip maps the target mode's quadratures to their negatives, which
    cancels the counter-rotating part of the coupling on average.
    """
    if omega <= 0 or omega_flip <= 0 or total <= 0:
        raise InvalidArgument("flip schedule needs positive frequencies and duration")
    if not 0 <= target_mode < modes:
        raise InvalidArgument(f"target mode {target_mode} out of range for {modes} modes")
    if omega_flip < min_ratio * omega:
        message = f"flip frequency {omega_flip:.6g} is below {min_ratio:g} x {omega:.6g}"
        if strict:
            raise InvalidArgument(message)
        log.warning("%s; flips are no longer short against the trap period", message)

    free = (omega,) * modes
    flipped = tuple(omega_flip if i == target_mode else omega for i in range(modes))
    half_period = math.pi / omega
    flip_time = math.pi / omega_flip
    schedule: list[Segment] = []
    elapsed = 0.0
    while total - elapsed > 1e-12 * total:
        duration = min(half_period, total - elapsed)
        schedule.append(_segment(free, duration, mass, coupling, 0.0, "free"))
        elapsed += duration
        if total - elapsed <= 1e-12 * total:
            break
        duration = min(flip_time, total - elapsed)
        schedule.append(_segment(flipped, duration, mass, coupling, 0.0, "flip"))
        elapsed += duration
    return schedule


def predicted_squeezing(spec: ProtocolSpec) -> float:
    """r_N = N ln(omega_1/omega_2); the x variance after N cycles is e^{-2 r_N}/2."""
    return spec.cycles * math.log(spec.omega_1 / spec.omega_2)


def squeeze_operator_parameter(spec: ProtocolSpec) -> float:
    """xi_N = N ln sqrt(omega_2/omega_1) = -r_N / 2 (squeeze-operator convention)."""
    return spec.cycles * 0.5 * math.log(spec.omega_2 / spec.omega_1)


def forward_duration(spec: ProtocolSpec) -> float:
    return spec.cycles * (spec.tau_1 + spec.tau_2)


def schedule_duration(schedule: list[Segment]) -> float:
    return math.fsum(s.duration for s in schedule)
