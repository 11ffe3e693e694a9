"""The five cvdyn commands.

Each command takes a validated Scenario (validate takes none), writes its
files into the output directory and returns the summary it wrote. The
run_* helpers do the work without touching the filesystem.
"""
import logging
import math
import os
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Optional

import numpy as np

from app.core import reports
from app.core.dynamics import evolve_final, evolve_schedule
from app.core.errors import ConfigError, ValidationFailure
from app.core.measures import (
    OBSERVABLE_COLUMNS, beat_period, effective_squeezing, interaction_components, log_negativity,
    phonon_number, trajectory_observables,
)
from app.core.models import BathParams, CslParams, NoiseSpec, Trajectory
from app.core.physics_models import (
    collision_rate, csl_bound, csl_coherence_time, csl_exposure_time, csl_rate_coefficient,
    equilibrium_displacement, peak_log_negativity,
)
from app.core.protocol import (
    build_forward, forward_duration, squeeze_operator_parameter, predicted_squeezing,
    schedule_duration,
)
from app.core.robustness import (
    NoisePoint, ThresholdResult, noise_average, noise_scan, sigma_star_estimate, threshold_sigma_star,
)
from app.core.scenario import Scenario
from app.core.validation import CheckResult, run_checks
from app.util import paths
from app.util.app_settings import AppSettings
from app.workers.batch_worker import run_ordered

log = logging.getLogger("cvdyn.commands")

SWEEP_COLUMNS = ("ratio", "omega_2", "predicted_squeezing", "E_N_pre_reversal", "E_N_final",
                 "n_phonon_pre_reversal", "n_phonon_final")
NOISE_COLUMNS = ("sigma", "E_N", "E_N_normalized", "standard_error", "samples", "redraws")
THRESHOLD_COLUMNS = ("cycles", "sigma_star", "bracket_low", "bracket_high", "estimate",
                     "sigma_star_over_estimate", "noiseless_E_N", "samples", "evaluations")


@dataclass
class RunContext:
    out_dir: str
    threads: int = 0
    seed: Optional[int] = None          # overrides [noise].seed
    samples: Optional[int] = None       # overrides [noise].samples
    echo: Callable[[str], None] = print

    def path(self, name: str) -> str:
        return os.path.join(paths.get_output_dir(self.out_dir), name)


@dataclass
class SimulationResult:
    trajectory: Trajectory
    observables: dict[str, np.ndarray]
    summary: dict[str, Any]


# ── simulate ──

def _csl_params(scenario: Scenario) -> CslParams:
    if scenario.radius is None:
        raise ConfigError("particle.radius: required for the collapse-model bound")
    csl = scenario.csl
    return CslParams(csl.collapse_rate, csl.localization_length, scenario.mass,
                     scenario.radius, csl.reference_mass)


def run_simulation(scenario: Scenario) -> SimulationResult:
    spec = scenario.protocol
    units = scenario.units
    schedule = scenario.schedule()
    trajectory = evolve_schedule(scenario.initial_state(), schedule, scenario.bath, units,
                                 scenario.sample_dt)
    obs = trajectory_observables(trajectory, units)
    trajectory.observables = obs

    mid = int(np.argmin(np.abs(trajectory.times - forward_duration(spec))))
    two_modes = scenario.count >= 2
    sigma_max = math.sqrt(float(np.max(obs["var_x1"])))
    summary: dict[str, Any] = {
        "scenario": scenario.name,
        "samples": len(trajectory),
        "duration_s": float(trajectory.times[-1]),
        "omega_1": spec.omega_1,
        "omega_2": spec.omega_2,
        "cycles": spec.cycles,
        "reverse": spec.reverse,
        "predicted_squeezing": predicted_squeezing(spec),
        "squeeze_parameter_xi": squeeze_operator_parameter(spec),
        "r_eff_mid_protocol": effective_squeezing(trajectory.states[mid], 0),
        "pre_reversal_time_s": float(trajectory.times[mid]),
        "final_purity": float(obs["purity"][-1]),
        "sigma_max_m": sigma_max,
    }
    if two_modes:
        en = obs["E_N"]
        peak = int(np.argmax(en))
        summary.update({
            "peak_E_N": float(en[peak]),
            "peak_time_s": float(trajectory.times[peak]),
            "pre_reversal_E_N": float(en[mid]),
            "final_E_N": float(en[-1]),
            "pre_reversal_phonons": [float(obs["n_phonon_1"][mid]), float(obs["n_phonon_2"][mid])],
            "final_phonons": [float(obs["n_phonon_1"][-1]), float(obs["n_phonon_2"][-1])],
            "coupling_N_per_m": scenario.coupling,
            "closed_form_peak_E_N": peak_log_negativity(scenario.coupling, scenario.mass, spec.omega_1),
            "beat_period_s": beat_period(scenario.coupling, units),
        })
    else:
        summary.update({
            "pre_reversal_phonons": [float(obs["n_phonon_1"][mid])],
            "final_phonons": [float(obs["n_phonon_1"][-1])],
        })
    if scenario.csl is not None:
        params = _csl_params(scenario)
        summary["csl_gamma_bound_hz"] = csl_bound(
            sigma_max, spec.omega_1, scenario.mass, params.radius, params.localization_length,
            params.reference_mass, scenario.csl.safety)
        summary["csl_coherence_time_s"] = csl_coherence_time(params, sigma_max)
    log.info("Simulated %r: %d samples over %.6g s", scenario.name, len(trajectory),
             summary["duration_s"])
    return SimulationResult(trajectory, obs, summary)


def cmd_simulate(scenario: Scenario, ctx: RunContext) -> dict[str, Any]:
    result = run_simulation(scenario)
    reports.write_columns(ctx.path(paths.TRAJECTORY_CSV), result.observables,
                          OBSERVABLE_COLUMNS, scenario.config_hash)
    reports.write_summary(ctx.path(paths.SUMMARY_JSON), "simulate", result.summary,
                          scenario.config_hash)
    s = result.summary
    if "final_E_N" in s:
        ctx.echo(f"peak E_N {s['peak_E_N']:.6g} at t = {s['peak_time_s']:.6g} s; "
                 f"pre-reversal {s['pre_reversal_E_N']:.6g}; final {s['final_E_N']:.6g}")
    ctx.echo(f"final phonons {', '.join(f'{n:.6g}' for n in s['final_phonons'])}; "
             f"final purity {s['final_purity']:.6g}")
    if "csl_gamma_bound_hz" in s:
        ctx.echo(f"sigma_max {s['sigma_max_m']:.4g} m; CSL bound {s['csl_gamma_bound_hz']:.4g} Hz")
    return s


# ── sweep ──

def sweep_point(scenario: Scenario, ratio: float) -> tuple:
    """One sweep row; pre-reversal values are taken at the end of the forward cycles."""
    point = scenario.with_ratio(ratio)
    spec = point.protocol
    units = point.units
    schedule = point.schedule()
    forward = build_forward(spec, point.coupling, point.mass, point.count, point.local_shift)
    V_pre = evolve_final(point.initial_state(), forward, point.bath, units)
    V_end = evolve_final(V_pre, schedule[len(forward):], point.bath, units)
    return (ratio, spec.omega_2, predicted_squeezing(spec), log_negativity(V_pre),
            log_negativity(V_end), phonon_number(V_pre, 0, units, spec.omega_1),
            phonon_number(V_end, 0, units, spec.omega_1))


def run_sweep(scenario: Scenario, threads: int = 0) -> list[tuple]:
    if scenario.sweep is None:
        raise ConfigError("sweep: block required for the sweep command")
    return run_ordered(lambda r: sweep_point(scenario, r), scenario.sweep.ratios, threads)


def cmd_sweep(scenario: Scenario, ctx: RunContext) -> dict[str, Any]:
    rows = run_sweep(scenario, ctx.threads)
    reports.write_csv(ctx.path(paths.SWEEP_CSV), SWEEP_COLUMNS, rows, scenario.config_hash)
    summary = {"scenario": scenario.name, "rows": [dict(zip(SWEEP_COLUMNS, row)) for row in rows]}
    reports.write_summary(ctx.path(paths.SUMMARY_JSON), "sweep", summary, scenario.config_hash)
    for row in rows:
        ctx.echo(f"ratio {row[0]:.4g}: E_N {row[4]:.6g}, phonons {row[5]:.6g} -> {row[6]:.6g}")
    return summary


# ── noise ──

def noise_base(scenario: Scenario, ctx: RunContext) -> NoiseSpec:
    if scenario.noise is None:
        raise ConfigError("noise: block required for the noise command")
    config = scenario.noise
    settings = AppSettings()
    return NoiseSpec(0.0, settings.samples(ctx.samples, config.samples),
                     settings.seed(ctx.seed, config.seed), config.perturb_durations)


def noise_bath(scenario: Scenario) -> BathParams:
    return scenario.bath if scenario.noise.include_bath else BathParams()


def _noise_kwargs(scenario: Scenario, ctx: RunContext) -> dict[str, Any]:
    return {"units": scenario.units, "initial": scenario.initial_state(),
            "threads": ctx.threads, "local_shift": scenario.local_shift}


def run_noise_grid(scenario: Scenario, ctx: RunContext) -> list[tuple]:
    base = noise_base(scenario, ctx)
    spec = scenario.protocol
    kwargs = _noise_kwargs(scenario, ctx)
    points = noise_scan(spec, scenario.coupling, scenario.mass, noise_bath(scenario), base,
                        scenario.noise.sigmas, **kwargs)
    baseline = next((p for p in points if p.sigma == 0), None)
    if baseline is None:
        baseline = noise_average(spec, scenario.coupling, scenario.mass, noise_bath(scenario),
                                 base, **kwargs)
    return [_noise_row(p, baseline) for p in points]


def _noise_row(point: NoisePoint, baseline: NoisePoint) -> tuple:
    ref = baseline.log_negativity
    normalized = point.log_negativity / ref if ref > 0 else math.nan
    return (point.sigma, point.log_negativity, normalized, point.standard_error,
            point.samples, point.redraws)


def threshold_cycles(scenario: Scenario) -> list[int]:
    cycles = [scenario.protocol.cycles]
    cycles += [n for n in scenario.noise.threshold_cycles if n not in cycles]
    return cycles


def run_thresholds(scenario: Scenario, ctx: RunContext) -> list[ThresholdResult]:
    base = noise_base(scenario, ctx)
    cycles = threshold_cycles(scenario)
    kwargs = _noise_kwargs(scenario, ctx)
    out = []
    for n in cycles:
        spec = scenario.with_cycles(n).protocol
        out.append(threshold_sigma_star(spec, scenario.coupling, scenario.mass, noise_bath(scenario),
                                        base, cutoff=scenario.noise.cutoff, **kwargs))
    return out


def _threshold_row(cycles: int, result: ThresholdResult) -> tuple:
    return (cycles, result.sigma_star, result.lower, result.upper, result.estimate,
            result.sigma_star / result.estimate, result.noiseless_log_negativity,
            result.samples, result.evaluations)


def cmd_noise(scenario: Scenario, ctx: RunContext) -> dict[str, Any]:
    rows = run_noise_grid(scenario, ctx)
    reports.write_csv(ctx.path(paths.NOISE_CSV), NOISE_COLUMNS, rows, scenario.config_hash)
    summary: dict[str, Any] = {
        "scenario": scenario.name,
        "estimate_sigma_star": sigma_star_estimate(scenario.protocol),
        "grid": [dict(zip(NOISE_COLUMNS, row)) for row in rows],
    }
    for row in rows:
        ctx.echo(f"sigma {row[0]:.4g} rad/s: E_N {row[1]:.6g} (normalized {row[2]:.4g})")
    if scenario.noise.find_threshold:
        results = run_thresholds(scenario, ctx)
        table = [_threshold_row(n, r) for n, r in zip(threshold_cycles(scenario), results)]
        reports.write_csv(ctx.path(paths.THRESHOLD_CSV), THRESHOLD_COLUMNS, table,
                          scenario.config_hash)
        summary["thresholds"] = [dict(zip(THRESHOLD_COLUMNS, row)) for row in table]
        for row in table:
            ctx.echo(f"N = {row[0]}: sigma* {row[1]:.4g} rad/s (estimate {row[4]:.4g})")
    reports.write_summary(ctx.path(paths.SUMMARY_JSON), "noise", summary, scenario.config_hash)
    return summary


# ── estimate ──

def _entry(value: float, unit: str, formula: str) -> dict[str, Any]:
    return {"value": value, "unit": unit, "formula": formula}


def run_estimate(scenario: Scenario) -> dict[str, dict[str, Any]]:
    """Closed-form figures for the scenario, each with its unit and formula."""
    if scenario.interaction is None and scenario.csl is None and scenario.gas is None:
        raise ConfigError("estimate: needs an [interaction], [csl] or [gas] block")
    spec = scenario.protocol
    units = scenario.units
    out: dict[str, dict[str, Any]] = {
        "mass": _entry(scenario.mass, "kg", "4/3 pi R^3 rho, or as configured"),
        "omega_1": _entry(spec.omega_1, "rad/s", _trap_formula(scenario)),
        "omega_2": _entry(spec.omega_2, "rad/s", "omega_1 * ratio, or sqrt((g + a_up)/L)"),
        "predicted_squeezing": _entry(predicted_squeezing(spec), "", "N ln(omega_1/omega_2)"),
        "protocol_duration": _entry(schedule_duration(scenario.schedule()), "s",
                                    "sum of segment durations"),
        "sigma_star_estimate": _entry(sigma_star_estimate(spec), "rad/s",
                                      "(4 omega_1/pi) exp(-2 r_N)"),
    }
    if scenario.pendulum is not None:
        out["pendulum_length"] = _entry(scenario.pendulum.length, "m", "g / omega_1^2")
    if scenario.interaction is not None:
        g_bs, g_tms = interaction_components(scenario.coupling, units)
        out.update({
            "coupling": _entry(scenario.coupling, "N/m", "-C n (n+1) / d0^(n+2)"),
            "local_shift": _entry(scenario.local_shift, "N/m", "C n (n+1) / d0^(n+2) when enabled"),
            "g_beam_splitter": _entry(g_bs, "rad/s", "lambda x0^2 / hbar"),
            "g_two_mode_squeezing": _entry(g_tms, "rad/s", "lambda x0^2 / hbar"),
            "beat_period": _entry(beat_period(scenario.coupling, units), "s", "2 pi / g_bs"),
            "peak_log_negativity": _entry(
                peak_log_negativity(scenario.coupling, scenario.mass, spec.omega_1), "ebit",
                "|lambda| / (m omega_1^2 ln 2)"),
            "equilibrium_displacement": _entry(
                equilibrium_displacement(scenario.interaction, scenario.mass, spec.omega_1), "m",
                "C n / (d0^(n+1) m omega_1^2)"),
        })
    if scenario.csl is not None:
        params = _csl_params(scenario)
        sigma_max = scenario.csl.sigma_max
        source = "configured"
        if sigma_max is None:
            sigma_max = run_simulation(scenario).summary["sigma_max_m"]
            source = "largest simulated position spread"
        out.update({
            "csl_sigma_max": _entry(sigma_max, "m", source),
            "csl_rate_coefficient": _entry(csl_rate_coefficient(params), "1/(m^2 s)",
                                           "(m/m0)^2 gamma / (4 a^2) f(R/a)"),
            "csl_exposure_time": _entry(csl_exposure_time(spec.omega_1), "s", "4/3 * pi/(2 omega_1)"),
            "csl_coherence_time": _entry(csl_coherence_time(params, sigma_max), "s",
                                         "1 / (Lambda sigma_max^2)"),
            "csl_gamma_bound": _entry(
                csl_bound(sigma_max, spec.omega_1, scenario.mass, params.radius,
                          params.localization_length, params.reference_mass, scenario.csl.safety),
                "Hz", "4 m0^2 a^2 / (safety tau m^2 sigma_max^2 f(R/a))"),
        })
    if scenario.gas is not None:
        rate = collision_rate(scenario.gas)
        out.update({
            "collision_rate": _entry(rate, "Hz", "pi v P R^2 / (k_B T), v = sqrt(3 k_B T / m_a)"),
            "collision_rate_per_pascal": _entry(rate / scenario.gas.pressure, "Hz/Pa", "rate / P"),
        })
    return out


def _trap_formula(scenario: Scenario) -> str:
    if scenario.magnetic is not None:
        return "sqrt(-chi / (mu_0 rho)) B'"
    if scenario.pendulum is not None:
        return "sqrt(g / L)"
    return "configured"


def cmd_estimate(scenario: Scenario, ctx: RunContext) -> dict[str, Any]:
    entries = run_estimate(scenario)
    reports.write_summary(ctx.path(paths.ESTIMATE_JSON), "estimate", entries, scenario.config_hash)
    for name, entry in entries.items():
        unit = f" {entry['unit']}" if entry["unit"] else ""
        ctx.echo(f"{name} = {entry['value']:.6g}{unit}  [{entry['formula']}]")
    return entries


# ── validate ──

def cmd_validate(ctx: RunContext, names=None, tolerances: Optional[Mapping[str, float]] = None) -> list[CheckResult]:
    results = run_checks(names, tolerances, ctx.threads)
    summary = {r.name: {"passed": r.passed, "value": r.value, "tolerance": r.tolerance,
                        "detail": r.detail} for r in results}
    reports.write_summary(ctx.path(paths.VALIDATION_JSON), "validate", summary, "")
    for r in results:
        ctx.echo(f"{'PASS' if r.passed else 'FAIL'}  {r.name}: {r.value:.3e} (tolerance {r.tolerance:.3e})")
    failed = [r.name for r in results if not r.passed]
    if failed:
        raise ValidationFailure(failed)
    return results
