"""End-to-end figures for the bundled scenarios."""
import math
import unittest

from app.core.commands import run_simulation, sweep_point
from app.core.dynamics import evolve_final
from app.core.gaussian_state import vacuum_state
from app.core.measures import log_negativity
from app.core.models import BathParams, ModeUnits, ProtocolSpec
from app.core.protocol import build_forward, build_full, forward_duration, schedule_duration
from app.core.scenario import load_preset

MASS = 1e-15
OMEGA = 2.0 * math.pi * 100.0


def _final_log_negativity(scenario):
    V = evolve_final(scenario.initial_state(), scenario.schedule(), scenario.bath, scenario.units)
    return log_negativity(V)


class CasimirReversalTests(unittest.TestCase):
    """Reversal brings the heated, squeezed pair back near its ground state."""

    def test_reversal_removes_the_squeezing_phonons(self):
        scenario = load_preset("casimir-diamonds")
        row = sweep_point(scenario, scenario.protocol.ratio)
        pre, final = row[5], row[6]
        self.assertGreater(pre, 1e5)
        self.assertGreaterEqual(pre / final, 10.0)

    def test_preset_keeps_its_entanglement_through_the_reversal(self):
        scenario = load_preset("casimir-diamonds")
        pre = _final_log_negativity(scenario.with_protocol(reverse=False))
        final = _final_log_negativity(scenario)
        self.assertGreater(pre, 0.5)
        self.assertGreaterEqual(final, pre)

    def test_reversal_slows_the_decay(self):
        """At a common end time the reversed pair keeps its E_N, the squeezed one loses it."""
        scenario = load_preset("casimir-diamonds")
        end = 1.0
        full = schedule_duration(scenario.schedule())
        reversed_end = _final_log_negativity(scenario.with_protocol(hold_after=end - full))
        squeezed_end = _final_log_negativity(scenario.with_protocol(
            reverse=False, hold_after=end - forward_duration(scenario.protocol)))
        self.assertGreaterEqual(reversed_end, 0.9 * _final_log_negativity(scenario))
        self.assertLess(squeezed_end, 0.5 * reversed_end)

    def test_entanglement_retained_without_loss(self):
        coupling = -1e-8 * MASS * OMEGA ** 2 * math.log(2.0)
        spec = ProtocolSpec(OMEGA, 0.5 * OMEGA, 10)
        units = ModeUnits(MASS, OMEGA)
        pre = evolve_final(vacuum_state(2), build_forward(spec, coupling, MASS), BathParams(), units)
        final = evolve_final(vacuum_state(2), build_full(spec, coupling, MASS), BathParams(), units)
        self.assertGreater(log_negativity(pre), 0.0)
        self.assertGreaterEqual(log_negativity(final), log_negativity(pre))


class GravityPendulaTests(unittest.TestCase):
    def test_entanglement_at_ten_seconds(self):
        result = run_simulation(load_preset("gravity-pendula"))
        self.assertAlmostEqual(10.0, result.summary["duration_s"], places=9)
        self.assertGreaterEqual(result.summary["final_E_N"], 0.05)
        self.assertLessEqual(result.summary["final_E_N"], 5.0)


class CollapseBoundTests(unittest.TestCase):
    def test_twelve_cycles_spread_to_eighty_nanometres(self):
        result = run_simulation(load_preset("csl-single-particle"))
        sigma_max = result.summary["sigma_max_m"]
        self.assertAlmostEqual(78.4e-9, sigma_max, delta=2e-9)
        self.assertGreater(result.summary["csl_gamma_bound_hz"], 0.0)
        self.assertLess(result.summary["csl_gamma_bound_hz"], 1e-15)


if __name__ == "__main__":
    unittest.main()
