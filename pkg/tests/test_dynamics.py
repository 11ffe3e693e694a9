import math
import unittest

import numpy as np

from app.core.dynamics import (
    bath_covariance, drift_matrix, evolve_final, evolve_schedule, evolve_segment, long_time_limit,
    matrix_exponential, propagate, stationary_covariance, transition,
)
from app.core.errors import InvalidArgument, InvalidState, NumericError
from app.core.gaussian_state import squeezed_vacuum, thermal_state, vacuum_state
from app.core.measures import log_negativity
from app.core.models import BathParams, HamiltonianParams, ModeUnits, Segment

MASS = 1e-15
OMEGA = 2.0 * math.pi * 100.0
UNITS = ModeUnits(MASS, OMEGA)
PERIOD = 2.0 * math.pi / OMEGA


def _params(freqs=(OMEGA, OMEGA), g=0.0):
    return HamiltonianParams(tuple(freqs), MASS, g * MASS * OMEGA ** 2)


class DriftTests(unittest.TestCase):
    def test_layout(self):
        K = drift_matrix(_params((OMEGA, 2.0 * OMEGA), 0.01), UNITS)
        np.testing.assert_array_equal(np.eye(2), K[:2, 2:])
        np.testing.assert_allclose([[-1.0, -0.01], [-0.01, -4.0]], K[2:, :2])
        np.testing.assert_array_equal(np.zeros((2, 2)), K[:2, :2])

    def test_normal_mode_splitting(self):
        coupling = 0.05 * MASS * OMEGA ** 2
        params = HamiltonianParams((OMEGA, OMEGA), MASS, coupling)
        rates = np.sort(np.abs(np.linalg.eigvals(drift_matrix(params, UNITS)).imag))[::2] * OMEGA
        expected = sorted(math.sqrt(OMEGA ** 2 + sign * coupling / MASS) for sign in (-1.0, 1.0))
        np.testing.assert_allclose(expected, rates, rtol=1e-9)

    def test_matrix_exponential_rejects_non_finite(self):
        with self.assertRaises(InvalidArgument):
            matrix_exponential(np.array([[np.nan]]))
        with self.assertRaises(NumericError):
            matrix_exponential(np.array([[1000.0]]), 10.0)


class ClosedFormTests(unittest.TestCase):
    """Exact propagation of the covariance equation."""

    def test_free_oscillator_returns_after_one_period(self):
        V0 = squeezed_vacuum(0.8)
        params = HamiltonianParams((OMEGA,), MASS)
        V = evolve_segment(V0, Segment(params, PERIOD), BathParams(), UNITS)
        np.testing.assert_allclose(V0, V, atol=1e-12)

    def test_quarter_period_swaps_quadratures(self):
        V0 = squeezed_vacuum(0.5)
        params = HamiltonianParams((OMEGA,), MASS)
        V = evolve_segment(V0, Segment(params, PERIOD / 4.0), BathParams(), UNITS)
        self.assertAlmostEqual(V0[1, 1], V[0, 0])
        self.assertAlmostEqual(V0[0, 0], V[1, 1])

    def test_thermal_state_is_stationary(self):
        bath = BathParams(gamma=0.01 * OMEGA, n_bar=4.0)
        V0 = thermal_state(2, 4.0)
        V = evolve_segment(V0, Segment(_params(), 3.3 * PERIOD), bath, UNITS)
        np.testing.assert_allclose(V0, V, atol=1e-10)

    def test_relaxation_towards_the_bath(self):
        gamma = 0.05 * OMEGA
        bath = BathParams(gamma=gamma, n_bar=10.0)
        V0 = vacuum_state(1)
        params = HamiltonianParams((OMEGA,), MASS)
        t = 7.0 * PERIOD
        V = evolve_segment(V0, Segment(params, t), bath, UNITS)
        # Trace relaxes exponentially: tr V(t) = tr V_inf + (tr V0 - tr V_inf) e^{-gamma t}.
        expected = 21.0 + (1.0 - 21.0) * math.exp(-gamma * t)
        self.assertAlmostEqual(expected, np.trace(V), places=9)

    def test_transition_without_dissipation_has_no_noise(self):
        phi, noise = transition(drift_matrix(_params(), UNITS), 0.0, vacuum_state(2), 1.0)
        self.assertEqual(0.0, float(np.max(np.abs(noise))))
        self.assertAlmostEqual(1.0, np.linalg.det(phi))

    def test_quarter_period_map_has_exact_zeros(self):
        drift = drift_matrix(_params((0.3 * OMEGA, 0.3 * OMEGA)), UNITS)
        tau = UNITS.to_internal_time(math.pi / (2.0 * 0.3 * OMEGA))
        phi, _ = transition(drift, 0.0, vacuum_state(2), tau)
        self.assertEqual(0.0, phi[0, 0])
        self.assertEqual(0.0, phi[2, 2])
        self.assertAlmostEqual(1.0 / 0.3, phi[0, 2], places=12)
        self.assertAlmostEqual(-0.3, phi[2, 0], places=12)

    def test_uncoupled_flow_matches_the_exponential(self):
        drift = drift_matrix(_params((0.7 * OMEGA, 1.3 * OMEGA)), UNITS)
        phi, _ = transition(drift, 0.0, vacuum_state(2), 2.345)
        np.testing.assert_allclose(matrix_exponential(drift, 2.345), phi, atol=1e-12)

    def test_zero_duration_is_identity(self):
        V0 = squeezed_vacuum(0.3)
        V = propagate(V0, np.zeros((2, 2)), 0.0, vacuum_state(1), 0.0)
        np.testing.assert_array_equal(V0, V)
        with self.assertRaises(InvalidArgument):
            propagate(V0, np.zeros((2, 2)), 0.0, vacuum_state(1), -1.0)

    def test_unphysical_initial_state_rejected(self):
        with self.assertRaises(InvalidState):
            evolve_segment(0.1 * np.eye(4), Segment(_params(), PERIOD), BathParams(), UNITS)


class StationaryTests(unittest.TestCase):
    def test_uncoupled_stationary_state_is_the_bath(self):
        bath = BathParams(gamma=0.1 * OMEGA, n_bar=2.0)
        V = long_time_limit(_params(), bath, UNITS)
        np.testing.assert_allclose(thermal_state(2, 2.0), V, atol=1e-10)

    def test_matches_long_propagation(self):
        params = _params((OMEGA, 1.3 * OMEGA), 0.05)
        bath = BathParams(gamma=0.2 * OMEGA, n_bar=1.0)
        V_inf = stationary_covariance(drift_matrix(params, UNITS), 0.2,
                                      bath_covariance(params, bath, UNITS))
        V = evolve_final(vacuum_state(2), [Segment(params, 200.0 * PERIOD)], bath, UNITS)
        np.testing.assert_allclose(V_inf, V, atol=1e-9)

    def test_no_limit_without_dissipation(self):
        self.assertIsNone(long_time_limit(_params(), BathParams(), UNITS))
        with self.assertRaises(InvalidArgument):
            stationary_covariance(np.zeros((2, 2)), 0.0, vacuum_state(1))

    def test_frozen_bath_uses_reference_frequency(self):
        params = _params((2.0 * OMEGA, 2.0 * OMEGA))
        frozen = bath_covariance(params, BathParams(0.1, 1.0, rethermalize=False), UNITS)
        following = bath_covariance(params, BathParams(0.1, 1.0), UNITS)
        np.testing.assert_allclose(thermal_state(2, 1.0), frozen)
        self.assertAlmostEqual(0.75, following[0, 0])


class ScheduleTests(unittest.TestCase):
    """Sampling across piecewise-constant segments."""

    def test_samples_include_every_boundary(self):
        schedule = [Segment(_params(), 0.0025), Segment(_params((0.5 * OMEGA,) * 2), 0.005)]
        traj = evolve_schedule(vacuum_state(2), schedule, BathParams(), UNITS, 0.001)
        self.assertIn(0.0025, list(traj.times))
        self.assertAlmostEqual(0.0075, traj.times[-1])
        self.assertTrue(np.all(np.diff(traj.times) > 0))
        self.assertEqual(-1, traj.segment_index[0])
        self.assertEqual(1, traj.segment_index[-1])
        np.testing.assert_allclose([0.5 * OMEGA] * 2, traj.frequencies[-1])

    def test_final_state_matches_boundary_propagation(self):
        schedule = [Segment(_params(g=0.01), 0.0031),
                    Segment(_params((0.7 * OMEGA,) * 2, 0.01), 0.0042)]
        bath = BathParams(gamma=0.01 * OMEGA, n_bar=3.0)
        traj = evolve_schedule(vacuum_state(2), schedule, bath, UNITS, 0.0005)
        np.testing.assert_allclose(evolve_final(vacuum_state(2), schedule, bath, UNITS),
                                   traj.final_state, atol=1e-12)

    def test_frame_states_share_entanglement(self):
        schedule = [Segment(_params(g=0.01), 0.01)]
        traj = evolve_schedule(vacuum_state(2), schedule, BathParams(), UNITS, 0.0007)
        for lab, frame in zip(traj.states, traj.frame_states):
            self.assertAlmostEqual(log_negativity(lab), log_negativity(frame), places=9)

    def test_zero_length_segments_are_skipped(self):
        schedule = [Segment(_params(), 0.0), Segment(_params(), 0.002)]
        traj = evolve_schedule(vacuum_state(2), schedule, BathParams(), UNITS, 0.001)
        self.assertEqual(3, len(traj))

    def test_bad_arguments(self):
        with self.assertRaises(InvalidArgument):
            evolve_schedule(vacuum_state(2), [], BathParams(), UNITS, 0.001)
        with self.assertRaises(InvalidArgument):
            evolve_schedule(vacuum_state(2), [Segment(_params(), 0.01)], BathParams(), UNITS, 0.0)
        with self.assertRaises(InvalidArgument):
            evolve_schedule(vacuum_state(1), [Segment(_params(), 0.01)], BathParams(), UNITS, 0.001)


if __name__ == "__main__":
    unittest.main()
