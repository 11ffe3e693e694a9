import math
import unittest

import numpy as np

from app.core.constants import HBAR
from app.core.dynamics import evolve_schedule
from app.core.errors import InvalidArgument, InvalidState
from app.core.gaussian_state import squeezed_vacuum, thermal_state, two_mode_squeezed_vacuum, vacuum_state
from app.core.measures import (
    OBSERVABLE_COLUMNS, beat_period, effective_squeezing, interaction_components, log_negativity,
    phonon_number, position_spread, position_variance, purity, trajectory_observables,
)
from app.core.models import BathParams, Bipartition, HamiltonianParams, ModeUnits, Segment

MASS = 1e-15
OMEGA = 2.0 * math.pi * 100.0
UNITS = ModeUnits(MASS, OMEGA)


class LogNegativityTests(unittest.TestCase):
    def test_product_states_give_exact_zero(self):
        self.assertEqual(0.0, log_negativity(vacuum_state(2)))
        self.assertEqual(0.0, log_negativity(thermal_state(2, 5.0)))

    def test_needs_two_modes(self):
        with self.assertRaises(InvalidArgument):
            log_negativity(vacuum_state(1))

    def test_explicit_bipartition_matches_default(self):
        V = two_mode_squeezed_vacuum(0.4)
        self.assertAlmostEqual(log_negativity(V), log_negativity(V, Bipartition((1,), (0,))))

    def test_thermal_noise_reduces_entanglement(self):
        V = np.asarray(two_mode_squeezed_vacuum(0.4))
        noisy = V + 0.2 * np.eye(4)
        self.assertLess(log_negativity(noisy), log_negativity(V))

    def test_unphysical_input_rejected(self):
        with self.assertRaises(InvalidState):
            log_negativity(0.1 * np.eye(4))


class PurityTests(unittest.TestCase):
    def test_pure_and_thermal(self):
        self.assertAlmostEqual(1.0, purity(vacuum_state(2)))
        self.assertAlmostEqual(1.0, purity(two_mode_squeezed_vacuum(1.0)))
        self.assertAlmostEqual(1.0 / 5.0, purity(thermal_state(1, 2.0)))

    def test_not_positive_definite_is_invalid_state(self):
        with self.assertRaises(InvalidState):
            purity(np.diag([1.0, -1.0]))


class SingleModeMeasureTests(unittest.TestCase):
    def test_phonons_of_thermal_state(self):
        self.assertAlmostEqual(3.0, phonon_number(thermal_state(2, 3.0), 0, UNITS, OMEGA))
        self.assertAlmostEqual(0.0, phonon_number(vacuum_state(2), 1, UNITS, OMEGA))

    def test_phonons_in_the_basis_of_another_frequency(self):
        V = thermal_state(1, 2.0, [2.0])
        self.assertAlmostEqual(2.0, phonon_number(V, 0, UNITS, 2.0 * OMEGA))
        # The ground state at 2 omega looks excited in the omega basis.
        ground = thermal_state(1, 0.0, [2.0])
        self.assertAlmostEqual(0.125, phonon_number(ground, 0, UNITS, OMEGA))

    def test_phonons_of_squeezed_vacuum(self):
        self.assertAlmostEqual(math.sinh(0.7) ** 2, phonon_number(squeezed_vacuum(0.7), 0, UNITS, OMEGA))

    def test_mode_index_checked(self):
        with self.assertRaises(InvalidArgument):
            phonon_number(vacuum_state(1), 1, UNITS, OMEGA)

    def test_effective_squeezing(self):
        self.assertAlmostEqual(0.7, effective_squeezing(squeezed_vacuum(0.7), 0))
        self.assertAlmostEqual(0.0, effective_squeezing(vacuum_state(1), 0))

    def test_position_variance_of_ground_state(self):
        expected = HBAR / (2.0 * MASS * OMEGA)
        self.assertAlmostEqual(1.0, position_variance(vacuum_state(1), 0, UNITS) / expected)
        self.assertAlmostEqual(math.sqrt(expected), position_spread(vacuum_state(1), 0, UNITS))


class UnitConversionTests(unittest.TestCase):
    """Internal quadratures against SI positions and momenta."""

    def test_zero_point_scales(self):
        self.assertAlmostEqual(1.0, UNITS.x0 * UNITS.p0 / (HBAR / 2.0))

    def test_vacuum_in_si(self):
        V_si = UNITS.covariance_to_si(vacuum_state(2))
        expected = [HBAR / (2.0 * MASS * OMEGA)] * 2 + [HBAR * MASS * OMEGA / 2.0] * 2
        np.testing.assert_allclose(expected, np.diag(V_si), rtol=1e-12)
        self.assertEqual(0.0, V_si[0, 2])

    def test_round_trip(self):
        V = two_mode_squeezed_vacuum(0.4)
        np.testing.assert_allclose(V, UNITS.covariance_from_si(UNITS.covariance_to_si(V)), rtol=1e-14)

    def test_trajectory_momentum_variance(self):
        params = HamiltonianParams((OMEGA, OMEGA), MASS)
        traj = evolve_schedule(vacuum_state(2), [Segment(params, 0.002)], BathParams(), UNITS, 1e-3)
        obs = trajectory_observables(traj, UNITS)
        self.assertAlmostEqual(1.0, obs["var_p1"][0] / (HBAR * MASS * OMEGA / 2.0))
        self.assertAlmostEqual(0.0, obs["cov_x1x2"][0])


class InteractionTests(unittest.TestCase):
    def test_components_are_equal(self):
        coupling = -3e-9
        g_bs, g_tms = interaction_components(coupling, UNITS)
        self.assertEqual(g_bs, g_tms)
        self.assertAlmostEqual(1.0, g_bs / (coupling / (2.0 * MASS * OMEGA)))

    def test_beat_period(self):
        self.assertEqual(math.inf, beat_period(0.0, UNITS))
        g, _ = interaction_components(1e-9, UNITS)
        self.assertAlmostEqual(2.0 * math.pi / g, beat_period(1e-9, UNITS))


class TrajectoryObservableTests(unittest.TestCase):
    """Observables for the trajectory CSV."""

    def test_two_mode_columns(self):
        params = HamiltonianParams((OMEGA, OMEGA), MASS, 1e-3 * MASS * OMEGA ** 2)
        traj = evolve_schedule(vacuum_state(2), [Segment(params, 0.01)], BathParams(), UNITS, 1e-3)
        obs = trajectory_observables(traj, UNITS)
        self.assertEqual(set(OBSERVABLE_COLUMNS), set(obs))
        self.assertEqual(11, len(obs["t_s"]))
        self.assertEqual(0.0, obs["E_N"][0])
        self.assertGreater(np.max(obs["E_N"]), 0.0)
        np.testing.assert_allclose(1.0, obs["purity"], rtol=1e-9)
        self.assertAlmostEqual(1.0, obs["var_x1"][0] / (HBAR / (2.0 * MASS * OMEGA)))

    def test_single_mode_columns_are_nan(self):
        params = HamiltonianParams((OMEGA,), MASS)
        traj = evolve_schedule(vacuum_state(1), [Segment(params, 0.005)], BathParams(), UNITS, 1e-3)
        obs = trajectory_observables(traj, UNITS)
        self.assertTrue(np.all(np.isnan(obs["E_N"])))
        self.assertTrue(np.all(np.isnan(obs["var_x2"])))
        self.assertFalse(np.any(np.isnan(obs["var_x1"])))


if __name__ == "__main__":
    unittest.main()
