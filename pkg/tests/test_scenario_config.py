import hashlib
import math
import os
import tempfile
import unittest

from app.core.errors import ConfigError
from app.core.models import InteractionKind, TrapKind
from app.core.physics_models import peak_log_negativity
from app.core.scenario import load_preset, load_scenario, load_scenario_bytes
from app.util import paths

MINIMAL = """
[particle]
mass = 1e-15

[trap]
frequency_hz = 100.0

[interaction]
type = "power-law"
strength = 1e-40
exponent = 3
separation = 1e-6

[protocol]
ratio = 0.5
cycles = 4
"""


def _load(text: str):
    return load_scenario_bytes(text.encode("utf-8"), "test.toml")


class PresetTests(unittest.TestCase):
    """Bundled scenarios load and carry the documented parameters."""

    def test_all_presets_listed(self):
        self.assertEqual(["casimir-diamonds", "csl-single-particle", "gravity-pendula"],
                         paths.preset_names())

    def test_casimir_diamonds(self):
        s = load_preset("casimir-diamonds")
        omega = 2.0 * math.pi * 100.0
        self.assertEqual(InteractionKind.CASIMIR, s.interaction_kind)
        self.assertAlmostEqual(1.0, s.mass / 2.2907e-16, places=3)
        self.assertLess(s.coupling, 0.0)
        self.assertAlmostEqual(1.0, peak_log_negativity(s.coupling, s.mass, omega) / 1e-6, places=9)
        self.assertAlmostEqual(0.5, s.protocol.ratio)
        self.assertEqual(10, s.protocol.cycles)
        self.assertAlmostEqual(omega / 1e9, s.bath.gamma)
        self.assertFalse(s.noise.include_bath)
        self.assertEqual((6, 8, 12), s.noise.threshold_cycles)
        self.assertEqual(11, len(s.sweep.ratios))
        self.assertEqual(0.0, s.local_shift)

    def test_gravity_pendula(self):
        s = load_preset("gravity-pendula")
        self.assertEqual(TrapKind.PENDULUM, s.trap)
        self.assertAlmostEqual(math.sqrt(2.1), s.protocol.ratio, places=6)
        self.assertAlmostEqual(8.176e-13, s.coupling, delta=0.002e-13)
        self.assertAlmostEqual(0.0513, s.pendulum.length, delta=1e-4)
        self.assertGreater(s.protocol.hold_after, 0.0)

    def test_csl_single_particle(self):
        s = load_preset("csl-single-particle")
        self.assertEqual(1, s.count)
        self.assertIsNone(s.interaction)
        self.assertEqual(80e-9, s.csl.sigma_max)
        self.assertEqual(1e-10, s.gas.pressure)
        self.assertEqual((2, 2), s.initial_state().shape)

    def test_unknown_preset(self):
        with self.assertRaises(ConfigError) as ctx:
            load_preset("no-such-preset")
        self.assertIn("casimir-diamonds", str(ctx.exception))


class ParseTests(unittest.TestCase):
    def test_minimal_file_defaults(self):
        s = _load(MINIMAL)
        self.assertEqual("unnamed", s.name)
        self.assertEqual(2, s.count)
        self.assertTrue(s.protocol.reverse)
        self.assertEqual(0.0, s.bath.gamma)
        self.assertEqual(math.inf, s.quality)
        self.assertAlmostEqual(s.protocol.tau_1 / 25.0, s.sample_dt)
        self.assertAlmostEqual(1.0, s.coupling / -1.2e-9)

    def test_hash_is_sha256_of_the_bytes(self):
        s = _load(MINIMAL)
        self.assertEqual(hashlib.sha256(MINIMAL.encode("utf-8")).hexdigest(), s.config_hash)

    def test_local_shift_opt_in(self):
        s = _load(MINIMAL.replace("separation = 1e-6", "separation = 1e-6\nlocal_shift = true"))
        self.assertEqual(-s.coupling, s.local_shift)

    def test_end_time_sets_the_hold(self):
        s = _load(MINIMAL + "end_time = 1.0\n")
        self.assertAlmostEqual(1.0, sum(seg.duration for seg in s.schedule()), places=12)

    def test_bath_without_quality_is_lossless(self):
        s = _load(MINIMAL + "[bath]\nn_bar = 5.0\n")
        self.assertEqual(math.inf, s.quality)
        self.assertEqual(0.0, s.bath.gamma)
        self.assertEqual(5.0, s.bath.n_bar)
        explicit = _load(MINIMAL + "[bath]\nquality = inf\n")
        self.assertEqual(0.0, explicit.bath.gamma)

    def test_gamma_instead_of_quality(self):
        s = _load(MINIMAL + "[bath]\ngamma = 0.5\nn_bar = 2.0\n")
        self.assertEqual(0.5, s.bath.gamma)
        self.assertAlmostEqual(2.0 * math.pi * 100.0 / 0.5, s.quality)

    def test_magnetic_trap_frequency(self):
        text = MINIMAL.replace("mass = 1e-15", "radius = 250e-9\ndensity = 3500.0").replace(
            "frequency_hz = 100.0", 'type = "magnetic"\nsusceptibility = -2.1e-5\ngradient = 1e4')
        self.assertAlmostEqual(690.99, _load(text).protocol.omega_1, delta=0.05)

    def test_with_ratio_and_cycles(self):
        s = _load(MINIMAL)
        self.assertAlmostEqual(2.0 * s.protocol.omega_1, s.with_ratio(2.0).protocol.omega_2)
        self.assertEqual(7, s.with_cycles(7).protocol.cycles)
        self.assertEqual(4, s.protocol.cycles)


class ConfigErrorTests(unittest.TestCase):
    """Every schema error names the offending field."""

    def assertConfigError(self, text, prefix):
        with self.assertRaises(ConfigError) as ctx:
            _load(text)
        self.assertTrue(str(ctx.exception).startswith(prefix), str(ctx.exception))

    def test_unknown_key(self):
        self.assertConfigError(MINIMAL.replace("cycles = 4", "cycles = 4\ncycels = 5"),
                               "protocol.cycels: unknown key")

    def test_unknown_block(self):
        self.assertConfigError(MINIMAL + "[plot]\ncolour = 1\n", "plot: unknown block")

    def test_missing_trap_frequency(self):
        self.assertConfigError(MINIMAL.replace("frequency_hz = 100.0", ""), "trap.omega_1")

    def test_wrong_types(self):
        self.assertConfigError(MINIMAL.replace("cycles = 4", "cycles = 4.5"), "protocol.cycles")
        self.assertConfigError(MINIMAL.replace("cycles = 4", 'cycles = "four"'), "protocol.cycles")
        self.assertConfigError(MINIMAL.replace("mass = 1e-15", "mass = -1.0"), "particle.mass")

    def test_exclusive_keys(self):
        self.assertConfigError(MINIMAL.replace("ratio = 0.5", "ratio = 0.5\nomega_2 = 300.0"),
                               "protocol: give only one of")

    def test_too_many_particles(self):
        self.assertConfigError(MINIMAL.replace("mass = 1e-15", "mass = 1e-15\ncount = 3"),
                               "particle.count")

    def test_interaction_needs_two_particles(self):
        self.assertConfigError(MINIMAL.replace("mass = 1e-15", "mass = 1e-15\ncount = 1"),
                               "interaction.type")

    def test_noise_needs_two_particles(self):
        text = MINIMAL.split("[interaction]")[0].replace("mass = 1e-15", "mass = 1e-15\ncount = 1")
        self.assertConfigError(text + "[noise]\nsamples = 10\n", "noise:")

    def test_end_time_before_protocol_ends(self):
        self.assertConfigError(MINIMAL + "end_time = 0.001\n", "protocol.end_time")

    def test_threshold_cycles_must_be_integers(self):
        self.assertConfigError(MINIMAL + "[noise]\nthreshold_cycles = [6, 7.5]\n",
                               "noise.threshold_cycles[1]")

    def test_magnetic_trap_needs_a_diamagnet(self):
        text = MINIMAL.replace("mass = 1e-15", "radius = 250e-9\ndensity = 3500.0").replace(
            "frequency_hz = 100.0", 'type = "magnetic"\nsusceptibility = 1e-5\ngradient = 1e4')
        self.assertConfigError(text, "trap:")

    def test_bad_enum(self):
        self.assertConfigError(MINIMAL.replace('type = "power-law"', 'type = "magic"'),
                               "interaction.type")

    def test_toml_syntax_error_keeps_the_line(self):
        with self.assertRaises(ConfigError) as ctx:
            _load("[particle\nmass = 1\n")
        self.assertIn("line 1", str(ctx.exception))
        self.assertTrue(str(ctx.exception).startswith("test.toml"))

    def test_missing_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(ConfigError):
                load_scenario(os.path.join(tmp, "absent.toml"))


if __name__ == "__main__":
    unittest.main()
