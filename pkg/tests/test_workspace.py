import math
import os
import tempfile
import unittest

from src.errors import DomainError
from src.workspace import Workspace, read_config, sim_config_from_file, sweep_config_from_file


class ConfigFileTest(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, text, name="config.ini"):
        path = os.path.join(self.tmp.name, name)
        with open(path, "w") as file:
            file.write(text)
        return path


class TestSimConfig(ConfigFileTest):
    def test_flat_file(self):
        path = self.write(
            "nu = 1e-3\nT = 0.5\nN = 64\nbox_length = 2pi\ndealias = none\n"
            "initial_kind = modes\ninitial_max_mode = 3  # low modes only\n"
        )
        cfg = sim_config_from_file(path)
        self.assertEqual(cfg.nu, 1e-3)
        self.assertEqual(cfg.T, 0.5)
        self.assertEqual(cfg.N, 64)
        self.assertAlmostEqual(cfg.box_length, 2 * math.pi)
        self.assertEqual(cfg.dealias, "none")
        self.assertEqual(cfg.initial_data.kind, "modes")
        self.assertEqual(cfg.initial_data.max_mode, 3)

    def test_sections(self):
        path = self.write(
            "[sim]\nT = 1\ndt = 0.01\nsnapshot_times = 0.25, 0.5\nprogress = yes\n"
            "[initial]\nkind = loglog\ncore_radius = 0.6\ncap = 0.05\ncenter = 1.0, 2.0\n"
        )
        cfg = sim_config_from_file(path)
        self.assertEqual(cfg.dt, 0.01)
        self.assertEqual(cfg.snapshot_times, [0.25, 0.5])
        self.assertTrue(cfg.progress)
        self.assertEqual(cfg.initial_data.kind, "loglog")
        self.assertEqual(cfg.initial_data.cap, 0.05)
        self.assertEqual(cfg.initial_data.center, (1.0, 2.0))

    def test_defaults(self):
        cfg = sim_config_from_file(self.write("[sim]\n"))
        self.assertEqual(cfg.dt, "auto")
        self.assertEqual(cfg.initial_data.kind, "taylor_green")
        self.assertEqual(cfg.initial_data.cap, "grid")

    def test_unknown_key(self):
        with self.assertRaises(DomainError):
            sim_config_from_file(self.write("[sim]\nviscosity = 1e-3\n"))
        with self.assertRaises(DomainError):
            sim_config_from_file(self.write("[initial]\nshape = ring\n"))

    def test_bad_values(self):
        with self.assertRaises(DomainError):
            sim_config_from_file(self.write("N = sixty-four\n"))
        with self.assertRaises(DomainError):
            sim_config_from_file(self.write("progress = maybe\n"))
        with self.assertRaises(DomainError):
            sim_config_from_file(self.write("nu = -1\n"))

    def test_missing_file(self):
        with self.assertRaises(DomainError):
            read_config(os.path.join(self.tmp.name, "absent.ini"))


class TestSweepConfig(ConfigFileTest):
    def test_explicit_nu_list(self):
        path = self.write(
            "[sim]\nN = 32\n[sweep]\nnu_list = 1e-2, 1e-3\ntheta = const:1\nM = 4\n"
            "calibrations = 1, 10\ncontrol_run = off\nworkers = 2\n"
        )
        cfg = sweep_config_from_file(path)
        self.assertEqual(cfg.base.N, 32)
        self.assertEqual(cfg.nu_list, [1e-2, 1e-3])
        self.assertEqual(cfg.theta, "const:1")
        self.assertEqual(cfg.M, 4.0)
        self.assertEqual(cfg.calibrations, [1.0, 10.0])
        self.assertFalse(cfg.control_run)
        self.assertEqual(cfg.worker_count(), 2)

    def test_nu_range(self):
        path = self.write("[sweep]\nnu_max = 1e-2\nnu_min = 1e-4\nnu_count = 3\n")
        cfg = sweep_config_from_file(path)
        self.assertEqual(len(cfg.nu_list), 3)
        self.assertAlmostEqual(cfg.nu_list[0], 1e-2)
        self.assertAlmostEqual(cfg.nu_list[1], 1e-3)
        self.assertAlmostEqual(cfg.nu_list[2], 1e-4)

    def test_nu_range_needs_both_ends(self):
        with self.assertRaises(DomainError):
            sweep_config_from_file(self.write("[sweep]\nnu_max = 1e-2\n"))

    def test_output_override(self):
        path = self.write("[sweep]\noutput_dir = first\n")
        self.assertEqual(sweep_config_from_file(path).output_dir, "first")
        self.assertEqual(sweep_config_from_file(path, "second").output_dir, "second")

    def test_increasing_nu_rejected(self):
        with self.assertRaises(DomainError):
            sweep_config_from_file(self.write("[sweep]\nnu_list = 1e-3, 1e-2\n"))

    def test_auto_M(self):
        self.assertEqual(sweep_config_from_file(self.write("[sweep]\nM = auto\n")).M, "auto")


class TestWorkspace(unittest.TestCase):
    def test_paths(self):
        with tempfile.TemporaryDirectory() as tmp:
            workspace = Workspace(os.path.join(tmp, "out"))
            self.assertEqual(workspace.build_path("a", "b"), os.path.join(tmp, "out", "a", "b"))
            path = workspace.create_dir("snapshots")
            self.assertTrue(os.path.isdir(path))


if __name__ == "__main__":
    unittest.main()
