import os
import tempfile
import unittest

import numpy as np

from src import plumbing
from src.errors import DomainError, SweepAborted
from src.harness import (
    SweepConfig,
    bootstrap_rate_exponent,
    check_energy_inequality,
    emit_report,
    fit_rate_exponent,
    perturbation_response,
    rate_regime,
    run_sweep,
)
from src.spectral import InitialData, SimConfig, run

SLOW = os.environ.get("INVISCID_SLOW_TESTS")
NU_LIST = [1e-2, 5e-3, 2e-3, 1e-3]
BLOWUP = SimConfig(
    T=1000.0, N=32, dt=5.0, record_every=500.0, initial_data=InitialData("modes", amplitude=5.0)
)


def taylor_green_sweep(output_dir, **kwargs):
    base = SimConfig(T=0.2, N=32, record_every=0.05)
    options = dict(nu_list=NU_LIST, calibrations=[1.0], bootstrap_samples=20, output_dir=output_dir)
    options.update(kwargs)
    return SweepConfig(base=base, **options)


class TestSweepConfig(unittest.TestCase):
    def test_validation(self):
        with self.assertRaises(DomainError):
            SweepConfig(nu_list=[])
        with self.assertRaises(DomainError):
            SweepConfig(nu_list=[1e-3, 1e-2])
        with self.assertRaises(DomainError):
            SweepConfig(nu_list=[1e-2, 0.0])
        with self.assertRaises(DomainError):
            SweepConfig(M=-1.0)

    def test_workers_from_environment(self):
        previous = os.environ.get("INVISCID_WORKERS")
        os.environ["INVISCID_WORKERS"] = "3"
        try:
            self.assertEqual(SweepConfig().worker_count(), 3)
            self.assertEqual(SweepConfig(workers=1).worker_count(), 1)
        finally:
            if previous is None:
                del os.environ["INVISCID_WORKERS"]
            else:
                os.environ["INVISCID_WORKERS"] = previous


class TestRateExponent(unittest.TestCase):
    def test_power_law(self):
        nus = [1e-2, 1e-3, 1e-4, 1e-5]
        sups = [3.0 * nu**0.7 for nu in nus]
        self.assertAlmostEqual(fit_rate_exponent(nus, sups), 0.7, places=10)

    def test_too_few_points(self):
        self.assertIsNone(fit_rate_exponent([1e-2], [0.1]))
        self.assertIsNone(fit_rate_exponent([1e-2, 1e-3], [0.1, 0.0]))

    def test_bootstrap_interval_contains_exact_slope(self):
        nus = np.array([1e-2, 1e-3, 1e-4])
        times = np.linspace(0.1, 1.0, 5)
        curves = [nu * times for nu in nus]
        low, high = bootstrap_rate_exponent(nus, curves, samples=50, seed=1)
        self.assertAlmostEqual(low, 1.0, places=10)
        self.assertAlmostEqual(high, 1.0, places=10)

    def test_rate_regime(self):
        self.assertEqual(rate_regime(None), "undetermined")
        self.assertEqual(rate_regime(1.02), "linear")
        self.assertEqual(rate_regime(0.75), "intermediate")
        self.assertEqual(rate_regime(0.5), "square_root")
        self.assertEqual(rate_regime(0.4), "square_root")
        self.assertEqual(rate_regime(0.2), "sublinear")


class TestEnergyInequality(unittest.TestCase):
    def test_taylor_green_satisfies_inequality(self):
        base = SimConfig(T=0.2, N=32, record_every=0.05)
        euler = run(base)
        viscous = run(SimConfig(nu=1e-2, T=0.2, N=32, record_every=0.05))
        report = check_energy_inequality(viscous.snapshots, euler.snapshots, 1e-2, R=1.0)
        self.assertTrue(report.satisfied)
        self.assertEqual(report.times, [0.0, 0.05, 0.1, 0.15, 0.2])
        self.assertEqual(report.lhs[0], 0.0)

    def test_misaligned_snapshots(self):
        a = run(SimConfig(T=0.1, N=32, record_every=0.05)).snapshots
        b = run(SimConfig(T=0.1, N=32, record_every=0.1)).snapshots
        with self.assertRaises(DomainError):
            check_energy_inequality(a, b, 1e-2, R=1.0)

    def test_same_viscosity_has_zero_difference(self):
        cfg = SimConfig(nu=1e-2, T=0.2, N=32, record_every=0.05, initial_data=InitialData("modes"))
        first, second = run(cfg), run(cfg)
        report = check_energy_inequality(first.snapshots, second.snapshots, 1e-2, R=0.0)
        self.assertEqual(report.lhs, [0.0] * 5)
        self.assertEqual(report.rhs, [0.0] * 5)
        self.assertTrue(report.satisfied)
        report = check_energy_inequality(first.snapshots, second.snapshots, 1e-2, R=2.0)
        np.testing.assert_allclose(report.slack, 2.0 * 1e-2 * np.array(report.times))


class TestPerturbation(unittest.TestCase):
    def test_taylor_green_perturbation_decays(self):
        # (1 + delta) omega_TG is again a decaying Taylor-Green flow
        cfg = SimConfig(nu=5e-2, T=0.2, N=32, record_every=0.05)
        report = perturbation_response(cfg, InitialData("taylor_green", amplitude=1e-3))
        self.assertEqual(report.times, [0.0, 0.05, 0.1, 0.15, 0.2])
        expected = report.differences[0] * np.exp(-2.0 * 5e-2 * np.array(report.times))
        np.testing.assert_allclose(report.differences, expected, rtol=1e-8)
        self.assertAlmostEqual(report.growth, 1.0, places=10)

    def test_euler_response_is_linear(self):
        cfg = SimConfig(T=0.5, N=32, dt=0.01, record_every=0.1, initial_data=InitialData("modes"))
        large = perturbation_response(cfg, InitialData("modes", amplitude=1e-6, seed=7))
        small = perturbation_response(cfg, InitialData("modes", amplitude=1e-7, seed=7))
        self.assertTrue(np.isfinite(large.growth))
        self.assertAlmostEqual(large.growth, small.growth, delta=1e-2 * large.growth)
        np.testing.assert_allclose(large.differences, 10.0 * np.array(small.differences), rtol=1e-2)

    def test_zero_perturbation(self):
        cfg = SimConfig(T=0.1, N=32, record_every=0.05, initial_data=InitialData("modes"))
        report = perturbation_response(cfg, InitialData("modes", amplitude=0.0))
        self.assertEqual(report.differences, [0.0, 0.0, 0.0])
        self.assertEqual(report.growth, 0.0)


class TestSweep(unittest.TestCase):
    def test_taylor_green_sweep(self):
        with tempfile.TemporaryDirectory() as tmp:
            records, summary = run_sweep(taylor_green_sweep(tmp))
            for name in ("records.csv", "summary.json", "measured_vs_nu.dat", "bound_vs_nu.dat"):
                self.assertTrue(os.path.exists(os.path.join(tmp, name)), name)
            self.assertEqual(plumbing.read_records(os.path.join(tmp, "records.csv")), records)
            self.assertEqual(plumbing.read_json(os.path.join(tmp, "summary.json"))["M"], summary["M"])

        self.assertEqual(len(records), len(NU_LIST) * 5)
        self.assertEqual(records, sorted(records, key=lambda r: (r.nu, r.t)))
        # the viscous Taylor-Green flow decays like exp(-2 nu t) and Euler keeps it steady
        self.assertAlmostEqual(summary["alpha_hat"], 1.0, delta=0.05)
        self.assertEqual(summary["rate_regime"], "linear")
        self.assertIsNone(summary["perturbation"])
        self.assertTrue(summary["monotone"])
        self.assertTrue(summary["bound_satisfied"])
        self.assertEqual(summary["smallest_sufficient_C"], 1.0)
        self.assertTrue(all(entry["satisfied"] for entry in summary["energy_inequality"]))
        self.assertLess(summary["discretization_error"], 1e-8)
        self.assertGreater(summary["R"], 0.0)

    def test_sweep_is_deterministic(self):
        with tempfile.TemporaryDirectory() as tmp:
            first, _ = run_sweep(taylor_green_sweep(tmp, control_run=False), persist=False)
            second, _ = run_sweep(taylor_green_sweep(tmp, control_run=False), persist=False)
            self.assertEqual([r.serialize() for r in first], [r.serialize() for r in second])
            self.assertEqual(os.listdir(tmp), [])

    def test_euler_instability_aborts(self):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = SweepConfig(base=BLOWUP, nu_list=[1e-2], control_run=False, output_dir=tmp)
            with self.assertRaises(SweepAborted) as context:
                run_sweep(cfg)
            self.assertEqual(context.exception.records, [])

    def test_instability_in_worker_process_aborts(self):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = SweepConfig(base=BLOWUP, nu_list=[1e-2], control_run=False, output_dir=tmp, workers=2)
            with self.assertRaises(SweepAborted) as context:
                run_sweep(cfg)
            self.assertEqual(context.exception.records, [])

    def test_energy_report_per_calibration(self):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = taylor_green_sweep(tmp, calibrations=[0.1, 10.0], control_run=False)
            _, summary = run_sweep(cfg, persist=False)
        entries = summary["energy_inequality"]
        self.assertEqual(len(entries), 3 * len(NU_LIST))
        for nu in NU_LIST:
            slacks = {e["C"]: e["min_slack"] for e in entries if e["nu"] == nu}
            self.assertEqual(sorted(slacks), [0.1, 1.0, 10.0])
            self.assertLessEqual(slacks[0.1], slacks[1.0])
            self.assertLessEqual(slacks[1.0], slacks[10.0])

    def test_sweep_with_perturbation(self):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = taylor_green_sweep(tmp, nu_list=[1e-2], control_run=False, perturbation_amplitude=1e-6)
            _, summary = run_sweep(cfg, persist=False)
        perturbation = summary["perturbation"]
        self.assertEqual(perturbation["amplitude"], 1e-6)
        self.assertEqual(len(perturbation["differences"]), 5)
        self.assertGreater(perturbation["differences"][0], 0.0)
        self.assertLess(perturbation["growth"], 10.0)


def loglog_sweep(output_dir, N, T, nu_list, **kwargs):
    base = SimConfig(T=T, N=N, record_every=T / 5, initial_data=InitialData("loglog"))
    options = dict(theta="iterlog:1", control_run=False, bootstrap_samples=50, output_dir=output_dir)
    options.update(kwargs)
    return SweepConfig(base=base, nu_list=nu_list, **options)


class TestSingularSweep(unittest.TestCase):
    def check_loglog_summary(self, summary):
        self.assertTrue(summary["monotone"])
        self.assertIsNotNone(summary["smallest_sufficient_C"])
        self.assertLessEqual(summary["smallest_sufficient_C"], 10.0)
        for entry in summary["energy_inequality"]:
            if entry["C"] >= 1.0:
                self.assertTrue(entry["satisfied"], entry)
        self.assertIsNotNone(summary["alpha_hat"])

    def test_reduced_loglog_sweep(self):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = loglog_sweep(tmp, N=64, T=0.5, nu_list=list(np.geomspace(1e-2, 1e-4, 5)))
            records, summary = run_sweep(cfg, persist=False)
        self.assertEqual(len(records), 5 * 6)
        self.check_loglog_summary(summary)
        self.assertTrue(summary["bound_satisfied"])

    @unittest.skipUnless(SLOW, "set INVISCID_SLOW_TESTS=1")
    def test_loglog_sweep(self):
        with tempfile.TemporaryDirectory() as tmp:
            cfg = loglog_sweep(tmp, N=256, T=2.0, nu_list=list(np.geomspace(1e-2, 1e-4, 8)))
            _, summary = run_sweep(cfg, persist=False)
        self.check_loglog_summary(summary)
        self.assertIsNotNone(summary["alpha_ci"])

    @unittest.skipUnless(SLOW, "set INVISCID_SLOW_TESTS=1")
    def test_smooth_sweep(self):
        base = SimConfig(T=2.0, N=256, record_every=0.25, initial_data=InitialData("modes"))
        with tempfile.TemporaryDirectory() as tmp:
            cfg = SweepConfig(base=base, control_run=False, bootstrap_samples=50, output_dir=tmp)
            _, summary = run_sweep(cfg, persist=False)
        self.assertEqual(len(summary["sup_diffs"]), 8)
        self.assertTrue(summary["monotone"])
        self.assertGreaterEqual(summary["alpha_hat"], 0.4)
        self.assertIn(summary["rate_regime"], ("square_root", "intermediate", "linear"))


class TestReports(unittest.TestCase):
    def test_unknown_format(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(DomainError):
                emit_report([], {}, "xml", tmp)

    def test_empty_plot_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            paths = emit_report([], {}, "plot", tmp)
            names = sorted(os.path.basename(p) for p in paths)
            self.assertEqual(names, ["bound_vs_nu.dat", "measured_vs_nu.dat"])


if __name__ == "__main__":
    unittest.main()
