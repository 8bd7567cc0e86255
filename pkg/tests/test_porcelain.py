import contextlib
import io
import json
import os
import tempfile
import unittest

from src import porcelain
from src.errors import DomainError
from src.main import main


def invoke(*argv):
    """Run the command line in-process; returns (exit code, stdout)."""
    stdout, stderr = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(stdout), contextlib.redirect_stderr(stderr):
        code = main(list(argv) + ["-q"])
    return code, stdout.getvalue()


def invoke_json(*argv):
    code, output = invoke(*argv)
    return code, json.loads(output)


class TestEvaluationCommands(unittest.TestCase):
    def test_beta_eval(self):
        code, result = invoke_json("beta", "eval", "--theta", "const:1", "--x", "1")
        self.assertEqual(code, 0)
        self.assertAlmostEqual(result["beta"], 2.0, delta=1e-5)
        self.assertEqual(result["p0"], 2.0)

    def test_beta_eval_with_eps(self):
        code, result = invoke_json("beta", "eval", "--theta", "const:1", "--x", "1", "--eps", "0.5")
        self.assertEqual(code, 0)
        self.assertAlmostEqual(result["beta_eps"], 2.0)

    def test_psi_eval(self):
        code, result = invoke_json("psi", "eval", "--theta", "const:1", "--x", "1")
        self.assertEqual(code, 0)
        self.assertAlmostEqual(result["psi"], 2.0, delta=1e-5)

    def test_iterated_log_takes_minimal_p0(self):
        code, result = invoke_json("psi", "eval", "--theta", "iterlog:3", "--x", "1e6")
        self.assertEqual(code, 0)
        self.assertEqual(result["p0"], 16.0)

    def test_admissible_check(self):
        code, result = invoke_json("admissible", "check", "--theta", "iterlog:1")
        self.assertEqual(code, 0)
        self.assertEqual(result["verdict"], "NumericallyDivergent")
        self.assertEqual(len(result["partial_integrals"]), 13)

    def test_sufficient_check(self):
        code, result = invoke_json("sufficient", "check", "--theta", "pow:1")
        self.assertEqual(code, 0)
        self.assertEqual(result["verdict"], "NumericallyConvergent")

    def test_domain_error_is_reported(self):
        code, result = invoke_json("beta", "eval", "--theta", "exp:1", "--x", "1")
        self.assertEqual(code, 1)
        self.assertEqual(result["error"], "domain")

    def test_rate_bound(self):
        args = ("rate", "bound", "--theta", "const:1", "--T", "1", "--R", "1", "--nu", "1e-4")
        code, result = invoke_json(*args)
        self.assertEqual(code, 0)
        self.assertGreater(result["bound"], 1e-4)

    def test_rate_table(self):
        args = ("rate", "table", "--theta", "const:1", "--T", "1", "--R", "1")
        code, output = invoke(*args, "--nu-list", "1e-2,1e-3", "--times", "0.5,1")
        self.assertEqual(code, 0)
        lines = output.splitlines()
        self.assertEqual(lines[0], "nu,t,bound")
        self.assertEqual(len(lines), 5)
        bounds = [float(line.split(",")[2]) for line in lines[1:]]
        self.assertTrue(all(b > 0 for b in bounds))

    def test_rate_table_default_times(self):
        rows = porcelain.rate_table("const:1", 1.0, None, 2.0, 1.0, [1e-3])
        self.assertEqual(len(rows), 10)
        self.assertAlmostEqual(rows[0][1], 0.2)
        self.assertAlmostEqual(rows[-1][1], 2.0)


class TestUsage(unittest.TestCase):
    def test_no_arguments(self):
        code, output = invoke()
        self.assertEqual(code, 2)
        self.assertIn("Usage", output)

    def test_unknown_command(self):
        self.assertEqual(invoke("commit")[0], 2)

    def test_missing_option(self):
        self.assertEqual(invoke("rate", "bound", "--theta", "const:1", "--T", "1", "--R", "1")[0], 2)


class TestSimulationCommands(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def write_config(self, text):
        path = os.path.join(self.tmp.name, "config.ini")
        with open(path, "w") as file:
            file.write(text)
        return path

    def test_sim_run(self):
        config = self.write_config("nu = 1e-2\nT = 0.1\nN = 32\nrecord_every = 0.05\n")
        output = os.path.join(self.tmp.name, "run")
        code, result = invoke_json("sim", "run", "--config", config, "--output", output, "--label", "tg")
        self.assertEqual(code, 0)
        self.assertEqual(result["records"], 3)
        self.assertEqual(result["snapshots"], 3)
        self.assertLess(result["energy"][1], result["energy"][0])
        for name in ("tg_diagnostics.csv", "tg_config.json", "tg_t0.1.bin", "tg_t0.1.bin.json"):
            self.assertTrue(os.path.exists(os.path.join(output, name)), name)

    def test_sweep_run_and_report(self):
        config = self.write_config(
            "[sim]\nT = 0.1\nN = 32\nrecord_every = 0.05\n"
            "[sweep]\nnu_list = 1e-2, 1e-3\ncalibrations = 1\ncontrol_run = no\nbootstrap_samples = 10\n"
        )
        output = os.path.join(self.tmp.name, "sweep")
        code, result = invoke_json("sweep", "run", "--config", config, "--output", output)
        self.assertEqual(code, 0)
        self.assertEqual(result["output_dir"], output)
        self.assertTrue(result["monotone"])

        code, csv_text = invoke("sweep", "report", "--dir", output, "--format", "csv")
        self.assertEqual(code, 0)
        self.assertEqual(csv_text.splitlines()[0], "nu,t,measured,measured_sq,bound,ratio")
        self.assertEqual(len(csv_text.splitlines()), 1 + 2 * 3)

        code, summary = invoke_json("sweep", "report", "--dir", output)
        self.assertEqual(summary["alpha_hat"], result["alpha_hat"])

    def test_report_without_records(self):
        with self.assertRaises(DomainError):
            porcelain.sweep_report(self.tmp.name, "json")


if __name__ == "__main__":
    unittest.main()
