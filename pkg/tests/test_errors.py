import pickle
import unittest

from src.errors import InstabilityError, NumericalError, QuadratureError, SweepAborted
from src.objects.record import ConvergenceRecord


def roundtrip(error):
    return pickle.loads(pickle.dumps(error))


class TestPickling(unittest.TestCase):
    def test_instability_error(self):
        copy = roundtrip(InstabilityError(0.25, 0.4))
        self.assertIsInstance(copy, NumericalError)
        self.assertEqual((copy.t, copy.cfl), (0.25, 0.4))
        self.assertEqual(str(copy), str(InstabilityError(0.25, 0.4)))
        self.assertEqual(copy.kind, "instability")

    def test_quadrature_error(self):
        error = QuadratureError("Integrand is not finite", (1e-8, 1e-4))
        copy = roundtrip(error)
        self.assertEqual(copy.panel, (1e-8, 1e-4))
        self.assertEqual(copy.reason, "Integrand is not finite")
        self.assertEqual(str(copy), str(error))

    def test_sweep_aborted_keeps_records(self):
        records = [ConvergenceRecord(1e-3, 0.5, 0.1, 0.02)]
        copy = roundtrip(SweepAborted("NS run failed", records))
        self.assertEqual(str(copy), "NS run failed")
        self.assertEqual(copy.records, records)


if __name__ == "__main__":
    unittest.main()
