import math
import unittest

import numpy as np

from src.admissibility import BetaContext, ThetaBound
from src.errors import DomainError, NumericalError
from src.osgood import (
    OsgoodProblem,
    PiecewiseConstant,
    RateBound,
    bounded_vorticity_rate,
    modulus_diverges_at_zero,
    osgood_upper_bound,
    rate_function,
    rate_integral,
    solve_forward,
    theoretical_l2_bound,
)


def constant_rate_bound(T=1.0, R=1.0, M=1.0):
    return RateBound(BetaContext(M, ThetaBound.constant()), T, R)


class TestOsgoodBound(unittest.TestCase):
    def test_linear_modulus_is_gronwall(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            a = 10 ** rng.uniform(-6, 2)
            t = rng.uniform(0.01, 3.0)
            bound = osgood_upper_bound(OsgoodProblem(a, lambda s: s, t1=3.0), t)
            self.assertAlmostEqual(bound, a * math.exp(t), delta=1e-6 * a * math.exp(t))

    def test_zero_gamma_integral(self):
        self.assertEqual(osgood_upper_bound(OsgoodProblem(0.3, lambda s: s), 0.0), 0.3)

    def test_zero_start_with_divergent_modulus(self):
        self.assertEqual(osgood_upper_bound(OsgoodProblem(0.0, lambda s: s), 1.0), 0.0)
        ctx = BetaContext(1.0, ThetaBound.iterated_log(1))
        self.assertEqual(osgood_upper_bound(OsgoodProblem(0.0, ctx), 1.0), 0.0)

    def test_zero_start_with_convergent_modulus(self):
        # sqrt(s): integral over [0, u] of s^-1/2 is 2 sqrt(u)
        self.assertFalse(modulus_diverges_at_zero(lambda s: np.sqrt(s)))
        bound = osgood_upper_bound(OsgoodProblem(0.0, lambda s: np.sqrt(s)), 1.0)
        self.assertAlmostEqual(bound, 0.25, delta=1e-6)

    def test_piecewise_gamma(self):
        gamma = PiecewiseConstant([0.0, 1.0, 2.0], [1.0, 3.0])
        self.assertEqual(gamma.integral(0.0, 1.5), 2.5)
        bound = osgood_upper_bound(OsgoodProblem(1.0, lambda s: s, gamma=gamma, t1=2.0), 1.5)
        self.assertAlmostEqual(bound, math.exp(2.5), delta=1e-6 * math.exp(2.5))

    def test_quadratic_modulus_blows_up(self):
        # integral over [1, oo) of ds / s^2 is 1, so a target of 2 is never reached
        self.assertEqual(solve_forward(lambda s: s**2, 1.0, 2.0), math.inf)

    def test_non_monotone_modulus(self):
        mu = lambda s: s * (2.0 + np.sin(40.0 * np.log(s)))
        with self.assertRaises(DomainError):
            osgood_upper_bound(OsgoodProblem(1.0, mu), 0.5)

    def test_time_outside_interval(self):
        with self.assertRaises(DomainError):
            OsgoodProblem(1.0, lambda s: s, t1=1.0).gamma_integral(2.0)


class TestRateFunction(unittest.TestCase):
    def test_self_consistency(self):
        for T in (1.0, 2.0):
            rb = RateBound(BetaContext(1.0, ThetaBound.iterated_log(1)), T, 1.0)
            for x in (1e-10, 1e-6, 1e-3):
                fx = rate_function(rb, x)
                self.assertGreater(fx, x)
                self.assertAlmostEqual(rate_integral(rb, x, fx), T, delta=1e-6 * T)

    def test_osgood_bound_is_below_rate_function(self):
        # L^2 difference starting at R nu t with modulus beta stays below f(R nu t)
        ctx = BetaContext(1.0, ThetaBound.iterated_log(1))
        for T in (0.5, 1.0):
            rb = RateBound(ctx, T, 1.0)
            for x in (1e-8, 1e-4, 1e-2):
                bound = osgood_upper_bound(OsgoodProblem(x, ctx, t1=T), T)
                self.assertLessEqual(bound, rate_function(rb, x) * (1 + 1e-6))

    def test_rate_function_nondecreasing(self):
        rb = RateBound(BetaContext(1.0, ThetaBound.iterated_log(1)), 1.0, 1.0)
        values = [rate_function(rb, x) for x in np.geomspace(1e-12, 1e-2, 50)]
        self.assertTrue(all(b >= a for a, b in zip(values, values[1:])))

    def test_bounded_vorticity_closed_form(self):
        for T in (1.0, 2.0):
            rb = constant_rate_bound(T=T)
            for x in np.geomspace(1e-12, 1e-3, 5):
                numeric = rate_function(rb, x)
                closed = bounded_vorticity_rate(rb, x)
                self.assertLess(abs(numeric - closed), 0.05 * closed)

    def test_closed_form_branches(self):
        rb = constant_rate_bound(T=1.0)
        # above exp(-p0) only the power branch applies
        x = 0.5
        expected = (math.sqrt(x) + 1.0) ** 2
        self.assertAlmostEqual(bounded_vorticity_rate(rb, x), expected)
        # tiny x stays in the log branch for T = 1
        x = 1e-300
        expected = math.exp(-math.log(1.0 / x) * math.exp(-math.e))
        self.assertAlmostEqual(bounded_vorticity_rate(rb, x), expected, delta=1e-12 * expected)

    def test_closed_form_needs_constant_theta(self):
        rb = RateBound(BetaContext(1.0, ThetaBound.iterated_log(1)), 1.0, 1.0)
        with self.assertRaises(DomainError):
            bounded_vorticity_rate(rb, 1e-3)

    def test_rate_function_domain(self):
        with self.assertRaises(DomainError):
            rate_function(constant_rate_bound(), 0.0)

    def test_rate_function_rejects_unbounded(self):
        # beyond M, beta grows like sqrt(s), so f(x) ~ T^2 overflows for astronomically long horizons
        rb = constant_rate_bound(T=1e200)
        with self.assertRaises(NumericalError):
            rate_function(rb, 1e-3)


class TestL2Bound(unittest.TestCase):
    def test_trivial_cases(self):
        rb = constant_rate_bound(R=0.0)
        self.assertEqual(theoretical_l2_bound(rb, 1e-3, 0.5), 0.0)
        self.assertEqual(theoretical_l2_bound(constant_rate_bound(), 1e-3, 0.0), 0.0)

    def test_bound_is_rate_function(self):
        rb = constant_rate_bound(T=2.0, R=3.0)
        nu, t = 1e-4, 1.5
        self.assertAlmostEqual(theoretical_l2_bound(rb, nu, t), rate_function(rb, 3.0 * nu * t))

    def test_bound_monotone_in_nu(self):
        rb = RateBound(BetaContext(1.0, ThetaBound.iterated_log(1)), 1.0, 1.0)
        bounds = [theoretical_l2_bound(rb, nu, 1.0) for nu in (1e-2, 1e-3, 1e-4, 1e-5)]
        self.assertTrue(all(b < a for a, b in zip(bounds, bounds[1:])))

    def test_domain(self):
        rb = constant_rate_bound()
        with self.assertRaises(DomainError):
            theoretical_l2_bound(rb, 0.0, 0.5)
        with self.assertRaises(DomainError):
            theoretical_l2_bound(rb, 1e-3, 2.0)


if __name__ == "__main__":
    unittest.main()
