import math
import unittest

import mpmath
import numpy as np
from scipy.special import erfcx

from src.core.errors import DomainError, EvaluationError
from src.core.specfun import (EvalPoint, MLParams, _contour_negative, _series, bessel_j,
                              gamma_fn, mittag_leffler, mittag_leffler_array,
                              ml_cumulatives, ml_kernel_derivative, prabhakar,
                              prabhakar_array)


def _extended_series(alpha, beta, z, digits=240):
    """Power series of E_{alpha,beta}(z) summed with enough digits to absorb cancellation"""
    with mpmath.workdps(digits):
        z = mpmath.mpf(z)
        total, previous, n = mpmath.mpf(0), mpmath.inf, 0
        while True:
            term = z ** n * mpmath.rgamma(alpha * n + beta)
            total += term
            if abs(term) < previous and abs(term) < mpmath.mpf(10) ** -40:
                return float(total)
            previous, n = abs(term), n + 1


class TestIdentities(unittest.TestCase):
    def test_exponential(self):
        z = np.linspace(-3.0, 3.0, 13)
        np.testing.assert_allclose(mittag_leffler_array(1.0, 1.0, z), np.exp(z), rtol=1e-12)

    def test_e_at_one(self):
        value = mittag_leffler(MLParams(1.0, 1.0), EvalPoint(1.0))
        self.assertAlmostEqual(value, math.e, places=14)
        self.assertAlmostEqual(mittag_leffler_array(1.0, 2.0, 1.0), math.e - 1.0, places=14)

    def test_cosine_zero(self):
        self.assertLess(abs(mittag_leffler_array(2.0, 1.0, -(math.pi / 2.0) ** 2)), 1e-12)

    def test_gamma_one_matches_two_parameter(self):
        z = np.array([-4.0, -1.5, 0.3, 2.0])
        np.testing.assert_allclose(prabhakar_array(0.7, 1.3, 1.0, z),
                                   mittag_leffler_array(0.7, 1.3, z), rtol=1e-14)

    def test_gamma_zero_is_reciprocal_gamma(self):
        value = prabhakar(MLParams(0.5, 2.5, 0.0), EvalPoint(3.0))
        self.assertAlmostEqual(value, 1.0 / gamma_fn(2.5), places=15)

    def test_half_order_is_scaled_erfc(self):
        # E_{1/2}(-x) = exp(x^2) erfc(x)
        self.assertAlmostEqual(mittag_leffler_array(0.5, 1.0, -0.5) / erfcx(0.5), 1.0, places=12)
        self.assertAlmostEqual(mittag_leffler_array(0.5, 1.0, -6.0) / erfcx(6.0), 1.0, places=9)

    def test_positive_contour_route(self):
        exact = 2.0 * math.exp(36.0) - erfcx(6.0)
        self.assertAlmostEqual(mittag_leffler_array(0.5, 1.0, 6.0) / exact, 1.0, places=10)

    def test_recurrence(self):
        rng = np.random.default_rng(7)
        alphas = rng.uniform(0.5, 1.2, 100)
        betas = rng.uniform(0.5, 2.0, 100)
        zs = rng.uniform(-3.0, 3.0, 100)
        for alpha, beta, z in zip(alphas, betas, zs):
            lhs = mittag_leffler_array(alpha, beta, z)
            rhs = z * mittag_leffler_array(alpha, alpha + beta, z) + 1.0 / gamma_fn(beta)
            self.assertLessEqual(abs(lhs - rhs), 1e-11 * max(1.0, abs(lhs)), (alpha, beta, z))

    def test_series_and_contour_agree(self):
        z = np.array([-2.0, -4.0])
        for alpha in (0.8, 0.9):
            total, _, done = _series(alpha, 1.0, 1.0, z, 1e-14)
            contour, estimate = _contour_negative(alpha, 1.0, 1.0, z)
            self.assertTrue(np.all(done))
            np.testing.assert_allclose(total, contour, atol=1e-9)
            self.assertTrue(np.all(estimate < 1e-8))

    def test_overlap_band(self):
        # the series summed in extended precision stands in for the series strategy
        # wherever double precision cancellation rules it out
        z = np.array([-6.0, -5.0, -4.0])
        for alpha in (0.3, 0.5, 0.7, 0.9):
            contour, _ = _contour_negative(alpha, 1.0, 1.0, z)
            series = np.array([_extended_series(alpha, 1.0, x) for x in z])
            np.testing.assert_allclose(contour, series, rtol=1e-9, err_msg=f"alpha={alpha}")
            np.testing.assert_allclose(mittag_leffler_array(alpha, 1.0, z), series, rtol=1e-9)

    def test_scalar_and_array_shapes(self):
        self.assertIsInstance(prabhakar_array(0.5, 1.0, 1.0, -1.0), float)
        z = np.zeros((3, 4))
        self.assertEqual(prabhakar_array(0.5, 1.0, 2.0, z).shape, (3, 4))

    def test_unreachable_positive_argument(self):
        with self.assertRaises(EvaluationError):
            prabhakar_array(0.1, 1.0, 2.0, 50.0)


class TestMemoryKernelFunctions(unittest.TestCase):
    def test_derivative_by_difference(self):
        alpha, t, h = 0.4, 0.7, 1e-5
        a = 1.0 - alpha

        def relaxation(x):
            return mittag_leffler_array(a, 1.0, -x ** a)

        numeric = (relaxation(t + h) - relaxation(t - h)) / (2.0 * h)
        self.assertAlmostEqual(ml_kernel_derivative(alpha, t) / numeric, 1.0, places=6)

    def test_cumulatives_are_antiderivatives(self):
        alpha, t, h = 0.5, 0.8, 1e-5
        first, second = ml_cumulatives(alpha, np.array([t - h, t, t + h]))
        self.assertAlmostEqual((first[2] - first[0]) / (2.0 * h),
                               -ml_kernel_derivative(alpha, t), places=6)
        self.assertAlmostEqual((second[2] - second[0]) / (2.0 * h), first[1], places=6)

    def test_derivative_rejects_origin(self):
        with self.assertRaises(DomainError):
            ml_kernel_derivative(0.5, 0.0)


class TestGammaBessel(unittest.TestCase):
    def test_gamma(self):
        self.assertAlmostEqual(gamma_fn(5.0), 24.0, places=12)
        self.assertAlmostEqual(gamma_fn(0.5), math.sqrt(math.pi), places=14)
        for pole in (0.0, -2.0):
            with self.assertRaises(DomainError):
                gamma_fn(pole)

    def test_half_integer_bessel(self):
        x = np.array([0.5, 2.0, 7.5])
        np.testing.assert_allclose(bessel_j(0.5, x), np.sqrt(2.0 / (np.pi * x)) * np.sin(x),
                                   rtol=1e-13)
        with self.assertRaises(DomainError):
            bessel_j(-1.0, 1.0)


class TestValidation(unittest.TestCase):
    def test_parameters(self):
        with self.assertRaises(DomainError):
            MLParams(0.0)
        with self.assertRaises(DomainError):
            MLParams(0.5, 1.0, -1.0)
        with self.assertRaises(DomainError):
            EvalPoint(1.0, precision_goal=1.0)
        with self.assertRaises(DomainError):
            mittag_leffler(MLParams(0.5, 1.0, 2.0), EvalPoint(1.0))


if __name__ == '__main__':
    unittest.main()
