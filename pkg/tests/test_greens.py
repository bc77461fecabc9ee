import math
import unittest

import numpy as np

from src.core.errors import DomainError
from src.core.fracops import TimeGrid
from src.core.greens import (GreenSeriesParams, RadialProfile, SpectralField, forcing_kernel,
                             _tail_coefficients, green_physical, green_symbol, green_symbol_array,
                             mean_squared_displacement, radial_inverse_fourier, radial_mass)
from src.core.laplace import (prabhakar_image, product_image, symbol_forcing, symbol_homogeneous,
                              talbot_invert, talbot_invert_many)


def gaussian(rho):
    return np.exp(-0.5 * np.asarray(rho) ** 2)


class TestGreenSymbol(unittest.TestCase):
    def setUp(self):
        self.p = GreenSeriesParams(0.5)

    def test_zero_frequency_and_time(self):
        self.assertEqual(green_symbol(0.0, 0.7, self.p), 1.0)
        self.assertEqual(green_symbol(3.0, 0.0, self.p), 1.0)

    def test_matches_inversion_oracle(self):
        for alpha in (0.3, 0.7):
            p = GreenSeriesParams(alpha)
            xi2 = np.array([0.5, 3.0, 12.0, 25.0])
            for t in (0.05, 1.0, 2.0):
                values, _ = green_symbol_array(xi2, t, p)
                oracle = [talbot_invert(symbol_homogeneous(q, alpha), t) for q in xi2]
                np.testing.assert_allclose(values, oracle, atol=1e-8)
                self.assertTrue(np.all(np.diff(values) <= 1e-12))

    def test_single_point(self):
        oracle = talbot_invert(symbol_homogeneous(1.0, 0.5), 0.5)
        self.assertAlmostEqual(green_symbol(1.0, 0.5, self.p), oracle, delta=1e-8)

    def test_long_times_use_inversion(self):
        _, by_series = green_symbol_array(np.array([0.1, 1.0]), 3.0, GreenSeriesParams(0.3))
        self.assertFalse(np.any(by_series))

    def test_validation(self):
        with self.assertRaises(DomainError):
            green_symbol(-1.0, 1.0, self.p)
        with self.assertRaises(DomainError):
            green_symbol(1.0, -1.0, self.p)
        for kwargs in ({"alpha": 1.0}, {"alpha": 0.5, "tol": 0.0}, {"alpha": 0.5, "j_max": 4}):
            with self.assertRaises(DomainError):
                GreenSeriesParams(**kwargs)


class TestForcingKernel(unittest.TestCase):
    def setUp(self):
        self.grid = TimeGrid(1.0, 512)
        self.picks = np.array([64, 256, 512])

    def oracle(self, xi2, alpha):
        image = product_image(symbol_forcing(xi2, alpha), prabhakar_image(1.0, 1.0, 1.0, -1.0))
        values, _ = talbot_invert_many(image, self.grid.nodes[self.picks])
        return values

    def test_zero_forcing(self):
        out = forcing_kernel(1.0, self.grid, 0.5, np.zeros(513))
        self.assertFalse(np.any(out))

    def test_against_inversion(self):
        f = np.exp(-self.grid.nodes)
        for xi2 in (0.0, 1.0):
            values = forcing_kernel(xi2, self.grid, 0.5, f)
            np.testing.assert_allclose(values[self.picks], self.oracle(xi2, 0.5), atol=1e-6)

    def test_many_modes(self):
        xi2 = np.array([0.0, 1.0, 4.0])
        f = np.outer(np.exp(-self.grid.nodes), [1.0, 2.0, -1.0])
        joint = forcing_kernel(xi2, self.grid, 0.5, f)
        self.assertEqual(joint.shape, f.shape)
        for j, q in enumerate(xi2):
            np.testing.assert_allclose(joint[:, j], forcing_kernel(q, self.grid, 0.5, f[:, j]),
                                       atol=1e-12)

    def test_complex_forcing(self):
        f = np.exp(-self.grid.nodes)
        real = forcing_kernel(2.0, self.grid, 0.5, f)
        mixed = forcing_kernel(2.0, self.grid, 0.5, (1.0 + 2.0j) * f)
        np.testing.assert_allclose(mixed, (1.0 + 2.0j) * real, atol=1e-14)

    def test_sample_count(self):
        with self.assertRaises(DomainError):
            forcing_kernel(1.0, self.grid, 0.5, np.ones(10))


class TestRadialInverse(unittest.TestCase):
    def setUp(self):
        self.xi = np.linspace(0.0, 12.0, 49)

    def profile(self, n, scale=1.0):
        return RadialProfile(self.xi, scale * gaussian(self.xi), n,
                             evaluator=lambda rho: scale * gaussian(rho))

    def test_gaussian(self):
        radii = np.linspace(0.0, 4.0, 30)
        for n in (1, 2, 3):
            result = radial_inverse_fourier(self.profile(n), radii)
            exact = (2.0 * math.pi) ** (-0.5 * n) * np.exp(-0.5 * radii ** 2)
            np.testing.assert_allclose(result.values, exact, rtol=1e-7)
            self.assertFalse(result.truncated)
        origin = radial_inverse_fourier(self.profile(1), radii)
        self.assertAlmostEqual(origin.values[0], 0.3989422804014327, delta=1e-12)

    def test_linear_in_profile(self):
        radii = np.linspace(0.0, 3.0, 20)
        base = radial_inverse_fourier(self.profile(3), radii).values
        scaled = radial_inverse_fourier(self.profile(3, 3.5), radii).values
        np.testing.assert_allclose(scaled, 3.5 * base, rtol=1e-13)

    def test_zero_profile(self):
        profile = RadialProfile(self.xi, np.zeros_like(self.xi), 2)
        result = radial_inverse_fourier(profile, np.linspace(0.0, 2.0, 17))
        self.assertFalse(np.any(result.values))

    def test_truncation_warning(self):
        xi = np.linspace(0.0, 5.0, 21)
        profile = RadialProfile(xi, np.exp(-xi), 1, evaluator=lambda rho: np.exp(-np.asarray(rho)))
        with self.assertLogs("fracdiff.greens", level="WARNING"):
            result = radial_inverse_fourier(profile, np.linspace(0.0, 1.0, 17))
        self.assertTrue(result.truncated)

    def test_profile_validation(self):
        with self.assertRaises(DomainError):
            RadialProfile(np.linspace(0.0, 1.0, 5), np.zeros(5))
        with self.assertRaises(DomainError):
            RadialProfile(self.xi[::-1], gaussian(self.xi))
        with self.assertRaises(DomainError):
            RadialProfile(self.xi, gaussian(self.xi), 4)

    def test_mass_of_gaussian(self):
        r = np.linspace(0.0, 10.0, 201)
        profile = RadialProfile(r, (2.0 * math.pi) ** -1.5 * np.exp(-0.5 * r ** 2), 3)
        self.assertAlmostEqual(radial_mass(profile), 1.0, delta=1e-6)


class TestGreenPhysical(unittest.TestCase):
    def test_unit_mass_and_sign(self):
        radii = np.linspace(0.0, 12.0, 241)
        result = green_physical(radii, 1.0, 0.5, 1)
        self.assertAlmostEqual(radial_mass(result), 1.0, delta=1e-4)
        self.assertGreater(np.min(result.values), -1e-6)
        self.assertTrue(np.all(np.diff(result.values) <= 1e-9))
        self.assertIn("series_fraction", result.meta)

    def test_near_normal_diffusion(self):
        # alpha -> 1 reduces the equation to 2 u_t = u_xx
        radii = np.linspace(0.0, 4.0, 33)
        result = green_physical(radii, 1.0, 0.999, 1)
        exact = np.exp(-0.5 * radii ** 2) / math.sqrt(2.0 * math.pi)
        self.assertLess(np.max(np.abs(result.values - exact)), 2e-2)

    def test_mass_and_sign_across_dimensions(self):
        for alpha in (0.3, 0.5, 0.7):
            for t in (0.1, 1.0):
                for n, radii in ((1, np.linspace(0.0, 14.0, 281)), (3, np.linspace(0.05, 14.0, 280))):
                    with self.subTest(alpha=alpha, t=t, n=n):
                        result = green_physical(radii, t, alpha, n)
                        self.assertFalse(result.truncated)
                        self.assertLessEqual(result.meta["tail_bound"], 1e-9)
                        self.assertAlmostEqual(radial_mass(result), 1.0, delta=1e-4)
                        self.assertGreater(np.min(result.values), -1e-6)

    def test_leading_tail_coefficient(self):
        # G~ ~ t**(-alpha) / Gamma(1 - alpha) / |xi|**2 for large |xi|
        for alpha in (0.3, 0.5, 0.7):
            for t in (0.1, 1.0):
                b = _tail_coefficients(t, alpha)
                self.assertAlmostEqual(b[0], t ** (-alpha) / math.gamma(1.0 - alpha), delta=1e-12)

    def test_tails_match_symbol(self):
        p = GreenSeriesParams(0.5)
        b = _tail_coefficients(1.0, 0.5)
        rho = np.array([20.0, 40.0])
        values, _ = green_symbol_array(rho ** 2, 1.0, p)
        w = 1.0 / (1.0 + rho ** 2)
        rest = values - sum(c * w ** m for m, c in enumerate(b, start=1))
        self.assertTrue(np.all(np.abs(rest) < 100.0 * rho ** -8))

    def test_origin_rejected_above_one_dimension(self):
        with self.assertRaises(DomainError):
            green_physical(np.linspace(0.0, 2.0, 20), 1.0, 0.5, 3)
        with self.assertRaises(DomainError):
            green_physical(np.linspace(0.1, 2.0, 20), 0.0, 0.5, 1)


class TestMoments(unittest.TestCase):
    def test_msd_is_symbol_curvature(self):
        alpha, t, h = 0.5, 1.0, 1e-4
        slope = (green_symbol(h, t, GreenSeriesParams(alpha)) - 1.0) / h
        self.assertAlmostEqual(mean_squared_displacement(alpha, 1, t) / (-2.0 * slope), 1.0,
                               delta=1e-3)

    def test_msd_scales_with_dimension(self):
        t = np.array([0.1, 1.0, 5.0])
        np.testing.assert_allclose(mean_squared_displacement(0.3, 3, t),
                                   3.0 * mean_squared_displacement(0.3, 1, t), rtol=1e-14)
        self.assertEqual(mean_squared_displacement(0.3, 2, 0.0), 0.0)

    def test_hermitian_defect_of_real_field(self):
        rng = np.random.default_rng(3)
        field = SpectralField(np.fft.fftn(rng.standard_normal((16, 16))), 8.0)
        self.assertEqual(field.n, 2)
        self.assertEqual(field.modes, 16)
        self.assertLess(field.hermitian_defect(), 1e-14)


if __name__ == '__main__':
    unittest.main()
