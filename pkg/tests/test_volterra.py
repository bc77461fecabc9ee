import unittest

import numpy as np

from src.components.verification import random_smooth_pair
from src.core.errors import DomainError, IllConditionedStepError
from src.core.fracops import TimeGrid, caputo_l1
from src.core.specfun import gamma_fn, ml_cumulatives
from src.core.volterra import (caputo_from_resolvent, convolution_matrix, kernel_from_function,
                               laplace_of_samples, memory_kernel, resolvent_representation,
                               resolvent_solve, volterra_apply)


class TestConvolutionMatrix(unittest.TestCase):
    def test_polynomial_exactness(self):
        grid = TimeGrid(1.0, 32)
        t = grid.nodes
        k = kernel_from_function(lambda u: 1.0 + u, grid)
        values = k.matrix @ t ** 2
        exact = t ** 3 / 3.0 + t ** 4 / 12.0
        np.testing.assert_allclose(values[2:], exact[2:], atol=1e-12)
        np.testing.assert_allclose(values, exact, atol=1e-6)

    def test_rows_reproduce_memory_cumulative(self):
        alpha = 0.5
        grid = TimeGrid(1.0, 128)
        W = memory_kernel(alpha, grid).matrix
        cumulative, _ = ml_cumulatives(alpha, grid.nodes)
        np.testing.assert_allclose(W.sum(axis=1), cumulative, atol=1e-10)

    def test_only_first_step_looks_ahead(self):
        W = kernel_from_function(np.cos, TimeGrid(1.0, 8)).matrix
        upper = np.triu(W, 1)
        self.assertNotEqual(upper[1, 2], 0.0)
        upper[1, 2] = 0.0
        self.assertTrue(np.all(upper == 0.0))

    def test_first_step_exact_for_quadratics(self):
        grid = TimeGrid(0.5, 16)
        t = grid.nodes
        k = kernel_from_function(lambda u: u ** -0.5, grid, singular_exponent=0.5,
                                 smooth=lambda u: np.ones_like(u), cumulative=lambda u: 2.0 * u ** 0.5)
        # int_0^t (t - s)**(-1/2) s**2 ds = (16/15) t**(5/2)
        values = k.matrix @ t ** 2
        self.assertAlmostEqual(values[1], 16.0 / 15.0 * t[1] ** 2.5, delta=1e-14)

    def test_needs_three_steps(self):
        with self.assertRaises(DomainError):
            convolution_matrix(kernel_from_function(np.cos, TimeGrid(1.0, 2)))

    def test_rejects_strong_singularity(self):
        with self.assertRaises(DomainError):
            kernel_from_function(lambda u: 1.0 / u, TimeGrid(1.0, 8), singular_exponent=1.0)


class TestSecondKindEquation(unittest.TestCase):
    def test_constant_kernel(self):
        # phi = 1 + int_0^t phi  gives  exp(t)
        grid = TimeGrid(1.0, 256)
        k = kernel_from_function(lambda u: np.ones_like(u), grid)
        phi = volterra_apply(k, np.ones(257))
        np.testing.assert_allclose(phi, np.exp(grid.nodes), atol=1e-7)

    def test_resolvent_of_constant_kernel(self):
        lam = 0.5
        grid = TimeGrid(1.0, 256)
        r = resolvent_solve(kernel_from_function(lambda u: lam * np.ones_like(u), grid))
        np.testing.assert_allclose(r.values, lam * np.exp(lam * grid.nodes), atol=1e-7)

    def test_direct_and_resolvent_forms_agree(self):
        rng = np.random.default_rng(7)
        grid = TimeGrid(1.0, 512)
        for _ in range(3):
            kernel, datum = random_smooth_pair(rng)
            k = kernel_from_function(kernel, grid)
            f = datum(grid.nodes)
            direct = volterra_apply(k, f)
            via = resolvent_representation(resolvent_solve(k), f)
            self.assertLess(np.max(np.abs(direct - via)), 1e-8)

    def test_resolvent_of_negated_resolvent(self):
        grid = TimeGrid(1.0, 256)
        k = kernel_from_function(lambda u: 0.3 * np.cos(u), grid)
        back = resolvent_solve(resolvent_solve(k).scaled(-1.0))
        np.testing.assert_allclose(back.values, -k.values, atol=1e-7)

    def test_unit_diagonal_is_rejected(self):
        # W[1, 1] = c dt / 2 = 1
        grid = TimeGrid(1.0, 16)
        k = kernel_from_function(lambda u: 32.0 * np.ones_like(u), grid)
        with self.assertRaises(IllConditionedStepError):
            volterra_apply(k, np.ones(17))


class TestMemoryKernel(unittest.TestCase):
    def test_resolvent_is_power_law(self):
        alpha = 0.5
        grid = TimeGrid(1.0, 512)
        r = resolvent_solve(memory_kernel(alpha, grid))
        t = grid.nodes[10:]
        exact = t ** (-alpha) / gamma_fn(1.0 - alpha)
        self.assertLess(np.max(np.abs(r.values[10:] - exact) / exact), 5e-3)
        self.assertTrue(np.isnan(r.values[0]))

    def test_laplace_transform(self):
        for alpha in (0.3, 0.5, 0.7):
            k = memory_kernel(alpha, TimeGrid(10.0, 2048))
            for s in (2.0, 5.0, 10.0):
                K = laplace_of_samples(k, s)
                self.assertAlmostEqual(K * (s ** (1.0 - alpha) + 1.0), 1.0, delta=1e-4)
                # R = K + K R with R(s) = s**(alpha-1)
                self.assertAlmostEqual(K / (1.0 - K) * s ** (1.0 - alpha), 1.0, delta=1e-4)

    def test_laplace_transform_from_weights(self):
        grid = TimeGrid(10.0, 1024)
        k = kernel_from_function(lambda u: np.exp(-u), grid)
        s = 5.0
        exact = (1.0 - np.exp(-(s + 1.0) * grid.horizon)) / (s + 1.0)
        self.assertAlmostEqual(laplace_of_samples(k, s) / exact, 1.0, delta=1e-4)

    def test_resolvent_history_term(self):
        alpha = 0.4
        grid = TimeGrid(1.0, 256)
        t = grid.nodes
        r = kernel_from_function(lambda u: u ** (-alpha) / gamma_fn(1.0 - alpha), grid,
                                 singular_exponent=alpha,
                                 smooth=lambda u: np.full_like(u, 1.0 / gamma_fn(1.0 - alpha)),
                                 cumulative=lambda u: u ** (1.0 - alpha) / gamma_fn(2.0 - alpha))
        np.testing.assert_allclose(caputo_from_resolvent(r, t),
                                   t ** (1.0 - alpha) / gamma_fn(2.0 - alpha), atol=1e-12)
        quadratic = caputo_from_resolvent(r, t ** 2)
        self.assertLess(np.max(np.abs(quadratic - caputo_l1(alpha, t ** 2, grid))), 1e-3)

    def test_alpha_range(self):
        for alpha in (0.0, 1.0):
            with self.assertRaises(DomainError):
                memory_kernel(alpha, TimeGrid(1.0, 8))


if __name__ == '__main__':
    unittest.main()
