import unittest

import numpy as np

from roughsurf.frechet import Jacobian
from roughsurf.inversion import lm_step, stack_real


def _random_problem(rng: np.random.Generator, rows: int = 10, columns: int = 4, noise: float = 0.05):
    """A well-conditioned complex Jacobian and a residual that is mostly in its range"""
    matrix = rng.standard_normal((rows, columns)) + 1j * rng.standard_normal((rows, columns))
    residual = matrix @ rng.standard_normal(columns)
    residual += noise * np.linalg.norm(residual) * (rng.standard_normal(rows) + 1j * rng.standard_normal(rows)) / rows
    return matrix, residual


def _tikhonov(matrix, residual, beta):
    """Step and linearized residual from the regularized normal equations"""
    a, b = stack_real(matrix), stack_real(residual)
    step = np.linalg.solve(a.T @ a + beta * np.eye(a.shape[1]), -a.T @ b)
    return step, np.linalg.norm(a @ step + b)


def _bisect_beta(matrix, residual, rho):
    target = rho * np.linalg.norm(stack_real(residual))
    low, high = -60.0, 60.0
    for _ in range(200):
        middle = 0.5 * (low + high)
        if _tikhonov(matrix, residual, np.exp(middle))[1] > target:
            high = middle
        else:
            low = middle
    return np.exp(0.5 * (low + high))


class TestStackReal(unittest.TestCase):

    def test_layout(self):
        matrix = np.array([[1 + 2j, 3 - 1j]])
        np.testing.assert_array_equal([[1, 3], [2, -1]], stack_real(matrix))


class TestLMStep(unittest.TestCase):

    def test_discrepancy_against_bisection(self):
        rng = np.random.default_rng(2024)
        for _ in range(100):
            matrix, residual = _random_problem(rng)
            sut = lm_step(matrix, residual, 0.8)
            self.assertTrue(sut.attained)
            norm = np.linalg.norm(residual)
            step, achieved = _tikhonov(matrix, residual, sut.beta)
            self.assertLessEqual(abs(achieved - 0.8 * norm), 1e-8 * norm)
            np.testing.assert_allclose(sut.delta_a, step, rtol=1e-7, atol=1e-12)
            self.assertAlmostEqual(sut.target, 0.8 * norm, places=10)
            self.assertLess(abs(np.log(sut.beta / _bisect_beta(matrix, residual, 0.8))), 1e-6)

    def test_smaller_rho_means_weaker_regularization(self):
        matrix, residual = _random_problem(np.random.default_rng(3))
        betas = [lm_step(matrix, residual, rho).beta for rho in (0.9, 0.7, 0.5)]
        self.assertGreater(betas[0], betas[1])
        self.assertGreater(betas[1], betas[2])

    def test_accepts_jacobian(self):
        matrix, residual = _random_problem(np.random.default_rng(4))
        wrapped = Jacobian(matrix=matrix, k=1.0, thetas=np.array([0.0]), angles=np.linspace(0, np.pi, 10))
        np.testing.assert_array_equal(lm_step(matrix, residual, 0.8).delta_a,
                                      lm_step(wrapped, residual, 0.8).delta_a)

    def test_zero_residual(self):
        sut = lm_step(np.eye(3, dtype=complex), np.zeros(3), 0.8)
        np.testing.assert_array_equal(np.zeros(3), sut.delta_a)
        self.assertEqual(0.0, sut.beta)
        self.assertTrue(sut.attained)

    def test_unattainable_discrepancy(self):
        matrix = np.array([[1.0], [0.0]], dtype=complex)
        residual = np.array([0.0, 1.0], dtype=complex)
        with self.assertLogs('roughsurf.inversion', level='WARNING'):
            sut = lm_step(matrix, residual, 0.8)
        self.assertTrue(sut.unattainable)
        self.assertEqual(0.0, sut.beta)
        np.testing.assert_allclose(sut.delta_a, [0.0], atol=1e-15)

    def test_unattainable_gives_least_squares_step(self):
        matrix = np.array([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]], dtype=complex)
        residual = np.array([2.0, 1.0, 1.0j])
        with self.assertLogs('roughsurf.inversion', level='WARNING'):
            sut = lm_step(matrix, residual, 0.5)
        np.testing.assert_allclose(sut.delta_a, [-2.0, 0.0], atol=1e-14)
        self.assertAlmostEqual(np.sqrt(2), sut.linearized_residual, places=12)

    def test_invalid_arguments(self):
        matrix, residual = _random_problem(np.random.default_rng(5))
        for rho in (0.0, 1.0, 1.5):
            with self.assertRaises(ValueError):
                lm_step(matrix, residual, rho)
        with self.assertRaises(ValueError):
            lm_step(matrix, residual[:-1], 0.8)
        broken = matrix.copy()
        broken[0, 0] = np.nan
        with self.assertRaises(ValueError):
            lm_step(broken, residual, 0.8)


if __name__ == '__main__':
    unittest.main()
