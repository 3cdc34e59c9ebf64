import unittest

import numpy as np

from roughsurf.forward import (adjoint_blocks, combined_kernel, hypersingular_kernel, kernel_blocks, kernel_K, kernel_K1,
                               kernel_K2, kernel_K3, kress_weights, single_layer_blocks)
from roughsurf.geometry import ClosedFormProfile, build_mesh, curve_nodes
from roughsurf.specfun import hankel1
from roughsurf.utils.errors import CoincidentPointsError


class TestKernels(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.mesh = build_mesh(ClosedFormProfile('example1'), 32)

    def test_combined_kernel_by_definition(self):
        k, eta = 2.0, 1.5
        i, j = 5, 40
        x, y = self.mesh.points[i], self.mesh.points[j]
        r = np.linalg.norm(x - y)
        nu = self.mesh.normals[j]
        expected = (0.25j * k * hankel1(1, k * r) * nu @ (x - y) / r - 1j * eta * 0.25j * hankel1(0, k * r))
        expected *= self.mesh.speeds[j]
        self.assertAlmostEqual(expected, kernel_K(self.mesh, k, eta, i, j), delta=1e-14)

    def test_splitting(self):
        k, eta = 3.0, 3.0
        for i, j in [(3, 17), (10, 50), (45, 60)]:
            tau = self.mesh.params[i] - self.mesh.params[j]
            log_factor = np.log(4 * np.sin(tau / 2) ** 2)
            full = kernel_K(self.mesh, k, eta, i, j)
            split = kernel_K1(self.mesh, k, eta, i, j) * log_factor + kernel_K2(self.mesh, k, eta, i, j)
            self.assertAlmostEqual(full, split, delta=1e-12)

    def test_k1_diagonal(self):
        k, eta = 2.0, 0.7
        for i in (7, 48):
            expected = 1j * eta * self.mesh.speeds[i] / (4 * np.pi)
            self.assertAlmostEqual(expected, kernel_K1(self.mesh, k, eta, i, i), delta=1e-15)

    def test_k2_diagonal_matches_two_sided_limit(self):
        k, eta = 2.0, 2.0
        eps = 1e-4
        for j in (9, 16, 24, 40, 52):
            t = self.mesh.params[j]
            targets = curve_nodes(self.mesh.profile, [t - eps, t + eps])
            _, k2, _ = kernel_blocks(targets, self.mesh, k, eta)
            limit = 0.5 * (k2[0, j] + k2[1, j])
            diagonal = kernel_K2(self.mesh, k, eta, j, j)
            self.assertLess(abs(limit - diagonal), 1e-6 * max(1.0, abs(diagonal)), msg=f'node {j}')

    def test_corner_columns_vanish(self):
        k1, k2, k3 = kernel_blocks(self.mesh.nodes, self.mesh, 1.0, 1.0)
        for block in (k1, k2, k3):
            self.assertTrue(np.all(block[:, [0, self.mesh.n]] == 0))

    def test_reflected_kernel_only_on_arc(self):
        _, _, k3 = kernel_blocks(self.mesh.nodes, self.mesh, 1.0, 1.0)
        self.assertTrue(np.all(k3[:self.mesh.n + 1] == 0))
        self.assertTrue(np.all(k3[self.mesh.arc_indices][:, self.mesh.quadrature_indices] != 0))

    def test_reflected_kernel_by_definition(self):
        k, eta = 1.0, 0.5
        i, j = 40, 12
        x = self.mesh.points[i] * np.array([1.0, -1.0])
        y = self.mesh.points[j]
        r = np.linalg.norm(x - y)
        expected = (0.25j * k * hankel1(1, k * r) * self.mesh.normals[j] @ (x - y) / r
                    + 0.25 * eta * hankel1(0, k * r)) * self.mesh.speeds[j]
        self.assertAlmostEqual(expected, kernel_K3(self.mesh, k, eta, i, j), delta=1e-14)

    def test_errors(self):
        with self.assertRaises(CoincidentPointsError):
            kernel_K(self.mesh, 1.0, 0.0, 5, 5)
        with self.assertRaises(ValueError):
            kernel_K(self.mesh, 1.0, 0.0, 5, 0)
        with self.assertRaises(ValueError):
            kernel_K1(self.mesh, 1.0, 0.0, 5, self.mesh.n)
        with self.assertRaises(ValueError):
            kernel_K3(self.mesh, 1.0, 0.0, 5, 40)

    def test_weights_times_k1_reproduce_log_integral(self):
        # flat profile, eta = 0: K1 reduces to the double layer part, which vanishes on the axis
        mesh = build_mesh(ClosedFormProfile('flat'), 16)
        targets = curve_nodes(mesh.profile, [0.7])
        k1, _, _ = kernel_blocks(targets, mesh, 1.0, 0.0)
        weights = kress_weights(mesh.n, targets.params[:, None] - mesh.params[None, :])
        np.testing.assert_allclose((weights * k1)[0, mesh.flat_indices], 0.0, atol=1e-15)


class TestLayerBlocks(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.mesh = build_mesh(ClosedFormProfile('example1'), 32)
        cls.k = 2.0

    def _assert_split(self, blocks, definition):
        rows = [3, 10, 45]
        targets = curve_nodes(self.mesh.profile, self.mesh.params[rows])
        first, second = blocks(targets, self.mesh, self.k)
        for row, i in enumerate(rows):
            for j in (17, 50, 60):
                tau = self.mesh.params[i] - self.mesh.params[j]
                split = first[row, j] * np.log(4 * np.sin(tau / 2) ** 2) + second[row, j]
                self.assertAlmostEqual(definition(i, j), split, delta=1e-12, msg=f'({i}, {j})')

    def _assert_diagonal_limit(self, blocks):
        eps = 1e-4
        for j in (9, 24, 40):
            t = self.mesh.params[j]
            _, near = blocks(curve_nodes(self.mesh.profile, [t - eps, t + eps]), self.mesh, self.k)
            _, diagonal = blocks(curve_nodes(self.mesh.profile, [t]), self.mesh, self.k)
            limit = 0.5 * (near[0, j] + near[1, j])
            self.assertLess(abs(limit - diagonal[0, j]), 1e-6 * max(1.0, abs(diagonal[0, j])), msg=f'node {j}')

    def _distance(self, i, j):
        return np.linalg.norm(self.mesh.points[i] - self.mesh.points[j])

    def test_single_layer_split(self):
        def definition(i, j):
            return 0.25j * hankel1(0, self.k * self._distance(i, j)) * self.mesh.speeds[j]

        self._assert_split(single_layer_blocks, definition)

    def test_adjoint_split(self):
        def definition(i, j):
            r = self._distance(i, j)
            dot = self.mesh.normals[i] @ (self.mesh.points[i] - self.mesh.points[j])
            return -0.25j * self.k * hankel1(1, self.k * r) * dot / r * self.mesh.speeds[j]

        self._assert_split(adjoint_blocks, definition)

    def test_diagonal_limits(self):
        self._assert_diagonal_limit(single_layer_blocks)
        self._assert_diagonal_limit(adjoint_blocks)

    def test_single_layer_log_coefficient_on_diagonal(self):
        s1, _ = single_layer_blocks(self.mesh.nodes, self.mesh, self.k)
        diagonal = np.diag(s1)[self.mesh.quadrature_indices]
        np.testing.assert_allclose(diagonal, -self.mesh.speeds[self.mesh.quadrature_indices] / (4 * np.pi))
        np.testing.assert_array_equal(s1[:, [0, self.mesh.n]], 0)

    def test_hypersingular_kernel_is_the_normal_derivative_of_the_double_layer(self):
        i = 6
        point, normal = self.mesh.points[i], self.mesh.normals[i]
        arc = self.mesh.arc_indices
        h = 1e-5
        plus = combined_kernel(point + h * normal, self.mesh, self.k, 0.0)
        minus = combined_kernel(point - h * normal, self.mesh, self.k, 0.0)
        difference = (plus - minus)[0, arc] / (2 * h)
        kernel = hypersingular_kernel(point, normal, self.mesh, self.k, columns=arc)
        np.testing.assert_allclose(kernel[0, arc], difference, rtol=1e-5, atol=1e-8)
        self.assertTrue(np.all(kernel[0, self.mesh.flat_indices] == 0))

    def test_hypersingular_kernel_rejects_nodes(self):
        with self.assertRaises(CoincidentPointsError):
            hypersingular_kernel(self.mesh.points[6], self.mesh.normals[6], self.mesh, self.k)


if __name__ == '__main__':
    unittest.main()
