import unittest
from unittest import mock

import numpy as np

from roughsurf.forward import (Density, IncidentWave, assemble, nystrom_interpolate, operator_rows, rhs, solve,
                               solve_scattering)
from roughsurf.geometry import ClosedFormProfile, build_mesh
from roughsurf.utils.errors import SingularSystemError


class TestIncidentWave(unittest.TestCase):

    def test_direction(self):
        sut = IncidentWave(2.0, np.pi / 5)
        self.assertAlmostEqual(1.0, np.linalg.norm(sut.direction), delta=1e-15)
        self.assertLess(sut.direction[1], 0)

    def test_validation(self):
        with self.assertRaises(ValueError):
            IncidentWave(0.0, 0.0)
        with self.assertRaises(ValueError):
            IncidentWave(1.0, np.pi / 2)
        with self.assertRaises(ValueError):
            IncidentWave(1.0, -2.0)

    def test_total_field_vanishes_on_axis(self):
        sut = IncidentWave(3.0, 0.4)
        points = np.column_stack([np.linspace(-5, 5, 11), np.zeros(11)])
        np.testing.assert_allclose(sut.total_field(points), 0.0, atol=1e-15)

    def test_gradient_against_differences(self):
        sut = IncidentWave(2.0, -0.3)
        point = np.array([0.3, -0.2])
        eps = 1e-6
        gradient = sut.total_field_gradient(point)
        for axis in range(2):
            step = np.zeros(2)
            step[axis] = eps
            difference = (sut.total_field(point + step) - sut.total_field(point - step)) / (2 * eps)
            self.assertAlmostEqual(difference, gradient[axis], delta=1e-8)


class TestRhs(unittest.TestCase):

    def test_flat_profile(self):
        mesh = build_mesh(ClosedFormProfile('flat'), 16)
        np.testing.assert_array_equal(rhs(mesh, IncidentWave(2.0, 0.3)), 0)

    def test_normal_incidence(self):
        mesh = build_mesh(ClosedFormProfile('example1'), 16)
        k = 1.7
        g = rhs(mesh, IncidentWave(k, 0.0))
        heights = mesh.points[mesh.flat_indices, 1]
        np.testing.assert_allclose(g[mesh.flat_indices], 4j * np.sin(k * heights), atol=1e-14)
        np.testing.assert_array_equal(g[mesh.arc_indices], 0)
        np.testing.assert_array_equal(g[mesh.corner_indices], 0)


class TestAssemble(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.mesh = build_mesh(ClosedFormProfile('example1'), 64)
        cls.system = assemble(cls.mesh, 1.0, 1.0)

    def test_structure(self):
        n = self.mesh.n
        matrix = self.system.matrix
        self.assertEqual((2 * n, 2 * n), matrix.shape)
        for corner in (0, n):
            column = np.delete(matrix[:, corner], corner)
            np.testing.assert_array_equal(column, 0)
            self.assertEqual(0.5, matrix[corner, corner])
        self.assertTrue(np.isfinite(self.system.condition_number))

    def test_backward_error(self):
        g = rhs(self.mesh, IncidentWave(1.0, np.pi / 6))
        phi = solve(self.system, g).values
        residual = np.linalg.norm(self.system.matrix @ phi - g) / np.linalg.norm(g)
        self.assertLess(residual, 1e-12)

    def test_linearity_and_multiple_right_hand_sides(self):
        g1 = rhs(self.mesh, IncidentWave(1.0, 0.2))
        g2 = rhs(self.mesh, IncidentWave(1.0, -0.5))
        phi1 = solve(self.system, g1).values
        phi2 = solve(self.system, g2).values
        np.testing.assert_allclose(solve(self.system, (2 - 1j) * g1).values, (2 - 1j) * phi1, rtol=1e-12)
        both = self.system.solve(np.column_stack([g1, g2]))
        np.testing.assert_allclose(both[:, 0], phi1, rtol=1e-12)
        np.testing.assert_allclose(both[:, 1], phi2, rtol=1e-12)
        np.testing.assert_array_equal(solve(self.system, np.zeros(self.mesh.size)).values, 0)

    def test_rows_restrict_to_matrix(self):
        coefficient, rows = operator_rows(self.mesh.nodes, self.mesh, 1.0, 1.0)
        np.testing.assert_allclose(rows + np.diag(coefficient), self.system.matrix, atol=1e-15)

    def test_refined_rows_on_lattice(self):
        fine = self.mesh.refine(2)
        direct = operator_rows(fine.nodes, self.mesh, 1.0, 1.0)[1]
        lattice = operator_rows(fine.nodes, self.mesh, 1.0, 1.0, refinement=2)[1]
        np.testing.assert_allclose(lattice, direct, atol=1e-12)

    def test_nystrom_interpolation_reproduces_nodes(self):
        density = solve_scattering(self.system, IncidentWave(1.0, 0.4))
        values = nystrom_interpolate(self.mesh, density, 1.0, 1.0, self.mesh.params)
        np.testing.assert_allclose(values, density.values, rtol=1e-10, atol=1e-12)

    def test_nystrom_interpolation_needs_incident(self):
        with self.assertRaises(ValueError):
            nystrom_interpolate(self.mesh, Density(np.zeros(self.mesh.size)), 1.0, 1.0, [0.5])

    def test_solve_scattering_checks_wavenumber(self):
        with self.assertRaises(ValueError):
            solve_scattering(self.system, IncidentWave(2.0, 0.0))


class TestFlatNull(unittest.TestCase):

    def test_density_vanishes(self):
        mesh = build_mesh(ClosedFormProfile('flat'), 32)
        for k, eta in [(1.0, 0.0), (3.0, 3.0)]:
            density = solve_scattering(assemble(mesh, k, eta), IncidentWave(k, 0.3))
            np.testing.assert_array_equal(density.values, 0)


class TestSingularSystem(unittest.TestCase):

    def test_threshold(self):
        mesh = build_mesh(ClosedFormProfile('example2'), 16)
        with self.assertRaises(SingularSystemError) as context:
            assemble(mesh, 2.0, 0.0, rcond_threshold=1.0)
        self.assertEqual(2.0, context.exception.k)
        self.assertEqual(0.0, context.exception.eta)
        self.assertLess(context.exception.rcond, 1.0)

    def test_zero_pivot(self):
        mesh = build_mesh(ClosedFormProfile('flat'), 8)
        zeros = (np.zeros(mesh.size), np.zeros((mesh.size, mesh.size), dtype=np.complex128))
        with mock.patch('roughsurf.forward.system.operator_rows', return_value=zeros):
            with self.assertRaises(SingularSystemError) as context:
                assemble(mesh, 1.0, 0.0)
        self.assertEqual(0.0, context.exception.rcond)

    def test_wavenumber(self):
        with self.assertRaises(ValueError):
            assemble(build_mesh(ClosedFormProfile('flat'), 8), 0.0, 0.0)


if __name__ == '__main__':
    unittest.main()
