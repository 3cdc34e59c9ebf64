import unittest

import numpy as np

from roughsurf.specfun import bessel_j, bessel_y, hankel1
from roughsurf.utils import DomainError


def _j0_series(z: float, terms: int = 60) -> float:
    """Ascending series of J0, summed to convergence for moderate z"""
    total, term = 0.0, 1.0
    for m in range(terms):
        if m > 0:
            term *= -(z / 2) ** 2 / m ** 2
        total += term
    return total


class TestBesselJ(unittest.TestCase):

    def test_values_at_origin(self):
        self.assertEqual(1.0, bessel_j(0, 0.0))
        self.assertEqual(0.0, bessel_j(1, 0.0))

    def test_first_root_of_j0(self):
        self.assertLess(abs(bessel_j(0, 2.404825557695773)), 1e-12)

    def test_matches_series(self):
        for z in [0.1, 1.0, 3.7, 8.0]:
            self.assertAlmostEqual(_j0_series(z), bessel_j(0, z), delta=1e-13)

    def test_derivative_identity(self):
        """J0'(z) = -J1(z) checked with central differences"""
        for z in [0.5, 2.0, 10.0, 120.0]:
            step = 1e-6 * max(1.0, z)
            derivative = (bessel_j(0, z + step) - bessel_j(0, z - step)) / (2 * step)
            self.assertLess(abs(derivative + bessel_j(1, z)), 1e-6 * max(abs(bessel_j(1, z)), 1e-3))

    def test_array_input(self):
        values = bessel_j(0, np.array([0.0, 1.0]))
        self.assertEqual((2,), values.shape)

    def test_domain_errors(self):
        with self.assertRaises(DomainError):
            bessel_j(0, -1.0)
        with self.assertRaises(DomainError):
            bessel_j(0, np.inf)
        with self.assertRaises(DomainError):
            bessel_j(2, 1.0)


class TestBesselY(unittest.TestCase):

    def test_reference_values(self):
        self.assertAlmostEqual(0.08825696421567696, bessel_y(0, 1.0), delta=1e-12)
        self.assertAlmostEqual(-0.7812128213002887, bessel_y(1, 1.0), delta=1e-12)

    def test_logarithmic_structure_near_zero(self):
        for z in [1e-3, 1e-5, 1e-8]:
            remainder = bessel_y(0, z) - 2 / np.pi * np.log(z / 2) * bessel_j(0, z)
            self.assertLess(abs(remainder), 1.0)

    def test_wronskian(self):
        z = np.geomspace(0.01, 1000, 200)
        wronskian = bessel_j(1, z) * bessel_y(0, z) - bessel_j(0, z) * bessel_y(1, z)
        np.testing.assert_allclose(wronskian, 2 / (np.pi * z), rtol=1e-10)

    def test_continuity_across_rational_approximation_switch(self):
        """Cephes switches from rational approximations to asymptotics at z = 5"""
        for order in (0, 1):
            left = bessel_y(order, 5.0)
            right = bessel_y(order, np.nextafter(5.0, 10.0))
            self.assertLess(abs(left - right), 1e-12)
            left = bessel_j(order, 5.0)
            right = bessel_j(order, np.nextafter(5.0, 10.0))
            self.assertLess(abs(left - right), 1e-12)

    def test_domain_errors(self):
        with self.assertRaises(DomainError):
            bessel_y(0, 0.0)
        with self.assertRaises(DomainError):
            bessel_y(1, -2.0)


class TestHankel1(unittest.TestCase):

    def test_reference_values(self):
        value = hankel1(0, 1.0)
        self.assertAlmostEqual(0.7651976865579666, value.real, delta=1e-12)
        self.assertAlmostEqual(0.08825696421567696, value.imag, delta=1e-12)
        value = hankel1(1, 1.0)
        self.assertAlmostEqual(0.4400505857449335, value.real, delta=1e-12)
        self.assertAlmostEqual(-0.7812128213002887, value.imag, delta=1e-12)

    def test_large_argument_magnitude(self):
        expected = np.sqrt(2 / (np.pi * 100.0))
        self.assertLess(abs(abs(hankel1(0, 100.0)) - expected) / expected, 1e-2)

    def test_domain_error_propagates(self):
        with self.assertRaises(DomainError):
            hankel1(0, 0.0)


if __name__ == '__main__':
    unittest.main()
