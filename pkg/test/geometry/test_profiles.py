import unittest

import numpy as np

from roughsurf.geometry import ClosedFormProfile, SplineProfile, cardinal_bspline


class TestCardinalBspline(unittest.TestCase):

    def test_value_at_centre(self):
        self.assertAlmostEqual(115 / 192, float(cardinal_bspline(0.0, 4)), delta=1e-15)

    def test_vanishes_at_support_ends(self):
        for kappa in (1, 2, 3, 4):
            half_width = (kappa + 1) / 2
            self.assertEqual(0.0, float(cardinal_bspline(half_width, kappa)))
            self.assertEqual(0.0, float(cardinal_bspline(-half_width, kappa)))
            self.assertEqual(0.0, float(cardinal_bspline(half_width + 3.2, kappa)))

    def test_partition_of_unity(self):
        t = np.linspace(-3, 3, 61)
        for kappa in (1, 2, 3, 4):
            shifts = np.arange(-10, 11)
            total = cardinal_bspline(t[:, None] - shifts[None, :], kappa).sum(axis=1)
            np.testing.assert_allclose(total, 1.0, atol=1e-13)

    def test_derivatives_match_finite_differences(self):
        t = np.linspace(-2.4, 2.4, 37)
        step = 1e-6
        first = cardinal_bspline(t, 4, derivative=1)
        second = cardinal_bspline(t, 4, derivative=2)
        np.testing.assert_allclose(
            (cardinal_bspline(t + step, 4) - cardinal_bspline(t - step, 4)) / (2 * step), first, atol=1e-8)
        np.testing.assert_allclose(
            (cardinal_bspline(t + step, 4, 1) - cardinal_bspline(t - step, 4, 1)) / (2 * step), second, atol=1e-7)

    def test_invalid_arguments(self):
        with self.assertRaises(ValueError):
            cardinal_bspline(0.0, 0)
        with self.assertRaises(ValueError):
            cardinal_bspline(0.0, 2, derivative=3)


class TestClosedFormProfile(unittest.TestCase):

    def test_flat(self):
        h, dh, d2h = ClosedFormProfile('flat').evaluate(np.linspace(-1, 1, 11))
        self.assertEqual(0.0, np.max(np.abs(np.concatenate([h, dh, d2h]))))

    def test_example_profiles_supported_inside_radius(self):
        for name in ('example1', 'example2', 'example3', 'example4'):
            ClosedFormProfile(name).check_support()

    def test_example1_matches_definition(self):
        sut = ClosedFormProfile('example1')
        x1 = np.linspace(-1, 1, 21)
        np.testing.assert_allclose(sut(x1), cardinal_bspline((x1 + 0.2) / 0.3, 4), atol=1e-15)

    def test_example3_matches_definition(self):
        sut = ClosedFormProfile('example3')
        x1 = np.linspace(-0.79, 0.79, 21)
        expected = np.exp(16 / (25 * x1 ** 2 - 16)) * np.sin(4 * np.pi * x1)
        np.testing.assert_allclose(sut(x1), expected, atol=1e-14)
        self.assertEqual(0.0, float(sut(np.array(0.85))))

    def test_params_override_named_profile(self):
        sut = ClosedFormProfile('example4', {'amplitude': 0.0})
        x1 = np.linspace(-0.7, 0.7, 15)
        np.testing.assert_allclose(sut(x1), sut(-x1), atol=1e-15)

    def test_derivatives_match_finite_differences(self):
        x1 = np.linspace(-0.78, 0.78, 31)
        step = 1e-6
        for name in ('example2', 'example4'):
            sut = ClosedFormProfile(name)
            h, dh, d2h = sut.evaluate(x1)
            plus, d_plus, _ = sut.evaluate(x1 + step)
            minus, d_minus, _ = sut.evaluate(x1 - step)
            np.testing.assert_allclose((plus - minus) / (2 * step), dh, atol=1e-6 * max(1, np.max(np.abs(dh))))
            np.testing.assert_allclose((d_plus - d_minus) / (2 * step), d2h, atol=1e-5 * max(1, np.max(np.abs(d2h))))

    def test_unknown_name(self):
        with self.assertRaises(ValueError):
            ClosedFormProfile('mountain')

    def test_support_violation_detected(self):
        sut = ClosedFormProfile('spline_bump', {'center': 0.9, 'width': 0.3})
        with self.assertRaises(ValueError):
            sut.check_support()


class TestSplineProfile(unittest.TestCase):

    def test_matches_direct_summation(self):
        centers = np.array([-0.5, 0.0, 0.5])
        coefficients = np.array([0.2, -0.1, 0.3])
        sut = SplineProfile(centers, 0.25, coefficients)
        x1 = np.random.default_rng(3).uniform(-1, 1, 100)
        expected = sum(a * cardinal_bspline((x1 - c) / 0.25, 4) for a, c in zip(coefficients, centers))
        np.testing.assert_allclose(sut(x1), expected, atol=1e-14)

    def test_base_profile_is_added(self):
        base = ClosedFormProfile('example1')
        sut = SplineProfile([0.0], 0.2, [0.5], base=base)
        x1 = np.linspace(-1, 1, 9)
        np.testing.assert_allclose(sut(x1), base(x1) + 0.5 * cardinal_bspline(x1 / 0.2, 4), atol=1e-15)

    def test_length_mismatch(self):
        with self.assertRaises(ValueError):
            SplineProfile([0.0, 0.1], 0.2, [1.0])

    def test_repr_is_reproducible(self):
        first = SplineProfile([0.0, 0.5], 0.2, [0.5, -0.25], base=ClosedFormProfile('flat'))
        second = SplineProfile([0.0, 0.5], 0.2, [0.5, -0.25], base=ClosedFormProfile('flat'))
        self.assertEqual(repr(first), repr(second))
        self.assertIn('[0.5, -0.25]', repr(first))
        self.assertIn("ClosedFormProfile('flat'", repr(first))


if __name__ == '__main__':
    unittest.main()
