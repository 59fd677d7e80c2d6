#!/usr/bin/python3
import math
import unittest

import numpy as np

from frnet.metrics import GazeAngles, GazeVector, angles_to_vector, angular_error, mean_angular_error


class TestGaze(unittest.TestCase):
    """
    Gaze vector conventions and the angular error.
    """

    def test_conventions(self):
        np.testing.assert_allclose(np.asarray(angles_to_vector(GazeAngles(0., 0.))), [0., 0., -1.])
        np.testing.assert_allclose(np.asarray(angles_to_vector(GazeAngles(math.pi / 2, 0.))),
                                   [0., -1., 0.], atol=1e-15)
        rng = np.random.default_rng(0)
        for _ in range(100):
            a = GazeAngles(rng.uniform(-math.pi / 2, math.pi / 2), rng.uniform(-math.pi, math.pi))
            self.assertAlmostEqual(angles_to_vector(a).norm, 1., delta=1e-12)

    def test_range_checks(self):
        with self.assertRaises(ValueError):
            angles_to_vector(GazeAngles(2., 0.))
        with self.assertRaises(ValueError):
            angles_to_vector(GazeAngles(0., -math.pi))
        a = GazeAngles.canonical(pitch=3., yaw=3 * math.pi / 2)
        self.assertEqual(a.pitch, math.pi / 2)
        self.assertAlmostEqual(a.yaw, -math.pi / 2)

    def test_angular_error(self):
        g = GazeVector(0., 0., -1.)
        self.assertEqual(angular_error(g, g), 0.)
        self.assertAlmostEqual(angular_error(GazeVector(1., 0., 0.), GazeVector(0., 1., 0.)), 90.)
        self.assertAlmostEqual(angular_error(g, angles_to_vector(GazeAngles(0., 0.1))), 5.729578, places=5)
        # antiparallel vectors hit the clamp
        self.assertEqual(angular_error([1e-3, 2., 3.], [-1e-3, -2., -3.]), 180.)
        with self.assertRaises(ValueError):
            angular_error([0., 0., 0.], g)

    def test_symmetry_and_scale(self):
        rng = np.random.default_rng(1)
        for _ in range(50):
            u, v = rng.standard_normal(3), rng.standard_normal(3)
            self.assertEqual(angular_error(u, v), angular_error(v, u))
            self.assertAlmostEqual(angular_error(7.5 * u, v), angular_error(u, v), delta=1e-10)

    def test_mean_angular_error(self):
        a = [GazeAngles(0.1, -0.2), GazeAngles(-0.3, 0.4)]
        self.assertEqual(mean_angular_error(a, a), 0.)
        b = [GazeAngles(0., 0.)]
        c = [GazeAngles(0., math.radians(10.))]
        self.assertAlmostEqual(mean_angular_error(b, c),
                               angular_error(angles_to_vector(b[0]), angles_to_vector(c[0])))
        pred = [GazeAngles(0., 0.), GazeAngles(0., 0.)]
        true = [GazeAngles(0., math.radians(10.)), GazeAngles(math.radians(20.), 0.)]
        self.assertAlmostEqual(mean_angular_error(pred, true), 15., places=10)
        with self.assertRaises(ValueError):
            mean_angular_error(pred, true[:1])
