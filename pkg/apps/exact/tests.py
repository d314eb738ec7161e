import math

import numpy as np
from django.test import SimpleTestCase

from apps.core.exceptions import DensityError, TableError
from apps.core.grid import ComputationalGrid, torus_distance
from apps.density.densities import ShockTrain, Uniform
from apps.density.presets import example1, example2, example3, example4, shock_train_major, shock_train_minor
from apps.exact.solver import (
    build_R,
    build_separable,
    exact_jacobian,
    exact_jacobian_field,
    exact_lift,
    exact_map,
    exact_mesh,
    invert_R,
    monge_ampere_residual,
    table_length,
)
from apps.metric.tensors import eig_sym2

SQRT2 = math.sqrt(2.0)


class CumulativeTableTests(SimpleTestCase):

    def test_flat_train_is_identity(self):
        train = ShockTrain(amplitude=0.0, sharpness=1.0, direction=(1.0, 0.0), scale=1.0)
        table = build_R(train)
        self.assertLessEqual(np.abs(table.rs - table.xs).max(), 1e-12)
        self.assertEqual(table.rs[0], 0.0)

    def test_diagonal_period(self):
        self.assertAlmostEqual(table_length(shock_train_major()), SQRT2, delta=1e-15)

    def test_total_mass_example1(self):
        table = build_R(shock_train_major())
        self.assertEqual(table.count, 1000)
        self.assertAlmostEqual(table.rs[-1], 3.0 * SQRT2, delta=1e-8)
        self.assertTrue(np.all(np.diff(table.rs) > 0))

    def test_total_mass_example2(self):
        table = build_R(shock_train_minor())
        self.assertAlmostEqual(table.rs[-1], 1.8 * SQRT2, delta=1e-8)

    def test_minimum_samples(self):
        with self.assertRaises(TableError):
            build_R(shock_train_major(), samples=999)


class InverseTests(SimpleTestCase):

    def test_identity_table(self):
        train = ShockTrain(amplitude=0.0, sharpness=1.0, direction=(1.0, 0.0), scale=1.0)
        inverse = invert_R(build_R(train))
        t = np.linspace(-0.7, 2.3, 301)
        self.assertLessEqual(np.abs(inverse(t) - t).max(), 1e-10)

    def test_round_trip(self):
        train = shock_train_major()
        inverse = invert_R(build_R(train))
        xp = np.random.default_rng(5).random(1000) * SQRT2
        self.assertLessEqual(np.abs(inverse(train.antiderivative(xp)) - xp).max(), 1e-7)

    def test_round_trip_outside_table(self):
        train = shock_train_minor()
        inverse = invert_R(build_R(train))
        xp = np.random.default_rng(6).random(200) * 6.0 - 3.0
        self.assertLessEqual(np.abs(inverse(train.antiderivative(xp)) - xp).max(), 1e-7)

    def test_half_mass_point(self):
        train = shock_train_major()
        inverse = invert_R(build_R(train))
        mid = 1.0 / (2.0 * SQRT2)
        self.assertAlmostEqual(float(inverse(train.antiderivative(mid))), mid, delta=1e-8)

    def test_rejects_non_monotone_table(self):
        table = build_R(shock_train_major())
        broken = table.__class__(table.train, table.length, table.xs, table.rs[::-1].copy())
        with self.assertRaises(TableError):
            invert_R(broken)


class SeparableSolutionTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.sol1 = build_separable(example1())
        cls.sol2 = build_separable(example2())

    def test_uniform_map_is_identity(self):
        sol = build_separable(Uniform())
        xi = np.random.default_rng(1).random((100, 2))
        self.assertLessEqual(np.abs(exact_map(sol, xi) - xi).max(), 1e-12)
        J = exact_jacobian(sol, xi)
        np.testing.assert_allclose(J.a11, 1.0, atol=1e-12)
        np.testing.assert_allclose(J.a12, 0.0, atol=1e-12)

    def test_origin_is_fixed(self):
        np.testing.assert_allclose(exact_map(self.sol1, np.array([0.0, 0.0])), [0.0, 0.0], atol=1e-14)

    def test_feature_jacobian_example1(self):
        pair = eig_sym2(exact_jacobian(self.sol1, np.array([0.0, 0.0])))
        self.assertAlmostEqual(pair.lam1, 3.0 / 51.0, delta=1e-10)
        self.assertAlmostEqual(pair.lam2, 1.0, delta=1e-10)
        self.assertAlmostEqual(abs(pair.e1[0] * self.sol1.e1[0] + pair.e1[1] * self.sol1.e1[1]), 1.0, delta=1e-12)

    def test_intersection_jacobian_example2(self):
        pair = eig_sym2(exact_jacobian(self.sol2, np.array([0.0, 0.0])))
        self.assertAlmostEqual(pair.lam1, 3.0 / 51.0, delta=1e-9)
        self.assertAlmostEqual(pair.lam2, 1.8 / 11.0, delta=1e-9)

    def test_monge_ampere_residual(self):
        for sol, spec in ((self.sol1, example1()), (self.sol2, example2())):
            residual = monge_ampere_residual(sol, spec, samples=10_000, rng=np.random.default_rng(0))
            self.assertLessEqual(residual, 1e-6)

    def test_double_periodicity(self):
        xi = np.random.default_rng(2).random((500, 2))
        for sol in (self.sol1, self.sol2):
            base = exact_map(sol, xi)
            for shift in ((1.0, 0.0), (0.0, 1.0)):
                self.assertLessEqual(torus_distance(exact_map(sol, xi + shift), base).max(), 1e-8)

    def test_jacobian_matches_finite_differences(self):
        eps = 1e-4
        xi = np.random.default_rng(4).random((50, 2))
        J = exact_jacobian(self.sol2, xi)
        d_xi = (exact_lift(self.sol2, xi + (eps, 0.0)) - exact_lift(self.sol2, xi - (eps, 0.0))) / (2 * eps)
        d_eta = (exact_lift(self.sol2, xi + (0.0, eps)) - exact_lift(self.sol2, xi - (0.0, eps))) / (2 * eps)
        self.assertLessEqual(np.abs(d_xi[:, 0] - J.a11).max(), 1e-4)
        self.assertLessEqual(np.abs(d_eta[:, 1] - J.a22).max(), 1e-4)
        self.assertLessEqual(np.abs(d_xi[:, 1] - J.a12).max(), 1e-4)

    def test_nodes_concentrate_on_shock_lines(self):
        grid = ComputationalGrid(60)
        xp = exact_lift(self.sol1, grid.node_array()) @ np.array(self.sol1.e1)
        period = 1.0 / SQRT2
        distance = np.abs(xp - np.round(xp / period) * period)
        width = 1.0 / (50.0 * SQRT2)
        uniform_fraction = 2.0 * width / period
        self.assertGreaterEqual((distance < width).mean(), 10.0 * uniform_fraction)

    def test_mesh_and_jacobian_fields(self):
        grid = ComputationalGrid(16)
        lift = exact_mesh(self.sol1, grid)
        self.assertEqual(lift.shape, (16, 16, 2))
        J = exact_jacobian_field(self.sol1, grid)
        self.assertEqual(J.a11.shape, (16, 16))
        self.assertTrue(np.all(J.det() > 0))

    def test_non_separable_densities_are_rejected(self):
        for spec in (example3(), example4()):
            with self.assertRaises(DensityError):
                build_separable(spec)
