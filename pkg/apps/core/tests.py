import math

import numpy as np
from django.test import SimpleTestCase

from apps.core.exceptions import ConfigError, ExportError, GridError
from apps.core.grid import (
    ComputationalGrid,
    PeriodicScalarField,
    SymMat2,
    gradient_fd,
    hessian_fd,
    inv_helmholtz,
    torus_distance,
)

TWO_PI = 2.0 * math.pi


def field(n, func):
    return PeriodicScalarField.from_function(ComputationalGrid(n), func)


class ComputationalGridTests(SimpleTestCase):

    def test_minimum_size(self):
        with self.assertRaises(GridError):
            ComputationalGrid(7)
        self.assertEqual(ComputationalGrid(8).h, 0.125)

    def test_nodes_exclude_seam(self):
        xi, eta = ComputationalGrid(10).nodes()
        self.assertEqual(xi.shape, (10, 10))
        self.assertAlmostEqual(xi[9, 0], 0.9)
        self.assertAlmostEqual(eta[0, 9], 0.9)
        self.assertAlmostEqual(xi[3, 7], 0.3)

    def test_wrap(self):
        self.assertEqual(ComputationalGrid(8).wrap(9, -1), (1, 7))

    def test_field_rejects_non_finite_values(self):
        grid = ComputationalGrid(8)
        values = np.zeros(grid.shape)
        values[2, 3] = np.nan
        with self.assertRaises(GridError):
            PeriodicScalarField(grid, values)
        with self.assertRaises(GridError):
            PeriodicScalarField(grid, np.zeros((8, 9)))


class SymMat2Tests(SimpleTestCase):

    def test_from_matrix_rejects_asymmetry(self):
        with self.assertRaises(GridError):
            SymMat2.from_matrix([[1.0, 0.5], [0.4, 2.0]])
        m = SymMat2.from_matrix([[1.0, 0.5], [0.5 + 1e-12, 2.0]])
        self.assertEqual(m.a22, 2.0)

    def test_algebra_matches_numpy(self):
        rng = np.random.default_rng(3)
        a = SymMat2(*rng.normal(size=3))
        b = SymMat2(*rng.normal(size=3))
        A, B = a.as_matrix(), b.as_matrix()
        np.testing.assert_allclose(a.sandwich(b).as_matrix(), A @ B @ A, atol=1e-12)
        np.testing.assert_allclose(a.inverse().as_matrix(), np.linalg.inv(A), atol=1e-10)
        self.assertAlmostEqual(a.det(), np.linalg.det(A), places=12)

    def test_from_eigen(self):
        e1 = (1.0 / math.sqrt(2.0), 1.0 / math.sqrt(2.0))
        m = SymMat2.from_eigen(3.0 / 51.0, e1, 1.0)
        np.testing.assert_allclose(np.linalg.eigvalsh(m.as_matrix()), [3.0 / 51.0, 1.0], atol=1e-14)
        np.testing.assert_allclose(m.apply(e1), (3.0 / 51.0 * e1[0], 3.0 / 51.0 * e1[1]), atol=1e-15)


class FiniteDifferenceTests(SimpleTestCase):

    def test_constants_are_annihilated(self):
        f = field(16, lambda xi, eta: 3.5 + 0.0 * xi)
        self.assertLessEqual(np.abs(gradient_fd(f)).max(), 1e-12)
        H = hessian_fd(f)
        for component in H:
            self.assertLessEqual(np.abs(component).max(), 1e-12)

    def test_gradient_error_bound(self):
        n = 64
        f = field(n, lambda xi, eta: np.sin(TWO_PI * xi))
        xi, _ = ComputationalGrid(n).nodes()
        g = gradient_fd(f)
        error = np.abs(g[..., 0] - TWO_PI * np.cos(TWO_PI * xi)).max()
        self.assertLessEqual(error, TWO_PI ** 3 / (6.0 * n ** 2))
        self.assertLessEqual(np.abs(g[..., 1]).max(), 1e-12)

    def test_no_xi_dependence(self):
        g = gradient_fd(field(32, lambda xi, eta: np.sin(TWO_PI * eta)))
        self.assertLessEqual(np.abs(g[..., 0]).max(), 1e-12)

    def test_hessian_cross_term(self):
        n = 64
        h = 1.0 / n
        f = field(n, lambda xi, eta: np.cos(TWO_PI * xi) * np.cos(TWO_PI * eta))
        xi, eta = ComputationalGrid(n).nodes()
        H = hessian_fd(f)
        exact = TWO_PI ** 2 * np.sin(TWO_PI * xi) * np.sin(TWO_PI * eta)
        self.assertLessEqual(np.abs(H.a12 - exact).max(), TWO_PI ** 2 * (TWO_PI * h) ** 2 / 3.0 * 1.01)

    def test_hessian_of_one_dimensional_field(self):
        H = hessian_fd(field(32, lambda xi, eta: np.sin(TWO_PI * xi)))
        self.assertLessEqual(np.abs(H.a22).max(), 1e-10)
        self.assertLessEqual(np.abs(H.a12).max(), 1e-10)

    def test_second_order_convergence(self):
        def errors(n):
            f = field(n, lambda xi, eta: np.sin(TWO_PI * xi) * np.sin(TWO_PI * eta))
            xi, eta = ComputationalGrid(n).nodes()
            g = gradient_fd(f)
            H = hessian_fd(f)
            d_xi = TWO_PI * np.cos(TWO_PI * xi) * np.sin(TWO_PI * eta)
            f_xx = -TWO_PI ** 2 * np.sin(TWO_PI * xi) * np.sin(TWO_PI * eta)
            return np.abs(g[..., 0] - d_xi).max(), np.abs(H.a11 - f_xx).max()

        coarse, fine = errors(32), errors(64)
        for c, f in zip(coarse, fine):
            self.assertAlmostEqual(c / f, 4.0, delta=0.6)


class HelmholtzTests(SimpleTestCase):

    def test_gamma_zero_is_identity(self):
        f = field(16, lambda xi, eta: np.sin(TWO_PI * xi) + eta ** 0)
        np.testing.assert_array_equal(inv_helmholtz(f, 0.0).values, f.values)

    def test_constants_are_preserved(self):
        u = inv_helmholtz(field(16, lambda xi, eta: 2.0 + 0.0 * xi), 0.3)
        np.testing.assert_allclose(u.values, 2.0, atol=1e-13)

    def test_single_mode(self):
        gamma = 0.1
        f = field(32, lambda xi, eta: np.cos(TWO_PI * xi))
        u = inv_helmholtz(f, gamma)
        np.testing.assert_allclose(u.values, f.values / (1.0 + 4.0 * math.pi ** 2 * gamma), atol=1e-13)

    def test_linearity(self):
        rng = np.random.default_rng(0)
        grid = ComputationalGrid(16)
        f = PeriodicScalarField(grid, rng.normal(size=grid.shape))
        g = PeriodicScalarField(grid, rng.normal(size=grid.shape))
        combined = inv_helmholtz(f.with_values(2.0 * f.values - 3.0 * g.values), 0.2).values
        separate = 2.0 * inv_helmholtz(f, 0.2).values - 3.0 * inv_helmholtz(g, 0.2).values
        scale = np.abs(f.values).max() + np.abs(g.values).max()
        self.assertLessEqual(np.abs(combined - separate).max(), 1e-12 * scale)

    def test_negative_gamma(self):
        with self.assertRaises(GridError):
            inv_helmholtz(np.zeros((8, 8)), -1.0)

    def test_accepts_plain_arrays(self):
        u = inv_helmholtz(np.ones((8, 8)), 0.5)
        self.assertIsInstance(u, np.ndarray)


class TorusTests(SimpleTestCase):

    def test_distance_wraps(self):
        self.assertAlmostEqual(float(torus_distance((0.95, 0.0), (0.05, 0.0))), 0.1)
        self.assertAlmostEqual(float(torus_distance((0.2, 1.9), (0.2, 0.0))), 0.1)


class ExceptionTests(SimpleTestCase):

    def test_config_error_carries_field(self):
        exc = ConfigError("precisa ser positivo", field='dt')
        self.assertEqual(str(exc), "dt: precisa ser positivo")
        self.assertEqual(exc.reason, "precisa ser positivo")

    def test_export_error_carries_path(self):
        exc = ExportError("falha ao gravar", path='out/mesh.csv')
        self.assertEqual(str(exc), "out/mesh.csv: falha ao gravar")
