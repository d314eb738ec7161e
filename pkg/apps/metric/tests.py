import math

import numpy as np
from django.test import SimpleTestCase

from apps.core.exceptions import NonPositiveMetric, SingularJacobian, ZeroGradient
from apps.core.grid import ComputationalGrid, SymMat2
from apps.density.presets import example1, example2
from apps.exact.solver import build_separable, exact_jacobian_field, exact_mesh
from apps.metric.analysis import _select, analyze_mesh, jacobian_from_lift, predicted_metric_field
from apps.metric.tensors import (
    alignment_angle,
    eig_sym2,
    ellipse_from_jacobian,
    matrix_abs,
    metric_from_jacobian,
    predicted_metric_arclength,
    predicted_metric_hessian,
    predicted_metric_levelset,
    predicted_metric_product,
    predicted_metric_single,
    qa,
    qs,
)

R = 1.0 / math.sqrt(2.0)
DIAGONAL = (R, R)


def feature_jacobian(lam1=3.0 / 51.0, lam2=1.0):
    return SymMat2.from_eigen(lam1, DIAGONAL, lam2)


class EigenTests(SimpleTestCase):

    def test_diagonal_pair(self):
        pair = eig_sym2(SymMat2(2.0, 1.0, 2.0))
        self.assertAlmostEqual(pair.lam1, 1.0, places=14)
        self.assertAlmostEqual(pair.lam2, 3.0, places=14)
        np.testing.assert_allclose(pair.e1, (R, -R), atol=1e-15)
        np.testing.assert_allclose(pair.e2, (R, R), atol=1e-15)

    def test_degenerate_basis(self):
        pair = eig_sym2(SymMat2(2.0, 0.0, 2.0))
        self.assertEqual(pair.e1, (1.0, 0.0))
        self.assertEqual(pair.e2, (0.0, 1.0))

    def test_reconstruction(self):
        rng = np.random.default_rng(7)
        m = SymMat2(*rng.normal(size=(3, 50)))
        back = eig_sym2(m).reconstruct()
        for original, rebuilt in zip(m, back):
            np.testing.assert_allclose(rebuilt, original, atol=1e-12)

    def test_matrix_abs(self):
        absm = matrix_abs(SymMat2(-2.0, 0.0, 3.0))
        np.testing.assert_allclose(absm, (2.0, 0.0, 3.0), atol=1e-15)


class MetricTests(SimpleTestCase):

    def test_metric_eigenvalues(self):
        pair = eig_sym2(metric_from_jacobian(feature_jacobian(), 3.0))
        self.assertAlmostEqual(pair.lam1, 3.0, delta=1e-9)
        self.assertAlmostEqual(pair.lam2, 867.0, delta=1e-7)
        np.testing.assert_allclose(pair.e2, DIAGONAL, atol=1e-12)

    def test_singular_jacobian(self):
        with self.assertRaises(SingularJacobian):
            metric_from_jacobian(SymMat2(1.0, 1.0, 1.0), 3.0)
        with self.assertRaises(SingularJacobian):
            qs(SymMat2(0.0, 0.0, 0.0))

    def test_qs_examples(self):
        self.assertAlmostEqual(qs(feature_jacobian()), 8.5294, delta=1e-4)
        self.assertAlmostEqual(qs(SymMat2(3.0, 0.0, 1.8)), 17.0 / 15.0, delta=1e-12)
        self.assertEqual(qs(SymMat2.identity()), 1.0)

    def test_qs_is_scale_invariant(self):
        J = feature_jacobian()
        self.assertAlmostEqual(qs(J.scaled(7.5)), qs(J), places=12)

    def test_qa_example(self):
        self.assertAlmostEqual(qa(SymMat2.identity(), SymMat2(1.0, 0.0, 4.0)), 1.25, places=14)

    def test_qa_of_induced_metric_is_one(self):
        rng = np.random.default_rng(42)
        lam = rng.uniform(0.05, 3.0, size=(2, 1000))
        angle = rng.uniform(0.0, math.pi, size=1000)
        J = SymMat2.from_eigen(lam[0], (np.cos(angle), np.sin(angle)), lam[1])
        theta = rng.uniform(0.5, 5.0, size=1000)
        values = qa(J, metric_from_jacobian(J, theta))
        self.assertLessEqual(np.abs(values - 1.0).max(), 1e-12)

    def test_qa_bounds(self):
        rng = np.random.default_rng(8)
        J = SymMat2.from_eigen(rng.uniform(0.1, 2.0, 200), DIAGONAL, rng.uniform(0.1, 2.0, 200))
        self.assertTrue(np.all(qs(J) >= 1.0 - 1e-14))
        self.assertTrue(np.all(qa(J, SymMat2.identity(200)) >= 1.0 - 1e-14))

    def test_qa_rejects_indefinite_metric(self):
        with self.assertRaises(NonPositiveMetric):
            qa(SymMat2.identity(), SymMat2(1.0, 0.0, -1.0))


class PredictedMetricTests(SimpleTestCase):

    def test_single(self):
        pair = eig_sym2(predicted_metric_single(51.0, 3.0, DIAGONAL))
        self.assertAlmostEqual(pair.lam1, 3.0, delta=1e-10)
        self.assertAlmostEqual(pair.lam2, 867.0, delta=1e-9)

    def test_product_at_intersection(self):
        pair = eig_sym2(predicted_metric_product(51.0, 11.0, 3.0, 1.8, DIAGONAL))
        self.assertAlmostEqual(pair.lam2, 1560.6, delta=1e-8)
        self.assertAlmostEqual(pair.lam1, 605.0 / 3.0, delta=1e-8)

    def test_levelset_needs_gradient(self):
        with self.assertRaises(ZeroGradient):
            predicted_metric_levelset(51.0, 3.0, (0.0, 0.0))
        pair = eig_sym2(predicted_metric_levelset(51.0, 3.0, (0.0, 2.0)))
        np.testing.assert_allclose(pair.e2, (0.0, 1.0), atol=1e-15)

    def test_flat_regions_fall_back_to_isotropic(self):
        np.testing.assert_allclose(predicted_metric_arclength(2.0, 1.5, (0.0, 0.0)), (1.5, 0.0, 1.5))
        np.testing.assert_allclose(predicted_metric_hessian(2.0, 1.5, (0.0, 0.0, 0.0)), (1.5, 0.0, 1.5))

    def test_arclength_is_stretched_along_gradient(self):
        M = predicted_metric_arclength(2.0, 1.0, (1.0, 0.0))
        np.testing.assert_allclose(M, (4.0, 0.0, 1.0), atol=1e-14)

    def test_field_on_uniform_background(self):
        spec = example1()
        M = predicted_metric_field(spec, np.array([[0.0, 0.0], [0.25, 0.25]]), 3.0)
        self.assertAlmostEqual(float(M.det()[0]), 867.0 * 3.0, delta=1e-6)
        self.assertAlmostEqual(float(M.det()[1]), 1.0, delta=1e-6)


class EllipseTests(SimpleTestCase):

    def test_feature_ellipse(self):
        record = ellipse_from_jacobian(feature_jacobian(), (0.0, 0.0), 1.0)
        self.assertAlmostEqual(record.a / record.b, 17.0, delta=1e-9)
        self.assertAlmostEqual(math.degrees(record.angle), -45.0, delta=1e-9)

    def test_background_ellipse(self):
        record = ellipse_from_jacobian(SymMat2.from_eigen(3.0, DIAGONAL, 1.8), (0.5, 0.5), 0.1)
        self.assertAlmostEqual(record.a / record.b, 5.0 / 3.0, delta=1e-12)
        self.assertAlmostEqual(record.a, 0.3, delta=1e-12)
        self.assertAlmostEqual(math.degrees(record.angle), 45.0, delta=1e-9)

    def test_rejects_folded_cells(self):
        with self.assertRaises(SingularJacobian):
            ellipse_from_jacobian(SymMat2(1.0, 2.0, 1.0), (0.0, 0.0), 1.0)

    def test_alignment(self):
        J = feature_jacobian()
        self.assertAlmostEqual(float(alignment_angle(J, (1.0, 1.0))), 0.0, delta=1e-6)
        self.assertAlmostEqual(float(alignment_angle(J, (1.0, 0.0))), 45.0, delta=1e-9)
        with self.assertRaises(ZeroGradient):
            alignment_angle(J, (0.0, 0.0))


class JacobianFromLiftTests(SimpleTestCase):

    def test_identity(self):
        grid = ComputationalGrid(16)
        J = jacobian_from_lift(grid.node_array())
        np.testing.assert_allclose(J.a11, 1.0, atol=1e-12)
        np.testing.assert_allclose(J.a12, 0.0, atol=1e-12)

    def test_smooth_gradient_map(self):
        n, amp = 64, 0.01
        grid = ComputationalGrid(n)
        xi, eta = grid.nodes()
        s, c = np.sin(2 * math.pi * xi), np.cos(2 * math.pi * xi)
        t, d = np.sin(2 * math.pi * eta), np.cos(2 * math.pi * eta)
        lift = grid.node_array() + amp * np.stack([c * t, s * d], axis=-1)
        J = jacobian_from_lift(lift)
        np.testing.assert_allclose(J.a11, 1.0 - 2 * math.pi * amp * s * t, atol=1e-3)
        np.testing.assert_allclose(J.a12, 2 * math.pi * amp * c * d, atol=1e-3)


class ExactAnisotropyTests(SimpleTestCase):

    @staticmethod
    def _report(spec, n=60):
        sol = build_separable(spec)
        grid = ComputationalGrid(n)
        return analyze_mesh(spec, exact_mesh(sol, grid), exact_jacobian_field(sol, grid), sol.theta, 'exact')

    def test_example1(self):
        report = self._report(example1())
        self.assertAlmostEqual(report.qs_feature, 8.529, delta=0.01)
        self.assertAlmostEqual(report.qs_background, 5.0 / 3.0, delta=0.005)
        self.assertLessEqual(abs(report.qa_max - 1.0), 1e-6)
        self.assertLessEqual(report.alignment['max_angle'], 1e-3)

    def test_example2_probes(self):
        report = self._report(example2())
        expected = {'first_feature': 15.31, 'second_feature': 9.19, 'intersection': 1.57, 'background': 1.13}
        for name, value in expected.items():
            with self.subTest(node=name):
                self.assertAlmostEqual(report.probe(name).qs, value, delta=0.02)
        self.assertEqual(report.qs_feature, report.probe('intersection').qs)
        self.assertEqual(len(report.alignment['angles']), 2)

    def test_document_layout(self):
        doc = self._report(example1(), n=16).to_document()
        self.assertEqual(set(doc), {'theta', 'n', 'mode', 'qs', 'qa', 'residual', 'steps', 'converged'})
        self.assertEqual([p['name'] for p in doc['qs']['probes']], ['feature', 'background'])
        self.assertIn('angle', doc['qs']['probes'][0])
        self.assertNotIn('angle', doc['qs']['probes'][1])
        self.assertEqual(doc['mode'], 'exact')

    def test_default_ellipse_scale(self):
        sol = build_separable(example1())
        grid = ComputationalGrid(16)
        J = exact_jacobian_field(sol, grid)
        report = analyze_mesh(example1(), exact_mesh(sol, grid), J, sol.theta, 'exact')
        pair = eig_sym2(J)
        np.testing.assert_allclose(report.ellipses.a, np.maximum(pair.lam1, pair.lam2) / 32.0, rtol=1e-12)
        self.assertTrue(np.all(report.ellipses.b <= report.ellipses.a))


class NodeSelectionTests(SimpleTestCase):

    def test_maximum_wins_over_near_ties(self):
        score = np.array([[10.0, 9.95], [5.0, 1.0]])
        competitor = np.array([[3.0, 1.0], [0.0, 0.0]])
        self.assertEqual(_select(score, competitor), (0, 0))

    def test_exact_ties_go_to_smallest_competitor(self):
        score = np.array([[10.0, 10.0], [5.0, 10.0]])
        competitor = np.array([[3.0, 2.0], [0.0, 1.0]])
        self.assertEqual(_select(score, competitor), (1, 1))

    def test_mask_restricts_candidates(self):
        score = np.array([[10.0, 8.0], [5.0, 1.0]])
        mask = np.array([[False, True], [True, True]])
        self.assertEqual(_select(score, mask=mask), (0, 1))

    def test_example2_feature_nodes_maximise_their_train(self):
        spec = example2()
        sol = build_separable(spec)
        grid = ComputationalGrid(60)
        report = analyze_mesh(spec, exact_mesh(sol, grid), exact_jacobian_field(sol, grid), sol.theta, 'exact')
        rho1, rho2 = spec.factors(report.lift)
        first = report.probe('first_feature')
        second = report.probe('second_feature')
        self.assertEqual(rho1[first.i, first.j], rho1[rho2 < 1.5].max())
        self.assertEqual(rho2[second.i, second.j], rho2[rho1 < 1.5].max())
