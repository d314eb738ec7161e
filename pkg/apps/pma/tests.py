import math
from unittest import mock

import numpy as np
from django.test import SimpleTestCase, tag

from apps.core.exceptions import GridError, StepRejected
from apps.core.grid import ComputationalGrid, PeriodicScalarField, torus_distance
from apps.density.densities import ShockTrain, SingleTrain, Uniform
from apps.density.presets import example1, example2, example3, example4
from apps.exact.solver import build_separable, exact_mesh
from apps.pma.solver import (
    RESIDUAL_FACTOR,
    PmaParams,
    PotentialState,
    equidist_residual,
    jacobian_field,
    mesh_from_potential,
    mesh_lift,
    pma_solve,
    pma_step,
)


class PmaParamsTests(SimpleTestCase):

    def test_validation(self):
        for kwargs in ({'dt': 0.0}, {'tol': -1.0}, {'max_steps': 0}, {'gamma': -0.1}):
            with self.subTest(**kwargs), self.assertRaises(GridError):
                PmaParams(**kwargs)

    def test_grid(self):
        self.assertEqual(PmaParams(n=24).grid, ComputationalGrid(24))


class PotentialStateTests(SimpleTestCase):

    def test_identity_mesh(self):
        state = PotentialState.identity(ComputationalGrid(12))
        np.testing.assert_array_equal(mesh_from_potential(state), state.grid.node_array())
        self.assertTrue(state.is_convex())

    def test_small_perturbation(self):
        n, eps = 64, 1e-3
        grid = ComputationalGrid(n)
        phi = PeriodicScalarField.from_function(grid, lambda xi, eta: eps * np.sin(2 * math.pi * xi) / (2 * math.pi))
        displacement = mesh_lift(PotentialState(phi)) - grid.node_array()
        xi, _ = grid.nodes()
        np.testing.assert_allclose(displacement[..., 0], eps * np.cos(2 * math.pi * xi), atol=eps * (2 * math.pi / n) ** 2)
        np.testing.assert_allclose(displacement[..., 1], 0.0, atol=1e-15)

    def test_gauge_invariance(self):
        grid = ComputationalGrid(16)
        rng = np.random.default_rng(9)
        phi = PeriodicScalarField(grid, 1e-4 * rng.normal(size=grid.shape))
        shifted = PotentialState(phi.with_values(phi.values + 7.0))
        self.assertLessEqual(np.abs(mesh_lift(shifted) - mesh_lift(PotentialState(phi))).max(), 1e-12)

    def test_jacobian_is_symmetric_identity_at_start(self):
        J = jacobian_field(PotentialState.identity(ComputationalGrid(8)))
        np.testing.assert_array_equal(J.a11, 1.0)
        np.testing.assert_array_equal(J.a12, 0.0)


class ResidualTests(SimpleTestCase):

    def test_uniform_identity(self):
        residual, summary = equidist_residual(PotentialState.identity(ComputationalGrid(16)), Uniform())
        np.testing.assert_allclose(residual.values, 0.0, atol=1e-14)
        self.assertLessEqual(summary['cv'], 1e-14)

    def test_identity_mesh_under_example1(self):
        state = PotentialState.identity(ComputationalGrid(60))
        _, summary = equidist_residual(state, example1())
        self.assertAlmostEqual(summary['max'], 16.0, delta=0.16)


class PmaStepTests(SimpleTestCase):

    def test_uniform_is_fixed_point(self):
        params = PmaParams(n=16)
        state = PotentialState.identity(params.grid)
        after = pma_step(state, Uniform(), params)
        np.testing.assert_allclose(after.phi.values, 0.0, atol=1e-15)

    def test_zero_step(self):
        params = PmaParams(n=16)
        state = PotentialState.identity(params.grid)
        self.assertIs(pma_step(state, example1(), params, dt=0.0), state)

    def test_forcing_peaks_on_the_feature(self):
        params = PmaParams(n=32, dt=1e-5, gamma=0.0)
        state = PotentialState.identity(params.grid)
        spec = example1()
        after = pma_step(state, spec, params)
        rho = spec.evaluate(params.grid.node_array())
        increment = after.phi.values - state.phi.values
        self.assertEqual(increment.max(), increment[rho == rho.max()].max())

    def test_oversized_step_is_rejected(self):
        params = PmaParams(n=32, dt=10.0, gamma=0.0)
        with self.assertRaises(StepRejected) as ctx:
            pma_step(PotentialState.identity(params.grid), example1(), params)
        self.assertEqual(ctx.exception.dt, 10.0)


class PmaSolveTests(SimpleTestCase):

    def test_uniform_converges_in_one_step(self):
        state, report = pma_solve(Uniform(), PmaParams(n=16))
        self.assertTrue(report.converged)
        self.assertEqual(report.steps, 1)
        np.testing.assert_allclose(mesh_from_potential(state), state.grid.node_array(), atol=1e-14)

    def test_local_residual_settles_before_stopping(self):
        spec = SingleTrain(ShockTrain(amplitude=2.0, sharpness=5.0, direction=(1.0, 0.0), scale=1.0, offsets=(0.5,)))
        params = PmaParams(n=16, tol=5e-2)
        records = []
        _, report = pma_solve(spec, params, progress=records.append)
        self.assertTrue(report.converged)
        for record in records[:-1]:
            self.assertFalse(record['cv'] <= params.tol and record['max_residual'] <= RESIDUAL_FACTOR * params.tol)
        self.assertEqual(report.final_max_residual, records[-1]['max_residual'])

    @mock.patch('apps.pma.solver.PLATEAU_STEPS', 5)
    @mock.patch('apps.pma.solver.RESIDUAL_FACTOR', -1.0)
    def test_stalled_residual_ends_the_run(self):
        _, report = pma_solve(Uniform(), PmaParams(n=16))
        self.assertTrue(report.converged)
        self.assertEqual(report.steps, 6)

    def test_step_limit_reports_non_convergence(self):
        records = []
        state, report = pma_solve(example1(), PmaParams(n=16, max_steps=3), progress=records.append)
        self.assertFalse(report.converged)
        self.assertEqual(report.steps, 3)
        self.assertEqual([r['step'] for r in records], [1, 2, 3])
        self.assertEqual(set(records[0]), {'step', 'dt', 'cv', 'max_residual'})
        self.assertEqual(report.final_cv, records[-1]['cv'])

    def test_large_dt_is_halved(self):
        state, report = pma_solve(example1(), PmaParams(n=16, dt=10.0, max_steps=2))
        self.assertLess(report.final_dt, 10.0)
        self.assertTrue(state.is_convex())

    def test_dt_floor(self):
        with self.assertRaises(StepRejected):
            pma_solve(example1(), PmaParams(n=16, dt=10.0, dt_min=5.0, max_steps=2))

    def test_init_must_match_grid(self):
        with self.assertRaises(GridError):
            pma_solve(Uniform(), PmaParams(n=16), init=PotentialState.identity(ComputationalGrid(8)))


def _oracle_distance(spec, n):
    state, report = pma_solve(spec, PmaParams(n=n))
    exact = exact_mesh(build_separable(spec), state.grid)
    return report, float(torus_distance(mesh_lift(state), exact).max())


@tag('slow')
class PmaAcceptanceTests(SimpleTestCase):

    def test_example1_matches_exact_map(self):
        report, distance = _oracle_distance(example1(), 60)
        self.assertTrue(report.converged)
        self.assertLessEqual(distance, 1e-2)

    def test_example1_small_grid(self):
        report, distance = _oracle_distance(example1(), 32)
        self.assertTrue(report.converged)
        self.assertLessEqual(distance, 2e-2)

    def test_example2_matches_exact_map(self):
        report, distance = _oracle_distance(example2(), 60)
        self.assertTrue(report.converged)
        self.assertLessEqual(distance, 1e-2)

    def test_equidistribution_for_all_presets(self):
        params = PmaParams(n=60)
        for factory in (example1, example2, example3, example4):
            with self.subTest(preset=factory.__name__):
                spec = factory()
                state, report = pma_solve(spec, params)
                self.assertTrue(report.converged)
                _, summary = equidist_residual(state, spec, theta=report.theta)
                self.assertLessEqual(summary['cv'], params.tol)
                self.assertLessEqual(summary['max'], 5 * params.tol)

    def test_cv_settles(self):
        _, report = pma_solve(example1(), PmaParams(n=32))
        tail = np.asarray(report.cv_history[len(report.cv_history) // 2:])
        self.assertTrue(np.all(tail[1:] <= tail[:-1] * 1.05))

    def test_independent_of_initial_potential(self):
        params = PmaParams(n=32)
        grid = params.grid
        xi, eta = grid.nodes()
        smooth = 1e-2 * np.sin(2 * math.pi * xi) * np.cos(2 * math.pi * eta) / (8 * math.pi ** 2)
        first, _ = pma_solve(example1(), params)
        second, _ = pma_solve(example1(), params, init=PotentialState(PeriodicScalarField(grid, smooth)))
        distance = torus_distance(mesh_lift(first), mesh_lift(second)).max()
        self.assertLessEqual(distance, 2 * params.tol)
