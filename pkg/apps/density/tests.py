import math

import numpy as np
from django.test import SimpleTestCase

from apps.core.exceptions import DensityError
from apps.density.densities import (
    ArclengthFromU,
    HessianFromU,
    LevelSet,
    ProductTrains,
    ShockTrain,
    SingleTrain,
    Uniform,
    eval_density,
    theta_2d,
    theta_separable,
)
from apps.density.presets import (
    PRESETS,
    density_from_document,
    density_to_document,
    example1,
    example2,
    example3,
    example4,
    get_preset,
    shock_train_major,
    shock_train_minor,
)
from apps.density.ufunctions import UFunction

SQRT2 = math.sqrt(2.0)


class EvalDensityTests(SimpleTestCase):

    def test_uniform(self):
        self.assertEqual(eval_density(Uniform(), np.array([0.3, 0.7])), 1.0)

    def test_feature_center(self):
        rho = eval_density(example1(), np.array([0.0, 0.0]))
        self.assertAlmostEqual(rho / 51.0, 1.0, delta=1e-15)
        # outro ponto da reta x + y = 1
        self.assertAlmostEqual(eval_density(example1(), np.array([0.25, 0.75])), 51.0, delta=1e-12)

    def test_between_bumps(self):
        # x·e₁ = 1/(2√2) fica a meio caminho entre duas retas do choque
        x = np.array([0.25, 0.25])
        self.assertAlmostEqual(eval_density(example1(), x), 1.0, delta=1e-10)

    def test_product(self):
        spec = example2()
        x = np.array([0.0, 0.0])
        self.assertAlmostEqual(eval_density(spec, x), 51.0 * 11.0, delta=1e-9)

    def test_vectorized_shape(self):
        values = eval_density(example2(), np.zeros((4, 5, 2)))
        self.assertEqual(values.shape, (4, 5))


class PeriodicityTests(SimpleTestCase):

    def test_double_periodicity_of_presets(self):
        rng = np.random.default_rng(11)
        x = rng.random((1000, 2)) * 3.0 - 1.0
        for name, factory in PRESETS.items():
            spec = factory()
            base = spec.evaluate(x)
            with self.subTest(preset=name):
                self.assertLessEqual(np.abs(spec.evaluate(x + (1.0, 0.0)) - base).max(), 1e-10)
                self.assertLessEqual(np.abs(spec.evaluate(x + (0.0, 1.0)) - base).max(), 1e-10)

    def test_additive_variants_are_at_least_one(self):
        s = (np.arange(128) + 0.5) / 128
        xx, yy = np.meshgrid(s, s, indexing='ij')
        x = np.stack([xx, yy], axis=-1)
        for spec in (example1(), example2(), example3(), example4()):
            self.assertGreaterEqual(spec.evaluate(x).min(), 1.0)


class ThetaTests(SimpleTestCase):

    def test_uniform(self):
        self.assertAlmostEqual(theta_2d(Uniform()), 1.0, delta=1e-14)

    def test_example1(self):
        self.assertAlmostEqual(theta_2d(example1()), 3.0, delta=1e-6)
        self.assertAlmostEqual(theta_separable(shock_train_major()), 3.0, delta=1e-8)

    def test_example2(self):
        self.assertAlmostEqual(theta_separable(shock_train_minor()), 1.8, delta=1e-8)
        self.assertAlmostEqual(theta_2d(example2()), 5.4, delta=1e-5)

    def test_flat_train(self):
        train = ShockTrain(amplitude=0.0, sharpness=1.0, direction=(1.0, 0.0), scale=1.0)
        self.assertAlmostEqual(theta_separable(train), 1.0, delta=1e-15)

    def test_closed_form_agrees_with_quadrature(self):
        for train in (shock_train_major(), shock_train_minor()):
            self.assertAlmostEqual(theta_separable(train), train.theta_closed_form(), delta=1e-10)

    def test_product_identity_for_orthogonal_trains(self):
        spec = example2()
        expected = theta_separable(spec.first) * theta_separable(spec.second)
        self.assertAlmostEqual(theta_2d(spec), expected, delta=1e-6)

    def test_refinement_invariance(self):
        for name, factory in PRESETS.items():
            spec = factory()
            with self.subTest(preset=name):
                self.assertAlmostEqual(theta_2d(spec, 512), theta_2d(spec, 1024), delta=1e-8)

    def test_minimum_quadrature(self):
        with self.assertRaises(DensityError):
            theta_2d(Uniform(), 32)


class ShockTrainTests(SimpleTestCase):

    def test_direction_must_be_unit(self):
        with self.assertRaises(DensityError) as ctx:
            ShockTrain(amplitude=1.0, sharpness=10.0, direction=(1.0, 1.0), scale=1.0)
        self.assertEqual(ctx.exception.field, 'direction')

    def test_must_be_doubly_periodic(self):
        with self.assertRaises(DensityError) as ctx:
            ShockTrain(amplitude=1.0, sharpness=10.0, direction=(1.0 / SQRT2, 1.0 / SQRT2), scale=1.0)
        self.assertEqual(ctx.exception.field, 'scale')

    def test_rejects_negative_amplitude(self):
        with self.assertRaises(DensityError):
            ShockTrain(amplitude=-1.0, sharpness=10.0, direction=(1.0, 0.0), scale=1.0)

    def test_antiderivative_matches_quadrature(self):
        train = shock_train_minor()
        xp = np.linspace(0.0, 1.3, 4001)
        values = train.profile(xp)
        trapezoid = np.concatenate([[0.0], np.cumsum(0.5 * (values[1:] + values[:-1]) * np.diff(xp))])
        self.assertLessEqual(np.abs(train.antiderivative(xp) - trapezoid).max(), 1e-3)

    def test_far_offsets_are_reduced(self):
        near = ShockTrain(amplitude=5.0, sharpness=20.0, direction=(1.0, 0.0), scale=1.0, offsets=(0.25,))
        far = ShockTrain(amplitude=5.0, sharpness=20.0, direction=(1.0, 0.0), scale=1.0, offsets=(5.25,))
        xp = np.linspace(-2.0, 2.0, 81)
        np.testing.assert_allclose(far.profile(xp), near.profile(xp), atol=1e-12)
        np.testing.assert_allclose(far.antiderivative(xp), near.antiderivative(xp), atol=1e-12)


class VariantTests(SimpleTestCase):

    def test_example3_is_not_orthogonal(self):
        self.assertFalse(example3().orthogonal)
        self.assertTrue(example2().orthogonal)

    def test_level_set_on_curve(self):
        spec = example4()
        points = spec.curve_points(20)
        np.testing.assert_allclose(spec.psi(points), 0.0, atol=1e-14)
        np.testing.assert_allclose(spec.evaluate(points), 51.0, rtol=1e-12)

    def test_level_set_gradient(self):
        spec = example4()
        g = spec.grad_psi(np.array([0.0, 0.5]))
        np.testing.assert_allclose(g, [-0.4 * math.pi, 1.0], atol=1e-14)

    def test_arclength(self):
        spec = ArclengthFromU(u=UFunction(kind='sine', amplitude=0.1, wave=(1, 0)), alpha_h=4.0)
        x = np.array([0.0, 0.3])
        expected = math.sqrt(1.0 + 4.0 * (0.1 * 2.0 * math.pi) ** 2)
        self.assertAlmostEqual(eval_density(spec, x), expected, delta=1e-12)

    def test_hessian_density(self):
        spec = HessianFromU(u=UFunction(kind='sine', amplitude=0.1, wave=(0, 1)), alpha_h=2.0)
        x = np.array([0.2, 0.25])
        expected = math.sqrt(1.0 + 2.0 * 0.1 * (2.0 * math.pi) ** 2)
        self.assertAlmostEqual(eval_density(spec, x), expected, delta=1e-12)

    def test_ufunction_derivatives(self):
        u = UFunction(kind='tanh_front', amplitude=0.5, wave=(1, 2), sharpness=3.0)
        x = np.array([0.13, 0.41])
        eps = 1e-6
        fd = [(u.value(x + d) - u.value(x - d)) / (2 * eps) for d in (np.array([eps, 0.0]), np.array([0.0, eps]))]
        np.testing.assert_allclose(u.gradient(x), fd, rtol=1e-6)

    def test_rejects_zero_wave(self):
        with self.assertRaises(DensityError):
            UFunction(wave=(0, 0))


class DocumentTests(SimpleTestCase):

    def test_presets_survive_documents(self):
        for name in PRESETS:
            spec = get_preset(name)
            with self.subTest(preset=name):
                self.assertEqual(density_from_document(density_to_document(spec)), spec)

    def test_unknown_preset(self):
        with self.assertRaises(DensityError):
            get_preset('example9')

    def test_unknown_key_reports_path(self):
        doc = density_to_document(example2())
        doc['trains'][1]['width'] = 3
        with self.assertRaises(DensityError) as ctx:
            density_from_document(doc)
        self.assertEqual(ctx.exception.field, 'density.trains[1]')

    def test_invalid_train_reports_path(self):
        doc = {'variant': 'single_train',
               'train': {'amplitude': 1.0, 'sharpness': 5.0, 'direction': [1.0, 1.0], 'scale': 1.0}}
        with self.assertRaises(DensityError) as ctx:
            density_from_document(doc)
        self.assertEqual(ctx.exception.field, 'density.train.direction')

    def test_derived_from_u(self):
        doc = {'variant': 'hessian', 'alpha_h': 2.0, 'u': {'kind': 'sine', 'amplitude': 0.1, 'wave': [1, 1]}}
        spec = density_from_document(doc)
        self.assertIsInstance(spec, HessianFromU)
        self.assertEqual(spec.u.wave, (1, 1))

    def test_uniform_rejects_parameters(self):
        with self.assertRaises(DensityError):
            density_from_document({'variant': 'uniform', 'amplitude': 2})
        self.assertIsInstance(density_from_document({'variant': 'uniform'}), Uniform)

    def test_types(self):
        self.assertIsInstance(example1(), SingleTrain)
        self.assertIsInstance(example2(), ProductTrains)
        self.assertIsInstance(example4(), LevelSet)
