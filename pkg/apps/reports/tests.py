import json
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, override_settings, tag

from apps.core.exceptions import ConfigError, ExportError
from apps.core.grid import ComputationalGrid
from apps.density.densities import ProductTrains, SingleTrain
from apps.density.presets import density_to_document, example2
from apps.reports.config import DEFAULT_EMIT, load_config
from apps.reports.pipeline import EXIT_NOT_CONVERGED, EXIT_OK, run
from apps.reports.utils.exporters import (
    export_mesh,
    export_report,
    read_mesh,
    read_report,
    read_table,
    report_to_json,
)
from apps.reports.utils.svg import render_svg


class TempDirMixin:

    def setUp(self):
        super().setUp()
        self._tmp = tempfile.TemporaryDirectory()
        self.tmp = Path(self._tmp.name)
        self.addCleanup(self._tmp.cleanup)

    def write_config(self, document, name='run.json'):
        path = self.tmp / name
        path.write_text(json.dumps(document), encoding='utf-8')
        return path


class LoadConfigTests(TempDirMixin, SimpleTestCase):

    def test_preset_with_defaults(self):
        config = load_config(flags={'mode': 'exact', 'preset': 'example1'})
        self.assertIsInstance(config.density, SingleTrain)
        self.assertEqual(config.n, 60)
        self.assertEqual(config.emit, frozenset(DEFAULT_EMIT))
        self.assertEqual(config.params.dt, 1e-3)

    def test_density_is_required(self):
        with self.assertRaises(ConfigError) as ctx:
            load_config(flags={'mode': 'pma'})
        self.assertEqual(ctx.exception.field, 'density')

    def test_preset_and_density_are_exclusive(self):
        path = self.write_config({'mode': 'pma', 'preset': 'example1', 'density': {'variant': 'uniform'}})
        with self.assertRaises(ConfigError) as ctx:
            load_config(path)
        self.assertEqual(ctx.exception.field, 'density')

    def test_exact_needs_separable_density(self):
        with self.assertRaises(ConfigError) as ctx:
            load_config(flags={'mode': 'exact', 'preset': 'example3'})
        self.assertEqual(ctx.exception.field, 'mode')

    def test_unknown_key(self):
        path = self.write_config({'mode': 'pma', 'preset': 'example1', 'timestep': 0.1})
        with self.assertRaises(ConfigError) as ctx:
            load_config(path)
        self.assertEqual(ctx.exception.field, 'timestep')

    def test_flags_override_file(self):
        path = self.write_config({'mode': 'pma', 'preset': 'example1', 'n': 32, 'gamma': 0.2})
        config = load_config(path, {'n': 16, 'gamma': None})
        self.assertEqual(config.n, 16)
        self.assertEqual(config.gamma, 0.2)

    def test_density_document(self):
        path = self.write_config({'mode': 'exact', 'density': density_to_document(example2())})
        config = load_config(path)
        self.assertIsInstance(config.density, ProductTrains)
        self.assertIsNone(config.preset)

    def test_invalid_values_name_the_field(self):
        for flags, field in (({'dt': -1.0}, 'dt'), ({'n': 4}, 'n'), ({'emit': 'mesh,gif'}, 'emit')):
            with self.subTest(field=field), self.assertRaises(ConfigError) as ctx:
                load_config(flags={'mode': 'pma', 'preset': 'example1', **flags})
            self.assertEqual(ctx.exception.field, field)

    def test_emit_list(self):
        config = load_config(flags={'mode': 'pma', 'preset': 'example1', 'emit': 'mesh, report'})
        self.assertEqual(config.emit, frozenset({'mesh', 'report'}))

    def test_analyze_needs_mesh(self):
        with self.assertRaises(ConfigError) as ctx:
            load_config(flags={'mode': 'analyze', 'preset': 'example1'})
        self.assertEqual(ctx.exception.field, 'mesh')

    def test_broken_file(self):
        path = self.tmp / 'broken.json'
        path.write_text('{"mode": ', encoding='utf-8')
        with self.assertRaises(ConfigError) as ctx:
            load_config(path)
        self.assertEqual(ctx.exception.field, 'config')

    @override_settings(MESHKIT={**settings.MESHKIT, 'N': 24, 'TOL': 5e-3})
    def test_defaults_come_from_settings(self):
        config = load_config(flags={'mode': 'pma', 'preset': 'example1'})
        self.assertEqual(config.n, 24)
        self.assertEqual(config.tol, 5e-3)


class ExporterTests(TempDirMixin, SimpleTestCase):

    def test_identity_mesh_csv(self):
        lift = ComputationalGrid(3).node_array()
        path = export_mesh(lift, self.tmp / 'mesh.csv')
        lines = path.read_text(encoding='utf-8').split('\n')
        self.assertEqual(lines[0], 'i,j,xi,eta,x,y')
        self.assertEqual(lines[1], '0,0,0,0,0,0')
        self.assertEqual(len(lines), 1 + 16 + 1)
        self.assertEqual(lines[-1], '')
        frame = read_table(path, 'mesh')
        np.testing.assert_allclose(frame['x'], frame['xi'], atol=1e-15)
        np.testing.assert_allclose(frame['y'], frame['eta'], atol=1e-15)

    def test_mesh_round_trip(self):
        rng = np.random.default_rng(3)
        lift = ComputationalGrid(8).node_array() + 0.01 * rng.normal(size=(8, 8, 2))
        back = read_mesh(export_mesh(lift, self.tmp / 'mesh.csv'))
        np.testing.assert_array_equal(back, lift)

    def test_wrong_header(self):
        path = self.tmp / 'other.csv'
        path.write_text('a,b\n1,2\n', encoding='utf-8')
        with self.assertRaises(ExportError):
            read_mesh(path)

    def test_report_rejects_nan(self):
        with self.assertRaises(ExportError):
            export_report({'qs': float('nan')}, self.tmp / 'report.json')

    def test_report_round_trip(self):
        document = {'theta': 3.0000000000000004, 'n': 16, 'mode': 'exact', 'converged': True}
        path = export_report(document, self.tmp / 'report.json')
        self.assertTrue(path.read_text(encoding='utf-8').endswith('}\n'))
        self.assertEqual(read_report(path), document)

    def test_report_floats_have_17_digits(self):
        text = report_to_json({'theta': 0.1, 'n': 16, 'qa': {'max': [0.2, 3.0]}, 'converged': False})
        self.assertIn('"theta": 0.10000000000000001,', text)
        self.assertIn('"n": 16,', text)
        self.assertEqual(json.loads(text)['qa']['max'], [0.2, 3.0])
        self.assertIn('0.20000000000000001', text)
        self.assertIn('"converged": false', text)
        self.assertNotIn('"0.1', text)
        self.assertEqual(json.loads(text)['theta'], 0.1)

    def test_report_rejects_infinity(self):
        with self.assertRaises(ValueError):
            report_to_json({'qa': {'max': float('inf')}})


class SvgTests(TempDirMixin, SimpleTestCase):

    def test_identity_mesh(self):
        lift = ComputationalGrid(4).node_array()
        first = render_svg(lift, None, self.tmp / 'a.svg').read_bytes()
        second = render_svg(lift, None, self.tmp / 'b.svg').read_bytes()
        self.assertEqual(first, second)
        text = first.decode('utf-8')
        self.assertEqual(text.count('<polyline'), 8)
        self.assertNotIn('<ellipse', text)
        self.assertIn('viewBox="0 0 1 1"', text)


class CommandTests(TempDirMixin, SimpleTestCase):

    def call(self, name, **options):
        out = StringIO()
        call_command(name, stdout=out, stderr=StringIO(), out=str(self.tmp), **options)
        return out.getvalue()

    def test_exact_command(self):
        output = self.call('exact', preset='example1', n=24, emit='mesh,ellipses,residual,report,svg')
        for name in ('mesh.csv', 'ellipses.csv', 'residual.csv', 'report.json', 'mesh.svg'):
            self.assertTrue((self.tmp / name).exists(), name)
        self.assertIn('report: ', output)
        report = read_report(self.tmp / 'report.json')
        self.assertEqual(report['mode'], 'exact')
        self.assertEqual(report['n'], 24)
        self.assertTrue(report['converged'])
        self.assertAlmostEqual(report['qs']['feature'], 8.529, delta=0.01)
        self.assertEqual(len(read_table(self.tmp / 'ellipses.csv', 'ellipses')), 24 * 24)
        self.assertIn('<ellipse', (self.tmp / 'mesh.svg').read_text(encoding='utf-8'))

    def test_pdf_artifact(self):
        self.call('exact', preset='example1', n=16, emit='pdf')
        self.assertTrue((self.tmp / 'mesh.pdf').read_bytes().startswith(b'%PDF'))

    def test_exact_rejects_non_separable(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('exact', preset='example4', n=16)
        self.assertEqual(ctx.exception.returncode, 1)

    def test_non_convergence_exit_code(self):
        progress = self.tmp / 'progress.jsonl'
        with self.assertRaises(CommandError) as ctx:
            self.call('pma', preset='example1', n=16, max_steps=3, emit='report', progress=str(progress))
        self.assertEqual(ctx.exception.returncode, EXIT_NOT_CONVERGED)
        report = read_report(self.tmp / 'report.json')
        self.assertFalse(report['converged'])
        self.assertEqual(report['steps'], 3)
        records = [json.loads(line) for line in progress.read_text(encoding='utf-8').splitlines()]
        self.assertEqual([r['step'] for r in records], [1, 2, 3])

    def test_analyze_cross_check(self):
        self.call('exact', preset='example1', n=60, emit='mesh,report')
        exact = read_report(self.tmp / 'report.json')
        analyze_dir = self.tmp / 'analyze'
        call_command('analyze', stdout=StringIO(), preset='example1', mesh=str(self.tmp / 'mesh.csv'),
                     out=str(analyze_dir), emit='report')
        analyzed = read_report(analyze_dir / 'report.json')
        self.assertEqual(analyzed['mode'], 'analyze')
        self.assertEqual(analyzed['n'], 60)
        self.assertAlmostEqual(analyzed['qs']['background'], exact['qs']['background'], delta=2e-2)
        self.assertAlmostEqual(analyzed['theta'], exact['theta'], delta=1e-6)

    def test_missing_mesh_file(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('analyze', preset='example1', mesh=str(self.tmp / 'nope.csv'))
        self.assertEqual(ctx.exception.returncode, 1)

    def test_runs_are_deterministic(self):
        outputs = []
        for name in ('first', 'second'):
            config = load_config(flags={'mode': 'exact', 'preset': 'example2', 'n': 20,
                                        'out': str(self.tmp / name), 'emit': 'mesh,report,svg'})
            self.assertEqual(run(config).status, EXIT_OK)
            outputs.append([(self.tmp / name / f).read_bytes() for f in ('mesh.csv', 'report.json', 'mesh.svg')])
        self.assertEqual(outputs[0], outputs[1])


@tag('slow')
class PmaReportTests(TempDirMixin, SimpleTestCase):

    def run_pma(self, preset):
        config = load_config(flags={'mode': 'pma', 'preset': preset, 'out': str(self.tmp), 'emit': 'report'})
        result = run(config)
        self.assertEqual(result.status, EXIT_OK)
        return result.report

    def test_example1(self):
        report = self.run_pma('example1')
        self.assertGreaterEqual(report.qs_feature, 8.2)
        self.assertLessEqual(report.qs_feature, 8.7)
        self.assertAlmostEqual(report.qs_background, 1.669, delta=0.02)
        self.assertGreaterEqual(report.qa_max, 1.0 - 1e-12)
        self.assertLessEqual(report.qa_max, 1.05)

    def test_example2(self):
        report = self.run_pma('example2')
        expected = {'first_feature': 15.06, 'second_feature': 9.04, 'intersection': 1.59, 'background': 1.14}
        for name, value in expected.items():
            with self.subTest(node=name):
                self.assertAlmostEqual(report.probe(name).qs, value, delta=0.4)
        self.assertGreaterEqual(report.qa_max, 1.0 - 1e-12)
        self.assertLessEqual(report.qa_max, 1.06)

    def test_features_are_aligned(self):
        for preset in ('example3', 'example4'):
            with self.subTest(preset=preset):
                report = self.run_pma(preset)
                self.assertLessEqual(report.alignment['max_angle'], 10.0)
