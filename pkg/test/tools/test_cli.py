from typing import Optional
import csv
import io
import json
import os
import tempfile
import unittest
from unittest import mock

import numpy as np

from roughsurf.inversion import MeasurementSet, Reconstruction
from roughsurf.tools import checks
from roughsurf.tools.artifacts import verify_artifact
from roughsurf.tools.cli import main


def _read_csv(path: str) -> list[dict]:
    with open(path, 'r') as file:
        lines = [line for line in file if not line.startswith('#')]
    return list(csv.DictReader(lines))


class TestCli(unittest.TestCase):

    def setUp(self):
        self.temp_dir = tempfile.TemporaryDirectory()
        self.out = os.path.join(self.temp_dir.name, 'out')

    def tearDown(self):
        self.temp_dir.cleanup()

    def _config(self, text: str, name: str = 'run.experiment.yml') -> str:
        path = os.path.join(self.temp_dir.name, name)
        with open(path, 'w') as file:
            file.write(text)
        return path

    def _main(self, argv: list[str], stdout: Optional[io.StringIO] = None) -> int:
        with mock.patch('sys.stdout', new=stdout or io.StringIO()), mock.patch('sys.stderr', new=io.StringIO()):
            return main(argv)

    def _small_config(self, profile: str = 'example1', schedule: str = '[1]', delta: float = 0.05) -> str:
        return self._config(
            "name: small\n"
            f"profile: {profile}\n"
            f"schedule: {schedule}\n"
            "directions: [pi/3]\n"
            "n_f: 8\n"
            f"delta: {delta}\n"
            "seed: 3\n"
            "basis_size: 4\n"
            "max_iterations: 2\n"
            "snapshot_points: 21\n"
            "mesh: 32\n"
        )

    def test_forward_flat_is_zero(self):
        config = self._config(
            "profile: flat\n"
            "schedule: [1, 2]\n"
            "directions: [0.0, -pi/6]\n"
            "n_f: 8\n"
            "mesh: 32\n"
        )
        self.assertEqual(0, self._main(['forward', '--config', config, '--out', self.out]))
        for k in (1, 2):
            for l in (0, 1):
                path = os.path.join(self.out, f'farfield_k{k}_d{l}.csv')
                verify_artifact(path)
                rows = _read_csv(path)
                self.assertEqual(9, len(rows))
                self.assertEqual(np.pi, float(rows[-1]['angle']))
                values = np.array([complex(float(row['re']), float(row['im'])) for row in rows])
                self.assertLessEqual(np.max(np.abs(values)), 1e-12)

    def test_forward_is_reproducible(self):
        config = self._small_config()
        outputs = []
        for run in ('a', 'b'):
            out = os.path.join(self.temp_dir.name, run)
            self.assertEqual(0, self._main(['forward', '--config', config, '--out', out]))
            with open(os.path.join(out, 'farfield_k1_d0.csv'), 'rb') as file:
                outputs.append(file.read())
        self.assertEqual(outputs[0], outputs[1])

    def test_synthesize(self):
        config = self._small_config(schedule='[1, 2]')
        self.assertEqual(0, self._main(['synthesize', '--config', config, '--out', self.out]))
        path = os.path.join(self.out, 'small.dataset.json')
        provenance = verify_artifact(path)
        with open(path, 'r') as file:
            measurements = MeasurementSet.from_dict(json.load(file))
        self.assertEqual((2, 1, 9), measurements.values.shape)
        self.assertEqual(0.05, measurements.delta)
        self.assertEqual(3, measurements.seed)

        other = os.path.join(self.temp_dir.name, 'other')
        self.assertEqual(0, self._main(['synthesize', '--config', config, '--out', other, '--seed', '4']))
        other_provenance = verify_artifact(os.path.join(other, 'small.dataset.json'))
        self.assertNotEqual(provenance['config_hash'], other_provenance['config_hash'])

    def test_variables(self):
        config = self._config(
            "profile: flat\n"
            "schedule: [1]\n"
            "directions: [0.0]\n"
            "delta: $noise\n"
            "n_f: 4\n"
            "mesh: 16\n"
        )
        argv = ['synthesize', '--config', config, '--out', self.out, '--var', 'noise=0.02']
        self.assertEqual(0, self._main(argv))
        with open(os.path.join(self.out, 'experiment.dataset.json'), 'r') as file:
            self.assertEqual(0.02, json.load(file)['delta'])

    def test_invert(self):
        config = self._small_config()
        self.assertEqual(0, self._main(['synthesize', '--config', config, '--out', self.out]))
        dataset = os.path.join(self.out, 'small.dataset.json')
        self.assertEqual(0, self._main(['invert', '--config', config, '--dataset', dataset, '--out', self.out]))

        reconstruction_path = os.path.join(self.out, 'small.reconstruction.json')
        for name in ('small.reconstruction.json', 'iterations.ndjson', 'profile_k1.csv'):
            verify_artifact(os.path.join(self.out, name))
        self.assertTrue(os.path.isfile(os.path.join(self.out, 'stages', 'k1.stats.json')))
        reconstruction = Reconstruction.load(reconstruction_path)
        self.assertEqual(4, len(reconstruction.coefficients))
        self.assertEqual(['k1'], list(reconstruction.stage_status))
        self.assertNotEqual('pending', reconstruction.stage_status['k1'])
        self.assertEqual(0, reconstruction.log[0]['iteration'])
        self.assertIn('profile_error', reconstruction.metadata)
        self.assertAlmostEqual(0.075, reconstruction.metadata['threshold'], places=12)
        snapshot = _read_csv(os.path.join(self.out, 'profile_k1.csv'))
        self.assertEqual(21, len(snapshot))
        self.assertEqual(['x1', 'h_true', 'h_reconstructed'], list(snapshot[0]))

    def test_invert_rejects_mismatched_dataset(self):
        config = self._small_config(schedule='[1, 2]')
        self.assertEqual(0, self._main(['synthesize', '--config', config, '--out', self.out]))
        dataset = os.path.join(self.out, 'small.dataset.json')
        other = self._small_config(schedule='[1, 3]')
        self.assertEqual(2, self._main(['invert', '--config', other, '--dataset', dataset, '--out', self.out]))

    def test_invert_rejects_tampered_dataset(self):
        config = self._small_config()
        self.assertEqual(0, self._main(['synthesize', '--config', config, '--out', self.out]))
        dataset = os.path.join(self.out, 'small.dataset.json')
        with open(dataset, 'r') as file:
            document = json.load(file)
        document['delta'] = 0.5
        with open(dataset, 'w') as file:
            json.dump(document, file)
        with self.assertLogs('roughsurf.tools', level='ERROR'):
            exit_code = self._main(['invert', '--config', config, '--dataset', dataset, '--out', self.out])
        self.assertEqual(2, exit_code)

    def test_interrupted_inversion_writes_backup(self):
        config = self._small_config()
        self.assertEqual(0, self._main(['synthesize', '--config', config, '--out', self.out]))
        dataset = os.path.join(self.out, 'small.dataset.json')
        argv = ['invert', '--config', config, '--dataset', dataset, '--out', self.out]
        with mock.patch('roughsurf.inversion.continuation.FrequencyContinuation.run', side_effect=KeyboardInterrupt):
            self.assertEqual(130, self._main(argv))
        verify_artifact(os.path.join(self.out, 'backup_small.reconstruction.json'))
        verify_artifact(os.path.join(self.out, 'backup_iterations.ndjson'))
        self.assertFalse(os.path.exists(os.path.join(self.out, 'small.reconstruction.json')))

    def test_failed_inversion_writes_backup(self):
        config = self._small_config()
        self.assertEqual(0, self._main(['synthesize', '--config', config, '--out', self.out]))
        dataset = os.path.join(self.out, 'small.dataset.json')
        argv = ['invert', '--config', config, '--dataset', dataset, '--out', self.out]
        with mock.patch('roughsurf.inversion.continuation.FrequencyContinuation.run',
                        side_effect=RuntimeError('boom')):
            with self.assertLogs('roughsurf.tools', level='ERROR'):
                self.assertEqual(1, self._main(argv))
        self.assertTrue(os.path.isfile(os.path.join(self.out, 'backup_small.reconstruction.json')))

    def test_invalid_config(self):
        config = self._config("profile: example1\nschedule: []\ndirections: [0.0]\n")
        with self.assertLogs('roughsurf.tools', level='ERROR'):
            exit_code = self._main(['forward', '--config', config, '--out', self.out])
        self.assertEqual(2, exit_code)
        self.assertFalse(os.path.exists(self.out))

    def test_check(self):
        stdout = io.StringIO()
        report_path = os.path.join(self.out, 'checks.json')
        argv = ['check', '--only', 'bessel_wronskian', 'lm_discrepancy', '--out', report_path]
        self.assertEqual(0, self._main(argv, stdout=stdout))
        report = json.loads(stdout.getvalue())
        self.assertTrue(report['passed'])
        self.assertEqual(['bessel_wronskian', 'lm_discrepancy'], [check['name'] for check in report['checks']])
        verify_artifact(report_path)

    def test_failing_check(self):
        with mock.patch.dict(checks.CHECKS, {'bessel_wronskian': lambda: (1.0, 0.5)}):
            with self.assertLogs('roughsurf.tools', level='ERROR'):
                exit_code = self._main(['check', '--only', 'bessel_wronskian'])
        self.assertEqual(1, exit_code)


if __name__ == '__main__':
    unittest.main()
