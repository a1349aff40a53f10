"""
Tests for the tom-sim command line.
"""
import json
import os
import tempfile
import unittest

from click.testing import CliRunner

from tom_sim.agents.agent import build_agent_model
from tom_sim.cli import cli, main
from tom_sim.environment.grid_world import TaskConfig
from tom_sim.model.serialization import load_model, models_equal


class TestCommands(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.runner = CliRunner()

    def invoke(self, *args):
        result = self.runner.invoke(cli, list(args), catch_exceptions=False)
        self.assertEqual(result.exit_code, 0, result.output)
        return result.output

    def test_validate_model(self):
        output = self.invoke('validate-model', '--task', 'collision')
        self.assertIn('ok', output)

    def test_validate_and_dump(self):
        path = os.path.join(self.tmp.name, 'purple_as_seen.yaml')
        self.invoke('validate-model', '--task', 'foraging', '--agent', 'purple',
                    '--role', 'other', '--dump', path)
        expected = build_agent_model(TaskConfig.foraging(), 1, 'other')
        self.assertTrue(models_equal(load_model(path), expected))

    def test_run(self):
        out = os.path.join(self.tmp.name, 'run')
        output = self.invoke('run', '--profile', 'collision_si', '--config-dir', self.tmp.name,
                             '--out', out)
        self.assertIn('red path: [1, 5]', output)
        self.assertIn('purple path: [9, 5]', output)
        self.assertTrue(os.path.exists(os.path.join(out, 'outcomes.csv')))

    def test_batch(self):
        out = os.path.join(self.tmp.name, 'batch')
        output = self.invoke('batch', '--profile', 'collision_si', '--seeds', '0-1',
                             '--horizon', '2', '--config-dir', self.tmp.name, '--out', out)
        self.assertIn('"episodes": 2', output)
        with open(os.path.join(out, 'metrics.json')) as handle:
            self.assertEqual(json.load(handle)['episodes'], 2)
        with open(os.path.join(out, 'run_config.json')) as handle:
            self.assertEqual(json.load(handle)['planner']['horizon'], 2)

    def test_export_tree_as_graph(self):
        path = os.path.join(self.tmp.name, 'red.dot')
        output = self.invoke('export-tree', '--profile', 'collision_si', '--format', 'graph',
                             '--horizon', '2', '--config-dir', self.tmp.name, '--out', path)
        self.assertIn('red posterior:', output)
        with open(path) as handle:
            self.assertTrue(handle.read().startswith('digraph G{'))


class TestExitCodes(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_success(self):
        self.assertEqual(main(['validate-model', '--task', 'foraging']), 0)

    def test_missing_profile(self):
        self.assertEqual(main(['run', '--profile', 'chess', '--config-dir', self.tmp.name]), 1)

    def test_invalid_override(self):
        args = ['run', '--profile', 'collision_si', '--temperature', '0',
                '--config-dir', self.tmp.name]
        self.assertEqual(main(args), 1)

    def test_usage_errors(self):
        self.assertEqual(main(['bogus']), 2)
        self.assertEqual(main(['run']), 2)
        self.assertEqual(main(['batch', '--profile', 'collision_si', '--seeds', '5-1',
                               '--config-dir', self.tmp.name]), 2)


if __name__ == '__main__':
    unittest.main()
