"""
Tests for planning-tree records, DOT export and text rendering.
"""
import os
import tempfile
import unittest

from tom_sim.core.simulator import RunConfig, run_episode
from tom_sim.environment.grid_world import TaskConfig, reset
from tom_sim.inference.belief import Categorical
from tom_sim.model.builders import build_collision_model, model_of_other
from tom_sim.planning.config import PlannerConfig, ToMPlannerConfig
from tom_sim.planning.sophisticated import plan
from tom_sim.planning.theory_of_mind import ToMBeliefState, tom_plan
from tom_sim.planning.tree import NodeKind, PlanNode, PlanTree, dumps_records, loads_records
from tom_sim.utils.errors import ExportError
from tom_sim.visualization.renderer import render_path, render_state, render_trace
from tom_sim.visualization.tree_export import export_tree, load_tree, tree_to_dot


def single_agent_tree(horizon=2):
    model = build_collision_model('focal', 9, start_cell=1, other_cell=9, horizon=horizon)
    return plan(model.prior_belief(), model, PlannerConfig())[1]


def joint_tree():
    focal = build_collision_model('focal', 9, start_cell=1, other_cell=9, horizon=1)
    other = model_of_other('collision', 1, start_cell=9, other_cell=1, horizon=1)
    return tom_plan(ToMBeliefState.from_models(focal, other), focal, other,
                    ToMPlannerConfig(horizon=1))[1]


class TestRecords(unittest.TestCase):
    def test_round_trip_is_lossless(self):
        for tree in (single_agent_tree(), joint_tree()):
            text = dumps_records(tree)
            restored = loads_records(text)
            self.assertEqual(dumps_records(restored), text)
            self.assertEqual(restored.node_count(), tree.node_count())
            self.assertEqual(restored.joint, tree.joint)
            self.assertEqual(restored.best_action(), tree.best_action())

    def test_header_comes_first(self):
        first = dumps_records(single_agent_tree()).splitlines()[0]
        self.assertIn('"record": "tree"', first)

    def test_malformed_text(self):
        headless = '{"joint": false, "action_names": ["a"], "posterior": [1.0]}'
        for text in ('', 'not json', headless):
            with self.assertRaises(ExportError):
                loads_records(text)


class TestExport(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_records_file(self):
        tree = single_agent_tree()
        path = export_tree(tree, os.path.join(self.tmp.name, 'trees', 'red.jsonl'))
        self.assertEqual(dumps_records(load_tree(path)), dumps_records(tree))

    def test_graph_file(self):
        tree = joint_tree()
        path = export_tree(tree, os.path.join(self.tmp.name, 'red.dot'), 'graph')
        with open(path) as handle:
            text = handle.read()
        self.assertTrue(text.startswith('digraph G{'))
        self.assertEqual(text.count('->'), tree.node_count() - 1)
        self.assertIn('shape=circle', text)
        self.assertIn('color=purple', text)
        self.assertIn('G=', text)

    def test_single_agent_graph_has_no_other_nodes(self):
        text = tree_to_dot(single_agent_tree(horizon=1))
        self.assertNotIn('color=purple', text)
        self.assertIn('shape=diamond', text)

    def test_empty_tree(self):
        empty = PlanTree(root=PlanNode(kind=NodeKind.BELIEF), posterior=Categorical.uniform(2),
                         action_names=('stay', 'go'))
        with self.assertRaises(ExportError):
            export_tree(empty, os.path.join(self.tmp.name, 'empty.jsonl'))

    def test_unknown_format(self):
        with self.assertRaises(ExportError):
            export_tree(single_agent_tree(horizon=1), os.path.join(self.tmp.name, 't.png'), 'png')

    def test_missing_file(self):
        with self.assertRaises(ExportError):
            load_tree(os.path.join(self.tmp.name, 'absent.jsonl'))


class TestRenderer(unittest.TestCase):
    def test_start_state(self):
        config = TaskConfig.foraging()
        lines = render_state(reset(config), config).splitlines()
        self.assertEqual(len(lines), 8)
        self.assertIn('*', lines[5])
        self.assertIn('r', lines[5])
        self.assertIn('p', lines[3])
        self.assertEqual(lines[-1], 'step 0  rewards [0, 0]')

    def test_trace_and_path(self):
        config = TaskConfig.collision()
        result = run_episode(RunConfig(), 0)
        self.assertEqual(render_path(result.trace, config, 0), [1, 5])
        self.assertEqual(render_path(result.trace, config, 1), [9, 5])
        text = render_trace(result.trace, config)
        self.assertIn('actions down_right / up_left', text)
        self.assertIn('RP', text)


if __name__ == '__main__':
    unittest.main()
