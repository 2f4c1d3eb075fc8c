import tempfile
import unittest
from pathlib import Path

from chaining_ucb.config import (
    CONFIG_SCHEMA,
    ExperimentConfig,
    load_config,
    parse_config,
    serialize_config,
)
from chaining_ucb.exceptions import ConfigError, InputError
from chaining_ucb.shared.shared import ObjectiveKind, PolicyName

SE_CONFIG = """\
# small SE experiment
objective = sampled-gp
space_size = 200
n_iters = 30   # iterations per run
n_runs = 4
base_seed = 7
policies = chaining-ucb, random
compute_bound = true
"""


class TestParseConfig(unittest.TestCase):
    def test_values_and_defaults(self):
        config = parse_config(SE_CONFIG)
        self.assertEqual(config.objective, ObjectiveKind.SAMPLED_GP)
        self.assertEqual(config.space_size, 200)
        self.assertEqual(config.n_iters, 30)
        self.assertEqual(config.policies, (PolicyName.CHAINING_UCB, PolicyName.RANDOM))
        self.assertTrue(config.compute_bound)
        self.assertEqual(config.noise_sd, 0.05)
        self.assertEqual(config.delta, 0.05)
        self.assertEqual(config.n_init, 10)
        self.assertEqual(config.resolved_domain_low, 0.0)
        self.assertEqual(config.resolved_domain_high, 20.0)
        self.assertEqual(config.resolved_bandwidth, 1.0)
        self.assertFalse(config.resolved_select_bandwidth)

    def test_objective_converted_by_schema(self):
        for kind in ObjectiveKind:
            validated = CONFIG_SCHEMA({"objective": kind.value})
            self.assertIs(validated["objective"], kind)
        config = parse_config("objective = graph-space\n")
        self.assertIs(type(config.objective), ObjectiveKind)

    def test_himmelblau_defaults(self):
        config = parse_config("objective = himmelblau\n")
        self.assertEqual(config.resolved_domain_low, -6.0)
        self.assertEqual(config.resolved_domain_high, 6.0)
        self.assertTrue(config.resolved_select_bandwidth)
        self.assertEqual(config.himmelblau_scale, 100.0)
        self.assertEqual((config.himmelblau_trend_x, config.himmelblau_trend_y), (1.0, 1.0))

    def test_round_trip(self):
        config = parse_config(SE_CONFIG)
        text = serialize_config(config)
        self.assertEqual(parse_config(text), config)
        self.assertEqual(serialize_config(parse_config(text)), text)

    def test_serialized_keys_sorted(self):
        keys = [line.split(" = ")[0] for line in serialize_config(parse_config(SE_CONFIG)).splitlines()]
        self.assertEqual(keys, sorted(keys))
        self.assertNotIn("graph_file", keys)

    def test_unknown_key(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("objective = sampled-gp\ncolour = blue\n")
        self.assertEqual(ctx.exception.key, "colour")
        self.assertEqual(ctx.exception.line, 2)

    def test_bad_value_names_key_and_line(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("objective = sampled-gp\n\ndelta = 1.5\n")
        self.assertEqual(ctx.exception.key, "delta")
        self.assertEqual(ctx.exception.line, 3)
        self.assertIn("line 3", str(ctx.exception))

    def test_missing_objective(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("n_runs = 3\n")
        self.assertEqual(ctx.exception.key, "objective")

    def test_unknown_policy(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("objective = sampled-gp\npolicies = chaining-ucb, thompson\n")
        self.assertEqual(ctx.exception.key, "policies")

    def test_duplicate_key(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("objective = sampled-gp\nn_runs = 1\nn_runs = 2\n")
        self.assertEqual(ctx.exception.line, 3)

    def test_malformed_line(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("objective = sampled-gp\nn_runs 3\n")
        self.assertEqual(ctx.exception.line, 2)

    def test_domain_order(self):
        with self.assertRaises(ConfigError) as ctx:
            parse_config("objective = sampled-gp\ndomain_low = 5\ndomain_high = 1\n")
        self.assertEqual(ctx.exception.key, "domain_high")

    def test_graph_node_bounds(self):
        with self.assertRaises(ConfigError):
            parse_config("objective = graph-space\ngraph_min_nodes = 10\ngraph_max_nodes = 5\n")
        with self.assertRaises(ConfigError):
            parse_config("objective = graph-space\ngraph_max_nodes = 25\n")

    def test_bandwidth_selection_needs_vectors(self):
        with self.assertRaises(ConfigError):
            parse_config("objective = graph-space\nselect_bandwidth = true\n")

    def test_zero_noise(self):
        with self.assertRaises(ConfigError):
            parse_config("objective = sampled-gp\nnoise_sd = 0\n")

    def test_load_missing_file(self):
        with self.assertRaises(ConfigError):
            load_config("/nonexistent/se.cfg")

    def test_load(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "se.cfg"
            path.write_text(SE_CONFIG, encoding="utf-8")
            self.assertEqual(load_config(path), parse_config(SE_CONFIG))

    def test_sample_configs(self):
        docs = Path(__file__).resolve().parent.parent / "docs"
        samples = sorted(docs.glob("*.cfg"))
        self.assertEqual(len(samples), 4)
        kinds = {load_config(path).objective for path in samples}
        self.assertEqual(kinds, set(ObjectiveKind))


class TestExperimentConfig(unittest.TestCase):
    def test_invariants(self):
        with self.assertRaises(InputError):
            ExperimentConfig(ObjectiveKind.SAMPLED_GP, delta=1.0)
        with self.assertRaises(InputError):
            ExperimentConfig(ObjectiveKind.SAMPLED_GP, n_iters=0)
        with self.assertRaises(InputError):
            ExperimentConfig(ObjectiveKind.SAMPLED_GP, noise_sd=-0.1)

    def test_from_mapping(self):
        config = ExperimentConfig.from_mapping({"objective": "graph-space", "space_size": "40"})
        self.assertEqual(config.space_size, 40)
        self.assertIsNone(config.resolved_domain_low)

    def test_replace(self):
        config = ExperimentConfig(ObjectiveKind.SAMPLED_GP).replace(base_seed=9)
        self.assertEqual(config.base_seed, 9)


if __name__ == "__main__":
    unittest.main()
