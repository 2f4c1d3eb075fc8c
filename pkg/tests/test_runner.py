import asyncio
import pickle
import unittest
from unittest.mock import patch

import numpy as np
from numpy.testing import assert_allclose

from chaining_ucb.bench.objectives import Objective
from chaining_ucb.bench.runner import (
    RegretTrace,
    _run_single,
    async_run_experiment,
    posterior_snapshot,
    run_experiment,
    substream,
)
from chaining_ucb.config import ExperimentConfig
from chaining_ucb.exceptions import InputError, NumericalError, RunFailedError
from chaining_ucb.gp.posterior import SearchSpace
from chaining_ucb.shared.shared import ObjectiveKind, PolicyName


def small_config(**changes) -> ExperimentConfig:
    values = {
        "space_size": 60,
        "n_init": 5,
        "n_iters": 8,
        "n_runs": 3,
        "base_seed": 11,
        "domain_high": 8.0,
    }
    values.update(changes)
    return ExperimentConfig(ObjectiveKind.SAMPLED_GP, **values)


def assert_traces_equal(test: unittest.TestCase, a, b):
    test.assertEqual(list(a), list(b))
    for policy in a:
        for x, y in zip(a[policy], b[policy]):
            test.assertTrue(np.array_equal(x.chosen, y.chosen))
            test.assertTrue(np.array_equal(x.y, y.y))
            test.assertTrue(np.array_equal(x.cum_regret, y.cum_regret))


class TestSubstream(unittest.TestCase):
    def test_named_streams(self):
        a = substream(3, "random", "noise").standard_normal(4)
        b = substream(3, "random", "noise").standard_normal(4)
        c = substream(3, "gp-ucb", "noise").standard_normal(4)
        d = substream(4, "random", "noise").standard_normal(4)
        self.assertTrue(np.array_equal(a, b))
        self.assertFalse(np.array_equal(a, c))
        self.assertFalse(np.array_equal(a, d))


class TestRegretTrace(unittest.TestCase):
    def test_from_queries(self):
        space = SearchSpace(np.zeros((3, 1)), np.eye(3))
        objective = Objective(space, [0.0, 1.0, 3.0], 0.05)
        trace = RegretTrace.from_queries("random", 0, 7, objective, [0, 1, 0, 2], [0.1, 0.9, 0.0, 3.1])
        self.assertEqual(trace.inst_regret.tolist(), [3.0, 2.0, 3.0, 0.0])
        self.assertEqual(trace.simple_regret.tolist(), [3.0, 2.0, 2.0, 0.0])
        self.assertEqual(trace.cum_regret.tolist(), [3.0, 5.0, 8.0, 8.0])
        self.assertIsNone(trace.bound)
        self.assertEqual(len(trace), 4)
        self.assertEqual(trace.policy, PolicyName.RANDOM)


class TestRunExperiment(unittest.TestCase):
    def test_trivial_space(self):
        config = small_config(space_size=1, n_init=0, n_iters=1, n_runs=1)
        traces = run_experiment(config)
        for policy in PolicyName:
            trace = traces[policy][0]
            self.assertEqual(trace.chosen.tolist(), [0])
            self.assertEqual(trace.inst_regret.tolist(), [0.0])

    def test_shapes_and_invariants(self):
        config = small_config()
        traces = run_experiment(config)
        self.assertEqual(set(traces), set(PolicyName))
        for runs in traces.values():
            self.assertEqual([trace.run for trace in runs], [0, 1, 2])
            self.assertEqual([trace.seed for trace in runs], [11, 12, 13])
            for trace in runs:
                self.assertEqual(len(trace), 8)
                self.assertTrue(np.all(np.diff(trace.simple_regret) <= 0))
                self.assertTrue(np.all(np.diff(trace.cum_regret) >= 0))
                self.assertTrue(np.all(trace.simple_regret <= trace.inst_regret))

    def test_deterministic(self):
        assert_traces_equal(self, run_experiment(small_config()), run_experiment(small_config()))

    def test_policies_do_not_disturb_each_other(self):
        alone = run_experiment(small_config(policies=(PolicyName.GP_UCB,)))
        together = run_experiment(small_config())
        for a, b in zip(alone[PolicyName.GP_UCB], together[PolicyName.GP_UCB]):
            self.assertTrue(np.array_equal(a.chosen, b.chosen))
            self.assertTrue(np.array_equal(a.y, b.y))

    def test_shared_initial_state(self):
        seen = []

        def record(policy, base_state, *args):
            seen.append((list(base_state.queried), list(base_state.observations)))
            return original(policy, base_state, *args)

        from chaining_ucb.bench import runner

        original = runner._run_policy
        with patch.object(runner, "_run_policy", side_effect=record):
            runner._run_single(small_config(), 0)
        self.assertEqual(len(seen), 3)
        self.assertTrue(all(entry == seen[0] for entry in seen))
        self.assertEqual(len(seen[0][0]), 5)

    def test_bound_only_for_chaining(self):
        traces = run_experiment(small_config(compute_bound=True, n_runs=1))
        self.assertIsNotNone(traces[PolicyName.CHAINING_UCB][0].bound)
        self.assertTrue(np.all(traces[PolicyName.CHAINING_UCB][0].bound >= 0))
        self.assertIsNone(traces[PolicyName.GP_UCB][0].bound)
        self.assertIsNone(traces[PolicyName.RANDOM][0].bound)

    def test_himmelblau_selects_bandwidth(self):
        config = ExperimentConfig(
            ObjectiveKind.HIMMELBLAU,
            space_size=100,
            n_init=10,
            n_iters=3,
            n_runs=1,
            bandwidth_grid_size=3,
        )
        with patch("chaining_ucb.bench.runner.select_bandwidth", return_value=0.7) as selector:
            traces = run_experiment(config)
        selector.assert_called_once()
        self.assertEqual(len(traces[PolicyName.RANDOM][0]), 3)

    def test_graph_space(self):
        config = ExperimentConfig(
            ObjectiveKind.GRAPH_SPACE, space_size=30, n_init=3, n_iters=4, n_runs=2
        )
        traces = run_experiment(config)
        self.assertEqual(len(traces[PolicyName.CHAINING_UCB]), 2)

    def test_failure_reports_seed(self):
        config = small_config()
        with patch(
            "chaining_ucb.bench.runner.build_hierarchy",
            side_effect=NumericalError("breakdown"),
        ):
            with self.assertRaises(RunFailedError) as ctx:
                run_experiment(config)
        self.assertEqual(ctx.exception.seed, 11)
        self.assertIn("run seed 11", str(ctx.exception))

    def test_run_seed_span_attribute_is_text(self):
        from chaining_ucb.bench import runner

        config = small_config(base_seed=2**64 - 1, n_runs=1, n_iters=2)
        with patch.object(runner, "tracer") as tracer:
            runner.run_experiment(config)
        span = tracer.start_as_current_span.return_value.__enter__.return_value
        seeds = [c.args[1] for c in span.set_attribute.call_args_list if c.args[0] == "run_seed"]
        self.assertEqual(len(seeds), 1 + len(PolicyName))
        self.assertTrue(all(seed == str(2**64 - 1) for seed in seeds))

    def test_run_failed_error_pickles(self):
        error = pickle.loads(pickle.dumps(RunFailedError("Run 2 failed", 13)))
        self.assertEqual(error.seed, 13)
        self.assertEqual(str(error), "Run 2 failed (run seed 13)")

    def test_single_run_pickles(self):
        result = pickle.loads(pickle.dumps(_run_single(small_config(n_iters=2), 0)))
        self.assertEqual(len(result[PolicyName.RANDOM]), 2)


class TestPosteriorSnapshot(unittest.TestCase):
    def test_follows_first_chaining_run(self):
        config = small_config(n_runs=1, policies=(PolicyName.CHAINING_UCB,))
        trace = run_experiment(config)[PolicyName.CHAINING_UCB][0]
        objective, state = posterior_snapshot(config, steps=4)
        self.assertEqual(state.n, config.n_init + 4)
        self.assertEqual(state.queried[config.n_init :], trace.chosen[:4].tolist())
        assert_allclose(state.observations[config.n_init :], trace.y[:4])
        self.assertEqual(objective.space.size, config.space_size)

    def test_initial_design_only(self):
        _, state = posterior_snapshot(small_config(), steps=0)
        self.assertEqual(state.n, 5)

    def test_negative_steps(self):
        with self.assertRaises(InputError):
            posterior_snapshot(small_config(), steps=-1)


class TestAsyncRunExperiment(unittest.TestCase):
    def test_same_result_with_worker_processes(self):
        config = small_config(n_runs=4, n_iters=4)
        parallel = asyncio.run(async_run_experiment(config, jobs=2))
        assert_traces_equal(self, run_experiment(config), parallel)

    def test_single_job_runs_inline(self):
        config = small_config(n_runs=1, n_iters=2)
        with patch("chaining_ucb.bench.runner.ProcessPoolExecutor") as pool:
            asyncio.run(async_run_experiment(config, jobs=1))
        pool.assert_not_called()


if __name__ == "__main__":
    unittest.main()
