import unittest

import numpy as np
import pytest

from chaining_ucb.bench.runner import run_experiment
from chaining_ucb.bench.stats import aggregate, bound_violation_stats, regret_rate_ratio
from chaining_ucb.config import ExperimentConfig
from chaining_ucb.shared.shared import ObjectiveKind, PolicyName


def final_simple_regret(traces, policy: PolicyName) -> float:
    return float(aggregate(traces[policy]).mean_simple_regret[-1])


@pytest.mark.slow
class TestRegretBound(unittest.TestCase):
    def test_violation_frequency(self):
        config = ExperimentConfig(
            ObjectiveKind.SAMPLED_GP,
            space_size=200,
            bandwidth=1.0,
            noise_sd=0.05,
            delta=0.05,
            n_iters=30,
            n_runs=100,
            base_seed=2024,
            policies=(PolicyName.CHAINING_UCB,),
            compute_bound=True,
        )
        traces = run_experiment(config)
        stats = bound_violation_stats(traces[PolicyName.CHAINING_UCB], config.delta)
        self.assertEqual(stats.runs, 100)
        # binomial slack of 0.05 at 100 runs
        self.assertLessEqual(stats.frequency, config.delta + 0.05)


@pytest.mark.slow
class TestPolicyComparison(unittest.TestCase):
    def test_noiseless_limit(self):
        config = ExperimentConfig(
            ObjectiveKind.SAMPLED_GP,
            space_size=100,
            noise_sd=1e-6,
            n_iters=50,
            n_runs=16,
            base_seed=5,
            policies=(PolicyName.CHAINING_UCB, PolicyName.RANDOM),
        )
        traces = run_experiment(config)
        self.assertLessEqual(
            final_simple_regret(traces, PolicyName.CHAINING_UCB),
            final_simple_regret(traces, PolicyName.RANDOM),
        )

    def assert_competitive(self, traces):
        chaining = final_simple_regret(traces, PolicyName.CHAINING_UCB)
        self.assertLess(chaining, final_simple_regret(traces, PolicyName.RANDOM))
        self.assertLessEqual(chaining, 1.25 * final_simple_regret(traces, PolicyName.GP_UCB))

    def test_sampled_gp(self):
        config = ExperimentConfig(
            ObjectiveKind.SAMPLED_GP,
            space_size=500,
            n_iters=100,
            n_runs=16,
            base_seed=17,
        )
        self.assert_competitive(run_experiment(config))

    def test_himmelblau(self):
        config = ExperimentConfig(
            ObjectiveKind.HIMMELBLAU,
            space_size=900,
            n_iters=100,
            n_runs=8,
            base_seed=17,
        )
        self.assert_competitive(run_experiment(config))

    def test_graph_space(self):
        config = ExperimentConfig(
            ObjectiveKind.GRAPH_SPACE,
            space_size=300,
            n_iters=100,
            n_runs=8,
            base_seed=17,
        )
        self.assert_competitive(run_experiment(config))


@pytest.mark.slow
class TestRegretRate(unittest.TestCase):
    def test_rate_ratio_does_not_blow_up(self):
        config = ExperimentConfig(
            ObjectiveKind.SAMPLED_GP,
            space_size=400,
            n_iters=200,
            n_runs=16,
            base_seed=31,
            policies=(PolicyName.CHAINING_UCB,),
        )
        runs = run_experiment(config)[PolicyName.CHAINING_UCB]
        early = regret_rate_ratio(runs, config.dimension, 50)
        late = regret_rate_ratio(runs, config.dimension, 200)
        self.assertTrue(np.isfinite(late))
        self.assertLessEqual(late, 2 * early)


if __name__ == "__main__":
    unittest.main()
