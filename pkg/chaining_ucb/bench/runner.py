import asyncio
import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from opentelemetry import trace

from ..config import ExperimentConfig
from ..cover.greedy_cover import build_hierarchy
from ..exceptions import ChainingUcbError, ConfigError, InputError, RunFailedError
from ..gp.posterior import PosteriorState, bandwidth_grid, select_bandwidth
from ..policy.policies import (
    chaining_select,
    gp_ucb_select,
    random_select,
    theorem1_bound,
)
from ..policy_types import POLICY_TYPES
from ..shared.shared import ObjectiveKind, PolicyName
from .objectives import (
    Objective,
    make_gp_objective,
    make_graph_objective,
    make_himmelblau_objective,
)

_LOGGER = logging.getLogger(__name__)

tracer = trace.get_tracer(__name__)

# substream owner for draws every policy of a run shares
SHARED = "shared"


def substream(run_seed: int, owner: str, purpose: str) -> np.random.Generator:
    """Independent generator named by (run seed, owner, purpose).

    Adding a policy never shifts the draws another policy sees.
    """
    digest = hashlib.sha256(f"{run_seed}/{owner}/{purpose}".encode("utf-8")).digest()
    return np.random.default_rng(int.from_bytes(digest[:16], "little"))


@dataclass
class RegretTrace:
    """Per-iteration record of one policy in one run, iterations t = 1 .. n_iters."""

    policy: PolicyName
    run: int
    seed: int
    chosen: np.ndarray
    y: np.ndarray
    inst_regret: np.ndarray
    simple_regret: np.ndarray
    cum_regret: np.ndarray
    bound: np.ndarray | None = field(default=None)

    @classmethod
    def from_queries(
        cls,
        policy: PolicyName,
        run: int,
        seed: int,
        objective: Objective,
        chosen,
        y,
        bound=None,
    ) -> "RegretTrace":
        chosen = np.asarray(chosen, dtype=np.int64)
        inst = objective.opt_value - objective.truth[chosen]
        best = np.maximum.accumulate(objective.truth[chosen])
        return cls(
            policy=PolicyName(policy),
            run=run,
            seed=seed,
            chosen=chosen,
            y=np.asarray(y, dtype=float),
            inst_regret=inst,
            simple_regret=objective.opt_value - best,
            cum_regret=np.cumsum(inst),
            bound=None if bound is None else np.asarray(bound, dtype=float),
        )

    def __len__(self) -> int:
        return len(self.chosen)


def _initial_design(config: ExperimentConfig, size: int, run_seed: int) -> np.ndarray:
    if config.n_init == 0:
        return np.empty(0, dtype=np.intp)
    rng = substream(run_seed, SHARED, "design")
    return rng.choice(size, size=config.n_init, replace=config.n_init > size)


def make_objective(config: ExperimentConfig, run_seed: int) -> Objective:
    rng = substream(run_seed, SHARED, "objective")
    if config.objective == ObjectiveKind.SAMPLED_GP:
        return make_gp_objective(config, rng)
    if config.objective == ObjectiveKind.GRAPH_SPACE:
        return make_graph_objective(config, rng)
    return make_himmelblau_objective(config)


def _decide(
    policy: PolicyName,
    state: PosteriorState,
    t: int,
    config: ExperimentConfig,
    choice_rng: np.random.Generator,
):
    hierarchy = build_hierarchy(state) if POLICY_TYPES[policy]["uses_hierarchy"] else None
    if policy == PolicyName.CHAINING_UCB:
        return chaining_select(state, hierarchy, t, config.delta), hierarchy
    if policy == PolicyName.GP_UCB:
        return gp_ucb_select(state, t, config.delta), None
    return random_select(state, choice_rng), None


def _run_policy(
    policy: PolicyName,
    base_state: PosteriorState,
    objective: Objective,
    config: ExperimentConfig,
    run_index: int,
    run_seed: int,
) -> RegretTrace:
    with_bound = config.compute_bound and POLICY_TYPES[policy]["supports_bound"]
    noise_rng = substream(run_seed, policy, "noise")
    choice_rng = substream(run_seed, policy, "choice")
    state = base_state.copy()
    chosen, ys, bounds = [], [], []

    with tracer.start_as_current_span("run_policy") as span:
        span.set_attribute("policy", str(policy))
        span.set_attribute("run_seed", str(run_seed))
        for t in range(1, config.n_iters + 1):
            decision, hierarchy = _decide(policy, state, t, config, choice_rng)
            if with_bound:
                bounds.append(
                    theorem1_bound(state, decision.chosen, t, config.delta, hierarchy)
                )
            y = objective.observe(decision.chosen, noise_rng)
            state.extend(decision.chosen, y)
            chosen.append(decision.chosen)
            ys.append(y)

    return RegretTrace.from_queries(
        policy, run_index, run_seed, objective, chosen, ys, bounds if with_bound else None
    )


def _prepare_run(config: ExperimentConfig, run_seed: int) -> tuple[Objective, PosteriorState]:
    """Objective of the run and the posterior after its shared initial design."""
    objective = make_objective(config, run_seed)
    design = _initial_design(config, objective.space.size, run_seed)
    init_rng = substream(run_seed, SHARED, "init-noise")
    init_y = [objective.observe(x, init_rng) for x in design]

    if config.resolved_select_bandwidth and len(design) > 0:
        grid = bandwidth_grid(config.bandwidth_min, config.bandwidth_max, config.bandwidth_grid_size)
        bandwidth = select_bandwidth(objective.space.points, design, init_y, config.noise_var, grid)
        objective = objective.with_bandwidth(bandwidth)

    base_state = PosteriorState(objective.space, config.noise_var)
    for x, y in zip(design, init_y):
        base_state.extend(x, y)
    return objective, base_state


def posterior_snapshot(
    config: ExperimentConfig, steps: int = 0, run_index: int = 0
) -> tuple[Objective, PosteriorState]:
    """Posterior of one run after the initial design and ``steps`` Chaining-UCB iterations.

    The queries and observation noise are the ones the same run of ``run_experiment``
    draws for Chaining-UCB.
    """
    if steps < 0:
        raise InputError(f"Steps must be >= 0, got {steps}")
    run_seed = config.base_seed + run_index
    with tracer.start_as_current_span("posterior_snapshot") as span:
        span.set_attribute("run_seed", str(run_seed))
        span.set_attribute("steps", steps)
        objective, state = _prepare_run(config, run_seed)
        policy = PolicyName.CHAINING_UCB
        noise_rng = substream(run_seed, policy, "noise")
        choice_rng = substream(run_seed, policy, "choice")
        for t in range(1, steps + 1):
            decision, _ = _decide(policy, state, t, config, choice_rng)
            state.extend(decision.chosen, objective.observe(decision.chosen, noise_rng))
    return objective, state


def _run_single(config: ExperimentConfig, run_index: int) -> dict[PolicyName, RegretTrace]:
    """Execute every configured policy on one run. Module level so it pickles."""
    run_seed = config.base_seed + run_index
    with tracer.start_as_current_span("run") as span:
        span.set_attribute("run_seed", str(run_seed))
        try:
            objective, base_state = _prepare_run(config, run_seed)
            traces = {
                policy: _run_policy(policy, base_state, objective, config, run_index, run_seed)
                for policy in config.policies
            }
        except ConfigError:
            raise
        except ChainingUcbError as e:
            _LOGGER.error(f"Run {run_index} failed: {e}")
            raise RunFailedError(f"Run {run_index} failed: {e}", run_seed) from e

    finals = ", ".join(f"{p} S={tr.simple_regret[-1]:.4g}" for p, tr in traces.items())
    _LOGGER.debug(f"Run {run_index} done: {finals}")
    return traces


def _collect(
    config: ExperimentConfig, results: list[dict[PolicyName, RegretTrace]]
) -> dict[PolicyName, list[RegretTrace]]:
    return {policy: [run[policy] for run in results] for policy in config.policies}


def run_experiment(config: ExperimentConfig) -> dict[PolicyName, list[RegretTrace]]:
    """Run ``n_runs`` seeded repetitions; one trace per policy and run, in run order."""
    with tracer.start_as_current_span("run_experiment") as span:
        span.set_attribute("objective", str(config.objective))
        span.set_attribute("n_runs", config.n_runs)
        _LOGGER.info(
            f"Running {config.n_runs} runs of {config.objective} with policies "
            f"{', '.join(config.policies)}"
        )
        results = [_run_single(config, r) for r in range(config.n_runs)]
        return _collect(config, results)


async def async_run_experiment(
    config: ExperimentConfig, jobs: int = 1
) -> dict[PolicyName, list[RegretTrace]]:
    """Same result as ``run_experiment`` with runs spread over ``jobs`` processes."""
    if jobs <= 1:
        return run_experiment(config)
    loop = asyncio.get_running_loop()
    with tracer.start_as_current_span("async_run_experiment") as span:
        span.set_attribute("jobs", jobs)
        _LOGGER.info(f"Running {config.n_runs} runs on {jobs} worker processes")
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [
                loop.run_in_executor(pool, _run_single, config, r) for r in range(config.n_runs)
            ]
            results = await asyncio.gather(*futures)
        return _collect(config, list(results))
