import logging
import math
from dataclasses import dataclass

import numpy as np
from opentelemetry import trace

from ..const import BOUND_MAX_LEVEL, PI4_OVER_36
from ..cover.greedy_cover import CoverHierarchy, greedy_cover
from ..exceptions import InputError
from ..gp.posterior import PosteriorState

_LOGGER = logging.getLogger(__name__)

tracer = trace.get_tracer(__name__)


@dataclass(frozen=True)
class Decision:
    chosen: int
    score: float
    # per-candidate (mean, exploration bonus), only when requested
    breakdown: tuple[np.ndarray, np.ndarray] | None = None


def _check_confidence(delta: float) -> None:
    if not 0.0 < delta < 1.0:
        raise InputError(f"Confidence delta must lie in (0, 1), got {delta}")


def level_weight(epsilon: float, size: int, level: int, t: int, delta: float) -> float:
    """H_i = eps_i * sqrt(2 log((|T_i| + 1) i^2 t^2 pi^4 / (36 delta)))"""
    _check_confidence(delta)
    if t < 1 or level < 1 or size < 1:
        raise InputError(f"Expected t, level, |T_i| >= 1, got {t}, {level}, {size}")
    return epsilon * math.sqrt(
        2.0 * math.log((size + 1) * level**2 * t**2 * PI4_OVER_36 / delta)
    )


def level_weights(hierarchy: CoverHierarchy, t: int, delta: float) -> np.ndarray:
    return np.array(
        [
            level_weight(level.radius, level.size, level.level_index, t, delta)
            for level in hierarchy.levels
        ]
    )


def chaining_bonus(sigma: np.ndarray, hierarchy: CoverHierarchy, weights: np.ndarray) -> np.ndarray:
    """Sum of H_i over the levels with sigma_min <= eps_i < sigma(x)."""
    radii = hierarchy.radii
    active = (radii[None, :] < sigma[:, None]) & (radii[None, :] >= hierarchy.sigma_min)
    return active.astype(float) @ weights


def chaining_select(
    state: PosteriorState,
    hierarchy: CoverHierarchy,
    t: int,
    delta: float,
    keep_breakdown: bool = False,
) -> Decision:
    mean, sigma = state.posterior_summary()
    bonus = chaining_bonus(sigma, hierarchy, level_weights(hierarchy, t, delta))
    score = mean + bonus
    chosen = int(np.argmax(score))
    _LOGGER.debug(
        f"Chaining-UCB t={t}: chose {chosen} (mean {mean[chosen]:.4g}, bonus {bonus[chosen]:.4g})"
    )
    return Decision(chosen, float(score[chosen]), (mean, bonus) if keep_breakdown else None)


def gp_ucb_beta(space_size: int, t: int, delta: float) -> float:
    """beta_t = 2 log(|X| t^2 pi^2 / (6 delta))"""
    _check_confidence(delta)
    if t < 1:
        raise InputError(f"Iteration must be >= 1, got {t}")
    return 2.0 * math.log(space_size * t**2 * math.pi**2 / (6.0 * delta))


def gp_ucb_select(
    state: PosteriorState,
    t: int,
    delta: float,
    space_size: int | None = None,
    keep_breakdown: bool = False,
) -> Decision:
    if space_size is None:
        space_size = state.space.size
    mean, sigma = state.posterior_summary()
    bonus = math.sqrt(gp_ucb_beta(space_size, t, delta)) * sigma
    score = mean + bonus
    chosen = int(np.argmax(score))
    return Decision(chosen, float(score[chosen]), (mean, bonus) if keep_breakdown else None)


def random_select(state: PosteriorState, rng: np.random.Generator) -> Decision:
    """Uniform choice among never-queried points; uniform over all once none is left.

    Random search has no acquisition value, so the score is NaN.
    """
    pool = np.setdiff1d(np.arange(state.space.size), np.asarray(state.queried, dtype=np.intp))
    if len(pool) == 0:
        _LOGGER.warning("Every point has been queried, re-querying uniformly")
        pool = np.arange(state.space.size)
    return Decision(int(rng.choice(pool)), math.nan)


def shifted_bonus(decision: Decision) -> np.ndarray:
    """Exploration bonus shifted so that its minimum over the space is zero."""
    if decision.breakdown is None:
        raise InputError("Decision was made without keep_breakdown")
    bonus = decision.breakdown[1]
    return bonus - bonus.min()


def theorem1_constant(n: int, delta: float) -> float:
    """c_{n,delta} = 6 sqrt(log(n^2 pi^4 / (36 delta))) + 15"""
    _check_confidence(delta)
    return 6.0 * math.sqrt(math.log(n**2 * PI4_OVER_36 / delta)) + 15.0


def theorem1_deviation_term(sigma_n: float, n: int, delta: float) -> float:
    """sigma_n (c_{n,delta} - 6 log sigma_n)"""
    return sigma_n * (theorem1_constant(n, delta) - 6.0 * math.log(sigma_n))


def theorem1_bound(
    state: PosteriorState,
    x: int,
    n: int,
    delta: float,
    hierarchy: CoverHierarchy,
    estimates: dict[float, int] | None = None,
) -> float:
    """High-probability bound on sup f - f(x_n) for the point chosen at iteration n.

    Covering numbers at radius 2^-i are replaced by greedy cover sizes. Levels of
    ``hierarchy`` are reused where the radii coincide; ``estimates`` caches the
    rest by radius. The sum over all small radii is cut once the estimate reaches
    |X| (or at ``BOUND_MAX_LEVEL``) and the tail is bounded with log |X|.
    """
    sigma_n = float(state.sigma[x])
    if not sigma_n > 0:
        raise InputError(f"Posterior deviation at index {x} is {sigma_n}, expected > 0")
    if estimates is None:
        estimates = {}
    size = state.space.size
    everything = np.arange(size)

    def covering_estimate(radius: float) -> int:
        if radius not in estimates:
            level = hierarchy.level_with_radius(radius)
            if level is not None:
                estimates[radius] = level.size
            else:
                estimates[radius] = len(greedy_cover(everything, state.distance, radius))
        return estimates[radius]

    with tracer.start_as_current_span("theorem1_bound"):
        first = max(1, math.floor(-math.log2(sigma_n)) + 1)
        while first > 1 and math.ldexp(1.0, -(first - 1)) < sigma_n:
            first -= 1
        while math.ldexp(1.0, -first) >= sigma_n:
            first += 1

        chained = 0.0
        level = first
        for level in range(first, max(first, BOUND_MAX_LEVEL) + 1):
            radius = math.ldexp(1.0, -level)
            estimate = covering_estimate(radius)
            chained += radius * math.sqrt(math.log(estimate))
            if estimate >= size:
                break
        chained += math.ldexp(1.0, -level) * math.sqrt(math.log(size))

        return theorem1_deviation_term(sigma_n, n, delta) + 9.0 * chained
