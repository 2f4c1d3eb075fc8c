import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from ..config import ExperimentConfig
from ..exceptions import ConfigError, InputError
from ..gp.posterior import SearchSpace, sample_prior
from ..kernel.graphs import DirectedGraph, load_graphs, random_digraph
from ..kernel.kernels import KernelKind, KernelSpec

_LOGGER = logging.getLogger(__name__)


@dataclass
class Objective:
    """Ground truth f over a search space with a Gaussian observation oracle."""

    space: SearchSpace
    truth: np.ndarray = field(repr=False)
    noise_sd: float
    opt_value: float = field(init=False)
    opt_index: int = field(init=False)

    def __post_init__(self):
        self.truth = np.asarray(self.truth, dtype=float)
        if len(self.truth) != self.space.size:
            raise InputError(f"{len(self.truth)} truth values for {self.space.size} points")
        self.opt_index = int(np.argmax(self.truth))
        self.opt_value = float(self.truth[self.opt_index])

    def observe(self, index: int, rng: np.random.Generator) -> float:
        """y = f(x) + eta, eta ~ N(0, noise_sd^2)"""
        return float(self.truth[index] + self.noise_sd * rng.standard_normal())

    def regret(self, index: int) -> float:
        return self.opt_value - float(self.truth[index])

    def with_bandwidth(self, bandwidth: float) -> "Objective":
        """Same points and truth under an SE prior of another bandwidth."""
        if self.space.spec is None or self.space.spec.kind != KernelKind.SQUARED_EXPONENTIAL:
            raise InputError("Only SE objectives can change their bandwidth")
        space = SearchSpace.from_points(
            self.space.points, KernelSpec.squared_exponential(bandwidth)
        )
        return Objective(space, self.truth, self.noise_sd)


def uniform_design(
    rng: np.random.Generator, size: int, dimension: int, low: float, high: float
) -> np.ndarray:
    """Latin hypercube sample of ``size`` points in the box [low, high]^dimension."""
    sampler = qmc.LatinHypercube(d=dimension, seed=rng)
    return qmc.scale(sampler.random(size), [low] * dimension, [high] * dimension)


def _check_sampled_size(config: ExperimentConfig, size: int) -> None:
    if size > config.max_sampled_size:
        raise ConfigError(
            f"Space of {size} points exceeds the prior sampling limit of "
            f"{config.max_sampled_size} points",
            key="space_size",
        )


def make_gp_objective(config: ExperimentConfig, rng: np.random.Generator) -> Objective:
    _check_sampled_size(config, config.space_size)
    points = uniform_design(
        rng, config.space_size, config.dimension, config.resolved_domain_low, config.resolved_domain_high
    )
    space = SearchSpace.from_points(
        points, KernelSpec.squared_exponential(config.resolved_bandwidth)
    )
    truth = sample_prior(space, rng, config.jitter)
    _LOGGER.debug(f"Sampled GP objective on {space.size} points, max {truth.max():.4g}")
    return Objective(space, truth, config.noise_sd)


def himmelblau(points: np.ndarray, scale: float, trend_x: float, trend_y: float) -> np.ndarray:
    """Negated, scaled Himmelblau function plus a linear trend (to be maximized)."""
    x, y = points[:, 0], points[:, 1]
    bowl = (x**2 + y - 11.0) ** 2 + (x + y**2 - 7.0) ** 2
    return -bowl / scale + trend_x * x + trend_y * y


def himmelblau_grid(config: ExperimentConfig) -> tuple[np.ndarray, np.ndarray]:
    """Regular grid of round(sqrt(space_size))^2 points and the truth on it."""
    side = max(1, int(round(math.sqrt(config.space_size))))
    axis = np.linspace(config.resolved_domain_low, config.resolved_domain_high, side)
    gx, gy = np.meshgrid(axis, axis, indexing="xy")
    points = np.column_stack([gx.ravel(), gy.ravel()])
    truth = himmelblau(
        points, config.himmelblau_scale, config.himmelblau_trend_x, config.himmelblau_trend_y
    )
    return points, truth


def make_himmelblau_objective(
    config: ExperimentConfig, bandwidth: float | None = None
) -> Objective:
    if config.dimension != 2:
        raise ConfigError("Himmelblau objective is two dimensional", key="dimension")
    points, truth = himmelblau_grid(config)
    if bandwidth is None:
        bandwidth = config.resolved_bandwidth
    space = SearchSpace.from_points(points, KernelSpec.squared_exponential(bandwidth))
    return Objective(space, truth, config.noise_sd)


def make_graphs(config: ExperimentConfig, rng: np.random.Generator) -> list[DirectedGraph]:
    if config.graph_file is not None:
        return load_graphs(config.graph_file)
    return [
        random_digraph(
            rng,
            config.graph_min_nodes,
            config.graph_max_nodes,
            config.graph_edge_scale,
            graph_id=str(index),
        )
        for index in range(config.space_size)
    ]


def make_graph_objective(config: ExperimentConfig, rng: np.random.Generator) -> Objective:
    graphs = make_graphs(config, rng)
    _check_sampled_size(config, len(graphs))
    space = SearchSpace.from_points(graphs, KernelSpec.shortest_path())
    truth = sample_prior(space, rng, config.jitter)
    _LOGGER.debug(f"Sampled graph objective on {space.size} graphs")
    return Objective(space, truth, config.noise_sd)
