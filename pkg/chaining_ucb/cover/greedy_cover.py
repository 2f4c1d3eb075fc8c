import logging
import math
from dataclasses import dataclass

import numpy as np
from opentelemetry import trace
from scipy.sparse import csr_matrix

from ..exceptions import InputError, NumericalError
from ..gp.posterior import DistanceAccessor, PosteriorState

_LOGGER = logging.getLogger(__name__)

tracer = trace.get_tracer(__name__)


def _threshold_graph(
    candidates: np.ndarray, distance: DistanceAccessor, epsilon: float
) -> csr_matrix:
    """G[x, x'] = 1 iff d(x, x') <= epsilon, over candidate positions."""
    m = len(candidates)
    rows, cols = [], []
    offset = 0
    for chunk, dist in distance.row_blocks(candidates, candidates):
        r, c = np.nonzero(dist <= epsilon)
        rows.append(r + offset)
        cols.append(c)
        offset += len(chunk)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    return csr_matrix((np.ones(len(rows), dtype=np.int32), (rows, cols)), shape=(m, m))


def greedy_cover(candidates, distance: DistanceAccessor, epsilon: float) -> np.ndarray:
    """Greedy epsilon-cover of ``candidates`` (minimum dominating set approximation).

    Repeatedly picks the uncovered candidate that covers the most uncovered
    candidates, lowest index first on ties. Returns the centers in selection order.
    """
    if not epsilon > 0:
        raise InputError(f"Cover radius must be positive, got {epsilon}")
    candidates = np.unique(np.asarray(candidates, dtype=np.intp))
    if len(candidates) == 0:
        return np.empty(0, dtype=np.intp)

    graph = _threshold_graph(candidates, distance, epsilon)
    by_column = graph.tocsc()
    degree = np.asarray(graph.sum(axis=1)).ravel()
    uncovered = np.ones(len(candidates), dtype=bool)
    selected: list[int] = []

    while uncovered.any():
        best = int(np.argmax(np.where(uncovered, degree, -1)))
        selected.append(best)
        neighbours = graph.indices[graph.indptr[best] : graph.indptr[best + 1]]
        removed = neighbours[uncovered[neighbours]]
        uncovered[removed] = False
        uncovered[best] = False
        degree -= np.asarray(by_column[:, removed].sum(axis=1)).ravel()

    return candidates[np.asarray(selected, dtype=np.intp)]


@dataclass(frozen=True)
class CoverStatistics:
    size: int
    members: np.ndarray
    max_distance: float
    max_degree: int


def cover_statistics(
    candidates, distance: DistanceAccessor, cover, epsilon: float
) -> CoverStatistics:
    """Realized covering radius of ``cover`` and d_max of the epsilon-threshold graph.

    The degree counts the closed neighbourhood, so an isolated point has degree 1.
    """
    candidates = np.unique(np.asarray(candidates, dtype=np.intp))
    cover = np.asarray(cover, dtype=np.intp)
    if len(candidates) == 0:
        return CoverStatistics(0, cover, 0.0, 0)
    graph = _threshold_graph(candidates, distance, epsilon)
    max_distance = float(distance.to_set(cover, candidates).max()) if len(cover) else math.inf
    return CoverStatistics(
        size=len(cover),
        members=np.sort(cover),
        max_distance=max_distance,
        max_degree=int(np.asarray(graph.sum(axis=1)).max()),
    )


def level_radius(level: int) -> float:
    """epsilon_i = 2^(1 - i)"""
    return math.ldexp(1.0, 1 - level)


def level_count(sigma_min: float) -> int:
    """ceil(1 - log2(sigma_min)), at least one level."""
    return max(1, math.ceil(1.0 - math.log2(sigma_min)))


@dataclass(frozen=True)
class CoverLevel:
    level_index: int
    radius: float
    members: frozenset[int]
    newly_added: frozenset[int]

    @property
    def size(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class CoverHierarchy:
    levels: tuple[CoverLevel, ...]
    sigma_min: float

    @property
    def radii(self) -> np.ndarray:
        return np.array([level.radius for level in self.levels])

    @property
    def sizes(self) -> np.ndarray:
        return np.array([level.size for level in self.levels], dtype=np.int64)

    def level_with_radius(self, radius: float) -> CoverLevel | None:
        for level in self.levels:
            if level.radius == radius:
                return level
        return None


def build_hierarchy(state: PosteriorState) -> CoverHierarchy:
    """Nested covers T_1 ⊆ T_2 ⊆ ... at radii 1, 1/2, ... down to sigma_min.

    Level i covers only the points farther than epsilon_i from T_{i-1} and adds the
    new centers to it, so every T_i is an epsilon_i-cover of the whole space.
    """
    with tracer.start_as_current_span("build_hierarchy") as span:
        sigma_min = float(state.sigma.min())
        if not sigma_min > 0:
            raise NumericalError(f"Minimum posterior deviation is {sigma_min}, expected > 0")
        distance = state.distance
        members = np.empty(0, dtype=np.intp)
        to_members = np.full(state.space.size, np.inf)
        levels = []
        for i in range(1, level_count(sigma_min) + 1):
            radius = level_radius(i)
            uncovered = np.flatnonzero(to_members > radius)
            added = greedy_cover(uncovered, distance, radius)
            if len(added) > 0:
                np.minimum(to_members, distance.to_set(added), out=to_members)
            members = np.union1d(members, added)
            levels.append(
                CoverLevel(i, radius, frozenset(members.tolist()), frozenset(added.tolist()))
            )
            _LOGGER.debug(
                f"Cover level {i}: radius {radius:g}, {len(uncovered)} uncovered, "
                f"{len(added)} added, |T_i|={len(members)}"
            )
        span.set_attribute("levels", len(levels))
        return CoverHierarchy(tuple(levels), sigma_min)
