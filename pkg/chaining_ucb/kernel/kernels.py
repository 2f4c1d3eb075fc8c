import logging
from dataclasses import dataclass
from enum import StrEnum
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from ..exceptions import InputError, NumericalError
from .graphs import DirectedGraph

_LOGGER = logging.getLogger(__name__)


class KernelKind(StrEnum):
    SQUARED_EXPONENTIAL = "squared-exponential"
    SHORTEST_PATH = "shortest-path"


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind
    bandwidth: float = 1.0

    def __post_init__(self):
        if self.kind == KernelKind.SQUARED_EXPONENTIAL and not self.bandwidth > 0:
            raise InputError(f"Bandwidth must be positive, got {self.bandwidth}")

    @classmethod
    def squared_exponential(cls, bandwidth: float = 1.0) -> "KernelSpec":
        return cls(KernelKind.SQUARED_EXPONENTIAL, float(bandwidth))

    @classmethod
    def shortest_path(cls) -> "KernelSpec":
        return cls(KernelKind.SHORTEST_PATH)


def se_kernel(x, x2, bandwidth: float = 1.0) -> float:
    """exp(-|x - x2|^2 / (2 bandwidth^2))"""
    if not bandwidth > 0:
        raise InputError(f"Bandwidth must be positive, got {bandwidth}")
    a = np.atleast_1d(np.asarray(x, dtype=float))
    b = np.atleast_1d(np.asarray(x2, dtype=float))
    if a.shape != b.shape:
        raise InputError(f"Dimension mismatch: {a.shape} vs {b.shape}")
    diff = a - b
    return float(np.exp(-float(diff @ diff) / (2.0 * bandwidth**2)))


def shortest_path_kernel(g: DirectedGraph, g2: DirectedGraph) -> int:
    """Raw shortest-path kernel with a delta base kernel on path lengths.

    Counts pairs of reachable ordered node pairs, one from each graph, whose
    shortest paths have equal length. Unreachable pairs are left out.
    """
    return int(g.path_length_counts @ g2.path_length_counts)


def _se_matrix(points: np.ndarray, bandwidth: float) -> np.ndarray:
    sq = cdist(points, points, "sqeuclidean")
    K = np.exp(-sq / (2.0 * bandwidth**2))
    # mirror the upper triangle
    K = np.triu(K) + np.triu(K, 1).T
    np.fill_diagonal(K, 1.0)
    return K


def _shortest_path_matrix(graphs: Sequence[DirectedGraph]) -> np.ndarray:
    counts = np.stack([g.path_length_counts for g in graphs])
    raw = counts @ counts.T
    self_similarity = np.diag(raw)
    degenerate = np.flatnonzero(self_similarity == 0)
    if len(degenerate) > 0:
        raise NumericalError(
            f"Graph at index {int(degenerate[0])} has zero self-similarity "
            f"(no reachable node pair), cannot normalize"
        )
    scale = np.sqrt(self_similarity.astype(float))
    K = raw / np.outer(scale, scale)
    K = np.triu(K) + np.triu(K, 1).T
    np.fill_diagonal(K, 1.0)
    return np.clip(K, 0.0, 1.0)


def kernel_matrix(points, spec: KernelSpec) -> np.ndarray:
    """Prior kernel matrix over the candidates: symmetric, unit diagonal, in [0, 1]."""
    if len(points) == 0:
        raise InputError("Cannot build a kernel matrix over an empty candidate list")
    if spec.kind == KernelKind.SQUARED_EXPONENTIAL:
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points[:, None]
        K = _se_matrix(points, spec.bandwidth)
    else:
        K = _shortest_path_matrix(points)
    _LOGGER.debug(f"Built {spec.kind} kernel matrix of size {K.shape[0]}")
    return K

