import logging
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve, cholesky, solve_triangular

from ..const import (
    DEFAULT_JITTER,
    DENSE_DISTANCE_LIMIT,
    DISTANCE_BLOCK_ROWS,
    SYMMETRY_TOLERANCE,
)
from ..exceptions import InputError, NumericalError
from ..kernel.kernels import KernelKind, KernelSpec, kernel_matrix

_LOGGER = logging.getLogger(__name__)


@dataclass
class SearchSpace:
    """Finite candidate set together with its prior kernel matrix."""

    points: np.ndarray | list = field(repr=False)
    K: np.ndarray = field(repr=False)
    spec: KernelSpec | None = None

    def __post_init__(self):
        self.K = np.asarray(self.K, dtype=float)
        if self.K.ndim != 2 or self.K.shape[0] != self.K.shape[1]:
            raise InputError(f"Kernel matrix must be square, got {self.K.shape}")
        if len(self.points) != self.K.shape[0]:
            raise InputError(
                f"{len(self.points)} points but kernel matrix of size {self.K.shape[0]}"
            )
        if not np.allclose(np.diag(self.K), 1.0):
            raise InputError("Kernel matrix must have a unit diagonal")
        if self.size <= DENSE_DISTANCE_LIMIT and (
            np.max(np.abs(self.K - self.K.T)) > SYMMETRY_TOLERANCE
        ):
            raise InputError("Kernel matrix must be symmetric")

    @classmethod
    def from_points(cls, points, spec: KernelSpec) -> "SearchSpace":
        if spec.kind == KernelKind.SQUARED_EXPONENTIAL:
            points = np.asarray(points, dtype=float)
            if points.ndim == 1:
                points = points[:, None]
        return cls(points, kernel_matrix(points, spec), spec)

    @property
    def size(self) -> int:
        return self.K.shape[0]


class DistanceAccessor:
    """Pseudo-metric over point indices ``0 .. size - 1`` served in blocks."""

    size: int

    def block(self, rows, cols) -> np.ndarray:
        raise NotImplementedError

    def row_blocks(self, rows, cols) -> Iterator[tuple[np.ndarray, np.ndarray]]:
        rows = np.asarray(rows, dtype=np.intp)
        for start in range(0, len(rows), DISTANCE_BLOCK_ROWS):
            chunk = rows[start : start + DISTANCE_BLOCK_ROWS]
            yield chunk, self.block(chunk, cols)

    def to_set(self, targets, cols=None) -> np.ndarray:
        """d(x, T) for every x in ``cols`` (all points by default); +inf when T is empty."""
        cols = np.arange(self.size) if cols is None else np.asarray(cols, dtype=np.intp)
        out = np.full(len(cols), np.inf)
        for _, dist in self.row_blocks(targets, cols):
            np.minimum(out, dist.min(axis=0), out=out)
        return out

    def __call__(self, x: int, x2: int) -> float:
        return float(self.block([x], [x2])[0, 0])


class MatrixDistance(DistanceAccessor):
    """Distance accessor over an explicit symmetric distance matrix."""

    def __init__(self, matrix):
        self.matrix = np.asarray(matrix, dtype=float)
        self.size = self.matrix.shape[0]

    def block(self, rows, cols) -> np.ndarray:
        return self.matrix[np.ix_(np.asarray(rows, dtype=np.intp), np.asarray(cols, dtype=np.intp))]


class PseudoDistance(DistanceAccessor):
    """Posterior pseudo-distance d_n for one posterior version.

    Up to ``DENSE_DISTANCE_LIMIT`` points the full symmetric matrix is computed once
    and every lookup reads from it. Larger spaces are served block by block.
    """

    def __init__(self, state: "PosteriorState"):
        self._K = state.space.K
        self._cross = state.cross
        self._variance = state.variance
        self._dense: np.ndarray | None = None
        self.size = state.space.size

    @property
    def is_dense(self) -> bool:
        return self.size <= DENSE_DISTANCE_LIMIT

    def _compute(self, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
        cov = self._K[np.ix_(rows, cols)] - self._cross[:, rows].T @ self._cross[:, cols]
        radicand = self._variance[rows][:, None] + self._variance[cols][None, :] - 2.0 * cov
        dist = np.sqrt(np.maximum(radicand, 0.0))
        dist[rows[:, None] == cols[None, :]] = 0.0
        return dist

    def matrix(self) -> np.ndarray:
        if self._dense is None:
            everything = np.arange(self.size)
            dist = self._compute(everything, everything)
            self._dense = (dist + dist.T) / 2.0
        return self._dense

    def block(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.intp)
        cols = np.asarray(cols, dtype=np.intp)
        if self.is_dense:
            return self.matrix()[np.ix_(rows, cols)]
        return self._compute(rows, cols)


class PosteriorState:
    """Incremental GP posterior over a finite search space.

    Keeps the lower Cholesky factor ``L`` of ``C_n = K_n + noise_var * I`` together
    with ``L^-1 Y_n`` and ``L^-1 K[X_n, :]`` so that every posterior query over the
    space costs O(n) per candidate.
    """

    def __init__(self, space: SearchSpace, noise_var: float):
        if not (math.isfinite(noise_var) and noise_var > 0):
            raise InputError(f"Noise variance must be positive, got {noise_var}")
        self._logger = logging.getLogger(__name__)
        self.space = space
        self.noise_var = float(noise_var)
        self.queried: list[int] = []
        self.observations: list[float] = []
        self._chol = np.zeros((0, 0))
        self._whitened = np.zeros(0)
        self._alpha = np.zeros(0)
        self._cross = np.zeros((0, space.size))
        self._prior_variance = np.diag(space.K).copy()
        self._raw_variance = self._prior_variance.copy()
        self._distance: PseudoDistance | None = None

    @property
    def n(self) -> int:
        return len(self.queried)

    @property
    def chol(self) -> np.ndarray:
        return self._chol

    @property
    def alpha(self) -> np.ndarray:
        """C_n^-1 Y_n"""
        return self._alpha

    @property
    def cross(self) -> np.ndarray:
        """L^-1 K[X_n, :], one column per candidate."""
        return self._cross

    def extend(self, x: int, y: float) -> "PosteriorState":
        x = int(x)
        if not 0 <= x < self.space.size:
            raise InputError(f"Point index {x} outside of [0, {self.space.size})")
        y = float(y)
        if not math.isfinite(y):
            raise InputError(f"Observation at index {x} is not finite: {y}")

        border = self._cross[:, x].copy()
        pivot = self.space.K[x, x] + self.noise_var - border @ border
        if not pivot > 0:
            raise NumericalError(
                f"Cholesky breakdown at n={self.n}: nonpositive pivot {pivot!r}"
            )
        diag = math.sqrt(pivot)

        n = self.n
        chol = np.zeros((n + 1, n + 1))
        chol[:n, :n] = self._chol
        chol[n, :n] = border
        chol[n, n] = diag

        row = (self.space.K[x, :] - border @ self._cross) / diag
        self._cross = np.vstack([self._cross, row])
        self._whitened = np.append(self._whitened, (y - border @ self._whitened) / diag)
        self._raw_variance = self._raw_variance - row**2
        self._chol = chol
        self._alpha = solve_triangular(chol, self._whitened, lower=True, trans="T")

        self.queried.append(x)
        self.observations.append(y)
        self._distance = None
        self._logger.debug(f"Posterior extended with index {x} (n={self.n}, pivot={pivot:.3e})")
        return self

    def copy(self) -> "PosteriorState":
        other = PosteriorState.__new__(PosteriorState)
        other.__dict__.update(self.__dict__)
        other.queried = list(self.queried)
        other.observations = list(self.observations)
        other._distance = None
        return other

    @property
    def mean(self) -> np.ndarray:
        return self._cross.T @ self._whitened

    @property
    def variance(self) -> np.ndarray:
        return np.clip(self._raw_variance, 0.0, self._prior_variance)

    @property
    def sigma(self) -> np.ndarray:
        return np.sqrt(self.variance)

    def posterior_summary(self) -> tuple[np.ndarray, np.ndarray]:
        return self.mean, self.sigma

    def covariance(self, x: int, x2: int) -> float:
        """k_n(x, x2)"""
        return float(self.space.K[x, x2] - self._cross[:, x] @ self._cross[:, x2])

    @property
    def distance(self) -> PseudoDistance:
        if self._distance is None:
            self._distance = PseudoDistance(self)
        return self._distance

    def pseudo_distance(self, x: int, x2: int) -> float:
        return self.distance(x, x2)


def init_posterior(space: SearchSpace, noise_var: float) -> PosteriorState:
    return PosteriorState(space, noise_var)


def sample_prior(
    space: SearchSpace, rng: np.random.Generator, jitter: float = DEFAULT_JITTER
) -> np.ndarray:
    """Draw f ~ GP(0, k) on the space as L z with L L^T = K + jitter * I."""
    if not jitter > 0:
        raise InputError(f"Jitter must be positive, got {jitter}")
    try:
        factor = cholesky(space.K + jitter * np.eye(space.size), lower=True)
    except LinAlgError as e:
        raise NumericalError(
            f"Prior kernel matrix of size {space.size} is not factorizable with "
            f"jitter {jitter:g}; use a larger jitter"
        ) from e
    return factor @ rng.standard_normal(space.size)


def log_marginal_likelihood(
    space: SearchSpace,
    queried: Sequence[int],
    observations: Sequence[float],
    noise_var: float,
) -> float:
    """Gaussian evidence log p(Y_n | X_n) of a centered GP with noise."""
    queried = np.asarray(queried, dtype=np.intp)
    y = np.asarray(observations, dtype=float)
    n = len(queried)
    if n < 1:
        raise InputError("Marginal likelihood needs at least one observation")
    if len(y) != n:
        raise InputError(f"{n} indices but {len(y)} observations")
    C = space.K[np.ix_(queried, queried)] + noise_var * np.eye(n)
    try:
        factor = cho_factor(C, lower=True)
    except LinAlgError as e:
        raise NumericalError(f"Cannot factorize C_n of size {n}") from e
    alpha = cho_solve(factor, y)
    log_det = 2.0 * np.sum(np.log(np.diag(factor[0])))
    return float(-0.5 * y @ alpha - 0.5 * log_det - 0.5 * n * math.log(2.0 * math.pi))


def bandwidth_grid(low: float, high: float, size: int) -> np.ndarray:
    return np.geomspace(low, high, size)


def select_bandwidth(
    points,
    design: Sequence[int],
    observations: Sequence[float],
    noise_var: float,
    grid: Sequence[float],
) -> float:
    """Bandwidth of the grid that maximizes the marginal likelihood of the design.

    Only the designed points enter the kernel matrix; the first maximizer wins ties.
    """
    if len(grid) == 0:
        raise InputError("Bandwidth grid is empty")
    sub = np.asarray(points, dtype=float)[np.asarray(design, dtype=np.intp)]
    local = np.arange(len(sub))
    scores = []
    for bandwidth in grid:
        space = SearchSpace.from_points(sub, KernelSpec.squared_exponential(bandwidth))
        scores.append(log_marginal_likelihood(space, local, observations, noise_var))
    best = float(grid[int(np.argmax(scores))])
    _LOGGER.info(f"Selected bandwidth {best:.4g} by marginal likelihood")
    return best
