import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..exceptions import InputError
from .runner import RegretTrace

_LOGGER = logging.getLogger(__name__)


@dataclass(frozen=True)
class AggregateTrace:
    mean_simple_regret: np.ndarray
    sd_simple_regret: np.ndarray
    mean_cum_regret: np.ndarray
    sd_cum_regret: np.ndarray
    runs: int

    def __len__(self) -> int:
        return len(self.mean_simple_regret)


def _stack(traces: Sequence[RegretTrace], attribute: str) -> np.ndarray:
    if len(traces) == 0:
        raise InputError("Cannot aggregate an empty list of traces")
    lengths = {len(trace) for trace in traces}
    if len(lengths) != 1:
        raise InputError(f"Traces have unequal lengths {sorted(lengths)}")
    return np.vstack([getattr(trace, attribute) for trace in traces])


def _sd(values: np.ndarray) -> np.ndarray:
    # a single run has no sample deviation, reported as 0
    if values.shape[0] < 2:
        return np.zeros(values.shape[1])
    return values.std(axis=0, ddof=1)


def aggregate(traces: Sequence[RegretTrace]) -> AggregateTrace:
    """Per-iteration mean and sample standard deviation of S_t and R_t across runs."""
    simple = _stack(traces, "simple_regret")
    cumulative = _stack(traces, "cum_regret")
    return AggregateTrace(
        mean_simple_regret=simple.mean(axis=0),
        sd_simple_regret=_sd(simple),
        mean_cum_regret=cumulative.mean(axis=0),
        sd_cum_regret=_sd(cumulative),
        runs=len(traces),
    )


@dataclass(frozen=True)
class ViolationStats:
    runs: int
    violations: int
    delta: float | None = None

    @property
    def frequency(self) -> float:
        return self.violations / self.runs


def bound_violation_stats(
    traces: Sequence[RegretTrace], delta: float | None = None
) -> ViolationStats:
    """Fraction of runs where sup f - f(x_t) exceeded the bound at some iteration.

    sup f - f(x_t) is the instantaneous regret recorded in each trace.
    """
    if len(traces) == 0:
        raise InputError("No traces to check")
    violations = 0
    for trace in traces:
        if trace.bound is None:
            raise InputError(f"Trace of run {trace.run} ({trace.policy}) has no bound values")
        if np.any(trace.inst_regret > trace.bound):
            violations += 1
    _LOGGER.info(f"Bound violated in {violations} of {len(traces)} runs")
    return ViolationStats(len(traces), violations, delta)


def regret_rate_ratio(traces: Sequence[RegretTrace], dimension: int, n: int) -> float:
    """Mean over runs of R_n / sqrt(n (log n)^(D + 2))."""
    if n < 2:
        raise InputError(f"Rate ratio needs n >= 2, got {n}")
    cumulative = _stack(traces, "cum_regret")
    if n > cumulative.shape[1]:
        raise InputError(f"Traces have {cumulative.shape[1]} iterations, asked for n={n}")
    scale = math.sqrt(n * math.log(n) ** (dimension + 2))
    return float(cumulative[:, n - 1].mean() / scale)
