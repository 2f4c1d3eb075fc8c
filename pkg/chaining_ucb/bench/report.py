import logging
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd

from ..const import ACQUISITION_COLUMNS, AGGREGATE_COLUMNS, CSV_FLOAT_FORMAT, TRACE_COLUMNS
from ..cover.greedy_cover import build_hierarchy
from ..gp.posterior import PosteriorState
from ..policy.policies import chaining_select, gp_ucb_select, shifted_bonus
from ..policy_types import POLICY_TYPES
from .objectives import Objective
from .runner import RegretTrace
from .stats import aggregate

_LOGGER = logging.getLogger(__name__)

Traces = Mapping[str, Sequence[RegretTrace]]


def traces_frame(traces: Traces) -> pd.DataFrame:
    """One row per (policy, run, t); ``bound`` is NaN where it was not computed."""
    frames = []
    for policy, runs in traces.items():
        for trace in runs:
            n = len(trace)
            frames.append(
                pd.DataFrame(
                    {
                        "policy": [str(policy)] * n,
                        "run": np.full(n, trace.run, dtype=np.int64),
                        "t": np.arange(1, n + 1, dtype=np.int64),
                        "chosen": trace.chosen,
                        "y": trace.y,
                        "inst_regret": trace.inst_regret,
                        "simple_regret": trace.simple_regret,
                        "cum_regret": trace.cum_regret,
                        "bound": trace.bound if trace.bound is not None else np.full(n, np.nan),
                    }
                )
            )
    if not frames:
        return pd.DataFrame(columns=TRACE_COLUMNS)
    return pd.concat(frames, ignore_index=True)[TRACE_COLUMNS]


def aggregate_frame(traces: Traces) -> pd.DataFrame:
    frames = []
    for policy, runs in traces.items():
        stats = aggregate(runs)
        frames.append(
            pd.DataFrame(
                {
                    "policy": [str(policy)] * len(stats),
                    "t": np.arange(1, len(stats) + 1, dtype=np.int64),
                    "mean_simple_regret": stats.mean_simple_regret,
                    "sd_simple_regret": stats.sd_simple_regret,
                    "mean_cum_regret": stats.mean_cum_regret,
                }
            )
        )
    if not frames:
        return pd.DataFrame(columns=AGGREGATE_COLUMNS)
    return pd.concat(frames, ignore_index=True)[AGGREGATE_COLUMNS]


def _write_csv(frame: pd.DataFrame, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(
        path,
        index=False,
        float_format=CSV_FLOAT_FORMAT,
        na_rep="",
        lineterminator="\n",
    )
    _LOGGER.info(f"Wrote {len(frame)} rows to {path}")
    return path


def write_trace_csv(traces: Traces, path: str | Path) -> Path:
    return _write_csv(traces_frame(traces), path)


def write_aggregate_csv(traces: Traces, path: str | Path) -> Path:
    return _write_csv(aggregate_frame(traces), path)


def summary_table(traces: Traces) -> pd.DataFrame:
    """Final-iteration statistics per policy, indexed by display name."""
    rows = []
    for policy, runs in traces.items():
        stats = aggregate(runs)
        rows.append(
            {
                "policy": POLICY_TYPES[policy]["name"],
                "runs": stats.runs,
                "iterations": len(stats),
                "mean_simple_regret": stats.mean_simple_regret[-1],
                "sd_simple_regret": stats.sd_simple_regret[-1],
                "mean_cum_regret": stats.mean_cum_regret[-1],
            }
        )
    return pd.DataFrame(rows).set_index("policy")


def acquisition_frame(objective: Objective, state: PosteriorState, t: int, delta: float) -> pd.DataFrame:
    """Per-candidate view of both UCB scores at iteration ``t``.

    Bonuses are shifted to a zero minimum so the two policies compare on one scale.
    Vector spaces get one ``x<k>`` column per coordinate after ``index``.
    """
    chaining = chaining_select(state, build_hierarchy(state), t, delta, keep_breakdown=True)
    gp_ucb = gp_ucb_select(state, t, delta, keep_breakdown=True)
    mean, _ = chaining.breakdown
    chaining_shift = shifted_bonus(chaining)
    gp_ucb_shift = shifted_bonus(gp_ucb)

    size = state.space.size
    queried = np.asarray(state.queried, dtype=np.intp)
    counts = np.bincount(queried, minlength=size)
    sums = np.bincount(queried, weights=np.asarray(state.observations, dtype=float), minlength=size)
    mean_observed = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)

    frame = pd.DataFrame(
        {
            "index": np.arange(size, dtype=np.int64),
            "truth": objective.truth,
            "mean": mean,
            "sigma": state.sigma,
            "chaining_bonus": chaining_shift,
            "gp_ucb_bonus": gp_ucb_shift,
            "chaining_ucb": mean + chaining_shift,
            "gp_ucb": mean + gp_ucb_shift,
            "n_observed": counts.astype(np.int64),
            "mean_observed": mean_observed,
        }
    )[ACQUISITION_COLUMNS]

    points = state.space.points
    if isinstance(points, np.ndarray) and points.ndim == 2:
        for k in range(points.shape[1]):
            frame.insert(1 + k, f"x{k}", points[:, k])
    _LOGGER.debug(
        f"Acquisition at t={t}: Chaining-UCB picks {chaining.chosen}, GP-UCB picks {gp_ucb.chosen}"
    )
    return frame


def write_acquisition_csv(
    objective: Objective, state: PosteriorState, t: int, delta: float, path: str | Path
) -> pd.DataFrame:
    """Write ``acquisition_frame`` to ``path`` and return the frame."""
    frame = acquisition_frame(objective, state, t, delta)
    _write_csv(frame, path)
    return frame
