"""Cross-seed aggregation of clean-reward curves.

Performance is always measured on the clean reward; the poisoned value never
enters any aggregate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .runner import RunLog, _fmt

CURVE_HEADER = "t,mean,std"
SWEEP_HEADER = "value,final_mean,final_std,n_seeds_ok"


@dataclass
class AggregateCurve:
    t: np.ndarray
    mean: np.ndarray
    std: np.ndarray

    def to_csv(self) -> str:
        lines = [CURVE_HEADER]
        for i in range(len(self.t)):
            lines.append(f"{int(self.t[i])},{_fmt(self.mean[i])},{_fmt(self.std[i])}")
        return "\n".join(lines) + "\n"


def moving_average(x: np.ndarray, window: int) -> np.ndarray:
    """Trailing moving average; early entries average the partial prefix."""
    if window < 1:
        raise ValueError("window must be >= 1")
    c = np.concatenate([[0.0], np.cumsum(x, dtype=np.float64)])
    n = len(x)
    idx = np.arange(n)
    start = np.maximum(idx - window + 1, 0)
    return (c[idx + 1] - c[start]) / (idx + 1 - start)


def aggregate(logs: list[RunLog], window: int) -> AggregateCurve:
    """Per-seed trailing moving average of r_true, then per-t mean/std across seeds."""
    ok = [log for log in logs if not log.failed]
    if not ok:
        raise ValueError("no successful runs to aggregate")
    lengths = {len(log) for log in ok}
    if len(lengths) != 1:
        raise ValueError(f"trace lengths differ: {sorted(lengths)}")
    curves = np.stack([moving_average(log.r_true, window) for log in ok])
    return AggregateCurve(t=ok[0].t.copy(), mean=curves.mean(axis=0),
                          std=curves.std(axis=0))


def final_mean_rate(log: RunLog, window: int) -> float:
    """Mean of the clean-reward moving average over the last 10% of steps."""
    ma = moving_average(log.r_true, window)
    tail = max(1, len(ma) // 10)
    return float(ma[-tail:].mean())
