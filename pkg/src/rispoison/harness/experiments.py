"""Sweeps over attack/environment parameters and attack-kind comparisons."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .aggregate import SWEEP_HEADER, final_mean_rate
from .config import ConfigError, RunConfig, apply_override
from .runner import RunLog, _fmt, run_many

SWEEP_AXES = ("attack.delta", "attack.p", "env.R", "attack.kind")


@dataclass
class SweepRow:
    value: str
    final_mean: float
    final_std: float
    n_seeds_ok: int
    per_seed: dict[int, float]


def _per_seed_finals(logs: list[RunLog], window: int) -> dict[int, float]:
    return {log.seed: final_mean_rate(log, window) for log in logs if not log.failed}


def _summarize(per_seed: dict[int, float]) -> tuple[float, float]:
    values = np.array(list(per_seed.values()))
    if values.size == 0:
        return float("nan"), float("nan")
    return float(values.mean()), float(values.std())


def run_sweep(base_cfg: RunConfig, axis: str, values: list[str]) -> list[SweepRow]:
    """Run the full seed list per axis value; report tail-window clean-rate stats."""
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unsupported sweep axis: {axis} (choose from {', '.join(SWEEP_AXES)})")
    rows = []
    for value in values:
        cfg = apply_override(base_cfg, axis, value)
        cfg.validate()
        logs = run_many(cfg)
        per_seed = _per_seed_finals(logs, cfg.ma_window)
        mean, std = _summarize(per_seed)
        rows.append(SweepRow(value=value, final_mean=mean, final_std=std,
                             n_seeds_ok=len(per_seed), per_seed=per_seed))
    return rows


def sweep_csv(rows: list[SweepRow]) -> str:
    lines = [SWEEP_HEADER]
    for row in rows:
        lines.append(f"{row.value},{_fmt(row.final_mean)},{_fmt(row.final_std)},{row.n_seeds_ok}")
    return "\n".join(lines) + "\n"


@dataclass
class CompareReport:
    kinds: list[str]
    finals: dict[str, dict[int, float]]          # kind -> seed -> final rate
    means: dict[str, float]
    stds: dict[str, float]
    fire_rates: dict[str, float]
    pairwise: list[tuple[str, str, float, int, int]]  # (a, b, mean diff, seeds a<b, n)

    def to_text(self) -> str:
        lines = ["attack comparison (final clean-rate, moving-average tail)", ""]
        for kind in self.kinds:
            lines.append(f"  {kind:<12} final_mean={self.means[kind]:.4f} "
                         f"final_std={self.stds[kind]:.4f} "
                         f"fire_rate={self.fire_rates[kind]:.4f} "
                         f"seeds_ok={len(self.finals[kind])}")
        lines.append("")
        for a, b, diff, n_below, n in self.pairwise:
            lines.append(f"  {a} - {b}: mean_diff={diff:+.4f}; "
                         f"{a} < {b} on {n_below}/{n} seeds")
        return "\n".join(lines) + "\n"


def compare_attacks(cfg: RunConfig, kinds: list[str]) -> CompareReport:
    """Run each attack kind on identical seed lists and report orderings."""
    if len(kinds) < 2:
        raise ConfigError("compare needs at least two attack kinds")
    finals: dict[str, dict[int, float]] = {}
    fire_rates: dict[str, float] = {}
    for kind in kinds:
        kcfg = apply_override(cfg, "attack.kind", kind)
        kcfg.validate()
        logs = run_many(kcfg)
        finals[kind] = _per_seed_finals(logs, kcfg.ma_window)
        ok = [log for log in logs if not log.failed]
        fire_rates[kind] = float(np.mean([log.fire_rate for log in ok])) if ok else float("nan")
    means, stds = {}, {}
    for kind in kinds:
        means[kind], stds[kind] = _summarize(finals[kind])
    pairwise = []
    for i, a in enumerate(kinds):
        for b in kinds[i + 1:]:
            shared = sorted(set(finals[a]) & set(finals[b]))
            diffs = [finals[a][s] - finals[b][s] for s in shared]
            n_below = sum(1 for d in diffs if d < 0)
            pairwise.append((a, b, float(np.mean(diffs)) if diffs else float("nan"),
                             n_below, len(shared)))
    return CompareReport(kinds=list(kinds), finals=finals, means=means, stds=stds,
                         fire_rates=fire_rates, pairwise=pairwise)
