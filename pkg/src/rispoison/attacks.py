"""Reward-poisoning strategies.

All strategies share one decision interface: given the step index and the
learner's introspected critic/entropy signals, emit whether to fire and how
much to subtract from the reward. They never touch observations, actions,
environment state, or learner parameters, and they consume randomness only
from their own stream.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

ATTACK_KINDS = ("none", "dgrp", "periodic", "exploration")


@dataclass
class AttackConfig:
    kind: str = "none"
    delta: float = 1.5       # subtracted magnitude
    p: float = 0.5           # firing probability on eligible steps
    window: int = 200        # w, rolling buffer of signal values
    quantile: float = 0.75   # q, eligibility threshold level
    warm_steps: int = 50     # T_warm, no eligibility before this step
    period: int = 2          # periodic baseline only

    def validate(self) -> None:
        if self.kind not in ATTACK_KINDS:
            raise ValueError(f"unknown attack kind {self.kind!r}")
        if self.delta < 0:
            raise ValueError("attack delta must be >= 0")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError("attack p must be in [0, 1]")
        if not 0.0 < self.quantile < 1.0:
            raise ValueError("attack quantile must be in (0, 1)")
        if self.window < 1:
            raise ValueError("attack window must be >= 1")
        if self.period < 1:
            raise ValueError("attack period must be >= 1")


class Introspection(NamedTuple):
    """Gray-box view of the learner at (s_t, a_t)."""

    q1: float
    q2: float
    entropy: float


class AttackDecision(NamedTuple):
    fired: bool
    eligible: bool
    signal: float
    threshold: float   # nan while undefined (window not yet full)
    magnitude: float   # subtracted from the reward; 0 unless fired


def disagreement(q1: float, q2: float) -> float:
    """Critic gap |Q1 - Q2|; the norm reduces to absolute value for scalar critics."""
    return abs(q1 - q2)


def nearest_rank_quantile(values, q: float) -> float:
    """Sort ascending and return the ceil(q*n)-th element (1-based)."""
    ordered = sorted(values)
    rank = max(1, math.ceil(q * len(ordered)))
    return ordered[rank - 1]


class RollingWindow:
    """Fixed-capacity FIFO of recent signal values with nearest-rank quantile queries."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self._values: deque[float] = deque(maxlen=capacity)

    def __len__(self) -> int:
        return len(self._values)

    @property
    def full(self) -> bool:
        return len(self._values) == self.capacity

    def push(self, x: float) -> None:
        self._values.append(x)

    def quantile(self, q: float) -> float | None:
        """Nearest-rank quantile, or None while the window is not yet full."""
        if not self.full:
            return None
        return nearest_rank_quantile(self._values, q)


def corrupt(r_true: float, decision: AttackDecision) -> float:
    """Reward the learner actually trains on; the clean value is left to the caller."""
    return r_true - decision.magnitude


class NoAttack:
    """u_t = 0 for all t."""

    def __init__(self, cfg: AttackConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng

    def decide(self, t: int, intro: Introspection) -> AttackDecision:
        return AttackDecision(False, False, 0.0, math.nan, 0.0)


class _ThresholdAttack:
    """Two-stage skeleton: push signal, gate on warm-up + full window + strict
    quantile exceedance, then fire with probability p."""

    def __init__(self, cfg: AttackConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        self.window = RollingWindow(cfg.window)

    def _signal(self, intro: Introspection) -> float:
        raise NotImplementedError

    def decide(self, t: int, intro: Introspection) -> AttackDecision:
        g = self._signal(intro)
        self.window.push(g)  # self-inclusive: the comparison window contains g itself
        tau = self.window.quantile(self.cfg.quantile)
        eligible = (t >= self.cfg.warm_steps and tau is not None and g > tau)
        fired = bool(eligible and self.rng.random() < self.cfg.p)
        magnitude = self.cfg.delta if fired else 0.0
        return AttackDecision(fired, eligible, g, math.nan if tau is None else tau, magnitude)


class DisagreementAttack(_ThresholdAttack):
    """Fires on steps where the twin-critic gap exceeds its rolling quantile."""

    def _signal(self, intro: Introspection) -> float:
        return disagreement(intro.q1, intro.q2)


class ExplorationAttack(_ThresholdAttack):
    """Same skeleton, but triggered by the policy entropy estimate."""

    def _signal(self, intro: Introspection) -> float:
        return intro.entropy


class PeriodicAttack:
    """Fixed schedule with a per-run random phase offset and U(0, 2*delta) magnitudes."""

    def __init__(self, cfg: AttackConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.rng = rng
        self.offset = int(rng.integers(0, cfg.period))

    def decide(self, t: int, intro: Introspection) -> AttackDecision:
        hit = (t - self.offset) % self.cfg.period == 0
        if not hit:
            return AttackDecision(False, False, 0.0, math.nan, 0.0)
        magnitude = float(self.rng.uniform(0.0, 2.0 * self.cfg.delta))
        return AttackDecision(True, True, 0.0, math.nan, magnitude)


def make_attack(cfg: AttackConfig, rng: np.random.Generator):
    cfg.validate()
    cls = {"none": NoAttack, "dgrp": DisagreementAttack,
           "periodic": PeriodicAttack, "exploration": ExplorationAttack}[cfg.kind]
    return cls(cfg, rng)
