"""Single-seed training loop and multi-seed execution.

Each run derives independent RNG streams from its seed (env, agent-init,
agent-sampling, attack, plus one evaluation stream used only for logged
baselines), so attack randomness can never perturb the learner and reruns
are bit-identical.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ..attacks import Introspection, corrupt, make_attack
from ..env import CrnRisEnv
from ..nn import NumericalDivergence
from ..sac import SacAgent
from .config import RunConfig

TRACE_HEADER = "seed,t,r_true,r_train,fired,eligible,signal,threshold,p_s,rate"


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass
class RunLog:
    """Per-step trace of one seed's run plus summary statistics."""

    seed: int
    warm_steps: int
    t: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int64))
    r_true: np.ndarray = field(default_factory=lambda: np.zeros(0))
    r_train: np.ndarray = field(default_factory=lambda: np.zeros(0))
    fired: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int8))
    eligible: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int8))
    signal: np.ndarray = field(default_factory=lambda: np.zeros(0))
    threshold: np.ndarray = field(default_factory=lambda: np.zeros(0))
    p_s: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cap: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rate: np.ndarray = field(default_factory=lambda: np.zeros(0))
    critic_loss1: np.ndarray = field(default_factory=lambda: np.zeros(0))
    critic_loss2: np.ndarray = field(default_factory=lambda: np.zeros(0))
    actor_loss: np.ndarray = field(default_factory=lambda: np.zeros(0))
    eval_rate: np.ndarray = field(default_factory=lambda: np.zeros(0))
    random_rate: np.ndarray = field(default_factory=lambda: np.zeros(0))
    failed: bool = False
    failure_reason: str | None = None

    def __len__(self) -> int:
        return len(self.t)

    @property
    def total_fires(self) -> int:
        return int(self.fired.sum())

    @property
    def fire_rate(self) -> float:
        denom = len(self) - self.warm_steps
        return self.total_fires / denom if denom > 0 else 0.0

    def mean_clean_rate(self, final_steps: int) -> float:
        return float(self.r_true[-final_steps:].mean())

    def mean_eval_rate(self, final_steps: int) -> float:
        return float(self.eval_rate[-final_steps:].mean())

    def mean_random_rate(self, final_steps: int) -> float:
        return float(self.random_rate[-final_steps:].mean())

    def to_trace_csv(self) -> str:
        lines = [TRACE_HEADER]
        for i in range(len(self)):
            lines.append(",".join((
                str(self.seed), str(int(self.t[i])),
                _fmt(self.r_true[i]), _fmt(self.r_train[i]),
                str(int(self.fired[i])), str(int(self.eligible[i])),
                _fmt(self.signal[i]), _fmt(self.threshold[i]),
                _fmt(self.p_s[i]), _fmt(self.rate[i]),
            )))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_trace_csv(cls, text: str, warm_steps: int = 50) -> "RunLog":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or lines[0] != TRACE_HEADER:
            raise ValueError("not a trace CSV (bad header)")
        rows = [ln.split(",") for ln in lines[1:]]
        if not rows:
            raise ValueError("trace CSV has no records")
        cols = list(zip(*rows))
        return cls(
            seed=int(cols[0][0]), warm_steps=warm_steps,
            t=np.array(cols[1], dtype=np.int64),
            r_true=np.array(cols[2], dtype=np.float64),
            r_train=np.array(cols[3], dtype=np.float64),
            fired=np.array(cols[4], dtype=np.int8),
            eligible=np.array(cols[5], dtype=np.int8),
            signal=np.array(cols[6], dtype=np.float64),
            threshold=np.array(cols[7], dtype=np.float64),
            p_s=np.array(cols[8], dtype=np.float64),
            rate=np.array(cols[9], dtype=np.float64),
        )


def derive_streams(seed: int) -> dict[str, np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(5)
    names = ("env", "agent_init", "agent_sample", "attack", "eval")
    return {name: np.random.Generator(np.random.PCG64(child))
            for name, child in zip(names, children)}


def run_training(cfg: RunConfig, seed: int) -> RunLog:
    """Execute one seeded run: act, poison, store, learn, log; never episodic."""
    streams = derive_streams(seed)
    env = CrnRisEnv(cfg.env, streams["env"])
    agent = SacAgent(env.obs_dim, env.action_dim, cfg.sac,
                     streams["agent_init"], streams["agent_sample"])
    attack = make_attack(cfg.attack, streams["attack"])
    eval_rng = streams["eval"]

    n = cfg.total_steps
    log = RunLog(seed=seed, warm_steps=cfg.attack.warm_steps,
                 t=np.arange(n, dtype=np.int64),
                 r_true=np.zeros(n), r_train=np.zeros(n),
                 fired=np.zeros(n, dtype=np.int8), eligible=np.zeros(n, dtype=np.int8),
                 signal=np.zeros(n), threshold=np.zeros(n),
                 p_s=np.zeros(n), cap=np.zeros(n), rate=np.zeros(n),
                 critic_loss1=np.zeros(n), critic_loss2=np.zeros(n),
                 actor_loss=np.zeros(n),
                 eval_rate=np.zeros(n), random_rate=np.zeros(n))

    obs = env.reset()
    steps_done = 0
    try:
        for t in range(n):
            raw, _logp, entropy = agent.select_action(obs)
            q1, q2, entropy_at = agent.introspect(obs, raw)
            # logged evaluation baselines; read-only peeks at the current draw
            det_raw, _, _ = agent.select_action(obs, deterministic=True)
            log.eval_rate[t] = env.peek_rate(det_raw)
            log.random_rate[t] = env.peek_rate(
                eval_rng.uniform(-1.0, 1.0, size=env.action_dim))

            next_obs, r_true, info = env.step(raw)
            decision = attack.decide(t, Introspection(q1, q2, entropy_at))
            r_train = corrupt(r_true, decision)
            diag = agent.train_step(obs, raw, r_train, next_obs)

            log.r_true[t] = r_true
            log.r_train[t] = r_train
            log.fired[t] = decision.fired
            log.eligible[t] = decision.eligible
            log.signal[t] = decision.signal
            log.threshold[t] = decision.threshold
            log.p_s[t] = info["p_s"]
            log.cap[t] = info["cap"]
            log.rate[t] = r_true
            log.critic_loss1[t] = diag["critic_loss1"]
            log.critic_loss2[t] = diag["critic_loss2"]
            log.actor_loss[t] = diag["actor_loss"]
            obs = next_obs
            steps_done = t + 1
    except NumericalDivergence as e:
        for name in ("t", "r_true", "r_train", "fired", "eligible", "signal",
                     "threshold", "p_s", "cap", "rate", "critic_loss1",
                     "critic_loss2", "actor_loss", "eval_rate", "random_rate"):
            setattr(log, name, getattr(log, name)[:steps_done])
        log.failed = True
        log.failure_reason = f"step {steps_done}: {e}"
    return log


def _run_one(args) -> RunLog:
    cfg, seed = args
    return run_training(cfg, seed)


def run_many(cfg: RunConfig, seeds: tuple[int, ...] | None = None) -> list[RunLog]:
    """Run all seeds, optionally in parallel; results are seed-ordered and
    identical regardless of worker count."""
    seeds = cfg.seeds if seeds is None else seeds
    if cfg.workers <= 1 or len(seeds) == 1:
        return [run_training(cfg, s) for s in seeds]
    with ProcessPoolExecutor(max_workers=min(cfg.workers, len(seeds))) as pool:
        return list(pool.map(_run_one, [(cfg, s) for s in seeds]))
