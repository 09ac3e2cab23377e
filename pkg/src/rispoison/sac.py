"""Soft Actor-Critic on the minimal autodiff core.

Squashed-Gaussian actor, twin critics with Polyak-averaged targets, uniform
replay. The task is continuing, so targets carry no terminal masking; with
discount 1.0 they are clamped to a configurable bound instead. The twin
critic outputs are exposed read-only for the poisoning adversary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .nn import MLP, Adam, NumericalDivergence, Tape

LOG_2PI = math.log(2.0 * math.pi)
_ATANH_EDGE = 1.0 - 1e-9
_SQUASH_EPS = 1e-6


@dataclass
class SacConfig:
    gamma: float = 1.0
    lr: float = 1e-3
    entropy_coef: float = 0.2       # e_s; fixed unless auto_entropy
    batch_size: int = 16            # M
    buffer_capacity: int = 20_000   # D
    polyak: float = 0.001
    target_clip: float = 100.0
    warm_start_steps: int = 100     # uniform actions before the policy takes over
    updates_per_step: int = 1
    hidden: tuple[int, ...] = (64, 64)
    log_std_min: float = -20.0
    log_std_max: float = 2.0
    auto_entropy: bool = False
    target_entropy: float | None = None  # default -(action dim)
    normalize_rewards: bool = False

    def validate(self) -> None:
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("sac gamma must be in [0, 1]")
        if self.entropy_coef < 0:
            raise ValueError("sac entropy_coef must be >= 0")
        if self.batch_size > self.buffer_capacity:
            raise ValueError("sac batch_size must not exceed buffer_capacity")


class ReplayBuffer:
    """FIFO ring of (s, a_raw, r_train, s'); sampling is uniform with replacement."""

    def __init__(self, capacity: int, obs_dim: int, action_dim: int):
        self.capacity = capacity
        self.s = np.zeros((capacity, obs_dim))
        self.a = np.zeros((capacity, action_dim))
        self.r = np.zeros(capacity)
        self.s2 = np.zeros((capacity, obs_dim))
        self._next = 0
        self._size = 0

    def __len__(self) -> int:
        return self._size

    def push(self, s, a, r, s2) -> None:
        i = self._next
        self.s[i] = s
        self.a[i] = a
        self.r[i] = r
        self.s2[i] = s2
        self._next = (i + 1) % self.capacity
        self._size = min(self._size + 1, self.capacity)

    def sample(self, rng: np.random.Generator, batch_size: int):
        idx = rng.integers(0, self._size, size=batch_size)
        return self.s[idx], self.a[idx], self.r[idx], self.s2[idx]


class RewardNormalizer:
    """Running mean/std scaler applied at buffer-insert time (after any corruption)."""

    def __init__(self):
        self.count = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update_and_normalize(self, r: float) -> float:
        self.count += 1
        delta = r - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (r - self.mean)
        var = self.m2 / self.count if self.count > 1 else 1.0
        return (r - self.mean) / math.sqrt(var + 1e-8)


class SacAgent:
    """One learner instance; owns its networks, replay, and sampling RNG exclusively."""

    def __init__(self, obs_dim: int, action_dim: int, cfg: SacConfig,
                 init_rng: np.random.Generator, sample_rng: np.random.Generator):
        cfg.validate()
        self.cfg = cfg
        self.obs_dim = obs_dim
        self.action_dim = action_dim
        self.rng = sample_rng

        widths = [obs_dim, *cfg.hidden, 2 * action_dim]
        # log-std head (second half of the output columns) starts near zero
        self.actor = MLP(widths, init_rng, out_scale=0.01,
                         out_scale_cols=slice(action_dim, 2 * action_dim))
        qwidths = [obs_dim + action_dim, *cfg.hidden, 1]
        self.critic1 = MLP(qwidths, init_rng)
        self.critic2 = MLP(qwidths, init_rng)
        self.target1 = MLP(qwidths, init_rng)
        self.target2 = MLP(qwidths, init_rng)
        self.target1.copy_from(self.critic1)
        self.target2.copy_from(self.critic2)

        self.actor_opt = Adam(self.actor.parameters(), cfg.lr)
        self.critic1_opt = Adam(self.critic1.parameters(), cfg.lr)
        self.critic2_opt = Adam(self.critic2.parameters(), cfg.lr)

        self.buffer = ReplayBuffer(cfg.buffer_capacity, obs_dim, action_dim)
        self.normalizer = RewardNormalizer() if cfg.normalize_rewards else None
        self.env_steps = 0
        self.update_rounds = 0
        self.log_alpha = math.log(max(cfg.entropy_coef, 1e-8))
        self.target_entropy = (cfg.target_entropy if cfg.target_entropy is not None
                               else -float(action_dim))

    # -- policy distribution -------------------------------------------------

    @property
    def entropy_coef(self) -> float:
        return math.exp(self.log_alpha) if self.cfg.auto_entropy else self.cfg.entropy_coef

    def _policy_stats(self, obs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        out = self.actor.forward(obs)
        mean = out[:, :self.action_dim]
        log_std = np.clip(out[:, self.action_dim:], self.cfg.log_std_min, self.cfg.log_std_max)
        return mean, log_std

    @staticmethod
    def _log_prob_from_u(u, mean, log_std, a) -> np.ndarray:
        z = (u - mean) * np.exp(-log_std)
        per_dim = -0.5 * z * z - log_std - 0.5 * LOG_2PI - np.log(1.0 + _SQUASH_EPS - a * a)
        return per_dim.sum(axis=1)

    def log_prob(self, obs: np.ndarray, raw_action: np.ndarray) -> float:
        """Exact log-density of a given squashed action under the current policy."""
        mean, log_std = self._policy_stats(np.atleast_2d(obs))
        a = np.clip(np.atleast_2d(raw_action), -_ATANH_EDGE, _ATANH_EDGE)
        u = np.arctanh(a)
        return float(self._log_prob_from_u(u, mean, log_std, a)[0])

    def select_action(self, obs: np.ndarray, deterministic: bool = False):
        """Return (raw action in (-1,1)^A, log_prob, entropy_estimate).

        Stochastic mode samples the squashed Gaussian; during the first
        warm_start_steps it draws uniform raw actions instead. The entropy
        estimate is the single-sample -log_prob.
        """
        mean, log_std = self._policy_stats(np.atleast_2d(obs))
        if not np.all(np.isfinite(mean)) or not np.all(np.isfinite(log_std)):
            raise NumericalDivergence("actor produced a non-finite output")
        if deterministic:
            a = np.tanh(mean)
        elif self.env_steps < self.cfg.warm_start_steps:
            a = self.rng.uniform(-1.0, 1.0, size=(1, self.action_dim))
        else:
            eps = self.rng.standard_normal((1, self.action_dim))
            a = np.tanh(mean + np.exp(log_std) * eps)
        a_safe = np.clip(a, -_ATANH_EDGE, _ATANH_EDGE)
        logp = float(self._log_prob_from_u(np.arctanh(a_safe), mean, log_std, a_safe)[0])
        return a.ravel().copy(), logp, -logp

    def introspect(self, obs: np.ndarray, raw_action: np.ndarray):
        """Online twin-critic values at (s, a) and the policy entropy estimate at s.

        Read-only: touches no parameters and consumes no randomness.
        """
        x = np.concatenate([np.ravel(obs), np.ravel(raw_action)])[None, :]
        q1 = float(self.critic1.forward(x)[0, 0])
        q2 = float(self.critic2.forward(x)[0, 0])
        return q1, q2, -self.log_prob(obs, raw_action)

    # -- updates ---------------------------------------------------------------

    def critic_targets(self, r: np.ndarray, s2: np.ndarray) -> np.ndarray:
        """U = r + gamma * (min target-critic value at (s', a') - e_s log pi(a'|s')),
        with a' freshly sampled from the current actor; clamped to the target bound."""
        m = s2.shape[0]
        mean, log_std = self._policy_stats(s2)
        eps = self.rng.standard_normal((m, self.action_dim))
        u = mean + np.exp(log_std) * eps
        a2 = np.tanh(u)
        logp = self._log_prob_from_u(u, mean, log_std, a2)
        x = np.concatenate([s2, a2], axis=1)
        q1 = self.target1.forward(x).ravel()
        q2 = self.target2.forward(x).ravel()
        target = r + self.cfg.gamma * (np.minimum(q1, q2) - self.entropy_coef * logp)
        c = self.cfg.target_clip
        return np.clip(target, -c, c)

    def _critic_loss_and_grads(self, critic: MLP, s, a, targets):
        tape = Tape()
        x = tape.constant(np.concatenate([s, a], axis=1))
        q, leaves = critic.forward_tape(tape, x)
        diff = tape.sub(q, tape.constant(targets.reshape(-1, 1)))
        loss = tape.mean_all(tape.square(diff))
        tape.backward(loss)
        grads = [p.grad if p.grad is not None else np.zeros_like(p.value) for p in leaves]
        return float(loss.value[0, 0]), grads

    def update_critics(self, s, a, r, s2) -> tuple[float, float]:
        targets = self.critic_targets(r, s2)
        loss1, g1 = self._critic_loss_and_grads(self.critic1, s, a, targets)
        loss2, g2 = self._critic_loss_and_grads(self.critic2, s, a, targets)
        if not (math.isfinite(loss1) and math.isfinite(loss2)):
            raise NumericalDivergence("non-finite critic loss")
        self.critic1_opt.step(g1)
        self.critic2_opt.step(g2)
        return loss1, loss2

    def _min_q_tape(self, tape: Tape, s_node, a_node):
        """Tape-aware min of the online critics; overridable for rigged-critic tests."""
        x = tape.concat_cols(s_node, a_node)
        q1, _ = self.critic1.forward_tape(tape, x, watched=False)
        q2, _ = self.critic2.forward_tape(tape, x, watched=False)
        return tape.minimum(q1, q2)

    def _actor_loss_and_grads(self, s: np.ndarray, eps: np.ndarray):
        """Mean of e_s*log pi(a~|s) - min_i Q_i(s, a~) with reparameterized a~ = tanh(mu + sigma*eps)."""
        tape = Tape()
        s_node = tape.constant(s)
        out, leaves = self.actor.forward_tape(tape, s_node)
        adim = self.action_dim
        mean = tape.slice_cols(out, 0, adim)
        log_std = tape.clip(tape.slice_cols(out, adim, 2 * adim),
                            self.cfg.log_std_min, self.cfg.log_std_max)
        std = tape.exp(log_std)
        u = tape.add(mean, tape.mul(std, tape.constant(eps)))
        a = tape.tanh(u)

        z = tape.mul(tape.sub(u, mean), tape.exp(tape.scale(log_std, -1.0)))
        squash = tape.log(tape.scale(tape.square(a), -1.0, shift=1.0 + _SQUASH_EPS))
        per_dim = tape.sub(tape.add(tape.scale(tape.square(z), -0.5, shift=-0.5 * LOG_2PI),
                                    tape.scale(log_std, -1.0)),
                           squash)
        logp = tape.sum_cols(per_dim)

        q_min = self._min_q_tape(tape, s_node, a)
        loss = tape.mean_all(tape.sub(tape.scale(logp, self.entropy_coef), q_min))
        tape.backward(loss)
        grads = [p.grad if p.grad is not None else np.zeros_like(p.value) for p in leaves]
        mean_logp = float(logp.value.mean())
        return float(loss.value[0, 0]), grads, mean_logp

    def update_actor(self, s: np.ndarray) -> float:
        eps = self.rng.standard_normal((s.shape[0], self.action_dim))
        loss, grads, mean_logp = self._actor_loss_and_grads(s, eps)
        if not math.isfinite(loss):
            raise NumericalDivergence("non-finite actor loss")
        self.actor_opt.step(grads)
        if self.cfg.auto_entropy:
            alpha = math.exp(self.log_alpha)
            self.log_alpha -= self.cfg.lr * (-alpha * (mean_logp + self.target_entropy))
        return loss

    def polyak_update(self) -> None:
        rho = self.cfg.polyak
        for online, target in ((self.critic1, self.target1), (self.critic2, self.target2)):
            for p, tp in zip(online.parameters(), target.parameters()):
                tp *= 1.0 - rho
                tp += rho * p

    def train_step(self, s, a, r_train, s2) -> dict:
        """Store one (already corrupted) transition and, past warm-up, run one update round."""
        r_stored = (self.normalizer.update_and_normalize(r_train)
                    if self.normalizer is not None else r_train)
        self.buffer.push(s, a, r_stored, s2)
        t = self.env_steps
        self.env_steps += 1
        diag = {"updated": False, "critic_loss1": math.nan, "critic_loss2": math.nan,
                "actor_loss": math.nan}
        if len(self.buffer) > self.cfg.batch_size and t >= self.cfg.warm_start_steps:
            for _ in range(self.cfg.updates_per_step):
                bs, ba, br, bs2 = self.buffer.sample(self.rng, self.cfg.batch_size)
                loss1, loss2 = self.update_critics(bs, ba, br, bs2)
                actor_loss = self.update_actor(bs)
                self.polyak_update()
                self.update_rounds += 1
            diag.update(updated=True, critic_loss1=loss1, critic_loss2=loss2,
                        actor_loss=actor_loss)
        return diag

    def parameter_blob(self) -> bytes:
        """All learner parameters as bytes, for trajectory-identity checks."""
        parts = []
        for net in (self.actor, self.critic1, self.critic2, self.target1, self.target2):
            parts.extend(p.tobytes() for p in net.parameters())
        return b"".join(parts)
