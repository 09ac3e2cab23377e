"""RIS-aided underlay cognitive-radio environment.

Rayleigh channels are redrawn i.i.d. every step; the secondary transmit
power is capped at decode time by the interference constraint, so every
executed action is feasible by construction. Non-episodic: step() never
terminates.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .nn import ShapeError

TWO_PI = 2.0 * np.pi


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


@dataclass
class EnvConfig:
    num_elements: int = 6          # R, reflecting elements
    max_power_db: float = 1.0      # P_m
    interference_db: float = 10.0  # I, cap on interference at the primary receiver
    noise_var: float = 1e-2        # N0
    seed: int = 0

    def validate(self) -> None:
        if self.num_elements < 1:
            raise ValueError("env num_elements must be >= 1")
        if self.noise_var <= 0:
            raise ValueError("env noise_var must be > 0")


@dataclass
class ChannelDraw:
    """One step's fading realization plus the interference limit in force."""

    h1: np.ndarray                 # (R,) complex, SU-Tx -> RIS
    h2: np.ndarray                 # (R,) complex, RIS -> SU-Rx
    h_p: complex                   # SU-Tx -> PU-Rx
    g_p: float = field(init=False)  # |h_p|^2
    interference_limit_db: float = 10.0

    def __post_init__(self):
        self.g_p = float(abs(self.h_p) ** 2)


def sample_channels(rng: np.random.Generator, num_elements: int,
                    interference_db: float = 10.0) -> ChannelDraw:
    """Draw unit-variance circularly-symmetric Gaussian entries (Rayleigh envelopes)."""
    scale = np.sqrt(0.5)
    flat = rng.normal(0.0, scale, size=2 * (2 * num_elements + 1))
    re, im = flat[0::2], flat[1::2]
    h = re + 1j * im
    return ChannelDraw(h1=h[:num_elements], h2=h[num_elements:2 * num_elements],
                       h_p=complex(h[-1]), interference_limit_db=interference_db)


def power_cap(p_max_lin: float, i_lin: float, g_p: float) -> float:
    """Feasible transmit-power ceiling; g_p = 0 leaves only the hardware cap."""
    if g_p == 0.0:
        return p_max_lin
    return min(p_max_lin, i_lin / g_p)


def effective_gain(h1: np.ndarray, phases: np.ndarray, h2: np.ndarray) -> float:
    """|sum_r h1_r e^{j rho_r} h2_r|^2 for a unit-modulus reflecting surface."""
    if not (len(h1) == len(phases) == len(h2)):
        raise ShapeError(f"element counts differ: {len(h1)}, {len(phases)}, {len(h2)}")
    combined = np.sum(h1 * np.exp(1j * phases) * h2)
    return float(abs(combined) ** 2)


def snr(p_s: float, gain: float, noise_var: float) -> float:
    return p_s * gain / noise_var


def rate(snr_lin: float) -> float:
    return float(np.log2(1.0 + snr_lin))


def co_phasing(h1: np.ndarray, h2: np.ndarray) -> np.ndarray:
    """Rate-maximizing phases for fixed channels: rho_r = -arg(h1_r h2_r)."""
    return np.mod(-np.angle(h1 * h2), TWO_PI)


def decode_action(raw: np.ndarray, cap: float) -> tuple[float, np.ndarray, int]:
    """Map a squashed raw action in [-1,1]^(1+R) onto the feasible (power, phases) box.

    Returns (p_s, phases, n_clamped); out-of-range inputs are clamped and counted.
    """
    raw = np.asarray(raw, dtype=np.float64).ravel()
    n_clamped = int(np.count_nonzero((raw < -1.0) | (raw > 1.0)))
    if n_clamped:
        raw = np.clip(raw, -1.0, 1.0)
    p_s = cap * (raw[0] + 1.0) / 2.0
    phases = np.mod(np.pi * (raw[1:] + 1.0), TWO_PI)
    return float(p_s), phases, n_clamped


class CrnRisEnv:
    """Continuing control environment: observe channels, pick (power, phases), earn rate."""

    def __init__(self, cfg: EnvConfig, rng: np.random.Generator):
        cfg.validate()
        self.cfg = cfg
        self.rng = rng
        self.p_max_lin = db_to_linear(cfg.max_power_db)
        self.i_lin = db_to_linear(cfg.interference_db)
        self.obs_dim = 4 + 5 * cfg.num_elements
        self.action_dim = 1 + cfg.num_elements
        self.clamp_events = 0
        self.draw: ChannelDraw | None = None
        self._prev_power = 0.0
        self._prev_phases = np.zeros(cfg.num_elements)

    def reset(self) -> np.ndarray:
        self.draw = sample_channels(self.rng, self.cfg.num_elements, self.cfg.interference_db)
        self._prev_power = 0.0
        self._prev_phases = np.zeros(self.cfg.num_elements)
        self.clamp_events = 0
        return self._observation()

    @property
    def cap(self) -> float:
        return power_cap(self.p_max_lin, self.i_lin, self.draw.g_p)

    def peek_rate(self, raw_action: np.ndarray) -> float:
        """Rate the current draw would yield for raw_action; no state change."""
        p_s, phases, _ = decode_action(raw_action, self.cap)
        gain = effective_gain(self.draw.h1, phases, self.draw.h2)
        return rate(snr(p_s, gain, self.cfg.noise_var))

    def step(self, raw_action: np.ndarray) -> tuple[np.ndarray, float, dict]:
        p_s, phases, n_clamped = decode_action(raw_action, self.cap)
        self.clamp_events += n_clamped
        gain = effective_gain(self.draw.h1, phases, self.draw.h2)
        reward = rate(snr(p_s, gain, self.cfg.noise_var))
        info = {"p_s": p_s, "cap": self.cap, "gain": gain, "clamped": n_clamped}
        self._prev_power = p_s
        self._prev_phases = phases
        self.draw = sample_channels(self.rng, self.cfg.num_elements, self.cfg.interference_db)
        return self._observation(), reward, info

    def _observation(self) -> np.ndarray:
        d = self.draw
        return np.concatenate([
            [d.interference_limit_db],
            d.h1.real, d.h1.imag,
            d.h2.real, d.h2.imag,
            [d.h_p.real, d.h_p.imag],
            [self._prev_power],
            self._prev_phases,
        ])
