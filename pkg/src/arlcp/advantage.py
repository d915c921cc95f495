"""Leave-one-out advantages, token broadcast and the clipped PPO surrogate term."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

DEFAULT_CLIP_EPS = 0.2


@dataclass(frozen=True)
class AdvantageBatch:
    advantages: tuple[float, ...]
    token_lengths: tuple[int, ...]

    def token_advantages(self) -> list[list[float]]:
        return [[a] * n for a, n in zip(self.advantages, self.token_lengths)]

    def flat(self) -> np.ndarray:
        return np.repeat(np.asarray(self.advantages, dtype=float), self.token_lengths)


def rloo_advantages(rewards: Sequence[float]) -> list[float]:
    """``A_i = R_i - mean(R_j for j != i)``."""
    r = np.asarray(rewards, dtype=float)
    m = r.size
    if r.ndim != 1 or m < 2:
        raise ValueError(f"leave-one-out baseline needs at least 2 rewards, got {m}")
    baseline = (r.sum() - r) / (m - 1)
    return (r - baseline).tolist()


def broadcast_token_advantages(adv: Sequence[float], token_lengths: Sequence[int]) -> AdvantageBatch:
    if len(adv) != len(token_lengths):
        raise ValueError(f"{len(adv)} advantages but {len(token_lengths)} token lengths")
    if any(int(n) < 1 for n in token_lengths):
        raise ValueError("token lengths must be positive")
    return AdvantageBatch(tuple(float(a) for a in adv), tuple(int(n) for n in token_lengths))


def density_ratio(p_new: float, p_old: float) -> float:
    if p_old <= 0:
        raise ValueError("old-policy probability must be positive")
    if p_new < 0:
        raise ValueError("probability must be non-negative")
    return p_new / p_old


def ppo_clipped_term(ratio: float, advantage: float, clip_eps: float = DEFAULT_CLIP_EPS) -> float:
    clipped = min(max(ratio, 1.0 - clip_eps), 1.0 + clip_eps)
    return min(ratio * advantage, clipped * advantage)
