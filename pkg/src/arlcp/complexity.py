"""Complexity buckets from reflection counts and the coordinated coefficient split."""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class PenaltyConfig:
    n1: int = 40
    n2: int = 80
    lambda1: float = 0.05
    lambda2: float = 0.1
    lambda3: float = 0.15
    alpha: float = 0.2
    std_epsilon: float = 1e-8

    def __post_init__(self):
        for name in ("n1", "n2"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < 1:
                raise ConfigError(f"{name} must be a positive integer, got {v!r}")
        if self.n1 >= self.n2:
            raise ConfigError(f"n1 must be < n2 (got n1={self.n1}, n2={self.n2})")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        for name in ("lambda1", "lambda2", "lambda3"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ConfigError(f"{name} must lie in (0, 1), got {v}")
            if v > self.alpha:
                raise ConfigError(f"{name}={v} exceeds alpha={self.alpha}; "
                                  "the length coefficient would go negative")
        if not self.std_epsilon > 0:
            raise ConfigError("std_epsilon must be positive")

    def to_dict(self) -> dict:
        return asdict(self)


class ComplexityBucket(enum.IntEnum):
    SIMPLE = 0
    MODERATE = 1
    HARD = 2

    @property
    def label(self) -> str:
        return self.name.lower()


def classify_complexity(rtc: int, cfg: PenaltyConfig) -> ComplexityBucket:
    if rtc <= cfg.n1:
        return ComplexityBucket.SIMPLE
    if rtc <= cfg.n2:
        return ComplexityBucket.MODERATE
    return ComplexityBucket.HARD


def allocate_coefficients(bucket: ComplexityBucket, cfg: PenaltyConfig) -> tuple[float, float]:
    """Return ``(alpha1, alpha2)``: the reflection weight picked by the bucket and
    the remainder of ``cfg.alpha`` left for the length penalty."""
    alpha1 = (cfg.lambda1, cfg.lambda2, cfg.lambda3)[bucket]
    return alpha1, cfg.alpha - alpha1
