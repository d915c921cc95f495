"""Toy policy-gradient trainer over synthetic response archetypes.

A softmax policy picks among a handful of archetypes (response styles with their
own accuracy, length and reflection-count distributions). Each step samples a
group of ``m`` rollouts, scores them with the composite reward, turns rewards into
leave-one-out advantages and ascends the clipped surrogate in logit space.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .advantage import DEFAULT_CLIP_EPS, rloo_advantages
from .complexity import ComplexityBucket, ConfigError, PenaltyConfig, allocate_coefficients
from .reward_engine import GroupStats, score_measurements


class RewardMode(str, enum.Enum):
    ARLCP = "arlcp"
    ACCURACY_ONLY = "accuracy_only"


@dataclass(frozen=True)
class Archetype:
    name: str
    p_correct: float
    len_mean: float
    len_std: float
    rtc_mean: float
    rtc_std: float

    def __post_init__(self):
        if not 0.0 <= self.p_correct <= 1.0:
            raise ConfigError(f"archetype {self.name!r}: p_correct must be in [0, 1]")
        if self.len_mean <= 0:
            raise ConfigError(f"archetype {self.name!r}: len_mean must be positive")
        if self.rtc_mean < 0:
            raise ConfigError(f"archetype {self.name!r}: rtc_mean must be non-negative")
        if self.len_std < 0 or self.rtc_std < 0:
            raise ConfigError(f"archetype {self.name!r}: standard deviations must be >= 0")


BENCHMARK_ARCHETYPES = (
    Archetype("concise_correct", 0.9, 300.0, 50.0, 10.0, 5.0),
    Archetype("verbose_reflective_correct", 0.9, 2000.0, 300.0, 100.0, 20.0),
    Archetype("incorrect", 0.1, 1500.0, 300.0, 80.0, 20.0),
)


@dataclass(frozen=True)
class SimConfig:
    archetypes: tuple[Archetype, ...] = BENCHMARK_ARCHETYPES
    m: int = 16
    steps: int = 2000
    penalty: PenaltyConfig = field(default_factory=PenaltyConfig)
    reward_mode: RewardMode = RewardMode.ARLCP
    clip_eps: float = DEFAULT_CLIP_EPS
    epochs_per_batch: int = 1
    learning_rate: float = 0.05
    seed: int = 0
    initial_logits: Optional[tuple[float, ...]] = None
    oracle_n_mc: int = 100_000

    def __post_init__(self):
        object.__setattr__(self, "archetypes", tuple(self.archetypes))
        object.__setattr__(self, "reward_mode", RewardMode(self.reward_mode))
        if len(self.archetypes) < 2:
            raise ConfigError("need at least two archetypes")
        if len({a.name for a in self.archetypes}) != len(self.archetypes):
            raise ConfigError("archetype names must be unique")
        if self.m < 2:
            raise ConfigError("m must be >= 2 for the leave-one-out baseline")
        if self.steps < 0:
            raise ConfigError("steps must be non-negative")
        if not 0.0 < self.clip_eps < 1.0:
            raise ConfigError("clip_eps must lie in (0, 1)")
        if self.epochs_per_batch < 1:
            raise ConfigError("epochs_per_batch must be >= 1")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")
        if self.initial_logits is not None:
            if len(self.initial_logits) != len(self.archetypes):
                raise ConfigError("initial_logits must have one entry per archetype")
            object.__setattr__(self, "initial_logits",
                               tuple(float(x) for x in self.initial_logits))
        if self.oracle_n_mc < 10_000:
            raise ConfigError("oracle_n_mc must be >= 10^4")


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=float)
    e = np.exp(z - z.max())
    return e / e.sum()


@dataclass(frozen=True)
class SimPolicy:
    logits: np.ndarray
    learning_rate: float
    rng_seed: int

    @property
    def probs(self) -> np.ndarray:
        return softmax(self.logits)

    @classmethod
    def from_config(cls, cfg: SimConfig) -> "SimPolicy":
        k = len(cfg.archetypes)
        logits = np.zeros(k) if cfg.initial_logits is None else np.array(cfg.initial_logits)
        return cls(logits, cfg.learning_rate, cfg.seed)


class SyntheticRollout(NamedTuple):
    archetype: int
    correct: bool
    rtc: int
    len: int


def _draw(arch: Archetype, n: int, rng: np.random.Generator):
    correct = rng.random(n) < arch.p_correct
    length = np.maximum(1, np.rint(rng.normal(arch.len_mean, arch.len_std, n))).astype(np.int64)
    rtc = np.maximum(0, np.rint(rng.normal(arch.rtc_mean, arch.rtc_std, n))).astype(np.int64)
    return correct, rtc, length


def sample_group(policy: SimPolicy, cfg: SimConfig, rng: np.random.Generator) -> list[SyntheticRollout]:
    actions = rng.choice(len(cfg.archetypes), size=cfg.m, p=policy.probs)
    u = rng.random(cfg.m)
    z_len = rng.standard_normal(cfg.m)
    z_rtc = rng.standard_normal(cfg.m)
    out = []
    for i, a in enumerate(actions):
        arch = cfg.archetypes[a]
        length = max(1, int(np.rint(arch.len_mean + arch.len_std * z_len[i])))
        rtc = max(0, int(np.rint(arch.rtc_mean + arch.rtc_std * z_rtc[i])))
        out.append(SyntheticRollout(int(a), bool(u[i] < arch.p_correct), rtc, length))
    return out


def group_rewards(group: Sequence[SyntheticRollout], cfg: SimConfig) -> np.ndarray:
    if cfg.reward_mode is RewardMode.ACCURACY_ONLY:
        return np.array([1.0 if g.correct else 0.0 for g in group])
    scored, _ = score_measurements([(g.rtc, g.len, g.correct) for g in group], cfg.penalty)
    return np.array([s.reward for s in scored])


def surrogate_objective(logits, old_logits, actions, advantages, clip_eps: float) -> float:
    """Sum over the group of ``min(ratio * A, clip(ratio) * A)``."""
    p_new = softmax(logits)[actions]
    p_old = softmax(old_logits)[actions]
    ratio = p_new / p_old
    adv = np.asarray(advantages, dtype=float)
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps)
    return float(np.minimum(ratio * adv, clipped * adv).sum())


def surrogate_gradient(logits, old_logits, actions, advantages, clip_eps: float) -> np.ndarray:
    """Analytic gradient of :func:`surrogate_objective` w.r.t. ``logits``.

    A term contributes ``A * ratio * (onehot(a) - p)`` while its unclipped branch is
    the active side of the min, and nothing once the clipped (constant) branch wins.
    """
    actions = np.asarray(actions)
    p = softmax(logits)
    ratio = p[actions] / softmax(old_logits)[actions]
    adv = np.asarray(advantages, dtype=float)
    clipped = np.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps)
    active = ratio * adv <= clipped * adv
    coef = np.where(active, adv * ratio, 0.0)
    return np.bincount(actions, weights=coef, minlength=p.size) - coef.sum() * p


def policy_gradient_step(policy: SimPolicy, group: Sequence[SyntheticRollout],
                         cfg: SimConfig) -> SimPolicy:
    if len(group) < 2:
        raise ValueError("policy gradient step needs at least two rollouts")
    adv = rloo_advantages(group_rewards(group, cfg))
    actions = np.array([g.archetype for g in group])
    old = policy.logits.copy()
    theta = old.copy()
    for _ in range(cfg.epochs_per_batch):
        theta = theta + policy.learning_rate * surrogate_gradient(theta, old, actions, adv,
                                                                  cfg.clip_eps)
    return replace(policy, logits=theta)


@dataclass(frozen=True)
class StepRecord:
    step: int
    probs: tuple[float, ...]
    mean_reward: float
    mean_rtc: float
    mean_len: float
    accuracy: float


@dataclass
class TrainingTrace:
    archetype_names: tuple[str, ...]
    records: list[StepRecord]
    initial_policy: SimPolicy
    final_policy: SimPolicy

    def to_csv(self) -> str:
        header = (["step"] + [f"prob_{n}" for n in self.archetype_names]
                  + ["mean_reward", "mean_rtc", "mean_len", "accuracy"])
        lines = [",".join(header)]
        for r in self.records:
            vals = list(r.probs) + [r.mean_reward, r.mean_rtc, r.mean_len, r.accuracy]
            lines.append(",".join([str(r.step)] + [f"{v:.9f}" for v in vals]))
        return "\n".join(lines) + "\n"

    def series(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def run_training(cfg: SimConfig, policy: Optional[SimPolicy] = None) -> TrainingTrace:
    policy = policy if policy is not None else SimPolicy.from_config(cfg)
    initial = policy
    rng = np.random.default_rng(policy.rng_seed)
    records = []
    for step in range(1, cfg.steps + 1):
        group = sample_group(policy, cfg, rng)
        rewards = group_rewards(group, cfg)
        policy = policy_gradient_step(policy, group, cfg)
        records.append(StepRecord(
            step=step,
            probs=tuple(policy.probs.tolist()),
            mean_reward=float(rewards.mean()),
            mean_rtc=float(np.mean([g.rtc for g in group])),
            mean_len=float(np.mean([g.len for g in group])),
            accuracy=float(np.mean([g.correct for g in group])),
        ))
    return TrainingTrace(tuple(a.name for a in cfg.archetypes), records, initial, policy)


# -- Monte-Carlo oracle -------------------------------------------------------

def mixture_reference_stats(archetypes: Sequence[Archetype], probs, m: int = 16) -> GroupStats:
    """Population statistics of the correct rollouts under a policy mixture.

    Rounding and clamping of the sampled values are ignored, so this is the
    idealised Gaussian-mixture reference, not a sample estimate.
    """
    w = np.asarray(probs, dtype=float) * np.array([a.p_correct for a in archetypes])
    if w.sum() <= 0:
        return GroupStats(0.0, 0.0, 0.0, 0.0, 0, m)
    w = w / w.sum()

    def moments(mu, sd):
        mu, sd = np.asarray(mu), np.asarray(sd)
        mean = float(w @ mu)
        return mean, math.sqrt(max(float(w @ (sd ** 2 + mu ** 2)) - mean ** 2, 0.0))

    mr, sr = moments([a.rtc_mean for a in archetypes], [a.rtc_std for a in archetypes])
    ml, sl = moments([a.len_mean for a in archetypes], [a.len_std for a in archetypes])
    return GroupStats(mr, sr, ml, sl, m, m)


def _vector_penalty(x: np.ndarray, mean: float, std: float, n_correct: int, eps: float):
    if n_correct >= 2 and std > eps:
        z = (x - mean) / std
        e = np.exp(-np.abs(z))
        return np.where(z >= 0, 1.0 / (1.0 + e), e / (1.0 + e))
    return np.full(x.shape, 0.5)


def brute_force_expected_reward(arch: Archetype, reference_group_stats: GroupStats,
                                cfg: PenaltyConfig, n_mc: int, rng: np.random.Generator,
                                mode: RewardMode = RewardMode.ARLCP) -> tuple[float, float]:
    """Monte-Carlo estimate of the expected reward of ``arch`` against fixed stats.

    Returns ``(mean, standard_error)``.
    """
    if n_mc < 10_000:
        raise ValueError("n_mc must be >= 10^4")
    correct, rtc, length = _draw(arch, n_mc, rng)
    if RewardMode(mode) is RewardMode.ACCURACY_ONLY:
        rewards = correct.astype(float)
    else:
        s = reference_group_stats
        bucket = np.where(rtc <= cfg.n1, 0, np.where(rtc <= cfg.n2, 1, 2))
        coeffs = np.array([allocate_coefficients(b, cfg) for b in ComplexityBucket])
        a1, a2 = coeffs[bucket, 0], coeffs[bucket, 1]
        f_rtc = _vector_penalty(rtc.astype(float), s.mean_rtc_correct, s.std_rtc_correct,
                                s.n_correct, cfg.std_epsilon)
        f_len = _vector_penalty(length.astype(float), s.mean_len_correct, s.std_len_correct,
                                s.n_correct, cfg.std_epsilon)
        rewards = np.where(correct, 1.0 - a1 * f_rtc - a2 * f_len, 0.0)
    # shifted mean: exact when every sample is identical
    dev = rewards - rewards[0]
    mean = float(rewards[0] + dev.mean())
    se = float(dev.std(ddof=1) / math.sqrt(n_mc))
    return mean, se


@dataclass(frozen=True)
class OracleResult:
    reference: GroupStats
    means: tuple[float, ...]
    std_errors: tuple[float, ...]

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.means))

    @property
    def gap_in_se(self) -> float:
        """Gap between the best and runner-up estimates in combined standard errors."""
        order = np.argsort(self.means)[::-1]
        b, s = order[0], order[1]
        se = math.hypot(self.std_errors[b], self.std_errors[s])
        gap = self.means[b] - self.means[s]
        if se == 0:
            return math.inf if gap > 0 else 0.0
        return gap / se


def oracle_ranking(cfg: SimConfig, probs=None) -> OracleResult:
    """Expected reward of every archetype against the correct-rollout statistics of
    the initial policy mixture, one independent random stream per archetype."""
    if probs is None:
        probs = SimPolicy.from_config(cfg).probs
    ref = mixture_reference_stats(cfg.archetypes, probs, cfg.m)
    streams = np.random.SeedSequence(cfg.seed).spawn(len(cfg.archetypes))
    res = [brute_force_expected_reward(a, ref, cfg.penalty, cfg.oracle_n_mc,
                                       np.random.default_rng(ss), cfg.reward_mode)
           for a, ss in zip(cfg.archetypes, streams)]
    return OracleResult(ref, tuple(r[0] for r in res), tuple(r[1] for r in res))


@dataclass(frozen=True)
class TrainingSummary:
    final_probs: tuple[float, ...]
    top_archetype: int
    oracle: OracleResult
    converged: bool


def summarize(trace: TrainingTrace, oracle: OracleResult, threshold: float = 0.9) -> TrainingSummary:
    probs = trace.final_policy.probs
    top = int(np.argmax(probs))
    converged = (bool(trace.records) and probs[top] > threshold and top == oracle.argmax
                 and oracle.gap_in_se > 3.0)
    return TrainingSummary(tuple(probs.tolist()), top, oracle, bool(converged))
