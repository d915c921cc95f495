"""Group statistics, sigmoid penalties and the composite reward for one prompt group."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .complexity import ComplexityBucket, PenaltyConfig, allocate_coefficients, classify_complexity
from .trace_model import (
    DEFAULT_LEXICON,
    Rollout,
    TriggerLexicon,
    count_reflection_tokens,
    extract_answer,
    normalize_answer,
    response_length,
    split_thinking,
)


class InvalidGroupError(ValueError):
    pass


@dataclass(frozen=True)
class GroupStats:
    mean_rtc_correct: float
    std_rtc_correct: float
    mean_len_correct: float
    std_len_correct: float
    n_correct: int
    n_total: int


@dataclass(frozen=True)
class ScoredRollout:
    rollout_id: str
    rtc: int
    len: int
    bucket: ComplexityBucket
    alpha1: float
    alpha2: float
    correct: bool
    reflection_penalty: float
    length_penalty: float
    reward: float
    prompt_id: str = ""
    answer: Optional[str] = None


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


def _mean_pstd(xs: Sequence[float]) -> tuple[float, float]:
    n = len(xs)
    mean = math.fsum(xs) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum((x - mean) ** 2 for x in xs) / n
    return mean, math.sqrt(var)


def correct_group_stats(group: Iterable[tuple[int, int, bool]]) -> GroupStats:
    """Mean and population std of RTC and LEN over the correct members of a group."""
    group = list(group)
    if not group:
        raise InvalidGroupError("cannot compute statistics of an empty group")
    rtcs = [float(r) for r, _, ok in group if ok]
    lens = [float(n) for _, n, ok in group if ok]
    if not rtcs:
        return GroupStats(0.0, 0.0, 0.0, 0.0, 0, len(group))
    mean_rtc, std_rtc = _mean_pstd(rtcs)
    mean_len, std_len = _mean_pstd(lens)
    return GroupStats(mean_rtc, std_rtc, mean_len, std_len, len(rtcs), len(group))


def _standardized_sigmoid(x: float, mean: float, std: float, n_correct: int,
                          eps: float) -> float:
    if n_correct >= 2 and std > eps:
        return sigmoid((x - mean) / std)
    return 0.5


def reflection_penalty(rtc: float, stats: GroupStats, cfg: PenaltyConfig) -> float:
    return _standardized_sigmoid(rtc, stats.mean_rtc_correct, stats.std_rtc_correct,
                                 stats.n_correct, cfg.std_epsilon)


def length_penalty(length: float, stats: GroupStats, cfg: PenaltyConfig) -> float:
    return _standardized_sigmoid(length, stats.mean_len_correct, stats.std_len_correct,
                                 stats.n_correct, cfg.std_epsilon)


def composite_reward(correct: bool, f_rtc: float, f_len: float, alpha1: float,
                     alpha2: float) -> float:
    if not correct:
        return 0.0
    return 1.0 - alpha1 * f_rtc - alpha2 * f_len


def score_measurements(
    measurements: Sequence[tuple[int, int, bool]],
    cfg: PenaltyConfig,
    rollout_ids: Optional[Sequence[str]] = None,
    prompt_id: str = "",
    answers: Optional[Sequence[Optional[str]]] = None,
) -> tuple[list[ScoredRollout], GroupStats]:
    """Score already-measured ``(rtc, len, correct)`` triples of one group."""
    stats = correct_group_stats(measurements)
    ids = rollout_ids if rollout_ids is not None else [str(i) for i in range(len(measurements))]
    scored = []
    for k, (rtc, length, ok) in enumerate(measurements):
        bucket = classify_complexity(rtc, cfg)
        a1, a2 = allocate_coefficients(bucket, cfg)
        f_rtc = reflection_penalty(rtc, stats, cfg)
        f_len = length_penalty(length, stats, cfg)
        scored.append(ScoredRollout(
            rollout_id=ids[k], rtc=rtc, len=length, bucket=bucket, alpha1=a1, alpha2=a2,
            correct=bool(ok), reflection_penalty=f_rtc, length_penalty=f_len,
            reward=composite_reward(ok, f_rtc, f_len, a1, a2), prompt_id=prompt_id,
            answer=answers[k] if answers is not None else None,
        ))
    return scored, stats


def measure(r: Rollout, lex: TriggerLexicon = DEFAULT_LEXICON) -> tuple[int, int, bool, Optional[str]]:
    """Return ``(rtc, len, correct, extracted_answer)`` for one rollout."""
    answer = extract_answer(split_thinking(r))
    correct = answer is not None and answer == normalize_answer(r.ground_truth)
    return count_reflection_tokens(r.text, lex), response_length(r), correct, answer


def score_group(rollouts: Sequence[Rollout], lex: TriggerLexicon = DEFAULT_LEXICON,
                cfg: PenaltyConfig = PenaltyConfig()) -> tuple[list[ScoredRollout], GroupStats]:
    if not rollouts:
        raise InvalidGroupError("group must contain at least one rollout")
    prompt_ids = {r.prompt_id for r in rollouts}
    if len(prompt_ids) != 1:
        raise InvalidGroupError(f"group mixes prompt ids: {sorted(prompt_ids)}")
    measured = [measure(r, lex) for r in rollouts]
    return score_measurements(
        [(rtc, n, ok) for rtc, n, ok, _ in measured],
        cfg,
        rollout_ids=[r.rollout_id for r in rollouts],
        prompt_id=rollouts[0].prompt_id,
        answers=[a for *_, a in measured],
    )
