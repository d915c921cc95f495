"""Adaptive reflection-and-length penalty rewards for reasoning-trace RL."""

from .advantage import (
    AdvantageBatch,
    broadcast_token_advantages,
    density_ratio,
    ppo_clipped_term,
    rloo_advantages,
)
from .complexity import (
    ComplexityBucket,
    ConfigError,
    PenaltyConfig,
    allocate_coefficients,
    classify_complexity,
)
from .metrics import EvalReport, compute_eval_metrics
from .reward_engine import (
    GroupStats,
    ScoredRollout,
    composite_reward,
    correct_group_stats,
    length_penalty,
    reflection_penalty,
    score_group,
)
from .trace_model import (
    DEFAULT_LEXICON,
    Rollout,
    SegmentedRollout,
    TriggerLexicon,
    count_reflection_tokens,
    extract_answer,
    parse_trace_file,
    response_length,
    split_thinking,
)

__version__ = "0.1.0"
