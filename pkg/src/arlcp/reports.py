"""Tables behind the CLI: scored records, group summaries, corpus analysis,
plus the atomic multi-file writer every command uses."""

from __future__ import annotations

import json
import math
import os
import shutil
import tempfile
from collections import OrderedDict, defaultdict
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .advantage import rloo_advantages
from .complexity import ComplexityBucket, PenaltyConfig, classify_complexity
from .reward_engine import GroupStats, ScoredRollout, measure, score_group
from .trace_model import Rollout, TriggerLexicon, parse_record, rollout_to_record

DEFAULT_DATASET = "default"


def fmt(v) -> str:
    """CSV cell: reals at 9 decimals, ``None`` as an empty cell."""
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.9f}"
    return str(v)


def csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_escape(fmt(v)) for v in row))
    return "\n".join(lines) + "\n"


def _csv_escape(s: str) -> str:
    if any(c in s for c in ',"\n\r'):
        return '"' + s.replace('"', '""') + '"'
    return s


def write_outputs(out_dir, files: Mapping[str, Union[str, bytes]]) -> list[Path]:
    """Write every file into ``out_dir`` only after all of them are staged."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".staging-", dir=out))
    written = []
    try:
        for name, content in files.items():
            p = stage / name
            if isinstance(content, bytes):
                p.write_bytes(content)
            else:
                p.write_text(content, encoding="utf-8", newline="\n")
        for name in files:
            os.replace(stage / name, out / name)
            written.append(out / name)
    finally:
        shutil.rmtree(stage, ignore_errors=True)
    return written


def group_by_prompt(rollouts: Sequence[Rollout]) -> "OrderedDict[str, list[Rollout]]":
    groups: OrderedDict[str, list[Rollout]] = OrderedDict()
    for r in rollouts:
        groups.setdefault(r.prompt_id, []).append(r)
    return groups


# -- score -------------------------------------------------------------------

SCORED_REAL_FIELDS = ("alpha1", "alpha2", "f_rtc", "f_len", "reward", "advantage")


def _dump_scored(base: dict, extra: dict) -> str:
    parts = [json.dumps(k) + ": " + json.dumps(v, ensure_ascii=False) for k, v in base.items()]
    for k, v in extra.items():
        if k in SCORED_REAL_FIELDS and v is not None:
            val = f"{v:.9f}"
        else:
            val = json.dumps(v, ensure_ascii=False)
        parts.append(json.dumps(k) + ": " + val)
    return "{" + ", ".join(parts) + "}"


@dataclass
class ScoreResult:
    groups: list[tuple[str, list[Rollout], list[ScoredRollout], GroupStats, Optional[list[float]]]]

    def scored_jsonl(self, emit_advantages: bool = False) -> str:
        lines = []
        for _, rollouts, scored, _, adv in self.groups:
            for k, (r, s) in enumerate(zip(rollouts, scored)):
                extra = {
                    "answer": s.answer, "rtc": s.rtc, "len": s.len, "bucket": s.bucket.label,
                    "alpha1": s.alpha1, "alpha2": s.alpha2, "f_rtc": s.reflection_penalty,
                    "f_len": s.length_penalty, "correct": s.correct, "reward": s.reward,
                }
                if emit_advantages:
                    extra["advantage"] = adv[k] if adv is not None else None
                lines.append(_dump_scored(rollout_to_record(r), extra))
        return "".join(line + "\n" for line in lines)

    def summary_csv(self) -> str:
        header = ["prompt_id", "n_total", "n_correct", "mean_rtc_correct", "std_rtc_correct",
                  "mean_len_correct", "std_len_correct", "mean_reward"]
        rows = []
        for pid, _, scored, st, _ in self.groups:
            mean_reward = math.fsum(s.reward for s in scored) / len(scored)
            rows.append([pid, st.n_total, st.n_correct, st.mean_rtc_correct, st.std_rtc_correct,
                         st.mean_len_correct, st.std_len_correct, mean_reward])
        return csv_text(header, rows)


def score_corpus(rollouts: Sequence[Rollout], lex: TriggerLexicon,
                 cfg: PenaltyConfig) -> ScoreResult:
    out = []
    for pid, group in group_by_prompt(rollouts).items():
        scored, stats = score_group(group, lex, cfg)
        # leave-one-out needs a sibling; singleton groups get no advantage
        adv = rloo_advantages([s.reward for s in scored]) if len(scored) >= 2 else None
        out.append((pid, group, scored, stats, adv))
    return ScoreResult(out)


# -- analyze -----------------------------------------------------------------

@dataclass
class Measured:
    dataset: str
    prompt_id: str
    rtc: int
    len: int
    correct: bool


def measure_corpus(rollouts: Sequence[Rollout], lex: TriggerLexicon) -> list[Measured]:
    out = []
    for r in rollouts:
        rtc, n, ok, _ = measure(r, lex)
        out.append(Measured(r.dataset or DEFAULT_DATASET, r.prompt_id, rtc, n, ok))
    return out


def _mean(xs) -> Optional[float]:
    xs = list(xs)
    return math.fsum(xs) / len(xs) if xs else None


@dataclass
class Analysis:
    dataset_rows: list[list]
    split_rows: list[list]
    accuracy_rows: list[list]
    histogram_rows: list[list]
    bucket_rows: list[list]

    DATASET_HEADER = ("dataset", "n_rollouts", "n_prompts", "mean_rtc", "mean_len", "accuracy")
    SPLIT_HEADER = ("dataset", "n_correct", "mean_rtc_correct", "mean_len_correct",
                    "n_incorrect", "mean_rtc_incorrect", "mean_len_incorrect", "note")
    ACCURACY_HEADER = ("rtc_lo", "rtc_hi", "n", "n_correct", "accuracy")
    HISTOGRAM_HEADER = ("rtc_lo", "rtc_hi", "count", "fraction", "cumulative_fraction")
    BUCKET_HEADER = ("bucket", "rtc_min", "rtc_max", "n", "fraction", "accuracy")

    def files(self) -> dict[str, str]:
        return {
            "rtc_by_dataset.csv": csv_text(self.DATASET_HEADER, self.dataset_rows),
            "correctness_split.csv": csv_text(self.SPLIT_HEADER, self.split_rows),
            "accuracy_by_rtc.csv": csv_text(self.ACCURACY_HEADER, self.accuracy_rows),
            "rtc_histogram.csv": csv_text(self.HISTOGRAM_HEADER, self.histogram_rows),
            "complexity_buckets.csv": csv_text(self.BUCKET_HEADER, self.bucket_rows),
        }


def analyze(measured: Sequence[Measured], cfg: PenaltyConfig, bin_width: int = 20) -> Analysis:
    """Corpus-level reflection statistics.

    RTC bins are half-open ``[lo, lo + bin_width)``; ``rtc_hi`` is the exclusive edge.
    """
    if bin_width < 1:
        raise ValueError("bin_width must be positive")
    by_ds: dict[str, list[Measured]] = defaultdict(list)
    for m in measured:
        by_ds[m.dataset].append(m)
    names = sorted(by_ds)
    if len(names) > 1:
        by_ds["all"] = list(measured)
        names.append("all")

    dataset_rows, split_rows = [], []
    for name in names:
        ms = by_ds[name]
        dataset_rows.append([name, len(ms), len({m.prompt_id for m in ms}),
                             _mean(m.rtc for m in ms), _mean(m.len for m in ms),
                             _mean(float(m.correct) for m in ms)])
        good = [m for m in ms if m.correct]
        bad = [m for m in ms if not m.correct]
        note = "no_incorrect" if not bad else ("no_correct" if not good else "")
        split_rows.append([name, len(good), _mean(m.rtc for m in good), _mean(m.len for m in good),
                           len(bad), _mean(m.rtc for m in bad), _mean(m.len for m in bad), note])

    total = len(measured)
    bins: dict[int, list[Measured]] = defaultdict(list)
    for m in measured:
        bins[m.rtc // bin_width].append(m)
    accuracy_rows = []
    for b in sorted(bins):
        ms = bins[b]
        n_ok = sum(m.correct for m in ms)
        accuracy_rows.append([b * bin_width, (b + 1) * bin_width, len(ms), n_ok, n_ok / len(ms)])

    histogram_rows = []
    cum = 0
    for b in range(max(bins) + 1 if bins else 0):
        c = len(bins.get(b, ()))
        cum += c
        histogram_rows.append([b * bin_width, (b + 1) * bin_width, c, c / total, cum / total])

    bucket_rows = []
    ranges = {ComplexityBucket.SIMPLE: (0, cfg.n1), ComplexityBucket.MODERATE: (cfg.n1 + 1, cfg.n2),
              ComplexityBucket.HARD: (cfg.n2 + 1, None)}
    per_bucket: dict[ComplexityBucket, list[Measured]] = defaultdict(list)
    for m in measured:
        per_bucket[classify_complexity(m.rtc, cfg)].append(m)
    for b in ComplexityBucket:
        ms = per_bucket[b]
        lo, hi = ranges[b]
        bucket_rows.append([b.label, lo, hi, len(ms), len(ms) / total if total else None,
                            _mean(float(m.correct) for m in ms)])
    return Analysis(dataset_rows, split_rows, accuracy_rows, histogram_rows, bucket_rows)


# -- eval input ----------------------------------------------------------------

def eval_cases_from_records(records: Iterable[dict], lex: TriggerLexicon) -> dict[str, list[list[tuple[bool, int]]]]:
    """Group ``(correct, len)`` samples by dataset and case (``prompt_id``).

    Records already carrying ``correct`` and ``len`` (the ``score`` output) are used
    as-is; anything else is treated as a raw rollout and measured.
    """
    cases: dict[str, OrderedDict[str, list[tuple[bool, int]]]] = defaultdict(OrderedDict)
    for line_no, rec in records:
        if "correct" in rec and "len" in rec:
            ok, n = bool(rec["correct"]), int(rec["len"])
            pid = str(rec.get("prompt_id", f"line{line_no}"))
        else:
            r = parse_record(json.dumps(rec), line_no)
            _, n, ok, _ = measure(r, lex)
            pid = r.prompt_id
        ds = rec.get("dataset") or DEFAULT_DATASET
        cases[ds].setdefault(pid, []).append((ok, n))
    return {ds: list(c.values()) for ds, c in cases.items()}
