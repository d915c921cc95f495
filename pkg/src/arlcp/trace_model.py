"""Rollout corpora: parsing, thinking/solution segmentation, answer extraction,
reflection-trigger counting and response length."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Optional

THINK_END = "</think>"

DEFAULT_TRIGGERS = (
    "wait",
    "alternatively",
    "hold on",
    "another thought",
    "verify",
    "think again",
    "but",
    "however",
    "alternative",
    "check",
    "double-check",
    "oh",
    "hmm",
)


class TraceParseError(ValueError):
    """A corpus line could not be turned into a Rollout."""

    def __init__(self, line_no: int, message: str, path: Optional[str] = None):
        self.line_no = line_no
        self.path = path
        where = f"{path}:{line_no}" if path else f"line {line_no}"
        super().__init__(f"{where}: {message}")


class DuplicateRecordError(TraceParseError):
    pass


class InvalidRecordError(ValueError):
    pass


@dataclass(frozen=True)
class TriggerLexicon:
    triggers: tuple[str, ...] = DEFAULT_TRIGGERS
    case_insensitive: bool = True
    word_boundary: bool = True
    longest_match_first: bool = True

    def __post_init__(self):
        phrases = tuple(" ".join(t.split()).lower() for t in self.triggers)
        if not phrases or any(not p for p in phrases):
            raise ValueError("lexicon must contain at least one non-empty phrase")
        if len(set(phrases)) != len(phrases):
            raise ValueError("lexicon contains duplicate phrases")
        for p in phrases:
            if len(p.split()) > 3:
                raise ValueError(f"trigger phrase longer than 3 words: {p!r}")
        object.__setattr__(self, "triggers", phrases)

    @property
    def pattern(self) -> re.Pattern:
        return _compile(self.triggers, self.case_insensitive, self.word_boundary,
                        self.longest_match_first)


DEFAULT_LEXICON = TriggerLexicon()


@lru_cache(maxsize=32)
def _compile(triggers, case_insensitive, word_boundary, longest_first) -> re.Pattern:
    order = sorted(triggers, key=len, reverse=True) if longest_first else list(triggers)
    # words of a multi-word phrase may be separated by any whitespace run
    alts = [r"\s+".join(re.escape(w) for w in t.split()) for t in order]
    body = "(?:" + "|".join(alts) + ")"
    if word_boundary:
        body = r"(?<![^\W_])" + body + r"(?![^\W_])"
    return re.compile(body, re.IGNORECASE if case_insensitive else 0)


def load_lexicon(path) -> TriggerLexicon:
    """Read one trigger phrase per line; blank lines and ``#`` comments are skipped."""
    phrases = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            phrases.append(line)
    return TriggerLexicon(tuple(phrases))


@dataclass(frozen=True)
class Rollout:
    prompt_id: str
    rollout_id: str
    text: str
    ground_truth: str
    declared_token_count: Optional[int] = None
    dataset: Optional[str] = None
    line_no: Optional[int] = field(default=None, compare=False)


@dataclass(frozen=True)
class SegmentedRollout:
    thinking: str
    solution: str
    had_terminator: bool


# -- corpus I/O ---------------------------------------------------------------

def _require_str(rec: dict, key: str, line_no: int, path) -> str:
    if key not in rec:
        raise TraceParseError(line_no, f"missing required key {key!r}", path)
    val = rec[key]
    if not isinstance(val, str):
        raise TraceParseError(line_no, f"key {key!r} must be a string", path)
    return val


def parse_record(line: str, line_no: int = 1, path=None) -> Rollout:
    try:
        rec = json.loads(line)
    except json.JSONDecodeError as exc:
        raise TraceParseError(line_no, f"invalid JSON ({exc.msg})", path) from None
    if not isinstance(rec, dict):
        raise TraceParseError(line_no, "record is not a JSON object", path)
    prompt_id = _require_str(rec, "prompt_id", line_no, path)
    rollout_id = _require_str(rec, "rollout_id", line_no, path)
    text = _require_str(rec, "text", line_no, path)
    ground_truth = _require_str(rec, "ground_truth", line_no, path)
    if not text:
        raise TraceParseError(line_no, "text must be non-empty", path)
    count = rec.get("token_count")
    if count is not None:
        if isinstance(count, bool) or not isinstance(count, int) or count < 1:
            raise TraceParseError(line_no, "token_count must be an integer >= 1", path)
    dataset = rec.get("dataset")
    if dataset is not None and not isinstance(dataset, str):
        raise TraceParseError(line_no, "dataset must be a string", path)
    return Rollout(prompt_id, rollout_id, text, ground_truth, count, dataset, line_no)


def parse_lines(lines: Iterable[str], path=None) -> list[Rollout]:
    out: list[Rollout] = []
    seen: dict[tuple[str, str], int] = {}
    for line_no, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        r = parse_record(line, line_no, path)
        key = (r.prompt_id, r.rollout_id)
        if key in seen:
            raise DuplicateRecordError(
                line_no, f"duplicate record {key} (first seen on line {seen[key]})", path)
        seen[key] = line_no
        out.append(r)
    return out


def parse_trace_file(path) -> list[Rollout]:
    with open(path, encoding="utf-8") as fh:
        return parse_lines(fh, str(path))


def rollout_to_record(r: Rollout) -> dict:
    rec = {"prompt_id": r.prompt_id, "rollout_id": r.rollout_id, "text": r.text,
           "ground_truth": r.ground_truth}
    if r.declared_token_count is not None:
        rec["token_count"] = r.declared_token_count
    if r.dataset is not None:
        rec["dataset"] = r.dataset
    return rec


def dumps_rollouts(rollouts: Iterable[Rollout]) -> str:
    return "".join(json.dumps(rollout_to_record(r), ensure_ascii=False) + "\n"
                   for r in rollouts)


def write_trace_file(rollouts: Iterable[Rollout], path) -> None:
    Path(path).write_text(dumps_rollouts(rollouts), encoding="utf-8")


# -- per-rollout measurements -----------------------------------------------

def split_thinking(r: Rollout | str) -> SegmentedRollout:
    text = r if isinstance(r, str) else r.text
    head, sep, tail = text.partition(THINK_END)
    if not sep:
        return SegmentedRollout(text, "", False)
    return SegmentedRollout(head, tail, True)


_BOXED = re.compile(r"\\boxed\s*\{")
_NUMBER = re.compile(r"(?<![\w.])[-+]?\d+(?:\.\d+)?(?![\w])")


def _boxed_contents(s: str) -> list[str]:
    found = []
    for m in _BOXED.finditer(s):
        depth, i = 1, m.end()
        while i < len(s) and depth:
            if s[i] == "{":
                depth += 1
            elif s[i] == "}":
                depth -= 1
            i += 1
        if depth == 0:
            found.append(s[m.end():i - 1])
    return found


def normalize_answer(s: str) -> str:
    s = s.strip()
    while len(s) >= 2 and s.startswith("$") and s.endswith("$"):
        s = s[1:-1].strip()
    return " ".join(s.split())


def extract_answer(s: SegmentedRollout) -> Optional[str]:
    """Last ``\\boxed{...}`` in the solution (thinking if the solution is empty),
    falling back to the last standalone number."""
    source = s.solution if s.solution.strip() else s.thinking
    boxed = _boxed_contents(source)
    if boxed:
        return normalize_answer(boxed[-1])
    nums = _NUMBER.findall(source)
    if nums:
        return normalize_answer(nums[-1])
    return None


def count_reflection_tokens(text: str, lex: TriggerLexicon = DEFAULT_LEXICON) -> int:
    return sum(1 for _ in lex.pattern.finditer(text))


def response_length(r: Rollout) -> int:
    if r.declared_token_count is not None:
        if r.declared_token_count < 1:
            raise InvalidRecordError(
                f"rollout {r.rollout_id!r}: declared token count must be >= 1")
        return r.declared_token_count
    n = len(r.text.split())
    if n == 0:
        raise InvalidRecordError(f"rollout {r.rollout_id!r}: text has no tokens")
    return n
