"""pass@1 / mean-length evaluation and deltas against a baseline run."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence


class MetricError(ValueError):
    pass


@dataclass(frozen=True)
class DatasetMetrics:
    pass1_accuracy: float
    mean_length: float
    n_cases: int = 0
    k: int = 0


@dataclass
class EvalReport:
    per_dataset: dict[str, DatasetMetrics] = field(default_factory=dict)
    delta_acc: Optional[float] = None
    delta_length_pct: Optional[float] = None

    def to_json(self) -> str:
        return json.dumps({
            "per_dataset": {k: vars(v) for k, v in sorted(self.per_dataset.items())},
            "delta_acc": self.delta_acc,
            "delta_length_pct": self.delta_length_pct,
        }, indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        raw = json.loads(text)
        per = {k: DatasetMetrics(**v) for k, v in raw["per_dataset"].items()}
        return cls(per, raw.get("delta_acc"), raw.get("delta_length_pct"))


Case = Sequence[tuple[bool, int]]


def compute_eval_metrics(runs: Mapping[str, Sequence[Case]],
                         baseline: Optional[EvalReport] = None) -> EvalReport:
    """``runs`` maps dataset -> cases, each case a list of ``(correct, length)``
    samples. Every case of a dataset must carry the same number of samples."""
    per = {}
    for name, cases in runs.items():
        if not cases:
            raise MetricError(f"dataset {name!r} has no cases")
        ks = {len(c) for c in cases}
        if len(ks) != 1 or 0 in ks:
            raise MetricError(f"dataset {name!r}: cases have unequal or zero sample counts {sorted(ks)}")
        k = ks.pop()
        pass1 = math.fsum(sum(bool(ok) for ok, _ in c) / k for c in cases) / len(cases)
        mean_len = math.fsum(n for c in cases for _, n in c) / (k * len(cases))
        per[name] = DatasetMetrics(pass1, mean_len, len(cases), k)

    report = EvalReport(per)
    if baseline is not None:
        missing = sorted(set(per) - set(baseline.per_dataset))
        if missing:
            raise MetricError(f"datasets missing from baseline: {missing}")
        d_acc, d_len = [], []
        for name, cur in per.items():
            base = baseline.per_dataset[name]
            d_acc.append((cur.pass1_accuracy - base.pass1_accuracy) * 100.0)
            if base.mean_length <= 0:
                raise MetricError(f"baseline mean length for {name!r} is not positive")
            d_len.append((cur.mean_length - base.mean_length) / base.mean_length * 100.0)
        report.delta_acc = math.fsum(d_acc) / len(d_acc)
        report.delta_length_pct = math.fsum(d_len) / len(d_len)
    return report
