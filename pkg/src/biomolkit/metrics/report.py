"""Metric reports: per-pair records plus corpus aggregates, JSON/CSV export."""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


@dataclass(frozen=True)
class PairRecord:
    ref_id: str
    hyp_id: str
    metric: str
    value: float


@dataclass
class MetricReport:
    task: str
    pairs: List[PairRecord] = field(default_factory=list)
    aggregates: Dict[str, float] = field(default_factory=dict)
    std: Dict[str, float] = field(default_factory=dict)
    notes: Dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        for rec in self.pairs:
            if not math.isfinite(rec.value):
                raise ValueError(f"non-finite value for {rec.metric} ({rec.ref_id}/{rec.hyp_id})")
        for k, v in self.aggregates.items():
            if not math.isfinite(v):
                raise ValueError(f"non-finite aggregate {k}")

    def __getitem__(self, metric: str) -> float:
        return self.aggregates[metric]

    def values(self, metric: str) -> List[float]:
        return [p.value for p in self.pairs if p.metric == metric]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "task": self.task,
            "aggregates": dict(self.aggregates),
            "std": dict(self.std),
            "notes": dict(self.notes),
            "pairs": [
                {"ref_id": p.ref_id, "hyp_id": p.hyp_id, "metric": p.metric, "value": p.value}
                for p in self.pairs
            ],
        }

    def to_json(self, indent: Optional[int] = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=False)

    def to_csv(self) -> str:
        """Aggregate rows first (ids ``*``), then per-pair rows."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["task", "ref_id", "hyp_id", "metric", "value", "std"])
        for k, v in self.aggregates.items():
            s = self.std.get(k)
            w.writerow([self.task, "*", "*", k, repr(v), "" if s is None else repr(s)])
        for p in self.pairs:
            w.writerow([self.task, p.ref_id, p.hyp_id, p.metric, repr(p.value), ""])
        return buf.getvalue()


def summarize(task: str, per_pair: Sequence[Dict[str, float]], ids: Sequence[tuple],
              extra: Optional[Dict[str, float]] = None, notes: Optional[Dict[str, str]] = None) -> MetricReport:
    """Build a report whose aggregates are means (and population std) of the per-pair values."""
    pairs: List[PairRecord] = []
    by_metric: Dict[str, List[float]] = {}
    for (rid, hid), values in zip(ids, per_pair):
        for k, v in values.items():
            pairs.append(PairRecord(str(rid), str(hid), k, float(v)))
            by_metric.setdefault(k, []).append(float(v))
    agg: Dict[str, float] = dict(extra or {})
    std: Dict[str, float] = {}
    for k, vs in by_metric.items():
        if k not in agg:
            agg[k] = float(np.mean(vs))
        std[k] = float(np.std(vs))
    return MetricReport(task, pairs, agg, std, dict(notes or {}))


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Map in input order; ``workers > 1`` uses processes, results merged in order."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (workers * 4))
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items, chunksize=chunk))
