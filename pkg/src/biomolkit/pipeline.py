"""Instruction records, the task registry and the two-stage sampling scheduler.

Sampling draws ``n`` independent categorical samples (with replacement)
from the plan's normalised weights. Uniforms come from numpy's Philox 4x64
counter-based generator keyed by the seed; each uniform picks the first
task whose cumulative weight exceeds it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .molgraph import MolGraphError, decode_selfies
from .protseq import validate_protein

TEXT, SELFIES, FASTA = "text", "selfies", "fasta"
PAYLOAD_KINDS = (TEXT, SELFIES, FASTA)


class PipelineError(ValueError):
    pass


class ParseError(PipelineError):
    def __init__(self, msg: str, line: int):
        self.line = line
        super().__init__(f"line {line}: {msg}")


class ValidationError(PipelineError):
    def __init__(self, msg: str, index: int):
        self.index = index
        super().__init__(f"record {index}: {msg}")


class AllZero(PipelineError):
    pass


@dataclass(frozen=True)
class TaskSpec:
    task_id: str
    input_kind: str
    output_kind: str
    stage1: Optional[Fraction]
    stage2: Optional[Fraction]


def _r(x: Optional[str]) -> Optional[Fraction]:
    return None if x is None else Fraction(x)


# Sampling ratios per instruction-tuning stage; None = not sampled in that stage.
TASKS: Tuple[TaskSpec, ...] = (
    TaskSpec("PubChem-caption", SELFIES, TEXT, _r("0.1"), None),
    TaskSpec("PubChem-generation", TEXT, SELFIES, _r("0.1"), None),
    TaskSpec("ChEBI-caption", SELFIES, TEXT, _r("0.001"), _r("0.1")),
    TaskSpec("ChEBI-generation", TEXT, SELFIES, _r("0.001"), _r("0.1")),
    TaskSpec("TrEMBL-Name", FASTA, TEXT, _r("0.05"), None),
    TaskSpec("TrEMBL-Family", FASTA, TEXT, _r("0.05"), None),
    TaskSpec("TrEMBL-Location", FASTA, TEXT, _r("0.05"), None),
    TaskSpec("TrEMBL-Function", FASTA, TEXT, _r("0.05"), None),
    TaskSpec("TrEMBL-Description", TEXT, FASTA, _r("0.1"), None),
    TaskSpec("SwissProt-Name", FASTA, TEXT, _r("0.05"), _r("0.1")),
    TaskSpec("SwissProt-Family", FASTA, TEXT, _r("0.05"), _r("0.1")),
    TaskSpec("SwissProt-Location", FASTA, TEXT, _r("0.05"), _r("0.1")),
    TaskSpec("SwissProt-Function", FASTA, TEXT, _r("0.05"), _r("0.1")),
    TaskSpec("SwissProt-Description", TEXT, FASTA, _r("0.1"), _r("0.2")),
    TaskSpec("BindingDB", FASTA, SELFIES, _r("0.05"), _r("0.1")),
    TaskSpec("Rhea", SELFIES, FASTA, _r("0.05"), _r("0.1")),
)
TASK_INDEX: Dict[str, TaskSpec] = {t.task_id: t for t in TASKS}


def stage_table(stage: int) -> List[Tuple[str, Fraction]]:
    """Registered (task_id, ratio) pairs sampled in ``stage``."""
    if stage not in (1, 2):
        raise PipelineError(f"stage must be 1 or 2, got {stage}")
    out = []
    for t in TASKS:
        ratio = t.stage1 if stage == 1 else t.stage2
        if ratio is not None:
            out.append((t.task_id, ratio))
    return out


# Records ---------------------------------------------------------------------

@dataclass(frozen=True)
class InstructionRecord:
    task_id: str
    instruction: str
    input_kind: str
    input: str
    output_kind: str
    output: str

    def to_json(self) -> str:
        return json.dumps({
            "task_id": self.task_id, "instruction": self.instruction,
            "input_kind": self.input_kind, "input": self.input,
            "output_kind": self.output_kind, "output": self.output,
        }, ensure_ascii=False)


def _payload_problem(kind: str, payload: str) -> Optional[str]:
    if kind == TEXT:
        return None
    if kind == SELFIES:
        try:
            g = decode_selfies(payload)
        except MolGraphError as e:
            return f"invalid SELFIES: {e}"
        return None if g.atoms else "SELFIES decodes to an empty molecule"
    if kind == FASTA:
        return None if validate_protein(payload) else f"invalid protein sequence {payload[:20]!r}"
    return f"unknown payload kind {kind!r}"


def validate_record(rec: InstructionRecord, index: int = 0) -> None:
    spec = TASK_INDEX.get(rec.task_id)
    if spec is not None and (rec.input_kind, rec.output_kind) != (spec.input_kind, spec.output_kind):
        raise ValidationError(
            f"{rec.task_id} expects {spec.input_kind}->{spec.output_kind}, "
            f"got {rec.input_kind}->{rec.output_kind}", index)
    for side, kind, payload in (("input", rec.input_kind, rec.input), ("output", rec.output_kind, rec.output)):
        problem = _payload_problem(kind, payload)
        if problem:
            raise ValidationError(f"{side}: {problem}", index)


_FIELDS = ("task_id", "instruction", "input_kind", "input", "output_kind", "output")


def parse_records(text: str, task_id: Optional[str] = None) -> List[InstructionRecord]:
    """Parse and validate JSON Lines records.

    With ``task_id`` given, records may omit the field; a record naming a
    different task is a validation error.
    """
    out: List[InstructionRecord] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise ParseError(e.msg, lineno) from None
        if not isinstance(obj, dict):
            raise ParseError("record is not a JSON object", lineno)
        if task_id is not None:
            obj.setdefault("task_id", task_id)
        missing = [f for f in _FIELDS if not isinstance(obj.get(f), str)]
        if missing:
            raise ParseError(f"missing or non-string fields {missing}", lineno)
        idx = len(out)
        if task_id is not None and obj["task_id"] != task_id:
            raise ValidationError(f"task_id {obj['task_id']!r} differs from {task_id!r}", idx)
        rec = InstructionRecord(**{f: obj[f] for f in _FIELDS})
        validate_record(rec, idx)
        out.append(rec)
    return out


def load_records(path: Union[str, Path], task_id: Optional[str] = None) -> List[InstructionRecord]:
    return parse_records(Path(path).read_text(encoding="utf-8"), task_id)


def write_records(path: Union[str, Path], records: Iterable[InstructionRecord]) -> None:
    Path(path).write_text("".join(r.to_json() + "\n" for r in records), encoding="utf-8")


# Sampling ----------------------------------------------------------------------

def _exact(x: Union[Fraction, int, float, str]) -> Fraction:
    """Read a ratio as the decimal it prints as, so 0.1 means 1/10."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class SamplingPlan:
    stage: int
    entries: Tuple[Tuple[str, float], ...]
    weights: Tuple[float, ...]

    @property
    def task_ids(self) -> Tuple[str, ...]:
        return tuple(t for t, _ in self.entries)

    def weight(self, task_id: str) -> float:
        return self.weights[self.task_ids.index(task_id)]

    def to_dict(self, seed: Optional[int] = None) -> dict:
        d = {
            "stage": self.stage,
            "entries": [{"task_id": t, "ratio": r, "weight": w}
                        for (t, r), w in zip(self.entries, self.weights)],
        }
        if seed is not None:
            d["seed"] = seed
        return d

    def to_json(self, seed: Optional[int] = None) -> str:
        return json.dumps(self.to_dict(seed), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingPlan":
        return build_plan(int(d["stage"]), [(e["task_id"], e["ratio"]) for e in d["entries"]])


def build_plan(stage: int, table: Optional[Sequence[Tuple[str, Union[Fraction, float, int, str]]]] = None) -> SamplingPlan:
    """Normalise raw ratios so the weights sum to one.

    Without ``table`` the registered ratios for ``stage`` are used. In stage
    2, registered tasks that have no stage-2 ratio are rejected.
    """
    if stage not in (1, 2):
        raise PipelineError(f"stage must be 1 or 2, got {stage}")
    rows = list(stage_table(stage) if table is None else table)
    if not rows:
        raise AllZero("sampling table is empty")
    ratios = []
    seen = set()
    for task_id, raw in rows:
        if task_id in seen:
            raise PipelineError(f"duplicate task {task_id!r}")
        seen.add(task_id)
        r = _exact(raw)
        if r < 0:
            raise PipelineError(f"negative ratio for {task_id!r}")
        spec = TASK_INDEX.get(task_id)
        if stage == 2 and spec is not None and spec.stage2 is None:
            raise PipelineError(f"{task_id!r} is not sampled in stage 2")
        ratios.append(r)
    total = sum(ratios, Fraction(0))
    if total == 0:
        raise AllZero("all sampling ratios are zero")
    entries = tuple((t, float(r)) for (t, _), r in zip(rows, ratios))
    weights = tuple(float(r / total) for r in ratios)
    return SamplingPlan(stage, entries, weights)


def load_plan(path: Union[str, Path]) -> Tuple[SamplingPlan, Optional[int]]:
    d = json.loads(Path(path).read_text(encoding="utf-8"))
    return SamplingPlan.from_dict(d), d.get("seed")


def sample_indices(plan: SamplingPlan, seed: int, n: int) -> np.ndarray:
    if n < 0:
        raise PipelineError("n must be non-negative")
    rng = np.random.Generator(np.random.Philox(key=seed))
    cdf = np.cumsum(np.asarray(plan.weights, dtype=np.float64))
    cdf[-1] = 1.0
    u = rng.random(n)
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, len(cdf) - 1)


def sample_stream(plan: SamplingPlan, seed: int, n: int) -> List[str]:
    """``n`` task ids drawn independently from the plan, reproducible per seed."""
    ids = plan.task_ids
    return [ids[i] for i in sample_indices(plan, seed, n)]
