"""Aggregation of externally computed scores (docking, QED, SA, ESP)."""

from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Sequence, Tuple, Union

import numpy as np

from .report import MetricReport, PairRecord

VINA_MAX = -8.18
QED_MIN = 0.25
SA_MIN = 0.59
JOINT_ALIGNMENT_MIN = 30.0
# The joint-design criterion lists "Vina Score > -8.18"; applied as written.
JOINT_VINA_MIN = -8.18

DRUG_FIELDS = ("target_id", "vina", "qed", "sa", "ref_vina")
JOINT_FIELDS = ("alignment", "vina", "qed", "sa")
ENZYME_FIELDS = ("substrate_id", "identity", "alignment", "vina", "esp")

TOP_K = (1, 5, 10)
JOINT_TOP_N = (1, 5, 10, 20)

Row = Union[Mapping[str, Any], Sequence[Any]]


class MissingField(ValueError):
    def __init__(self, field: str, row: int):
        self.field, self.row = field, row
        super().__init__(f"row {row}: missing field {field!r}")


def _normalize(rows: Iterable[Row], fields: Sequence[str], optional: Sequence[str] = ()) -> List[Dict[str, Any]]:
    out = []
    for i, row in enumerate(rows):
        if isinstance(row, Mapping):
            rec = dict(row)
        else:
            row = list(row)
            names = list(fields) + list(optional)
            rec = {names[k]: v for k, v in enumerate(row[:len(names)])}
        for f in fields:
            if rec.get(f) is None:
                raise MissingField(f, i)
        for f in list(fields) + list(optional):
            v = rec.get(f)
            if f.endswith("_id") or f == "sequence" or v is None:
                continue
            v = float(v)
            if not math.isfinite(v):
                raise ValueError(f"row {i}: non-finite {f}")
            rec[f] = v
        out.append(rec)
    return out


def read_score_table(path: Union[str, Path]) -> List[Dict[str, Any]]:
    """JSON Lines score table, one object per row."""
    rows = []
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if line.strip():
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{lineno}: {e.msg}") from None
    return rows


def drug_success(vina: float, qed: float, sa: float) -> bool:
    return vina < VINA_MAX and qed > QED_MIN and sa > SA_MIN


def joint_success(alignment: float, vina: float, qed: float, sa: float) -> bool:
    return alignment > JOINT_ALIGNMENT_MIN and vina > JOINT_VINA_MIN and qed > QED_MIN and sa > SA_MIN


def _group(rows: List[Dict[str, Any]], key: str) -> Dict[str, List[Dict[str, Any]]]:
    groups: Dict[str, List[Dict[str, Any]]] = {}
    for r in rows:
        groups.setdefault(str(r.get(key, "")), []).append(r)
    return groups


def _mean_std(xs: Sequence[float]) -> Tuple[float, float]:
    if not xs:
        return 0.0, 0.0
    return float(np.mean(xs)), float(np.std(xs))


def drug_assessment(rows: Iterable[Row], top_k: Sequence[int] = TOP_K) -> MetricReport:
    """Success Rate, High Affinity and per-target top-k Vina means.

    Success needs vina < -8.18, qed > 0.25 and sa > 0.59 (all strict). High
    Affinity counts rows whose vina beats the reference molecule's. Top-k
    Vina averages the k lowest scores of each target, then averages over
    targets; "all" uses every row.
    """
    recs = _normalize(rows, DRUG_FIELDS)
    pairs: List[PairRecord] = []
    agg: Dict[str, float] = {}
    std: Dict[str, float] = {}
    if not recs:
        return MetricReport("drug", pairs, {"Success Rate": 0.0, "High Affinity": 0.0})
    succ = [drug_success(r["vina"], r["qed"], r["sa"]) for r in recs]
    high = [r["vina"] < r["ref_vina"] for r in recs]
    for i, r in enumerate(recs):
        tid = str(r["target_id"])
        pairs.append(PairRecord(tid, str(i), "Success", float(succ[i])))
        pairs.append(PairRecord(tid, str(i), "High Affinity", float(high[i])))
    agg["Success Rate"] = 100.0 * sum(succ) / len(recs)
    agg["High Affinity"] = 100.0 * sum(high) / len(recs)
    for name in ("vina", "qed", "sa"):
        label = {"vina": "Vina Score", "qed": "QED", "sa": "SA"}[name]
        agg[label], std[label] = _mean_std([r[name] for r in recs])
    groups = _group(recs, "target_id")
    for k in list(top_k) + ["all"]:
        per_target = []
        for rs in groups.values():
            v = sorted(r["vina"] for r in rs)
            per_target.append(float(np.mean(v if k == "all" else v[:k])))
        label = f"Top-{k} Vina" if k != "all" else "All Vina"
        agg[label], std[label] = _mean_std(per_target)
    return MetricReport("drug", pairs, agg, std, {"thresholds": "vina < -8.18, qed > 0.25, sa > 0.59"})


def joint_assessment(rows: Iterable[Row], top_n: Sequence[int] = JOINT_TOP_N) -> MetricReport:
    """Success Rate over alignment, vina, qed and sa plus top-n of -alignment*vina.

    Rows may carry ``group_id`` (the description they were generated for);
    top-n means are taken per group and then averaged.
    """
    recs = _normalize(rows, JOINT_FIELDS, ("group_id",))
    pairs: List[PairRecord] = []
    agg: Dict[str, float] = {}
    std: Dict[str, float] = {}
    if not recs:
        return MetricReport("joint", pairs, {"Success Rate": 0.0})
    succ = [joint_success(r["alignment"], r["vina"], r["qed"], r["sa"]) for r in recs]
    for i, r in enumerate(recs):
        gid = str(r.get("group_id", ""))
        pairs.append(PairRecord(gid, str(i), "Success", float(succ[i])))
        pairs.append(PairRecord(gid, str(i), "-Alignment*Vina", joint_quality(r["alignment"], r["vina"])))
    agg["Success Rate"] = 100.0 * sum(succ) / len(recs)
    for name, label in (("alignment", "Alignment"), ("vina", "Vina Score"), ("qed", "QED"), ("sa", "SA")):
        agg[label], std[label] = _mean_std([r[name] for r in recs])
    groups = _group(recs, "group_id")
    for n in top_n:
        per_group = [float(np.mean(top_n_quality(rs, n))) for rs in groups.values()]
        agg[f"Top-{n} -Alignment*Vina"], std[f"Top-{n} -Alignment*Vina"] = _mean_std(per_group)
    notes = {"thresholds": "alignment > 30, vina > -8.18, qed > 0.25, sa > 0.59 (vina bound applied as written)"}
    return MetricReport("joint", pairs, agg, std, notes)


def joint_quality(alignment: float, vina: float) -> float:
    return -alignment * vina


def top_n_quality(rows: Sequence[Mapping[str, float]], n: int) -> List[float]:
    """The n largest -alignment*vina values, best first."""
    q = sorted((joint_quality(r["alignment"], r["vina"]) for r in rows), reverse=True)
    return q[:n]


def enzyme_assessment(rows: Iterable[Row]) -> MetricReport:
    """Mean over substrates of the best (top-1) design per substrate.

    Best means highest identity, alignment and ESP score, and lowest vina,
    each taken independently. Rows with a ``sequence`` field also feed the
    protein Validity percentage.
    """
    from .sequence import protein_validity

    recs = _normalize(rows, ENZYME_FIELDS, ("sequence",))
    pairs: List[PairRecord] = []
    agg: Dict[str, float] = {}
    std: Dict[str, float] = {}
    if not recs:
        return MetricReport("enzyme", pairs, {})
    groups = _group(recs, "substrate_id")
    best: Dict[str, List[float]] = {"Identity": [], "Alignment": [], "Vina Score": [], "ESP Score": []}
    for sid, rs in groups.items():
        vals = {
            "Identity": max(r["identity"] for r in rs),
            "Alignment": max(r["alignment"] for r in rs),
            "Vina Score": min(r["vina"] for r in rs),
            "ESP Score": max(r["esp"] for r in rs),
        }
        for k, v in vals.items():
            best[k].append(v)
            pairs.append(PairRecord(sid, "top1", k, v))
    for k, vs in best.items():
        agg[k], std[k] = _mean_std(vs)
    seqs = [r["sequence"] for r in recs if isinstance(r.get("sequence"), str)]
    if seqs:
        agg["Validity"] = protein_validity(seqs)
    return MetricReport("enzyme", pairs, agg, std, {"aggregation": "top-1 per substrate, averaged"})
