"""Per-task metric reports built from the individual metric functions."""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from ..errors import LengthMismatch
from ..molgraph import canonical_form
from ..motif import ecfp
from ..protseq import validate_protein
from .molecule import tanimoto, try_parse_valid
from .nlg import EmptyCorpus, NLG_METRICS, char_tokenize, corpus_bleu, nlg_scores
from .report import MetricReport, ordered_map, summarize
from .sequence import blosum45, blosum_substitution, identity, levenshtein, sw_alignment

MORGAN_RADIUS = 2
MORGAN_BITS = 2048


def _ids(n: int, ids: Optional[Sequence[Tuple[str, str]]]) -> List[Tuple[str, str]]:
    if ids is None:
        return [(str(i), str(i)) for i in range(n)]
    if len(ids) != n:
        raise LengthMismatch(f"{len(ids)} ids for {n} pairs")
    return list(ids)


def _check(refs: Sequence, hyps: Sequence) -> None:
    if len(refs) != len(hyps):
        raise LengthMismatch(f"{len(refs)} references vs {len(hyps)} hypotheses")
    if not refs:
        raise EmptyCorpus("no reference/hypothesis pairs")


def nlg_metrics(references: Sequence[str], hypotheses: Sequence[str], task: str = "caption",
                ids: Optional[Sequence[Tuple[str, str]]] = None) -> MetricReport:
    """BLEU-2/4 (corpus), ROUGE-1/2/L and METEOR-exact (pair means), scaled to 0-100."""
    agg, per_pair = nlg_scores(references, hypotheses)
    report = summarize(task, per_pair, _ids(len(per_pair), ids),
                       extra={k: agg[k] for k in NLG_METRICS}, notes={"METEOR": "METEOR-exact"})
    return report


def _molgen_pair(args: Tuple[str, str, str]) -> Dict[str, float]:
    ref, hyp, fmt = args
    out: Dict[str, float] = {"Levenshtein": float(levenshtein(ref, hyp))}
    g_ref = try_parse_valid(ref, fmt)
    g_hyp = try_parse_valid(hyp, fmt)
    out["Validity"] = 100.0 if g_hyp is not None else 0.0
    if g_ref is not None and g_hyp is not None:
        out["EXACT"] = 100.0 if canonical_form(g_ref) == canonical_form(g_hyp) else 0.0
        out["Morgan FTS"] = tanimoto(ecfp(g_ref, MORGAN_RADIUS, MORGAN_BITS), ecfp(g_hyp, MORGAN_RADIUS, MORGAN_BITS))
    else:
        out["EXACT"] = 0.0
        out["Morgan FTS"] = 0.0
    return out


def molgen_report(references: Sequence[str], hypotheses: Sequence[str], fmt: str = "smiles",
                  ids: Optional[Sequence[Tuple[str, str]]] = None, workers: int = 1) -> MetricReport:
    """Molecule generation: character BLEU, EXACT, Levenshtein, Morgan FTS, Validity.

    Morgan FTS is the Tanimoto similarity of element-based circular
    fingerprints (radius 2, 2048 bits); invalid molecules score 0.
    """
    _check(references, hypotheses)
    per_pair = ordered_map(_molgen_pair, [(r, h, fmt) for r, h in zip(references, hypotheses)], workers)
    bleu = 100.0 * corpus_bleu([char_tokenize(r) for r in references],
                               [char_tokenize(h) for h in hypotheses], 4)
    return summarize("molgen", per_pair, _ids(len(per_pair), ids), extra={"BLEU": bleu},
                     notes={"BLEU": "character-level corpus BLEU-4", "Morgan FTS": "radius 2, 2048 bits"})


def _protgen_pair(args: Tuple[str, str]) -> Dict[str, float]:
    ref, hyp = args
    if not (validate_protein(ref) and validate_protein(hyp)):
        return {"Identity": 0.0, "Alignment": 0.0, "BLOSUM Substitution": 0.0,
                "Validity": 100.0 if validate_protein(hyp) else 0.0}
    return {
        "Identity": identity(ref, hyp),
        "Alignment": sw_alignment(ref, hyp),
        "BLOSUM Substitution": blosum_substitution(ref, hyp, blosum45()),
        "Validity": 100.0,
    }


def protgen_report(references: Sequence[str], hypotheses: Sequence[str],
                   ids: Optional[Sequence[Tuple[str, str]]] = None, workers: int = 1) -> MetricReport:
    """Protein generation: Identity, Alignment, BLOSUM Substitution, Validity."""
    _check(references, hypotheses)
    per_pair = ordered_map(_protgen_pair, list(zip(map(str, references), map(str, hypotheses))), workers)
    return summarize("protgen", per_pair, _ids(len(per_pair), ids),
                     notes={"Alignment": "Smith-Waterman match +1, mismatch -1, gap -1",
                            "BLOSUM Substitution": "BLOSUM45"})
