"""Evaluation metrics for text, molecule and protein generation and ingested scores."""

from .molecule import exact_match, molecule_validity, tanimoto, try_parse_valid
from .nlg import EmptyCorpus, corpus_bleu, meteor_exact, nlg_scores, rouge_l, rouge_n, tokenize
from .report import MetricReport, PairRecord, ordered_map, summarize
from .scores import (
    MissingField,
    drug_assessment,
    drug_success,
    enzyme_assessment,
    joint_assessment,
    joint_success,
    read_score_table,
)
from .sequence import (
    SubstitutionMatrix,
    blosum45,
    blosum_substitution,
    identity,
    levenshtein,
    levenshtein_matrix,
    protein_validity,
    sw_alignment,
    sw_score,
    sw_score_many,
)
from .tasks import molgen_report, nlg_metrics, protgen_report
from ..errors import LengthMismatch

__all__ = [
    "exact_match", "molecule_validity", "tanimoto", "try_parse_valid",
    "EmptyCorpus", "corpus_bleu", "meteor_exact", "nlg_scores", "rouge_l", "rouge_n", "tokenize",
    "MetricReport", "PairRecord", "ordered_map", "summarize",
    "MissingField", "drug_assessment", "drug_success", "enzyme_assessment", "joint_assessment",
    "joint_success", "read_score_table",
    "SubstitutionMatrix", "blosum45", "blosum_substitution", "identity", "levenshtein",
    "levenshtein_matrix", "protein_validity", "sw_alignment", "sw_score", "sw_score_many",
    "molgen_report", "nlg_metrics", "protgen_report", "LengthMismatch",
]
