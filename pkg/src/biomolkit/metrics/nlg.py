"""Corpus BLEU, ROUGE-1/2/L and exact-match METEOR for generated text."""

from __future__ import annotations

import math
import re
from collections import Counter
from typing import Callable, Dict, List, Sequence, Tuple

from ..errors import LengthMismatch

BLEU_EPSILON = 1e-9
METEOR_ALPHA = 0.9  # Fmean = PR / (alpha P + (1 - alpha) R) = 10PR / (R + 9P)
METEOR_GAMMA = 0.5
METEOR_BETA = 3

_TOKEN_RE = re.compile(r"\w+|[^\w\s]")


class EmptyCorpus(ValueError):
    pass


def tokenize(text: str) -> List[str]:
    """Lowercase; words and individual punctuation marks become tokens."""
    return _TOKEN_RE.findall(text.lower())


def char_tokenize(text: str) -> List[str]:
    return list(text)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def corpus_bleu(refs: Sequence[Sequence[str]], hyps: Sequence[Sequence[str]], max_n: int = 4) -> float:
    """Corpus BLEU in [0, 1] with uniform weights and brevity penalty.

    Zero clipped counts at orders above one are replaced by a tiny epsilon
    so short corpora still get a defined score; with no unigram matches at
    all the score is 0.
    """
    matches = [0] * max_n
    totals = [0] * max_n
    ref_len = hyp_len = 0
    for r, h in zip(refs, hyps):
        ref_len += len(r)
        hyp_len += len(h)
        for n in range(1, max_n + 1):
            hc, rc = _ngrams(h, n), _ngrams(r, n)
            matches[n - 1] += sum(min(c, rc[g]) for g, c in hc.items())
            totals[n - 1] += max(0, len(h) - n + 1)
    if hyp_len == 0 or matches[0] == 0:
        return 0.0
    log_p = 0.0
    for n in range(max_n):
        num = matches[n] if matches[n] else BLEU_EPSILON
        log_p += math.log(num / max(1, totals[n])) / max_n
    bp = 1.0 if hyp_len > ref_len else math.exp(1.0 - ref_len / hyp_len)
    return bp * math.exp(log_p)


def _f1(overlap: int, n_hyp: int, n_ref: int) -> float:
    if overlap == 0 or n_hyp == 0 or n_ref == 0:
        return 0.0
    p, r = overlap / n_hyp, overlap / n_ref
    return 2 * p * r / (p + r)


def rouge_n(ref: Sequence[str], hyp: Sequence[str], n: int) -> float:
    rc, hc = _ngrams(ref, n), _ngrams(hyp, n)
    overlap = sum(min(c, rc[g]) for g, c in hc.items())
    return _f1(overlap, sum(hc.values()), sum(rc.values()))


def lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b, start=1):
            cur.append(prev[j - 1] + 1 if x == y else max(prev[j], cur[j - 1]))
        prev = cur
    return prev[-1]


def rouge_l(ref: Sequence[str], hyp: Sequence[str]) -> float:
    return _f1(lcs_length(ref, hyp), len(hyp), len(ref))


def meteor_exact(ref: Sequence[str], hyp: Sequence[str]) -> float:
    """Unigram METEOR with exact matching only (no stems or synonyms).

    Hypothesis tokens are aligned left to right to the earliest unused
    identical reference token.
    """
    used = [False] * len(ref)
    align: List[Tuple[int, int]] = []
    for i, tok in enumerate(hyp):
        for j, r in enumerate(ref):
            if not used[j] and r == tok:
                used[j] = True
                align.append((i, j))
                break
    m = len(align)
    if m == 0:
        return 0.0
    p, r = m / len(hyp), m / len(ref)
    fmean = p * r / (METEOR_ALPHA * p + (1 - METEOR_ALPHA) * r)
    chunks = 1
    for (i0, j0), (i1, j1) in zip(align, align[1:]):
        if not (i1 == i0 + 1 and j1 == j0 + 1):
            chunks += 1
    penalty = METEOR_GAMMA * (chunks / m) ** METEOR_BETA
    return fmean * (1 - penalty)


NLG_METRICS = ("BLEU-2", "BLEU-4", "ROUGE-1", "ROUGE-2", "ROUGE-L", "METEOR")


def nlg_scores(references: Sequence[str], hypotheses: Sequence[str],
               tokenizer: Callable[[str], List[str]] = tokenize
               ) -> Tuple[Dict[str, float], List[Dict[str, float]]]:
    """Corpus aggregates and per-pair values, all scaled to [0, 100].

    BLEU is corpus-level; ROUGE and METEOR are averaged over pairs.
    """
    if len(references) != len(hypotheses):
        raise LengthMismatch(f"{len(references)} references vs {len(hypotheses)} hypotheses")
    if not references:
        raise EmptyCorpus("no reference/hypothesis pairs")
    refs = [tokenizer(r) for r in references]
    hyps = [tokenizer(h) for h in hypotheses]
    per_pair = []
    for r, h in zip(refs, hyps):
        per_pair.append({
            "ROUGE-1": 100.0 * rouge_n(r, h, 1),
            "ROUGE-2": 100.0 * rouge_n(r, h, 2),
            "ROUGE-L": 100.0 * rouge_l(r, h),
            "METEOR": 100.0 * meteor_exact(r, h),
        })
    agg = {
        "BLEU-2": 100.0 * corpus_bleu(refs, hyps, 2),
        "BLEU-4": 100.0 * corpus_bleu(refs, hyps, 4),
    }
    for k in ("ROUGE-1", "ROUGE-2", "ROUGE-L", "METEOR"):
        agg[k] = sum(p[k] for p in per_pair) / len(per_pair)
    return agg, per_pair
