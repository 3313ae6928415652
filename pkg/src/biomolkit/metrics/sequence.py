"""Edit distance, local alignment and position-wise protein similarity."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple, Union

import numpy as np
from rapidfuzz.distance import Levenshtein
from rapidfuzz.process import cdist

from ..protseq import CANONICAL_RESIDUES, ProteinSequence

Seq = Union[ProteinSequence, str]

# Smith-Waterman scheme; match=+1 makes self-alignment normalise to 100.
SW_MATCH = 1
SW_MISMATCH = -1
SW_GAP = -1


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character insertions, deletions and substitutions."""
    return int(Levenshtein.distance(a, b))


def levenshtein_matrix(a: Sequence[str], b: Sequence[str], workers: int = 1) -> np.ndarray:
    """All-pairs edit distances, shape ``(len(a), len(b))``."""
    return cdist(list(a), list(b), scorer=Levenshtein.distance, dtype=np.int32, workers=workers)


def sw_score(a: Seq, b: Seq, match: int = SW_MATCH, mismatch: int = SW_MISMATCH, gap: int = SW_GAP) -> int:
    """Best local alignment score (linear gaps); 0 for the empty alignment."""
    a, b = str(a), str(b)
    if len(a) > 64 and len(b) > 64:
        return int(sw_score_many(a, [b], match, mismatch, gap)[0])
    best = 0
    prev = [0] * (len(b) + 1)
    for ca in a:
        cur = [0] * (len(b) + 1)
        for j, cb in enumerate(b, start=1):
            s = prev[j - 1] + (match if ca == cb else mismatch)
            s = max(s, prev[j] + gap, cur[j - 1] + gap, 0)
            cur[j] = s
            if s > best:
                best = s
        prev = cur
    return best


def _sw_same_length(a: str, others: Sequence[str], match: int, mismatch: int, gap: int) -> np.ndarray:
    """Vectorised SW of ``a`` against equal-length strings (one row per string)."""
    n, L = len(others), len(others[0])
    codes = np.frombuffer("".join(others).encode("latin-1"), dtype=np.uint8).reshape(n, L)
    prev = np.zeros((n, L + 1), dtype=np.int64)
    best = np.zeros(n, dtype=np.int64)
    cols = np.arange(1, L + 1)
    for ca in a.encode("latin-1"):
        diag = prev[:, :-1] + np.where(codes == ca, match, mismatch)
        cand = np.maximum(np.maximum(diag, prev[:, 1:] + gap), 0)
        # horizontal gaps: cur[j] = max(cand[j], max_k<j cand[k] + gap*(j-k)).
        # With a non-positive gap this is a running max of cand[k] - gap*k.
        shifted = cand - gap * cols
        run = np.maximum.accumulate(shifted, axis=1)
        cur_inner = np.maximum(cand, run + gap * cols)
        cur = np.zeros_like(prev)
        cur[:, 1:] = cur_inner
        best = np.maximum(best, cur_inner.max(axis=1))
        prev = cur
    return best


def sw_score_many(a: Seq, others: Sequence[Seq], match: int = SW_MATCH,
                  mismatch: int = SW_MISMATCH, gap: int = SW_GAP) -> np.ndarray:
    """SW scores of ``a`` against each string in ``others``."""
    if gap > 0:
        raise ValueError("gap score must be non-positive")
    a = str(a)
    others = [str(o) for o in others]
    out = np.zeros(len(others), dtype=np.int64)
    if not a:
        return out
    by_len: Dict[int, List[int]] = {}
    for i, o in enumerate(others):
        if o:
            by_len.setdefault(len(o), []).append(i)
    for _, idx in sorted(by_len.items()):
        out[idx] = _sw_same_length(a, [others[i] for i in idx], match, mismatch, gap)
    return out


def sw_alignment(p_ref: Seq, p_gen: Seq, match: int = SW_MATCH,
                 mismatch: int = SW_MISMATCH, gap: int = SW_GAP) -> float:
    """Local alignment score normalised by the combined length, times 100, floored at 0."""
    a, b = str(p_ref), str(p_gen)
    if not a and not b:
        return 0.0
    return max(0.0, 2.0 * sw_score(a, b, match, mismatch, gap) / (len(a) + len(b)) * 100.0)


def identity(p_ref: Seq, p_gen: Seq) -> float:
    """Percentage of equal residues at matching positions over the shared prefix length."""
    a, b = str(p_ref), str(p_gen)
    if not a and not b:
        return 0.0
    same = sum(1 for x, y in zip(a, b) if x == y)
    return 2.0 * same / (len(a) + len(b)) * 100.0


class MatrixFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SubstitutionMatrix:
    name: str
    scores: Dict[Tuple[str, str], int]

    def __post_init__(self):
        for x in CANONICAL_RESIDUES:
            for y in CANONICAL_RESIDUES:
                if (x, y) not in self.scores:
                    raise MatrixFormatError(f"{self.name}: missing score for {x}/{y}")
                if self.scores[(x, y)] != self.scores[(y, x)]:
                    raise MatrixFormatError(f"{self.name}: asymmetric at {x}/{y}")

    def __call__(self, a: str, b: str) -> int:
        return self.scores[(a, b)]

    def diagonal(self, residue: str) -> int:
        return self.scores[(residue, residue)]

    @classmethod
    def parse(cls, text: str, name: str = "matrix") -> "SubstitutionMatrix":
        """Read the NCBI text layout: ``#`` comments, a header row, one row per residue."""
        header = None
        scores: Dict[Tuple[str, str], int] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if header is None:
                header = parts
                continue
            row, vals = parts[0], parts[1:]
            if len(vals) != len(header):
                raise MatrixFormatError(f"line {lineno}: {len(vals)} scores for {len(header)} columns")
            try:
                for col, v in zip(header, vals):
                    scores[(row, col)] = int(v)
            except ValueError:
                raise MatrixFormatError(f"line {lineno}: non-integer score") from None
        if header is None:
            raise MatrixFormatError("no header row")
        return cls(name, scores)

    @classmethod
    def load(cls, path: Union[str, Path], name: str = "") -> "SubstitutionMatrix":
        p = Path(path)
        return cls.parse(p.read_text(encoding="utf-8"), name or p.name)


def blosum45_path() -> Path:
    base = os.environ.get("IBM_DATA_DIR")
    if base and (Path(base) / "BLOSUM45").exists():
        return Path(base) / "BLOSUM45"
    return Path(__file__).resolve().parent.parent / "data" / "BLOSUM45"


_BLOSUM45 = None


def blosum45() -> SubstitutionMatrix:
    global _BLOSUM45
    if _BLOSUM45 is None:
        _BLOSUM45 = SubstitutionMatrix.load(blosum45_path(), "BLOSUM45")
    return _BLOSUM45


def blosum_substitution(p_ref: Seq, p_gen: Seq, m: SubstitutionMatrix = None) -> float:  # type: ignore[assignment]
    """Summed substitution scores over the shared prefix, normalised by the combined length."""
    m = m or blosum45()
    a, b = str(p_ref), str(p_gen)
    if not a and not b:
        return 0.0
    total = sum(m(x, y) for x, y in zip(a, b))
    return 2.0 * total / (len(a) + len(b))


def protein_validity(texts: Iterable[str]) -> float:
    from ..protseq import validate_protein

    items = list(texts)
    if not items:
        return 0.0
    return 100.0 * sum(validate_protein(t) for t in items) / len(items)
