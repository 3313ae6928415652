"""Motif indicators for molecules (circular fingerprints) and proteins
(dictionary substring matches), and the motif prompt projection."""

from __future__ import annotations

import struct
from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from .errors import DimensionMismatch
from .molgraph import elements
from .molgraph.graph import AROMATIC, MolecularGraph
from .protseq import ProteinSequence, validate_protein

N_MOLECULE_BITS = 1024

_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x100000001B3
_MASK = 0xFFFFFFFFFFFFFFFF


class EmptyGraph(ValueError):
    pass


class MotifDictionaryError(ValueError):
    pass


def fnv1a64(data: bytes) -> int:
    h = _FNV_OFFSET
    for byte in data:
        h = ((h ^ byte) * _FNV_PRIME) & _MASK
    return h


@dataclass(frozen=True)
class MotifVector:
    """Binary indicator vector."""

    bits: np.ndarray

    def __post_init__(self):
        b = np.asarray(self.bits)
        if b.ndim != 1:
            raise ValueError("motif vector must be one-dimensional")
        if b.size and not np.isin(b, (0, 1)).all():
            raise ValueError("motif vector entries must be 0 or 1")
        b = b.astype(np.uint8)
        b.setflags(write=False)
        object.__setattr__(self, "bits", b)

    def __len__(self) -> int:
        return int(self.bits.size)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MotifVector) and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())

    def on_bits(self) -> List[int]:
        return [int(i) for i in np.flatnonzero(self.bits)]

    def to_hex(self) -> str:
        """Bits packed most-significant first, bit 0 leftmost."""
        return np.packbits(self.bits).tobytes().hex()


# Molecular fingerprints -----------------------------------------------------

def pharmacophore_invariant(g: MolecularGraph, i: int) -> int:
    """Six flags: donor, acceptor, positive, negative, aromatic, halogen."""
    a = g.atoms[i]
    polar = a.element in ("N", "O")
    flags = (
        polar and a.explicit_h >= 1,
        polar,
        a.formal_charge > 0,
        a.formal_charge < 0,
        a.aromatic,
        a.element in elements.HALOGENS,
    )
    return sum(1 << k for k, f in enumerate(flags) if f)


def element_invariant(g: MolecularGraph, i: int) -> int:
    """Element-based atom invariant for the ECFP variant."""
    a = g.atoms[i]
    z = elements.ATOMIC_NUMBER.get(a.element, 0)
    payload = struct.pack("<HBBbB", z, g.degree(i), a.explicit_h, a.formal_charge, int(a.aromatic))
    return fnv1a64(payload)


def _bond_code(order: float) -> int:
    return 4 if order == AROMATIC else int(order)


def _circular_ids(g: MolecularGraph, invariants: Sequence[int], radius: int) -> List[List[int]]:
    """Per-round environment identifiers, round 0 .. radius."""
    ids = [fnv1a64(struct.pack("<BQ", 0, inv)) for inv in invariants]
    rounds = [ids]
    for r in range(1, radius + 1):
        prev = rounds[-1]
        nxt = []
        for i in range(len(g.atoms)):
            env = sorted((_bond_code(o), prev[j]) for j, o in g.neighbors(i))
            data = struct.pack("<BQ", r, prev[i]) + b"".join(struct.pack("<BQ", b, h) for b, h in env)
            nxt.append(fnv1a64(data))
        rounds.append(nxt)
    return rounds


def _fold(rounds: List[List[int]], n_bits: int) -> MotifVector:
    bits = np.zeros(n_bits, dtype=np.uint8)
    for ids in rounds:
        for h in ids:
            bits[h % n_bits] = 1
    return MotifVector(bits)


def _check_fp_args(g: MolecularGraph, radius: int, n_bits: int) -> None:
    if not g.atoms:
        raise EmptyGraph("cannot fingerprint an empty graph")
    if radius < 0:
        raise ValueError("radius must be non-negative")
    if n_bits < 1:
        raise ValueError("n_bits must be positive")


def fcfp(g: MolecularGraph, radius: int = 2, n_bits: int = N_MOLECULE_BITS) -> MotifVector:
    """Binary functional-class circular fingerprint.

    Each atom starts from its pharmacophore flags; every round rehashes the
    atom's identifier with the sorted (bond code, neighbour identifier)
    pairs. Identifiers from all rounds 0..radius are folded by modulus.
    """
    _check_fp_args(g, radius, n_bits)
    inv = [pharmacophore_invariant(g, i) for i in range(len(g.atoms))]
    return _fold(_circular_ids(g, inv, radius), n_bits)


def ecfp(g: MolecularGraph, radius: int = 2, n_bits: int = 2048) -> MotifVector:
    """Element-based circular fingerprint (Morgan-style), same hashing scheme."""
    _check_fp_args(g, radius, n_bits)
    inv = [element_invariant(g, i) for i in range(len(g.atoms))]
    return _fold(_circular_ids(g, inv, radius), n_bits)


# Protein motifs --------------------------------------------------------------

class MotifDictionary:
    """Ordered protein motif strings; position is the bit index."""

    def __init__(self, motifs: Iterable[str]):
        self.motifs: Tuple[str, ...] = tuple(motifs)
        seen = set()
        for i, m in enumerate(self.motifs):
            if not validate_protein(m):
                raise MotifDictionaryError(f"motif {i} ({m!r}) is empty or has non-canonical residues")
            if m in seen:
                raise MotifDictionaryError(f"duplicate motif {m!r}")
            seen.add(m)

    def __len__(self) -> int:
        return len(self.motifs)

    def __getitem__(self, i: int) -> str:
        return self.motifs[i]

    def __iter__(self):
        return iter(self.motifs)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, MotifDictionary) and self.motifs == other.motifs

    @classmethod
    def load(cls, path: Union[str, Path]) -> "MotifDictionary":
        text = Path(path).read_text(encoding="utf-8")
        return cls(line.strip() for line in text.splitlines() if line.strip())

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text("".join(m + "\n" for m in self.motifs), encoding="utf-8")


def protein_motif_vector(p: Union[ProteinSequence, str], dictionary: MotifDictionary) -> MotifVector:
    """Bit i is set iff motif i occurs as a contiguous substring of ``p``."""
    if not len(dictionary):
        raise MotifDictionaryError("motif dictionary is empty")
    s = str(p)
    return MotifVector(np.fromiter((m in s for m in dictionary), dtype=np.uint8, count=len(dictionary)))


Annotation = Union[str, Tuple[int, int]]


def build_motif_dictionary(annotated: Iterable[Tuple[str, Sequence[Annotation]]],
                           min_count: int = 2) -> MotifDictionary:
    """Collect annotated motif subsequences and keep the frequent ones.

    Annotations are motif strings or half-open ``(start, end)`` spans into
    the record's sequence. Every annotation counts once. Motifs seen at
    least ``min_count`` times are kept, most frequent first, ties in
    lexicographic order.
    """
    counts: Counter = Counter()
    for seq, spans in annotated:
        for ann in spans:
            if isinstance(ann, str):
                motif = ann
            else:
                start, end = ann
                if not 0 <= start < end <= len(seq):
                    raise MotifDictionaryError(f"span {ann} outside sequence of length {len(seq)}")
                motif = seq[start:end]
            motif = motif.upper()
            if validate_protein(motif):
                counts[motif] += 1
    kept = sorted((m for m, c in counts.items() if c >= min_count), key=lambda m: (-counts[m], m))
    return MotifDictionary(kept)


# Prompt projection ---------------------------------------------------------

def motif_prompt(t: Union[MotifVector, np.ndarray], m: np.ndarray) -> np.ndarray:
    """``P = T M``: the sum of the rows of ``m`` selected by the set bits of ``t``."""
    bits = t.bits if isinstance(t, MotifVector) else np.asarray(t)
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or bits.ndim != 1 or bits.shape[0] != m.shape[0]:
        raise DimensionMismatch(f"motif vector of length {bits.shape} vs matrix {m.shape}")
    if not np.isfinite(m).all():
        raise ValueError("motif embedding matrix has non-finite entries")
    out = np.zeros(m.shape[1], dtype=np.float64)
    for i in np.flatnonzero(bits):
        out += m[i]
    return out


def default_dictionary_path() -> Path:
    import os

    base = os.environ.get("IBM_DATA_DIR")
    if base and (Path(base) / "motifs.txt").exists():
        return Path(base) / "motifs.txt"
    return Path(__file__).parent / "data" / "motifs.txt"
