"""Molecule-level metrics: exact match, fingerprint similarity, validity."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, List, Optional, Union

import numpy as np

from ..errors import LengthMismatch
from ..molgraph import MolGraphError, canonical_form, check_valence, decode_selfies, parse_smiles
from ..molgraph.graph import MolecularGraph
from ..motif import MotifVector

Bits = Union[MotifVector, np.ndarray, List[int]]


def exact_match(ref_mol: MolecularGraph, gen_mol: MolecularGraph) -> bool:
    return canonical_form(ref_mol) == canonical_form(gen_mol)


def _as_bits(v: Bits) -> np.ndarray:
    if isinstance(v, MotifVector):
        return v.bits.astype(bool)
    return np.asarray(v).astype(bool)


def tanimoto(a: Bits, b: Bits) -> float:
    """|a AND b| / |a OR b|; two all-zero vectors score 1."""
    x, y = _as_bits(a), _as_bits(b)
    if x.shape != y.shape:
        raise LengthMismatch(f"bit vectors of length {x.shape} and {y.shape}")
    union = int(np.count_nonzero(x | y))
    if union == 0:
        return 1.0
    return float(Fraction(int(np.count_nonzero(x & y)), union))


def parse_molecule(text: str, fmt: str = "smiles") -> MolecularGraph:
    if fmt == "smiles":
        return parse_smiles(text.strip())
    if fmt == "selfies":
        return decode_selfies(text.strip())
    raise ValueError(f"unknown molecule format {fmt!r}")


def try_parse_valid(text: str, fmt: str = "smiles") -> Optional[MolecularGraph]:
    """Parsed graph if ``text`` parses and passes the valence check, else None."""
    try:
        g = parse_molecule(text, fmt)
    except (MolGraphError, ValueError):
        return None
    if not g.atoms or not check_valence(g).valid:
        return None
    return g


def molecule_validity(texts: Iterable[str], fmt: str = "smiles") -> float:
    """Percentage of strings that parse and pass the valence check."""
    items = list(texts)
    if not items:
        return 0.0
    ok = sum(try_parse_valid(t, fmt) is not None for t in items)
    return 100.0 * ok / len(items)
