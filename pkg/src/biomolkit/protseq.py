"""Protein sequences, FASTA reading/writing and a backbone-coordinate container."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Tuple, Union

CANONICAL_RESIDUES = "ACDEFGHIKLMNPQRSTVWY"
_RESIDUE_SET = frozenset(CANONICAL_RESIDUES)

# Backbone atoms per residue, in stored order.
BACKBONE_ATOMS = ("N", "C", "CA", "O")

Point = Tuple[float, float, float]


class ProteinError(ValueError):
    pass


class InvalidResidue(ProteinError):
    def __init__(self, residue: str, line: int = 0, column: int = 0):
        self.residue, self.line, self.column = residue, line, column
        where = f" at line {line}, column {column}" if line else f" at position {column}"
        super().__init__(f"invalid residue {residue!r}{where}")


class EmptyRecord(ProteinError):
    def __init__(self, header: str, line: int):
        self.header, self.line = header, line
        super().__init__(f"record {header!r} (line {line}) has no sequence")


class StructureError(ProteinError):
    pass


def validate_protein(text: str) -> bool:
    """True iff ``text`` is non-empty and uses only the 20 canonical residue codes."""
    return bool(text) and all(c in _RESIDUE_SET for c in text)


@dataclass(frozen=True)
class ProteinSequence:
    residues: str

    def __post_init__(self):
        if not self.residues:
            raise ProteinError("protein sequence is empty")
        for i, c in enumerate(self.residues):
            if c not in _RESIDUE_SET:
                raise InvalidResidue(c, 0, i)

    def __str__(self) -> str:
        return self.residues

    def __len__(self) -> int:
        return len(self.residues)

    def __iter__(self):
        return iter(self.residues)


@dataclass(frozen=True)
class ProteinStructure:
    """Sequence plus backbone coordinates, shape ``(N, 4, 3)`` in N, C, CA, O order."""

    sequence: ProteinSequence
    backbone: Tuple[Tuple[Point, ...], ...]

    def __post_init__(self):
        bb = tuple(tuple(tuple(float(x) for x in atom) for atom in res) for res in self.backbone)
        if len(bb) != len(self.sequence):
            raise StructureError(f"{len(bb)} backbone entries for {len(self.sequence)} residues")
        for i, res in enumerate(bb):
            if len(res) != 4 or any(len(a) != 3 for a in res):
                raise StructureError(f"residue {i}: expected 4 atoms with 3 coordinates each")
        object.__setattr__(self, "backbone", bb)

    def ca_coordinates(self) -> List[Point]:
        k = BACKBONE_ATOMS.index("CA")
        return [res[k] for res in self.backbone]


def parse_fasta(text: str) -> List[Tuple[str, ProteinSequence]]:
    """Split FASTA text into ``(header, sequence)`` records.

    Sequence lines are concatenated with whitespace removed and uppercased.
    Text before the first header is ignored if blank and otherwise treated
    as an unnamed record.
    """
    records: List[Tuple[str, ProteinSequence]] = []
    header = None
    header_line = 0
    chunks: List[str] = []

    def flush() -> None:
        if header is None and not chunks:
            return
        seq = "".join(chunks)
        if not seq:
            raise EmptyRecord(header or "", header_line)
        records.append((header or "", ProteinSequence(seq)))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        if line.startswith(">"):
            flush()
            header, header_line, chunks = line[1:].strip(), lineno, []
            continue
        for col, ch in enumerate(line, start=1):
            if ch.isspace():
                continue
            up = ch.upper()
            if up not in _RESIDUE_SET:
                raise InvalidResidue(ch, lineno, col)
            chunks.append(up)
        if header is None and chunks and header_line == 0:
            header_line = lineno
    flush()
    return records


def read_fasta(path: Union[str, Path]) -> List[Tuple[str, ProteinSequence]]:
    return parse_fasta(Path(path).read_text(encoding="utf-8"))


def write_fasta(records: Iterable[Tuple[str, Union[ProteinSequence, str]]], width: int = 60) -> str:
    out = []
    for header, seq in records:
        s = str(seq)
        out.append(f">{header}")
        for i in range(0, len(s), width):
            out.append(s[i:i + width])
    return "\n".join(out) + ("\n" if out else "")


def parse_backbone(text: str, sequence: Union[ProteinSequence, str]) -> ProteinStructure:
    """Read backbone coordinates: one line per residue with 12 numbers.

    The numbers are x y z for N, C, CA and O in that order. Blank lines and
    lines starting with ``#`` are skipped.
    """
    if isinstance(sequence, str):
        sequence = ProteinSequence(sequence)
    rows: List[Tuple[Point, ...]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        try:
            vals = [float(x) for x in line.split()]
        except ValueError:
            raise StructureError(f"line {lineno}: non-numeric backbone entry") from None
        if len(vals) != 12:
            raise StructureError(f"line {lineno}: expected 12 numbers, got {len(vals)}")
        rows.append(tuple(tuple(vals[k:k + 3]) for k in range(0, 12, 3)))  # type: ignore[misc]
    return ProteinStructure(sequence, tuple(rows))


def format_backbone(structure: ProteinStructure) -> str:
    lines = []
    for res in structure.backbone:
        lines.append(" ".join(repr(x) for atom in res for x in atom))
    return "\n".join(lines) + "\n"
