"""Deterministic reference featurizers for the four modalities.

These stand in for pretrained modality encoders: they give each atom or
residue a fixed-width real vector so the fusion stack can be exercised.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from ..molgraph.graph import MolecularGraph
from ..protseq import CANONICAL_RESIDUES, ProteinSequence, ProteinStructure

MOL2D, MOL3D, PROT1D, PROT3D = "mol2d", "mol3d", "prot1d", "prot3d"
KINDS = (MOL2D, MOL3D, PROT1D, PROT3D)

# Element one-hot order; elements registered later get an all-zero one-hot.
ELEMENT_ORDER = ("B", "C", "N", "O", "F", "Si", "P", "S", "Cl", "Se", "Br", "I")

FEATURE_DIMS = {
    MOL2D: len(ELEMENT_ORDER) + 3,
    MOL3D: len(ELEMENT_ORDER) + 6,
    PROT1D: len(CANONICAL_RESIDUES) + 1,
    PROT3D: len(CANONICAL_RESIDUES) + 4,
}


class MissingCoordinates(ValueError):
    pass


@dataclass(frozen=True)
class ModalityEmbedding:
    matrix: np.ndarray
    kind: str

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2:
            raise ValueError("embedding must be a 2D matrix")
        if self.kind not in KINDS:
            raise ValueError(f"unknown modality kind {self.kind!r}")
        if not np.isfinite(m).all():
            raise ValueError("embedding has non-finite entries")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_tokens(self) -> int:
        return self.matrix.shape[0]


def _distance_summary(points: np.ndarray) -> np.ndarray:
    """Per-point mean, min and max distance to every other point."""
    n = points.shape[0]
    out = np.zeros((n, 3))
    if n < 2:
        return out
    centered = points - points.mean(axis=0)
    diff = centered[:, None, :] - centered[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=-1))
    off = ~np.eye(n, dtype=bool)
    for i in range(n):
        row = dist[i][off[i]]
        out[i] = (row.mean(), row.min(), row.max())
    return out


def _mol2d(g: MolecularGraph) -> np.ndarray:
    rows = np.zeros((len(g.atoms), FEATURE_DIMS[MOL2D]))
    for i, a in enumerate(g.atoms):
        if a.element in ELEMENT_ORDER:
            rows[i, ELEMENT_ORDER.index(a.element)] = 1.0
        rows[i, -3] = g.degree(i)
        rows[i, -2] = a.formal_charge
        rows[i, -1] = float(a.aromatic)
    return rows


def _prot1d(p: ProteinSequence) -> np.ndarray:
    n = len(p)
    rows = np.zeros((n, FEATURE_DIMS[PROT1D]))
    for i, r in enumerate(p.residues):
        rows[i, CANONICAL_RESIDUES.index(r)] = 1.0
        rows[i, -1] = i / (n - 1) if n > 1 else 0.0
    return rows


def featurize(entity: Union[MolecularGraph, ProteinSequence, ProteinStructure], kind: str) -> ModalityEmbedding:
    """Per-atom or per-residue features for one modality.

    mol2d: element one-hot, degree, charge, aromatic flag.
    mol3d: mol2d plus mean/min/max distance to the other atoms.
    prot1d: residue one-hot plus position scaled to [0, 1].
    prot3d: prot1d plus mean/min/max CA distance to the other residues.
    """
    if kind in (MOL2D, MOL3D):
        if not isinstance(entity, MolecularGraph):
            raise TypeError(f"{kind} needs a MolecularGraph")
        if not entity.atoms:
            raise ValueError("cannot featurize an empty graph")
        m = _mol2d(entity)
        if kind == MOL3D:
            if entity.coordinates is None:
                raise MissingCoordinates("mol3d features need atom coordinates")
            m = np.hstack([m, _distance_summary(np.asarray(entity.coordinates))])
        return ModalityEmbedding(m, kind)
    if kind in (PROT1D, PROT3D):
        if isinstance(entity, ProteinStructure):
            seq = entity.sequence
        elif isinstance(entity, ProteinSequence):
            seq = entity
        else:
            raise TypeError(f"{kind} needs a ProteinSequence or ProteinStructure")
        m = _prot1d(seq)
        if kind == PROT3D:
            if not isinstance(entity, ProteinStructure):
                raise MissingCoordinates("prot3d features need backbone coordinates")
            m = np.hstack([m, _distance_summary(np.asarray(entity.ca_coordinates()))])
        return ModalityEmbedding(m, kind)
    raise ValueError(f"unknown modality kind {kind!r}")
