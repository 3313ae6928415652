"""Valence checking with Kekule feasibility for aromatic systems."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Set, Tuple

import networkx as nx

from . import elements
from .errors import InvalidGraph
from .graph import AROMATIC, Atom, Bond, MolecularGraph


@dataclass(frozen=True)
class Violation:
    atom: int
    element: str
    total: float
    allowed: Tuple[int, ...]
    reason: str

    def __str__(self) -> str:
        return (f"atom {self.atom} ({self.element}): {self.reason}, "
                f"bond order total {self.total:g}, allowed {self.allowed}")


@dataclass(frozen=True)
class ValenceReport:
    violations: Tuple[Violation, ...] = field(default_factory=tuple)

    @property
    def valid(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.valid


def _sigma_totals(g: MolecularGraph) -> List[int]:
    """Bond order totals with each aromatic bond counted as single."""
    out = []
    for i, atom in enumerate(g.atoms):
        s = atom.explicit_h
        for _, order in g.neighbors(i):
            s += 1 if order == AROMATIC else int(order)
        out.append(s)
    return out


def _pi_demand(g: MolecularGraph, sigma: List[int]) -> Dict[int, bool]:
    """For atoms on aromatic bonds: does the atom need one extra pi bond?"""
    demand = {}
    for i, atom in enumerate(g.atoms):
        if not any(o == AROMATIC for _, o in g.neighbors(i)):
            continue
        allowed = elements.allowed_valences(atom.element, atom.formal_charge)
        reachable = [v for v in allowed if v >= sigma[i]]
        demand[i] = bool(reachable) and min(reachable) > sigma[i]
    return demand


def _kekule_matching(g: MolecularGraph, demand: Dict[int, bool]) -> Tuple[Set[Tuple[int, int]], Set[int]]:
    """Match pi-demanding atoms over aromatic bonds.

    Returns the matched bonds (as sorted index pairs) and the set of
    demanding atoms left unmatched.
    """
    h = nx.Graph()
    needy = sorted(i for i, d in demand.items() if d)
    h.add_nodes_from(needy)
    for b in g.bonds:
        if b.order == AROMATIC and demand.get(b.begin) and demand.get(b.end):
            h.add_edge(b.begin, b.end)
    matching = nx.max_weight_matching(h, maxcardinality=True)
    pairs = {(min(a, b), max(a, b)) for a, b in matching}
    covered = {x for p in pairs for x in p}
    return pairs, set(needy) - covered


def check_valence(g: MolecularGraph) -> ValenceReport:
    """Report atoms whose bond order total exceeds their allowed valences.

    Aromatic bonds are resolved through a Kekule assignment: atoms on an
    aromatic bond that need one more bond to reach an allowed valence must be
    pairable through aromatic bonds. Unpairable atoms are reported too.
    """
    sigma = _sigma_totals(g)
    demand = _pi_demand(g, sigma)
    _, unmatched = _kekule_matching(g, demand) if demand else (set(), set())
    out = []
    for i, atom in enumerate(g.atoms):
        allowed = elements.allowed_valences(atom.element, atom.formal_charge)
        total = sigma[i] + (1 if demand.get(i) else 0)
        if sigma[i] > max(allowed):
            out.append(Violation(i, atom.element, sigma[i], allowed, "exceeds allowed valence"))
        elif i in unmatched:
            out.append(Violation(i, atom.element, total, allowed, "no Kekule structure"))
        elif atom.aromatic and i not in demand:
            out.append(Violation(i, atom.element, total, allowed, "aromatic atom without aromatic bonds"))
    return ValenceReport(tuple(out))


def kekulize(g: MolecularGraph) -> MolecularGraph:
    """Replace aromatic bonds by an alternating single/double assignment.

    Atom aromatic flags are cleared. Raises ``InvalidGraph`` when no Kekule
    structure exists.
    """
    if not any(b.order == AROMATIC for b in g.bonds) and not any(a.aromatic for a in g.atoms):
        return g
    sigma = _sigma_totals(g)
    demand = _pi_demand(g, sigma)
    pairs, unmatched = _kekule_matching(g, demand)
    if unmatched:
        raise InvalidGraph(f"cannot kekulize: atoms {sorted(unmatched)} lack a pi partner")
    bonds = []
    for b in g.bonds:
        if b.order == AROMATIC:
            bonds.append(Bond(b.begin, b.end, 2 if (b.begin, b.end) in pairs else 1))
        else:
            bonds.append(b)
    atoms = tuple(Atom(a.element, a.formal_charge, a.explicit_h, False) for a in g.atoms)
    return MolecularGraph(atoms, tuple(bonds), g.coordinates)


def fill_hydrogens(g: MolecularGraph, only: Optional[Set[int]] = None) -> MolecularGraph:
    """Set each (selected) atom's H count to reach its lowest allowed valence."""
    atoms = list(g.atoms)
    for i, a in enumerate(atoms):
        if only is not None and i not in only:
            continue
        s = sum(int(o) if o != AROMATIC else 1 for _, o in g.neighbors(i))
        if a.aromatic:
            h = elements.aromatic_default_hydrogens(a.element, a.formal_charge, s)
        else:
            h = elements.default_hydrogens(a.element, a.formal_charge, s)
        atoms[i] = Atom(a.element, a.formal_charge, h, a.aromatic)
    return MolecularGraph(tuple(atoms), g.bonds, g.coordinates)
