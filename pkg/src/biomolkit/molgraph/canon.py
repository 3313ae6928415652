"""Canonical atom ranking by iterative refinement plus tie-break search.

Atoms start from the invariant (element, charge, degree, hydrogens,
aromatic) and are refined by the multiset of (bond order, neighbour class)
until the partition is stable. Remaining ties are broken by individualizing
each member of the first tied class in turn; the labeling whose SMILES
string is lexicographically smallest wins. Automorphisms discovered along
the way prune equivalent branches.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Sequence, Tuple

from . import elements
from .graph import MolecularGraph


def _ranks_from_keys(keys: Sequence) -> List[int]:
    """Rank = number of atoms with a strictly smaller key."""
    order = sorted(range(len(keys)), key=lambda i: keys[i])
    ranks = [0] * len(keys)
    for pos, i in enumerate(order):
        if pos and keys[i] == keys[order[pos - 1]]:
            ranks[i] = ranks[order[pos - 1]]
        else:
            ranks[i] = pos
    return ranks


def initial_invariants(g: MolecularGraph) -> List[int]:
    keys = []
    for i, a in enumerate(g.atoms):
        keys.append((elements.ATOMIC_NUMBER.get(a.element, 999), a.element,
                     a.formal_charge, g.degree(i), a.explicit_h, a.aromatic))
    return _ranks_from_keys(keys)


def refine(g: MolecularGraph, ranks: List[int]) -> List[int]:
    """Split classes by neighbour signature until the partition is stable."""
    n_classes = len(set(ranks))
    while True:
        keys = [
            (ranks[i], tuple(sorted((order, ranks[j]) for j, order in g.neighbors(i))))
            for i in range(len(ranks))
        ]
        new = _ranks_from_keys(keys)
        n_new = len(set(new))
        if n_new == n_classes:
            return new
        ranks, n_classes = new, n_new


def _individualize(ranks: List[int], v: int) -> List[int]:
    r = ranks[v]
    return [x + 1 if (x == r and i != v) else x for i, x in enumerate(ranks)]


def _target_cell(ranks: List[int]) -> Optional[List[int]]:
    counts: Dict[int, int] = {}
    for r in ranks:
        counts[r] = counts.get(r, 0) + 1
    tied = [r for r, c in counts.items() if c > 1]
    if not tied:
        return None
    r = min(tied)
    return [i for i, x in enumerate(ranks) if x == r]


class _Search:
    def __init__(self, g: MolecularGraph):
        from .smiles import emit_smiles

        self.g = g
        self.emit = emit_smiles
        self.best: Optional[Tuple[str, List[int]]] = None
        self.leaves: Dict[str, List[int]] = {}
        self.generators: List[List[int]] = []

    def _orbit_rep(self, fixed: Sequence[int]) -> List[int]:
        """Union-find parents of the orbits under generators fixing ``fixed``."""
        n = len(self.g.atoms)
        parent = list(range(n))

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for gen in self.generators:
            if any(gen[p] != p for p in fixed):
                continue
            for a, b in enumerate(gen):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
        return [find(x) for x in range(n)]

    def leaf(self, ranks: List[int]) -> None:
        s, order = self.emit(self.g, ranks, return_order=True)
        seen = self.leaves.get(s)
        if seen is not None:
            # equal strings => matching emission positions give an automorphism
            gen = [0] * len(order)
            for a, b in zip(order, seen):
                gen[a] = b
            self.generators.append(gen)
            return
        self.leaves[s] = order
        if self.best is None or s < self.best[0]:
            self.best = (s, ranks)

    def run(self, ranks: List[int], path: List[int]) -> None:
        cell = _target_cell(ranks)
        if cell is None:
            self.leaf(ranks)
            return
        explored: List[int] = []
        for v in cell:
            if explored:
                orbit = self._orbit_rep(path)
                if any(orbit[u] == orbit[v] for u in explored):
                    continue
            explored.append(v)
            self.run(refine(self.g, _individualize(ranks, v)), path + [v])


def canonical_ranks(g: MolecularGraph) -> List[int]:
    """A permutation of ``range(len(g))`` that is invariant under relabeling."""
    if not g.atoms:
        return []
    search = _Search(g)
    search.run(refine(g, initial_invariants(g)), [])
    assert search.best is not None
    return search.best[1]


def canonical_form(g: MolecularGraph) -> str:
    """Canonical SMILES; equal strings iff the graphs are isomorphic."""
    from .smiles import emit_smiles

    return emit_smiles(g, canonical_ranks(g))
