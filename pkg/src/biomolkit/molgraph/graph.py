"""Immutable molecular graph with explicit hydrogen counts."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from . import elements
from .errors import InvalidGraph, UnsupportedElement

AROMATIC = 1.5
BOND_ORDERS = (1, 2, 3, AROMATIC)

Point = Tuple[float, float, float]


@dataclass(frozen=True)
class Atom:
    element: str
    formal_charge: int = 0
    explicit_h: int = 0
    aromatic: bool = False

    def __post_init__(self):
        if not elements.is_supported(self.element):
            raise UnsupportedElement(f"element {self.element!r} is not in the element table")
        if not elements.MIN_CHARGE <= self.formal_charge <= elements.MAX_CHARGE:
            raise InvalidGraph(f"formal charge {self.formal_charge} out of range")
        if self.explicit_h < 0:
            raise InvalidGraph("negative hydrogen count")


@dataclass(frozen=True, order=True)
class Bond:
    begin: int
    end: int
    order: float = 1

    def __post_init__(self):
        if self.order not in BOND_ORDERS:
            raise InvalidGraph(f"bond order {self.order!r} not in {BOND_ORDERS}")
        if self.begin > self.end:
            b, e = self.end, self.begin
            object.__setattr__(self, "begin", b)
            object.__setattr__(self, "end", e)

    def other(self, i: int) -> int:
        return self.end if i == self.begin else self.begin


@dataclass(frozen=True)
class MolecularGraph:
    """Atoms, bonds and optional 3D coordinates.

    Bonds are normalised so that ``begin < end``. Hydrogens are never graph
    nodes; each atom carries its hydrogen count in ``explicit_h``.
    """

    atoms: Tuple[Atom, ...] = ()
    bonds: Tuple[Bond, ...] = ()
    coordinates: Optional[Tuple[Point, ...]] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        object.__setattr__(self, "bonds", tuple(self.bonds))
        n = len(self.atoms)
        seen = set()
        for b in self.bonds:
            if b.begin == b.end:
                raise InvalidGraph(f"self-loop on atom {b.begin}")
            if not (0 <= b.begin < n and 0 <= b.end < n):
                raise InvalidGraph(f"bond ({b.begin}, {b.end}) references a missing atom")
            key = (b.begin, b.end)
            if key in seen:
                raise InvalidGraph(f"duplicate bond between atoms {key}")
            seen.add(key)
        if self.coordinates is not None:
            coords = tuple(tuple(float(x) for x in p) for p in self.coordinates)
            if len(coords) != n:
                raise InvalidGraph(f"{len(coords)} coordinates for {n} atoms")
            if any(len(p) != 3 for p in coords):
                raise InvalidGraph("coordinates must be 3D points")
            object.__setattr__(self, "coordinates", coords)

    def __len__(self) -> int:
        return len(self.atoms)

    @cached_property
    def adjacency(self) -> Tuple[Tuple[Tuple[int, float], ...], ...]:
        adj: List[List[Tuple[int, float]]] = [[] for _ in self.atoms]
        for b in self.bonds:
            adj[b.begin].append((b.end, b.order))
            adj[b.end].append((b.begin, b.order))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def _bond_index(self) -> Dict[Tuple[int, int], Bond]:
        return {(b.begin, b.end): b for b in self.bonds}

    def bond_between(self, i: int, j: int) -> Optional[Bond]:
        return self._bond_index.get((min(i, j), max(i, j)))

    def neighbors(self, i: int) -> Tuple[Tuple[int, float], ...]:
        return self.adjacency[i]

    def degree(self, i: int) -> int:
        return len(self.adjacency[i])

    def bond_order_sum(self, i: int) -> float:
        return sum(o for _, o in self.adjacency[i])

    def permuted(self, perm: Sequence[int]) -> "MolecularGraph":
        """Relabel atoms so that old atom ``i`` becomes new atom ``perm[i]``."""
        n = len(self.atoms)
        if sorted(perm) != list(range(n)):
            raise ValueError("perm must be a permutation of atom indices")
        atoms: List[Optional[Atom]] = [None] * n
        for old, new in enumerate(perm):
            atoms[new] = self.atoms[old]
        bonds = [Bond(perm[b.begin], perm[b.end], b.order) for b in self.bonds]
        coords = None
        if self.coordinates is not None:
            c: List[Optional[Point]] = [None] * n
            for old, new in enumerate(perm):
                c[new] = self.coordinates[old]
            coords = tuple(c)  # type: ignore[arg-type]
        return MolecularGraph(tuple(atoms), tuple(sorted(bonds)), coords)  # type: ignore[arg-type]

    def with_coordinates(self, coordinates: Iterable[Point]) -> "MolecularGraph":
        return MolecularGraph(self.atoms, self.bonds, tuple(coordinates))

    def components(self) -> List[List[int]]:
        """Connected components as sorted atom-index lists."""
        seen = [False] * len(self.atoms)
        out = []
        for start in range(len(self.atoms)):
            if seen[start]:
                continue
            stack, comp = [start], []
            seen[start] = True
            while stack:
                i = stack.pop()
                comp.append(i)
                for j, _ in self.adjacency[i]:
                    if not seen[j]:
                        seen[j] = True
                        stack.append(j)
            out.append(sorted(comp))
        return out

    def formula(self) -> Dict[str, int]:
        """Element counts including hydrogens."""
        counts: Dict[str, int] = {}
        h = 0
        for a in self.atoms:
            counts[a.element] = counts.get(a.element, 0) + 1
            h += a.explicit_h
        if h:
            counts["H"] = h
        return counts

    def formula_string(self) -> str:
        """Hill-order formula string, e.g. ``C6H11FO``."""
        counts = self.formula()
        parts = []
        order = []
        if "C" in counts:
            order = ["C"] + (["H"] if "H" in counts else [])
        order += sorted(k for k in counts if k not in order)
        for el in order:
            n = counts[el]
            parts.append(el if n == 1 else f"{el}{n}")
        return "".join(parts)
