"""Subset SMILES reader and deterministic writer.

Supported: organic-subset and bracket atoms (element, H count, charge),
aromatic lowercase atoms, bonds ``- = # :``, branches, ring closures
(digits and ``%nn``) and ``.`` separators. Stereo marks, isotopes, atom
classes and wildcards are rejected.
"""

from __future__ import annotations

from typing import Dict, List, Optional, Set, Tuple

from . import elements
from .errors import (
    SmilesSyntaxError,
    UnclosedBranch,
    UnclosedRing,
    UnsupportedFeature,
)
from .graph import AROMATIC, Atom, Bond, MolecularGraph
from .valence import fill_hydrogens

_ORGANIC_TWO = ("Cl", "Br")
_ORGANIC_ONE = set("BCNOPSFI")
_AROMATIC_ORGANIC = {"b": "B", "c": "C", "n": "N", "o": "O", "p": "P", "s": "S"}
_AROMATIC_BRACKET = {"se": "Se", "as": "As", **_AROMATIC_ORGANIC}
_BOND_SYMBOLS = {"-": 1, "=": 2, "#": 3, ":": AROMATIC}


def _parse_bracket(text: str, start: int) -> Tuple[Atom, int]:
    """Parse ``[...]`` beginning at ``start``; return atom and index after ``]``."""
    end = text.find("]", start)
    if end < 0:
        raise SmilesSyntaxError("unterminated bracket atom", start)
    body = text[start + 1:end]
    pos = 0
    if body[:1].isdigit():
        raise UnsupportedFeature("isotope", start + 1)
    symbol = None
    aromatic = False
    for cand in sorted(_AROMATIC_BRACKET, key=len, reverse=True):
        if body.startswith(cand):
            symbol, aromatic, pos = _AROMATIC_BRACKET[cand], True, len(cand)
            break
    if symbol is None:
        if len(body) >= 2 and body[0].isupper() and body[1].islower():
            symbol, pos = body[:2], 2
        elif body[:1].isupper():
            symbol, pos = body[0], 1
        elif body[:1] == "*":
            raise UnsupportedFeature("wildcard atom", start + 1)
        else:
            raise SmilesSyntaxError("bad bracket atom symbol", start + 1)
    if body[pos:pos + 1] == "@":
        raise UnsupportedFeature("chirality", start + 1 + pos)
    h = 0
    if body[pos:pos + 1] == "H":
        pos += 1
        digits = ""
        while pos < len(body) and body[pos].isdigit():
            digits += body[pos]
            pos += 1
        h = int(digits) if digits else 1
    charge = 0
    if body[pos:pos + 1] in ("+", "-"):
        sign = 1 if body[pos] == "+" else -1
        ch = body[pos]
        pos += 1
        if pos < len(body) and body[pos].isdigit():
            digits = ""
            while pos < len(body) and body[pos].isdigit():
                digits += body[pos]
                pos += 1
            charge = sign * int(digits)
        else:
            n = 1
            while pos < len(body) and body[pos] == ch:
                n += 1
                pos += 1
            charge = sign * n
    if body[pos:pos + 1] == ":":
        raise UnsupportedFeature("atom class", start + 1 + pos)
    if pos != len(body):
        raise SmilesSyntaxError(f"unexpected {body[pos]!r} in bracket atom", start + 1 + pos)
    return Atom(symbol, charge, h, aromatic), end + 1


def parse_smiles(text: str) -> MolecularGraph:
    """Parse a SMILES string (subset grammar) into a graph.

    Atoms written without brackets get hydrogens up to their lowest allowed
    valence; bracket atoms keep exactly the hydrogens written.
    """
    if not text:
        raise SmilesSyntaxError("empty SMILES", 0)
    atoms: List[Atom] = []
    bonds: Dict[Tuple[int, int], float] = {}
    implicit: Set[int] = set()
    prev: Optional[int] = None
    pending: Optional[float] = None
    pending_pos = 0
    branches: List[Tuple[Optional[int], int]] = []
    rings: Dict[int, Tuple[int, Optional[float], int]] = {}
    last_was_open = False
    i = 0
    n = len(text)

    def add_bond(a: int, b: int, order: Optional[float], pos: int) -> None:
        key = (min(a, b), max(a, b))
        if a == b:
            raise SmilesSyntaxError("ring closure onto the same atom", pos)
        if key in bonds:
            raise SmilesSyntaxError("duplicate bond", pos)
        if order is None:
            order = AROMATIC if (atoms[a].aromatic and atoms[b].aromatic) else 1
        bonds[key] = order

    while i < n:
        ch = text[i]
        atom: Optional[Atom] = None
        start = i
        if ch == "[":
            atom, i = _parse_bracket(text, i)
        elif text.startswith(_ORGANIC_TWO, i):
            atom, i = Atom(text[i:i + 2]), i + 2
        elif ch in _ORGANIC_ONE:
            atom, i = Atom(ch), i + 1
        elif ch in _AROMATIC_ORGANIC:
            atom, i = Atom(_AROMATIC_ORGANIC[ch], aromatic=True), i + 1
        elif ch in _BOND_SYMBOLS:
            if pending is not None or prev is None:
                raise SmilesSyntaxError(f"misplaced bond {ch!r}", i)
            pending, pending_pos = _BOND_SYMBOLS[ch], i
            i += 1
            continue
        elif ch in "/\\":
            raise UnsupportedFeature("directional bond", i)
        elif ch == "$":
            raise UnsupportedFeature("quadruple bond", i)
        elif ch == "*":
            raise UnsupportedFeature("wildcard atom", i)
        elif ch == "(":
            if prev is None or pending is not None:
                raise SmilesSyntaxError("branch without a preceding atom", i)
            branches.append((prev, i))
            last_was_open = True
            i += 1
            continue
        elif ch == ")":
            if not branches:
                raise SmilesSyntaxError("unmatched ')'", i)
            if pending is not None or last_was_open:
                raise SmilesSyntaxError("empty branch or dangling bond", i)
            prev = branches.pop()[0]
            i += 1
            continue
        elif ch.isdigit() or ch == "%":
            if prev is None:
                raise SmilesSyntaxError("ring label without a preceding atom", i)
            if ch == "%":
                digits = text[i + 1:i + 3]
                if len(digits) != 2 or not digits.isdigit():
                    raise SmilesSyntaxError("'%' must be followed by two digits", i)
                label, i = int(digits), i + 3
            else:
                label, i = int(ch), i + 1
            if label in rings:
                other, order, _ = rings.pop(label)
                if pending is not None and order is not None and pending != order:
                    raise SmilesSyntaxError("conflicting ring bond orders", start)
                add_bond(other, prev, pending if pending is not None else order, start)
            else:
                rings[label] = (prev, pending, start)
            pending = None
            continue
        elif ch == ".":
            if pending is not None or prev is None or last_was_open:
                raise SmilesSyntaxError("misplaced '.'", i)
            prev = None
            i += 1
            continue
        else:
            raise SmilesSyntaxError(f"unexpected character {ch!r}", i)

        atoms.append(atom)
        idx = len(atoms) - 1
        if text[start] != "[":
            implicit.add(idx)
        if prev is not None:
            add_bond(prev, idx, pending, start)
        elif pending is not None:
            raise SmilesSyntaxError("bond without a preceding atom", pending_pos)
        prev, pending, last_was_open = idx, None, False

    if pending is not None:
        raise SmilesSyntaxError("dangling bond at end of input", pending_pos)
    if branches:
        raise UnclosedBranch(branches[-1][1])
    if rings:
        raise UnclosedRing(min(rings))
    g = MolecularGraph(tuple(atoms), tuple(Bond(a, b, o) for (a, b), o in sorted(bonds.items())))
    return fill_hydrogens(g, only=implicit)


# Writing ------------------------------------------------------------------

def _bare_hydrogens(g: MolecularGraph, i: int) -> Optional[int]:
    """H count the parser would assign to this atom written without brackets."""
    a = g.atoms[i]
    if a.formal_charge != 0 or a.element not in elements.ORGANIC_SUBSET:
        return None
    if a.aromatic and a.element not in _AROMATIC_ORGANIC.values():
        return None
    sigma = sum(1 if o == AROMATIC else int(o) for _, o in g.neighbors(i))
    if a.aromatic:
        return elements.aromatic_default_hydrogens(a.element, 0, sigma)
    return elements.default_hydrogens(a.element, 0, sigma)


def _atom_text(g: MolecularGraph, i: int) -> str:
    a = g.atoms[i]
    sym = a.element.lower() if a.aromatic else a.element
    if _bare_hydrogens(g, i) == a.explicit_h:
        return sym
    h = "" if a.explicit_h == 0 else ("H" if a.explicit_h == 1 else f"H{a.explicit_h}")
    q = a.formal_charge
    charge = "" if q == 0 else ("+" if q == 1 else "-" if q == -1 else f"{q:+d}")
    return f"[{sym}{h}{charge}]"


def _bond_text(g: MolecularGraph, a: int, b: int, order: float) -> str:
    both_aromatic = g.atoms[a].aromatic and g.atoms[b].aromatic
    if order == 1:
        return "-" if both_aromatic else ""
    if order == AROMATIC:
        return "" if both_aromatic else ":"
    return "=" if order == 2 else "#"


def _ring_label(d: int) -> str:
    return str(d) if d < 10 else f"%{d:02d}"


def emit_smiles(g: MolecularGraph, ranks: List[int], return_order: bool = False):
    """Write SMILES with traversal order fixed by ``ranks``.

    Each component starts at its lowest-ranked atom; neighbours are visited
    in rank order, so the output depends only on the ranked graph.
    """
    n = len(g.atoms)
    visit: Dict[int, int] = {}
    children: Dict[int, List[int]] = {}
    order: List[int] = []
    roots = sorted((min(c, key=lambda x: ranks[x]) for c in g.components()), key=lambda x: ranks[x])
    for root in roots:
        pending: List[Tuple[int, Optional[int]]] = [(root, None)]
        while pending:
            u, parent = pending.pop()
            if u in visit:
                continue
            visit[u] = len(visit)
            order.append(u)
            children[u] = []
            if parent is not None:
                children[parent].append(u)
            for v in sorted((v for v, _ in g.neighbors(u)), key=lambda x: ranks[x], reverse=True):
                if v not in visit:
                    pending.append((v, u))
    assert len(order) == n
    tree = {(min(p, c), max(p, c)) for p, cs in children.items() for c in cs}
    ring_at: Dict[int, List[int]] = {i: [] for i in range(n)}
    for b in g.bonds:
        if (b.begin, b.end) not in tree:
            ring_at[b.begin].append(b.end)
            ring_at[b.end].append(b.begin)

    digit_of: Dict[Tuple[int, int], int] = {}
    in_use: Set[int] = set()
    parts: List[str] = []

    def ring_text(u: int) -> str:
        out = []
        closing = [v for v in ring_at[u] if visit[v] < visit[u]]
        opening = [v for v in ring_at[u] if visit[v] > visit[u]]
        freed = []
        for v in sorted(closing, key=lambda x: digit_of[(x, u)]):
            d = digit_of.pop((v, u))
            out.append(_ring_label(d))
            freed.append(d)
        for v in sorted(opening, key=lambda x: ranks[x]):
            d = next(k for k in range(1, 100) if k not in in_use)
            in_use.add(d)
            digit_of[(u, v)] = d
            b = g.bond_between(u, v)
            out.append(_bond_text(g, u, v, b.order) + _ring_label(d))  # type: ignore[union-attr]
        in_use.difference_update(freed)
        return "".join(out)

    def walk(start: int, bond_prefix: str) -> None:
        cur, prefix = start, bond_prefix
        while True:
            parts.append(prefix + _atom_text(g, cur) + ring_text(cur))
            kids = children[cur]
            for c in kids[:-1]:
                b = g.bond_between(cur, c)
                parts.append("(")
                walk(c, _bond_text(g, cur, c, b.order))  # type: ignore[union-attr]
                parts.append(")")
            if not kids:
                return
            nxt = kids[-1]
            prefix = _bond_text(g, cur, nxt, g.bond_between(cur, nxt).order)  # type: ignore[union-attr]
            cur = nxt

    for k, root in enumerate(roots):
        if k:
            parts.append(".")
        walk(root, "")
    s = "".join(parts)
    return (s, order) if return_order else s


def write_smiles(g: MolecularGraph) -> str:
    """Canonical SMILES for ``g`` (root and tie-breaks from canonical ranks)."""
    from .canon import canonical_ranks

    return emit_smiles(g, canonical_ranks(g))
