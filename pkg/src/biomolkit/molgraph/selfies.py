"""SELFIES tokenization, robust decoding and encoding.

The decoder follows the version-2 derivation rules: every sequence of known
tokens derives a molecule, with bond orders clipped by the remaining bonding
capacity of the atom being extended. Branch and ring tokens read the
following one to three tokens as a base-16 index.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from . import elements
from .errors import (
    CharacterOutsideBracket,
    EmptyInput,
    SelfiesEncodingError,
    UnbalancedBracket,
    UnknownToken,
    UnsupportedElement,
)
from .graph import Atom, Bond, MolecularGraph

INDEX_ALPHABET = (
    "[C]", "[Ring1]", "[Ring2]",
    "[Branch1]", "[=Branch1]", "[#Branch1]",
    "[Branch2]", "[=Branch2]", "[#Branch2]",
    "[O]", "[N]", "[=N]", "[=C]", "[#C]", "[S]", "[P]",
)
INDEX_CODE = {tok: i for i, tok in enumerate(INDEX_ALPHABET)}
INDEX_BASE = len(INDEX_ALPHABET)

_BOND_CHAR = {"": 1, "=": 2, "#": 3}
_BOND_PREFIX = {1: "", 2: "=", 3: "#"}

_ATOM_RE = re.compile(r"^\[([=#]?)([A-Z][a-z]?)(?:H(\d))?(?:([+-])(\d))?\]$")
_BRANCH_RE = re.compile(r"^\[([=#]?)Branch([123])\]$")
_RING_RE = re.compile(r"^\[([=#]?)Ring([123])\]$")


@dataclass(frozen=True)
class SelfiesString:
    tokens: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise EmptyInput("SELFIES token list is empty")

    def __str__(self) -> str:
        return "".join(self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


def parse_selfies(text: str) -> SelfiesString:
    """Split a SELFIES string into bracket tokens.

    >>> parse_selfies("[C][=C][F]").tokens
    ('[C]', '[=C]', '[F]')
    """
    if not text:
        raise EmptyInput("empty SELFIES string")
    tokens = []
    start = None
    for pos, ch in enumerate(text):
        if ch == "[":
            if start is not None:
                raise UnbalancedBracket("nested '['", pos)
            start = pos
        elif ch == "]":
            if start is None:
                raise UnbalancedBracket("stray ']'", pos)
            tokens.append(text[start:pos + 1])
            start = None
        elif start is None:
            raise CharacterOutsideBracket(ch, pos)
    if start is not None:
        raise UnbalancedBracket("unclosed '['", start)
    return SelfiesString(tuple(tokens))


# Token classification ------------------------------------------------------

@dataclass(frozen=True)
class _AtomTok:
    order: int
    element: str
    h: Optional[int]
    charge: int

    @property
    def capacity(self) -> int:
        return elements.bonding_capacity(self.element, self.charge) - (self.h or 0)


@dataclass(frozen=True)
class _BranchTok:
    order: int
    length: int


@dataclass(frozen=True)
class _RingTok:
    order: int
    length: int


_Tok = Union[_AtomTok, _BranchTok, _RingTok]
_CLASSIFY_CACHE: Dict[str, _Tok] = {}


def _classify(token: str) -> Optional[_Tok]:
    hit = _CLASSIFY_CACHE.get(token)
    if hit is not None:
        return hit
    out: Optional[_Tok] = None
    m = _BRANCH_RE.match(token)
    if m:
        out = _BranchTok(_BOND_CHAR[m.group(1)], int(m.group(2)))
    elif (m := _RING_RE.match(token)):
        out = _RingTok(_BOND_CHAR[m.group(1)], int(m.group(2)))
    elif (m := _ATOM_RE.match(token)):
        bond, element, h, sign, q = m.groups()
        charge = 0 if sign is None else int(q) * (1 if sign == "+" else -1)
        if (elements.is_supported(element)
                and elements.MIN_CHARGE <= charge <= elements.MAX_CHARGE
                and (sign is None or charge != 0)):
            tok = _AtomTok(_BOND_CHAR[bond], element, None if h is None else int(h), charge)
            if tok.capacity >= 0:
                out = tok
    if out is not None:
        _CLASSIFY_CACHE[token] = out
    return out


def is_known_token(token: str) -> bool:
    return _classify(token) is not None


def alphabet(charges: Iterable[int] = (0, 1, -1)) -> List[str]:
    """The supported derivation alphabet (no explicit-H atom tokens).

    Atom tokens are listed for every element, charge and bond prefix whose
    bond order fits the atom's capacity; ring and branch tokens for all three
    lengths follow.
    """
    out = []
    for el in elements.supported_elements():
        for q in charges:
            try:
                cap = elements.bonding_capacity(el, q)
            except KeyError:
                continue
            qs = "" if q == 0 else f"{q:+d}"
            for order, prefix in _BOND_PREFIX.items():
                if order <= cap:
                    out.append(f"[{prefix}{el}{qs}]")
    for n in (1, 2, 3):
        for prefix in ("", "=", "#"):
            out.append(f"[{prefix}Branch{n}]")
            out.append(f"[{prefix}Ring{n}]")
    return out


# Decoding ------------------------------------------------------------------

class _Derivation:
    def __init__(self, tokens: Sequence[str]):
        self.tokens = tokens
        self.pos = 0
        self.atoms: List[_AtomTok] = []
        self.bonds: Dict[Tuple[int, int], int] = {}
        self.used: List[int] = []
        self.rings: List[Tuple[int, int, int]] = []

    def next_token(self) -> Optional[str]:
        if self.pos >= len(self.tokens):
            return None
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def read_index(self, n: int) -> int:
        value = 0
        for _ in range(n):
            tok = self.next_token()
            value = value * INDEX_BASE + INDEX_CODE.get(tok, 0)
        return value

    def add_atom(self, tok: _AtomTok) -> int:
        self.atoms.append(tok)
        self.used.append(0)
        return len(self.atoms) - 1

    def add_bond(self, a: int, b: int, order: int) -> None:
        self.bonds[(min(a, b), max(a, b))] = order
        self.used[a] += order
        self.used[b] += order

    def derive(self, max_derive: float, state: int, prev: Optional[int]) -> int:
        n_derived = 0
        next_state: Optional[int] = state
        while n_derived < max_derive:
            token = self.next_token()
            if token is None:
                break
            n_derived += 1
            tok = _classify(token)
            if isinstance(tok, _BranchTok):
                if state <= 1:
                    next_state = state
                else:
                    branch_state = min(state - 1, tok.order)
                    next_state = state - branch_state
                    q = self.read_index(tok.length)
                    n_derived += tok.length + self.derive(q + 1, branch_state, prev)
            elif isinstance(tok, _RingTok):
                if state == 0:
                    next_state = state
                else:
                    order = min(tok.order, state)
                    left = state - order
                    next_state = left if left else None
                    q = self.read_index(tok.length)
                    n_derived += tok.length
                    assert prev is not None
                    self.rings.append((max(0, prev - (q + 1)), prev, order))
            else:
                assert isinstance(tok, _AtomTok)
                cap = tok.capacity
                order = 0 if state == 0 else min(tok.order, state, cap)
                left = cap - order
                next_state = left if left else None
                if order == 0:
                    if state == 0:
                        prev = self.add_atom(tok)
                else:
                    idx = self.add_atom(tok)
                    assert prev is not None
                    self.add_bond(prev, idx, order)
                    prev = idx
            if next_state is None:
                break
            state = next_state
        while n_derived < max_derive and self.next_token() is not None:
            n_derived += 1
        return n_derived

    def close_rings(self) -> None:
        for left, right, order in self.rings:
            if left == right:
                continue
            lfree = self.atoms[left].capacity - self.used[left]
            rfree = self.atoms[right].capacity - self.used[right]
            if lfree <= 0 or rfree <= 0:
                continue
            order = min(order, lfree, rfree)
            key = (min(left, right), max(left, right))
            if key in self.bonds:
                old = self.bonds[key]
                new = min(old + order, 3)
                self.bonds[key] = new
                self.used[left] += new - old
                self.used[right] += new - old
            else:
                self.add_bond(left, right, order)

    def graph(self) -> MolecularGraph:
        atoms = []
        for i, tok in enumerate(self.atoms):
            h = tok.h
            if h is None:
                # bare-atom semantics: only neutral organic-subset atoms get implicit H
                if tok.charge == 0 and tok.element in elements.ORGANIC_SUBSET:
                    h = elements.default_hydrogens(tok.element, 0, self.used[i])
                else:
                    h = 0
            atoms.append(Atom(tok.element, tok.charge, h, False))
        bonds = [Bond(a, b, o) for (a, b), o in sorted(self.bonds.items())]
        return MolecularGraph(tuple(atoms), tuple(bonds))


def decode_selfies(s: Union[SelfiesString, str]) -> MolecularGraph:
    """Derive a molecular graph from SELFIES tokens.

    Decoding is total over the supported alphabet: every token sequence gives
    a graph that passes the valence check. Unknown tokens raise
    ``UnknownToken`` before any derivation happens.
    """
    if isinstance(s, str):
        s = parse_selfies(s)
    for pos, token in enumerate(s.tokens):
        if _classify(token) is None:
            raise UnknownToken(token, pos)
    d = _Derivation(s.tokens)
    d.derive(float("inf"), 0, None)
    d.close_rings()
    return d.graph()


# Encoding ------------------------------------------------------------------

def _index_tokens(value: int) -> List[str]:
    if value < 0:
        raise ValueError(value)
    digits = []
    while True:
        digits.append(INDEX_ALPHABET[value % INDEX_BASE])
        value //= INDEX_BASE
        if not value:
            break
    if len(digits) > 3:
        raise SelfiesEncodingError("branch or ring span exceeds 3 index tokens")
    return digits[::-1]


def _atom_token(g: MolecularGraph, i: int, order: int) -> str:
    a = g.atoms[i]
    used = int(g.bond_order_sum(i))
    cap = elements.bonding_capacity(a.element, a.formal_charge)
    default_h = 0
    if a.formal_charge == 0 and a.element in elements.ORGANIC_SUBSET:
        default_h = elements.default_hydrogens(a.element, 0, used)
    h_part = ""
    if a.explicit_h != default_h:
        if a.explicit_h > 9:
            raise SelfiesEncodingError(f"atom {i} has more than 9 hydrogens")
        h_part = f"H{a.explicit_h}"
        cap -= a.explicit_h
    if used > cap:
        raise SelfiesEncodingError(
            f"atom {i} ({a.element}) carries {used} bonds but SELFIES allows {cap}")
    q = "" if a.formal_charge == 0 else f"{a.formal_charge:+d}"
    return f"[{_BOND_PREFIX[order]}{a.element}{h_part}{q}]"


def encode_selfies(g: MolecularGraph, order: Optional[Sequence[int]] = None) -> SelfiesString:
    """Encode a connected graph as SELFIES.

    Aromatic bonds are kekulized first. ``order`` ranks atoms for traversal
    (lowest rank is the root, neighbours visited in rank order); canonical
    ranks are used when omitted.
    """
    from .canon import canonical_ranks
    from .valence import check_valence, kekulize

    if not g.atoms:
        raise SelfiesEncodingError("cannot encode an empty graph")
    for a in g.atoms:
        if not re.fullmatch(r"[A-Z][a-z]?", a.element):
            raise UnsupportedElement(f"element {a.element!r} has no SELFIES token form")
    report = check_valence(g)
    if not report.valid:
        raise SelfiesEncodingError(f"graph fails valence check: {report.violations[0]}")
    if len(g.components()) > 1:
        raise SelfiesEncodingError("disconnected graphs are not supported")
    g = kekulize(g)
    rank = list(order) if order is not None else canonical_ranks(g)

    root = min(range(len(g.atoms)), key=lambda i: rank[i])
    visit_index: Dict[int, int] = {}
    children: Dict[int, List[int]] = {}
    pending: List[Tuple[int, Optional[int]]] = [(root, None)]
    while pending:
        u, parent = pending.pop()
        if u in visit_index:
            continue
        visit_index[u] = len(visit_index)
        children[u] = []
        if parent is not None:
            children[parent].append(u)
        nbrs = sorted((v for v, _ in g.neighbors(u)), key=lambda v: rank[v])
        for v in reversed(nbrs):
            if v not in visit_index:
                pending.append((v, u))
    # A vertex reached through several stacked parents keeps the first pop; the
    # children lists above therefore describe a genuine DFS tree.
    tree = {(min(p, c), max(p, c)) for p, cs in children.items() for c in cs}
    ring_closures: Dict[int, List[int]] = {u: [] for u in visit_index}
    for b in g.bonds:
        if (b.begin, b.end) in tree:
            continue
        later, earlier = sorted((b.begin, b.end), key=lambda x: visit_index[x], reverse=True)
        ring_closures[later].append(earlier)

    def emit(start: int, incoming: int) -> List[str]:
        out: List[str] = []
        cur, bond_in = start, incoming
        while True:
            out.append(_atom_token(g, cur, bond_in))
            for other in sorted(ring_closures[cur], key=lambda x: visit_index[x], reverse=True):
                order_ = int(g.bond_between(cur, other).order)  # type: ignore[union-attr]
                digits = _index_tokens(visit_index[cur] - visit_index[other] - 1)
                out.append(f"[{_BOND_PREFIX[order_]}Ring{len(digits)}]")
                out.extend(digits)
            kids = children[cur]
            for c in kids[:-1]:
                order_ = int(g.bond_between(cur, c).order)  # type: ignore[union-attr]
                sub = emit(c, order_)
                digits = _index_tokens(len(sub) - 1)
                out.append(f"[{_BOND_PREFIX[order_]}Branch{len(digits)}]")
                out.extend(digits)
                out.extend(sub)
            if not kids:
                return out
            nxt = kids[-1]
            bond_in = int(g.bond_between(cur, nxt).order)  # type: ignore[union-attr]
            cur = nxt

    return SelfiesString(tuple(emit(root, 1)))
