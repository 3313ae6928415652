"""Element table: allowed valences and SELFIES bonding capacities.

Valences are keyed by ``(element, formal_charge)``. Charged states that are
not listed explicitly fall back to the neutral set shifted by the charge
magnitude, which is crude but never produces a negative valence.
"""

from __future__ import annotations

from typing import Dict, Mapping, Optional, Tuple

MIN_CHARGE = -4
MAX_CHARGE = 4

HALOGENS = frozenset({"F", "Cl", "Br", "I"})

# Neutral-state valence sets. Order matters only for readability.
_NEUTRAL: Dict[str, Tuple[int, ...]] = {
    "B": (3,),
    "C": (4,),
    "N": (3, 5),
    "O": (2,),
    "P": (3, 5),
    "S": (2, 4, 6),
    "F": (1,),
    "Cl": (1,),
    "Br": (1,),
    "I": (1,),
    "Se": (2, 4, 6),
    "Si": (4,),
}

# Charged states, mostly assigned from the isoelectronic neutral element.
_CHARGED: Dict[Tuple[str, int], Tuple[int, ...]] = {
    ("B", 1): (2,),
    ("B", -1): (4,),
    ("C", 1): (3,),
    ("C", -1): (3,),
    ("N", 1): (4,),
    ("N", -1): (2,),
    ("O", 1): (3,),
    ("O", -1): (1,),
    ("P", 1): (4,),
    ("P", -1): (2, 4, 6),
    ("S", 1): (3, 5),
    ("S", -1): (1, 3, 5),
    ("Se", 1): (3, 5),
    ("Se", -1): (1, 3, 5),
    ("Si", 1): (3,),
    ("Si", -1): (3,),
    ("F", 1): (2,),
    ("F", -1): (0,),
    ("Cl", 1): (2,),
    ("Cl", -1): (0,),
    ("Br", 1): (2,),
    ("Br", -1): (0,),
    ("I", 1): (2,),
    ("I", -1): (0,),
}

# SELFIES derivation capacities that differ from max(valences). Neutral N is
# held to 3 so decoding agrees with the reference SELFIES constraints.
_CAPACITY_OVERRIDES: Dict[Tuple[str, int], int] = {
    ("N", 0): 3,
}

# Atomic numbers, used only to order element one-hots and ties.
ATOMIC_NUMBER: Dict[str, int] = {
    "B": 5, "C": 6, "N": 7, "O": 8, "F": 9, "Si": 14, "P": 15, "S": 16,
    "Cl": 17, "Se": 34, "Br": 35, "I": 53,
}

AROMATIC_ELEMENTS = frozenset({"B", "C", "N", "O", "P", "S", "Se"})
ORGANIC_SUBSET = frozenset({"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"})


def supported_elements() -> Tuple[str, ...]:
    """Element symbols in atomic-number order (extensions appended last)."""
    return tuple(sorted(_NEUTRAL, key=lambda e: (ATOMIC_NUMBER.get(e, 1000), e)))


def is_supported(element: str) -> bool:
    return element in _NEUTRAL


def allowed_valences(element: str, charge: int = 0) -> Tuple[int, ...]:
    """Allowed total bond orders (hydrogens included) for an atom state."""
    if element not in _NEUTRAL:
        raise KeyError(element)
    if charge == 0:
        return _NEUTRAL[element]
    if (element, charge) in _CHARGED:
        return _CHARGED[(element, charge)]
    shifted = sorted({v - abs(charge) for v in _NEUTRAL[element] if v - abs(charge) >= 0})
    return tuple(shifted) or (0,)


def bonding_capacity(element: str, charge: int = 0) -> int:
    """Maximum number of bonds the SELFIES derivation may attach."""
    override = _CAPACITY_OVERRIDES.get((element, charge))
    if override is not None:
        return override
    return max(allowed_valences(element, charge))


def default_hydrogens(element: str, charge: int, bond_order_sum: int) -> int:
    """Implicit H count: fill up to the lowest allowed valence >= current."""
    for v in allowed_valences(element, charge):
        if v >= bond_order_sum:
            return v - bond_order_sum
    return 0


def aromatic_default_hydrogens(element: str, charge: int, sigma_sum: int) -> int:
    """Implicit H for an aromatic organic-subset atom (one pi bond assumed)."""
    lowest = allowed_valences(element, charge)[0]
    return max(0, lowest - (sigma_sum + 1))


def register_element(
    symbol: str,
    valences: Tuple[int, ...],
    *,
    atomic_number: Optional[int] = None,
    charged: Optional[Mapping[int, Tuple[int, ...]]] = None,
) -> None:
    """Add an element to the extension table.

    Meant to be called once at start-up; the table is process-global.
    """
    if not symbol or not symbol[0].isupper() or not symbol.isalpha():
        raise ValueError(f"bad element symbol {symbol!r}")
    if not valences or any(v < 0 for v in valences):
        raise ValueError("valences must be non-negative and non-empty")
    _NEUTRAL[symbol] = tuple(sorted(valences))
    if atomic_number is not None:
        ATOMIC_NUMBER[symbol] = atomic_number
    for q, vals in (charged or {}).items():
        _CHARGED[(symbol, q)] = tuple(sorted(vals))
