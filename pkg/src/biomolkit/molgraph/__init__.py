"""Molecular graphs, SELFIES and SMILES codecs, valence checks and canonical labels."""

from .canon import canonical_form, canonical_ranks
from .elements import (
    allowed_valences,
    bonding_capacity,
    register_element,
    supported_elements,
)
from .errors import (
    CharacterOutsideBracket,
    EmptyInput,
    InvalidGraph,
    MolGraphError,
    SelfiesEncodingError,
    SelfiesError,
    SmilesError,
    SmilesSyntaxError,
    UnbalancedBracket,
    UnclosedBranch,
    UnclosedRing,
    UnknownToken,
    UnsupportedElement,
    UnsupportedFeature,
)
from .graph import AROMATIC, Atom, Bond, MolecularGraph
from .selfies import SelfiesString, alphabet, decode_selfies, encode_selfies, is_known_token, parse_selfies
from .smiles import emit_smiles, parse_smiles, write_smiles
from .valence import ValenceReport, Violation, check_valence, fill_hydrogens, kekulize

__all__ = [
    "AROMATIC", "Atom", "Bond", "MolecularGraph", "SelfiesString",
    "parse_selfies", "decode_selfies", "encode_selfies", "alphabet", "is_known_token",
    "parse_smiles", "write_smiles", "emit_smiles",
    "canonical_form", "canonical_ranks",
    "check_valence", "kekulize", "fill_hydrogens", "ValenceReport", "Violation",
    "allowed_valences", "bonding_capacity", "register_element", "supported_elements",
    "MolGraphError", "InvalidGraph", "UnsupportedElement", "SelfiesError", "EmptyInput",
    "UnbalancedBracket", "CharacterOutsideBracket", "UnknownToken", "SelfiesEncodingError",
    "SmilesError", "SmilesSyntaxError", "UnclosedRing", "UnclosedBranch", "UnsupportedFeature",
]
