"""Expanded biomolecular vocabulary, modality tokenizers and input formation."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from .molgraph.selfies import SelfiesString, alphabet, parse_selfies
from .protseq import CANONICAL_RESIDUES, ProteinSequence

SPECIAL_TOKENS = (
    "<SELFIES>", "</SELFIES>", "<FASTA>", "</FASTA>",
    "<MOL>", "</MOL>", "<PROT>", "</PROT>",
)
PROTEIN_PREFIX = "<p>"
PROTEIN_TOKENS = tuple(PROTEIN_PREFIX + r for r in CANONICAL_RESIDUES)

SPECIAL = "special"
MOLECULE = "molecule-token"
PROTEIN = "protein-token"
FEATURE_SLOT = "feature-slot"

_PAIRS = {"<MOL>": "</MOL>", "<PROT>": "</PROT>", "<SELFIES>": "</SELFIES>", "<FASTA>": "</FASTA>"}


class VocabError(ValueError):
    pass


class OutOfVocabulary(VocabError):
    def __init__(self, token: str, position: int):
        self.token, self.position = token, position
        super().__init__(f"token {token!r} at position {position} is not in the vocabulary")


class UnknownId(VocabError):
    def __init__(self, token_id: int, position: int):
        self.token_id, self.position = token_id, position
        super().__init__(f"id {token_id} at position {position} is not in the vocabulary")


class FormationError(VocabError):
    pass


def token_class(token: str) -> Optional[str]:
    """Which class a token string belongs to, or None."""
    if token in SPECIAL_TOKENS:
        return SPECIAL
    if token.startswith(PROTEIN_PREFIX):
        return PROTEIN if token in PROTEIN_TOKENS else None
    if len(token) > 2 and token[0] == "[" and token[-1] == "]" and "[" not in token[1:-1] and "]" not in token[1:-1]:
        return MOLECULE
    return None


class Vocabulary:
    """Bijective token/id table; ids are positions in the token list."""

    def __init__(self, tokens: Iterable[str]):
        self._tokens: Tuple[str, ...] = tuple(tokens)
        self._ids: Dict[str, int] = {}
        for i, t in enumerate(self._tokens):
            if token_class(t) is None:
                raise VocabError(f"token {t!r} (id {i}) is not special, molecule or protein")
            if t in self._ids:
                raise VocabError(f"duplicate token {t!r} at ids {self._ids[t]} and {i}")
            self._ids[t] = i

    @classmethod
    def default(cls, molecule_tokens: Optional[Iterable[str]] = None) -> "Vocabulary":
        mol = list(molecule_tokens) if molecule_tokens is not None else alphabet()
        return cls([*SPECIAL_TOKENS, *PROTEIN_TOKENS, *mol])

    @classmethod
    def load(cls, path: Union[str, Path]) -> "Vocabulary":
        text = Path(path).read_text(encoding="utf-8")
        return cls(line for line in text.split("\n") if line)

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text("".join(t + "\n" for t in self._tokens), encoding="utf-8")

    def with_tokens(self, tokens: Iterable[str]) -> "Vocabulary":
        """New vocabulary with unseen tokens appended (existing ids unchanged)."""
        extra = []
        for t in tokens:
            if t not in self._ids and t not in extra:
                extra.append(t)
        return Vocabulary([*self._tokens, *extra]) if extra else self

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._ids

    @property
    def tokens(self) -> Tuple[str, ...]:
        return self._tokens

    def token_to_id(self, token: str) -> int:
        try:
            return self._ids[token]
        except KeyError:
            raise OutOfVocabulary(token, 0) from None

    def id_to_token(self, token_id: int) -> str:
        if not isinstance(token_id, int) or not 0 <= token_id < len(self._tokens):
            raise UnknownId(token_id, 0)
        return self._tokens[token_id]

    def tokens_of(self, kind: str) -> List[str]:
        return [t for t in self._tokens if token_class(t) == kind]


def tokenize_molecule(s: Union[SelfiesString, str], vocab: Vocabulary) -> List[int]:
    """One id per SELFIES bracket token."""
    if isinstance(s, str):
        s = parse_selfies(s)
    ids = []
    for pos, tok in enumerate(s.tokens):
        if tok not in vocab:
            raise OutOfVocabulary(tok, pos)
        ids.append(vocab.token_to_id(tok))
    return ids


def tokenize_protein(p: Union[ProteinSequence, str], vocab: Vocabulary) -> List[int]:
    if isinstance(p, str):
        p = ProteinSequence(p)
    out = []
    for pos, r in enumerate(p.residues):
        tok = PROTEIN_PREFIX + r
        if tok not in vocab:
            raise OutOfVocabulary(tok, pos)
        out.append(vocab.token_to_id(tok))
    return out


def detokenize(ids: Sequence[int], vocab: Vocabulary, strip_protein_prefix: bool = True) -> str:
    """Concatenate tokens; protein tokens lose their ``<p>`` prefix by default."""
    parts = []
    for pos, i in enumerate(ids):
        try:
            tok = vocab.id_to_token(i)
        except UnknownId:
            raise UnknownId(i, pos) from None
        if strip_protein_prefix and token_class(tok) == PROTEIN:
            tok = tok[len(PROTEIN_PREFIX):]
        parts.append(tok)
    return "".join(parts)


@dataclass(frozen=True)
class Segment:
    kind: str
    payload: Union[str, int]


@dataclass(frozen=True)
class FormedInput:
    segments: Tuple[Segment, ...]

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        stack: List[str] = []
        for i, seg in enumerate(self.segments):
            if seg.kind == SPECIAL:
                tok = seg.payload
                if tok in _PAIRS:
                    if stack:
                        raise FormationError(f"segment {i}: {tok} opened inside {stack[-1]}")
                    stack.append(tok)  # type: ignore[arg-type]
                elif tok in _PAIRS.values():
                    if not stack or _PAIRS[stack[-1]] != tok:
                        raise FormationError(f"segment {i}: unmatched {tok}")
                    stack.pop()
                else:
                    raise FormationError(f"segment {i}: unknown special token {tok!r}")
            elif seg.kind == FEATURE_SLOT:
                if not stack or stack[-1] not in ("<MOL>", "<PROT>"):
                    raise FormationError(f"segment {i}: feature slot outside <MOL>/<PROT>")
                if not isinstance(seg.payload, int) or seg.payload < 1:
                    raise FormationError(f"segment {i}: feature slot size must be a positive int")
            elif seg.kind == MOLECULE:
                if stack != ["<SELFIES>"]:
                    raise FormationError(f"segment {i}: molecule token outside <SELFIES>")
            elif seg.kind == PROTEIN:
                if stack != ["<FASTA>"]:
                    raise FormationError(f"segment {i}: protein token outside <FASTA>")
            else:
                raise FormationError(f"segment {i}: unknown kind {seg.kind!r}")
        if stack:
            raise FormationError(f"unclosed {stack[-1]}")

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps({"kind": s.kind, "payload": s.payload}, sort_keys=True, ensure_ascii=False) + "\n"
            for s in self.segments
        )

    @classmethod
    def from_jsonl(cls, text: str) -> "FormedInput":
        segs = []
        for line in text.splitlines():
            if line.strip():
                obj = json.loads(line)
                segs.append(Segment(obj["kind"], obj["payload"]))
        return cls(tuple(segs))

    def token_ids(self, vocab: Vocabulary) -> List[Optional[int]]:
        """Ids per position; each feature-slot expands to ``payload`` ``None`` entries."""
        out: List[Optional[int]] = []
        for s in self.segments:
            if s.kind == FEATURE_SLOT:
                out.extend([None] * int(s.payload))
            else:
                out.append(vocab.token_to_id(str(s.payload)))
        return out


def form_input(entity: Union[SelfiesString, ProteinSequence, str],
               include_features: bool = True, n_q: int = 8,
               kind: Optional[str] = None) -> FormedInput:
    """Lay out one biomolecule for the language model.

    Molecules give ``<MOL> slot(1+n_q) </MOL> <SELFIES> tokens </SELFIES>``;
    proteins use ``<PROT>``/``<FASTA>`` instead. A plain string is read as
    SELFIES if it starts with ``[`` unless ``kind`` ("molecule" or
    "protein") says otherwise.
    """
    if include_features and n_q < 1:
        raise FormationError("n_q must be at least 1 when features are included")
    if isinstance(entity, str):
        if kind is None:
            kind = "molecule" if entity.startswith("[") else "protein"
        entity = parse_selfies(entity) if kind == "molecule" else ProteinSequence(entity)
    segs: List[Segment] = []
    if isinstance(entity, SelfiesString):
        outer, inner = ("<MOL>", "</MOL>"), ("<SELFIES>", "</SELFIES>")
        body = [Segment(MOLECULE, t) for t in entity.tokens]
    elif isinstance(entity, ProteinSequence):
        outer, inner = ("<PROT>", "</PROT>"), ("<FASTA>", "</FASTA>")
        body = [Segment(PROTEIN, PROTEIN_PREFIX + r) for r in entity.residues]
    else:
        raise TypeError(f"cannot form input from {type(entity).__name__}")
    if include_features:
        segs += [Segment(SPECIAL, outer[0]), Segment(FEATURE_SLOT, 1 + n_q), Segment(SPECIAL, outer[1])]
    segs += [Segment(SPECIAL, inner[0]), *body, Segment(SPECIAL, inner[1])]
    return FormedInput(tuple(segs))
