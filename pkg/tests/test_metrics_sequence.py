import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biomolkit.metrics import (
    SubstitutionMatrix, blosum45, blosum_substitution, identity,
    levenshtein, levenshtein_matrix, sw_alignment, sw_score,
)
from biomolkit.metrics import sequence as seqmod
from biomolkit.metrics.sequence import MatrixFormatError, sw_score_many
from biomolkit.protseq import CANONICAL_RESIDUES
from oracles.edit import enumerate_local_score, levenshtein_table, local_alignment_table

words = st.text(alphabet="ACGT", max_size=12)


@pytest.fixture(scope="module")
def lev_small():
    return levenshtein_table("ab", 5)


@pytest.fixture(scope="module")
def local_small():
    return local_alignment_table("AC", 5)


def test_levenshtein_against_table(lev_small):
    strings, table = lev_small
    got = levenshtein_matrix(strings, strings)
    assert np.array_equal(got, table)
    assert levenshtein("kitten", "sitting") == 3


def test_levenshtein_matrix_shape():
    m = levenshtein_matrix(["a", "abc"], ["", "ab", "xyz"])
    assert m.shape == (2, 3)
    assert m.tolist() == [[1, 1, 3], [3, 1, 3]]


def test_sw_against_table(local_small):
    strings, table = local_small
    for i, a in enumerate(strings):
        got = sw_score_many(a, strings)
        assert np.array_equal(got, table[i])


def test_sw_against_enumeration():
    rng = random.Random(3)
    for _ in range(150):
        a = "".join(rng.choice("ACG") for _ in range(rng.randint(0, 4)))
        b = "".join(rng.choice("ACG") for _ in range(rng.randint(0, 4)))
        assert sw_score(a, b) == enumerate_local_score(a, b)


def test_sw_long_path_matches_short_path():
    rng = random.Random(9)
    a = "".join(rng.choice("ACDE") for _ in range(80))
    b = "".join(rng.choice("ACDE") for _ in range(90))
    scalar = seqmod.sw_score(a[:60], b)
    assert scalar == sw_score_many(a[:60], [b])[0]
    assert sw_score(a, b) == sw_score_many(b, [a])[0]


def test_sw_alignment_values():
    assert sw_alignment("MKTAYIAK", "MKTAYIAK") == 100.0
    assert sw_alignment("AAAA", "CCCC") == 0.0
    assert sw_alignment("", "") == 0.0
    assert sw_alignment("ACGT", "AC") == pytest.approx(2 * 2 / 6 * 100)


def test_identity_values():
    assert identity("AAB", "AAC") == pytest.approx(66.6667, abs=1e-3)
    assert identity("MK", "MKVL") == pytest.approx(2 * 2 / 6 * 100)
    assert identity("", "") == 0.0


def test_blosum_diagonal_from_file():
    m = blosum45()
    text = seqmod.blosum45_path().read_text()
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    header = rows[0]
    for row in rows[1:]:
        if row[0] in CANONICAL_RESIDUES:
            assert m.diagonal(row[0]) == int(row[1 + header.index(row[0])])
    assert m.diagonal("W") == 15
    assert m("A", "R") == -2


def test_blosum_substitution_naive():
    rng = random.Random(4)
    m = blosum45()
    for _ in range(50):
        a = "".join(rng.choice(CANONICAL_RESIDUES) for _ in range(rng.randint(1, 20)))
        b = "".join(rng.choice(CANONICAL_RESIDUES) for _ in range(rng.randint(1, 20)))
        total = 0
        for k in range(min(len(a), len(b))):
            total += m(a[k], b[k])
        assert blosum_substitution(a, b) == pytest.approx(2 * total / (len(a) + len(b)))


def test_matrix_errors():
    with pytest.raises(MatrixFormatError):
        SubstitutionMatrix.parse("")
    with pytest.raises(MatrixFormatError):
        SubstitutionMatrix.parse("A R\nA 1\n")
    with pytest.raises(MatrixFormatError):
        SubstitutionMatrix.parse("A R\nA 1 x\nR 0 1\n")
    with pytest.raises(MatrixFormatError):
        SubstitutionMatrix.parse("A R\nA 1 0\nR 0 1\n")


def test_blosum_override(tmp_path, monkeypatch):
    text = seqmod.blosum45_path().read_text().replace(" 15 ", " 99 ", 1)
    (tmp_path / "BLOSUM45").write_text(text)
    monkeypatch.setenv("IBM_DATA_DIR", str(tmp_path))
    monkeypatch.setattr(seqmod, "_BLOSUM45", None)
    assert seqmod.blosum45_path() == tmp_path / "BLOSUM45"
    assert any(v == 99 for v in seqmod.blosum45().scores.values())
    monkeypatch.setattr(seqmod, "_BLOSUM45", None)


@settings(max_examples=200, deadline=None)
@given(words, words)
def test_symmetry_and_bounds(a, b):
    assert levenshtein(a, b) == levenshtein(b, a)
    assert sw_score(a, b) == sw_score(b, a)
    assert abs(len(a) - len(b)) <= levenshtein(a, b) <= max(len(a), len(b))
    assert 0 <= sw_alignment(a, b) <= 100
    assert 0 <= identity(a, b) <= 100


@settings(max_examples=200, deadline=None)
@given(words, words, words)
def test_triangle_inequality(a, b, c):
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


@settings(max_examples=100, deadline=None)
@given(words, st.lists(words, max_size=6))
def test_sw_many_equals_scalar(a, others):
    assert sw_score_many(a, others).tolist() == [sw_score(a, o) for o in others]
