import csv
import io
import itertools
import json
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biomolkit.errors import LengthMismatch
from biomolkit.metrics import exact_match, molecule_validity, molgen_report, protgen_report, tanimoto
from biomolkit.molgraph import parse_smiles
from biomolkit.motif import ecfp, fcfp
from oracles.graphs import isomorphic



def popcount_tanimoto(a, b):
    inter = sum(1 for x, y in zip(a, b) if x and y)
    union = sum(1 for x, y in zip(a, b) if x or y)
    return 1.0 if union == 0 else float(Fraction(inter, union))


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 64).flatmap(lambda n: st.tuples(
    st.lists(st.booleans(), min_size=n, max_size=n), st.lists(st.booleans(), min_size=n, max_size=n))))
def test_tanimoto_popcount_oracle(pair):
    a, b = pair
    assert tanimoto(a, b) == popcount_tanimoto(a, b)
    assert tanimoto(a, b) == tanimoto(b, a)
    assert 0.0 <= tanimoto(a, b) <= 1.0
    assert tanimoto(a, a) == 1.0


def test_tanimoto_edges():
    assert tanimoto([0, 0], [0, 0]) == 1.0
    assert tanimoto([1, 0], [0, 1]) == 0.0
    with pytest.raises(LengthMismatch):
        tanimoto([1], [1, 0])


def test_tanimoto_accepts_motif_vectors():
    g = parse_smiles("CCO")
    assert tanimoto(fcfp(g), fcfp(g)) == 1.0
    assert tanimoto(ecfp(g), ecfp(parse_smiles("OCC"))) == 1.0


def test_exact_match_against_isomorphism(corpus):
    small = [s for s in dict.fromkeys(corpus) if len(parse_smiles(s).atoms) <= 6]
    graphs = [parse_smiles(s) for s in small]
    rng = random.Random(7)
    for g1, g2 in itertools.combinations(graphs, 2):
        assert exact_match(g1, g2) == isomorphic(g1, g2)
    for g in graphs:
        perm = list(range(len(g.atoms)))
        rng.shuffle(perm)
        assert exact_match(g, g.permuted(perm))


def test_validity_mixed_list():
    texts = ["CCO", "c1ccccc1", "C(", "C(C)(C)(C)(C)C", "[NH4+]", "C1CC", "O=C=O", "", "N#N", "CX"]
    # valid: CCO, benzene, ammonium, CO2, N2
    assert molecule_validity(texts) == 50.0
    assert molecule_validity([]) == 0.0


def test_molgen_report_values():
    refs = ["CCO", "c1ccccc1O", "CC(=O)O"]
    hyps = ["OCC", "c1ccccc1N", "C("]
    rep = molgen_report(refs, hyps)
    assert rep.values("EXACT") == [100.0, 0.0, 0.0]
    assert rep.values("Validity") == [100.0, 100.0, 0.0]
    assert rep.values("Levenshtein") == [2.0, 1.0, 5.0]
    assert rep.values("Morgan FTS")[0] == 1.0
    assert 0 < rep.values("Morgan FTS")[1] < 1
    assert rep["EXACT"] == pytest.approx(100 / 3)
    assert 0 <= rep["BLEU"] <= 100


def test_molgen_selfies(entries):
    s = entries["molecules"]["pubchem"]
    rep = molgen_report([s], [s], fmt="selfies")
    assert rep["EXACT"] == 100.0 and rep["Validity"] == 100.0 and rep["BLEU"] == 100.0


def test_protgen_identical(entries):
    seqs = [entries["proteins"]["pretrain"], "MKTAYIAKQR"]
    rep = protgen_report(seqs, seqs)
    assert rep["Identity"] == 100.0
    assert rep["Alignment"] == 100.0
    assert rep["Validity"] == 100.0


def test_protgen_invalid_generation():
    rep = protgen_report(["MKV", "MKV"], ["MKV", "MK1"])
    assert rep["Validity"] == 50.0
    assert rep.values("Identity") == [100.0, 0.0]


def test_report_exports():
    rep = molgen_report(["CCO", "CCN"], ["CCO", "CCC"], ids=[("r1", "h1"), ("r2", "h2")])
    d = json.loads(rep.to_json())
    assert d["aggregates"]["EXACT"] == 50.0
    assert {p["ref_id"] for p in d["pairs"]} == {"r1", "r2"}
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    agg = {r["metric"]: float(r["value"]) for r in rows if r["ref_id"] == "*"}
    assert agg == pytest.approx(rep.aggregates)
    assert len(rows) == len(rep.aggregates) + len(rep.pairs)
    with pytest.raises(LengthMismatch):
        molgen_report(["C"], ["C"], ids=[])


def test_workers_deterministic(corpus):
    refs = corpus[:40]
    hyps = corpus[40:80]
    one = molgen_report(refs, hyps, workers=1)
    two = molgen_report(refs, hyps, workers=2)
    assert one.to_json() == two.to_json()
    p1 = protgen_report(["MKV" * 5] * 6, ["MKL" * 5] * 6, workers=1)
    p2 = protgen_report(["MKV" * 5] * 6, ["MKL" * 5] * 6, workers=2)
    assert p1.to_json() == p2.to_json()


def test_length_mismatch():
    with pytest.raises(LengthMismatch):
        molgen_report(["C"], [])
    assert np.isfinite(molgen_report(["C"], ["C"])["BLEU"])
