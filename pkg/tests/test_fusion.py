import json

import numpy as np
import pytest
import torch

from biomolkit.errors import DimensionMismatch
from biomolkit.fusion import (
    FEATURE_DIMS,
    ArchiveError,
    FusionConfig,
    FusionWeights,
    MissingCoordinates,
    NonFiniteWeights,
    extract_features,
    featurize,
    fuse,
    parameter_shapes,
    project_concat,
    read_archive,
    write_archive,
)
from biomolkit.molgraph import parse_smiles
from biomolkit.motif import MotifDictionary, default_dictionary_path
from biomolkit.protseq import ProteinSequence, parse_backbone
from oracles.fusion_ref import TorchFusion, prot_features, z_for_graph, z_for_structure

W42 = FusionWeights.seeded(42)


def _mol(fixture_molecules, name):
    m = fixture_molecules[name]
    return parse_smiles(m["smiles"]).with_coordinates(m["coordinates"])


def _protein(data_dir):
    return parse_backbone((data_dir / "fixture_backbone.txt").read_text(), "MRGDAKDELGAGAAGSKL")


def _randomized(w, seed):
    """Every tensor random, so biases and LayerNorm affine terms are exercised."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    return FusionWeights(w.config, {k: rng.standard_normal(t.shape) * 0.3 for k, t in w.tensors.items()})


def _random_coords(n, seed):
    return np.random.Generator(np.random.Philox(key=seed)).normal(0, 2, (n, 3)).tolist()


def test_featurize_examples():
    e = featurize(parse_smiles("C"), "mol2d")
    assert e.matrix.shape == (1, FEATURE_DIMS["mol2d"])
    assert e.matrix[0, 1] == 1 and e.matrix[0, -3] == 0
    p = featurize(ProteinSequence("MK"), "prot1d")
    assert p.matrix.shape[0] == 2 and not np.array_equal(p.matrix[0, :20], p.matrix[1, :20])
    with pytest.raises(MissingCoordinates):
        featurize(parse_smiles("CC"), "mol3d")
    with pytest.raises(MissingCoordinates):
        featurize(ProteinSequence("MK"), "prot3d")


def test_prot_features_match_oracle(data_dir):
    s = _protein(data_dir)
    a, b = prot_features(str(s.sequence), s.backbone)
    assert np.allclose(featurize(s, "prot1d").matrix, a.numpy(), atol=1e-12)
    assert np.allclose(featurize(s, "prot3d").matrix, b.numpy(), atol=1e-12)


def test_project_concat_shape():
    g = parse_smiles("CCOCN").with_coordinates(_random_coords(5, 1))
    h = project_concat(featurize(g, "mol2d"), featurize(g, "mol3d"), W42)
    assert h.shape == (10, 16)


def test_project_concat_constant_rows():
    # constant rows normalise to zero, GELU(0) = 0, so every row is the output bias
    bias = np.arange(16) / 10
    w = W42.replace(**{"fusion.proj.mol2d.fc1.b": np.zeros(32), "fusion.proj.mol2d.fc2.b": bias})
    from biomolkit.fusion.featurize import ModalityEmbedding

    a = ModalityEmbedding(np.full((3, FEATURE_DIMS["mol2d"]), 2.5), "mol2d")
    b = ModalityEmbedding(np.ones((3, FEATURE_DIMS["mol3d"])), "mol3d")
    h = project_concat(a, b, w)
    assert np.allclose(h[:3], bias, atol=1e-12)


def test_project_concat_matches_oracle():
    w = _randomized(W42, 5)
    g = parse_smiles("CC(=O)Nc1ccccc1").with_coordinates(_random_coords(10, 2))
    a, b = featurize(g, "mol2d"), featurize(g, "mol3d")
    ref = TorchFusion(w.tensors, 4, 2)
    expect = torch.cat([ref.project("mol2d", torch.tensor(a.matrix)), ref.project("mol3d", torch.tensor(b.matrix))])
    assert np.allclose(project_concat(a, b, w), expect.numpy(), atol=1e-10, rtol=0)


def test_project_concat_errors():
    g = parse_smiles("CCO").with_coordinates(_random_coords(3, 3))
    g2 = parse_smiles("CC").with_coordinates(_random_coords(2, 3))
    with pytest.raises(DimensionMismatch):
        project_concat(featurize(g, "mol2d"), featurize(g2, "mol3d"), W42)
    with pytest.raises(DimensionMismatch):
        project_concat(featurize(g, "mol2d"), featurize(g, "mol2d"), W42)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_fuse_matches_torch_oracle(seed):
    w = _randomized(W42, 100 + seed)
    g = parse_smiles("OC(=O)C1CCN(C)C1").with_coordinates(_random_coords(9, seed))
    got = extract_features(g, w, return_attention=True)
    z, attn = z_for_graph(w, g)
    assert np.allclose(got.z, z, atol=1e-10, rtol=0)
    assert set(got.attention) == set(attn)
    for k in attn:
        assert np.allclose(got.attention[k], attn[k], atol=1e-10, rtol=0)


def test_protein_matches_torch_oracle(data_dir):
    w = _randomized(W42, 77)
    d = MotifDictionary.load(default_dictionary_path())
    s = _protein(data_dir)
    assert np.allclose(extract_features(s, w, d).z, z_for_structure(w, s, d)[0], atol=1e-10, rtol=0)


def test_golden_seed42(data_dir, fixture_molecules):
    golden = json.loads((data_dir / "golden_z_seed42.json").read_text())
    for name in fixture_molecules:
        z = extract_features(_mol(fixture_molecules, name), W42).z
        assert np.allclose(z, np.array(golden[name]), atol=1e-6, rtol=0), name
    d = MotifDictionary.load(default_dictionary_path())
    z = extract_features(_protein(data_dir), W42, d).z
    assert np.allclose(z, np.array(golden["protein"]), atol=1e-6, rtol=0)


def test_shape_for_five_atoms():
    g = parse_smiles("CCCCO").with_coordinates(_random_coords(5, 9))
    assert extract_features(g, W42).z.shape == (9, 16)


def test_permutation_and_attention_rows():
    w = _randomized(W42, 9)
    rng = np.random.Generator(np.random.Philox(key=4))
    h = rng.standard_normal((14, 16))
    p = rng.standard_normal(16)
    a = fuse(h, p, w, return_attention=True)
    b = fuse(h[rng.permutation(14)], p, w)
    assert np.linalg.norm(a.z - b.z) / np.linalg.norm(a.z) < 1e-6
    for probs in a.attention.values():
        assert (probs >= 0).all()
        assert np.allclose(probs.sum(axis=-1), 1, atol=1e-6)


def test_bitwise_determinism(fixture_molecules):
    g = _mol(fixture_molecules, "phenol")
    assert np.array_equal(extract_features(g, W42).z, extract_features(g, W42).z)


def test_fuse_errors():
    with pytest.raises(DimensionMismatch):
        fuse(np.zeros((3, 8)), np.zeros(16), W42)
    with pytest.raises(DimensionMismatch):
        fuse(np.zeros((3, 16)), np.zeros(8), W42)
    with pytest.raises(NonFiniteWeights):
        fuse(np.full((3, 16), np.nan), np.zeros(16), W42)
    with pytest.raises(NonFiniteWeights):
        W42.replace(fusion__queries=np.full((8, 16), np.inf))
    with pytest.raises(DimensionMismatch):
        W42.replace(fusion__queries=np.zeros((7, 16)))


def test_protein_needs_dictionary(data_dir):
    s = _protein(data_dir)
    with pytest.raises(ValueError):
        extract_features(s, W42)
    with pytest.raises(DimensionMismatch):
        extract_features(s, W42, MotifDictionary(["MK", "RG"]))


def test_config_validation():
    with pytest.raises(ValueError):
        FusionConfig(d=10, n_heads=4)
    with pytest.raises(ValueError):
        FusionConfig(n_q=0)


def test_parameter_names_unique():
    names = [n for n, _, _ in parameter_shapes(FusionConfig())]
    assert len(names) == len(set(names))
    assert "motif.M_m" in names and "fusion.queries" in names


def test_seeded_is_reproducible():
    a, b = FusionWeights.seeded(7), FusionWeights.seeded(7)
    assert all(np.array_equal(a[k], b[k]) for k in a)
    assert not np.array_equal(a["fusion.queries"], FusionWeights.seeded(8)["fusion.queries"])


def test_archive_round_trip(tmp_path):
    cfg = FusionConfig(d=8, n_heads=2, n_layers=1, n_q=3, n_prot_motifs=5)
    w = FusionWeights.seeded(3, cfg)
    path = tmp_path / "w.ibmt"
    w.save(path)
    back = FusionWeights.load(path)
    assert back.config == cfg
    assert all(np.array_equal(w[k], back[k]) for k in w)
    assert path.read_text().startswith("IBMT v1\n")


def test_archive_errors(tmp_path):
    p = tmp_path / "bad.ibmt"
    p.write_text("nope\n")
    with pytest.raises(ArchiveError):
        read_archive(p)
    p.write_text("IBMT v1\ntensor x 2 2 2\n1 2 3\n")
    with pytest.raises(ArchiveError):
        read_archive(p)
    p.write_text("IBMT v1\ntensor x 2 2\n1 2\n")
    with pytest.raises(ArchiveError):
        read_archive(p)
    with pytest.raises(ArchiveError):
        write_archive(p, {"a b": np.zeros(2)})
    write_archive(p, {"s": np.array(2.5), "m": np.arange(6.0).reshape(2, 3)})
    t, _ = read_archive(p)
    assert t["s"].shape == () and t["m"][1, 2] == 5.0
