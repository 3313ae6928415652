import json
import subprocess
import sys

import numpy as np
import pytest

from biomolkit.cli import main
from biomolkit.fusion import FusionWeights, read_archive
from biomolkit.metrics import molgen_report, protgen_report
from biomolkit.molgraph import canonical_form, parse_smiles
from biomolkit.motif import fcfp
from biomolkit.pipeline import build_plan, sample_stream


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_validate_bad_smiles(tmp_path, capsys):
    p = write(tmp_path, "bad.smi", "C(\n")
    code, out, _ = run(capsys, "validate", "--format", "smiles", p)
    assert code == 1
    report = json.loads(out)
    assert report["invalid"][0]["line"] == 1
    assert report["validity"] == 0.0


def test_validate_ok(tmp_path, capsys, entries):
    p = write(tmp_path, "m.sf", "\n".join(entries["molecules"].values()) + "\n")
    code, out, _ = run(capsys, "validate", "--format", "selfies", p)
    assert code == 0 and json.loads(out)["validity"] == 100.0
    f = write(tmp_path, "p.fasta", ">a\nMKV\n>b\nMK1\n")
    code, out, _ = run(capsys, "validate", "--format", "fasta", f)
    assert code == 1


def test_protgen_identical(tmp_path, capsys):
    p = write(tmp_path, "r.fasta", ">a\nMKTAYIAKQR\n>b\nGAGAAGSKL\n")
    code, out, _ = run(capsys, "metrics", "protgen", p, p)
    assert code == 0
    agg = json.loads(out)["aggregates"]
    assert agg["Identity"] == 100.0 and agg["Alignment"] == 100.0


def test_protgen_invalid_hypothesis_counts(tmp_path, capsys):
    r = write(tmp_path, "r.fasta", ">a\nMKV\n>b\nMKV\n")
    h = write(tmp_path, "h.fasta", ">a\nMKV\n>b\nMK1\n")
    code, out, _ = run(capsys, "metrics", "protgen", r, h)
    assert code == 0 and json.loads(out)["aggregates"]["Validity"] == 50.0


def test_plan_stage2(capsys):
    code, out, _ = run(capsys, "plan", "--stage", "2")
    assert code == 0
    d = json.loads(out)
    assert abs(sum(e["weight"] for e in d["entries"]) - 1) < 1e-12
    assert {e["task_id"]: e["weight"] for e in d["entries"]} == dict(zip(build_plan(2).task_ids, build_plan(2).weights))
    assert all(e["weight"] == e["ratio"] for e in d["entries"])


def test_plan_table_and_sample(tmp_path, capsys):
    t = write(tmp_path, "t.json", json.dumps([{"task_id": "a", "ratio": 1}, {"task_id": "b", "ratio": 3}]))
    plan_path = tmp_path / "plan.json"
    assert run(capsys, "plan", "--stage", "1", "--table", t, "--seed", 5, "-o", plan_path)[0] == 0
    code, out, _ = run(capsys, "sample", "--plan", plan_path, "--seed", 5, "--n", 50)
    assert code == 0
    assert out.split() == sample_stream(build_plan(1, [("a", 1), ("b", 3)]), 5, 50)
    z = write(tmp_path, "z.json", json.dumps([{"task_id": "a", "ratio": 0}]))
    assert run(capsys, "plan", "--stage", "1", "--table", z)[0] == 1


def test_cli_matches_library(tmp_path, capsys, corpus):
    smi = corpus[:30]
    p = write(tmp_path, "c.smi", "\n".join(smi) + "\n")
    code, out, _ = run(capsys, "canon", p)
    assert code == 0
    assert out.split() == [canonical_form(parse_smiles(s)) for s in smi]
    code, out, _ = run(capsys, "fingerprint", p)
    assert out.split() == [fcfp(parse_smiles(s)).to_hex() for s in smi]
    h = write(tmp_path, "h.smi", "\n".join(corpus[30:60]) + "\n")
    code, out, _ = run(capsys, "metrics", "molgen", p, h)
    assert out == molgen_report(smi, corpus[30:60]).to_json() + "\n"
    code, out2, _ = run(capsys, "metrics", "molgen", p, h, "--workers", 2)
    assert out2 == out
    code, csv_out, _ = run(capsys, "metrics", "molgen", p, h, "--csv")
    assert csv_out == molgen_report(smi, corpus[30:60]).to_csv()
    f = write(tmp_path, "r.fasta", ">a\nMKTAYIAKQR\n")
    g = write(tmp_path, "g.fasta", ">a\nMKTAYLAKQ\n")
    out = run(capsys, "metrics", "protgen", f, g)[1]
    assert out == protgen_report(["MKTAYIAKQR"], ["MKTAYLAKQ"]).to_json() + "\n"


def test_tokenize_round_trip(tmp_path, capsys, entries):
    mols = write(tmp_path, "m.sf", "\n".join(entries["molecules"].values()) + "\n")
    ids = tmp_path / "ids.txt"
    assert run(capsys, "tokenize", "--kind", "molecule", mols, "-o", ids)[0] == 0
    code, out, _ = run(capsys, "detokenize", ids)
    assert code == 0 and out.split() == list(entries["molecules"].values())
    prots = write(tmp_path, "p.fasta", "".join(f">{k}\n{v}\n" for k, v in entries["proteins"].items()))
    pids = tmp_path / "pids.txt"
    assert run(capsys, "tokenize", "--kind", "protein", prots, "-o", pids)[0] == 0
    assert run(capsys, "detokenize", pids)[1].split() == list(entries["proteins"].values())


def test_motif_command(tmp_path, capsys):
    p = write(tmp_path, "p.fasta", ">x\nMRGDAKDELGAGAAGSKL\n>y\nAAAA\n")
    code, out, _ = run(capsys, "motif", p)
    rows = [json.loads(ln) for ln in out.splitlines()]
    assert code == 0 and rows[0]["header"] == "x"
    assert len(rows[0]["on"]) == 4 and rows[1]["on"] == []


def test_motif_dictionary_override(tmp_path, capsys, monkeypatch):
    write(tmp_path, "motifs.txt", "AAAA\n")
    monkeypatch.setenv("IBM_DATA_DIR", str(tmp_path))
    p = write(tmp_path, "p.fasta", ">y\nAAAA\n")
    rows = [json.loads(ln) for ln in run(capsys, "motif", p)[1].splitlines()]
    assert rows[0]["bits"] == "1"


def test_fuse_deterministic(tmp_path, capsys, fixture_molecules):
    w = tmp_path / "w.ibmt"
    assert run(capsys, "init-weights", "--seed", 42, "-o", w)[0] == 0
    w2 = tmp_path / "w2.ibmt"
    run(capsys, "init-weights", "--seed", 42, "-o", w2)
    assert w.read_bytes() == w2.read_bytes()
    mol = fixture_molecules["phenol"]
    coords = write(tmp_path, "xyz.txt", "\n".join(" ".join(map(str, c)) for c in mol["coordinates"]) + "\n")
    z1, z2 = tmp_path / "z1.ibmt", tmp_path / "z2.ibmt"
    assert run(capsys, "fuse", "--weights", w, "--molecule", mol["smiles"], "--coords", coords, "-o", z1)[0] == 0
    run(capsys, "fuse", "--weights", w, "--molecule", mol["smiles"], "--coords", coords, "-o", z2)
    assert z1.read_bytes() == z2.read_bytes()
    z = read_archive(z1)[0]["Z"]
    cfg = FusionWeights.load(w).config
    assert z.shape == (1 + cfg.n_q, cfg.d) and np.all(np.isfinite(z))
    fa = write(tmp_path, "p.fasta", ">p\nMRGDAK\n")
    bb = write(tmp_path, "bb.txt", "\n".join(" ".join(str(float(i + k)) for k in range(12)) for i in range(6)) + "\n")
    assert run(capsys, "fuse", "--weights", w, "--fasta", fa, "--backbone", bb, "-o", z2)[0] == 0
    assert read_archive(z2)[0]["Z"].shape == (1 + cfg.n_q, cfg.d)


def test_usage_errors(tmp_path, capsys):
    code, _, err = run(capsys, "validate", "--format", "smiles", tmp_path / "missing.smi")
    assert code == 2 and "usage:" in err and "validate" in err
    code, _, err = run(capsys, "metrics", "caption", tmp_path / "x")
    assert code == 2 and "usage:" in err
    code, _, err = run(capsys, "init-weights", "--seed", 1)
    assert code == 2 and "--out" in err
    code, _, err = run(capsys, "fingerprint", "--n-bits", 0, "x")
    assert code == 2 and "usage:" in err
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys)[0] == 2


def test_metrics_score_tables(tmp_path, capsys):
    rows = [{"target_id": "t", "vina": -9, "qed": 0.5, "sa": 0.7, "ref_vina": -8},
            {"target_id": "t", "vina": -8.18, "qed": 0.5, "sa": 0.7, "ref_vina": -8}]
    p = write(tmp_path, "d.jsonl", "".join(json.dumps(r) + "\n" for r in rows))
    code, out, _ = run(capsys, "metrics", "drug", p)
    assert code == 0 and json.loads(out)["aggregates"]["Success Rate"] == 50.0
    bad = write(tmp_path, "b.jsonl", '{"target_id": "t"}\n')
    assert run(capsys, "metrics", "drug", bad)[0] == 1


def test_caption_metrics(tmp_path, capsys):
    r = write(tmp_path, "r.txt", "the cat sat on the mat\n")
    code, out, _ = run(capsys, "metrics", "caption", r, r)
    assert code == 0 and json.loads(out)["aggregates"]["BLEU-4"] == pytest.approx(100.0)
    h = write(tmp_path, "h.txt", "a\nb\n")
    assert run(capsys, "metrics", "caption", r, h)[0] == 1


def test_console_entry_point(tmp_path):
    p = write(tmp_path, "bad.smi", "C(\n")
    proc = subprocess.run([sys.executable, "-m", "biomolkit.cli", "validate", "--format", "smiles", str(p)],
                          capture_output=True, text=True)
    assert proc.returncode == 1
    assert json.loads(proc.stdout)["invalid"][0]["line"] == 1
