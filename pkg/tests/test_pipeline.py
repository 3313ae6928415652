import json
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from biomolkit.pipeline import (
    AllZero, InstructionRecord, ParseError, PipelineError, ValidationError, build_plan,
    load_plan, load_records, parse_records, sample_indices, sample_stream, stage_table, write_records,
)

CHEBI_DESC = ("The molecule is a phthalic acid monoester obtained by formal condensation of one of the "
              "carboxy groups of phthalic acid with the hydroxy group of pentanol. It has a role as a "
              "xenobiotic metabolite, an anti-estrogen and a rat metabolite. It derives from a pentan-1-ol.")

STAGE2 = {
    "ChEBI-caption": 0.1, "ChEBI-generation": 0.1,
    "SwissProt-Name": 0.1, "SwissProt-Family": 0.1, "SwissProt-Location": 0.1,
    "SwissProt-Function": 0.1, "SwissProt-Description": 0.2,
    "BindingDB": 0.1, "Rhea": 0.1,
}

# registered stage-1 ratios
STAGE1 = {
    "PubChem-caption": "0.1", "PubChem-generation": "0.1",
    "ChEBI-caption": "0.001", "ChEBI-generation": "0.001",
    "TrEMBL-Name": "0.05", "TrEMBL-Family": "0.05", "TrEMBL-Location": "0.05", "TrEMBL-Function": "0.05",
    "TrEMBL-Description": "0.1",
    "SwissProt-Name": "0.05", "SwissProt-Family": "0.05", "SwissProt-Location": "0.05",
    "SwissProt-Function": "0.05", "SwissProt-Description": "0.1",
    "BindingDB": "0.05", "Rhea": "0.05",
}


def chebi_record(entries):
    return {
        "task_id": "ChEBI-generation",
        "instruction": "Generate a molecule in SELFIES that fits the provided description.",
        "input_kind": "text", "input": CHEBI_DESC,
        "output_kind": "selfies", "output": entries["molecules"]["chebi_out"],
    }


def test_stage2_weights_exact():
    plan = build_plan(2)
    assert dict(zip(plan.task_ids, plan.weights)) == STAGE2
    assert sum(Fraction(r) for r in ("0.1",) * 8 + ("0.2",)) == 1


def test_stage1_weights():
    total = sum(Fraction(v) for v in STAGE1.values())
    assert total == Fraction("0.902")
    plan = build_plan(1)
    assert set(plan.task_ids) == set(STAGE1)
    for t, v in STAGE1.items():
        assert plan.weight(t) == float(Fraction(v) / total)
    assert plan.weight("PubChem-caption") == pytest.approx(0.1 / 0.902, abs=1e-15)


def test_single_and_zero():
    assert build_plan(1, [("X", 5)]).weights == (1.0,)
    with pytest.raises(AllZero):
        build_plan(1, [("X", 0), ("Y", 0)])
    with pytest.raises(AllZero):
        build_plan(1, [])
    with pytest.raises(PipelineError):
        build_plan(1, [("X", -1)])
    with pytest.raises(PipelineError):
        build_plan(2, [("PubChem-caption", 0.1)])
    with pytest.raises(PipelineError):
        build_plan(3)
    with pytest.raises(PipelineError):
        stage_table(0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 1e6, allow_nan=False), min_size=1, max_size=20).filter(lambda xs: any(x > 0 for x in xs)))
def test_weights_sum_to_one(ratios):
    plan = build_plan(1, [(f"t{i}", r) for i, r in enumerate(ratios)])
    assert abs(sum(plan.weights) - 1.0) < 1e-12
    assert all(w >= 0 for w in plan.weights)


def test_sampling_basics():
    plan = build_plan(2)
    assert sample_stream(plan, 1, 0) == []
    one = build_plan(1, [("only", 3)])
    assert set(sample_stream(one, 5, 500)) == {"only"}
    assert sample_stream(plan, 42, 1000) == sample_stream(plan, 42, 1000)
    assert sample_stream(plan, 42, 1000) != sample_stream(plan, 43, 1000)
    # a prefix of a longer stream is the shorter stream
    assert sample_stream(plan, 7, 100) == sample_stream(plan, 7, 300)[:100]
    with pytest.raises(PipelineError):
        sample_indices(plan, 1, -1)


def test_zero_weight_task_never_drawn():
    plan = build_plan(1, [("a", 0), ("b", 1), ("c", 0)])
    assert set(sample_stream(plan, 3, 10000)) == {"b"}


def test_empirical_frequencies():
    plan = build_plan(2)
    counts = Counter(sample_stream(plan, 2024, 200_000))
    for t, w in zip(plan.task_ids, plan.weights):
        assert abs(counts[t] / 200_000 - w) < 0.005


def test_plan_round_trip(tmp_path):
    plan = build_plan(1)
    p = tmp_path / "plan.json"
    p.write_text(plan.to_json(seed=9))
    back, seed = load_plan(p)
    assert back == plan and seed == 9
    d = json.loads(plan.to_json())
    assert set(d) == {"stage", "entries"}


def test_chebi_record(tmp_path, entries):
    p = tmp_path / "r.jsonl"
    p.write_text(json.dumps(chebi_record(entries)) + "\n")
    recs = load_records(p, "ChEBI-generation")
    assert len(recs) == 1
    assert recs[0].instruction.startswith("Generate a molecule in SELFIES")
    assert recs[0].output_kind == "selfies"
    out = tmp_path / "w.jsonl"
    write_records(out, recs)
    assert load_records(out) == recs


def test_invalid_fasta_payload():
    rec = {"task_id": "SwissProt-Name", "instruction": "Name it.", "input_kind": "fasta", "input": "MKZ",
           "output_kind": "text", "output": "x"}
    ok = dict(rec, input="MKV")
    with pytest.raises(ValidationError) as e:
        parse_records(json.dumps(ok) + "\n" + json.dumps(rec))
    assert e.value.index == 1


def test_empty_and_parse_errors(tmp_path):
    p = tmp_path / "e.jsonl"
    p.write_text("")
    assert load_records(p) == []
    with pytest.raises(ParseError) as e:
        parse_records('\n{"task_id": 1}\n')
    assert e.value.line == 2
    with pytest.raises(ParseError) as e:
        parse_records("[1, 2]")
    assert e.value.line == 1
    with pytest.raises(ParseError):
        parse_records("{oops")


def test_direction_and_task_mismatch(entries):
    rec = chebi_record(entries)
    with pytest.raises(ValidationError):
        parse_records(json.dumps(dict(rec, input_kind="selfies", output_kind="text",
                                      input=rec["output"], output=rec["input"])))
    with pytest.raises(ValidationError):
        parse_records(json.dumps(rec), task_id="Rhea")
    with pytest.raises(ValidationError):
        parse_records(json.dumps(dict(rec, output="[C][Branch1")))
    # task_id may be supplied by the caller
    bare = {k: v for k, v in rec.items() if k != "task_id"}
    assert parse_records(json.dumps(bare), task_id="ChEBI-generation")[0].task_id == "ChEBI-generation"


def test_record_json():
    r = InstructionRecord("t", "i", "text", "a", "text", "b")
    assert json.loads(r.to_json())["output"] == "b"
