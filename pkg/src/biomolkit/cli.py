"""Command-line interface.

Exit status: 0 on success, 1 when inputs fail validation, 2 on usage errors
(bad arguments, unreadable files).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence


EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None


def _lines(path: str) -> List[str]:
    return [ln.strip() for ln in _read_text(path).splitlines() if ln.strip()]


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _vocab(args):
    from .vocab import Vocabulary

    return Vocabulary.load(args.vocab) if args.vocab else Vocabulary.default()


# Subcommands ----------------------------------------------------------------

def cmd_tokenize(args) -> int:
    from .protseq import parse_fasta
    from .vocab import VocabError, tokenize_molecule, tokenize_protein

    vocab = _vocab(args)
    if args.kind == "molecule":
        items = _lines(args.input)
        if args.extend:
            from .molgraph import parse_selfies

            vocab = vocab.with_tokens(t for s in items for t in parse_selfies(s).tokens)
            if args.save_vocab:
                vocab.save(args.save_vocab)
        fn = tokenize_molecule
    else:
        items = [seq for _, seq in parse_fasta(_read_text(args.input))]
        fn = tokenize_protein
    out = []
    for n, item in enumerate(items, start=1):
        try:
            out.append(" ".join(map(str, fn(item, vocab))))
        except (VocabError, ValueError) as e:
            print(f"record {n}: {e}", file=sys.stderr)
            return EXIT_INVALID
    _emit("".join(line + "\n" for line in out), args.out)
    return EXIT_OK


def cmd_detokenize(args) -> int:
    from .vocab import UnknownId, detokenize

    vocab = _vocab(args)
    out = []
    for n, line in enumerate(_lines(args.input), start=1):
        try:
            ids = [int(x) for x in line.split()]
            out.append(detokenize(ids, vocab, strip_protein_prefix=not args.keep_prefix))
        except (UnknownId, ValueError) as e:
            print(f"line {n}: {e}", file=sys.stderr)
            return EXIT_INVALID
    _emit("".join(s + "\n" for s in out), args.out)
    return EXIT_OK


def _validate_items(fmt: str, text: str):
    """Yield (line, error or None) per item."""
    from .metrics.molecule import parse_molecule
    from .molgraph import MolGraphError, check_valence
    from .protseq import ProteinError, parse_fasta, validate_protein

    if fmt == "fasta":
        try:
            records = parse_fasta(text)
        except ProteinError as e:
            yield getattr(e, "line", 0) or 0, str(e)
            return
        for i, (h, seq) in enumerate(records, start=1):
            yield i, None if validate_protein(str(seq)) else "invalid residues"
        return
    for lineno, raw in enumerate(text.splitlines(), start=1):
        s = raw.strip()
        if not s:
            continue
        try:
            g = parse_molecule(s, fmt)
        except (MolGraphError, ValueError) as e:
            yield lineno, str(e)
            continue
        rep = check_valence(g)
        yield lineno, None if rep.valid else "; ".join(map(str, rep.violations))


def cmd_validate(args) -> int:
    items = list(_validate_items(args.format, _read_text(args.input)))
    bad = [{"line": ln, "error": err} for ln, err in items if err is not None]
    report = {
        "format": args.format,
        "total": len(items),
        "valid": len(items) - len(bad),
        "validity": 100.0 * (len(items) - len(bad)) / len(items) if items else 0.0,
        "invalid": bad,
    }
    _emit(json.dumps(report, indent=2) + "\n", args.out)
    return EXIT_INVALID if bad else EXIT_OK


def cmd_canon(args) -> int:
    from .metrics.molecule import parse_molecule
    from .molgraph import MolGraphError, canonical_form

    out = []
    status = EXIT_OK
    for lineno, s in enumerate(_read_text(args.input).splitlines(), start=1):
        if not s.strip():
            continue
        try:
            out.append(canonical_form(parse_molecule(s, args.format)))
        except (MolGraphError, ValueError) as e:
            print(f"line {lineno}: {e}", file=sys.stderr)
            status = EXIT_INVALID
    _emit("".join(s + "\n" for s in out), args.out)
    return status


def cmd_fingerprint(args) -> int:
    from .metrics.molecule import parse_molecule
    from .molgraph import MolGraphError
    from .motif import EmptyGraph, ecfp, fcfp

    fn = ecfp if args.kind == "ecfp" else fcfp
    out = []
    status = EXIT_OK
    for lineno, s in enumerate(_read_text(args.input).splitlines(), start=1):
        if not s.strip():
            continue
        try:
            out.append(fn(parse_molecule(s, args.format), args.radius, args.n_bits).to_hex())
        except (MolGraphError, EmptyGraph, ValueError) as e:
            print(f"line {lineno}: {e}", file=sys.stderr)
            status = EXIT_INVALID
    _emit("".join(s + "\n" for s in out), args.out)
    return status


def cmd_motif(args) -> int:
    from .motif import MotifDictionary, default_dictionary_path, protein_motif_vector
    from .protseq import ProteinError, parse_fasta

    dictionary = MotifDictionary.load(args.dictionary or default_dictionary_path())
    try:
        records = parse_fasta(_read_text(args.input))
    except ProteinError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVALID
    lines = []
    for header, seq in records:
        v = protein_motif_vector(seq, dictionary)
        lines.append(json.dumps({"header": header, "bits": "".join(map(str, v.bits)),
                                 "on": v.on_bits()}))
    _emit("".join(s + "\n" for s in lines), args.out)
    return EXIT_OK


def _config(args):
    from .fusion import FusionConfig

    return FusionConfig(d=args.d, n_heads=args.n_heads, n_layers=args.n_layers, ffn_dim=args.ffn_dim,
                        mlp_hidden=args.mlp_hidden, n_q=args.n_q, n_prot_motifs=args.n_prot_motifs)


def cmd_init_weights(args) -> int:
    from .fusion import FusionWeights

    try:
        cfg = _config(args)
    except ValueError as e:
        raise UsageError(str(e)) from None
    FusionWeights.seeded(args.seed, cfg).save(args.out)
    return EXIT_OK


def _read_points(path: str, per_line: int) -> List[List[float]]:
    rows = []
    for n, line in enumerate(_lines(path), start=1):
        if line.startswith("#"):
            continue
        vals = [float(x) for x in line.split()]
        if len(vals) != per_line:
            raise ValueError(f"{path} line {n}: expected {per_line} numbers")
        rows.append(vals)
    return rows


def cmd_fuse(args) -> int:
    from .fusion import FusionWeights, extract_features, write_archive
    from .metrics.molecule import parse_molecule
    from .molgraph import MolGraphError
    from .motif import MotifDictionary, default_dictionary_path
    from .protseq import ProteinError, parse_backbone, parse_fasta

    w = FusionWeights.load(args.weights)
    try:
        if args.molecule is not None:
            if not args.coords:
                raise UsageError("--coords is required with --molecule")
            g = parse_molecule(args.molecule, args.format)
            entity = g.with_coordinates(tuple(map(tuple, _read_points(args.coords, 3))))
            dictionary = None
        else:
            if not (args.fasta and args.backbone):
                raise UsageError("give --molecule/--coords or --fasta/--backbone")
            records = parse_fasta(_read_text(args.fasta))
            if len(records) != 1:
                raise ValueError("--fasta must hold exactly one record")
            entity = parse_backbone(_read_text(args.backbone), records[0][1])
            dictionary = MotifDictionary.load(args.dictionary or default_dictionary_path())
        feats = extract_features(entity, w, dictionary)
    except (MolGraphError, ProteinError, ValueError) as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVALID
    write_archive(args.out, {"Z": feats.z})
    return EXIT_OK


def _metrics_report(args):
    from . import metrics as M
    from .protseq import parse_fasta

    t = args.task
    if t in ("caption", "protqa"):
        refs, hyps = _read_text(args.ref).splitlines(), _read_text(args.hyp).splitlines()
        return M.nlg_metrics(refs, hyps, task=t)
    if t == "molgen":
        return M.molgen_report(_lines(args.ref), _lines(args.hyp), fmt=args.format, workers=args.workers)
    if t == "protgen":
        def seqs(path):
            from .protseq import ProteinError

            text = _read_text(path)
            try:
                return [str(s) for _, s in parse_fasta(text)]
            except ProteinError:
                # keep invalid generations so Validity can count them
                out, cur = [], None
                for line in text.splitlines():
                    if line.startswith(">"):
                        if cur is not None:
                            out.append(cur)
                        cur = ""
                    elif cur is not None:
                        cur += "".join(line.split()).upper()
                if cur is not None:
                    out.append(cur)
                return out
        return M.protgen_report(seqs(args.ref), seqs(args.hyp), workers=args.workers)
    rows = M.read_score_table(args.ref)
    return {"drug": M.drug_assessment, "joint": M.joint_assessment, "enzyme": M.enzyme_assessment}[t](rows)


def cmd_metrics(args) -> int:
    from .errors import LengthMismatch
    from .metrics import EmptyCorpus, MissingField

    if args.task in ("caption", "protqa", "molgen", "protgen") and not args.hyp:
        raise UsageError(f"metrics {args.task} needs REF and HYP files")
    try:
        report = _metrics_report(args)
    except (LengthMismatch, EmptyCorpus, MissingField, ValueError) as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVALID
    _emit(report.to_csv() if args.csv else report.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_plan(args) -> int:
    from .pipeline import PipelineError, build_plan

    table = None
    if args.table:
        table = [(e["task_id"], e["ratio"]) for e in json.loads(_read_text(args.table))]
    try:
        plan = build_plan(args.stage, table)
    except PipelineError as e:
        print(str(e), file=sys.stderr)
        return EXIT_INVALID
    _emit(plan.to_json(args.seed) + "\n", args.out)
    return EXIT_OK


def cmd_sample(args) -> int:
    from .pipeline import SamplingPlan, sample_stream

    d = json.loads(_read_text(args.plan))
    plan = SamplingPlan.from_dict(d)
    _emit("".join(t + "\n" for t in sample_stream(plan, args.seed, args.n)), args.out)
    return EXIT_OK


# Parser -------------------------------------------------------------------

def _positive(x: str) -> int:
    v = int(x)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg(x: str) -> int:
    v = int(x)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="biomolkit", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.set_defaults(func=fn, grammar=sp)
        sp.add_argument("--out", "-o", help="write output here instead of standard output")
        return sp

    sp = add("tokenize", cmd_tokenize, "SELFIES lines or FASTA records to token ids")
    sp.add_argument("--kind", choices=("molecule", "protein"), required=True)
    sp.add_argument("--vocab", help="vocabulary file (default: built-in)")
    sp.add_argument("--extend", action="store_true", help="add unseen molecule tokens instead of failing")
    sp.add_argument("--save-vocab", help="with --extend, write the extended vocabulary here")
    sp.add_argument("input")

    sp = add("detokenize", cmd_detokenize, "token id lines back to strings")
    sp.add_argument("--vocab")
    sp.add_argument("--keep-prefix", action="store_true", help="keep <p> on protein tokens")
    sp.add_argument("input")

    sp = add("validate", cmd_validate, "check SELFIES, SMILES or FASTA input")
    sp.add_argument("--format", choices=("selfies", "smiles", "fasta"), required=True)
    sp.add_argument("input")

    sp = add("canon", cmd_canon, "canonical SMILES, one per input line")
    sp.add_argument("--format", choices=("smiles", "selfies"), default="smiles")
    sp.add_argument("input")

    sp = add("fingerprint", cmd_fingerprint, "circular fingerprints as hex, one per line")
    sp.add_argument("--format", choices=("smiles", "selfies"), default="smiles")
    sp.add_argument("--kind", choices=("fcfp", "ecfp"), default="fcfp")
    sp.add_argument("--radius", type=_nonneg, default=2)
    sp.add_argument("--n-bits", type=_positive, default=1024)
    sp.add_argument("input")

    sp = add("motif", cmd_motif, "protein motif bits against a dictionary")
    sp.add_argument("--dictionary", help="motif file (default: $IBM_DATA_DIR/motifs.txt or bundled)")
    sp.add_argument("input")

    def fusion_dims(sp):
        sp.add_argument("--d", type=_positive, default=16)
        sp.add_argument("--n-heads", type=_positive, default=4)
        sp.add_argument("--n-layers", type=_positive, default=2)
        sp.add_argument("--ffn-dim", type=_positive, default=64)
        sp.add_argument("--mlp-hidden", type=_positive, default=32)
        sp.add_argument("--n-q", type=_positive, default=8)
        sp.add_argument("--n-prot-motifs", type=_positive, default=7)

    sp = add("init-weights", cmd_init_weights, "write seeded fusion weights (IBMT v1)")
    sp.add_argument("--seed", type=int, required=True)
    fusion_dims(sp)
    sp.set_defaults(out_required=True)

    sp = add("fuse", cmd_fuse, "fused features Z for one molecule or protein (IBMT v1)")
    sp.add_argument("--weights", required=True)
    sp.add_argument("--molecule", help="SMILES or SELFIES string")
    sp.add_argument("--format", choices=("smiles", "selfies"), default="smiles")
    sp.add_argument("--coords", help="atom coordinates, one 'x y z' line per atom")
    sp.add_argument("--fasta", help="FASTA file with one protein")
    sp.add_argument("--backbone", help="backbone file, 12 numbers per residue line")
    sp.add_argument("--dictionary")
    sp.set_defaults(out_required=True)

    sp = add("metrics", cmd_metrics, "score generations and write a metric report")
    sp.add_argument("task", choices=("caption", "molgen", "protqa", "protgen", "drug", "enzyme", "joint"))
    sp.add_argument("ref", help="reference file, or the score table for drug/enzyme/joint")
    sp.add_argument("hyp", nargs="?", help="hypothesis file (text/molecule/protein tasks)")
    sp.add_argument("--format", choices=("smiles", "selfies"), default="smiles")
    sp.add_argument("--csv", action="store_true", help="CSV instead of JSON")
    sp.add_argument("--workers", type=_positive, default=1)

    sp = add("plan", cmd_plan, "sampling plan for an instruction-tuning stage")
    sp.add_argument("--stage", type=int, choices=(1, 2), required=True)
    sp.add_argument("--table", help="JSON list of {task_id, ratio} overriding the built-in ratios")
    sp.add_argument("--seed", type=int, help="seed recorded in the plan file")

    sp = add("sample", cmd_sample, "draw a task stream from a plan")
    sp.add_argument("--plan", required=True)
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--n", type=_nonneg, required=True)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if getattr(args, "out_required", False) and not args.out:
        args.grammar.print_usage(sys.stderr)
        print(f"biomolkit {args.command}: --out is required", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as e:
        args.grammar.print_usage(sys.stderr)
        print(f"biomolkit {args.command}: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
