"""Command-line interface.

Subcommands cover the full flow: compile, sta, sample, featurize,
gen-corpus, train, predict, annotate, emit-synth, eval, xval. Universal
flags --seed / --config / --out-dir; every run appends a provenance
record (config hash, input hashes) to run.log.jsonl in the output
directory. Exit codes: 0 success, 1 usage error, 2 data error.

Report-producing subcommands (predict, eval, xval) render figures next
to their CSV/JSON outputs unless --no-figures is given.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

from . import __version__
from .aiger import export_aag
from .aggregate import SignalTiming, compute_design_timing
from .annotate import annotate_hdl
from .bog import OperatorBasis, bitblast, emit_bog_json, parse_bog_json
from .config import RunConfig, load_config, provenance_record
from .directives import emit_synth_directives
from .errors import RtltError
from .features import LabelSet, build_dataset
from .learners import load_model, save_model
from .metrics import evaluate
from .oracle import OracleConfig, generate_corpus, load_corpus, write_corpus
from .parser import parse_rtl
from .pipeline import (compile_design, featurize_corpus, featurize_design,
                       predict_design, train_pipeline)
from .sampling import extract_cone, sample_paths
from .sta import PseudoLiberty, run_pseudo_sta
from .xval import cross_validate, signal_labels_of


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _write(path: str, text: str):
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(text)


def _load_design(path: str, dialect: str = "auto"):
    text = _read(path)
    if dialect == "auto":
        dialect = "netlist-json" if path.endswith((".netjson", ".json")) else "verilog-subset"
    return parse_rtl(text, dialect=dialect, filename=path)


def _liberty(cfg: RunConfig) -> PseudoLiberty:
    if cfg.liberty_path:
        return PseudoLiberty.from_file(cfg.liberty_path)
    return PseudoLiberty.default()


def _log_run(out_dir: str, command: str, cfg: RunConfig, inputs: list[str],
             outputs: list[str]):
    rec = provenance_record(command, cfg, [p for p in inputs if os.path.isfile(p)],
                            outputs)
    path = os.path.join(out_dir or ".", "run.log.jsonl")
    os.makedirs(out_dir or ".", exist_ok=True)
    with open(path, "a") as fh:
        fh.write(json.dumps(rec, sort_keys=True) + "\n")


def _predictions_csv(pred, labels: dict[str, float] | None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["design", "signal", "label", "predicted", "slack", "rank", "group"])
    for s in sorted(pred.signal_at):
        lab = labels.get(s, "") if labels else ""
        w.writerow([pred.design, s,
                    repr(lab) if lab != "" else "",
                    repr(pred.signal_at[s]),
                    repr(pred.clock_period - pred.signal_at[s]),
                    repr(pred.signal_rank[s]), pred.signal_group[s]])
    return buf.getvalue()


# --- subcommand implementations -------------------------------------------------


def _cmd_compile(args, cfg: RunConfig) -> list[str]:
    net = _load_design(args.input, args.dialect)
    bases = ([b.strip() for b in args.basis.split(",")] if args.basis
             else list(cfg.bases))
    outputs = []
    for bname in bases:
        g = bitblast(net, OperatorBasis.by_name(bname))
        if args.output and len(bases) == 1:
            out = args.output
        else:
            out = f"{net.name}.{g.basis.name}.bog.json"
        out = os.path.join(args.out_dir, out) if args.out_dir else out
        _write(out, emit_bog_json(g))
        outputs.append(out)
        print(f"{net.name} basis={g.basis.name} nodes={g.n_nodes} "
              f"endpoints={len(g.endpoints)} regs={g.reg_count()} -> {out}")
        if args.aag and g.basis.name == "aig":
            aag = os.path.splitext(out)[0] + ".aag"
            _write(aag, export_aag(g))
            outputs.append(aag)
    return outputs


def _cmd_sta(args, cfg: RunConfig) -> list[str]:
    g = parse_bog_json(_read(args.input))
    ann = run_pseudo_sta(g, _liberty(cfg))
    out = args.output or os.path.join(args.out_dir or ".",
                                      f"{g.design}.{g.basis.name}.sta.json")
    _write(out, ann.dumps())
    worst = max((ann.arrival[e.id] for e in g.endpoints), default=0.0)
    print(f"{g.design} basis={g.basis.name} endpoints={len(g.endpoints)} "
          f"max_arrival={worst:.4f} -> {out}")
    return [out]


def _cmd_sample(args, cfg: RunConfig) -> list[str]:
    g = parse_bog_json(_read(args.input))
    ann = run_pseudo_sta(g, _liberty(cfg))
    out = args.output or os.path.join(args.out_dir or ".",
                                      f"{g.design}.{g.basis.name}.paths.jsonl")
    lines = []
    for ep in g.endpoints:
        cone = extract_cone(g, ep)
        for idx, p in enumerate(sample_paths(g, ann, cone, cfg.seed, cfg.beta,
                                             cfg.k_min, cfg.k_max)):
            lines.append(json.dumps({
                "endpoint": ep.name, "kind": p.kind, "index": idx,
                "nodes": list(p.node_sequence), "op_kinds": list(p.op_kinds),
                "arrival": list(p.arrival)}, sort_keys=True))
    _write(out, "\n".join(lines) + "\n")
    print(f"{g.design} sampled paths for {len(g.endpoints)} endpoints -> {out}")
    return [out]


def _cmd_featurize(args, cfg: RunConfig) -> list[str]:
    if args.corpus:
        corpus = load_corpus(args.corpus)
        designs = [net for net, _ in corpus]
        labels = [ls for _, ls in corpus]
    else:
        if not args.input or not args.labels:
            raise UsageError("featurize: need --corpus or both -i and --labels")
        designs = [_load_design(args.input)]
        labels = [LabelSet.loads(_read(args.labels))]
    bases = [OperatorBasis.by_name(b) for b in cfg.bases]
    table, dropped = build_dataset(designs, bases, labels, cfg.seed, _liberty(cfg),
                                   cfg.beta, cfg.k_min, cfg.k_max)
    out = args.output or os.path.join(args.out_dir or ".", "features.csv")
    _write(out, table.to_csv())
    outputs = [out]
    if args.jsonl:
        jl = os.path.splitext(out)[0] + ".jsonl"
        _write(jl, table.to_jsonl())
        outputs.append(jl)
    for design, n in sorted(dropped.items()):
        print(f"warning: {design}: dropped {n} unlabeled endpoints", file=sys.stderr)
    print(f"{len(table.rows)} rows ({len(designs)} designs x {len(bases)} bases) -> {out}")
    return outputs


def _cmd_gen_corpus(args, cfg: RunConfig) -> list[str]:
    ocfg = OracleConfig(seed=args.seed if args.seed is not None else 7,
                        design_count=args.designs,
                        size_range=(args.size_min, args.size_max),
                        rewrite_intensity=args.intensity,
                        label_noise=args.noise)
    out_dir = args.out_dir or "corpus"
    corpus = generate_corpus(ocfg)
    paths = write_corpus(corpus, out_dir)
    print(f"{len(corpus)} designs -> {out_dir}/")
    return paths


def _cmd_train(args, cfg: RunConfig) -> list[str]:
    corpus = load_corpus(args.corpus)
    lib = _liberty(cfg)
    fd_map = featurize_corpus([net for net, _ in corpus], cfg, lib)
    featurized = [fd_map[name] for name in sorted(fd_map)]
    labels = {ls.design_id: ls for _, ls in corpus}
    bundle = train_pipeline(featurized, labels, cfg, liberty_hash=lib.fingerprint())
    out = args.output or os.path.join(args.out_dir or ".", "model.json")
    os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
    save_model(bundle, out)
    print(f"trained on {len(featurized)} designs -> {out}")
    return [out]


def _render_predict_outputs(pred, labels, out_dir, stem, figures: bool) -> list[str]:
    from .figures import save_arrival_hist, save_pred_scatter

    outputs = []
    tj = os.path.join(out_dir, f"{stem}.timing.json")
    _write(tj, pred.dumps())
    outputs.append(tj)
    pc = os.path.join(out_dir, f"{stem}.predictions.csv")
    _write(pc, _predictions_csv(pred, labels))
    outputs.append(pc)
    if figures and labels:
        names = sorted(set(labels) & set(pred.signal_at))
        y = [labels[s] for s in names]
        p = [pred.signal_at[s] for s in names]
        gs = [pred.signal_group[s] for s in names]
        outputs.append(save_pred_scatter(
            os.path.join(out_dir, f"{stem}.scatter.png"), y, p, gs,
            title=f"{pred.design}: predicted vs label signal arrival"))
        outputs.append(save_arrival_hist(
            os.path.join(out_dir, f"{stem}.hist.png"), y, p,
            title=f"{pred.design}: signal arrival distribution"))
    return outputs


def _cmd_predict(args, cfg: RunConfig) -> list[str]:
    bundle = load_model(args.model)
    cfg = cfg.with_overrides(bases=tuple(bundle.config.get("bases", cfg.bases)),
                             seed=bundle.config.get("seed"),
                             beta=bundle.config.get("beta"),
                             k_min=bundle.config.get("k_min"),
                             k_max=bundle.config.get("k_max"))
    net = _load_design(args.input)
    labels = LabelSet.loads(_read(args.labels)) if args.labels else None
    clock = args.clock or cfg.clock_period or (labels.clock_period if labels else None)
    if clock is None:
        raise UsageError("predict: need --clock, config clock_period, or --labels")
    cd = compile_design(net, cfg, _liberty(cfg))
    fd = featurize_design(cd, cfg)
    pred = predict_design(bundle, fd, clock)
    sig_labels = signal_labels_of(labels) if labels else None
    out_dir = args.out_dir or "."
    outputs = _render_predict_outputs(pred, sig_labels, out_dir, net.name,
                                      not args.no_figures)
    print(f"{net.name}: {len(pred.signal_at)} signals, "
          f"WNS={pred.wns:.4f} TNS={pred.tns:.4f} -> {out_dir}/")
    return outputs


def _cmd_annotate(args, cfg: RunConfig) -> list[str]:
    bundle = load_model(args.model)
    cfg = cfg.with_overrides(bases=tuple(bundle.config.get("bases", cfg.bases)),
                             seed=bundle.config.get("seed"))
    source = _read(args.input)
    net = parse_rtl(source, filename=args.input)
    labels = LabelSet.loads(_read(args.labels)) if args.labels else None
    clock = args.clock or cfg.clock_period or (labels.clock_period if labels else None)
    if clock is None:
        raise UsageError("annotate: need --clock, config clock_period, or --labels")
    cd = compile_design(net, cfg, _liberty(cfg))
    pred = predict_design(bundle, featurize_design(cd, cfg), clock)
    timing = [SignalTiming(name=s, bit_arrivals=(), signal_at=pred.signal_at[s],
                           slack=clock - pred.signal_at[s],
                           rank=pred.signal_rank[s], group=pred.signal_group[s])
              for s in sorted(pred.signal_at)]
    design = compute_design_timing(timing, clock, net.name)
    text = annotate_hdl(source, timing, design, profile=cfg.profile,
                        clock_period=clock)
    out = args.output or os.path.join(args.out_dir or ".",
                                      f"{net.name}.annotated.v")
    _write(out, text)
    print(f"{net.name}: annotated {len(timing)} signals -> {out}")
    return [out]


def _timing_from_json(obj: dict) -> list[SignalTiming]:
    return [SignalTiming(name=s["name"], bit_arrivals=(),
                         signal_at=float(s["arrival"]), slack=float(s["slack"]),
                         rank=float(s["rank"]), group=int(s["group"]))
            for s in obj["signals"]]


def _cmd_emit_synth(args, cfg: RunConfig) -> list[str]:
    obj = json.loads(_read(args.timing))
    timing = _timing_from_json(obj)
    text = emit_synth_directives(timing, dialect=args.dialect,
                                 weights=cfg.group_weights, profile=cfg.profile)
    ext = "synth.tcl" if args.dialect == "dc-tcl" else "synth.json"
    out = args.output or os.path.join(args.out_dir or ".",
                                      f"{obj.get('design', 'design')}.{ext}")
    _write(out, text)
    print(f"{obj.get('design')}: directives ({args.dialect}) -> {out}")
    return [out]


def _read_predictions_csv(path: str) -> tuple[dict[str, float], dict[str, int] | None]:
    preds: dict[str, float] = {}
    groups: dict[str, int] = {}
    with open(path) as fh:
        rd = csv.DictReader(fh)
        for rec in rd:
            key = rec.get("signal") or rec.get("name") or rec.get("endpoint")
            preds[key] = float(rec["predicted"])
            if rec.get("group"):
                groups[key] = int(rec["group"])
    return preds, (groups if groups else None)


def _cmd_eval(args, cfg: RunConfig) -> list[str]:
    from .figures import save_pred_scatter

    preds, pred_groups = _read_predictions_csv(args.pred)
    ls = LabelSet.loads(_read(args.labels))
    labels: dict[str, float] = dict(ls.entries)
    if preds and not any("[" in k for k in preds):
        labels = signal_labels_of(ls)
    labels = {k: v for k, v in labels.items() if k in preds}
    preds = {k: v for k, v in preds.items() if k in labels}
    rep = evaluate(preds, labels,
                   pred_groups={k: pred_groups[k] for k in labels} if pred_groups else None)
    out_dir = args.out_dir or "."
    out = args.output or os.path.join(out_dir, "eval.json")
    _write(out, rep.dumps())
    outputs = [out]
    if not args.no_figures:
        names = sorted(labels)
        outputs.append(save_pred_scatter(
            os.path.join(out_dir, "eval.scatter.png"),
            [labels[n] for n in names], [preds[n] for n in names],
            title="predicted vs label"))
    print(f"n={rep.n} R={rep.r:.4f} R2={rep.r2:.4f} "
          f"MAPE={rep.mape_pct:.2f}% COVR={rep.covr_pct:.2f}% -> {out}")
    return outputs


def _cmd_xval(args, cfg: RunConfig) -> list[str]:
    from .figures import save_metric_bars, save_pred_scatter

    corpus = load_corpus(args.corpus)
    bundles = {} if args.save_models else None
    result = cross_validate(corpus, folds=args.folds, seed=cfg.seed, cfg=cfg,
                            liberty=_liberty(cfg), bundles_out=bundles)
    out_dir = args.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    outputs = []
    ej = os.path.join(out_dir, "eval.json")
    _write(ej, result.dumps())
    outputs.append(ej)

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["design", "signal", "label", "predicted", "slack", "rank", "group"])
    for d in sorted(result.predictions):
        pred = result.predictions[d]
        labs = result.signal_labels[d]
        for s in sorted(pred.signal_at):
            w.writerow([d, s, repr(labs[s]) if s in labs else "",
                        repr(pred.signal_at[s]),
                        repr(pred.clock_period - pred.signal_at[s]),
                        repr(pred.signal_rank[s]), pred.signal_group[s]])
    pc = os.path.join(out_dir, "predictions.csv")
    _write(pc, buf.getvalue())
    outputs.append(pc)

    if bundles is not None:
        for fi, bundle in sorted(bundles.items()):
            mp = os.path.join(out_dir, f"fold_{fi:02d}.model.json")
            save_model(bundle, mp)
            outputs.append(mp)

    if not args.no_figures:
        y, p = [], []
        for d in sorted(result.predictions):
            labs = result.signal_labels[d]
            pred = result.predictions[d]
            for s in sorted(labs):
                y.append(labs[s])
                p.append(pred.signal_at[s])
        outputs.append(save_pred_scatter(
            os.path.join(out_dir, "xval.scatter.png"), y, p,
            title="cross-validated signal arrival"))
        names = sorted(result.per_design)
        outputs.append(save_metric_bars(
            os.path.join(out_dir, "xval.r.png"), names,
            [result.per_design[d].r for d in names], "R", "per-design signal R"))
        outputs.append(save_metric_bars(
            os.path.join(out_dir, "xval.covr.png"), names,
            [result.per_design[d].covr_pct for d in names], "COVR (%)",
            "per-design ranking coverage"))

    agg = result.aggregate
    print(f"{agg['n_designs']} designs / {len(result.folds)} folds: "
          f"signal R={agg['signal_r_mean']:.4f}+-{agg['signal_r_std']:.4f} "
          f"COVR={agg['covr_mean']:.2f}% TNS R={agg['tns_r']:.4f} "
          f"WNS R={agg['wns_r']:.4f} -> {out_dir}/")
    return outputs


# --- argument parsing ------------------------------------------------------------


def _build_parser() -> _Parser:
    p = _Parser(prog="rtlt", description="register-level RTL timing estimation")
    p.add_argument("--version", action="version", version=f"rtlt {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--config", default=None)
        sp.add_argument("--out-dir", default=None)

    sp = sub.add_parser("compile", help="RTL -> BOG per basis")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("--dialect", default="auto",
                    choices=("auto", "verilog-subset", "netlist-json"))
    sp.add_argument("--basis", default=None, help="one basis or comma list")
    sp.add_argument("--aag", action="store_true", help="also export AIGER for aig")
    sp.add_argument("-o", "--output", default=None)
    common(sp)

    sp = sub.add_parser("sta", help="pseudo STA over a BOG")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("-o", "--output", default=None)
    common(sp)

    sp = sub.add_parser("sample", help="dump per-endpoint path samples")
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("-o", "--output", default=None)
    common(sp)

    sp = sub.add_parser("featurize", help="build a labeled feature table")
    sp.add_argument("--corpus", default=None)
    sp.add_argument("-i", "--input", default=None)
    sp.add_argument("--labels", default=None)
    sp.add_argument("--jsonl", action="store_true")
    sp.add_argument("-o", "--output", default=None)
    common(sp)

    sp = sub.add_parser("gen-corpus", help="generate the synthetic oracle corpus")
    sp.add_argument("--designs", type=int, default=20)
    sp.add_argument("--size-min", type=int, default=500)
    sp.add_argument("--size-max", type=int, default=5000)
    sp.add_argument("--intensity", type=float, default=0.5)
    sp.add_argument("--noise", type=float, default=0.05)
    common(sp)

    sp = sub.add_parser("train", help="train all model heads on a corpus")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("-o", "--output", default=None)
    common(sp)

    sp = sub.add_parser("predict", help="predict timing for a design")
    sp.add_argument("--model", required=True)
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("--clock", type=float, default=None)
    sp.add_argument("--labels", default=None)
    sp.add_argument("--no-figures", action="store_true")
    common(sp)

    sp = sub.add_parser("annotate", help="annotate predictions onto HDL source")
    sp.add_argument("--model", required=True)
    sp.add_argument("-i", "--input", required=True)
    sp.add_argument("--clock", type=float, default=None)
    sp.add_argument("--labels", default=None)
    sp.add_argument("-o", "--output", default=None)
    common(sp)

    sp = sub.add_parser("emit-synth", help="emit synthesis directives")
    sp.add_argument("--timing", required=True, help="a .timing.json report")
    sp.add_argument("--dialect", default="dc-tcl", choices=("dc-tcl", "generic-json"))
    sp.add_argument("-o", "--output", default=None)
    common(sp)

    sp = sub.add_parser("eval", help="score predictions against labels")
    sp.add_argument("--pred", required=True, help="predictions csv")
    sp.add_argument("--labels", required=True)
    sp.add_argument("--no-figures", action="store_true")
    sp.add_argument("-o", "--output", default=None)
    common(sp)

    sp = sub.add_parser("xval", help="cross-design validation over a corpus")
    sp.add_argument("--corpus", required=True)
    sp.add_argument("--folds", type=int, default=10)
    sp.add_argument("--save-models", action="store_true")
    sp.add_argument("--no-figures", action="store_true")
    common(sp)

    return p


_COMMANDS = {
    "compile": _cmd_compile,
    "sta": _cmd_sta,
    "sample": _cmd_sample,
    "featurize": _cmd_featurize,
    "gen-corpus": _cmd_gen_corpus,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "annotate": _cmd_annotate,
    "emit-synth": _cmd_emit_synth,
    "eval": _cmd_eval,
    "xval": _cmd_xval,
}


def cli_dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config) if args.config else RunConfig()
        if args.seed is not None:
            cfg = cfg.with_overrides(seed=args.seed)
        inputs = [getattr(args, a) for a in ("input", "labels", "model", "pred",
                                             "timing", "config")
                  if getattr(args, a, None)]
        outputs = _COMMANDS[args.command](args, cfg)
        _log_run(args.out_dir or ".", args.command, cfg, inputs, outputs)
        return 0
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except RtltError as exc:
        print(f"error [{exc.module}]: {exc}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(cli_dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
