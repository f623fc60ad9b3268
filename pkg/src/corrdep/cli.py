"""``corrdep`` command-line entry point.

Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical error.
Failures print a single ``error: <Category>: <message>`` line on stderr.
"""
from __future__ import annotations

import argparse
import hashlib
import logging
import os
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from . import eval_harness as eh
from .audio_io import load_manifest
from .config import build_config, config_items, load_config, parse_config_text
from .corr_repr import corr_sequence
from .dsp_features import FeatureSequence
from .errors import CorrdepError, DataError, NumericalError, UsageError
from .formats import write_corr_cache, write_feature_cache
from .marker_analysis import group_compare, stability_scores, write_marker_report
from .synth_corpus import SynthParams, generate_corpus

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 2, 3, 4
CACHE_ENV = "CORRDEP_CACHE_DIR"


def _grid(text: str) -> tuple:
    try:
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None


def _add_common(p, manifest=True):
    if manifest:
        p.add_argument("--manifest", required=True)
    p.add_argument("--config", help="flat key = value file; flags take precedence")
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float, dest="learning_rate")
    p.add_argument("--batch-size", type=int, dest="batch_size")
    p.add_argument("--C", type=float, dest="C")
    p.add_argument("--voicing-threshold", type=float, dest="voicing_threshold")
    p.add_argument("--features", help="feature cache directory (default: $%s)" % CACHE_ENV)
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="corrdep", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="compute feature caches for a manifest")
    _add_common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--L", type=int, action="append", default=[],
                   help="also write correlation caches for this L (repeatable)")

    for name in ("eval", "sweep"):
        p = sub.add_parser(name, help="run the k-fold protocol" if name == "eval"
                           else "run the protocol over a grid of L")
        _add_common(p)
        p.add_argument("--approach", required=True, choices=sorted(eh.CLI_NAMES))
        if name == "eval":
            p.add_argument("--L", type=int, default=100)
        else:
            p.add_argument("--grid", type=_grid)
        p.add_argument("--reps", type=int, default=10)
        p.add_argument("--pooling", choices=["pooled", "macro"], default="pooled")
        p.add_argument("--out", required=True)

    p = sub.add_parser("baseline", help="random-baseline metrics from manifest priors")
    p.add_argument("--manifest", required=True)

    p = sub.add_parser("marker", help="consecutive-matrix stability per group")
    _add_common(p)
    p.add_argument("--grid", type=_grid)
    p.add_argument("--out", required=True)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--mode", choices=["features", "wave"], default="features")
    p.add_argument("--drift", type=float, default=SynthParams.drift_rate)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", required=True)

    p = sub.add_parser("timing", help="per-fold training wall-clock, BL2 vs Approach 2")
    _add_common(p)
    p.add_argument("--L", type=int, default=100)
    p.add_argument("--folds", type=_grid, help="fold indices (default: all)")
    p.add_argument("--out", required=True)
    return parser


def _config(args):
    overrides = parse_config_text(Path(args.config).read_text(encoding="utf-8")) if getattr(args, "config", None) else {}
    for key in ("seed", "epochs", "learning_rate", "batch_size", "C", "voicing_threshold"):
        if getattr(args, key, None) is not None:
            overrides[key] = getattr(args, key)
    if getattr(args, "grid", None):
        overrides["grid"] = args.grid
    return build_config(overrides)


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def write_run_record(out_path, argv, cfg, inputs, outputs, started: float) -> Path:
    """Flat key=value provenance record written next to the primary output."""
    record = Path(str(out_path) + ".run")
    lines = [
        f"command = corrdep {' '.join(argv)}",
        f"timestamp = {datetime.now(timezone.utc).isoformat(timespec='seconds')}",
        f"wall_clock_s = {time.perf_counter() - started:.3f}",
        f"hardware = {eh.hardware_descriptor()}",
    ]
    if cfg is not None:
        lines += [f"config.{k} = {v}" for k, v in config_items(cfg).items()]
    lines += [f"input.{Path(p).name} = sha256:{_sha256(p)}" for p in inputs if Path(p).is_file()]
    lines += [f"output = {o}" for o in outputs]
    record.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return record


def _features(args, manifest, cfg):
    cache = args.features or os.environ.get(CACHE_ENV)
    return eh.load_corpus_features(manifest, cache, cfg.voicing_threshold)


def cmd_extract(args, argv, started):
    cfg = _config(args)
    manifest = load_manifest(args.manifest)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = eh.load_corpus_features(manifest, out, cfg.voicing_threshold)
    outputs = []
    for e in manifest.entries:
        path = out / f"{e.id}.andrf"
        if not path.exists():
            write_feature_cache(path, FeatureSequence(data[e.id], e.id))
        outputs.append(path)
        for L in args.L:
            cs = corr_sequence(data[e.id], L)
            cs.recording_id = e.id
            cpath = out / f"{e.id}.L{L}.andrc"
            write_corr_cache(cpath, cs)
            outputs.append(cpath)
    write_run_record(out / "extract", argv, cfg, [args.manifest], outputs, started)
    print(f"wrote {len(outputs)} cache files to {out}")


def cmd_eval(args, argv, started):
    cfg = _config(args)
    manifest = load_manifest(args.manifest)
    data = _features(args, manifest, cfg)
    approach = eh.make_approach(args.approach, args.L, cfg)
    report = eh.run_protocol(approach, manifest, data, args.reps, cfg.seed, args.jobs, args.pooling)
    runs_path = Path(args.out).with_suffix(".runs.tsv")
    eh.write_report(args.out, [report])
    eh.write_runs(runs_path, [report])
    write_run_record(args.out, argv, cfg, [args.manifest], [args.out, runs_path], started)
    for m in eh.METRIC_NAMES:
        print(f"{report.approach}\t{m}\t{report.mean(m):.1f} +- {report.std(m):.1f}")


def cmd_sweep(args, argv, started):
    cfg = _config(args)
    manifest = load_manifest(args.manifest)
    data = _features(args, manifest, cfg)
    reports = eh.sweep_L(args.approach, manifest, data, cfg.grid, cfg, args.reps, args.jobs, args.pooling)
    out = Path(args.out)
    plot = out.with_suffix(".plot.tsv")
    runs = out.with_suffix(".runs.tsv")
    eh.write_report(out, reports)
    eh.write_runs(runs, reports)
    eh.write_sweep_plot_data(plot, reports)
    write_run_record(out, argv, cfg, [args.manifest], [out, runs, plot], started)
    for r in reports:
        flag = "  <- best accuracy" if r.best_L else ""
        print(f"L={r.L}\tacc {r.mean('accuracy'):.1f}\tf1 {r.mean('f1'):.1f} +- {r.sem('f1'):.1f} (sem){flag}")


def cmd_baseline(args, argv, started):
    manifest = load_manifest(args.manifest, check_audio=False)
    m = eh.random_baseline(manifest.p_control, manifest.p_depressed)
    print(f"p_control\t{manifest.p_control:.4f}")
    print(f"p_depressed\t{manifest.p_depressed:.4f}")
    for name in eh.METRIC_NAMES:
        print(f"{name}\t{getattr(m, name):.1f}")


def cmd_marker(args, argv, started):
    cfg = _config(args)
    manifest = load_manifest(args.manifest)
    data = _features(args, manifest, cfg)
    scores = {L: stability_scores(manifest, data, L) for L in cfg.grid}
    rows = group_compare(scores)
    write_marker_report(args.out, scores, rows)
    write_run_record(args.out, argv, cfg, [args.manifest], [args.out], started)
    for r in rows:
        print(f"L={r.L}\tcontrol {r.control_mean:.3f}\tdepressed {r.depressed_mean:.3f}"
              f"\tt {r.t_statistic:.2f}\tp {r.p_value:.3g}\tp_adj {r.p_adjusted:.3g}")


def cmd_synth(args, argv, started):
    params = SynthParams(n_per_class=args.per_class, drift_rate=args.drift, seed=args.seed)
    manifest = generate_corpus(params, args.out, args.k, args.mode)
    out = Path(args.out) / "manifest.csv"
    write_run_record(out, argv, None, [], [out], started)
    print(f"wrote {len(manifest.entries)} recordings to {args.out}")


def cmd_timing(args, argv, started):
    cfg = _config(args)
    manifest = load_manifest(args.manifest)
    data = _features(args, manifest, cfg)
    folds = args.folds if args.folds else None
    lines = ["approach\tL\tfold_index\tseconds"]
    results = {}
    for name in ("BL2", "Approach2"):
        rep = eh.timing_report(eh.make_approach(name, args.L, cfg), manifest, data, cfg.seed, folds)
        results[name] = rep
        for i, s in enumerate(rep.fold_seconds):
            lines.append(f"{name}\t{eh._fmt_L(rep.L)}\t{i}\t{s:.4f}")
    ratio = results["BL2"].mean_seconds / results["Approach2"].mean_seconds
    lines.append(f"# hardware: {results['BL2'].hardware}")
    lines.append(f"# mean BL2 / Approach2 ratio: {ratio:.3f}")
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    write_run_record(args.out, argv, cfg, [args.manifest], [args.out], started)
    print(f"BL2 {results['BL2'].mean_seconds:.2f}s/fold, Approach2 "
          f"{results['Approach2'].mean_seconds:.2f}s/fold, ratio {ratio:.2f}")


COMMANDS = {
    "extract": cmd_extract, "eval": cmd_eval, "sweep": cmd_sweep, "baseline": cmd_baseline,
    "marker": cmd_marker, "synth": cmd_synth, "timing": cmd_timing,
}


def _fail(err: BaseException, code: int) -> int:
    category = getattr(err, "category", type(err).__name__)
    msg = " ".join(str(err).split())
    print(f"error: {category}: {type(err).__name__}: {msg}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    started = time.perf_counter()
    try:
        COMMANDS[args.command](args, argv, started)
    except UsageError as err:
        return _fail(err, EXIT_USAGE)
    except NumericalError as err:
        return _fail(err, EXIT_NUMERIC)
    except (DataError, OSError) as err:
        if not isinstance(err, CorrdepError):
            err.category = DataError.category
        return _fail(err, EXIT_DATA)
    return 0


if __name__ == "__main__":
    sys.exit(main())
