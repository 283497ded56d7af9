"""Command-line entry point wiring the pipeline stages.

Exit codes: 0 success, 1 partial per-item failures, 2 configuration
error, 3 input-format error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__
from .config import RunConfig, load_config
from .evaluate import (compute_metrics, format_report, grid_search,
                       train_and_evaluate, write_grid_csv)
from .features import read_features_csv, write_features_csv
from .forest import ModelFormatError, load_model, predict, predict_votes, save_model
from .ingest import read_manifest
from .pcapio import CaptureFormatError
from .pipeline import extract_manifest, packets_to_rows, prepare_packets
from .synth import CANNED_PROFILES, generate_capture, load_profile

EXIT_OK = 0
EXIT_PARTIAL = 1
EXIT_CONFIG = 2
EXIT_FORMAT = 3

log = logging.getLogger("interflow")

PAPER_SWEEP_WINDOWS = (300.0, 200.0, 80.0, 50.0, 30.0, 10.0)
PAPER_SWEEP_OVERLAPS = (180.0, 120.0, 30.0, 10.0, 2.0, 1.0)


def _add_config_flags(p):
    p.add_argument("--config", help="TOML config file; flags override it")
    p.add_argument("--window", type=float, help="chunk window, seconds")
    p.add_argument("--overlap", type=float, help="chunk overlap, seconds")
    p.add_argument("--delta", type=float, help="signal bin width, seconds")
    p.add_argument("--signal-bins", type=int, dest="n_bins",
                   help="fixed signal length")
    p.add_argument("--min-packets", type=int, help="minimum packets per chunk")
    p.add_argument("--filtered-ports",
                   help="comma-separated ports to drop (background services)")
    p.add_argument("--local-endpoint",
                   help="local IP or CIDR for direction inference")
    p.add_argument("--trees", type=int, dest="n_trees")
    p.add_argument("--max-depth", type=int)
    p.add_argument("--min-samples-split", type=int)
    p.add_argument("--features-per-split")
    p.add_argument("--split-mode", choices=["by_capture", "by_chunk"])
    p.add_argument("--ratio", type=float, help="train fraction")
    p.add_argument("--seed", type=int)


def _build_config(args) -> RunConfig:
    overrides = {k: getattr(args, k, None) for k in (
        "window", "overlap", "delta", "n_bins", "min_packets",
        "local_endpoint", "n_trees", "max_depth", "min_samples_split",
        "features_per_split", "split_mode", "ratio", "seed")}
    if getattr(args, "filtered_ports", None):
        overrides["filtered_ports"] = [
            int(p) for p in args.filtered_ports.split(",") if p]
    fps = overrides.get("features_per_split")
    if isinstance(fps, str) and fps.isdigit():
        overrides["features_per_split"] = int(fps)
    return load_config(getattr(args, "config", None), **overrides)


def _provenance(cfg: RunConfig) -> str:
    return f"interflow {__version__} config={cfg.to_json()}"


def cmd_extract(args) -> int:
    cfg = _build_config(args)
    entries = read_manifest(args.manifest)
    if not entries:
        log.error("manifest %s has no rows", args.manifest)
        return EXIT_FORMAT
    rows, errors = extract_manifest(entries, cfg)
    for path, msg in errors:
        log.warning("capture %s failed: %s", path, msg)
    if not rows:
        log.error("all %d manifest rows failed", len(entries))
        return EXIT_PARTIAL
    write_features_csv(args.out, rows, header_comment=_provenance(cfg))
    dim = len(rows[0].row)
    print(f"extract: {len(entries) - len(errors)}/{len(entries)} captures, "
          f"{len(rows)} chunks kept, feature dimension {dim}")
    return EXIT_PARTIAL if errors else EXIT_OK


def cmd_train(args) -> int:
    cfg = _build_config(args)
    rows = read_features_csv(args.features)
    model, metrics, n_train, n_test = train_and_evaluate(rows, cfg)
    save_model(model, args.model)
    report = format_report(cfg, metrics,
                           extra={"train_rows": n_train, "test_rows": n_test,
                                  "features": args.features},
                           version=__version__)
    if args.report:
        Path(args.report).write_text(report, encoding="utf-8")
    print(f"train: {n_train} train rows, {n_test} test rows, "
          f"accuracy {metrics.accuracy:.4f}, macro F1 {metrics.macro_f1:.4f}")
    return EXIT_OK


def cmd_predict(args) -> int:
    cfg = _build_config(args)
    model = load_model(args.model)
    model_bins = model.meta.get("n_bins")
    if model_bins is not None and args.n_bins is not None \
            and model_bins != args.n_bins:
        log.error("signal-bins mismatch: model was trained with n_bins=%s "
                  "but --signal-bins=%s was given", model_bins, args.n_bins)
        return EXIT_CONFIG
    if args.input.endswith(".csv"):
        rows = read_features_csv(args.input)
    else:
        if model_bins is not None:
            cfg = load_config(getattr(args, "config", None),
                              n_bins=model_bins,
                              delta=model.meta.get("delta"))
        packets = prepare_packets(args.input, cfg)
        if not packets:
            log.error("%s: no packets after filtering", args.input)
            return EXIT_FORMAT
        rows = packets_to_rows(packets, args.input, None, cfg)
    if rows and len(rows[0].row) != model.feature_dim:
        log.error("feature dimension %d does not match model feature_dim %d "
                  "(model n_bins=%s)", len(rows[0].row), model.feature_dim,
                  model_bins)
        return EXIT_CONFIG
    labels = predict(model, [r.row for r in rows])
    votes = predict_votes(model, [r.row for r in rows])
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# {_provenance(cfg)}\n")
        fh.write("capture,chunk_start,predicted,"
                 + ",".join(f"vote_{l}" for l in model.label_table) + "\n")
        for r, lbl, v in zip(rows, labels, votes):
            fh.write(f"{r.capture},{r.chunk_start:.9g},{lbl},"
                     + ",".join(f"{x:.9g}" for x in v) + "\n")
    print(f"predict: {len(rows)} chunks written to {args.out}")
    return EXIT_OK


def cmd_grid(args) -> int:
    cfg = _build_config(args)
    entries = read_manifest(args.manifest)
    windows = [float(w) for w in args.windows.split(",")]
    overlaps = [float(o) for o in args.overlaps.split(",")]
    result = grid_search(entries, windows, overlaps, cfg)
    write_grid_csv(args.out, result, cfg, version=__version__)
    if result.best is None:
        log.error("no grid cell produced metrics")
        return EXIT_PARTIAL
    best = result.best
    if args.report:
        Path(args.report).write_text(
            format_report(cfg, best.metrics,
                          extra={"window": best.window, "overlap": best.overlap,
                                 "n_chunks": best.n_chunks},
                          version=__version__),
            encoding="utf-8")
    print(f"grid: {len(result.cells)} cells evaluated, "
          f"{len(result.skipped)} skipped; best window={best.window:g} "
          f"overlap={best.overlap:g} accuracy={best.metrics.accuracy:.4f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    if args.profile in CANNED_PROFILES:
        profile = CANNED_PROFILES[args.profile]
    else:
        profile = load_profile(args.profile)
    records = generate_capture(profile, args.seed, out_path=args.out)
    print(f"synth: wrote {len(records)} packets ({profile.label}) to {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="interflow",
        description="Encrypted-traffic chunk classification pipeline")
    parser.add_argument("--version", action="version",
                        version=f"interflow {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="captures -> features CSV")
    p.add_argument("--manifest", required=True, help="CSV with path,label rows")
    p.add_argument("--out", required=True, help="output features CSV")
    _add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="features CSV -> model + report")
    p.add_argument("--features", required=True)
    p.add_argument("--model", required=True, help="output model JSON")
    p.add_argument("--report", help="output metrics report path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="model + capture/CSV -> predictions")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True, help="capture file or features CSV")
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("grid", help="window/overlap grid search")
    p.add_argument("--manifest", required=True)
    p.add_argument("--windows",
                   default=",".join(f"{w:g}" for w in PAPER_SWEEP_WINDOWS))
    p.add_argument("--overlaps",
                   default=",".join(f"{o:g}" for o in PAPER_SWEEP_OVERLAPS))
    p.add_argument("--out", required=True, help="output grid CSV")
    p.add_argument("--report", help="best-configuration report path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("synth", help="generate a synthetic labeled capture")
    p.add_argument("--profile", required=True,
                   help="profile TOML path or canned name: "
                        + ", ".join(CANNED_PROFILES))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output PCAP path")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("INTERFLOW_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError,) as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (CaptureFormatError, ModelFormatError) as exc:
        log.error("%s", exc)
        return EXIT_FORMAT
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_FORMAT


if __name__ == "__main__":
    sys.exit(main())
