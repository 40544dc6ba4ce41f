"""Command-line interface: features, train, predict, evaluate, downsample,
aggregate and fuse subcommands."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from srqa import harness, imgcore, stats
from srqa.features import FEATURE_BLOCKS, extract_features
from srqa.fusion import grid_fuse
from srqa.regress.model import (
    load_model,
    predict_quality,
    save_model,
    train_two_stage,
)


def _feature_record(vec) -> dict:
    return {name: [float(v) for v in vec[sl]] for name, sl in FEATURE_BLOCKS.items()}


def cmd_features(args) -> int:
    vec = extract_features(imgcore.load_image(args.image))
    out = Path(args.out)
    if out.suffix.lower() == ".json":
        out.write_text(json.dumps(_feature_record(vec), indent=2, sort_keys=True) + "\n")
    else:
        with open(out, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["name", "value"])
            for name, sl in FEATURE_BLOCKS.items():
                for i, v in enumerate(vec[sl]):
                    writer.writerow([f"{name}_{i:02d}", repr(float(v))])
    print(f"wrote {vec.size} features to {out}")
    return 0


def cmd_train(args) -> int:
    entries = harness.load_manifest(args.manifest)
    feats = harness.feature_matrix(entries, cache_dir=args.cache_dir,
                                   threads=args.threads)
    scores = np.asarray([e.score for e in entries])
    model = train_two_stage(
        feats, scores, n_trees=args.trees, seed=args.seed,
        min_leaf=args.min_leaf, subsample=args.subsample,
    )
    save_model(model, args.out)
    print(f"trained on {len(entries)} images (T={args.trees}), wrote {args.out}")
    return 0


def cmd_predict(args) -> int:
    model = load_model(args.model)
    vec = extract_features(imgcore.load_image(args.image))
    print(f"{predict_quality(model, vec):.4f}")
    return 0


def cmd_evaluate(args) -> int:
    entries = harness.load_manifest(args.manifest)
    report = harness.run_protocol(
        entries, args.protocol, n_trees=args.trees,
        repetitions=args.repetitions, seed=args.seed, k=args.k,
        holdout_refs=args.holdout_refs, holdout_methods=args.holdout_methods,
        cache_dir=args.cache_dir, threads=args.threads,
    )
    prefix = Path(args.out_prefix)
    prefix.parent.mkdir(parents=True, exist_ok=True)
    Path(f"{prefix}.json").write_text(report.to_json() + "\n")
    Path(f"{prefix}.csv").write_text(report.to_csv())
    print(report.table())
    print(f"overall rho: {report.overall_rho:.4f}")
    print(f"wrote {prefix}.json and {prefix}.csv")
    return 0


def cmd_downsample(args) -> int:
    image = imgcore.load_image(args.image)
    low = imgcore.downsample(image, args.scale, args.sigma)
    imgcore.save_image(low, args.out)
    print(f"wrote {low.shape[1]}x{low.shape[0]} image to {args.out}")
    return 0


def cmd_aggregate(args) -> int:
    groups: dict = {}
    order: list = []
    with open(args.scores, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != harness.MANIFEST_FIELDS:
            print(f"error: {args.scores}: expected header "
                  f"{','.join(harness.MANIFEST_FIELDS)}", file=sys.stderr)
            return 1
        for row_no, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(harness.MANIFEST_FIELDS):
                print(f"error: {args.scores}: row {row_no}: bad field count",
                      file=sys.stderr)
                return 1
            key = tuple(c.strip() for c in row[:5])
            try:
                score = float(row[5])
            except ValueError as exc:
                print(f"error: {args.scores}: row {row_no}: {exc}", file=sys.stderr)
                return 1
            if key not in groups:
                groups[key] = []
                order.append(key)
            groups[key].append(score)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(harness.MANIFEST_FIELDS)
        for key in order:
            raw = groups[key]
            try:
                agg = stats.aggregate_perceptual(raw)
            except ValueError as exc:
                print(f"error: group {key}: {exc}", file=sys.stderr)
                return 1
            writer.writerow(list(key) + [repr(agg)])
    print(f"aggregated {len(order)} groups to {args.out}")
    return 0


def cmd_fuse(args) -> int:
    model = load_model(args.model)
    candidates = [imgcore.load_image(p) for p in args.images]
    fused, score_map = grid_fuse(candidates, model, g=args.grid,
                                 overlap=args.overlap)
    imgcore.save_image(fused, args.out)
    map_path = Path(args.map) if args.map else Path(args.out).with_suffix(".json")
    map_path.write_text(score_map.to_json() + "\n")
    print(f"wrote fused image to {args.out} and score map to {map_path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srqa",
        description="No-reference quality assessment for super-resolution images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("features", help="extract the 138-dim descriptor")
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True, help="output .csv or .json")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train a model on a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="output model file")
    p.add_argument("--trees", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--min-leaf", type=int, default=5)
    p.add_argument("--subsample", type=float, default=1.0)
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="score one image with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate", help="run a validation protocol")
    p.add_argument("--manifest", required=True)
    p.add_argument("--protocol", choices=harness.PROTOCOLS, default="5fold")
    p.add_argument("--trees", type=int, default=2000)
    p.add_argument("--repetitions", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--holdout-refs", type=int, default=6)
    p.add_argument("--holdout-methods", type=int, default=2)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--cache-dir", default=None)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("downsample", help="synthesize an LR image")
    p.add_argument("--image", required=True)
    p.add_argument("--scale", type=int, required=True)
    p.add_argument("--sigma", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_downsample)

    p = sub.add_parser("aggregate", help="trim-average raw rater scores")
    p.add_argument("--scores", required=True,
                   help="CSV of per-rater rows (manifest schema)")
    p.add_argument("--out", required=True, help="aggregated manifest CSV")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("fuse", help="stitch the best regions of SR candidates")
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True, help="fused PNG")
    p.add_argument("--map", default=None, help="score-map JSON (default: out.json)")
    p.add_argument("--grid", type=int, default=3)
    p.add_argument("--overlap", type=int, default=16)
    p.add_argument("images", nargs="+", help="candidate images")
    p.set_defaults(func=cmd_fuse)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
