#!/usr/bin/env python3
"""Run the (k, depth) accuracy grid:
`python3 grid.py --ks 3..6 --depths 1..4 --data DIR --out results.csv`.

DIR must contain one training file per k named k{K}_train.jsonl (the
[201,250] bin from the generator); optional extra bins named
k{K}_test_{LO}-{HI}.jsonl are evaluated as well. Writes the CSV, a heatmap
image next to it, and per-seed rows when --seeds lists several.
"""

import argparse
import pathlib
import re
import sys

from trainer import (
    TrainConfig, ResultCell, train, evaluate, write_csv, render_heatmap,
    DatasetError,
)


def parse_range(text):
    m = re.fullmatch(r"(\d+)\.\.(\d+)", text)
    if not m:
        raise argparse.ArgumentTypeError("expected LO..HI")
    lo, hi = int(m.group(1)), int(m.group(2))
    if lo > hi:
        raise argparse.ArgumentTypeError("empty range")
    return range(lo, hi + 1)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--ks", type=parse_range, required=True)
    ap.add_argument("--depths", type=parse_range, required=True)
    ap.add_argument("--data", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--seeds", default="0",
                    help="comma-separated seeds; cells are per seed")
    ap.add_argument("--d", type=int, default=64)
    ap.add_argument("--lr", type=float, default=1e-4)
    ap.add_argument("--epochs", type=int, default=25)
    ap.add_argument("--train-count", type=int, default=800)
    ap.add_argument("--val-count", type=int, default=200)
    args = ap.parse_args(argv)

    data = pathlib.Path(args.data)
    seeds = [int(s) for s in args.seeds.split(",")]
    cells = []
    try:
        for k in args.ks:
            train_path = data / f"k{k}_train.jsonl"
            test_paths = {}
            for path in sorted(data.glob(f"k{k}_test_*.jsonl")):
                bin_name = path.stem.split("_test_")[1]
                test_paths[bin_name] = str(path)
            for depth in args.depths:
                for seed in seeds:
                    cfg = TrainConfig(k=k, depth=depth, d=args.d, lr=args.lr,
                                      epochs=args.epochs, seed=seed,
                                      train_path=str(train_path),
                                      test_paths=test_paths,
                                      train_count=args.train_count,
                                      val_count=args.val_count)
                    model, val_acc = train(cfg)
                    bin_name = f"val-seed{seed}"
                    cells.append(ResultCell(k=k, depth=depth, bin=bin_name,
                                            accuracy=val_acc))
                    print(f"k={k} depth={depth} seed={seed} "
                          f"val={val_acc:.2f}", flush=True)
                    for name in test_paths:
                        cell = evaluate(model, cfg, name)
                        cell.bin = f"{name}-seed{seed}"
                        cells.append(cell)
                        print(f"  bin={name} accuracy={cell.accuracy:.2f}",
                              flush=True)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    write_csv(cells, args.out)
    render_heatmap(cells, str(pathlib.Path(args.out).with_suffix(".png")))
    return 0


if __name__ == "__main__":
    sys.exit(main())
