#!/usr/bin/env python3
"""Train one configuration: `python3 train.py --config cfg.json`.

The config JSON mirrors TrainConfig, e.g.:
{
  "k": 3, "depth": 1, "d": 64, "lr": 1e-4, "epochs": 25, "seed": 0,
  "train_path": "data/k3_bin201_250.jsonl",
  "test_paths": {"201-250": "data/k3_bin201_250.jsonl"}
}
"""

import argparse
import sys

import torch

from trainer import TrainConfig, train, evaluate, DatasetError


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--config", required=True)
    ap.add_argument("--checkpoint", help="where to save model weights")
    args = ap.parse_args(argv)
    try:
        cfg = TrainConfig.from_json_file(args.config)
        model, val_acc = train(cfg)
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"k={cfg.k} depth={cfg.depth} val_accuracy={val_acc:.2f}")
    if args.checkpoint:
        torch.save(model.state_dict(), args.checkpoint)
    for bin_name in cfg.test_paths:
        cell = evaluate(model, cfg, bin_name)
        print(f"bin={cell.bin} accuracy={cell.accuracy:.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
