"""Training loop, early stopping, and whole-sequence evaluation."""

import json
from dataclasses import dataclass, field

import torch
from torch import nn

from .data import DatasetError, load_jsonl_dataset, split_train_val, encode_batch
from .model import SequenceTagger


@dataclass
class TrainConfig:
    k: int
    depth: int
    d: int = 64
    lr: float = 1e-4
    epochs: int = 25
    seed: int = 0
    train_path: str = ""
    test_paths: dict = field(default_factory=dict)  # bin name -> path
    # not taken from the source experiment description; desk-scale defaults
    heads: int = 2
    batch_size: int = 50
    train_count: int = 800
    val_count: int = 200

    @staticmethod
    def from_json_file(path):
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        return TrainConfig(**data)


@dataclass
class ResultCell:
    k: int
    depth: int
    bin: str
    accuracy: float  # whole-sequence accuracy in [0, 100]


def _batches(records, batch_size):
    for lo in range(0, len(records), batch_size):
        yield records[lo:lo + batch_size]


def sequence_accuracy(model, records, batch_size=50):
    """Percent of sequences predicted correctly at every single position."""
    model.eval()
    good = 0
    with torch.no_grad():
        for chunk in _batches(records, batch_size):
            tokens, labels, mask = encode_batch(chunk, torch)
            logits = model(tokens, mask)
            pred = logits.argmax(dim=-1)
            ok = ((pred == labels) | ~mask).all(dim=1)
            good += int(ok.sum())
    return 100.0 * good / len(records)


def train(cfg):
    """Trains on the 800/200 split of the training bin; returns
    (model, val_accuracy). Early-stops when validation hits 100%."""
    torch.manual_seed(cfg.seed)
    records = load_jsonl_dataset(cfg.train_path, expect_k=cfg.k)
    train_recs, val_recs = split_train_val(
        records, cfg.train_count, cfg.val_count, cfg.seed)
    model = SequenceTagger(d=cfg.d, depth=cfg.depth, heads=cfg.heads)
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    loss_fn = nn.CrossEntropyLoss(reduction="none")
    val_acc = 0.0
    for _epoch in range(cfg.epochs):
        model.train()
        for chunk in _batches(train_recs, cfg.batch_size):
            tokens, labels, mask = encode_batch(chunk, torch)
            logits = model(tokens, mask)
            loss = loss_fn(logits.transpose(1, 2), labels)
            loss = (loss * mask).sum() / mask.sum()
            opt.zero_grad()
            loss.backward()
            opt.step()
        val_acc = sequence_accuracy(model, val_recs, cfg.batch_size)
        if val_acc >= 100.0:
            break
    return model, val_acc


def evaluate(model, cfg, bin_name):
    try:
        path = cfg.test_paths[bin_name]
    except KeyError:
        raise DatasetError(f"no dataset registered for bin {bin_name!r}") from None
    records = load_jsonl_dataset(path, expect_k=cfg.k)
    acc = sequence_accuracy(model, records, cfg.batch_size)
    return ResultCell(k=cfg.k, depth=cfg.depth, bin=bin_name, accuracy=acc)
