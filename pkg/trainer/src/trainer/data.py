"""Loading and validating the generator's JSONL next-token datasets.

Each line must be an object {"k": int, "source": "^<word>", "target": "01..."}
with source and target the same length, source over {^, a, b} with the ^ only
in front, and target over {0, 1}. Anything else is rejected.
"""

import json
import random

# BOS is an ordinary vocabulary item
VOCAB = {"^": 0, "a": 1, "b": 2}


class DatasetError(Exception):
    pass


def _check_record(rec, lineno, expect_k):
    if not isinstance(rec, dict):
        raise DatasetError(f"line {lineno}: not an object")
    missing = {"k", "source", "target"} - rec.keys()
    if missing:
        raise DatasetError(f"line {lineno}: missing fields {sorted(missing)}")
    k, source, target = rec["k"], rec["source"], rec["target"]
    if not isinstance(k, int) or not isinstance(source, str) \
            or not isinstance(target, str):
        raise DatasetError(f"line {lineno}: wrong field types")
    if expect_k is not None and k != expect_k:
        raise DatasetError(f"line {lineno}: k={k}, expected {expect_k}")
    if len(source) != len(target):
        raise DatasetError(f"line {lineno}: source/target length mismatch")
    if not source.startswith("^") or "^" in source[1:]:
        raise DatasetError(f"line {lineno}: source must start with a single '^'")
    if any(c not in VOCAB for c in source):
        raise DatasetError(f"line {lineno}: source symbol outside vocabulary")
    if any(c not in "01" for c in target):
        raise DatasetError(f"line {lineno}: target must be over 0/1")
    return rec


def load_jsonl_dataset(path, expect_k=None):
    """Returns a list of validated {"k", "source", "target"} records."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"line {lineno}: bad JSON: {exc}") from exc
            records.append(_check_record(rec, lineno, expect_k))
    if not records:
        raise DatasetError(f"{path}: empty dataset")
    return records


def split_train_val(records, train_count, val_count, seed):
    """Deterministic shuffle-and-split (e.g. 800/200 of a 1000-record bin)."""
    if train_count + val_count > len(records):
        raise DatasetError(
            f"need {train_count + val_count} records, have {len(records)}")
    order = list(range(len(records)))
    random.Random(seed).shuffle(order)
    train = [records[i] for i in order[:train_count]]
    val = [records[i] for i in order[train_count:train_count + val_count]]
    return train, val


def encode_batch(records, torch):
    """Pads a list of records into (tokens, labels, mask) long tensors."""
    max_len = max(len(r["source"]) for r in records)
    tokens = torch.zeros(len(records), max_len, dtype=torch.long)
    labels = torch.zeros(len(records), max_len, dtype=torch.long)
    mask = torch.zeros(len(records), max_len, dtype=torch.bool)
    for row, rec in enumerate(records):
        n = len(rec["source"])
        tokens[row, :n] = torch.tensor([VOCAB[c] for c in rec["source"]])
        labels[row, :n] = torch.tensor([int(c) for c in rec["target"]])
        mask[row, :n] = True
    return tokens, labels, mask
