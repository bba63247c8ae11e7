"""Desk-scale trainer for block-language next-token prediction."""

from .data import DatasetError, load_jsonl_dataset, split_train_val, VOCAB
from .model import SequenceTagger
from .training import TrainConfig, ResultCell, train, evaluate
from .heatmap import write_csv, render_heatmap, staircase_depth
