"""Two-phase training: MLM pre-finetuning over the task streams, then
token-classification finetuning, both under AdamW with decoupled weight decay.

Pre-finetuning interleaves the task streams one batch per task in rotation
(or sequentially, one task after another, when the schedule asks for a
curriculum). Everything is deterministic given the schedule seed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .encoding import (
    IGNORE_LABEL,
    PAD_ID,
    EncodedSample,
    Vocabulary,
    encode_for_training,
)
from .errors import EmptyCorpus, InvalidSchedule, IoFailure
from .model import ModelConfig, loss_and_grads
from .taskgen import (
    MaskedSample,
    PrefinetuneSample,
    Task,
    encode_text,
    mlm_mask,
)


class Phase(enum.Enum):
    PREFINETUNE = "prefinetune"
    FINETUNE = "finetune"


@dataclass(frozen=True)
class TrainSchedule:
    """One phase's training plan."""

    phase: Phase
    epochs: int
    batch_size: int = 64
    learning_rate: float = 1e-3
    weight_decay: float = 0.01
    seed: int = 0
    shuffle: bool = True
    sequential_curriculum: bool = False

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise InvalidSchedule("epochs must be >= 1")
        if self.batch_size < 1:
            raise InvalidSchedule("batch_size must be >= 1")
        if self.learning_rate < 0 or self.weight_decay < 0:
            raise InvalidSchedule("learning_rate and weight_decay must be >= 0")


class AdamW:
    """Decoupled-weight-decay Adam; decay applies to matrices only."""

    def __init__(
        self,
        params: Mapping[str, np.ndarray],
        learning_rate: float,
        weight_decay: float = 0.01,
        beta1: float = 0.9,
        beta2: float = 0.999,
        eps: float = 1e-8,
    ):
        self.learning_rate = learning_rate
        self.weight_decay = weight_decay
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.step_count = 0
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, params: dict[str, np.ndarray], grads: Mapping[str, np.ndarray]) -> None:
        self.step_count += 1
        bc1 = 1.0 - self.beta1 ** self.step_count
        bc2 = 1.0 - self.beta2 ** self.step_count
        for name, p in params.items():
            g = grads[name]
            m = self.m[name]
            v = self.v[name]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            update = (m / bc1) / (np.sqrt(v / bc2) + self.eps)
            if p.ndim >= 2:
                update = update + self.weight_decay * p
            p -= self.learning_rate * update


def pad_batch(
    pairs: Sequence[tuple[Sequence[int], Sequence[int]]]
) -> tuple[np.ndarray, np.ndarray]:
    """Stack (tokens, labels) pairs, padding tokens with PAD and labels with
    the ignore value."""
    if not pairs:
        raise ValueError("empty batch")
    width = max(len(tokens) for tokens, _ in pairs)
    ids = np.full((len(pairs), width), PAD_ID, dtype=np.int64)
    labels = np.full((len(pairs), width), IGNORE_LABEL, dtype=np.int64)
    for row, (tokens, labs) in enumerate(pairs):
        ids[row, : len(tokens)] = tokens
        labels[row, : len(labs)] = labs
    return ids, labels


def _chunk(indices: np.ndarray, batch_size: int) -> list[np.ndarray]:
    return [indices[i : i + batch_size] for i in range(0, len(indices), batch_size)]


def _finetune_epoch_batches(samples, schedule, rng):
    order = np.arange(len(samples))
    if schedule.shuffle:
        order = rng.permutation(len(samples))
    for chunk in _chunk(order, schedule.batch_size):
        yield pad_batch([(samples[i].tokens, samples[i].labels) for i in chunk])


def _prefinetune_epoch_batches(by_task, schedule, rng):
    """One epoch's batches: one batch per task in rotation (round-robin), or
    all of each task in declaration order (sequential curriculum)."""
    per_task: list[list[np.ndarray]] = []
    tasks = [task for task in Task if by_task.get(task)]
    for task in tasks:
        samples = by_task[task]
        order = np.arange(len(samples))
        if schedule.shuffle:
            order = rng.permutation(len(samples))
        per_task.append(_chunk(order, schedule.batch_size))
    if schedule.sequential_curriculum:
        rounds = [(t, chunk) for t, chunks in enumerate(per_task) for chunk in chunks]
    else:
        rounds = []
        depth = max((len(chunks) for chunks in per_task), default=0)
        for i in range(depth):
            for t, chunks in enumerate(per_task):
                if i < len(chunks):
                    rounds.append((t, chunks[i]))
    for t, chunk in rounds:
        samples = by_task[tasks[t]]
        yield pad_batch([(samples[i].tokens, samples[i].labels) for i in chunk])


def train(
    params: dict[str, np.ndarray],
    config: ModelConfig,
    schedule: TrainSchedule,
    data,
) -> tuple[dict[str, np.ndarray], list[float]]:
    """Run one phase; returns the (mutated) parameters and the per-epoch mean
    loss trace.

    `data` is a sequence of EncodedSample for FINETUNE, or a mapping
    Task → sequence of MaskedSample for PREFINETUNE.
    """
    if schedule.phase is Phase.FINETUNE:
        if not data:
            raise EmptyCorpus("no finetuning samples")
        epoch_batches = lambda rng: _finetune_epoch_batches(data, schedule, rng)
        head = "cls"
    else:
        if not any(data.get(task) for task in Task):
            raise EmptyCorpus("no pre-finetuning samples")
        epoch_batches = lambda rng: _prefinetune_epoch_batches(data, schedule, rng)
        head = "mlm"
    rng = np.random.default_rng(schedule.seed)
    optimizer = AdamW(params, schedule.learning_rate, schedule.weight_decay)
    trace: list[float] = []
    for _ in range(schedule.epochs):
        losses = []
        for ids, labels in epoch_batches(rng):
            loss, grads = loss_and_grads(
                params, config, ids, labels, head, train=True, rng=rng
            )
            optimizer.step(params, grads)
            losses.append(loss)
        trace.append(float(np.mean(losses)))
    return params, trace


def encode_finetune_corpus(
    sentences: Sequence[str], vocab: Vocabulary, max_len: int = 512
) -> list[EncodedSample]:
    """Label-encode diacritized sentences for the classification phase."""
    return [encode_for_training(s, vocab, max_len) for s in sentences]


def prepare_prefinetune_data(
    samples: Sequence[PrefinetuneSample],
    vocab: Vocabulary,
    config: ModelConfig,
    mask_rate: float = 0.15,
    mask_prob: float = 0.8,
    random_prob: float = 0.1,
    seed: int = 0,
) -> dict[Task, list[MaskedSample]]:
    """Tokenize and mask instruction samples, grouped per task.

    Over-length texts are truncated to the model limit. Masking consumes one
    seeded generator across samples in input order, so the result is a pure
    function of (samples, vocab, config, rates, seed).
    """
    rng = np.random.default_rng(seed)
    by_task: dict[Task, list[MaskedSample]] = {task: [] for task in Task}
    for sample in samples:
        ids = encode_text(sample.text, vocab, max_len=config.max_seq_len)
        by_task[sample.task].append(
            mlm_mask(ids, vocab, rng, mask_rate, mask_prob, random_prob)
        )
    return by_task


def save_loss_trace(trace: Sequence[float], path) -> None:
    """One "epoch TAB loss" line per epoch; loss written with full precision."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            for epoch, loss in enumerate(trace):
                fh.write(f"{epoch}\t{loss!r}\n")
    except OSError as exc:
        raise IoFailure(f"cannot write loss trace {path}: {exc}") from exc
