"""Pre-finetuning task ablation: train one model per task subset, compare.

Each variant runs the same two-phase recipe — masked-language pre-finetuning
on its task subset (skipped when the subset is empty), then classification
finetuning — from the same initial weights, so report differences isolate the
contribution of the auxiliary tasks.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .arabic import strip_diacritics
from .errors import EmptyCorpus
from .inference import diacritize
from .metrics import EvalReport, MetricOptions, evaluate_corpus
from .model import ModelConfig, init_parameters
from .taskgen import (
    Task,
    format_ca,
    format_diacritization,
    format_pos,
    format_segmentation,
    interleave_round_robin,
)
from .training import (
    Phase,
    TrainSchedule,
    encode_finetune_corpus,
    prepare_prefinetune_data,
    train,
)

# Variant name -> pre-finetuning task subset, in cumulative build-up order.
VARIANTS: Mapping[str, tuple[Task, ...]] = {
    "classifier-only": (),
    "ca": (Task.CA,),
    "ca-pos": (Task.CA, Task.POS),
    "ca-pos-seg": (Task.CA, Task.POS, Task.SEGMENTATION),
    "full": (Task.CA, Task.POS, Task.SEGMENTATION, Task.DIACRITIZATION),
}


@dataclass(frozen=True)
class AblationData:
    """Shared inputs: diacritized splits plus auxiliary task sources."""

    train_sentences: tuple[str, ...]
    test_sentences: tuple[str, ...]
    pos_sentences: tuple[tuple[tuple[str, str], ...], ...] = ()
    seg_pairs: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class AblationResult:
    name: str
    tasks: tuple[Task, ...]
    report: EvalReport
    prefinetune_trace: tuple[float, ...]
    finetune_trace: tuple[float, ...]


def _task_streams(data: AblationData, tasks: Sequence[Task]) -> dict[Task, list[str]]:
    streams: dict[Task, list[str]] = {}
    for task in tasks:
        if task is Task.CA:
            streams[task] = [format_ca(s) for s in data.train_sentences]
        elif task is Task.POS:
            if not data.pos_sentences:
                raise EmptyCorpus("variant needs part-of-speech data")
            streams[task] = [format_pos(list(p)) for p in data.pos_sentences]
        elif task is Task.SEGMENTATION:
            if not data.seg_pairs:
                raise EmptyCorpus("variant needs segmentation data")
            streams[task] = [format_segmentation(r, s) for r, s in data.seg_pairs]
        else:
            streams[task] = [format_diacritization(s) for s in data.train_sentences]
    return streams


def run_variant(
    name: str,
    tasks: Sequence[Task],
    data: AblationData,
    vocab,
    config: ModelConfig,
    prefinetune_schedule: TrainSchedule,
    finetune_schedule: TrainSchedule,
    opts: MetricOptions = MetricOptions(),
) -> AblationResult:
    """Train one task subset end to end and evaluate on the test split."""
    if prefinetune_schedule.phase is not Phase.PREFINETUNE:
        raise ValueError("prefinetune_schedule must use the PREFINETUNE phase")
    if finetune_schedule.phase is not Phase.FINETUNE:
        raise ValueError("finetune_schedule must use the FINETUNE phase")
    if not data.train_sentences or not data.test_sentences:
        raise EmptyCorpus("ablation needs both train and test sentences")

    params = init_parameters(config, seed=config.seed)
    prefinetune_trace: tuple[float, ...] = ()
    if tasks:
        samples = interleave_round_robin(_task_streams(data, tasks))
        by_task = prepare_prefinetune_data(
            samples, vocab, config, seed=prefinetune_schedule.seed
        )
        params, trace = train(params, config, prefinetune_schedule, by_task)
        prefinetune_trace = tuple(trace)

    encoded = encode_finetune_corpus(
        list(data.train_sentences), vocab, config.max_seq_len
    )
    params, finetune_trace = train(params, config, finetune_schedule, encoded)

    pairs = [
        (gold, diacritize(strip_diacritics(gold), params, config, vocab))
        for gold in data.test_sentences
    ]
    return AblationResult(
        name=name,
        tasks=tuple(tasks),
        report=evaluate_corpus(pairs, opts),
        prefinetune_trace=prefinetune_trace,
        finetune_trace=tuple(finetune_trace),
    )


def run_matrix(
    data: AblationData,
    vocab,
    config: ModelConfig,
    prefinetune_schedule: TrainSchedule,
    finetune_schedule: TrainSchedule,
    variants: Mapping[str, Sequence[Task]] | None = None,
    opts: MetricOptions = MetricOptions(),
) -> dict[str, AblationResult]:
    """Run every variant on identical data; returns results in variant order."""
    chosen = VARIANTS if variants is None else variants
    return {
        name: run_variant(
            name, tasks, data, vocab, config,
            prefinetune_schedule, finetune_schedule, opts,
        )
        for name, tasks in chosen.items()
    }


def format_matrix(results: Mapping[str, AblationResult]) -> str:
    """Aligned text table: variant, task count, DER, WER."""
    rows = [("variant", "tasks", "der", "wer")]
    for name, result in results.items():
        rows.append(
            (name, str(len(result.tasks)),
             f"{result.report.der:.3f}", f"{result.report.wer:.3f}")
        )
    widths = [max(len(r[i]) for r in rows) for i in range(4)]
    return "\n".join(
        "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
        for row in rows
    ) + "\n"
