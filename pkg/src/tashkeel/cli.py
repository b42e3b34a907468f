"""Command-line pipeline: preprocess, sample generation, vocabulary, training,
diacritization, evaluation, statistics, and gradient checking.

Configuration comes from an optional UTF-8 key=value file (``--config`` or the
``TASHKEEL_CONFIG`` environment variable) overridden by command-line flags.
Unknown configuration keys are rejected. Every run logs its fully resolved
configuration to the error stream, and file outputs are written atomically.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
import tempfile
from typing import Callable, Sequence

from .arabic import strip_diacritics
from .checkpoint import load_checkpoint, save_checkpoint
from .corpus import (
    filter_partially_diacritized,
    load_corpus,
    prepare_test_set,
    prepare_train_set,
    read_segment_manifest,
    write_segment_manifest,
)
from .encoding import Vocabulary, build_vocab
from .errors import TashkeelError, VocabularyMismatch
from .inference import diacritize, parse_strategy
from .metrics import (
    DEFAULT_DER_EDGES,
    DEFAULT_WER_EDGES,
    MetricOptions,
    bucket_stats,
    evaluate_corpus,
    format_report,
    parse_kv_report,
    report_to_kv,
)
from .model import ModelConfig, gradient_check, init_parameters
from .taskgen import (
    Task,
    format_ca,
    format_diacritization,
    format_pos,
    format_segmentation,
    interleave_round_robin,
    read_pos_file,
    read_samples,
    read_seg_file,
    write_samples,
)
from .training import (
    Phase,
    TrainSchedule,
    encode_finetune_corpus,
    prepare_prefinetune_data,
    save_loss_trace,
    train,
)

log = logging.getLogger("tashkeel")

CONFIG_ENV_VAR = "TASHKEEL_CONFIG"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3


class UsageError(Exception):
    """Bad flags, unknown configuration keys, or contradictory options."""


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# Every key a configuration file may define, with its parser and default.
CONFIG_KEYS: dict[str, tuple[Callable[[str], object], object]] = {
    "corpus": (str, None),
    "vocab": (str, None),
    "checkpoint": (str, None),
    "output": (str, None),
    "model.hidden_dim": (int, 128),
    "model.layer_count": (int, 2),
    "model.head_count": (int, 4),
    "model.ffn_dim": (int, 256),
    "model.max_seq_len": (int, 512),
    "model.dropout_rate": (float, 0.1),
    "model.precision": (str, "single"),
    "model.seed": (int, None),
    "prefinetune.epochs": (int, 20),
    "prefinetune.batch_size": (int, 64),
    "prefinetune.learning_rate": (float, 1e-3),
    "prefinetune.weight_decay": (float, 0.01),
    "prefinetune.seed": (int, None),
    "prefinetune.shuffle": (_parse_bool, True),
    "prefinetune.sequential_curriculum": (_parse_bool, False),
    "finetune.epochs": (int, 40),
    "finetune.batch_size": (int, 64),
    "finetune.learning_rate": (float, 1e-3),
    "finetune.weight_decay": (float, 0.01),
    "finetune.seed": (int, None),
    "finetune.shuffle": (_parse_bool, True),
    "metrics.with_case_ending": (_parse_bool, True),
    "metrics.include_no_diacritic": (_parse_bool, True),
    "strategy": (str, "zero"),
    "token_limit": (int, None),
    "threshold": (float, 1.0),
    "min_frequency": (int, 2),
    "tasks": (str, "ca,pos,seg,diac"),
    "seed": (int, 0),
}


def read_config_file(path: str) -> dict[str, object]:
    """Parse a key=value file; unknown keys or bad values are usage errors."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except UnicodeDecodeError as exc:
        raise UsageError(f"config {path} is not UTF-8: {exc}") from exc
    values: dict[str, object] = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown configuration key {key!r}")
        parser, _ = CONFIG_KEYS[key]
        try:
            values[key] = parser(raw)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def resolve_config(args: argparse.Namespace) -> dict[str, object]:
    """defaults < config file (flag or environment) < explicit flags."""
    resolved = {key: default for key, (_, default) in CONFIG_KEYS.items()}
    config_path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV_VAR)
    if config_path:
        resolved.update(read_config_file(config_path))
    for dest, key in getattr(args, "_keymap", {}).items():
        value = getattr(args, dest, None)
        if value is not None:
            resolved[key] = value
    for phase_key in ("model.seed", "prefinetune.seed", "finetune.seed"):
        if resolved[phase_key] is None:
            resolved[phase_key] = resolved["seed"]
    for key, value in sorted(resolved.items()):
        log.info("config %s=%s", key, value)
    return resolved


def _require(resolved: dict[str, object], key: str) -> object:
    if resolved.get(key) is None:
        raise UsageError(f"missing required setting {key!r} (flag or config)")
    return resolved[key]


def _atomic_write_text(path, text: str) -> None:
    directory = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_run_record(output_path, resolved: dict[str, object]) -> None:
    lines = [f"{key}={resolved[key]}\n" for key in sorted(resolved)
             if resolved[key] is not None]
    _atomic_write_text(f"{output_path}.run", "".join(lines))


def _read_lines(path) -> list[str]:
    from .errors import InvalidEncoding, IoFailure

    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read().splitlines()
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(f"{path} is not valid UTF-8: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _parse_strategy_flag(text: str) -> str:
    try:
        parse_strategy(text)
    except TashkeelError as exc:
        raise UsageError(f"bad strategy {text!r}: {exc}") from exc
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return text


def _parse_edges(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad edge list {text!r}: {exc}") from exc


def _parse_tasks(text: str) -> frozenset[Task]:
    names = [part.strip() for part in text.split(",") if part.strip()]
    if not names:
        raise UsageError("task subset must name at least one task")
    try:
        return frozenset(Task(name) for name in names)
    except ValueError as exc:
        raise UsageError(
            f"unknown task in {text!r} (choose from "
            f"{', '.join(t.value for t in Task)})"
        ) from exc


def _load_model(resolved: dict[str, object]):
    vocab = Vocabulary.load(_require(resolved, "vocab"))
    checkpoint = load_checkpoint(_require(resolved, "checkpoint"))
    if checkpoint.vocab_digest != vocab.digest():
        raise VocabularyMismatch(
            "checkpoint was trained with a different vocabulary "
            f"({checkpoint.vocab_digest[:12]}… vs {vocab.digest()[:12]}…)"
        )
    return vocab, checkpoint


# --- subcommands --------------------------------------------------------------


def cmd_preprocess(args, resolved) -> int:
    corpus = load_corpus(_require(resolved, "corpus"))
    threshold = resolved["threshold"]
    kept = filter_partially_diacritized(corpus, threshold)
    kept_set = set(kept.sentences)
    dropped = [s for s in corpus.sentences if s not in kept_set]
    limit = resolved["token_limit"] or resolved["model.max_seq_len"]
    output = _require(resolved, "output")
    manifest_path = args.manifest or f"{output}.manifest"

    if args.mode == "train":
        final = prepare_train_set(kept, limit)
        final_set = set(final.sentences)
        overlong = [s for s in kept.sentences if s not in final_set]
        _atomic_write_text(output, "".join(f"{s}\n" for s in final.sentences))
        manifest = "".join(
            [f"dropped_partial\t{s}\n" for s in dropped]
            + [f"dropped_overlong\t{s}\n" for s in overlong]
        )
        _atomic_write_text(manifest_path, manifest)
        print(
            f"kept={len(final.sentences)} dropped_partial={len(dropped)} "
            f"dropped_overlong={len(overlong)}"
        )
    else:
        segmented = prepare_test_set(kept, limit)
        segments = [seg for entry in segmented for seg in entry.segments]
        _atomic_write_text(output, "".join(f"{s}\n" for s in segments))
        write_segment_manifest(segmented, manifest_path)
        split_count = sum(1 for entry in segmented if entry.was_split)
        print(
            f"kept={len(segmented)} dropped_partial={len(dropped)} "
            f"segments={len(segments)} split={split_count}"
        )
    return EXIT_OK


def cmd_gen_prefinetune(args, resolved) -> int:
    streams: dict[Task, list[str]] = {}
    if args.ca:
        streams[Task.CA] = [format_ca(s) for s in load_corpus(args.ca).sentences]
    if args.pos:
        streams[Task.POS] = [format_pos(p) for p in read_pos_file(args.pos)]
    if args.seg:
        streams[Task.SEGMENTATION] = [
            format_segmentation(raw, seg) for raw, seg in read_seg_file(args.seg)
        ]
    if args.diac:
        streams[Task.DIACRITIZATION] = [
            format_diacritization(s) for s in load_corpus(args.diac).sentences
        ]
    if not streams:
        raise UsageError("need at least one of --ca/--pos/--seg/--diac")
    samples = interleave_round_robin(streams)
    output = _require(resolved, "output")
    directory = os.path.dirname(os.fspath(output)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    os.close(fd)
    try:
        write_samples(samples, tmp)
        os.replace(tmp, output)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    counts = " ".join(
        f"{task.value}={len(texts)}" for task, texts in streams.items()
    )
    print(f"samples={len(samples)} {counts}")
    return EXIT_OK


def cmd_build_vocab(args, resolved) -> int:
    task_tags = {task.value for task in Task}
    texts: list[str] = []
    for path in args.inputs:
        for line in _read_lines(path):
            if not line.strip():
                continue
            head, tab, rest = line.partition("\t")
            texts.append(rest if tab and head in task_tags else line)
    vocab = build_vocab(texts, min_frequency=resolved["min_frequency"])
    output = _require(resolved, "output")
    _atomic_write_text(output, vocab.serialize())
    print(f"size={len(vocab)} digest={vocab.digest()}")
    return EXIT_OK


def cmd_train(args, resolved) -> int:
    phase = Phase(args.phase)
    vocab = Vocabulary.load(_require(resolved, "vocab"))
    model_flag_keys = [k for k in resolved if k.startswith("model.")]

    if args.init_checkpoint:
        explicit = {
            key for dest, key in args._keymap.items()
            if key in model_flag_keys and getattr(args, dest, None) is not None
        }
        if explicit:
            raise UsageError(
                "model dimensions come from --init-checkpoint; "
                f"drop {', '.join(sorted(explicit))}"
            )
        checkpoint = load_checkpoint(args.init_checkpoint)
        if checkpoint.vocab_digest != vocab.digest():
            raise VocabularyMismatch(
                "initial checkpoint was trained with a different vocabulary"
            )
        config, params = checkpoint.config, checkpoint.params
    else:
        config = ModelConfig(
            vocab_size=len(vocab),
            hidden_dim=resolved["model.hidden_dim"],
            layer_count=resolved["model.layer_count"],
            head_count=resolved["model.head_count"],
            ffn_dim=resolved["model.ffn_dim"],
            max_seq_len=resolved["model.max_seq_len"],
            dropout_rate=resolved["model.dropout_rate"],
            precision=resolved["model.precision"],
            seed=resolved["model.seed"],
        )
        params = init_parameters(config, seed=config.seed)

    prefix = phase.value
    for dest, suffix in (("epochs", "epochs"), ("batch_size", "batch_size"),
                         ("learning_rate", "learning_rate")):
        override = getattr(args, dest)
        if override is not None:
            resolved[f"{prefix}.{suffix}"] = override
    schedule = TrainSchedule(
        phase=phase,
        epochs=resolved[f"{prefix}.epochs"],
        batch_size=resolved[f"{prefix}.batch_size"],
        learning_rate=resolved[f"{prefix}.learning_rate"],
        weight_decay=resolved[f"{prefix}.weight_decay"],
        seed=resolved[f"{prefix}.seed"],
        shuffle=resolved[f"{prefix}.shuffle"],
        sequential_curriculum=resolved.get(
            "prefinetune.sequential_curriculum", False
        ),
    )

    corpus_path = _require(resolved, "corpus")
    if phase is Phase.FINETUNE:
        sentences = load_corpus(corpus_path).sentences
        data = encode_finetune_corpus(list(sentences), vocab, config.max_seq_len)
    else:
        wanted = _parse_tasks(resolved["tasks"])
        samples = [s for s in read_samples(corpus_path) if s.task in wanted]
        data = prepare_prefinetune_data(samples, vocab, config, seed=schedule.seed)

    params, trace = train(params, config, schedule, data)

    output = _require(resolved, "output")
    save_checkpoint(output, params, config, vocab.digest())
    _write_run_record(output, resolved)
    if args.trace:
        save_loss_trace(trace, args.trace)
    print(f"phase={phase.value} epochs={len(trace)} final_loss={trace[-1]!r}")
    return EXIT_OK


def cmd_diacritize(args, resolved) -> int:
    strategy = _parse_strategy_flag(resolved["strategy"])
    vocab, checkpoint = _load_model(resolved)
    if args.text is not None:
        lines = [args.text]
    elif args.input:
        lines = _read_lines(args.input)
    else:
        raise UsageError("need --text or --input")
    outputs = [
        diacritize(
            line, checkpoint.params, checkpoint.config, vocab,
            strategy=strategy, token_limit=resolved["token_limit"],
        )
        if line.strip() else line
        for line in lines
    ]
    if args.output:
        _atomic_write_text(args.output, "".join(f"{s}\n" for s in outputs))
        print(f"lines={len(outputs)}")
    else:
        for line in outputs:
            print(line)
    return EXIT_OK


def cmd_evaluate(args, resolved) -> int:
    strategy = _parse_strategy_flag(resolved["strategy"])
    if args.manifest:
        segmented = read_segment_manifest(args.manifest)
        golds = [seg for entry in segmented for seg in entry.segments]
        segment_map = [
            entry.original_index for entry in segmented for _ in entry.segments
        ]
    else:
        golds = list(load_corpus(_require(resolved, "corpus")).sentences)
        segment_map = None

    if args.identity:
        predictions = list(golds)
    else:
        vocab, checkpoint = _load_model(resolved)
        predictions = [
            diacritize(
                strip_diacritics(gold), checkpoint.params, checkpoint.config,
                vocab, strategy=strategy, token_limit=resolved["token_limit"],
            )
            for gold in golds
        ]

    opts = MetricOptions(
        with_case_ending=resolved["metrics.with_case_ending"],
        include_no_diacritic=resolved["metrics.include_no_diacritic"],
    )
    der_edges = _parse_edges(args.der_edges) if args.der_edges else DEFAULT_DER_EDGES
    wer_edges = _parse_edges(args.wer_edges) if args.wer_edges else DEFAULT_WER_EDGES
    report = evaluate_corpus(
        list(zip(golds, predictions)), opts, segment_map, der_edges, wer_edges
    )
    sys.stdout.write(format_report(report))
    if args.output:
        _atomic_write_text(args.output, report_to_kv(report))
    return EXIT_OK


def cmd_stats(args, resolved) -> int:
    parsed = parse_kv_report("\n".join(_read_lines(args.report)))
    rates: dict[str, list[float]] = {"der": [], "wer": []}
    for metric in rates:
        index = 0
        while f"per_sentence.{index}.{metric}" in parsed:
            rates[metric].append(float(parsed[f"per_sentence.{index}.{metric}"]))
            index += 1
    der_edges = _parse_edges(args.der_edges) if args.der_edges else DEFAULT_DER_EDGES
    wer_edges = _parse_edges(args.wer_edges) if args.wer_edges else DEFAULT_WER_EDGES
    for metric, edges in (("der", der_edges), ("wer", wer_edges)):
        print(f"{metric} buckets (n={len(rates[metric])}):")
        for bucket in bucket_stats(rates[metric], edges):
            label = ("zero" if bucket.lo == bucket.hi == 0
                     else f"({bucket.lo:g}, {bucket.hi:g}]")
            print(f"  {label:<16} count={bucket.count:<6} "
                  f"proportion={bucket.proportion:.4f}")
    return EXIT_OK


def cmd_gradcheck(args, resolved) -> int:
    config = None
    if args.hidden_dim or args.layer_count:
        config = ModelConfig(
            vocab_size=37,
            hidden_dim=args.hidden_dim or 16,
            layer_count=args.layer_count or 2,
            head_count=args.head_count or 2,
            ffn_dim=args.ffn_dim or 32,
            max_seq_len=6,
            dropout_rate=0.0,
            precision="double",
        )
    report = gradient_check(
        config,
        seed=resolved["seed"],
        tolerance=args.tolerance,
        probes_per_tensor=args.probes,
        step=args.step,
        corrupt_backward=args.corrupt_backward,
    )
    print(
        f"probes={report.probes} passed={report.passed} "
        f"pass_fraction={report.pass_fraction:.4f} "
        f"worst={report.worst_tensor} rel_err={report.worst_rel_err:.3e} "
        f"tolerance={report.tolerance:g}"
    )
    print("PASS")
    return EXIT_OK


# --- parser -------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_common(sub, *flags_keys):
    """Register flags whose values land in the resolved configuration."""
    keymap = {}
    for flag, key, kind, help_text in flags_keys:
        dest = flag.lstrip("-").replace("-", "_")
        sub.add_argument(flag, dest=dest, type=kind, default=None, help=help_text)
        keymap[dest] = key
    sub.set_defaults(_keymap=keymap)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tashkeel", description=__doc__)
    parser.add_argument("--config", help="key=value configuration file")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("preprocess", help="filter and fit a raw corpus")
    p.add_argument("--mode", choices=("train", "test"), default="train",
                   help="train drops overlong sentences; test splits them")
    p.add_argument("--manifest", help="manifest path (default: OUTPUT.manifest)")
    _add_common(
        p,
        ("--input", "corpus", str, "raw corpus, one sentence per line"),
        ("--output", "output", str, "cleaned corpus destination"),
        ("--threshold", "threshold", float, "minimum diacritization ratio"),
        ("--token-limit", "token_limit", int, "window token budget"),
    )
    p.set_defaults(func=cmd_preprocess)

    p = commands.add_parser("gen-prefinetune",
                            help="format and interleave task samples")
    p.add_argument("--ca", help="diacritized sentences file")
    p.add_argument("--pos", help="word TAB tag file, blank line per sentence")
    p.add_argument("--seg", help="raw TAB segmented file")
    p.add_argument("--diac", help="diacritized sentences file")
    _add_common(p, ("--output", "output", str, "sample file destination"))
    p.set_defaults(func=cmd_gen_prefinetune)

    p = commands.add_parser("build-vocab", help="build a whole-word vocabulary")
    p.add_argument("inputs", nargs="+", help="text or sample files")
    _add_common(
        p,
        ("--output", "output", str, "vocabulary file destination"),
        ("--min-frequency", "min_frequency", int, "frequency cutoff"),
    )
    p.set_defaults(func=cmd_build_vocab)

    p = commands.add_parser("train", help="run one training phase")
    p.add_argument("--phase", choices=("prefinetune", "finetune"), required=True)
    p.add_argument("--init-checkpoint", help="continue from this checkpoint")
    p.add_argument("--trace", help="write per-epoch loss trace here")
    p.add_argument("--epochs", type=int, help="override epochs for the phase")
    p.add_argument("--batch-size", type=int, help="override batch size")
    p.add_argument("--learning-rate", type=float, help="override learning rate")
    _add_common(
        p,
        ("--corpus", "corpus", str,
         "finetune: sentences file; prefinetune: sample file"),
        ("--vocab", "vocab", str, "vocabulary file"),
        ("--output", "output", str, "checkpoint destination"),
        ("--tasks", "tasks", str, "comma-separated task subset (prefinetune)"),
        ("--seed", "seed", int, "global seed"),
        ("--hidden-dim", "model.hidden_dim", int, "model width"),
        ("--layer-count", "model.layer_count", int, "encoder layers"),
        ("--head-count", "model.head_count", int, "attention heads"),
        ("--ffn-dim", "model.ffn_dim", int, "feed-forward width"),
        ("--max-seq-len", "model.max_seq_len", int, "position budget"),
        ("--dropout-rate", "model.dropout_rate", float, "dropout rate"),
        ("--precision", "model.precision", str, "single or double"),
    )
    p.set_defaults(func=cmd_train)

    p = commands.add_parser("diacritize", help="diacritize text with a model")
    p.add_argument("--text", help="one sentence on the command line")
    p.add_argument("--input", help="file of sentences, one per line")
    p.add_argument("--output", help="write results here instead of stdout")
    _add_common(
        p,
        ("--vocab", "vocab", str, "vocabulary file"),
        ("--checkpoint", "checkpoint", str, "model checkpoint"),
        ("--strategy", "strategy", str, 'window strategy: "zero" or "sliding:<p>"'),
        ("--token-limit", "token_limit", int, "window token budget"),
    )
    p.set_defaults(func=cmd_diacritize)

    p = commands.add_parser("evaluate", help="score a model against gold text")
    p.add_argument("--manifest", help="segment manifest from preprocess --mode test")
    p.add_argument("--identity", action="store_true",
                   help="score the gold corpus against itself (pipeline check)")
    p.add_argument("--output", help="write a key=value report here")
    p.add_argument("--no-case-ending", dest="no_case_ending",
                   action="store_true", help="ignore final-letter positions")
    p.add_argument("--exclude-no-diacritic", dest="exclude_no_diacritic",
                   action="store_true", help="ignore bare-letter gold positions")
    p.add_argument("--der-edges", help="comma-separated DER bucket edges")
    p.add_argument("--wer-edges", help="comma-separated WER bucket edges")
    _add_common(
        p,
        ("--gold", "corpus", str, "gold diacritized corpus"),
        ("--vocab", "vocab", str, "vocabulary file"),
        ("--checkpoint", "checkpoint", str, "model checkpoint"),
        ("--strategy", "strategy", str, "window strategy"),
        ("--token-limit", "token_limit", int, "window token budget"),
    )
    p.set_defaults(func=cmd_evaluate)

    p = commands.add_parser("stats", help="bucket a saved evaluation report")
    p.add_argument("--report", required=True, help="key=value report file")
    p.add_argument("--der-edges", help="comma-separated DER bucket edges")
    p.add_argument("--wer-edges", help="comma-separated WER bucket edges")
    _add_common(p)
    p.set_defaults(func=cmd_stats)

    p = commands.add_parser("gradcheck",
                            help="finite-difference gradient verification")
    p.add_argument("--tolerance", type=float, default=1e-4)
    p.add_argument("--probes", type=int, default=4,
                   help="probed entries per tensor")
    p.add_argument("--step", type=float, default=1e-5)
    p.add_argument("--corrupt-backward", action="store_true",
                   help="negative control: corrupt one gradient and expect failure")
    p.add_argument("--hidden-dim", type=int)
    p.add_argument("--layer-count", type=int)
    p.add_argument("--head-count", type=int)
    p.add_argument("--ffn-dim", type=int)
    _add_common(p, ("--seed", "seed", int, "probe selection seed"))
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(
            stream=sys.stderr, level=logging.INFO,
            format="%(levelname)s %(message)s",
        )
        resolved = resolve_config(args)
        if args.command == "evaluate":
            if args.no_case_ending:
                resolved["metrics.with_case_ending"] = False
            if args.exclude_no_diacritic:
                resolved["metrics.include_no_diacritic"] = False
        return args.func(args, resolved)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TashkeelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # pragma: no cover - defensive catch-all
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
