"""Pre-finetuning sample generation and MLM masking.

Four text streams feed the first training phase: plain classical Arabic, POS
tagging, word segmentation, and diacritization, the latter three rewritten as
instruction-prefixed text so all four reduce to masked-language modelling.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .arabic import align, count_arabic_letters
from .encoding import (
    CLS_ID,
    IGNORE_LABEL,
    MASK_ID,
    SEP_ID,
    SPECIAL_TOKENS,
    Vocabulary,
    tokenize,
)
from .errors import (
    EmptyInput,
    InvalidEncoding,
    IoFailure,
    MalformedRecord,
)

# Instruction prefixes, byte-exact. Meanings: "parse the sentence" (POS),
# "segment the words", "diacritize the following".
POS_PREFIX = "أعرب الجملة:"
SEGMENTATION_PREFIX = "جزّء الكلمات:"
DIACRITIZATION_PREFIX = "شكّل ما يلي:"

SEP_MARKER = "[SEP]"


class Task(enum.Enum):
    """The four pre-finetuning streams."""

    CA = "ca"
    POS = "pos"
    SEGMENTATION = "seg"
    DIACRITIZATION = "diac"


@dataclass(frozen=True)
class PrefinetuneSample:
    """One instruction-formatted text sample tagged with its task."""

    task: Task
    text: str


def format_ca(sentence: str) -> str:
    """Plain text task: the sentence itself, no prefix."""
    if not sentence.strip():
        raise EmptyInput("empty sentence")
    return sentence


def format_pos(pairs: Sequence[tuple[str, str]]) -> str:
    """word [tag] pairs after the parsing prefix; tags may contain spaces."""
    if not pairs:
        raise EmptyInput("no (word, tag) pairs")
    for word, tag in pairs:
        if not word.strip() or not tag.strip():
            raise EmptyInput(f"blank word or tag in pair {(word, tag)!r}")
    body = " ".join(f"{word} [{tag}]" for word, tag in pairs)
    return f"{POS_PREFIX} {body}"


def format_segmentation(raw: str, segmented: str) -> str:
    """Raw sentence, separator marker, then the +-joined segmentation."""
    if not raw.strip() or not segmented.strip():
        raise EmptyInput("empty raw or segmented sentence")
    return f"{SEGMENTATION_PREFIX} {raw} {SEP_MARKER} {segmented}"


def format_diacritization(sentence: str) -> str:
    """Each word stripped to its bare form followed by one bracketed mark name
    per Arabic letter; words without Arabic letters pass through bare."""
    words = sentence.split()
    if not words:
        raise EmptyInput("empty sentence")
    parts = []
    for word in words:
        if count_arabic_letters(word) == 0:
            parts.append(word)
            continue
        aligned = align(word)
        glosses = "".join(f"[{cls.gloss}]" for cls in aligned.classes)
        parts.append("".join(aligned.letters) + glosses)
    return f"{DIACRITIZATION_PREFIX} {' '.join(parts)}"


def interleave_round_robin(
    streams: Mapping[Task, Sequence[str]]
) -> list[PrefinetuneSample]:
    """Merge task streams one sample at a time in Task declaration order,
    skipping exhausted streams, until all are consumed."""
    ordered = [(task, list(streams.get(task, ()))) for task in Task]
    longest = max((len(texts) for _, texts in ordered), default=0)
    merged = []
    for i in range(longest):
        for task, texts in ordered:
            if i < len(texts):
                merged.append(PrefinetuneSample(task=task, text=texts[i]))
    return merged


def write_samples(samples: Sequence[PrefinetuneSample], path) -> None:
    """One "TASK TAB text" line per sample."""
    lines = []
    for sample in samples:
        if "\t" in sample.text or "\n" in sample.text:
            raise MalformedRecord(
                f"sample text contains a tab or newline: {sample.text[:40]!r}"
            )
        lines.append(f"{sample.task.value}\t{sample.text}\n")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.writelines(lines)
    except OSError as exc:
        raise IoFailure(f"cannot write samples {path}: {exc}") from exc


def read_samples(path) -> list[PrefinetuneSample]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw_lines = fh.read().splitlines()
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(f"{path} is not valid UTF-8: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read samples {path}: {exc}") from exc
    samples = []
    for lineno, line in enumerate(raw_lines, start=1):
        parts = line.split("\t", 1)
        if len(parts) != 2:
            raise MalformedRecord(f"{path}:{lineno}: expected TASK TAB text")
        try:
            task = Task(parts[0])
        except ValueError as exc:
            raise MalformedRecord(f"{path}:{lineno}: unknown task {parts[0]!r}") from exc
        samples.append(PrefinetuneSample(task=task, text=parts[1]))
    return samples


def read_pos_file(path) -> list[list[tuple[str, str]]]:
    """Read "word TAB tag" lines; blank lines separate sentences."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw_lines = fh.read().splitlines()
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(f"{path} is not valid UTF-8: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read POS file {path}: {exc}") from exc
    sentences: list[list[tuple[str, str]]] = []
    current: list[tuple[str, str]] = []
    for lineno, line in enumerate(raw_lines, start=1):
        if not line.strip():
            if current:
                sentences.append(current)
                current = []
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise MalformedRecord(f"{path}:{lineno}: expected word TAB tag")
        current.append((parts[0], parts[1]))
    if current:
        sentences.append(current)
    return sentences


def read_seg_file(path) -> list[tuple[str, str]]:
    """Read "raw TAB segmented" lines."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw_lines = fh.read().splitlines()
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(f"{path} is not valid UTF-8: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read segmentation file {path}: {exc}") from exc
    pairs = []
    for lineno, line in enumerate(raw_lines, start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise MalformedRecord(f"{path}:{lineno}: expected raw TAB segmented")
        pairs.append((parts[0], parts[1]))
    return pairs


def encode_text(text: str, vocab: Vocabulary, max_len: int | None = None) -> list[int]:
    """Token ids with boundary specials; over-length bodies are truncated so
    the closing separator is kept."""
    if not text.strip():
        raise EmptyInput("empty text")
    body = [vocab.id_of(tok) for tok in tokenize(text)]
    if max_len is not None:
        if max_len < 3:
            raise ValueError("max_len must be at least 3")
        body = body[: max_len - 2]
    return [CLS_ID] + body + [SEP_ID]


@dataclass(frozen=True)
class MaskedSample:
    """An MLM training pair: corrupted ids and original ids at chosen spots."""

    tokens: tuple[int, ...]
    labels: tuple[int, ...]


def mlm_mask(
    ids: Sequence[int],
    vocab: Vocabulary,
    rng: np.random.Generator,
    mask_rate: float = 0.15,
    mask_prob: float = 0.8,
    random_prob: float = 0.1,
) -> MaskedSample:
    """Select non-special positions at mask_rate; corrupt selected positions
    as MASK / random token / unchanged per the given split; labels carry the
    original id at selected positions and are ignored elsewhere."""
    if not 0.0 <= mask_rate <= 1.0:
        raise ValueError(f"mask_rate must be in [0, 1], got {mask_rate}")
    if mask_prob < 0 or random_prob < 0 or mask_prob + random_prob > 1.0:
        raise ValueError("corruption probabilities must be non-negative, sum <= 1")
    n_special = len(SPECIAL_TOKENS)
    tokens = list(ids)
    labels = [IGNORE_LABEL] * len(tokens)
    candidates = [i for i, t in enumerate(tokens) if t >= n_special]
    if candidates:
        selected = np.asarray(candidates)[
            rng.random(len(candidates)) < mask_rate
        ]
        for pos in selected:
            labels[pos] = tokens[pos]
            roll = rng.random()
            if roll < mask_prob:
                tokens[pos] = MASK_ID
            elif roll < mask_prob + random_prob and vocab.size > n_special:
                tokens[pos] = int(rng.integers(n_special, vocab.size))
    return MaskedSample(tokens=tuple(tokens), labels=tuple(labels))
