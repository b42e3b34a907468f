"""Corpus ingestion, diacritization-ratio filtering, and length-bounded
recursive sentence splitting.

Training keeps only sentences that already fit the token limit; test sentences
are split recursively at separators (line break, then period, then comma, then
space) so every segment fits while concatenation reproduces the original
sentence byte-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

from .arabic import diacritization_ratio
from .encoding import encoded_length
from .errors import (
    InvalidEncoding,
    IoFailure,
    MalformedRecord,
    UnsplittableSegment,
)

# Separator classes in priority order; a separator stays attached to the left
# segment so the cut never loses a character.
SEPARATOR_CLASSES: tuple[frozenset[str], ...] = (
    frozenset("\n"),
    frozenset({".", "۔"}),   # Latin and Arabic full stop
    frozenset({",", "،"}),   # Latin and Arabic comma
    frozenset(" "),
)


@dataclass(frozen=True)
class RawCorpus:
    """Ordered sentences plus a descriptor of where they came from."""

    sentences: tuple[str, ...]
    source_id: str = ""


@dataclass(frozen=True)
class SegmentedSentence:
    """One original sentence and the segments it was cut into.

    Concatenating `segments` reproduces the original text byte-exactly;
    separators stay attached to the left segment.
    """

    original_index: int
    segments: tuple[str, ...]
    was_split: bool

    @property
    def text(self) -> str:
        return "".join(self.segments)


def load_corpus(path) -> RawCorpus:
    """Read one sentence per line; trailing whitespace trimmed, blanks dropped."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw_lines = fh.read().splitlines()
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(f"{path} is not valid UTF-8: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read corpus {path}: {exc}") from exc
    sentences = tuple(
        line.rstrip() for line in raw_lines if line.strip()
    )
    return RawCorpus(sentences=sentences, source_id=str(path))


def filter_partially_diacritized(
    corpus: RawCorpus, threshold: float = 0.9
) -> RawCorpus:
    """Keep sentences whose diacritization ratio is at least `threshold`."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    kept = tuple(
        s for s in corpus.sentences if diacritization_ratio(s) >= threshold
    )
    return RawCorpus(sentences=kept, source_id=corpus.source_id)


def _split_candidates(segment: str) -> list[int]:
    """Cut positions (index of the separator character) from the highest
    priority separator class present, excluding cuts that would leave either
    side blank."""
    for cls in SEPARATOR_CLASSES:
        candidates = [
            i
            for i, ch in enumerate(segment)
            if ch in cls and segment[: i + 1].strip() and segment[i + 1 :].strip()
        ]
        if candidates:
            return candidates
    return []


def _split_recursive(
    segment: str, token_limit: int, count_tokens: Callable[[str], int]
) -> list[str]:
    if count_tokens(segment) <= token_limit:
        return [segment]
    candidates = _split_candidates(segment)
    if not candidates:
        raise UnsplittableSegment(
            f"segment of {count_tokens(segment)} tokens exceeds {token_limit} "
            f"and has no split point: {segment[:60]!r}..."
        )
    midpoint = len(segment) / 2
    cut = min(candidates, key=lambda i: (abs(i + 1 - midpoint), i))
    left, right = segment[: cut + 1], segment[cut + 1 :]
    return _split_recursive(left, token_limit, count_tokens) + _split_recursive(
        right, token_limit, count_tokens
    )


def split_long_sentence(
    sentence: str,
    token_limit: int,
    count_tokens: Callable[[str], int] = encoded_length,
    original_index: int = 0,
) -> SegmentedSentence:
    """Split a sentence until every segment fits within token_limit.

    The split point is the highest-priority separator occurrence closest to
    the segment midpoint. Raises UnsplittableSegment when an oversized
    segment has no usable separator (e.g. one enormous word).
    """
    if token_limit < 2:
        raise ValueError("token_limit must leave room for boundary tokens")
    segments = _split_recursive(sentence, token_limit, count_tokens)
    return SegmentedSentence(
        original_index=original_index,
        segments=tuple(segments),
        was_split=len(segments) > 1,
    )


def prepare_train_set(
    corpus: RawCorpus,
    token_limit: int,
    count_tokens: Callable[[str], int] = encoded_length,
) -> RawCorpus:
    """Training keeps only sentences that fit outright; oversized ones are
    dropped rather than split."""
    kept = tuple(
        s for s in corpus.sentences if count_tokens(s) <= token_limit
    )
    return RawCorpus(sentences=kept, source_id=corpus.source_id)


def prepare_test_set(
    corpus: RawCorpus,
    token_limit: int,
    count_tokens: Callable[[str], int] = encoded_length,
) -> list[SegmentedSentence]:
    """Split every sentence, keeping the original index for aggregation."""
    return [
        split_long_sentence(s, token_limit, count_tokens, original_index=i)
        for i, s in enumerate(corpus.sentences)
    ]


def write_segment_manifest(segmented: Sequence[SegmentedSentence], path) -> None:
    """Write one "original_index TAB segment_index TAB text" line per segment."""
    lines = []
    for entry in segmented:
        for seg_idx, text in enumerate(entry.segments):
            if "\t" in text or "\n" in text:
                raise MalformedRecord(
                    f"segment of sentence {entry.original_index} contains a "
                    "tab or newline and cannot be written to a manifest"
                )
            lines.append(f"{entry.original_index}\t{seg_idx}\t{text}\n")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.writelines(lines)
    except OSError as exc:
        raise IoFailure(f"cannot write manifest {path}: {exc}") from exc


def read_segment_manifest(path) -> list[SegmentedSentence]:
    """Read a manifest back into SegmentedSentence records, order preserved."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw_lines = fh.read().splitlines()
    except UnicodeDecodeError as exc:
        raise InvalidEncoding(f"{path} is not valid UTF-8: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read manifest {path}: {exc}") from exc
    grouped: dict[int, list[tuple[int, str]]] = {}
    order: list[int] = []
    for lineno, line in enumerate(raw_lines, start=1):
        parts = line.split("\t")
        if len(parts) != 3:
            raise MalformedRecord(
                f"{path}:{lineno}: expected original TAB segment TAB text"
            )
        try:
            orig, seg = int(parts[0]), int(parts[1])
        except ValueError as exc:
            raise MalformedRecord(f"{path}:{lineno}: bad index") from exc
        if orig not in grouped:
            grouped[orig] = []
            order.append(orig)
        grouped[orig].append((seg, parts[2]))
    result = []
    for orig in order:
        entries = grouped[orig]
        if [seg for seg, _ in entries] != list(range(len(entries))):
            raise MalformedRecord(
                f"{path}: segments of sentence {orig} are not consecutive"
            )
        result.append(
            SegmentedSentence(
                original_index=orig,
                segments=tuple(text for _, text in entries),
                was_split=len(entries) > 1,
            )
        )
    return result
