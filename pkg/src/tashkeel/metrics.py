"""Diacritic and word error rates with the standard option toggles,
corpus-level micro-averaged aggregation, and error-distribution buckets.

A position is considered when it is an Arabic letter, is not the word's final
letter under with_case_ending=False, and does not carry gold class NONE under
include_no_diacritic=False. DER pools positions; WER pools Arabic words with
at least one considered-position disagreement. Non-Arabic words never count.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .arabic import align, count_arabic_letters, strip_diacritics, DiacriticClass
from .errors import BaseTextMismatch, InvalidEdges, MalformedRecord, TashkeelError


@dataclass(frozen=True)
class MetricOptions:
    """Where positions come from: keep case endings? count gold-NONE spots?"""

    with_case_ending: bool = True
    include_no_diacritic: bool = True


@dataclass(frozen=True)
class Bucket:
    """One histogram bin over per-sentence error rates.

    The zero bin is exact (lo == hi == 0); every other bin is left-open,
    right-closed: lo < value <= hi.
    """

    lo: float
    hi: float
    count: int
    proportion: float


@dataclass(frozen=True)
class EvalReport:
    """Corpus metrics: pooled DER/WER, per-sentence rates, and buckets."""

    der: float
    wer: float
    options: MetricOptions
    sentence_count: int
    per_sentence: tuple[tuple[float, float], ...]
    der_buckets: tuple[Bucket, ...]
    wer_buckets: tuple[Bucket, ...]


@dataclass(frozen=True)
class _Counts:
    positions: int = 0
    position_errors: int = 0
    words: int = 0
    word_errors: int = 0

    def __add__(self, other: "_Counts") -> "_Counts":
        return _Counts(
            self.positions + other.positions,
            self.position_errors + other.position_errors,
            self.words + other.words,
            self.word_errors + other.word_errors,
        )

    @property
    def der(self) -> float:
        return 100.0 * self.position_errors / self.positions if self.positions else 0.0

    @property
    def wer(self) -> float:
        return 100.0 * self.word_errors / self.words if self.words else 0.0


def _pair_counts(gold: str, pred: str, opts: MetricOptions) -> _Counts:
    if strip_diacritics(gold) != strip_diacritics(pred):
        raise BaseTextMismatch(
            f"texts differ after mark removal: {gold!r} vs {pred!r}"
        )
    counts = _Counts()
    for gold_word, pred_word in zip(gold.split(), pred.split()):
        if count_arabic_letters(gold_word) == 0:
            continue
        gold_classes = align(gold_word).classes
        pred_classes = align(pred_word).classes
        last = len(gold_classes) - 1
        positions = errors = 0
        for i, (g, p) in enumerate(zip(gold_classes, pred_classes)):
            if not opts.with_case_ending and i == last:
                continue
            if not opts.include_no_diacritic and g is DiacriticClass.NONE:
                continue
            positions += 1
            if g is not p:
                errors += 1
        counts += _Counts(positions, errors, 1, 1 if errors else 0)
    return counts


def der(gold: str, pred: str, opts: MetricOptions = MetricOptions()) -> float:
    """Percentage of considered letter positions with the wrong class."""
    return _pair_counts(gold, pred, opts).der


def wer(gold: str, pred: str, opts: MetricOptions = MetricOptions()) -> float:
    """Percentage of Arabic words with at least one wrong considered position."""
    return _pair_counts(gold, pred, opts).wer


def bucket_stats(
    values: Sequence[float], edges: Sequence[float]
) -> tuple[Bucket, ...]:
    """Histogram with an exact-zero bin plus (edges[i], edges[i+1]] bins.

    Edges must start at 0 and increase strictly; every value must land in a
    bin, so values cannot be negative or exceed the last edge.
    """
    edges = list(edges)
    if len(edges) < 2 or edges[0] != 0:
        raise InvalidEdges(f"edges must start at 0 with at least one range: {edges}")
    if any(a >= b for a, b in zip(edges, edges[1:])):
        raise InvalidEdges(f"edges must increase strictly: {edges}")
    bins = [(0.0, 0.0)] + list(zip(edges, edges[1:]))
    counts = [0] * len(bins)
    for value in values:
        if value == 0:
            counts[0] += 1
            continue
        for i, (lo, hi) in enumerate(bins[1:], start=1):
            if lo < value <= hi:
                counts[i] += 1
                break
        else:
            raise InvalidEdges(f"value {value} outside bucket range {edges}")
    total = len(values)
    return tuple(
        Bucket(lo, hi, c, c / total if total else 0.0)
        for (lo, hi), c in zip(bins, counts)
    )


DEFAULT_DER_EDGES = (0.0, 10.0, 100.0)
DEFAULT_WER_EDGES = (0.0, 30.0, 100.0)


def evaluate_corpus(
    pairs: Sequence[tuple[str, str]],
    opts: MetricOptions = MetricOptions(),
    segment_map: Sequence[int] | None = None,
    der_edges: Sequence[float] = DEFAULT_DER_EDGES,
    wer_edges: Sequence[float] = DEFAULT_WER_EDGES,
) -> EvalReport:
    """Micro-averaged corpus metrics plus per-sentence rates and buckets.

    `segment_map[i]` names the original sentence index of pair i; segments of
    one original pool into a single per-sentence entry, so buckets and the
    sentence count reflect original sentences. Without a map every pair is
    its own sentence.
    """
    if segment_map is None:
        segment_map = list(range(len(pairs)))
    if len(segment_map) != len(pairs):
        raise ValueError("segment_map length must match pair count")
    per_pair: list[_Counts] = []
    for index, (gold, pred) in enumerate(pairs):
        try:
            per_pair.append(_pair_counts(gold, pred, opts))
        except TashkeelError as exc:
            raise type(exc)(f"pair {index}: {exc}") from exc
    grouped: dict[int, _Counts] = {}
    order: list[int] = []
    for original, counts in zip(segment_map, per_pair):
        if original not in grouped:
            grouped[original] = _Counts()
            order.append(original)
        grouped[original] += counts
    total = sum(per_pair, _Counts())
    per_sentence = tuple((grouped[o].der, grouped[o].wer) for o in order)
    return EvalReport(
        der=total.der,
        wer=total.wer,
        options=opts,
        sentence_count=len(order),
        per_sentence=per_sentence,
        der_buckets=bucket_stats([d for d, _ in per_sentence], der_edges),
        wer_buckets=bucket_stats([w for _, w in per_sentence], wer_edges),
    )


def _format_buckets(name: str, buckets: Sequence[Bucket]) -> list[str]:
    lines = [f"buckets.{name}:"]
    for b in buckets:
        label = "zero" if b.lo == b.hi == 0 else f"({b.lo:g}, {b.hi:g}]"
        lines.append(
            f"  {label:<12} count={b.count} proportion={b.proportion:.4f}"
        )
    return lines


def format_report(report: EvalReport) -> str:
    """Human-readable structured text with stable key names."""
    lines = [
        f"der: {report.der:.4f}",
        f"wer: {report.wer:.4f}",
        f"options: with_case_ending={report.options.with_case_ending} "
        f"include_no_diacritic={report.options.include_no_diacritic}",
        f"sentences: {report.sentence_count}",
    ]
    lines += _format_buckets("der", report.der_buckets)
    lines += _format_buckets("wer", report.wer_buckets)
    return "\n".join(lines) + "\n"


def report_to_kv(report: EvalReport) -> str:
    """Line-oriented key=value form for harnesses; floats keep full precision."""
    lines = [
        f"der={report.der!r}",
        f"wer={report.wer!r}",
        f"options.with_case_ending={str(report.options.with_case_ending).lower()}",
        f"options.include_no_diacritic={str(report.options.include_no_diacritic).lower()}",
        f"sentence_count={report.sentence_count}",
    ]
    for i, (d, w) in enumerate(report.per_sentence):
        lines.append(f"per_sentence.{i}.der={d!r}")
        lines.append(f"per_sentence.{i}.wer={w!r}")
    for name, buckets in (("der", report.der_buckets), ("wer", report.wer_buckets)):
        for j, b in enumerate(buckets):
            lines.append(
                f"buckets.{name}.{j}={b.lo:g}:{b.hi:g}:{b.count}:{b.proportion!r}"
            )
    return "\n".join(lines) + "\n"


def parse_kv_report(text: str) -> dict[str, str]:
    """Parse the key=value form back into a flat dict (values stay strings)."""
    result: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if "=" not in line:
            raise MalformedRecord(f"line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        result[key] = value
    return result
