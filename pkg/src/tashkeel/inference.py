"""Windowed inference over long sentences with per-word majority voting.

Two planning strategies: "zero" packs words greedily into disjoint windows;
"sliding:<p>" advances window starts by p words so most words are predicted
several times with different context, and the forms are vote-resolved per
word. Window token budgets use the mask-insertion encoding and reserve the
two boundary specials.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass
from typing import Mapping, Sequence

from .arabic import count_arabic_letters, strip_diacritics
from .encoding import IGNORE_LABEL, Vocabulary, decode, encode_for_inference
from .errors import EmptySentence, InvalidStep, UnsplittableWord
from .metrics import EvalReport, MetricOptions, evaluate_corpus
from .model import ModelConfig, predict

_WHITESPACE_SPLIT = re.compile(r"(\s+)")

# Published desk-reference results for the two cleaned Tashkeela benchmark
# derivatives (percent DER/WER at default options); far beyond what the
# bundled desk-scale model reaches, kept for orientation in reports.
BENCHMARK_REFERENCE: Mapping[str, Mapping[str, tuple[float, float]]] = {
    "fadel": {"sliding:5": (1.10, 4.19)},
    "abbad": {"sliding:5": (0.87, 3.53)},
}


@dataclass(frozen=True)
class WindowPlan:
    """Inclusive (first_word, last_word) index windows plus the strategy tag."""

    windows: tuple[tuple[int, int], ...]
    strategy: str


@dataclass(frozen=True)
class VoteTable:
    """Per word: the candidate forms each covering window produced."""

    windows: tuple[tuple[int, int], ...]
    candidates: tuple[tuple[tuple[str, int], ...], ...]

    def resolve(self, word_index: int) -> str:
        """Majority form; ties go to the window whose center is nearest the
        word, then to the earliest window."""
        entries = self.candidates[word_index]
        if not entries:
            raise ValueError(f"word {word_index} has no candidates")
        tally = Counter(form for form, _ in entries)
        best_count = max(tally.values())
        tied = {form for form, n in tally.items() if n == best_count}
        if len(tied) == 1:
            return tied.pop()

        def form_key(form: str):
            return min(
                (self._distance(word_index, win), win)
                for f, win in entries
                if f == form
            )

        return min(tied, key=form_key)

    def _distance(self, word_index: int, window_index: int) -> float:
        start, end = self.windows[window_index]
        return abs(word_index - (start + end) / 2.0)


def _word_costs(sentence: str) -> tuple[list[str], list[int]]:
    words = strip_diacritics(sentence).split()
    return words, [1 + count_arabic_letters(w) for w in words]


def _check_word_budget(words, costs, token_limit):
    for word, cost in zip(words, costs):
        if cost + 2 > token_limit:
            raise UnsplittableWord(
                f"word {word!r} needs {cost + 2} tokens, limit {token_limit}"
            )


def _maximal_end(costs: Sequence[int], start: int, token_limit: int) -> int:
    """Largest end index such that words[start..end] fit the budget."""
    budget = token_limit - 2
    total = 0
    end = start
    for i in range(start, len(costs)):
        if total + costs[i] > budget:
            break
        total += costs[i]
        end = i
    return end


def plan_windows_zero(sentence: str, token_limit: int) -> WindowPlan:
    """Greedy disjoint packing: each window is the maximal prefix that fits."""
    words, costs = _word_costs(sentence)
    if not words:
        raise EmptySentence(f"no words in {sentence!r}")
    _check_word_budget(words, costs, token_limit)
    windows = []
    start = 0
    while start < len(words):
        end = _maximal_end(costs, start, token_limit)
        windows.append((start, end))
        start = end + 1
    return WindowPlan(windows=tuple(windows), strategy="zero")


def plan_windows_sliding(sentence: str, token_limit: int, step: int) -> WindowPlan:
    """Overlapping windows whose starts advance by `step` words.

    Each window extends to the maximal fitting end; planning stops once a
    window reaches the last word. When a window spans fewer than `step` words
    the next start is clamped to keep the cover gap-free.
    """
    if not isinstance(step, int) or isinstance(step, bool) or step < 1:
        raise InvalidStep(f"step must be a positive integer, got {step!r}")
    words, costs = _word_costs(sentence)
    if not words:
        raise EmptySentence(f"no words in {sentence!r}")
    _check_word_budget(words, costs, token_limit)
    last = len(words) - 1
    windows = [(0, _maximal_end(costs, 0, token_limit))]
    while windows[-1][1] < last:
        prev_start, prev_end = windows[-1]
        start = min(prev_start + step, prev_end + 1)
        windows.append((start, _maximal_end(costs, start, token_limit)))
    return WindowPlan(windows=tuple(windows), strategy=f"sliding:{step}")


def parse_strategy(text: str) -> tuple[str, int | None]:
    """Parse "zero" or "sliding:<p>"; returns (kind, step)."""
    if text == "zero":
        return "zero", None
    if text.startswith("sliding:"):
        raw = text.split(":", 1)[1]
        try:
            step = int(raw)
        except ValueError as exc:
            raise InvalidStep(f"step {raw!r} is not an integer") from exc
        if step < 1:
            raise InvalidStep(f"step must be >= 1, got {step}")
        return "sliding", step
    raise ValueError(f"unknown strategy {text!r} (expected zero or sliding:<p>)")


def plan_windows(sentence: str, token_limit: int, strategy: str) -> WindowPlan:
    kind, step = parse_strategy(strategy)
    if kind == "zero":
        return plan_windows_zero(sentence, token_limit)
    return plan_windows_sliding(sentence, token_limit, step)


def collect_votes(
    sentence: str,
    params,
    config: ModelConfig,
    vocab: Vocabulary,
    plan: WindowPlan,
) -> VoteTable:
    """Predict every window and gather each word's candidate forms."""
    words = strip_diacritics(sentence).split()
    candidates: list[list[tuple[str, int]]] = [[] for _ in words]
    for win_idx, (start, end) in enumerate(plan.windows):
        text = " ".join(words[start : end + 1])
        sample = encode_for_inference(text, vocab, max_len=config.max_seq_len)
        mask_labels = predict(params, config, sample)
        labels = [IGNORE_LABEL] * len(sample.tokens)
        flat = iter(mask_labels)
        for s, e in sample.word_spans:
            for pos in range(s, e):
                labels[pos] = next(flat)
        segment = decode(text, labels, sample.word_spans)
        for offset, form in enumerate(segment.split()):
            candidates[start + offset].append((form, win_idx))
    return VoteTable(
        windows=plan.windows,
        candidates=tuple(tuple(c) for c in candidates),
    )


def diacritize(
    sentence: str,
    params,
    config: ModelConfig,
    vocab: Vocabulary,
    plan: WindowPlan | None = None,
    strategy: str = "zero",
    token_limit: int | None = None,
) -> str:
    """Diacritize a sentence of any length, preserving source whitespace.

    Existing marks are stripped before prediction. A sentence with no words
    is returned unchanged. The token budget defaults to the model limit and
    never exceeds it.
    """
    stripped = strip_diacritics(sentence)
    if not stripped.split():
        return sentence
    if plan is None:
        limit = config.max_seq_len if token_limit is None else min(
            token_limit, config.max_seq_len
        )
        plan = plan_windows(stripped, limit, strategy)
    table = collect_votes(stripped, params, config, vocab, plan)
    forms = [table.resolve(i) for i in range(len(table.candidates))]
    parts = _WHITESPACE_SPLIT.split(stripped)
    it = iter(forms)
    rebuilt = [
        next(it) if p and not p.isspace() else p
        for p in parts
    ]
    return "".join(rebuilt)


def compare_strategies(
    golds: Sequence[str],
    params,
    config: ModelConfig,
    vocab: Vocabulary,
    p_values: Sequence[int],
    opts: MetricOptions = MetricOptions(),
    token_limit: int | None = None,
) -> dict[str, EvalReport]:
    """Evaluate the zero strategy and each sliding step on gold sentences."""
    strategies = ["zero"] + [f"sliding:{p}" for p in p_values]
    reports: dict[str, EvalReport] = {}
    for strategy in strategies:
        predictions = [
            diacritize(
                strip_diacritics(gold), params, config, vocab,
                strategy=strategy, token_limit=token_limit,
            )
            for gold in golds
        ]
        reports[strategy] = evaluate_corpus(list(zip(golds, predictions)), opts)
    return reports
