"""Whole-word vocabulary and mask-insertion label encoding.

A sentence becomes: [CLS] word₁ [MASK]×k₁ word₂ [MASK]×k₂ … [SEP], where kᵢ is
the Arabic letter count of word i. Each inserted mask is classified into one of
the fifteen diacritic classes; every non-mask position carries the ignore
label. Word tokens are looked up after mark stripping and tatweel removal, so
diacritized and bare spellings share one id.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Sequence

from .arabic import (
    DiacriticClass,
    align,
    count_arabic_letters,
    remove_tatweel,
    strip_diacritics,
)
from .errors import (
    EmptyCorpus,
    EmptySentence,
    InvalidEncoding,
    IoFailure,
    MalformedRecord,
    SequenceTooLong,
    SpanMismatch,
)

PAD, UNK, CLS, SEP, MASK = "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"
SPECIAL_TOKENS = (PAD, UNK, CLS, SEP, MASK)
PAD_ID, UNK_ID, CLS_ID, SEP_ID, MASK_ID = range(5)

# Label value ignored by every loss and metric.
IGNORE_LABEL = -100

# Bracketed chunks (instruction glosses, [SEP], POS tags that may contain
# spaces) count as single tokens; everything else splits on whitespace. On
# bracket-free text this is exactly whitespace tokenization.
_TOKEN_RE = re.compile(r"\[[^\][]*\]|[^\s\[\]]+")

_WHITESPACE_SPLIT = re.compile(r"(\s+)")


def tokenize(text: str) -> list[str]:
    """Split text into word/bracket tokens."""
    return _TOKEN_RE.findall(text)


def normalize_token(token: str) -> str:
    """Canonical lookup form: marks stripped, tatweel removed."""
    return remove_tatweel(strip_diacritics(token))


class Vocabulary:
    """Immutable whole-word token table with five fixed specials at ids 0..4."""

    def __init__(self, tokens: Sequence[str]):
        """`tokens` are the non-special entries, already in id order (id 5+)."""
        self._id_to_token: list[str] = list(SPECIAL_TOKENS) + list(tokens)
        self._token_to_id: dict[str, int] = {}
        for idx, tok in enumerate(self._id_to_token):
            if tok in self._token_to_id:
                raise MalformedRecord(f"duplicate vocabulary token {tok!r}")
            self._token_to_id[tok] = idx

    def __len__(self) -> int:
        return len(self._id_to_token)

    @property
    def size(self) -> int:
        return len(self._id_to_token)

    def __contains__(self, token: str) -> bool:
        return normalize_token(token) in self._token_to_id

    def id_of(self, token: str) -> int:
        """Id for a token; unknown or empty-after-normalization maps to [UNK]."""
        if token in SPECIAL_TOKENS:
            return self._token_to_id[token]
        normalized = normalize_token(token)
        if not normalized:
            return UNK_ID
        return self._token_to_id.get(normalized, UNK_ID)

    def token_of(self, token_id: int) -> str:
        if not 0 <= token_id < len(self._id_to_token):
            raise MalformedRecord(f"token id {token_id} out of range")
        return self._id_to_token[token_id]

    def serialize(self) -> str:
        """Canonical text form: one "token TAB id" line per entry, id order."""
        return "".join(
            f"{tok}\t{idx}\n" for idx, tok in enumerate(self._id_to_token)
        )

    def digest(self) -> str:
        """SHA-256 of the canonical serialization; stored in checkpoints."""
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()

    def save(self, path) -> None:
        try:
            with open(path, "w", encoding="utf-8", newline="") as fh:
                fh.write(self.serialize())
        except OSError as exc:
            raise IoFailure(f"cannot write vocabulary {path}: {exc}") from exc

    @classmethod
    def load(cls, path) -> "Vocabulary":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = fh.read().splitlines()
        except UnicodeDecodeError as exc:
            raise InvalidEncoding(f"vocabulary {path} is not UTF-8: {exc}") from exc
        except OSError as exc:
            raise IoFailure(f"cannot read vocabulary {path}: {exc}") from exc
        tokens: list[str] = []
        for lineno, line in enumerate(lines, start=1):
            parts = line.split("\t")
            if len(parts) != 2:
                raise MalformedRecord(f"{path}:{lineno}: expected token TAB id")
            tok, id_text = parts
            try:
                idx = int(id_text)
            except ValueError as exc:
                raise MalformedRecord(f"{path}:{lineno}: bad id {id_text!r}") from exc
            if idx != lineno - 1:
                raise MalformedRecord(f"{path}:{lineno}: ids must be contiguous")
            if idx < len(SPECIAL_TOKENS):
                if tok != SPECIAL_TOKENS[idx]:
                    raise MalformedRecord(
                        f"{path}:{lineno}: expected special {SPECIAL_TOKENS[idx]}"
                    )
            else:
                tokens.append(tok)
        if len(lines) < len(SPECIAL_TOKENS):
            raise MalformedRecord(f"{path}: missing special tokens")
        return cls(tokens)


def build_vocab(corpus, min_frequency: int = 2) -> Vocabulary:
    """Count normalized tokens and keep those seen at least min_frequency times.

    `corpus` is a RawCorpus or any iterable of sentence strings. Ids are
    assigned by descending frequency, ties broken by codepoint order. The
    special tokens never participate in counting.
    """
    if min_frequency < 1:
        raise ValueError("min_frequency must be >= 1")
    sentences = getattr(corpus, "sentences", corpus)
    counts: dict[str, int] = {}
    seen_any = False
    for sentence in sentences:
        seen_any = True
        for token in tokenize(sentence):
            normalized = normalize_token(token)
            if not normalized or normalized in SPECIAL_TOKENS:
                continue
            counts[normalized] = counts.get(normalized, 0) + 1
    if not seen_any:
        raise EmptyCorpus("cannot build a vocabulary from zero sentences")
    kept = sorted(
        (tok for tok, n in counts.items() if n >= min_frequency),
        key=lambda tok: (-counts[tok], tok),
    )
    return Vocabulary(kept)


def encoded_length(sentence: str) -> int:
    """Token count of the mask-insertion encoding, boundary specials included."""
    words = sentence.split()
    return 2 + sum(1 + count_arabic_letters(w) for w in words)


@dataclass(frozen=True)
class EncodedSample:
    """One encoded sentence: token ids, per-position labels, and the half-open
    [start, end) mask-token range belonging to each word."""

    tokens: tuple[int, ...]
    labels: tuple[int, ...]
    word_spans: tuple[tuple[int, int], ...]


def encode_for_inference(
    sentence: str, vocab: Vocabulary, max_len: int = 512
) -> EncodedSample:
    """Encode a sentence (marks are stripped first); labels all ignored."""
    words = strip_diacritics(sentence).split()
    if not words:
        raise EmptySentence(f"no words in {sentence!r}")
    ids = [CLS_ID]
    spans = []
    for word in words:
        ids.append(vocab.id_of(word))
        k = count_arabic_letters(word)
        spans.append((len(ids), len(ids) + k))
        ids.extend([MASK_ID] * k)
    ids.append(SEP_ID)
    if len(ids) > max_len:
        raise SequenceTooLong(f"{len(ids)} tokens exceed limit {max_len}")
    labels = [IGNORE_LABEL] * len(ids)
    return EncodedSample(tuple(ids), tuple(labels), tuple(spans))


def encode_for_training(
    sentence: str, vocab: Vocabulary, max_len: int = 512
) -> EncodedSample:
    """Encode a diacritized sentence; mask positions carry the class labels
    read off the original marks, everything else stays ignored."""
    sample = encode_for_inference(sentence, vocab, max_len)
    labels = list(sample.labels)
    for word, (start, end) in zip(sentence.split(), sample.word_spans):
        if end == start:
            continue
        aligned = align(word)
        if len(aligned.classes) != end - start:
            raise SpanMismatch(
                f"word {word!r}: {len(aligned.classes)} letters vs span {end - start}"
            )
        labels[start:end] = [int(c) for c in aligned.classes]
    return EncodedSample(sample.tokens, tuple(labels), sample.word_spans)


def decode(
    sentence: str, labels: Sequence[int], word_spans: Sequence[tuple[int, int]]
) -> str:
    """Reattach predicted classes to a sentence's Arabic letters.

    `sentence` may be bare or diacritized; existing marks are discarded.
    Whitespace and non-letter characters pass through unchanged.
    """
    stripped = strip_diacritics(sentence)
    parts = _WHITESPACE_SPLIT.split(stripped)
    word_positions = [i for i, p in enumerate(parts) if p and not p.isspace()]
    if len(word_positions) != len(word_spans):
        raise SpanMismatch(
            f"{len(word_positions)} words but {len(word_spans)} spans"
        )
    for pos, (start, end) in zip(word_positions, word_spans):
        word = parts[pos]
        if not 0 <= start <= end <= len(labels):
            raise SpanMismatch(f"span ({start}, {end}) outside {len(labels)} labels")
        if end - start != count_arabic_letters(word):
            raise SpanMismatch(
                f"word {word!r} has {count_arabic_letters(word)} letters "
                f"but span ({start}, {end})"
            )
        try:
            classes = [DiacriticClass(int(labels[i])) for i in range(start, end)]
        except ValueError as exc:
            raise SpanMismatch(f"label outside class range for {word!r}") from exc
        out = []
        it = iter(classes)
        for ch in word:
            if count_arabic_letters(ch):
                out.append(ch + next(it).marks)
            else:
                out.append(ch)
        parts[pos] = "".join(out)
    return "".join(parts)
