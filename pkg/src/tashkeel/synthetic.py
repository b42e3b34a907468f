"""Rule-generated diacritization language for end-to-end verification.

The diacritic of a letter is a pure function of the letter identity and its
position in the word, so a model that learns the rule generalizes to unseen
sentences and the generator itself is the evaluation oracle. The closed word
inventory keeps the vocabulary small enough for minute-scale training.
"""

from __future__ import annotations

import numpy as np

from .arabic import AlignedWord, DiacriticClass, apply, strip_diacritics

# Sixteen common letters; none are in the bare-letter exception set, so every
# letter's class is informative.
ALPHABET = tuple("بتجدرزسص"
                 "طعفقكلمن")


def rule_class(letter: str, position: int) -> DiacriticClass:
    """The language's defining rule: class from letter identity and position."""
    return DiacriticClass((ord(letter) * 7 + position * 5) % 15)


def diacritize_word(bare: str) -> str:
    """Apply the rule to a bare word."""
    letters = tuple(bare)
    classes = tuple(rule_class(ch, i) for i, ch in enumerate(letters))
    return apply(AlignedWord(letters=letters, classes=classes))


def make_word_forms(
    count: int = 40, seed: int = 0, min_len: int = 2, max_len: int = 5
) -> tuple[str, ...]:
    """Deterministic closed inventory of bare word forms."""
    rng = np.random.default_rng(seed)
    forms: list[str] = []
    seen: set[str] = set()
    while len(forms) < count:
        length = int(rng.integers(min_len, max_len + 1))
        word = "".join(ALPHABET[int(i)] for i in rng.integers(0, len(ALPHABET), length))
        if word not in seen:
            seen.add(word)
            forms.append(word)
    return tuple(forms)


def make_corpus(
    sentence_count: int,
    seed: int = 0,
    word_forms: tuple[str, ...] | None = None,
    min_words: int = 4,
    max_words: int = 8,
) -> list[str]:
    """Generate fully diacritized sentences over the word inventory."""
    if word_forms is None:
        word_forms = make_word_forms()
    rng = np.random.default_rng(seed)
    sentences = []
    for _ in range(sentence_count):
        n = int(rng.integers(min_words, max_words + 1))
        picks = rng.integers(0, len(word_forms), n)
        sentences.append(
            " ".join(diacritize_word(word_forms[int(i)]) for i in picks)
        )
    return sentences


_POS_TAGS = ("اسم", "فعل", "حرف")


def pos_tag(bare: str) -> str:
    """Rule tag for a bare word: a pure function of first letter and length."""
    return _POS_TAGS[(ord(bare[0]) + len(bare)) % len(_POS_TAGS)]


def make_pos_pairs(sentences) -> list[list[tuple[str, str]]]:
    """Per sentence, (bare word, rule tag) pairs for the parsing task."""
    tagged = []
    for sentence in sentences:
        bare_words = strip_diacritics(sentence).split()
        tagged.append([(w, pos_tag(w)) for w in bare_words])
    return tagged


def segment_word(bare: str) -> str:
    """Rule segmentation: words of four or more letters shed a one-letter
    prefix clitic."""
    if len(bare) >= 4:
        return f"{bare[0]}+{bare[1:]}"
    return bare


def make_segmentation(sentences) -> list[tuple[str, str]]:
    """(raw, segmented) sentence pairs for the segmentation task."""
    pairs = []
    for sentence in sentences:
        raw = strip_diacritics(sentence)
        pairs.append((raw, " ".join(segment_word(w) for w in raw.split())))
    return pairs
