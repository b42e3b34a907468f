"""Shared fixtures: byte-exact reference sentence and seeded word generators."""

import random

import pytest

from tashkeel.arabic import ARABIC_LETTERS, DiacriticClass

# Reference sentence used across encoding/decoding tests. Spelled in escapes so
# editors cannot reorder or normalize the combining marks.
REF_WORDS = [
    "ذَاتِ",                                # ذَاتِ
    "مَآثِرَ",                    # مَآثِرَ
    "جَلِيلَةٍ",        # جَلِيلَةٍ
    "وَمَزَايَا",  # وَمَزَايَا
    "جَمَّةٍ",                    # جَمَّةٍ
]
REF_SENTENCE = " ".join(REF_WORDS)

C = DiacriticClass
REF_CLASSES = [
    [C.FATHA, C.NONE, C.KASRA],
    [C.FATHA, C.NONE, C.KASRA, C.FATHA],
    [C.FATHA, C.KASRA, C.NONE, C.FATHA, C.KASRATAN],
    [C.FATHA, C.FATHA, C.FATHA, C.NONE, C.FATHA, C.NONE],
    [C.FATHA, C.SHADDA_FATHA, C.KASRATAN],
]
REF_LETTER_COUNTS = [3, 4, 5, 6, 3]

LETTER_POOL = sorted(ARABIC_LETTERS)


def random_word(rng: random.Random, min_len: int = 1, max_len: int = 8):
    """Random diacritized word with known ground truth.

    Returns (textual, canonical, letters, classes). `textual` randomizes the
    mark order inside shadda clusters; `canonical` uses class emission order.
    """
    n = rng.randint(min_len, max_len)
    letters = [rng.choice(LETTER_POOL) for _ in range(n)]
    classes = [DiacriticClass(rng.randrange(15)) for _ in range(n)]
    textual_parts = []
    canonical_parts = []
    for letter, cls in zip(letters, classes):
        marks = cls.marks
        canonical_parts.append(letter + marks)
        if len(marks) == 2 and rng.random() < 0.5:
            marks = marks[1] + marks[0]
        textual_parts.append(letter + marks)
    return "".join(textual_parts), "".join(canonical_parts), letters, classes


def random_sentence(rng: random.Random, min_words: int = 1, max_words: int = 9):
    """Random canonical-order sentence; returns (sentence, per-word classes)."""
    words = []
    classes = []
    for _ in range(rng.randint(min_words, max_words)):
        _, canonical, _, cls = random_word(rng, min_len=1, max_len=6)
        words.append(canonical)
        classes.append(cls)
    return " ".join(words), classes


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240817)
