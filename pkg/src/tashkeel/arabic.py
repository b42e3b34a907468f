"""Diacritic-aware text algebra.

A diacritized Arabic word is modelled as a sequence of (letter, DiacriticClass)
pairs. The eight combining marks in U+064B..U+0652 collapse into fifteen
classes: no mark, the seven single marks, and shadda combined with each of the
six vowels/tanween. Everything else in the pipeline (labels, masks, metrics)
is built on top of align/apply round trips over this representation.
"""

from __future__ import annotations

import enum
import re
import unicodedata
from dataclasses import dataclass

from .errors import EmptyWord, MarkBeforeLetter, UnsupportedMarkCluster

# The eight supported combining marks.
FATHATAN = "ً"
DAMMATAN = "ٌ"
KASRATAN = "ٍ"
FATHA = "َ"
DAMMA = "ُ"
KASRA = "ِ"
SHADDA = "ّ"
SUKUN = "ْ"

DIACRITIC_MARKS = frozenset(
    (FATHATAN, DAMMATAN, KASRATAN, FATHA, DAMMA, KASRA, SHADDA, SUKUN)
)

TATWEEL = "ـ"

# Letters: U+0621..U+064A minus tatweel, plus alef wasla. Tatweel is a
# decorative stretch character and counts as Other.
ARABIC_LETTERS = frozenset(
    chr(cp) for cp in range(0x0621, 0x064B) if chr(cp) != TATWEEL
) | {"ٱ"}

_MARKS_ONLY = re.compile("[ً-ْ]")


class CharKind(enum.Enum):
    """Coarse character classification used throughout the pipeline."""

    ARABIC_LETTER = "arabic_letter"
    DIACRITIC_MARK = "diacritic_mark"
    OTHER = "other"


def classify_char(ch: str) -> CharKind:
    """Classify a single character; tatweel and everything non-Arabic is Other."""
    if ch in ARABIC_LETTERS:
        return CharKind.ARABIC_LETTER
    if ch in DIACRITIC_MARKS:
        return CharKind.DIACRITIC_MARK
    return CharKind.OTHER


class DiacriticClass(enum.IntEnum):
    """The fifteen per-letter label classes, ids fixed for model output."""

    NONE = 0
    FATHA = 1
    DAMMA = 2
    KASRA = 3
    FATHATAN = 4
    DAMMATAN = 5
    KASRATAN = 6
    SUKUN = 7
    SHADDA = 8
    SHADDA_FATHA = 9
    SHADDA_DAMMA = 10
    SHADDA_KASRA = 11
    SHADDA_FATHATAN = 12
    SHADDA_DAMMATAN = 13
    SHADDA_KASRATAN = 14

    @property
    def marks(self) -> str:
        """Canonical mark string appended after a letter (shadda first)."""
        return _CLASS_MARKS[self]

    @property
    def gloss(self) -> str:
        """Arabic name used inside bracketed instruction text. The no-mark
        class is written as tatweel there, matching corpus convention."""
        return _CLASS_GLOSS[self]


_CLASS_MARKS: dict[DiacriticClass, str] = {
    DiacriticClass.NONE: "",
    DiacriticClass.FATHA: FATHA,
    DiacriticClass.DAMMA: DAMMA,
    DiacriticClass.KASRA: KASRA,
    DiacriticClass.FATHATAN: FATHATAN,
    DiacriticClass.DAMMATAN: DAMMATAN,
    DiacriticClass.KASRATAN: KASRATAN,
    DiacriticClass.SUKUN: SUKUN,
    DiacriticClass.SHADDA: SHADDA,
    DiacriticClass.SHADDA_FATHA: SHADDA + FATHA,
    DiacriticClass.SHADDA_DAMMA: SHADDA + DAMMA,
    DiacriticClass.SHADDA_KASRA: SHADDA + KASRA,
    DiacriticClass.SHADDA_FATHATAN: SHADDA + FATHATAN,
    DiacriticClass.SHADDA_DAMMATAN: SHADDA + DAMMATAN,
    DiacriticClass.SHADDA_KASRATAN: SHADDA + KASRATAN,
}

_CLASS_GLOSS: dict[DiacriticClass, str] = {
    DiacriticClass.NONE: "تطويل",
    DiacriticClass.FATHA: "فتحة",
    DiacriticClass.DAMMA: "ضمة",
    DiacriticClass.KASRA: "كسرة",
    DiacriticClass.FATHATAN: "فتحتان",
    DiacriticClass.DAMMATAN: "ضمتان",
    DiacriticClass.KASRATAN: "كسرتان",
    DiacriticClass.SUKUN: "سكون",
    DiacriticClass.SHADDA: "شدة",
    DiacriticClass.SHADDA_FATHA: "شدة فتحة",
    DiacriticClass.SHADDA_DAMMA: "شدة ضمة",
    DiacriticClass.SHADDA_KASRA: "شدة كسرة",
    DiacriticClass.SHADDA_FATHATAN: "شدة فتحتان",
    DiacriticClass.SHADDA_DAMMATAN: "شدة ضمتان",
    DiacriticClass.SHADDA_KASRATAN: "شدة كسرتان",
}

_VOWEL_CLASSES = {
    FATHA: DiacriticClass.FATHA,
    DAMMA: DiacriticClass.DAMMA,
    KASRA: DiacriticClass.KASRA,
    FATHATAN: DiacriticClass.FATHATAN,
    DAMMATAN: DiacriticClass.DAMMATAN,
    KASRATAN: DiacriticClass.KASRATAN,
}

_SINGLE_MARK_CLASSES = dict(_VOWEL_CLASSES)
_SINGLE_MARK_CLASSES[SUKUN] = DiacriticClass.SUKUN
_SINGLE_MARK_CLASSES[SHADDA] = DiacriticClass.SHADDA

_SHADDA_COMBINED = {
    DiacriticClass.FATHA: DiacriticClass.SHADDA_FATHA,
    DiacriticClass.DAMMA: DiacriticClass.SHADDA_DAMMA,
    DiacriticClass.KASRA: DiacriticClass.SHADDA_KASRA,
    DiacriticClass.FATHATAN: DiacriticClass.SHADDA_FATHATAN,
    DiacriticClass.DAMMATAN: DiacriticClass.SHADDA_DAMMATAN,
    DiacriticClass.KASRATAN: DiacriticClass.SHADDA_KASRATAN,
}


@dataclass(frozen=True)
class AlignedWord:
    """A word reduced to its Arabic letters, each with a diacritic class.

    Non-letter characters are dropped; `apply` therefore reproduces only the
    letter-and-mark skeleton of the original word.
    """

    letters: tuple[str, ...]
    classes: tuple[DiacriticClass, ...]

    def __post_init__(self) -> None:
        if len(self.letters) != len(self.classes):
            raise ValueError("letters and classes must have equal length")


def _cluster_class(marks: list[str], word: str) -> DiacriticClass:
    if not marks:
        return DiacriticClass.NONE
    if len(marks) == 1:
        return _SINGLE_MARK_CLASSES[marks[0]]
    if len(marks) == 2 and SHADDA in marks:
        other = marks[0] if marks[1] == SHADDA else marks[1]
        if other in _VOWEL_CLASSES:
            return _SHADDA_COMBINED[_VOWEL_CLASSES[other]]
    raise UnsupportedMarkCluster(
        f"unsupported mark combination {[hex(ord(m)) for m in marks]} in {word!r}"
    )


def align(word: str) -> AlignedWord:
    """Pair each Arabic letter in `word` with its diacritic class.

    Marks may appear in either textual order for shadda combinations. A mark
    with no letter before it (start of word, or after a non-letter such as
    tatweel or punctuation) raises MarkBeforeLetter; combining marks outside
    the eight supported ones raise UnsupportedMarkCluster so corpus noise
    surfaces instead of being silently dropped.
    """
    letters: list[str] = []
    clusters: list[list[str]] = []
    attachable = False
    for ch in word:
        kind = classify_char(ch)
        if kind is CharKind.ARABIC_LETTER:
            letters.append(ch)
            clusters.append([])
            attachable = True
        elif kind is CharKind.DIACRITIC_MARK:
            if not attachable:
                raise MarkBeforeLetter(f"mark {hex(ord(ch))} has no letter in {word!r}")
            clusters[-1].append(ch)
        else:
            if unicodedata.category(ch) == "Mn":
                raise UnsupportedMarkCluster(
                    f"unsupported combining mark {hex(ord(ch))} in {word!r}"
                )
            attachable = False
    if not letters:
        raise EmptyWord(f"no Arabic letter in {word!r}")
    classes = tuple(_cluster_class(cluster, word) for cluster in clusters)
    return AlignedWord(letters=tuple(letters), classes=classes)


def apply(aligned: AlignedWord) -> str:
    """Inverse of align on the letter skeleton: letters with canonical marks."""
    return "".join(
        letter + cls.marks for letter, cls in zip(aligned.letters, aligned.classes)
    )


def strip_diacritics(text: str) -> str:
    """Remove the eight marks; all other characters pass through unchanged."""
    return _MARKS_ONLY.sub("", text)


def remove_tatweel(text: str) -> str:
    """Remove decorative stretch characters."""
    return text.replace(TATWEEL, "")


def count_arabic_letters(text: str) -> int:
    """Number of Arabic letters (marks, tatweel, and foreign chars excluded)."""
    return sum(1 for ch in text if ch in ARABIC_LETTERS)


# Single letters that may legitimately stay bare in otherwise diacritized text.
EXCEPTION_LETTERS = frozenset("ىئوايإؤ")

# Long vowels that exempt a following final letter from needing a mark.
_FINAL_EXEMPTING = frozenset("واىي")

_ALEF = "ا"
_LAM = "ل"


def is_word_diacritized(word: str) -> bool:
    """Whether every Arabic letter carries a mark, modulo standard exemptions.

    Exempt: the letters in EXCEPTION_LETTERS anywhere; the definite-article
    prefix (alef+lam as the first two letters); and the final letter when the
    letter before it is a long vowel. Raises EmptyWord if the word has no
    Arabic letter.
    """
    letters: list[str] = []
    marked: list[bool] = []
    for ch in word:
        kind = classify_char(ch)
        if kind is CharKind.ARABIC_LETTER:
            letters.append(ch)
            marked.append(False)
        elif kind is CharKind.DIACRITIC_MARK and letters:
            marked[-1] = True
    if not letters:
        raise EmptyWord(f"no Arabic letter in {word!r}")
    has_article = len(letters) >= 2 and letters[0] == _ALEF and letters[1] == _LAM
    last = len(letters) - 1
    for i, (letter, has_mark) in enumerate(zip(letters, marked)):
        if has_mark:
            continue
        if letter in EXCEPTION_LETTERS:
            continue
        if has_article and i <= 1:
            continue
        if i == last and i > 0 and letters[i - 1] in _FINAL_EXEMPTING:
            continue
        return False
    return True


def diacritization_ratio(sentence: str) -> float:
    """Fraction of Arabic words that pass is_word_diacritized.

    Words with no Arabic letter are excluded; a sentence with no Arabic
    words scores 1.0 (nothing needed marks, so nothing is missing).
    """
    arabic_words = [w for w in sentence.split() if count_arabic_letters(w) > 0]
    if not arabic_words:
        return 1.0
    done = sum(1 for w in arabic_words if is_word_diacritized(w))
    return done / len(arabic_words)
