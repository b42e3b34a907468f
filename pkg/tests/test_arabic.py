"""Diacritic algebra: classification, align/apply round trips, predicates."""

import random

import pytest

from tashkeel import arabic
from tashkeel.arabic import CharKind, DiacriticClass
from tashkeel.errors import EmptyWord, MarkBeforeLetter, UnsupportedMarkCluster

from conftest import REF_CLASSES, REF_LETTER_COUNTS, REF_WORDS, random_word

C = DiacriticClass


class TestClassTable:
    def test_fifteen_classes_with_stable_ids(self):
        assert len(DiacriticClass) == 15
        assert [int(c) for c in DiacriticClass] == list(range(15))
        assert C.NONE == 0
        assert C.FATHA == 1
        assert C.SHADDA == 8
        assert C.SHADDA_KASRATAN == 14

    @pytest.mark.parametrize(
        "cls,marks",
        [
            (C.NONE, ""),
            (C.FATHA, "َ"),
            (C.DAMMA, "ُ"),
            (C.KASRA, "ِ"),
            (C.FATHATAN, "ً"),
            (C.DAMMATAN, "ٌ"),
            (C.KASRATAN, "ٍ"),
            (C.SUKUN, "ْ"),
            (C.SHADDA, "ّ"),
            (C.SHADDA_FATHA, "َّ"),
            (C.SHADDA_DAMMA, "ُّ"),
            (C.SHADDA_KASRA, "ِّ"),
            (C.SHADDA_FATHATAN, "ًّ"),
            (C.SHADDA_DAMMATAN, "ٌّ"),
            (C.SHADDA_KASRATAN, "ٍّ"),
        ],
    )
    def test_canonical_marks(self, cls, marks):
        assert cls.marks == marks

    @pytest.mark.parametrize(
        "cls,gloss",
        [
            (C.NONE, "تطويل"),
            (C.FATHA, "فتحة"),
            (C.DAMMA, "ضمة"),
            (C.KASRA, "كسرة"),
            (C.FATHATAN, "فتحتان"),
            (C.DAMMATAN, "ضمتان"),
            (C.KASRATAN, "كسرتان"),
            (C.SUKUN, "سكون"),
            (C.SHADDA, "شدة"),
            (C.SHADDA_FATHA, "شدة فتحة"),
            (C.SHADDA_KASRATAN, "شدة كسرتان"),
        ],
    )
    def test_glosses(self, cls, gloss):
        assert cls.gloss == gloss


class TestClassifyChar:
    @pytest.mark.parametrize("ch", ["ء", "ب", "ي", "آ", "ٱ"])
    def test_letters(self, ch):
        assert arabic.classify_char(ch) is CharKind.ARABIC_LETTER

    @pytest.mark.parametrize("ch", [chr(cp) for cp in range(0x064B, 0x0653)])
    def test_marks(self, ch):
        assert arabic.classify_char(ch) is CharKind.DIACRITIC_MARK

    @pytest.mark.parametrize("ch", ["ـ", "a", "1", ".", " ", "ٰ", "ٓ"])
    def test_other(self, ch):
        assert arabic.classify_char(ch) is CharKind.OTHER


class TestAlign:
    @pytest.mark.parametrize("word,classes", list(zip(REF_WORDS, REF_CLASSES)))
    def test_reference_words(self, word, classes):
        aligned = arabic.align(word)
        assert list(aligned.classes) == classes
        assert len(aligned.letters) == len(classes)

    def test_accepts_either_shadda_order(self):
        shadda_first = "مَّ"
        vowel_first = "مَّ"
        assert arabic.align(shadda_first).classes == (C.SHADDA_FATHA,)
        assert arabic.align(vowel_first).classes == (C.SHADDA_FATHA,)

    def test_non_letters_are_dropped_from_skeleton(self):
        aligned = arabic.align("كَتَبَ.")
        assert aligned.letters == ("ك", "ت", "ب")

    def test_mark_with_no_letter(self):
        with pytest.raises(MarkBeforeLetter):
            arabic.align("َك")

    def test_mark_after_non_letter(self):
        with pytest.raises(MarkBeforeLetter):
            arabic.align("ك.َ")

    def test_mark_after_tatweel(self):
        with pytest.raises(MarkBeforeLetter):
            arabic.align("كـَ")

    @pytest.mark.parametrize(
        "word",
        [
            "كٰ",          # superscript alef
            "كٓ",          # madda above
            "كَُ",    # two plain vowels
            "كّْ",    # shadda + sukun
            "كّّ",    # double shadda
            "كَُّ",  # three marks
        ],
    )
    def test_unsupported_clusters(self, word):
        with pytest.raises(UnsupportedMarkCluster):
            arabic.align(word)

    @pytest.mark.parametrize("word", ["", "123", "...", "ـ"])
    def test_no_letters(self, word):
        with pytest.raises(EmptyWord):
            arabic.align(word)


class TestApplyRoundTrip:
    @pytest.mark.parametrize("word", REF_WORDS)
    def test_reference_round_trip(self, word):
        assert arabic.apply(arabic.align(word)) == word

    def test_seeded_words_round_trip(self):
        rng = random.Random(7)
        for _ in range(300):
            textual, canonical, letters, classes = random_word(rng)
            aligned = arabic.align(textual)
            assert list(aligned.letters) == letters
            assert list(aligned.classes) == classes
            assert arabic.apply(aligned) == canonical
            # canonical text is a fixed point
            assert arabic.apply(arabic.align(canonical)) == canonical

    def test_mismatched_lengths_rejected(self):
        with pytest.raises(ValueError):
            arabic.AlignedWord(letters=("ك",), classes=())


class TestStripDiacritics:
    def test_removes_only_marks(self):
        diacritized = "كَتِبٌ, abc 12"
        assert arabic.strip_diacritics(diacritized) == "كتب, abc 12"

    def test_idempotent(self):
        s = arabic.strip_diacritics(REF_WORDS[2])
        assert arabic.strip_diacritics(s) == s

    def test_whitespace_preserved(self):
        s = "كَ  \t بِ\n"
        assert arabic.strip_diacritics(s) == "ك  \t ب\n"

    def test_strip_after_apply_gives_skeleton(self):
        rng = random.Random(11)
        for _ in range(100):
            _, canonical, letters, _ = random_word(rng)
            assert arabic.strip_diacritics(canonical) == "".join(letters)


class TestCountArabicLetters:
    @pytest.mark.parametrize("word,count", list(zip(REF_WORDS, REF_LETTER_COUNTS)))
    def test_reference_counts(self, word, count):
        assert arabic.count_arabic_letters(word) == count

    def test_stripping_does_not_change_count(self):
        rng = random.Random(3)
        for _ in range(100):
            textual, _, letters, _ = random_word(rng)
            assert arabic.count_arabic_letters(textual) == len(letters)
            stripped = arabic.strip_diacritics(textual)
            assert arabic.count_arabic_letters(stripped) == len(letters)

    @pytest.mark.parametrize("text,count", [("", 0), ("abc 123", 0), ("ـ", 0)])
    def test_non_arabic(self, text, count):
        assert arabic.count_arabic_letters(text) == count


class TestIsWordDiacritized:
    def test_fully_marked(self):
        assert arabic.is_word_diacritized("كَتَبَ")

    def test_bare_word(self):
        assert not arabic.is_word_diacritized("كتب")

    def test_article_with_bare_final_after_long_vowel(self):
        # الْكِتَاب: bare alef+lam head handled by the article rule elsewhere,
        # here lam carries sukun; final ب is bare but follows alef.
        word = "الْكِتَاب"
        assert arabic.is_word_diacritized(word)

    def test_bare_final_not_after_long_vowel(self):
        # كَتَب: final b follows a consonant, so it still needs a mark.
        assert not arabic.is_word_diacritized("كَتَب")

    def test_article_prefix_exempt(self):
        # العِلْم with bare alef+lam but marked remainder.
        word = "العِلْمُ"
        assert arabic.is_word_diacritized(word)

    def test_article_rule_only_covers_first_two(self):
        # bare third letter is still required even with the article present
        word = "العلْمُ"
        assert not arabic.is_word_diacritized(word)

    @pytest.mark.parametrize("ch", sorted(arabic.EXCEPTION_LETTERS))
    def test_exception_letters_may_stay_bare(self, ch):
        assert arabic.is_word_diacritized(ch)
        word = "كَ" + ch + "بُ"
        assert arabic.is_word_diacritized(word)

    def test_non_exempt_single_letter(self):
        assert not arabic.is_word_diacritized("ك")

    def test_no_arabic_letters_raises(self):
        with pytest.raises(EmptyWord):
            arabic.is_word_diacritized("123")


class TestDiacritizationRatio:
    def test_reference_sentence(self):
        # four of five words pass; the bare alef-madda in the second word is
        # not an exception letter, so that word counts as undiacritized.
        assert arabic.diacritization_ratio(" ".join(REF_WORDS)) == pytest.approx(0.8)

    def test_half(self):
        s = "كَتَبَ كتب"
        assert arabic.diacritization_ratio(s) == 0.5

    def test_non_arabic_words_excluded(self):
        s = "كَتَبَ 123 abc"
        assert arabic.diacritization_ratio(s) == 1.0

    def test_no_arabic_words(self):
        assert arabic.diacritization_ratio("only latin 42") == 1.0

    def test_punctuation_attached_to_word(self):
        s = "كَتَبَ."
        assert arabic.diacritization_ratio(s) == 1.0
