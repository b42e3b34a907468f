"""Instruction formatting, sample files, and MLM masking."""

import numpy as np
import pytest

from tashkeel import taskgen
from tashkeel.encoding import (
    CLS_ID,
    IGNORE_LABEL,
    MASK_ID,
    SEP_ID,
    build_vocab,
)
from tashkeel.errors import EmptyInput, MalformedRecord
from tashkeel.taskgen import (
    DIACRITIZATION_PREFIX,
    POS_PREFIX,
    SEGMENTATION_PREFIX,
    PrefinetuneSample,
    Task,
    encode_text,
    format_ca,
    format_diacritization,
    format_pos,
    format_segmentation,
    interleave_round_robin,
    mlm_mask,
    read_pos_file,
    read_samples,
    read_seg_file,
    write_samples,
)

from conftest import REF_SENTENCE

# Published sample fragments, byte-exact.
SAMPLE_POS_PAIRS = [
    ("إذ", "حرف"),
    (
        "نازلتنا",
        "اسم مذكر فردي",
    ),
]
SAMPLE_POS_TEXT = (
    "أعرب الجملة: "
    "إذ [حرف] "
    "نازلتنا "
    "[اسم مذكر فردي]"
)
# وَهُوَ → bare letters + three mark names
SAMPLE_DIAC_WORD = "وَهُوَ"
SAMPLE_DIAC_TEXT = (
    "شكّل ما يلي: "
    "وهو"
    "[فتحة][ضمة][فتحة]"
)


class TestPrefixes:
    def test_exact_bytes(self):
        assert POS_PREFIX == "أعرب الجملة:"
        assert SEGMENTATION_PREFIX == "جزّء الكلمات:"
        assert DIACRITIZATION_PREFIX == "شكّل ما يلي:"


class TestFormatters:
    def test_ca_is_identity(self):
        assert format_ca(REF_SENTENCE) == REF_SENTENCE

    def test_ca_empty(self):
        with pytest.raises(EmptyInput):
            format_ca("  ")

    def test_pos_published_sample(self):
        assert format_pos(SAMPLE_POS_PAIRS) == SAMPLE_POS_TEXT

    def test_pos_prefix_and_bracket_count(self):
        text = format_pos(SAMPLE_POS_PAIRS)
        assert text.startswith(POS_PREFIX + " ")
        assert text.count("[") == text.count("]") == len(SAMPLE_POS_PAIRS)

    def test_pos_empty_cases(self):
        with pytest.raises(EmptyInput):
            format_pos([])
        with pytest.raises(EmptyInput):
            format_pos([("word", " ")])

    def test_segmentation_structure(self):
        raw = "كتب وهو"
        seg = "كتب و+هو"
        text = format_segmentation(raw, seg)
        assert text == f"{SEGMENTATION_PREFIX} {raw} [SEP] {seg}"
        assert text.count("[SEP]") == 1

    def test_segmentation_empty(self):
        with pytest.raises(EmptyInput):
            format_segmentation("", "x")

    def test_diacritization_published_sample(self):
        assert format_diacritization(SAMPLE_DIAC_WORD) == SAMPLE_DIAC_TEXT

    def test_diacritization_gloss_count_matches_letters(self):
        text = format_diacritization(REF_SENTENCE)
        assert text.startswith(DIACRITIZATION_PREFIX + " ")
        assert text.count("[") == 21  # 3+4+5+6+3 letters

    def test_diacritization_keeps_non_arabic_words_bare(self):
        text = format_diacritization(f"{SAMPLE_DIAC_WORD} 123")
        assert text.endswith(" 123")

    def test_diacritization_empty(self):
        with pytest.raises(EmptyInput):
            format_diacritization("")


class TestInterleave:
    def test_round_robin_order(self):
        streams = {
            Task.CA: ["c1", "c2", "c3"],
            Task.POS: ["p1"],
            Task.SEGMENTATION: ["s1", "s2"],
        }
        merged = interleave_round_robin(streams)
        assert [(m.task, m.text) for m in merged] == [
            (Task.CA, "c1"),
            (Task.POS, "p1"),
            (Task.SEGMENTATION, "s1"),
            (Task.CA, "c2"),
            (Task.SEGMENTATION, "s2"),
            (Task.CA, "c3"),
        ]

    def test_empty(self):
        assert interleave_round_robin({}) == []


class TestSampleFiles:
    def test_round_trip(self, tmp_path):
        samples = [
            PrefinetuneSample(Task.CA, "plain text"),
            PrefinetuneSample(Task.DIACRITIZATION, SAMPLE_DIAC_TEXT),
        ]
        p = tmp_path / "samples.tsv"
        write_samples(samples, p)
        assert read_samples(p) == samples

    def test_file_format(self, tmp_path):
        p = tmp_path / "samples.tsv"
        write_samples([PrefinetuneSample(Task.POS, SAMPLE_POS_TEXT)], p)
        line = p.read_text(encoding="utf-8").splitlines()[0]
        assert line == f"pos\t{SAMPLE_POS_TEXT}"

    def test_unknown_task_with_line_number(self, tmp_path):
        p = tmp_path / "samples.tsv"
        p.write_text("ca\tok\nbogus\tx\n", encoding="utf-8")
        with pytest.raises(MalformedRecord, match=":2:"):
            read_samples(p)

    def test_tab_in_text_rejected(self, tmp_path):
        with pytest.raises(MalformedRecord):
            write_samples([PrefinetuneSample(Task.CA, "a\tb")], tmp_path / "s.tsv")


class TestTaskInputFiles:
    def test_pos_file(self, tmp_path):
        p = tmp_path / "pos.tsv"
        p.write_text(
            "w1\tt1\nw2\ttag with spaces\n\nw3\tt3\n", encoding="utf-8"
        )
        assert read_pos_file(p) == [
            [("w1", "t1"), ("w2", "tag with spaces")],
            [("w3", "t3")],
        ]

    def test_pos_malformed_line_number(self, tmp_path):
        p = tmp_path / "pos.tsv"
        p.write_text("w1\tt1\nno-tag-here\n", encoding="utf-8")
        with pytest.raises(MalformedRecord, match=":2:"):
            read_pos_file(p)

    def test_seg_file(self, tmp_path):
        p = tmp_path / "seg.tsv"
        p.write_text("ab\ta+b\n\ncd\tc+d\n", encoding="utf-8")
        assert read_seg_file(p) == [("ab", "a+b"), ("cd", "c+d")]

    def test_seg_malformed(self, tmp_path):
        p = tmp_path / "seg.tsv"
        p.write_text("only one field\n", encoding="utf-8")
        with pytest.raises(MalformedRecord, match=":1:"):
            read_seg_file(p)


@pytest.fixture
def mlm_vocab():
    words = [f"w{i}" for i in range(30)]
    return build_vocab([" ".join(words)] * 2, min_frequency=2)


class TestEncodeText:
    def test_boundaries(self, mlm_vocab):
        ids = encode_text("w0 w1 w2", mlm_vocab)
        assert ids[0] == CLS_ID and ids[-1] == SEP_ID
        assert len(ids) == 5

    def test_bracket_tokens_are_single_ids(self, mlm_vocab):
        vocab = build_vocab(["w [a b] w [a b]"], min_frequency=2)
        ids = encode_text("w [a b]", vocab)
        assert len(ids) == 4

    def test_truncation_keeps_sep(self, mlm_vocab):
        ids = encode_text(" ".join(f"w{i}" for i in range(30)), mlm_vocab, max_len=10)
        assert len(ids) == 10
        assert ids[0] == CLS_ID and ids[-1] == SEP_ID

    def test_empty(self, mlm_vocab):
        with pytest.raises(EmptyInput):
            encode_text(" ", mlm_vocab)


class TestMlmMask:
    def test_deterministic_given_seed(self, mlm_vocab):
        ids = encode_text(" ".join(f"w{i}" for i in range(20)), mlm_vocab)
        a = mlm_mask(ids, mlm_vocab, np.random.default_rng(42))
        b = mlm_mask(ids, mlm_vocab, np.random.default_rng(42))
        assert a == b

    def test_specials_never_selected(self, mlm_vocab):
        ids = encode_text(" ".join(f"w{i}" for i in range(20)), mlm_vocab)
        masked = mlm_mask(ids, mlm_vocab, np.random.default_rng(0), mask_rate=1.0)
        assert masked.labels[0] == IGNORE_LABEL
        assert masked.labels[-1] == IGNORE_LABEL
        assert masked.tokens[0] == CLS_ID and masked.tokens[-1] == SEP_ID

    def test_labels_carry_original_ids(self, mlm_vocab):
        ids = encode_text(" ".join(f"w{i}" for i in range(20)), mlm_vocab)
        masked = mlm_mask(ids, mlm_vocab, np.random.default_rng(1), mask_rate=1.0)
        for pos in range(1, len(ids) - 1):
            assert masked.labels[pos] == ids[pos]

    def test_rate_zero_is_identity(self, mlm_vocab):
        ids = encode_text("w0 w1 w2", mlm_vocab)
        masked = mlm_mask(ids, mlm_vocab, np.random.default_rng(2), mask_rate=0.0)
        assert list(masked.tokens) == ids
        assert all(l == IGNORE_LABEL for l in masked.labels)

    def test_pure_mask_corruption(self, mlm_vocab):
        ids = encode_text(" ".join(f"w{i}" for i in range(20)), mlm_vocab)
        masked = mlm_mask(
            ids, mlm_vocab, np.random.default_rng(3),
            mask_rate=1.0, mask_prob=1.0, random_prob=0.0,
        )
        assert all(t == MASK_ID for t in masked.tokens[1:-1])

    def test_unchanged_corruption(self, mlm_vocab):
        ids = encode_text(" ".join(f"w{i}" for i in range(20)), mlm_vocab)
        masked = mlm_mask(
            ids, mlm_vocab, np.random.default_rng(4),
            mask_rate=1.0, mask_prob=0.0, random_prob=0.0,
        )
        assert list(masked.tokens) == ids
        assert all(l != IGNORE_LABEL for l in masked.labels[1:-1])

    def test_selection_and_corruption_rates(self, mlm_vocab):
        # binomial check over ~40k candidate positions, 4-sigma tolerances
        ids = encode_text(" ".join(f"w{i % 30}" for i in range(2000)), mlm_vocab)
        rng = np.random.default_rng(5)
        selected = 0
        became_mask = 0
        stayed = 0
        trials = 20
        for _ in range(trials):
            masked = mlm_mask(ids, mlm_vocab, rng)
            for pos in range(1, len(ids) - 1):
                if masked.labels[pos] == IGNORE_LABEL:
                    continue
                selected += 1
                if masked.tokens[pos] == MASK_ID:
                    became_mask += 1
                elif masked.tokens[pos] == ids[pos]:
                    stayed += 1
        candidates = trials * (len(ids) - 2)
        rate = selected / candidates
        assert abs(rate - 0.15) < 4 * (0.15 * 0.85 / candidates) ** 0.5
        share_mask = became_mask / selected
        assert abs(share_mask - 0.8) < 4 * (0.8 * 0.2 / selected) ** 0.5
        # "unchanged" draws can still emit the original id via the random
        # branch (1/vocab chance), so allow a half-percent slack above 0.1
        share_stayed = stayed / selected
        assert abs(share_stayed - 0.1) < 4 * (0.1 * 0.9 / selected) ** 0.5 + 0.005

    def test_bad_rate(self, mlm_vocab):
        with pytest.raises(ValueError):
            mlm_mask([CLS_ID, 5, SEP_ID], mlm_vocab, np.random.default_rng(0), mask_rate=1.5)
