"""Optimizer, batching, and the two training phases."""

import numpy as np
import pytest

from tashkeel.encoding import IGNORE_LABEL, PAD_ID, build_vocab
from tashkeel.errors import EmptyCorpus, InvalidSchedule
from tashkeel.model import ModelConfig, forward_logits, init_parameters
from tashkeel.synthetic import make_corpus
from tashkeel.taskgen import (
    MaskedSample,
    PrefinetuneSample,
    Task,
    format_ca,
    format_diacritization,
)
from tashkeel.training import (
    AdamW,
    Phase,
    TrainSchedule,
    _prefinetune_epoch_batches,
    encode_finetune_corpus,
    pad_batch,
    prepare_prefinetune_data,
    save_loss_trace,
    train,
)

CFG_KW = dict(hidden_dim=16, layer_count=1, head_count=2, ffn_dim=32,
              max_seq_len=64, dropout_rate=0.0, precision="double")


@pytest.fixture(scope="module")
def setup():
    sentences = make_corpus(12, seed=7)
    vocab = build_vocab(sentences, min_frequency=1)
    config = ModelConfig(vocab_size=len(vocab), **CFG_KW)
    samples = encode_finetune_corpus(sentences, vocab, max_len=64)
    return sentences, vocab, config, samples


class TestSchedule:
    def test_defaults(self):
        s = TrainSchedule(phase=Phase.FINETUNE, epochs=3)
        assert (s.batch_size, s.learning_rate, s.weight_decay) == (64, 1e-3, 0.01)
        assert s.shuffle and not s.sequential_curriculum

    @pytest.mark.parametrize(
        "kwargs", [{"epochs": 0}, {"epochs": 3, "batch_size": 0},
                   {"epochs": 3, "learning_rate": -1.0}]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(InvalidSchedule):
            TrainSchedule(phase=Phase.FINETUNE, **kwargs)


class TestAdamW:
    def test_zero_learning_rate_freezes_params(self):
        params = {"w": np.ones((3, 3)), "b": np.zeros(3)}
        frozen = {k: v.copy() for k, v in params.items()}
        opt = AdamW(params, learning_rate=0.0)
        opt.step(params, {"w": np.full((3, 3), 2.0), "b": np.ones(3)})
        assert all(np.array_equal(params[k], frozen[k]) for k in params)

    def test_descends_a_quadratic(self):
        params = {"w": np.array([[4.0]])}
        opt = AdamW(params, learning_rate=0.1, weight_decay=0.0)
        for _ in range(200):
            opt.step(params, {"w": 2 * params["w"]})
        assert abs(params["w"][0, 0]) < 1e-3

    def test_decay_spares_vectors(self):
        params = {"w": np.ones((2, 2)), "g": np.ones(2)}
        opt = AdamW(params, learning_rate=0.5, weight_decay=0.1)
        opt.step(params, {"w": np.zeros((2, 2)), "g": np.zeros(2)})
        assert np.all(params["w"] < 1.0)       # decayed
        assert np.array_equal(params["g"], np.ones(2))  # not decayed


class TestPadBatch:
    def test_ragged_rows(self):
        ids, labels = pad_batch([
            ((2, 5, 3), (IGNORE_LABEL, 4, IGNORE_LABEL)),
            ((2, 5, 6, 7, 3), (IGNORE_LABEL, 1, 2, 3, IGNORE_LABEL)),
        ])
        assert ids.shape == labels.shape == (2, 5)
        assert list(ids[0]) == [2, 5, 3, PAD_ID, PAD_ID]
        assert list(labels[0]) == [IGNORE_LABEL, 4, IGNORE_LABEL,
                                   IGNORE_LABEL, IGNORE_LABEL]

    def test_empty(self):
        with pytest.raises(ValueError):
            pad_batch([])


class TestFinetune:
    def test_deterministic_and_loss_improves(self, setup):
        _, _, config, samples = setup
        schedule = TrainSchedule(phase=Phase.FINETUNE, epochs=8, batch_size=4,
                                 learning_rate=2e-3, seed=11)
        runs = []
        for _ in range(2):
            params, trace = train(init_parameters(config, seed=1), config,
                                  schedule, samples)
            runs.append((params, trace))
        assert runs[0][1] == runs[1][1]
        assert all(np.array_equal(runs[0][0][k], runs[1][0][k])
                   for k in runs[0][0])
        trace = runs[0][1]
        assert len(trace) == 8
        assert trace[-1] < trace[0]

    def test_mutates_params_in_place(self, setup):
        _, _, config, samples = setup
        params = init_parameters(config, seed=1)
        before = params["cls_w"].copy()
        out, _ = train(params, config,
                       TrainSchedule(phase=Phase.FINETUNE, epochs=1,
                                     batch_size=4), samples)
        assert out is params
        assert not np.array_equal(params["cls_w"], before)

    def test_empty_corpus(self, setup):
        _, _, config, _ = setup
        with pytest.raises(EmptyCorpus):
            train(init_parameters(config), config,
                  TrainSchedule(phase=Phase.FINETUNE, epochs=1), [])


class TestPrefinetune:
    def make_data(self, setup, n=6):
        sentences, vocab, config, _ = setup
        samples = [PrefinetuneSample(Task.CA, format_ca(s))
                   for s in sentences[:n]]
        samples += [PrefinetuneSample(Task.DIACRITIZATION,
                                      format_diacritization(s))
                    for s in sentences[:n]]
        return prepare_prefinetune_data(samples, vocab, config, seed=3)

    def test_grouped_by_task(self, setup):
        by_task = self.make_data(setup)
        assert len(by_task[Task.CA]) == 6
        assert len(by_task[Task.DIACRITIZATION]) == 6
        assert not by_task[Task.POS] and not by_task[Task.SEGMENTATION]

    def test_preparation_deterministic(self, setup):
        assert self.make_data(setup) == self.make_data(setup)

    def test_round_robin_alternates_tasks(self, setup):
        _, _, config, _ = setup
        by_task = self.make_data(setup)
        schedule = TrainSchedule(phase=Phase.PREFINETUNE, epochs=1,
                                 batch_size=2, shuffle=False)
        widths = [ids.shape for ids, _ in
                  _prefinetune_epoch_batches(by_task, schedule,
                                             np.random.default_rng(0))]
        assert len(widths) == 6  # 3 batches per task, interleaved
        # CA rows are whole sentences; diacritization rows carry a gloss per
        # letter, so those batches are strictly wider.
        ca, diac = widths[0::2], widths[1::2]
        assert all(c[1] < d[1] for c, d in zip(ca, diac))

    def test_sequential_curriculum_runs_tasks_in_order(self, setup):
        _, _, config, _ = setup
        by_task = self.make_data(setup)
        schedule = TrainSchedule(phase=Phase.PREFINETUNE, epochs=1,
                                 batch_size=2, shuffle=False,
                                 sequential_curriculum=True)
        widths = [ids.shape[1] for ids, _ in
                  _prefinetune_epoch_batches(by_task, schedule,
                                             np.random.default_rng(0))]
        assert max(widths[:3]) < min(widths[3:])

    def test_trains_and_is_deterministic(self, setup):
        _, _, config, _ = setup
        by_task = self.make_data(setup)
        schedule = TrainSchedule(phase=Phase.PREFINETUNE, epochs=4,
                                 batch_size=4, learning_rate=2e-3, seed=2)
        _, trace_a = train(init_parameters(config, seed=1), config, schedule,
                           by_task)
        _, trace_b = train(init_parameters(config, seed=1), config, schedule,
                           by_task)
        assert trace_a == trace_b
        assert trace_a[-1] < trace_a[0]

    def test_empty(self, setup):
        _, _, config, _ = setup
        with pytest.raises(EmptyCorpus):
            train(init_parameters(config), config,
                  TrainSchedule(phase=Phase.PREFINETUNE, epochs=1),
                  {task: [] for task in Task})


class TestArtifacts:
    def test_loss_trace_file(self, tmp_path):
        path = tmp_path / "trace.tsv"
        save_loss_trace([2.5, 1.25], path)
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines == ["0\t2.5", "1\t1.25"]

    def test_masked_sample_labels_align(self, setup):
        by_task = TestPrefinetune().make_data(setup)
        for sample in by_task[Task.CA]:
            assert isinstance(sample, MaskedSample)
            assert len(sample.tokens) == len(sample.labels)
