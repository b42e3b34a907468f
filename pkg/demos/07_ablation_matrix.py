"""
The pre-finetuning ablation matrix
==================================

Five variants differ only in which task streams warm the encoder up
before diacritization finetuning:

- ``classifier-only`` -- no pre-finetuning at all,
- ``ca``              -- sentence completion,
- ``ca-pos``          -- + part-of-speech glosses,
- ``ca-pos-seg``      -- + segmentation glosses,
- ``full``            -- + diacritic glosses.

``run_matrix`` trains every variant from the same initialization on the
same data and evaluates each on the same held-out split.  The demo
budget is small, so expect noisy rates and ordering; the point is the
machinery: one call, five comparable reports.

Runs in about half a minute: ``python3 demos/07_ablation_matrix.py``
"""

from tashkeel.ablation import AblationData, format_matrix, run_matrix
from tashkeel.encoding import build_vocab
from tashkeel.model import ModelConfig
from tashkeel.synthetic import make_corpus, make_pos_pairs, make_segmentation
from tashkeel.taskgen import format_diacritization, format_pos, format_segmentation
from tashkeel.training import Phase, TrainSchedule

train_sentences = make_corpus(400, seed=31)
test_sentences = make_corpus(40, seed=32)
data = AblationData(
    train_sentences=tuple(train_sentences),
    test_sentences=tuple(test_sentences),
    pos_sentences=tuple(tuple(p) for p in make_pos_pairs(train_sentences)),
    seg_pairs=tuple(make_segmentation(train_sentences)),
)

# One vocabulary covering every text form any variant will see.
texts = list(train_sentences)
texts += [format_pos(list(p)) for p in data.pos_sentences]
texts += [format_segmentation(r, s) for r, s in data.seg_pairs]
texts += [format_diacritization(s) for s in train_sentences]
vocab = build_vocab(texts, min_frequency=1)

config = ModelConfig(
    vocab_size=len(vocab), hidden_dim=64, layer_count=1, head_count=4,
    ffn_dim=128, max_seq_len=192, dropout_rate=0.0, precision="single", seed=0,
)
pre = TrainSchedule(phase=Phase.PREFINETUNE, epochs=2, batch_size=16,
                    learning_rate=1e-3, seed=1)
fin = TrainSchedule(phase=Phase.FINETUNE, epochs=12, batch_size=16,
                    learning_rate=3e-3, seed=2)

results = run_matrix(data, vocab, config, pre, fin)
print(format_matrix(results))
print()
for name, result in results.items():
    pre_epochs = len(result.prefinetune_trace)
    print(f"{name:<16} pre-finetune epochs: {pre_epochs},"
          f" final finetune loss: {result.finetune_trace[-1]:.4f}")
