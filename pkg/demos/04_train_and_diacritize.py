"""
Training a small model end to end
=================================

The encoder is a from-scratch numpy transformer (post-layer-norm, two
heads: ``mlm`` for pre-finetuning, ``cls`` for diacritic classes) with a
hand-written backward pass and AdamW.  This demo memorizes a tiny corpus
of the deterministic rule language and then restores its diacritics from
bare text.

Runs in roughly ten seconds: ``python3 demos/04_train_and_diacritize.py``
"""

import time

from tashkeel.arabic import strip_diacritics
from tashkeel.encoding import build_vocab
from tashkeel.inference import diacritize
from tashkeel.metrics import evaluate_corpus, format_report
from tashkeel.model import ModelConfig, init_parameters
from tashkeel.synthetic import make_corpus
from tashkeel.training import Phase, TrainSchedule, encode_finetune_corpus, train

sentences = make_corpus(30, seed=4)
vocab = build_vocab(sentences, min_frequency=1)
print(f"corpus: {len(sentences)} sentences, vocabulary {len(vocab)} entries")
print("sample:", sentences[0])
print()

config = ModelConfig(
    vocab_size=len(vocab), hidden_dim=64, layer_count=2, head_count=4,
    ffn_dim=128, max_seq_len=64, dropout_rate=0.0, precision="double", seed=0,
)
params = init_parameters(config, seed=0)
schedule = TrainSchedule(
    phase=Phase.FINETUNE, epochs=60, batch_size=16, learning_rate=3e-3, seed=0,
)
data = encode_finetune_corpus(sentences, vocab, config.max_seq_len)

start = time.perf_counter()
params, trace = train(params, config, schedule, data)
print(f"trained {len(trace)} epochs in {time.perf_counter() - start:.1f}s;"
      f" loss {trace[0]:.3f} -> {trace[-1]:.4f}")
print()

# Strip the marks off and ask the model to put them back.
for gold in sentences[:3]:
    bare = strip_diacritics(gold)
    restored = diacritize(bare, params, config, vocab)
    print("bare:    ", bare)
    print("restored:", restored)
    print("gold:    ", gold, "(exact)" if restored == gold else "")
    print()

pairs = [
    (gold, diacritize(strip_diacritics(gold), params, config, vocab))
    for gold in sentences
]
print(format_report(evaluate_corpus(pairs)))
