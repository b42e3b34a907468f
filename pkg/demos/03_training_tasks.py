"""
Pre-finetuning task streams
===========================

Before diacritization finetuning, the encoder can warm up on four
masked-language-model tasks rendered as plain text lines:

- ``ca``   -- raw sentence completion,
- ``pos``  -- word/part-of-speech gloss pairs,
- ``seg``  -- word/segmentation pairs (clitic split with ``+``),
- ``diac`` -- word/per-letter-diacritic gloss pairs.

Every line is tagged with its task and the streams are interleaved
round-robin so one batch of each task is seen in turn.

Run with: ``python3 demos/03_training_tasks.py``
"""

import numpy as np

from tashkeel.encoding import build_vocab
from tashkeel.synthetic import make_corpus, make_pos_pairs, make_segmentation
from tashkeel.taskgen import (
    Task,
    encode_text,
    format_ca,
    format_diacritization,
    format_pos,
    format_segmentation,
    interleave_round_robin,
    mlm_mask,
)

# A small corpus from the rule language (deterministic, fully diacritized).
sentences = make_corpus(4, seed=11)
pos = make_pos_pairs(sentences)
seg = make_segmentation(sentences)

print("one rendering per task for the first sentence:")
print("  ca   |", format_ca(sentences[0]))
print("  pos  |", format_pos(pos[0]))
print("  seg  |", format_segmentation(*seg[0]))
print("  diac |", format_diacritization(sentences[0]))
print()

# Interleaving alternates tasks; each sample remembers where it came from.
streams = {
    Task.CA: [format_ca(s) for s in sentences],
    Task.POS: [format_pos(p) for p in pos],
    Task.SEGMENTATION: [format_segmentation(r, s) for r, s in seg],
    Task.DIACRITIZATION: [format_diacritization(s) for s in sentences],
}
samples = interleave_round_robin(streams)
print("interleaved order:", " ".join(s.task.value for s in samples[:8]), "...")
print()

# The MLM objective masks 15% of content tokens: 80% -> [MASK], 10% -> a
# random token, 10% left alone; labels mark exactly the chosen positions.
vocab = build_vocab([s.text for s in samples], min_frequency=1)
ids = encode_text(samples[0].text, vocab)
rng = np.random.default_rng(7)
masked = mlm_mask(ids, vocab, rng)
changed = sum(1 for a, b in zip(ids, masked.tokens) if a != b)
labeled = sum(1 for lab in masked.labels if lab != -100)
print(f"mlm_mask over {len(ids)} tokens: {labeled} positions labeled,"
      f" {changed} visibly changed")
print("  original:", ids)
print("  masked:  ", list(masked.tokens))
print("  labels:  ", list(masked.labels))
