"""
Mask-insertion encoding for token classification
================================================

A sentence is encoded as ``[CLS] word [MASK]xN word [MASK]xN ... [SEP]``
where each word is followed by one ``[MASK]`` per Arabic letter.  The
model then classifies every mask into one of the fifteen diacritic
classes, so diacritization becomes ordinary token classification.

Run with: ``python3 demos/02_mask_encoding.py``
"""

from tashkeel.encoding import (
    IGNORE_LABEL,
    build_vocab,
    decode,
    encode_for_training,
    encoded_length,
)

SENTENCE = "ذَاتِ مَآثِرَ جَلِيلَةٍ وَمَزَايَا جَمَّةٍ"

# The vocabulary is word-level over bare (stripped) tokens, with five
# specials in front: [PAD]=0 [UNK]=1 [CLS]=2 [SEP]=3 [MASK]=4.
vocab = build_vocab([SENTENCE], min_frequency=1)
print(f"vocabulary: {len(vocab)} entries, digest {vocab.digest()[:16]}...")
print()

sample = encode_for_training(SENTENCE, vocab, max_len=64)
print(f"encoded length: {len(sample.tokens)}"
      f" (encoded_length() predicts {encoded_length(SENTENCE)})")
print()

# Token-by-token view.  Labels are IGNORE everywhere except at the mask
# positions, which carry the diacritic class read off the gold marks.
print(f"{'pos':>3}  {'token id':>8}  {'surface':<10}  label")
spans = {i: w for w, (s, e) in enumerate(sample.word_spans) for i in range(s, e)}
words = SENTENCE.split()
for i, (token, label) in enumerate(zip(sample.tokens, sample.labels)):
    if i in spans:
        surface = f"[MASK] w{spans[i]}"
    else:
        surface = vocab.token_of(token)
    shown = "ignore" if label == IGNORE_LABEL else str(label)
    print(f"{i:>3}  {token:>8}  {surface:<10}  {shown}")
print()

# `word_spans` records, for each word, the half-open range of its masks --
# that is all the inference side needs to route predictions back.
for word, (start, end) in zip(words, sample.word_spans):
    print(f"{word:>12}  masks [{start}, {end})  ({end - start} letters)")
print()

# `decode` is the inverse: original text + one class id per mask position
# reproduces the diacritized sentence exactly.
restored = decode(SENTENCE, list(sample.labels), sample.word_spans)
print("decode(encode(s)) == s:", restored == SENTENCE)
