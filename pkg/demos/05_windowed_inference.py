"""
Window planning and majority voting for long sentences
======================================================

Encoded sentences must fit the model's sequence budget.  Long input is
split into word windows two ways:

- ``zero``       -- disjoint maximal windows (no overlap, one vote each),
- ``sliding:p``  -- overlapping windows advancing ``p`` words at a time,
  so most words are predicted several times and the votes are resolved
  by majority, ties broken toward the window whose center is nearest.

Run with: ``python3 demos/05_windowed_inference.py``
"""

from tashkeel.encoding import build_vocab, encoded_length
from tashkeel.inference import collect_votes, diacritize, plan_windows
from tashkeel.model import ModelConfig, init_parameters
from tashkeel.synthetic import make_corpus

# Thirty three-letter words cost 4 tokens each + 2 specials = 122 tokens.
sentence = " ".join(["كتب"] * 30)
limit = 40
print(f"sentence: {len(sentence.split())} words,"
      f" {encoded_length(sentence)} encoded tokens, window limit {limit}")
print()


def show(strategy: str) -> None:
    plan = plan_windows(sentence, limit, strategy)
    windows = " ".join(f"[{s},{e}]" for s, e in plan.windows)
    print(f"{strategy:<10} {len(plan.windows):>2} windows  {windows}")


for strategy in ("zero", "sliding:20", "sliding:10", "sliding:5", "sliding:1"):
    show(strategy)
print()

# Overlap means votes.  With a (deliberately untrained) model the predicted
# classes are arbitrary but the vote bookkeeping is easy to inspect.
vocab = build_vocab(make_corpus(8, seed=2) + [sentence], min_frequency=1)
config = ModelConfig(
    vocab_size=len(vocab), hidden_dim=16, layer_count=1, head_count=2,
    ffn_dim=32, max_seq_len=limit, dropout_rate=0.0, precision="single", seed=0,
)
params = init_parameters(config, seed=1)

plan = plan_windows(sentence, limit, "sliding:5")
votes = collect_votes(sentence, params, config, vocab, plan)
counts = [len(votes.candidates[w]) for w in range(len(sentence.split()))]
print("votes per word (sliding:5):", counts)
print()

# Every strategy must produce the same output on input that fits in one
# window -- overlap with nothing is a no-op.
short = "كتب كتب كتب"
outputs = {
    s: diacritize(short, params, config, vocab, strategy=s)
    for s in ("zero", "sliding:1", "sliding:10")
}
print("short-sentence agreement across strategies:",
      len(set(outputs.values())) == 1)
print("output:", outputs["zero"])
