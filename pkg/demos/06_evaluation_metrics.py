"""
DER, WER, and error-rate histograms
===================================

Quality is measured per letter position (diacritic error rate) and per
word (word error rate), micro-averaged over the corpus.  Two switches
control which positions count:

- ``with_case_ending``     -- include each word's final letter,
- ``include_no_diacritic`` -- include positions whose gold class is bare.

Run with: ``python3 demos/06_evaluation_metrics.py``
"""

from tashkeel.metrics import (
    MetricOptions,
    bucket_stats,
    der,
    evaluate_corpus,
    format_report,
    parse_kv_report,
    report_to_kv,
    wer,
)

GOLD = "كَتَبَ الوَلَدُ الدَّرْسَ"
PRED = "كَتِبَ الوَلَدُ الدَّرْسُ"  # one interior miss, one case-ending miss

print("gold:", GOLD)
print("pred:", PRED)
print()
for opts, label in [
    (MetricOptions(True, True), "with case endings, count bare positions"),
    (MetricOptions(False, True), "ignore case endings"),
    (MetricOptions(True, False), "ignore gold-bare positions"),
]:
    print(f"  DER {der(GOLD, PRED, opts):6.2f}%  WER {wer(GOLD, PRED, opts):6.2f}%"
          f"   ({label})")
print()

# Corpus evaluation pools counts first (micro-average), so long sentences
# weigh more than short ones; it also buckets per-sentence rates.
pairs = [(GOLD, PRED), (GOLD, GOLD), (GOLD, GOLD), (GOLD, PRED), (GOLD, GOLD)]
report = evaluate_corpus(pairs)
print(format_report(report))
print()

# The key=value rendering round-trips through the parser, which is what the
# command-line tools write and the stats reader consumes.
kv = report_to_kv(report)
parsed = parse_kv_report(kv)
print("kv keys:", ", ".join(sorted(parsed)[:6]), "...")
print("kv der round-trips:", float(parsed["der"]) == report.der)
print()

# Histograms have one exact-zero bin and right-closed bins after it.
values = [0.0, 0.0, 2.0, 10.0, 35.0, 80.0]
for bucket in bucket_stats(values, edges=(0, 10, 50, 100)):
    label = "zero" if bucket.lo == bucket.hi == 0 else f"({bucket.lo:g}, {bucket.hi:g}]"
    print(f"  {label:>10}  count {bucket.count}  proportion {bucket.proportion:.3f}")
