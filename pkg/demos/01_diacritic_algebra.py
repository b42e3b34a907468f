"""
The diacritic algebra: align, apply, strip
==========================================

Arabic diacritics are combining marks that ride on the preceding letter.
The whole pipeline rests on three small operations:

- ``align`` pairs every Arabic letter with one of fifteen diacritic
  classes (no mark, eight single marks, six shadda combinations),
- ``apply`` is its inverse on the letter skeleton,
- ``strip_diacritics`` removes the marks and keeps everything else.

Run with: ``python3 demos/01_diacritic_algebra.py``
"""

from tashkeel.arabic import (
    DiacriticClass,
    align,
    apply,
    count_arabic_letters,
    strip_diacritics,
)

SENTENCE = "ذَاتِ مَآثِرَ جَلِيلَةٍ وَمَزَايَا جَمَّةٍ"

print("sentence:", SENTENCE)
print("stripped:", strip_diacritics(SENTENCE))
print()

# Every word decomposes into (letters, classes); the class names follow the
# traditional mark names, with SHADDA_* for the doubled-consonant combos.
for word in SENTENCE.split():
    aligned = align(word)
    pairs = ", ".join(
        f"{letter}:{cls.name}" for letter, cls in zip(aligned.letters, aligned.classes)
    )
    print(f"{word:>12}  ->  {pairs}")
print()

# `apply` reverses `align` exactly; letters * classes -> marked word.
word = SENTENCE.split()[2]
print("round trip:", word, "->", apply(align(word)), "(equal:", apply(align(word)) == word, ")")

# Shadda clusters may appear in either textual order; `align` accepts both
# and `apply` always emits the canonical order (shadda first).
reversed_order = "جَم" + "َّ" + "ةٍ"  # fatha BEFORE shadda
canonical = apply(align(reversed_order))
print("mark-order normalization:", list(reversed_order), "->", list(canonical))
print()

# The class count always equals the Arabic-letter count -- punctuation,
# digits and Latin text contribute nothing.
mixed = "عَام 2024 (midyear)"
aligned = align(mixed)
print(f"{mixed!r}: {count_arabic_letters(mixed)} Arabic letters,"
      f" {len(aligned.classes)} classes")

# The full class inventory:
print()
print("the fifteen classes:")
for cls in DiacriticClass:
    shown = ("ـ" + cls.marks) if cls.marks else "ـ (bare)"
    print(f"  {cls.value:2d} {cls.name:<16} {shown}")
