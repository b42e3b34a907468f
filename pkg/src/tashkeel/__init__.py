"""Arabic diacritization pipeline.

Submodules:
    arabic     diacritic-aware text algebra (align/apply, stripping, predicates)
    corpus     loading, filtering, and length-bounded sentence splitting
    taskgen    instruction-prefixed pre-finetuning samples and MLM masking
    encoding   whole-word vocabulary and mask-insertion label encoding
    model      from-scratch transformer encoder with manual backprop
    checkpoint binary parameter serialization
    training   AdamW schedules for both training phases
    inference  windowed diacritization with majority voting
    metrics    DER/WER with option toggles, reports, bucket statistics
    synthetic  rule-generated diacritization language for end-to-end checks
    ablation   pre-finetuning task-subset comparison matrix
    cli        command-line entry points
"""

__version__ = "0.1.0"
