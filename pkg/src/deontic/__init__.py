"""Detection of contractual obligations and prohibitions with BiLSTM classifiers.

Everything is built from first principles: a small recorded-gradient tensor
library, a clause-aware text pipeline, four classifier variants (flat,
self-attention, context-extended, hierarchical), the training loop, the
evaluation metrics, and a Levenshtein-clustering dataset splitter.
"""

__version__ = "0.1.0"
