"""Data-side toolkit for minimal-edit grammatical error correction:
corpus handling, M2 gold files, edit alignment and scoring, detokenization
with LLM verification, training-data preparation, a deterministic surrogate
corrector, and the annotation review service.
"""

__version__ = "0.1.0"
