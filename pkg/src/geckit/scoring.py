"""Edit-matched precision/recall/F0.5 against multi-annotator gold, and GLEU.

The F-score path matches hypothesis edits exactly (span + replacement) against
each annotator's gold edits, picks the annotator that maximizes the sentence
F0.5, and accumulates counts globally. GLEU rewards reference n-gram overlap
and penalizes hypothesis n-grams that survive from the source; references are
averaged deterministically instead of sampled.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from .align import Edit, align_edits, tokenize
from .corpus import Corpus
from .m2 import M2Record


@dataclass
class ScoreReport:
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f_half: float

    def to_record(self) -> dict[str, float | int]:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f0_5": self.f_half,
        }


@dataclass
class GleuReport:
    gleu: float
    n_max: int

    def to_record(self) -> dict[str, float | int]:
        return {"gleu": self.gleu, "n_max": self.n_max}


def f_beta(precision: float, recall: float, beta: float) -> float:
    """(1+b^2)PR / (b^2 P + R), defined as 0 when both P and R are 0."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    denom = beta * beta * precision + recall
    if denom == 0:
        return 0.0
    return (1 + beta * beta) * precision * recall / denom


def _rates(tp: int, fp: int, fn: int) -> tuple[float, float]:
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    return precision, recall


def report_from_counts(tp: int, fp: int, fn: int) -> ScoreReport:
    precision, recall = _rates(tp, fp, fn)
    return ScoreReport(tp, fp, fn, precision, recall, f_beta(precision, recall, 0.5))


def match_edits(hyp_edits: Sequence[Edit], gold: M2Record) -> dict[int, tuple[int, int, int]]:
    """Per-annotator (tp, fp, fn) from exact (start, end, replacement) matching."""
    for e in hyp_edits:
        if e.end > len(gold.tokens):
            raise ValueError(
                f"hypothesis span ({e.start},{e.end}) exceeds the {len(gold.tokens)}-token "
                "gold sentence; tokenizations do not line up"
            )
    hyp_keys = [(e.start, e.end, tuple(e.replacement)) for e in hyp_edits]
    result: dict[int, tuple[int, int, int]] = {}
    annotator_sets = gold.edits if gold.edits else {0: []}
    for annotator, edits in annotator_sets.items():
        gold_keys = Counter((e.start, e.end, e.replacement) for e in edits)
        tp = 0
        remaining = Counter(gold_keys)
        for key in hyp_keys:
            if remaining[key] > 0:
                remaining[key] -= 1
                tp += 1
        fp = len(hyp_keys) - tp
        fn = sum(remaining.values())
        result[annotator] = (tp, fp, fn)
    return result


def _hyp_tokens(pair_target: str, tokenized: bool) -> list[str]:
    return pair_target.split() if tokenized else tokenize(pair_target)


def score_corpus(hyp_corpus: Corpus, gold: Sequence[M2Record]) -> ScoreReport:
    """Corpus F0.5: per sentence, keep the annotator with the best sentence F0.5
    (ties -> lowest annotator id) and accumulate its counts globally."""
    if len(hyp_corpus.pairs) != len(gold):
        raise ValueError(
            f"hypothesis has {len(hyp_corpus.pairs)} sentences, gold has {len(gold)}"
        )
    total_tp = total_fp = total_fn = 0
    for pair, record in zip(hyp_corpus.pairs, gold):
        hyp_edits = align_edits(record.tokens, _hyp_tokens(pair.target, pair.tokenized))
        per_annotator = match_edits(hyp_edits, record)
        best = None
        for annotator in sorted(per_annotator):
            tp, fp, fn = per_annotator[annotator]
            f = f_beta(*_rates(tp, fp, fn), 0.5)
            if best is None or f > best[0]:
                best = (f, annotator, tp, fp, fn)
        assert best is not None
        total_tp += best[2]
        total_fp += best[3]
        total_fn += best[4]
    return report_from_counts(total_tp, total_fp, total_fn)


def _ngrams(tokens: Sequence[str], n: int) -> Counter:
    return Counter(tuple(tokens[i:i + n]) for i in range(len(tokens) - n + 1))


def _sentence_gleu(hyp: list[str], src: list[str], ref: list[str], n_max: int) -> float:
    if not hyp:
        return 0.0
    log_sum = 0.0
    orders = 0
    for n in range(1, n_max + 1):
        hyp_counts = _ngrams(hyp, n)
        total = sum(hyp_counts.values())
        if total == 0:
            continue  # hypothesis too short for this order
        ref_counts = _ngrams(ref, n)
        src_counts = _ngrams(src, n)
        matches = sum((hyp_counts & ref_counts).values())
        # hypothesis n-grams that come from the source but are absent from the
        # reference count against the score (clipped)
        overcounts = sum(((hyp_counts & src_counts) - ref_counts).values())
        numerator = max(0, matches - overcounts)
        ratio = numerator / total if numerator > 0 else 1.0 / (2 * total)
        log_sum += math.log(ratio)
        orders += 1
    if orders == 0:
        return 0.0
    brevity = 1.0 if len(hyp) >= len(ref) else math.exp(1.0 - len(ref) / len(hyp))
    return brevity * math.exp(log_sum / orders)


def gleu(hyp_text: str, src_text: str, refs: Sequence[str], n_max: int = 4) -> GleuReport:
    """Sentence GLEU averaged over all references."""
    if not refs:
        raise ValueError("at least one reference is required")
    hyp = tokenize(hyp_text)
    src = tokenize(src_text)
    scores = [_sentence_gleu(hyp, src, tokenize(ref), n_max) for ref in refs]
    return GleuReport(gleu=sum(scores) / len(scores), n_max=n_max)


def gleu_corpus(
    hyp_texts: Sequence[str],
    src_texts: Sequence[str],
    refs_per_sentence: Sequence[Sequence[str]],
    n_max: int = 4,
) -> GleuReport:
    """Mean over every (sentence, reference) combination."""
    if not (len(hyp_texts) == len(src_texts) == len(refs_per_sentence)):
        raise ValueError("hypotheses, sources, and references must be index-aligned")
    total = 0.0
    combos = 0
    for hyp_text, src_text, refs in zip(hyp_texts, src_texts, refs_per_sentence):
        if not refs:
            raise ValueError("every sentence needs at least one reference")
        hyp = tokenize(hyp_text)
        src = tokenize(src_text)
        for ref in refs:
            total += _sentence_gleu(hyp, src, tokenize(ref), n_max)
            combos += 1
    return GleuReport(gleu=total / combos if combos else 0.0, n_max=n_max)
