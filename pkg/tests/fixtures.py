"""Synthetic data builders shared by the module and acceptance tests.

Counts are chosen so the headline percentages land exactly on their
documented two-decimal values; see the inline arithmetic comments.
"""

from __future__ import annotations

import random

import oracles
from geckit.corpus import Corpus, SentencePair
from geckit.detok import DetokOutcome, rule_detokenize
from geckit.annosvc import AnnotationStore
from geckit.m2 import M2Edit, M2Record


def make_ratio_corpus(name: str, n_total: int, n_erroneous: int) -> Corpus:
    """Tokenized corpus where the first ``n_erroneous`` pairs differ."""
    pairs = []
    for i in range(n_total):
        src = f"a w{i} b"
        trg = f"a x{i} b" if i < n_erroneous else src
        pairs.append(SentencePair(f"{name}:{i}", src, trg, tokenized=True))
    return Corpus(name=name, pairs=pairs)


# -- learning-rate sweep dataset ----------------------------------------------

# 30 single-token error patterns. The first 15 are real errors (the eval
# targets apply the fix); the rest are false alarms (eval targets keep the
# source). Each pattern's rule gains weight 5e-6 once, then loses lr per
# suppressing correct sentence, so it dies when lr exceeds 5e-6 / m. The m
# values below place every death strictly between two grid points of
# {1e-7, 2e-7, 2.5e-7, 3e-7, 3.5e-7, 4e-7, 5e-7}.
GOOD_M = [0] * 13 + [11, 13]
AMBIGUOUS_M = [33, 33, 22, 22, 18, 18, 15, 15, 13, 13, 11, 11, 11, 11, 11]


def sweep_dataset() -> tuple[Corpus, Corpus, Corpus]:
    """(first-stage corpus, second-stage corpus, eval corpus): 500 train
    pairs, 200 eval pairs, 30 patterns. All token contexts are unique, so
    no rule ever fires outside its own pattern."""

    def pair(name: str, i: int, src: str, trg: str) -> SentencePair:
        return SentencePair(f"{name}:{i}", src, trg, tokenized=True)

    patterns = []
    for j in range(30):
        good = j < 15
        m = GOOD_M[j] if good else AMBIGUOUS_M[j - 15]
        patterns.append((j, good, m))

    first_pairs = []
    for k in range(90):  # stage-1 fillers with one-off contexts
        first_pairs.append(pair("first", k, f"fa{k} fb{k} fc{k}", f"fa{k} fd{k} fc{k}"))
    for k in range(99):
        text = f"ga{k} gb{k} gc{k}"
        first_pairs.append(pair("first", 90 + k, text, text))

    second_pairs = []
    i = 0
    for j, good, m in patterns:
        src = f"p{j} l{j} e{j} r{j} q{j}"
        second_pairs.append(pair("second", i, src, src.replace(f"e{j}", f"f{j}")))
        i += 1
    for j, good, m in patterns:
        for k in range(m):
            text = f"s{j}x{k} l{j} e{j} r{j} s{j}y{k}"
            second_pairs.append(pair("second", i, text, text))
            i += 1

    eval_pairs = []
    i = 0
    for j, good, m in patterns:
        for k in range(6):
            src = f"v{j}x{k} l{j} e{j} r{j} v{j}y{k}"
            trg = src.replace(f"e{j}", f"f{j}") if good else src
            eval_pairs.append(pair("eval", i, src, trg))
            i += 1
    for k in range(20):
        text = f"ha{k} hb{k} hc{k}"
        eval_pairs.append(pair("eval", i + k, text, text))

    return (
        Corpus("first", first_pairs),
        Corpus("second", second_pairs),
        Corpus("eval", eval_pairs),
    )


# -- M2 fixture ----------------------------------------------------------------

_VOCAB = [
    "the", "a", "he", "she", "go", "goes", "school", "to", "at",
    "was", "were", "cat", "dogs", "run", "quickly",
]
_ETYPES = ["R:VERB", "M:DET", "U:PREP", "R:NOUN", "R:ORTH"]


def make_m2_records(rng: random.Random, n_records: int):
    """Random multi-annotator records plus, per record, each annotator's
    corrected token list computed by forward splicing."""
    records, expected = [], []
    for _ in range(n_records):
        tokens = [rng.choice(_VOCAB) for _ in range(rng.randint(3, 9))]
        n = len(tokens)
        record = M2Record(tokens=tokens)
        expect: dict[int, list[str]] = {}
        for annotator in range(rng.randint(1, 3)):
            if rng.random() < 0.15:
                record.edits[annotator] = []
                expect[annotator] = list(tokens)
                continue
            edits = []
            pos = rng.randint(0, 2)
            while pos <= n and len(edits) < 3:
                start = pos
                end = min(n, start + rng.randint(0, 2))
                replacement = [rng.choice(_VOCAB) for _ in range(rng.randint(0, 2))]
                if start == end and not replacement:
                    pos += 2
                    continue
                edits.append(M2Edit(
                    start, end, rng.choice(_ETYPES), " ".join(replacement), annotator,
                ))
                pos = end + rng.randint(1, 3)
            record.edits[annotator] = edits
            expect[annotator] = oracles.splice(
                tokens, [(e.start, e.end, list(e.replacement)) for e in edits]
            )
        records.append(record)
        expected.append(expect)
    return records, expected


# -- annotation store fixtures ---------------------------------------------------


def build_labeled_store(root, name, corpus_size, n_modified, label_counts) -> AnnotationStore:
    """Store over a ``corpus_size`` corpus whose first ``n_modified`` pairs
    were changed beyond spacing, with the first tasks labeled per
    ``label_counts`` (in task order, one block per label)."""
    pairs, outcomes = [], []
    for i in range(corpus_size):
        pid = f"{name}:{i}"
        if i < n_modified:
            rule_text = f"u{i} stays here."
            llm_text = f"u{i} strays here."
            pairs.append(SentencePair(pid, f"s{i} text.", llm_text, modified_by_detok=True))
            outcomes.append(DetokOutcome(pid, rule_text, llm_text, True))
        else:
            text = f"u{i} stays here."
            pairs.append(SentencePair(pid, f"s{i} text.", text))
            outcomes.append(DetokOutcome(pid, text, None, False))
    store = AnnotationStore.create(root, Corpus(name, pairs), outcomes)
    task_id = 1
    for label, count in label_counts.items():
        for _ in range(count):
            store.submit_label(task_id, label, "rater")
            task_id += 1
    return store


class StubDetokClient:
    """Deterministic completion stub: extracts the corrected text from the
    prompt and returns it with rule-based spacing; texts containing a token
    in ``garble`` come back altered beyond whitespace."""

    def __init__(self, garble=()):
        self.garble = set(garble)
        self.calls = 0

    def complete(self, prompt: str) -> str:
        self.calls += 1
        marker = "Corrected text: "
        start = prompt.index(marker) + len(marker)
        end = prompt.index("\n\nOnly change spaces")
        tokens = prompt[start:end].split()
        text = rule_detokenize(tokens)
        if self.garble.intersection(tokens):
            return text + " garbled"
        return text
