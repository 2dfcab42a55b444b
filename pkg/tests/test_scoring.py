from __future__ import annotations

import math
import random

import pytest

import fixtures
from geckit.align import Edit, OpKind, align_edits
from geckit.corpus import Corpus, SentencePair
from geckit.m2 import M2Edit, M2Record, apply_edits
from geckit.scoring import (
    f_beta,
    gleu,
    gleu_corpus,
    match_edits,
    report_from_counts,
    score_corpus,
)


def test_f_beta_hand_value():
    assert f_beta(0.7352, 0.5010, 0.5) == pytest.approx(0.6723, abs=1e-4)


def test_f_beta_degenerate_and_invalid():
    assert f_beta(0.0, 0.0, 0.5) == 0.0
    assert f_beta(1.0, 0.0, 0.5) == 0.0
    assert f_beta(0.0, 1.0, 0.5) == 0.0
    with pytest.raises(ValueError, match="beta"):
        f_beta(0.5, 0.5, 0.0)


def test_f_beta_weights_precision_at_half():
    # beta=0.5 weights precision twice as much as recall
    assert f_beta(0.9, 0.1, 0.5) > f_beta(0.1, 0.9, 0.5)


def test_report_from_counts():
    report = report_from_counts(3, 1, 2)
    assert report.precision == pytest.approx(0.75)
    assert report.recall == pytest.approx(0.6)
    assert report.f_half == pytest.approx(f_beta(0.75, 0.6, 0.5))
    assert report.to_record()["f0_5"] == report.f_half


def _gold(tokens, edits_by_annotator):
    return M2Record(tokens=tokens, edits=edits_by_annotator)


def test_match_edits_exact_span_and_replacement():
    gold = _gold(["He", "go", "to", "school", "."], {
        0: [M2Edit(1, 2, "R:VERB", "goes", 0), M2Edit(3, 3, "M:DET", "the", 0)],
        1: [],
    })
    hyp = [
        Edit(1, 2, ("goes",), OpKind.REPLACEMENT),
        Edit(4, 5, ("!",), OpKind.REPLACEMENT),
    ]
    result = match_edits(hyp, gold)
    assert result[0] == (1, 1, 1)  # goes matches, ! is spurious, the is missed
    assert result[1] == (0, 2, 0)


def test_match_edits_replacement_must_match():
    gold = _gold(["a", "b"], {0: [M2Edit(0, 1, "R:X", "z", 0)]})
    hyp = [Edit(0, 1, ("y",), OpKind.REPLACEMENT)]
    assert match_edits(hyp, gold)[0] == (0, 1, 1)


def test_match_edits_without_annotations_scores_against_empty_set():
    gold = M2Record(tokens=["a", "b"], edits={})
    hyp = [Edit(0, 1, ("y",), OpKind.REPLACEMENT)]
    assert match_edits(hyp, gold) == {0: (0, 1, 0)}


def test_match_edits_rejects_out_of_range_hypothesis():
    gold = _gold(["a", "b"], {0: []})
    with pytest.raises(ValueError, match="exceeds"):
        match_edits([Edit(2, 5, ("y",), OpKind.REPLACEMENT)], gold)


def _pairs(targets):
    return Corpus("hyp", [
        SentencePair(id=f"hyp:{i}", source="", target=t, tokenized=True)
        for i, t in enumerate(targets)
    ])


def test_score_corpus_picks_best_annotator_per_sentence():
    gold = [
        _gold(["He", "go", "."], {0: [M2Edit(1, 2, "R:VERB", "goes", 0)], 1: []}),
        _gold(["She", "ran", "."], {0: [M2Edit(1, 2, "R:VERB", "runs", 0)], 1: []}),
    ]
    # sentence 1 matches annotator 0 perfectly; sentence 2 leaves the source
    # unchanged, both annotators give f=0 and the tie goes to annotator 0
    report = score_corpus(_pairs(["He goes .", "She ran ."]), gold)
    assert (report.tp, report.fp, report.fn) == (1, 0, 1)
    assert report.precision == pytest.approx(1.0)
    assert report.recall == pytest.approx(0.5)
    assert report.f_half == pytest.approx(1.25 * 0.5 / 0.75)


def test_score_corpus_length_mismatch():
    with pytest.raises(ValueError, match="2.*1"):
        score_corpus(_pairs(["a", "b"]), [_gold(["a"], {0: []})])


def _oracle_score(hyp_corpus, gold_records):
    """Independent reimplementation: list-based matching, explicit selection."""
    totals = [0, 0, 0]
    for pair, record in zip(hyp_corpus.pairs, gold_records):
        hyp_edits = align_edits(record.tokens, pair.target.split())
        hyp_keys = [(e.start, e.end, tuple(e.replacement)) for e in hyp_edits]
        annotator_sets = record.edits if record.edits else {0: []}
        best = None
        for annotator in sorted(annotator_sets):
            gold_keys = [(e.start, e.end, e.replacement)
                         for e in annotator_sets[annotator]]
            pool = list(gold_keys)
            tp = 0
            for key in hyp_keys:
                if key in pool:
                    pool.remove(key)
                    tp += 1
            fp, fn = len(hyp_keys) - tp, len(pool)
            p = tp / (tp + fp) if tp + fp else 0.0
            r = tp / (tp + fn) if tp + fn else 0.0
            f = f_beta(p, r, 0.5)
            if best is None or f > best[0]:
                best = (f, tp, fp, fn)
        totals[0] += best[1]
        totals[1] += best[2]
        totals[2] += best[3]
    return tuple(totals)


def test_score_corpus_matches_oracle_on_random_corpora():
    rng = random.Random(23)
    for _ in range(30):
        records, expected = fixtures.make_m2_records(rng, 10)
        targets = []
        for record, expect in zip(records, expected):
            choice = rng.random()
            if choice < 0.4:
                annotator = rng.choice(sorted(expect))
                targets.append(" ".join(expect[annotator]))
            elif choice < 0.7:
                targets.append(" ".join(record.tokens))  # leave uncorrected
            else:
                tokens = list(apply_edits(record, rng.choice(record.annotators())))
                tokens[rng.randrange(len(tokens))] = "zz"  # inject a miss
                targets.append(" ".join(tokens))
        report = score_corpus(_pairs(targets), records)
        assert (report.tp, report.fp, report.fn) == _oracle_score(_pairs(targets), records)


# GLEU


def test_gleu_identity_is_exactly_one():
    report = gleu("He goes to school .", "He go to school .", ["He goes to school ."])
    assert report.gleu == 1.0


def test_gleu_hand_value_bigrams():
    # unigrams: match a,d; overcount b (kept from source) -> 1/3
    # bigrams: no match; "a b" kept from source -> numerator 0 -> smoothing 1/4
    report = gleu("a b d", "a b c", ["a B d"], n_max=2)
    assert report.gleu == pytest.approx(math.sqrt(1.0 / 12.0))
    assert round(report.gleu, 4) == 0.2887


def test_gleu_hand_value_short_hypothesis_skips_empty_orders():
    # trigram order smooths to 1/2; 4-gram order has no hypothesis n-grams
    report = gleu("a b d", "a b c", ["a B d"], n_max=4)
    assert report.gleu == pytest.approx((1.0 / 24.0) ** (1.0 / 3.0))
    assert round(report.gleu, 4) == 0.3467


def test_gleu_unchanged_source_scores_below_reference():
    src = "He go to school ."
    ref = "He goes to school ."
    assert gleu(src, src, [ref]).gleu < gleu(ref, src, [ref]).gleu


def test_gleu_brevity_penalty():
    report = gleu("a b", "a b c", ["a b c"])
    assert report.gleu == pytest.approx(math.exp(-0.5))


def test_gleu_averages_over_references():
    hyp, src = "a b d", "a b c"
    single = [gleu(hyp, src, [ref], n_max=2).gleu for ref in ("a B d", "a b d")]
    combined = gleu(hyp, src, ["a B d", "a b d"], n_max=2).gleu
    assert combined == pytest.approx(sum(single) / 2)


def test_gleu_requires_references():
    with pytest.raises(ValueError, match="reference"):
        gleu("a", "a", [])


def test_gleu_corpus_is_mean_over_all_combos():
    hyps = ["a b d", "x y"]
    srcs = ["a b c", "x z"]
    refs = [["a B d", "a b d"], ["x y"]]
    parts = []
    for hyp, src, ref_list in zip(hyps, srcs, refs):
        parts.extend(gleu(hyp, src, [r]).gleu for r in ref_list)
    report = gleu_corpus(hyps, srcs, refs)
    assert report.gleu == pytest.approx(sum(parts) / len(parts))


def test_gleu_corpus_validates_alignment_and_references():
    with pytest.raises(ValueError, match="aligned"):
        gleu_corpus(["a"], ["a", "b"], [["a"], ["b"]])
    with pytest.raises(ValueError, match="reference"):
        gleu_corpus(["a"], ["a"], [[]])
