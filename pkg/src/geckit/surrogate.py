"""A deterministic rule-based stand-in for a fine-tuned corrector.

The surrogate learns weighted context rules from token-aligned edits and
applies them in a single left-to-right pass. It exists so that schedule-level
behaviour (stage ordering, the final-stage learning-rate sweep, the precision
versus recall trade-off) can be exercised end to end without a GPU: raising
the final-stage rate suppresses rules that also fire in correct sentences,
which trades recall for precision exactly like the real training run.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from . import align, scoring
from .corpus import Corpus, is_erroneous
from .pipeline import Schedule
from .scoring import ScoreReport

BOS = "<s>"
EOS = "</s>"

# Longer spans or replacements are too specific to generalize; skip them.
MAX_SPAN = 3
MAX_RHS = 3


class SurrogateError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    """Rewrite ``span`` to ``rhs`` when flanked by ``left`` and ``right``.

    Contexts are single tokens, with BOS/EOS standing in at the sentence
    edges. The span may be empty (a pure insertion)."""
    left: str
    span: tuple[str, ...]
    right: str
    rhs: tuple[str, ...]

    def to_record(self) -> dict:
        return {
            "left": self.left,
            "span": list(self.span),
            "right": self.right,
            "rhs": list(self.rhs),
        }

    @classmethod
    def from_record(cls, rec: dict) -> "Rule":
        return cls(rec["left"], tuple(rec["span"]), rec["right"], tuple(rec["rhs"]))


@dataclass
class SurrogateModel:
    weights: dict[Rule, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.weights)

    def bump(self, rule: Rule, delta: float) -> None:
        self.weights[rule] = self.weights.get(rule, 0.0) + delta

    def active(self, theta: float = 0.0) -> list[Rule]:
        return [r for r, w in self.weights.items() if w > theta]


def _tokens(text: str, tokenized: bool) -> list[str]:
    return text.split() if tokenized else align.tokenize(text)


def extract_rules(src_tokens: Sequence[str], trg_tokens: Sequence[str]) -> list[Rule]:
    """One rule per aligned edit; raises if the pair has no edits at all."""
    edits = align.align_edits(src_tokens, trg_tokens)
    if not edits:
        raise SurrogateError("cannot extract rules from an edit-free pair")
    rules = []
    for edit in edits:
        span = tuple(src_tokens[edit.start:edit.end])
        if len(span) > MAX_SPAN or len(edit.replacement) > MAX_RHS:
            continue
        left = src_tokens[edit.start - 1] if edit.start > 0 else BOS
        right = src_tokens[edit.end] if edit.end < len(src_tokens) else EOS
        rules.append(Rule(left, span, right, edit.replacement))
    return rules


def _matches_at(rule: Rule, tokens: Sequence[str], pos: int) -> bool:
    k = len(rule.span)
    if pos + k > len(tokens):
        return False
    if tuple(tokens[pos:pos + k]) != rule.span:
        return False
    left = tokens[pos - 1] if pos > 0 else BOS
    if rule.left != left:
        return False
    right = tokens[pos + k] if pos + k < len(tokens) else EOS
    return rule.right == right


def _matches_anywhere(rule: Rule, tokens: Sequence[str]) -> bool:
    return any(_matches_at(rule, tokens, p) for p in range(len(tokens) + 1))


def train_stage(model: SurrogateModel, corpus: Corpus, filter: str, lr: float) -> None:
    """Erroneous pairs reinforce their extracted rules by ``lr``; correct
    pairs penalize every known rule whose left-hand side matches them."""
    if lr <= 0:
        raise SurrogateError("learning rate must be positive")
    if filter not in ("all", "erroneous_only", "correct_only"):
        raise SurrogateError(f"unknown filter {filter!r}")
    for pair in corpus.pairs:
        erroneous = is_erroneous(pair)
        if filter == "erroneous_only" and not erroneous:
            continue
        if filter == "correct_only" and erroneous:
            continue
        src = _tokens(pair.source, pair.tokenized)
        if erroneous:
            trg = _tokens(pair.target, pair.tokenized)
            for rule in extract_rules(src, trg):
                model.bump(rule, lr)
        else:
            # One penalty per rule per sentence, however often it matches.
            for rule in list(model.weights):
                if _matches_anywhere(rule, src):
                    model.bump(rule, -lr)


def train_schedule(schedule: Schedule, corpora: Mapping[str, Corpus]) -> SurrogateModel:
    model = SurrogateModel()
    for stage in schedule.stages:
        if stage.corpus not in corpora:
            raise SurrogateError(f"stage {stage.id}: no corpus named {stage.corpus!r}")
        train_stage(model, corpora[stage.corpus], stage.filter, stage.learning_rate)
    return model


def _pick(best: tuple[float, Rule] | None, cand: tuple[float, Rule]) -> tuple[float, Rule]:
    if best is None:
        return cand
    (bw, br), (cw, cr) = best, cand
    if cw != bw:
        return cand if cw > bw else best
    if len(cr.span) != len(br.span):
        return cand if len(cr.span) > len(br.span) else best
    return cand if cr.rhs < br.rhs else best


def correct(
    model: SurrogateModel, tokens: Sequence[str], theta: float = 0.0
) -> tuple[list[str], int]:
    """Apply the best active rule at each position in one pass over the
    source. Ties break to higher weight, then longer span, then smaller
    replacement. Returns the output tokens and the application count."""
    out: list[str] = []
    applied = 0
    pos = 0
    n = len(tokens)
    while pos <= n:
        best: tuple[float, Rule] | None = None
        for rule, weight in model.weights.items():
            if weight > theta and _matches_at(rule, tokens, pos):
                best = _pick(best, (weight, rule))
        if best is not None:
            rule = best[1]
            applied += 1
            out.extend(rule.rhs)
            if rule.span:
                pos += len(rule.span)
                continue
            # An insertion consumes the next source token unchanged so the
            # same rule cannot fire again at this position.
        if pos < n:
            out.append(tokens[pos])
        pos += 1
    return out, applied


def evaluate(
    model: SurrogateModel, corpus: Corpus, theta: float = 0.0
) -> tuple[ScoreReport, int]:
    """Exact-match edit F0.5 of the surrogate's output against the targets,
    plus the total number of rule applications."""
    total_tp = total_fp = total_fn = 0
    applied_total = 0
    for pair in corpus.pairs:
        src = _tokens(pair.source, pair.tokenized)
        trg = _tokens(pair.target, pair.tokenized)
        hyp, applied = correct(model, src, theta)
        applied_total += applied
        hyp_keys = Counter(
            (e.start, e.end, e.replacement) for e in align.align_edits(src, hyp)
        )
        gold_keys = Counter(
            (e.start, e.end, e.replacement) for e in align.align_edits(src, trg)
        )
        tp = sum((hyp_keys & gold_keys).values())
        total_tp += tp
        total_fp += sum(hyp_keys.values()) - tp
        total_fn += sum(gold_keys.values()) - tp
    return scoring.report_from_counts(total_tp, total_fp, total_fn), applied_total


@dataclass
class SweepRow:
    final_lr: float
    report: ScoreReport
    n_applied: int

    def to_record(self) -> dict:
        rec = {"final_lr": self.final_lr, "n_applied": self.n_applied}
        rec.update(self.report.to_record())
        return rec


def run_sweep(
    schedules: Sequence[Schedule],
    corpora: Mapping[str, Corpus],
    eval_corpus: Corpus,
    theta: float = 0.0,
) -> list[SweepRow]:
    """Train one model per schedule and evaluate each; rows come back sorted
    by the final-stage learning rate."""
    rows = []
    for schedule in schedules:
        if not schedule.stages:
            raise SurrogateError("schedule has no stages")
        model = train_schedule(schedule, corpora)
        report, applied = evaluate(model, eval_corpus, theta)
        rows.append(SweepRow(schedule.stages[-1].learning_rate, report, applied))
    rows.sort(key=lambda r: r.final_lr)
    return rows


def sweep_to_tsv(rows: Iterable[SweepRow]) -> str:
    lines = ["final_lr\tprecision\trecall\tf0_5\tn_applied"]
    for row in rows:
        lines.append(
            f"{row.final_lr:g}\t{row.report.precision:.4f}\t{row.report.recall:.4f}"
            f"\t{row.report.f_half:.4f}\t{row.n_applied}"
        )
    return "\n".join(lines) + "\n"


def sweep_to_json(rows: Iterable[SweepRow]) -> str:
    return json.dumps([r.to_record() for r in rows], indent=2) + "\n"


def save_model(model: SurrogateModel, path: str | Path) -> None:
    items = sorted(
        model.weights.items(), key=lambda kv: (kv[0].left, kv[0].span, kv[0].right, kv[0].rhs)
    )
    with open(path, "w", encoding="utf-8") as fh:
        for rule, weight in items:
            rec = rule.to_record()
            rec["weight"] = weight
            fh.write(json.dumps(rec, ensure_ascii=False))
            fh.write("\n")


def load_model(path: str | Path) -> SurrogateModel:
    model = SurrogateModel()
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            model.weights[Rule.from_record(rec)] = rec["weight"]
    return model
