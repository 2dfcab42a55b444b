"""Tokenization, token-sequence alignment, and span-edit extraction.

Edits are extracted by a minimal-cost alignment (match 0, substitution 1 or
0.5 for case-only differences, insertion/deletion 1) whose tie-breaking is
deterministic, then merged into maximal spans and classified as Missing,
Replacement, or Unnecessary.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

# Characters split off token edges; internal occurrences (e.g. "3.14") stay.
_PUNCT = set(".,!?;:\"'()[]")

# Clitic suffixes kept as their own tokens, longest first.
_CONTRACTIONS = ("n't", "'re", "'ve", "'ll", "'s", "'d", "'m")


class OpKind(str, Enum):
    MISSING = "M"
    REPLACEMENT = "R"
    UNNECESSARY = "U"


@dataclass(frozen=True)
class Edit:
    """A change to the source token span [start, end)."""

    start: int
    end: int
    replacement: tuple[str, ...]
    op: OpKind

    def __post_init__(self) -> None:
        if self.start == self.end and not self.replacement:
            raise ValueError("empty-to-empty edit is not representable")

    def to_record(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "replacement": list(self.replacement),
            "op": self.op.value,
        }


@dataclass
class OpStats:
    m: float
    r: float
    u: float

    def to_record(self) -> dict[str, float]:
        return {"missing": self.m, "replacement": self.r, "unnecessary": self.u}


class AlignOp(NamedTuple):
    kind: str  # match | sub | ins | del
    src_pos: int  # source index before the op
    trg_pos: int  # target index before the op


def token_spans(text: str) -> list[tuple[int, int]]:
    """Character spans of :func:`tokenize` output, in order.

    Guarantees ``[text[s:e] for s, e in token_spans(text)] == tokenize(text)``,
    which lets callers map token edits back onto the raw string.
    """
    spans: list[tuple[int, int]] = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        spans.extend(_split_chunk(text, i, j))
        i = j
    return spans


def _split_chunk(text: str, start: int, end: int) -> list[tuple[int, int]]:
    leading: list[tuple[int, int]] = []
    trailing: list[tuple[int, int]] = []
    lo, hi = start, end
    while lo < hi and text[lo] in _PUNCT:
        leading.append((lo, lo + 1))
        lo += 1
    while hi > lo and text[hi - 1] in _PUNCT:
        trailing.append((hi - 1, hi))
        hi -= 1
    trailing.reverse()
    core: list[tuple[int, int]] = []
    if lo < hi:
        word = text[lo:hi].lower()
        for suffix in _CONTRACTIONS:
            if word.endswith(suffix) and len(word) > len(suffix):
                core = [(lo, hi - len(suffix)), (hi - len(suffix), hi)]
                break
        else:
            core = [(lo, hi)]
    return leading + core + trailing


def tokenize(text: str) -> list[str]:
    """Whitespace split plus edge-punctuation and clitic splitting."""
    return [text[s:e] for s, e in token_spans(text)]


def _step_cost(a: str, b: str) -> float:
    if a == b:
        return 0.0
    if a.lower() == b.lower():
        return 0.5  # case-only change stays a single substitution
    return 1.0


def align(src: Sequence[str], trg: Sequence[str]) -> list[AlignOp]:
    """Minimal-cost edit script between two token sequences.

    Ties are broken deterministically: scanning left to right, substitution
    (or match) is preferred over deletion, deletion over insertion.
    """
    m, n = len(src), len(trg)
    # suffix[i][j] = minimal cost of aligning src[i:] with trg[j:]
    suffix = [[0.0] * (n + 1) for _ in range(m + 1)]
    for i in range(m - 1, -1, -1):
        suffix[i][n] = float(m - i)
    for j in range(n - 1, -1, -1):
        suffix[m][j] = float(n - j)
    for i in range(m - 1, -1, -1):
        for j in range(n - 1, -1, -1):
            suffix[i][j] = min(
                _step_cost(src[i], trg[j]) + suffix[i + 1][j + 1],
                1.0 + suffix[i + 1][j],
                1.0 + suffix[i][j + 1],
            )
    script: list[AlignOp] = []
    i = j = 0
    while i < m or j < n:
        best = suffix[i][j]
        if i < m and j < n and _step_cost(src[i], trg[j]) + suffix[i + 1][j + 1] == best:
            kind = "match" if src[i] == trg[j] else "sub"
            script.append(AlignOp(kind, i, j))
            i += 1
            j += 1
        elif i < m and 1.0 + suffix[i + 1][j] == best:
            script.append(AlignOp("del", i, j))
            i += 1
        else:
            script.append(AlignOp("ins", i, j))
            j += 1
    return script


def script_cost(script: Iterable[AlignOp], src: Sequence[str], trg: Sequence[str]) -> float:
    total = 0.0
    for op in script:
        if op.kind == "match":
            continue
        if op.kind == "sub":
            total += _step_cost(src[op.src_pos], trg[op.trg_pos])
        else:
            total += 1.0
    return total


def classify(start: int, end: int, replacement: Sequence[str]) -> OpKind:
    if start == end:
        if not replacement:
            raise ValueError("empty-to-empty edit")
        return OpKind.MISSING
    return OpKind.REPLACEMENT if replacement else OpKind.UNNECESSARY


def merge_edits(script: Sequence[AlignOp], trg: Sequence[str]) -> list[Edit]:
    """Collapse maximal runs of adjacent non-match operations into span edits."""
    edits: list[Edit] = []
    run: list[AlignOp] = []

    def flush() -> None:
        if not run:
            return
        start = run[0].src_pos
        end = start + sum(1 for op in run if op.kind in ("sub", "del"))
        replacement = tuple(trg[op.trg_pos] for op in run if op.kind in ("sub", "ins"))
        edits.append(Edit(start, end, replacement, classify(start, end, replacement)))
        run.clear()

    for op in script:
        if op.kind == "match":
            flush()
        else:
            run.append(op)
    flush()
    return edits


def align_edits(src: Sequence[str], trg: Sequence[str]) -> list[Edit]:
    """Extract merged span edits between two pre-tokenized sequences."""
    return merge_edits(align(src, trg), trg)


def extract_edits(source_text: str, target_text: str) -> list[Edit]:
    """Tokenize, align, and merge; applying the result to the source tokens
    reproduces the target tokens."""
    return align_edits(tokenize(source_text), tokenize(target_text))


def apply_token_edits(tokens: Sequence[str], edits: Sequence[Edit]) -> list[str]:
    """Apply span edits (sorted by start, non-overlapping) to a token list."""
    out: list[str] = []
    pos = 0
    for edit in sorted(edits, key=lambda e: (e.start, e.end)):
        if edit.start < pos:
            raise ValueError(f"overlapping edit at span ({edit.start}, {edit.end})")
        if edit.end > len(tokens):
            raise ValueError(f"edit span ({edit.start}, {edit.end}) out of range")
        out.extend(tokens[pos:edit.start])
        out.extend(edit.replacement)
        pos = edit.end
    out.extend(tokens[pos:])
    return out


def operation_stats(pairs: Iterable[tuple[str, str]]) -> OpStats:
    """Fractions of Missing / Replacement / Unnecessary over all extracted edits."""
    counts = {OpKind.MISSING: 0, OpKind.REPLACEMENT: 0, OpKind.UNNECESSARY: 0}
    for source, target in pairs:
        for edit in extract_edits(source, target):
            counts[edit.op] += 1
    total = sum(counts.values())
    if total == 0:
        raise ValueError("no edits extracted; operation fractions are undefined")
    return OpStats(
        m=counts[OpKind.MISSING] / total,
        r=counts[OpKind.REPLACEMENT] / total,
        u=counts[OpKind.UNNECESSARY] / total,
    )
