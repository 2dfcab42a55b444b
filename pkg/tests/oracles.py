"""Independent reference implementations the tests check the library against.

These are deliberately written a different way than the library code (plain
cost DP without path recovery, forward splicing instead of reversed in-place
application) so a shared bug cannot hide.
"""

from __future__ import annotations

from typing import Sequence


def dp_min_cost_x2(src: Sequence[str], trg: Sequence[str]) -> int:
    """Minimum alignment cost in half-points: match 0, case-only change 1,
    substitution 2, insertion/deletion 2."""
    m = len(trg)
    prev = list(range(0, 2 * m + 1, 2))
    for i in range(1, len(src) + 1):
        cur = [2 * i] + [0] * m
        for j in range(1, m + 1):
            if src[i - 1] == trg[j - 1]:
                sub = 0
            elif src[i - 1].lower() == trg[j - 1].lower():
                sub = 1
            else:
                sub = 2
            cur[j] = min(prev[j - 1] + sub, prev[j] + 2, cur[j - 1] + 2)
        prev = cur
    return prev[m]


def splice(tokens: Sequence[str], edits) -> list[str]:
    """Apply (start, end, replacement) edits front to back by rebuilding."""
    out: list[str] = []
    cursor = 0
    for start, end, replacement in sorted(edits, key=lambda e: (e[0], e[1])):
        out.extend(tokens[cursor:start])
        out.extend(replacement)
        cursor = end
    out.extend(tokens[cursor:])
    return out
