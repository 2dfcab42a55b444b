"""M2 gold-edit interchange format: parse, serialize, apply.

Format, bit-exact: an ``S`` line of space-separated tokens followed by zero or
more ``A`` lines ``start end|||type|||correction|||REQUIRED|||-NONE-|||annotator``,
records separated by one blank line. A ``noop`` edit with span (-1, -1) marks
an annotator who proposed no changes.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class M2Error(ValueError):
    """Parse or application failure; carries the offending line number when known."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


@dataclass(frozen=True)
class M2Edit:
    start: int
    end: int
    etype: str
    correction: str  # empty string encodes deletion ("-NONE-" is normalized away)
    annotator: int
    required: str = "REQUIRED"
    comment: str = "-NONE-"

    @property
    def replacement(self) -> tuple[str, ...]:
        return tuple(self.correction.split())

    def to_record(self) -> dict:
        return {
            "start": self.start,
            "end": self.end,
            "etype": self.etype,
            "correction": self.correction,
            "annotator": self.annotator,
        }


@dataclass
class M2Record:
    tokens: list[str]
    # annotator id -> edits sorted by span; an empty list is an explicit noop
    edits: dict[int, list[M2Edit]] = field(default_factory=dict)

    def annotators(self) -> list[int]:
        return sorted(self.edits)

    def to_record(self) -> dict:
        return {
            "tokens": list(self.tokens),
            "edits": {
                str(a): [e.to_record() for e in self.edits[a]] for a in self.annotators()
            },
        }


def parse_m2(text: str) -> list[M2Record]:
    records: list[M2Record] = []
    current: M2Record | None = None
    noop_seen: set[int] = set()

    def close(record: M2Record | None) -> None:
        if record is None:
            return
        for annotator, edits in record.edits.items():
            edits.sort(key=lambda e: (e.start, e.end))
            if annotator in noop_seen and edits:
                raise M2Error(f"annotator {annotator} has both a noop and real edits")
            for prev, cur in zip(edits, edits[1:]):
                if prev.end > cur.start:
                    raise M2Error(
                        f"annotator {annotator} has overlapping edits "
                        f"({prev.start},{prev.end}) and ({cur.start},{cur.end})"
                    )
        records.append(record)

    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            close(current)
            current = None
            noop_seen = set()
            continue
        if line.startswith("S ") or line == "S":
            close(current)
            noop_seen = set()
            current = M2Record(tokens=line[2:].split())
            continue
        if line.startswith("A "):
            if current is None:
                raise M2Error("A line before any S line", lineno)
            _parse_a_line(line[2:], current, noop_seen, lineno)
            continue
        raise M2Error(f"unrecognized line {line!r}", lineno)
    close(current)
    return records


def _parse_a_line(body: str, record: M2Record, noop_seen: set[int], lineno: int) -> None:
    fields = body.split("|||")
    if len(fields) != 6:
        raise M2Error(f"expected 6 '|||'-separated fields, got {len(fields)}", lineno)
    span, etype, correction, required, comment, annotator_s = fields
    parts = span.split()
    if len(parts) != 2:
        raise M2Error(f"bad span {span!r}", lineno)
    try:
        start, end = int(parts[0]), int(parts[1])
        annotator = int(annotator_s)
    except ValueError as exc:
        raise M2Error(f"non-integer field: {exc}", lineno) from exc
    if annotator < 0:
        raise M2Error(f"negative annotator id {annotator}", lineno)
    if correction == "-NONE-":
        correction = ""
    is_noop_span = start == -1 and end == -1
    if etype == "noop" or is_noop_span:
        if not (etype == "noop" and is_noop_span):
            raise M2Error("noop requires etype 'noop' and span -1 -1", lineno)
        noop_seen.add(annotator)
        record.edits.setdefault(annotator, [])
        return
    if not (0 <= start <= end <= len(record.tokens)):
        raise M2Error(
            f"span ({start},{end}) out of bounds for {len(record.tokens)} tokens", lineno
        )
    record.edits.setdefault(annotator, []).append(
        M2Edit(start, end, etype, correction, annotator, required, comment)
    )


def serialize_m2(records: list[M2Record]) -> str:
    """Render records; ``parse_m2(serialize_m2(r))`` is structurally ``r``."""
    blocks: list[str] = []
    for record in records:
        lines = ["S " + " ".join(record.tokens)]
        for annotator in record.annotators():
            edits = record.edits[annotator]
            if not edits:
                lines.append(f"A -1 -1|||noop|||-NONE-|||REQUIRED|||-NONE-|||{annotator}")
                continue
            for e in edits:
                correction = e.correction if e.correction else "-NONE-"
                lines.append(
                    f"A {e.start} {e.end}|||{e.etype}|||{correction}"
                    f"|||{e.required}|||{e.comment}|||{annotator}"
                )
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def apply_edits(record: M2Record, annotator: int) -> list[str]:
    """Corrected token sequence for one annotator's edit set."""
    if annotator not in record.edits:
        raise M2Error(f"annotator {annotator} not present in record")
    tokens = list(record.tokens)
    # right-to-left so earlier spans keep their offsets
    for e in reversed(sorted(record.edits[annotator], key=lambda e: (e.start, e.end))):
        tokens[e.start:e.end] = e.replacement
    return tokens
