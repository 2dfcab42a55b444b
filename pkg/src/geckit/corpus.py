"""Parallel GEC corpora: the sentence-pair record every other module consumes."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator


class CorpusError(ValueError):
    """Raised when a corpus file cannot be loaded or validated."""


@dataclass
class SentencePair:
    """One (source, target) example with provenance and modification flags.

    ``tokenized`` marks texts in space-separated token form; erroneousness is
    then judged on token sequences instead of raw strings.
    """

    id: str
    source: str
    target: str
    tokenized: bool = False
    modified_by_detok: bool = False
    origin: str = ""
    extra: dict[str, Any] = field(default_factory=dict)

    def to_record(self) -> dict[str, Any]:
        rec: dict[str, Any] = {
            "id": self.id,
            "source": self.source,
            "target": self.target,
            "tokenized": self.tokenized,
            "modified_by_detok": self.modified_by_detok,
            "origin": self.origin,
        }
        # unknown keys ride along so round-trips never lose information
        rec.update(self.extra)
        return rec

    @classmethod
    def from_record(cls, rec: dict[str, Any]) -> "SentencePair":
        known = {"id", "source", "target", "tokenized", "modified_by_detok", "origin"}
        return cls(
            id=str(rec["id"]),
            source=rec["source"],
            target=rec["target"],
            tokenized=bool(rec.get("tokenized", False)),
            modified_by_detok=bool(rec.get("modified_by_detok", False)),
            origin=str(rec.get("origin", "")),
            extra={k: v for k, v in rec.items() if k not in known},
        )


@dataclass
class Corpus:
    """Named, ordered collection of sentence pairs. Immutable by convention."""

    name: str
    pairs: list[SentencePair] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self) -> Iterator[SentencePair]:
        return iter(self.pairs)

    def validate(self) -> None:
        seen: set[str] = set()
        for pair in self.pairs:
            if pair.id in seen:
                raise CorpusError(f"duplicate pair id {pair.id!r} in corpus {self.name!r}")
            seen.add(pair.id)


@dataclass
class CorpusStats:
    n_examples: int
    n_erroneous: int
    erroneous_ratio: float

    def to_record(self) -> dict[str, Any]:
        return {
            "n_examples": self.n_examples,
            "n_erroneous": self.n_erroneous,
            "erroneous_ratio": self.erroneous_ratio,
        }


def is_erroneous(pair: SentencePair) -> bool:
    """True iff source and target differ.

    Raw texts compare exactly (whitespace counts); tokenized texts compare as
    token sequences so incidental spacing between tokens is ignored.
    """
    if pair.tokenized:
        return pair.source.split() != pair.target.split()
    return pair.source != pair.target


def load_parallel(src_path: str | Path, trg_path: str | Path, name: str, *,
                  tokenized: bool = False) -> Corpus:
    """Build a corpus from line-aligned source/target files.

    Pair ``i`` comes from line ``i`` of each file and gets id ``"name:i"``.
    Raises :class:`CorpusError` on unequal line counts or blank lines.
    """
    src_lines = _read_lines(src_path)
    trg_lines = _read_lines(trg_path)
    if len(src_lines) != len(trg_lines):
        raise CorpusError(
            f"line count mismatch: {src_path} has {len(src_lines)} lines, "
            f"{trg_path} has {len(trg_lines)} lines"
        )
    pairs = []
    for i, (src, trg) in enumerate(zip(src_lines, trg_lines)):
        if not src.strip():
            raise CorpusError(f"{src_path}: empty source line at line {i + 1}")
        if not trg.strip():
            raise CorpusError(f"{trg_path}: empty target line at line {i + 1}")
        pairs.append(SentencePair(
            id=f"{name}:{i}",
            source=src,
            target=trg,
            tokenized=tokenized,
            origin=name,
        ))
    return Corpus(name=name, pairs=pairs)


def _read_lines(path: str | Path) -> list[str]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()  # trailing newline, not an empty record
    return lines


def save_jsonl(corpus: Corpus, path: str | Path) -> None:
    """Write one JSON object per pair; key order is fixed so re-saves are byte-stable."""
    with open(path, "w", encoding="utf-8") as fh:
        for pair in corpus.pairs:
            fh.write(json.dumps(pair.to_record(), ensure_ascii=False))
            fh.write("\n")


def load_jsonl(path: str | Path, name: str | None = None) -> Corpus:
    """Read a JSONL corpus; malformed lines report their line number and field."""
    pairs = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}: invalid JSON at line {lineno}: {exc}") from exc
            for key in ("id", "source", "target"):
                if key not in rec:
                    raise CorpusError(f"{path}: line {lineno} missing field {key!r}")
            if not str(rec["source"]).strip() or not str(rec["target"]).strip():
                raise CorpusError(f"{path}: line {lineno} has an empty source or target")
            pairs.append(SentencePair.from_record(rec))
    corpus = Corpus(name=name if name is not None else Path(path).stem, pairs=pairs)
    corpus.validate()
    return corpus


def compute_stats(corpus: Corpus | Iterable[SentencePair]) -> CorpusStats:
    """Count erroneous pairs and their ratio. Raises on an empty corpus."""
    pairs = list(corpus.pairs if isinstance(corpus, Corpus) else corpus)
    if not pairs:
        raise CorpusError("cannot compute stats of an empty corpus")
    n_err = sum(1 for p in pairs if is_erroneous(p))
    return CorpusStats(
        n_examples=len(pairs),
        n_erroneous=n_err,
        erroneous_ratio=n_err / len(pairs),
    )
