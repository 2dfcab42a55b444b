"""Annotation workflow service for LLM-modified detokenization outputs.

Pairs whose target was changed beyond spacing become review tasks. Annotators
pull tasks over HTTP, see an aligned diff of the original versus modified
target, and assign one of four labels. Labels land in an append-only JSONL
log (last write per task wins), so a restart replays to identical state.
The store also exports corpora under the three downstream policies.
"""

from __future__ import annotations

import json
import random
import threading
import time
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Sequence

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response

from . import align
from .corpus import Corpus, SentencePair
from .detok import DetokOutcome


class AnnoError(ValueError):
    pass


class Label(str, Enum):
    ESSENTIAL = "essential"
    OPTIONAL = "optional"
    ERRONEOUS = "erroneous"
    NOT_ASSESSABLE = "not_assessable"


EXPORT_POLICIES = ("filtered", "full", "curated")


@dataclass
class DiffSegment:
    """One aligned slice of the original/modified pair.

    ``op`` is "equal" or an edit kind ("M", "R", "U"). Concatenating the
    ``original`` fields of all segments reproduces the original text exactly,
    and likewise ``modified``; inter-token spacing rides with the segment
    that follows it."""
    op: str
    original: str
    modified: str

    def to_record(self) -> dict:
        return {"op": self.op, "original": self.original, "modified": self.modified}

    @classmethod
    def from_record(cls, rec: dict) -> "DiffSegment":
        return cls(rec["op"], rec["original"], rec["modified"])


def diff_segments(original: str, modified: str) -> list[DiffSegment]:
    o_spans = align.token_spans(original)
    m_spans = align.token_spans(modified)
    o_tokens = [original[s:e] for s, e in o_spans]
    m_tokens = [modified[s:e] for s, e in m_spans]
    edits = align.align_edits(o_tokens, m_tokens)

    segments: list[DiffSegment] = []
    oi = mi = 0  # token cursors
    o_cur = m_cur = 0  # character cursors

    def emit(op: str, o_count: int, m_count: int) -> None:
        nonlocal oi, mi, o_cur, m_cur
        o_end = o_spans[oi + o_count - 1][1] if o_count else o_cur
        m_end = m_spans[mi + m_count - 1][1] if m_count else m_cur
        segments.append(DiffSegment(op, original[o_cur:o_end], modified[m_cur:m_end]))
        oi += o_count
        mi += m_count
        o_cur, m_cur = o_end, m_end

    for edit in edits:
        if edit.start > oi:
            emit("equal", edit.start - oi, edit.start - oi)
        emit(edit.op.value, edit.end - edit.start, len(edit.replacement))
    if oi < len(o_tokens):
        emit("equal", len(o_tokens) - oi, len(m_tokens) - mi)

    # Trailing whitespace after the last token still has to land somewhere.
    if o_cur < len(original) or m_cur < len(modified):
        o_tail, m_tail = original[o_cur:], modified[m_cur:]
        if segments and segments[-1].op == "equal":
            last = segments[-1]
            segments[-1] = DiffSegment("equal", last.original + o_tail, last.modified + m_tail)
        else:
            segments.append(DiffSegment("equal", o_tail, m_tail))
    return segments


@dataclass
class AnnotationTask:
    task_id: int
    pair_id: str
    source: str
    original_target: str
    modified_target: str
    diff_spans: list[DiffSegment]

    def to_record(self) -> dict:
        return {
            "task_id": self.task_id,
            "pair_id": self.pair_id,
            "source": self.source,
            "original_target": self.original_target,
            "modified_target": self.modified_target,
            "diff_spans": [s.to_record() for s in self.diff_spans],
        }

    @classmethod
    def from_record(cls, rec: dict) -> "AnnotationTask":
        return cls(
            task_id=rec["task_id"],
            pair_id=rec["pair_id"],
            source=rec["source"],
            original_target=rec["original_target"],
            modified_target=rec["modified_target"],
            diff_spans=[DiffSegment.from_record(s) for s in rec["diff_spans"]],
        )


@dataclass
class AnnotationStats:
    corpus_size: int
    n_modified: int
    modified_ratio: float
    n_tasks: int
    n_labeled: int
    n_pending: int
    fractions: dict[str, float]
    wrong_annotations_lower_bound: float

    def to_record(self) -> dict:
        return {
            "corpus_size": self.corpus_size,
            "n_modified": self.n_modified,
            "modified_ratio": self.modified_ratio,
            "n_tasks": self.n_tasks,
            "n_labeled": self.n_labeled,
            "n_pending": self.n_pending,
            "fractions": dict(self.fractions),
            "wrong_annotations_lower_bound": self.wrong_annotations_lower_bound,
        }


class AnnotationStore:
    """Directory-backed store: meta.json, pairs.jsonl, tasks.jsonl and the
    append-only labels.jsonl. Leases are memory-only by design; they protect
    concurrent annotators, not crashed ones, and expire on restart."""

    def __init__(self, root: str | Path, lease_timeout: float = 300.0):
        self.root = Path(root)
        self.lease_timeout = lease_timeout
        self._lock = threading.Lock()
        self._leases: dict[int, tuple[str, float]] = {}
        self._load()

    # -- construction ------------------------------------------------------

    @classmethod
    def create(
        cls,
        root: str | Path,
        corpus: Corpus,
        outcomes: Sequence[DetokOutcome],
        k: int | None = None,
        seed: int = 0,
        lease_timeout: float = 300.0,
    ) -> "AnnotationStore":
        root = Path(root)
        root.mkdir(parents=True, exist_ok=True)
        by_id = {p.id: p for p in corpus.pairs}
        modified = [o for o in outcomes if o.modified]
        for outcome in modified:
            if outcome.pair_id not in by_id:
                raise AnnoError(f"outcome {outcome.pair_id!r} has no pair in the corpus")
        if k is not None and k < 0:
            raise AnnoError("sample size k must be non-negative")
        if k is not None and k < len(modified):
            chosen = random.Random(seed).sample(range(len(modified)), k)
            modified = [modified[i] for i in sorted(chosen)]

        tasks = []
        for task_id, outcome in enumerate(modified, start=1):
            pair = by_id[outcome.pair_id]
            final = outcome.llm_text if outcome.llm_text is not None else outcome.rule_text
            tasks.append(AnnotationTask(
                task_id=task_id,
                pair_id=outcome.pair_id,
                source=pair.source,
                original_target=outcome.rule_text,
                modified_target=final,
                diff_spans=diff_segments(outcome.rule_text, final),
            ))

        meta = {
            "corpus_name": corpus.name,
            "corpus_size": len(corpus.pairs),
            "n_modified": sum(1 for o in outcomes if o.modified),
        }
        with open(root / "meta.json", "w", encoding="utf-8") as fh:
            json.dump(meta, fh, ensure_ascii=False, indent=2)
            fh.write("\n")
        with open(root / "pairs.jsonl", "w", encoding="utf-8") as fh:
            for pair in corpus.pairs:
                fh.write(json.dumps(pair.to_record(), ensure_ascii=False))
                fh.write("\n")
        with open(root / "tasks.jsonl", "w", encoding="utf-8") as fh:
            for task in tasks:
                fh.write(json.dumps(task.to_record(), ensure_ascii=False))
                fh.write("\n")
        (root / "labels.jsonl").touch()
        return cls(root, lease_timeout=lease_timeout)

    def _load(self) -> None:
        try:
            with open(self.root / "meta.json", "r", encoding="utf-8") as fh:
                self.meta = json.load(fh)
        except FileNotFoundError:
            raise AnnoError(f"no annotation store at {self.root}")
        self.pairs: list[SentencePair] = []
        with open(self.root / "pairs.jsonl", "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    self.pairs.append(SentencePair.from_record(json.loads(line)))
        self.tasks: dict[int, AnnotationTask] = {}
        with open(self.root / "tasks.jsonl", "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    task = AnnotationTask.from_record(json.loads(line))
                    self.tasks[task.task_id] = task
        self._labels: dict[int, dict] = {}
        labels_path = self.root / "labels.jsonl"
        if labels_path.exists():
            with open(labels_path, "r", encoding="utf-8") as fh:
                for line in fh:
                    if line.strip():
                        rec = json.loads(line)
                        self._labels[rec["task_id"]] = rec

    # -- annotation flow ---------------------------------------------------

    def get_task(self, task_id: int) -> AnnotationTask:
        if task_id not in self.tasks:
            raise AnnoError(f"unknown task id {task_id}")
        return self.tasks[task_id]

    def next_task(self, annotator: str) -> AnnotationTask | None:
        with self._lock:
            now = time.monotonic()
            self._leases = {
                tid: (who, t) for tid, (who, t) in self._leases.items() if t > now
            }
            for tid, (who, _) in self._leases.items():
                if who == annotator and tid not in self._labels:
                    return self.tasks[tid]
            for tid in sorted(self.tasks):
                if tid in self._labels or tid in self._leases:
                    continue
                self._leases[tid] = (annotator, now + self.lease_timeout)
                return self.tasks[tid]
            return None

    def submit_label(self, task_id: int, label: str, annotator: str) -> None:
        try:
            label = Label(label).value
        except ValueError:
            valid = ", ".join(item.value for item in Label)
            raise AnnoError(f"unknown label {label!r}; expected one of: {valid}")
        with self._lock:
            if task_id not in self.tasks:
                raise AnnoError(f"unknown task id {task_id}")
            rec = {
                "task_id": task_id,
                "pair_id": self.tasks[task_id].pair_id,
                "label": label,
                "annotator": annotator,
                "ts": time.time(),
            }
            with open(self.root / "labels.jsonl", "a", encoding="utf-8") as fh:
                fh.write(json.dumps(rec, ensure_ascii=False))
                fh.write("\n")
            self._labels[task_id] = rec
            self._leases.pop(task_id, None)

    def label_of(self, task_id: int) -> str | None:
        rec = self._labels.get(task_id)
        return rec["label"] if rec else None

    # -- reporting and export ----------------------------------------------

    def stats(self) -> AnnotationStats:
        corpus_size = self.meta["corpus_size"]
        n_modified = self.meta["n_modified"]
        labeled = list(self._labels.values())
        counts = {label.value: 0 for label in Label}
        for rec in labeled:
            counts[rec["label"]] += 1
        n_labeled = len(labeled)
        fractions = {
            key: (count / n_labeled if n_labeled else 0.0)
            for key, count in counts.items()
        }
        modified_ratio = n_modified / corpus_size if corpus_size else 0.0
        return AnnotationStats(
            corpus_size=corpus_size,
            n_modified=n_modified,
            modified_ratio=modified_ratio,
            n_tasks=len(self.tasks),
            n_labeled=n_labeled,
            n_pending=len(self.tasks) - n_labeled,
            fractions=fractions,
            wrong_annotations_lower_bound=modified_ratio * fractions[Label.ESSENTIAL.value],
        )

    def export(self, policy: str) -> Corpus:
        if policy not in EXPORT_POLICIES:
            raise AnnoError(
                f"unknown policy {policy!r}; expected one of: {', '.join(EXPORT_POLICIES)}"
            )
        name = f"{self.meta['corpus_name']}-{policy}"
        if policy == "full":
            return Corpus(name=name, pairs=list(self.pairs))
        if policy == "filtered":
            return Corpus(name=name, pairs=[p for p in self.pairs if not p.modified_by_detok])
        task_by_pair = {t.pair_id: t for t in self.tasks.values()}
        kept_labels = (Label.ESSENTIAL.value, Label.OPTIONAL.value)
        pairs = []
        for pair in self.pairs:
            if not pair.modified_by_detok:
                pairs.append(pair)
                continue
            task = task_by_pair.get(pair.id)
            label = self.label_of(task.task_id) if task else None
            if label in kept_labels:
                pairs.append(pair)
                continue
            # Vetoed or never reviewed: fall back to the rule-detokenized
            # target, which by construction differs only in spacing.
            original = task.original_target if task else pair.target
            pairs.append(SentencePair(
                id=pair.id,
                source=pair.source,
                target=original,
                tokenized=pair.tokenized,
                modified_by_detok=False,
                origin=pair.origin,
                extra=dict(pair.extra),
            ))
        return Corpus(name=name, pairs=pairs)


def create_tasks(
    root: str | Path,
    corpus: Corpus,
    outcomes: Sequence[DetokOutcome],
    k: int | None = None,
    seed: int = 0,
) -> int:
    """Initialize a store on disk; returns the number of tasks created."""
    store = AnnotationStore.create(root, corpus, outcomes, k=k, seed=seed)
    return len(store.tasks)


# -- HTTP layer --------------------------------------------------------------


def _error(status: int, code: str, detail: str) -> JSONResponse:
    return JSONResponse({"error": code, "detail": detail}, status_code=status)


def create_app(store: AnnotationStore, token: str | None = None) -> FastAPI:
    app = FastAPI(title="annotation service")

    if token is not None:
        @app.middleware("http")
        async def check_token(request: Request, call_next):
            if request.url.path != "/health" and request.headers.get("x-anno-token") != token:
                return _error(401, "unauthorized", "missing or wrong x-anno-token header")
            return await call_next(request)

    @app.get("/health")
    def health():
        return {"status": "ok", "n_tasks": len(store.tasks)}

    @app.get("/tasks/next")
    def tasks_next(annotator: str = ""):
        if not annotator:
            return _error(400, "bad_request", "query parameter 'annotator' is required")
        task = store.next_task(annotator)
        if task is None:
            return Response(status_code=204)
        return task.to_record()

    @app.get("/tasks/{task_id}")
    def get_task(task_id: int):
        try:
            return store.get_task(task_id).to_record()
        except AnnoError as exc:
            return _error(404, "not_found", str(exc))

    @app.post("/tasks/{task_id}/label")
    async def submit_label(task_id: int, request: Request):
        try:
            payload = await request.json()
        except Exception:
            return _error(400, "bad_request", "body must be JSON")
        if not isinstance(payload, dict) or "label" not in payload or "annotator" not in payload:
            return _error(400, "bad_request", "body must contain 'label' and 'annotator'")
        try:
            store.submit_label(task_id, payload["label"], payload["annotator"])
        except AnnoError as exc:
            status = 404 if "unknown task" in str(exc) else 400
            return _error(status, "not_found" if status == 404 else "bad_request", str(exc))
        return {"ok": True, "task_id": task_id, "label": payload["label"]}

    @app.get("/stats")
    def stats():
        return store.stats().to_record()

    @app.post("/export")
    async def export(request: Request):
        try:
            payload = await request.json()
        except Exception:
            return _error(400, "bad_request", "body must be JSON")
        policy = payload.get("policy") if isinstance(payload, dict) else None
        if not policy:
            return _error(400, "bad_request", "body must contain 'policy'")
        try:
            corpus = store.export(policy)
        except AnnoError as exc:
            return _error(400, "bad_request", str(exc))
        return {
            "policy": policy,
            "name": corpus.name,
            "n_pairs": len(corpus.pairs),
            "pairs": [p.to_record() for p in corpus.pairs],
        }

    return app
