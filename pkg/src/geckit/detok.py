"""Detokenize tokenized corpora by rules, optionally refine through an LLM,
and verify that refinements changed nothing beyond spacing.

The rule detokenizer only moves whitespace. The LLM pass is instructed to do
the same, but can disobey; every output is therefore diffed against the
original tokenized target, and anything beyond a spacing change is flagged
``modified`` and routed to human annotation rather than silently accepted.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

import requests

from . import align
from .corpus import Corpus, SentencePair

# Sent to the detokenizing model with both texts substituted verbatim.
DETOK_PROMPT = (
    "You will receive two texts: source text and corrected text. "
    "Corrected text may not have proper spaces. "
    "Your task is to remove/add proper spaces to the corrected text. "
    "Do not write any comments, just write corrected text with proper spaces.\n"
    "\n"
    "Source text: {source}\n"
    "\n"
    "Corrected text: {target}\n"
    "\n"
    "Only change spaces, you must not change punctuation."
)

_ATTACH_LEFT = set(".,!?;:%)]}")
_ATTACH_RIGHT = set("([{")
_CURRENCY = set("$€£¥")
_CONTRACTIONS = {"n't", "'re", "'ve", "'ll", "'s", "'d", "'m"}


class DetokError(RuntimeError):
    pass


class LlmTransportError(DetokError):
    """The endpoint stayed unreachable or kept failing after all retries."""


class CompletionClient(Protocol):
    def complete(self, prompt: str) -> str: ...


@dataclass
class LlmConfig:
    endpoint: str
    model: str
    token: str | None = None
    temperature: float = 0.0  # fixed; detokenization must be reproducible
    retries: int = 3
    backoff: float = 0.5
    timeout: float = 60.0
    concurrency: int = 4


class HttpChatClient:
    """Chat-completion JSON-over-HTTP client with retry/backoff."""

    def __init__(self, config: LlmConfig, session: requests.Session | None = None):
        self.config = config
        self.session = session or requests.Session()

    def complete(self, prompt: str) -> str:
        payload = {
            "model": self.config.model,
            "messages": [{"role": "user", "content": prompt}],
            "temperature": self.config.temperature,
        }
        headers = {"Content-Type": "application/json"}
        if self.config.token:
            headers["Authorization"] = f"Bearer {self.config.token}"
        last_error: Exception | None = None
        for attempt in range(self.config.retries + 1):
            if attempt:
                time.sleep(self.config.backoff * (2 ** (attempt - 1)))
            try:
                response = self.session.post(
                    self.config.endpoint, json=payload, headers=headers,
                    timeout=self.config.timeout,
                )
                if response.status_code >= 500:
                    last_error = DetokError(f"server error {response.status_code}")
                    continue
                response.raise_for_status()
                return _extract_completion(response.json())
            except requests.RequestException as exc:
                last_error = exc
        raise LlmTransportError(
            f"LLM endpoint failed after {self.config.retries + 1} attempts: {last_error}"
        )


def _extract_completion(body: dict) -> str:
    try:
        return body["choices"][0]["message"]["content"]
    except (KeyError, IndexError, TypeError) as exc:
        raise DetokError(f"malformed completion response: {body!r}") from exc


@dataclass
class DetokOutcome:
    pair_id: str
    rule_text: str
    llm_text: str | None
    modified: bool

    @property
    def final_text(self) -> str:
        return self.llm_text if self.llm_text is not None else self.rule_text

    def to_record(self) -> dict:
        return {
            "pair_id": self.pair_id,
            "rule_text": self.rule_text,
            "llm_text": self.llm_text,
            "modified": self.modified,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "DetokOutcome":
        return cls(rec["pair_id"], rec["rule_text"], rec.get("llm_text"), rec["modified"])


@dataclass
class DetokReport:
    n_total: int
    n_modified: int
    modified_ratio: float
    op_stats: align.OpStats | None

    def to_record(self) -> dict:
        return {
            "n_total": self.n_total,
            "n_modified": self.n_modified,
            "modified_ratio": self.modified_ratio,
            "op_stats": self.op_stats.to_record() if self.op_stats else None,
        }


def rule_detokenize(tokens: Sequence[str]) -> str:
    """Join tokens, re-attaching punctuation. Never edits non-space content.

    Closing punctuation and clitics attach left, opening brackets and currency
    attach right, straight double quotes attach by parity (odd = opening).
    """
    pieces: list[str] = []
    glue_right = True  # suppress the space before the very first token
    quote_count = 0
    for token in tokens:
        attach_left = False
        attach_right = False
        if token == '"':
            quote_count += 1
            if quote_count % 2 == 1:
                attach_right = True
            else:
                attach_left = True
        elif token and all(c in _ATTACH_LEFT for c in token):
            attach_left = True
        elif token and all(c in _ATTACH_RIGHT for c in token):
            attach_right = True
        elif token.lower() in _CONTRACTIONS:
            attach_left = True
        elif token and all(c in _CURRENCY for c in token):
            attach_right = True
        if pieces and not attach_left and not glue_right:
            pieces.append(" ")
        pieces.append(token)
        glue_right = attach_right
    return "".join(pieces)


def spaces_only_diff(a: str, b: str) -> bool:
    """True iff the texts are equal once every whitespace character is removed."""
    return "".join(a.split()) == "".join(b.split())


def llm_detokenize(client: CompletionClient, source_detok: str, target_tokenized: str) -> str:
    prompt = DETOK_PROMPT.format(source=source_detok, target=target_tokenized)
    completion = client.complete(prompt)
    if completion is None or not completion.strip():
        raise DetokError("LLM returned an empty completion")
    return completion.strip()


def detokenize_corpus(
    corpus: Corpus,
    client: CompletionClient | None = None,
    jobs: int = 1,
) -> tuple[Corpus, list[DetokOutcome]]:
    """Detokenize every pair; the result corpus has ``tokenized=False`` and
    ``modified_by_detok`` set wherever the LLM changed more than spacing."""
    if not all(p.tokenized for p in corpus.pairs):
        raise DetokError(f"corpus {corpus.name!r} is not tokenized")

    def process(pair: SentencePair) -> tuple[SentencePair, DetokOutcome]:
        source_detok = rule_detokenize(pair.source.split())
        rule_text = rule_detokenize(pair.target.split())
        llm_text: str | None = None
        if client is not None:
            try:
                llm_text = llm_detokenize(client, source_detok, pair.target)
            except DetokError as exc:
                raise DetokError(f"pair {pair.id}: {exc}") from exc
        final = llm_text if llm_text is not None else rule_text
        modified = not spaces_only_diff(pair.target, final)
        outcome = DetokOutcome(pair.id, rule_text, llm_text, modified)
        new_pair = SentencePair(
            id=pair.id,
            source=source_detok,
            target=final,
            tokenized=False,
            modified_by_detok=modified,
            origin=pair.origin,
            extra=dict(pair.extra),
        )
        return new_pair, outcome

    if client is not None and jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(process, corpus.pairs))
    else:
        results = [process(p) for p in corpus.pairs]
    out_corpus = Corpus(name=corpus.name, pairs=[p for p, _ in results])
    return out_corpus, [o for _, o in results]


def build_report(outcomes: Sequence[DetokOutcome], pairs: Sequence[SentencePair]) -> DetokReport:
    """Tally modifications and classify what the LLM changed on modified pairs."""
    by_id = {p.id: p for p in pairs}
    modified = [o for o in outcomes if o.modified]
    op_stats = None
    if modified:
        op_stats = align.operation_stats(
            (by_id[o.pair_id].target, o.llm_text or o.rule_text) for o in modified
        )
    n_total = len(outcomes)
    return DetokReport(
        n_total=n_total,
        n_modified=len(modified),
        modified_ratio=len(modified) / n_total if n_total else 0.0,
        op_stats=op_stats,
    )


def save_outcomes(outcomes: Sequence[DetokOutcome], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for outcome in outcomes:
            fh.write(json.dumps(outcome.to_record(), ensure_ascii=False))
            fh.write("\n")


def load_outcomes(path: str | Path) -> list[DetokOutcome]:
    outcomes = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                outcomes.append(DetokOutcome.from_record(json.loads(line)))
    return outcomes
