"""Training-data preparation: corpus setups, pair-splitting augmentation, the
staged fine-tuning schedule, and SFT file emission.

Augmentation gives every erroneous pair an identity twin (target, target) so
the model sees each correction alongside proof that the corrected form needs
no further edits. The three-stage schedule then separates exposure: first a
full corpus, then only erroneous pairs, then only correct ones at a reduced
learning rate.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping

from .corpus import Corpus, SentencePair, is_erroneous

# Substituted with the raw source text; the completion is the target text.
TRAIN_PROMPT = (
    "Correct the following text, making only minimal changes where necessary.\n"
    "\n"
    "### Text to correct:\n"
    "{source}\n"
    "\n"
    "### Corrected text:\n"
)

SFT_DEFAULTS = {
    "batch_size": 4,
    "grad_accum": 4,
    "scheduler": "linear",
    "optimizer": "AdamW8bit",
    "weight_decay": 0.01,
}


class PipelineError(ValueError):
    pass


class SetupMode(str, Enum):
    ONLY_ERRONEOUS = "only-erroneous"
    UNCHANGED = "unchanged"
    AUGMENTED = "augmented"


def _twin(pair: SentencePair) -> SentencePair:
    return SentencePair(
        id=pair.id + ":aug",
        source=pair.target,
        target=pair.target,
        tokenized=pair.tokenized,
        modified_by_detok=pair.modified_by_detok,
        origin=pair.origin,
        extra=dict(pair.extra),
    )


def augment(corpus: Corpus) -> Corpus:
    """Insert a (target, target) twin directly after every erroneous pair."""
    pairs: list[SentencePair] = []
    for pair in corpus.pairs:
        pairs.append(pair)
        if is_erroneous(pair):
            pairs.append(_twin(pair))
    return Corpus(name=corpus.name, pairs=pairs)


def build_setup(corpus: Corpus, mode: SetupMode) -> Corpus:
    if mode is SetupMode.ONLY_ERRONEOUS:
        return Corpus(name=corpus.name, pairs=[p for p in corpus.pairs if is_erroneous(p)])
    if mode is SetupMode.UNCHANGED:
        return Corpus(name=corpus.name, pairs=list(corpus.pairs))
    if mode is SetupMode.AUGMENTED:
        return augment(corpus)
    raise PipelineError(f"unknown setup mode: {mode!r}")


def split_groups(corpus: Corpus) -> tuple[Corpus, Corpus]:
    """Partition into (erroneous, correct) sub-corpora, order preserved."""
    erroneous = [p for p in corpus.pairs if is_erroneous(p)]
    correct = [p for p in corpus.pairs if not is_erroneous(p)]
    return (
        Corpus(name=f"{corpus.name}-erroneous", pairs=erroneous),
        Corpus(name=f"{corpus.name}-correct", pairs=correct),
    )


_FILTERS = ("all", "erroneous_only", "correct_only")


@dataclass
class ScheduleStage:
    id: int
    corpus: str
    filter: str
    learning_rate: float
    epochs: int = 1
    warmup_steps: int = 100

    def __post_init__(self):
        if self.filter not in _FILTERS:
            raise PipelineError(f"stage {self.id}: unknown filter {self.filter!r}")
        if self.learning_rate <= 0:
            raise PipelineError(f"stage {self.id}: learning rate must be positive")
        if self.epochs < 1:
            raise PipelineError(f"stage {self.id}: epochs must be at least 1")
        if self.warmup_steps < 0:
            raise PipelineError(f"stage {self.id}: warmup steps must be non-negative")

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "corpus": self.corpus,
            "filter": self.filter,
            "learning_rate": self.learning_rate,
            "epochs": self.epochs,
            "warmup_steps": self.warmup_steps,
        }

    @classmethod
    def from_record(cls, rec: dict) -> "ScheduleStage":
        return cls(
            id=rec["id"],
            corpus=rec["corpus"],
            filter=rec["filter"],
            learning_rate=rec["learning_rate"],
            epochs=rec.get("epochs", 1),
            warmup_steps=rec.get("warmup_steps", 100),
        )


@dataclass
class Schedule:
    stages: list[ScheduleStage]

    def to_record(self) -> dict:
        return {"stages": [s.to_record() for s in self.stages]}

    @classmethod
    def from_record(cls, rec: dict) -> "Schedule":
        return cls(stages=[ScheduleStage.from_record(s) for s in rec["stages"]])


@dataclass
class ScheduleConfig:
    first_corpus: str = "fce-train"
    second_corpus: str = "bea-train"
    augment_first: bool = True
    base_lr: float = 5e-6
    final_lr: float | None = None  # defaults to base_lr; must not exceed it
    epochs: int = 1
    warmup_steps: int = 100


def build_schedule(config: ScheduleConfig) -> Schedule:
    """Three stages: full first corpus, erroneous-only second corpus at the
    same rate, then correct-only second corpus at ``final_lr``."""
    final_lr = config.final_lr if config.final_lr is not None else config.base_lr
    if config.base_lr <= 0:
        raise PipelineError("base learning rate must be positive")
    if final_lr <= 0:
        raise PipelineError("final learning rate must be positive")
    if final_lr > config.base_lr:
        raise PipelineError(
            f"final learning rate {final_lr} exceeds base rate {config.base_lr}"
        )
    common = {"epochs": config.epochs, "warmup_steps": config.warmup_steps}
    return Schedule(stages=[
        ScheduleStage(1, config.first_corpus, "all", config.base_lr, **common),
        ScheduleStage(2, config.second_corpus, "erroneous_only", config.base_lr, **common),
        ScheduleStage(3, config.second_corpus, "correct_only", final_lr, **common),
    ])


def build_schedule_grid(config: ScheduleConfig, final_lrs: Iterable[float]) -> list[Schedule]:
    schedules = []
    for lr in final_lrs:
        cfg = ScheduleConfig(
            first_corpus=config.first_corpus,
            second_corpus=config.second_corpus,
            augment_first=config.augment_first,
            base_lr=config.base_lr,
            final_lr=lr,
            epochs=config.epochs,
            warmup_steps=config.warmup_steps,
        )
        schedules.append(build_schedule(cfg))
    return schedules


def _stage_pairs(stage: ScheduleStage, corpus: Corpus) -> list[SentencePair]:
    if stage.filter == "all":
        return list(corpus.pairs)
    erroneous, correct = split_groups(corpus)
    return list(erroneous.pairs if stage.filter == "erroneous_only" else correct.pairs)


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]+", "-", name)


def emit_sft(
    schedule: Schedule,
    corpora: Corpus | Mapping[str, Corpus],
    out_dir: str | Path,
) -> Path:
    """Write one prompt/completion JSONL per stage plus a manifest.

    Output is byte-stable for identical inputs: fixed key order, no
    timestamps, newline-terminated files.
    """
    if isinstance(corpora, Corpus):
        corpora = {corpora.name: corpora}
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_stages = []
    for stage in schedule.stages:
        if stage.corpus not in corpora:
            raise PipelineError(f"stage {stage.id}: no corpus named {stage.corpus!r}")
        pairs = _stage_pairs(stage, corpora[stage.corpus])
        filename = f"stage{stage.id}_{_safe_name(stage.corpus)}_{stage.filter}.jsonl"
        with open(out_dir / filename, "w", encoding="utf-8") as fh:
            for pair in pairs:
                record = {
                    "prompt": TRAIN_PROMPT.format(source=pair.source),
                    "completion": pair.target,
                }
                fh.write(json.dumps(record, ensure_ascii=False))
                fh.write("\n")
        entry = stage.to_record()
        entry["file"] = filename
        entry["n_examples"] = len(pairs)
        manifest_stages.append(entry)
    manifest = {"stages": manifest_stages, "defaults": dict(SFT_DEFAULTS)}
    manifest_path = out_dir / "manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, ensure_ascii=False, indent=2)
        fh.write("\n")
    return manifest_path
