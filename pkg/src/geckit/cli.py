"""Command-line front end: one subcommand per pipeline step.

Output is machine-readable JSON (or TSV for tables) on stdout; ``--pretty``
switches the read-heavy commands to small human tables. Exit codes: 0 on
success, 1 on operational errors (reported as JSON on stderr), 2 on usage
errors (argparse). Config precedence: flags beat GECKIT_LLM_* environment
variables, which beat the config file's [llm] section.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from pathlib import Path

from . import align, annosvc, detok, m2, pipeline, scoring, surrogate
from . import corpus as corpus_lib

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_USAGE = 2


class CliError(ValueError):
    pass


_ENV_LLM = {
    "endpoint": "GECKIT_LLM_ENDPOINT",
    "model": "GECKIT_LLM_MODEL",
    "token": "GECKIT_LLM_TOKEN",
    "retries": "GECKIT_LLM_RETRIES",
    "concurrency": "GECKIT_LLM_CONCURRENCY",
}


def read_config(path: str | None) -> configparser.ConfigParser:
    parser = configparser.ConfigParser()
    if path:
        if not parser.read(path):
            raise CliError(f"cannot read config file {path!r}")
    return parser


def resolve_llm(args: argparse.Namespace, config: configparser.ConfigParser) -> detok.LlmConfig:
    def pick(field: str, flag_value):
        if flag_value is not None:
            return flag_value
        env_value = os.environ.get(_ENV_LLM[field])
        if env_value is not None:
            return env_value
        return config.get("llm", field, fallback=None)

    endpoint = pick("endpoint", args.llm_endpoint)
    model = pick("model", args.llm_model)
    if not endpoint or not model:
        raise CliError(
            "LLM endpoint and model are required; set --llm-endpoint/--llm-model, "
            "GECKIT_LLM_ENDPOINT/GECKIT_LLM_MODEL, or the [llm] config section"
        )
    retries = pick("retries", args.retries)
    return detok.LlmConfig(
        endpoint=endpoint,
        model=model,
        token=pick("token", args.llm_token),
        retries=int(retries) if retries is not None else 3,
        concurrency=args.jobs,
    )


def emit(record, pretty_lines: list[str] | None = None, pretty: bool = False) -> None:
    if pretty and pretty_lines is not None:
        print("\n".join(pretty_lines))
    else:
        print(json.dumps(record, ensure_ascii=False, indent=2))


def _load_corpus_arg(value: str) -> tuple[str, corpus_lib.Corpus]:
    """Parse NAME=PATH (or bare PATH, named by its stem) into a corpus."""
    if "=" in value:
        name, path = value.split("=", 1)
        return name, corpus_lib.load_jsonl(path, name=name)
    corpus = corpus_lib.load_jsonl(value)
    return corpus.name, corpus


def _read_lines(path: str) -> list[str]:
    with open(path, "r", encoding="utf-8") as fh:
        return [line.rstrip("\n") for line in fh]


# -- corpus commands ----------------------------------------------------------


def cmd_convert(args) -> int:
    to_jsonl = args.src and args.trg and args.out
    from_jsonl = args.jsonl and args.src_out and args.trg_out
    if bool(to_jsonl) == bool(from_jsonl):
        raise CliError(
            "convert needs either --src/--trg/--out (parallel to jsonl) "
            "or --jsonl/--src-out/--trg-out (jsonl to parallel)"
        )
    if to_jsonl:
        name = args.name or Path(args.out).stem
        corpus = corpus_lib.load_parallel(args.src, args.trg, name, tokenized=args.tokenized)
        corpus_lib.save_jsonl(corpus, args.out)
        emit({"out": args.out, "name": name, "n_pairs": len(corpus.pairs)})
    else:
        corpus = corpus_lib.load_jsonl(args.jsonl)
        with open(args.src_out, "w", encoding="utf-8") as src_fh, \
                open(args.trg_out, "w", encoding="utf-8") as trg_fh:
            for pair in corpus.pairs:
                src_fh.write(pair.source + "\n")
                trg_fh.write(pair.target + "\n")
        emit({"src_out": args.src_out, "trg_out": args.trg_out, "n_pairs": len(corpus.pairs)})
    return EXIT_OK


def cmd_stats(args) -> int:
    stats = corpus_lib.compute_stats(corpus_lib.load_jsonl(args.corpus))
    emit(
        stats.to_record(),
        pretty_lines=[
            f"examples   {stats.n_examples}",
            f"erroneous  {stats.n_erroneous} ({stats.erroneous_ratio:.2%})",
        ],
        pretty=args.pretty,
    )
    return EXIT_OK


# -- detokenization -----------------------------------------------------------


def cmd_detok(args) -> int:
    config = read_config(args.config)
    corpus = corpus_lib.load_jsonl(args.corpus)
    client = detok.HttpChatClient(resolve_llm(args, config)) if args.llm else None
    out_corpus, outcomes = detok.detokenize_corpus(corpus, client, jobs=args.jobs)
    corpus_lib.save_jsonl(out_corpus, args.out)
    outcomes_path = args.outcomes or str(Path(args.out).with_suffix("")) + ".outcomes.jsonl"
    detok.save_outcomes(outcomes, outcomes_path)
    report = detok.build_report(outcomes, corpus.pairs)
    emit({"out": args.out, "outcomes": outcomes_path, **report.to_record()})
    return EXIT_OK


def cmd_detok_report(args) -> int:
    outcomes = detok.load_outcomes(args.outcomes)
    pairs = corpus_lib.load_jsonl(args.corpus).pairs
    report = detok.build_report(outcomes, pairs)
    lines = [
        f"pairs     {report.n_total}",
        f"modified  {report.n_modified} ({report.modified_ratio:.2%})",
    ]
    if report.op_stats:
        ops = report.op_stats.to_record()
        lines += [f"{kind:<12}{value:.2%}" for kind, value in ops.items()]
    emit(report.to_record(), pretty_lines=lines, pretty=args.pretty)
    return EXIT_OK


# -- edits and scoring --------------------------------------------------------


def cmd_m2_parse(args) -> int:
    records = m2.parse_m2(Path(args.m2).read_text(encoding="utf-8"))
    emit([r.to_record() for r in records])
    return EXIT_OK


def cmd_m2_apply(args) -> int:
    records = m2.parse_m2(Path(args.m2).read_text(encoding="utf-8"))
    lines = [" ".join(m2.apply_edits(r, args.annotator)) for r in records]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_extract_edits(args) -> int:
    corpus = corpus_lib.load_jsonl(args.corpus)
    per_pair = [
        {
            "id": pair.id,
            "edits": [e.to_record() for e in align.extract_edits(pair.source, pair.target)],
        }
        for pair in corpus.pairs
    ]
    if args.op_stats:
        stats = align.operation_stats((p.source, p.target) for p in corpus.pairs)
        record = stats.to_record()
        emit(
            {"op_stats": record, "pairs": per_pair},
            pretty_lines=[f"{kind:<12}{value:.2%}" for kind, value in record.items()],
            pretty=args.pretty,
        )
    else:
        emit(per_pair)
    return EXIT_OK


def cmd_score(args) -> int:
    hyp = corpus_lib.load_jsonl(args.hyp)
    gold = m2.parse_m2(Path(args.gold).read_text(encoding="utf-8"))
    report = scoring.score_corpus(hyp, gold)
    emit(
        report.to_record(),
        pretty_lines=[
            f"precision  {report.precision:.2%}",
            f"recall     {report.recall:.2%}",
            f"F0.5       {report.f_half:.2%}",
            f"tp/fp/fn   {report.tp}/{report.fp}/{report.fn}",
        ],
        pretty=args.pretty,
    )
    return EXIT_OK


def cmd_gleu(args) -> int:
    hyps = _read_lines(args.hyp)
    srcs = _read_lines(args.src)
    ref_files = [_read_lines(path) for path in args.refs]
    for path, lines in zip([args.hyp] + list(args.refs), [hyps] + ref_files):
        if len(lines) != len(srcs):
            raise CliError(
                f"{path} has {len(lines)} lines but {args.src} has {len(srcs)}"
            )
    refs_per_sentence = [list(group) for group in zip(*ref_files)]
    report = scoring.gleu_corpus(hyps, srcs, refs_per_sentence, n_max=args.n)
    emit({"gleu": report.gleu, "n_max": report.n_max, "n_sentences": len(srcs)})
    return EXIT_OK


# -- training-data preparation ------------------------------------------------


def _emit_corpus_result(out_path: str, corpus: corpus_lib.Corpus) -> None:
    stats = corpus_lib.compute_stats(corpus) if corpus.pairs else None
    record = {"out": out_path, "name": corpus.name, "n_pairs": len(corpus.pairs)}
    if stats:
        record["erroneous_ratio"] = stats.erroneous_ratio
    emit(record)


def cmd_setup(args) -> int:
    corpus = corpus_lib.load_jsonl(args.corpus)
    result = pipeline.build_setup(corpus, pipeline.SetupMode(args.mode))
    corpus_lib.save_jsonl(result, args.out)
    _emit_corpus_result(args.out, result)
    return EXIT_OK


def cmd_augment(args) -> int:
    corpus = corpus_lib.load_jsonl(args.corpus)
    result = pipeline.augment(corpus)
    corpus_lib.save_jsonl(result, args.out)
    _emit_corpus_result(args.out, result)
    return EXIT_OK


def cmd_split_groups(args) -> int:
    corpus = corpus_lib.load_jsonl(args.corpus)
    erroneous, correct = pipeline.split_groups(corpus)
    corpus_lib.save_jsonl(erroneous, args.erroneous_out)
    corpus_lib.save_jsonl(correct, args.correct_out)
    emit({
        "erroneous_out": args.erroneous_out,
        "n_erroneous": len(erroneous.pairs),
        "correct_out": args.correct_out,
        "n_correct": len(correct.pairs),
    })
    return EXIT_OK


def _schedule_config(args, config: configparser.ConfigParser) -> pipeline.ScheduleConfig:
    def pick(flag_value, option: str, cast, default):
        if flag_value is not None:
            return flag_value
        if config.has_option("schedule", option):
            return cast("schedule", option)
        return default

    return pipeline.ScheduleConfig(
        first_corpus=pick(args.first_corpus, "first_corpus", config.get, "fce-train"),
        second_corpus=pick(args.second_corpus, "second_corpus", config.get, "bea-train"),
        augment_first=pick(args.augment_first, "augment_first", config.getboolean, True),
        base_lr=pick(args.base_lr, "base_lr", config.getfloat, 5e-6),
        final_lr=pick(args.final_lr, "final_lr", config.getfloat, None),
        epochs=pick(args.epochs, "epochs", config.getint, 1),
        warmup_steps=pick(args.warmup, "warmup_steps", config.getint, 100),
    )


def cmd_schedule_build(args) -> int:
    config = read_config(args.config)
    schedule_config = _schedule_config(args, config)
    if args.grid:
        grid = [float(x) for x in args.grid.split(",")]
        schedules = pipeline.build_schedule_grid(schedule_config, grid)
        record = {"schedules": [s.to_record() for s in schedules]}
    else:
        record = pipeline.build_schedule(schedule_config).to_record()
    text = json.dumps(record, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        emit({"out": args.out})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _load_schedule(path: str) -> pipeline.Schedule:
    with open(path, "r", encoding="utf-8") as fh:
        return pipeline.Schedule.from_record(json.load(fh))


def _corpora_map(values: list[str]) -> dict[str, corpus_lib.Corpus]:
    corpora: dict[str, corpus_lib.Corpus] = {}
    for value in values:
        name, corpus = _load_corpus_arg(value)
        if name in corpora:
            raise CliError(f"corpus name {name!r} given twice")
        corpora[name] = corpus
    return corpora


def cmd_sft_emit(args) -> int:
    schedule = _load_schedule(args.schedule)
    corpora = _corpora_map(args.corpus)
    if args.augment_first:
        first = schedule.stages[0].corpus
        if first not in corpora:
            raise CliError(f"stage 1 corpus {first!r} was not provided")
        corpora[first] = pipeline.augment(corpora[first])
    manifest = pipeline.emit_sft(schedule, corpora, args.out_dir)
    emit({"manifest": str(manifest), "stages": len(schedule.stages)})
    return EXIT_OK


# -- surrogate corrector ------------------------------------------------------


def cmd_surrogate_train(args) -> int:
    schedule = _load_schedule(args.schedule)
    corpora = _corpora_map(args.corpus)
    model = surrogate.train_schedule(schedule, corpora)
    surrogate.save_model(model, args.model_out)
    emit({"model": args.model_out, "n_rules": len(model)})
    return EXIT_OK


def cmd_surrogate_eval(args) -> int:
    model = surrogate.load_model(args.model)
    eval_corpus = corpus_lib.load_jsonl(args.eval)
    report, applied = surrogate.evaluate(model, eval_corpus, theta=args.theta)
    record = {**report.to_record(), "n_applied": applied}
    emit(
        record,
        pretty_lines=[
            f"precision  {report.precision:.2%}",
            f"recall     {report.recall:.2%}",
            f"F0.5       {report.f_half:.2%}",
            f"applied    {applied}",
        ],
        pretty=args.pretty,
    )
    return EXIT_OK


def cmd_sweep(args) -> int:
    first = corpus_lib.load_jsonl(args.first)
    second = corpus_lib.load_jsonl(args.second)
    if first.name == second.name:
        raise CliError("the two training corpora must have distinct names")
    eval_corpus = corpus_lib.load_jsonl(args.eval)
    grid = [float(x) for x in args.grid.split(",")]
    schedule_config = pipeline.ScheduleConfig(
        first_corpus=first.name, second_corpus=second.name, base_lr=args.base_lr
    )
    schedules = pipeline.build_schedule_grid(schedule_config, grid)
    rows = surrogate.run_sweep(
        schedules, {first.name: first, second.name: second}, eval_corpus
    )
    text = surrogate.sweep_to_json(rows) if args.format == "json" else surrogate.sweep_to_tsv(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        emit({"out": args.out, "rows": len(rows)})
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- annotation service -------------------------------------------------------


def _store_path(args, config: configparser.ConfigParser) -> str:
    if args.store:
        return args.store
    path = config.get("paths", "anno_store", fallback=None)
    if not path:
        raise CliError("no store path; pass --store or set [paths] anno_store")
    return path


def cmd_anno_serve(args) -> int:
    config = read_config(args.config)
    store_path = _store_path(args, config)
    if args.create:
        if not (args.corpus and args.outcomes):
            raise CliError("--create requires --corpus and --outcomes")
        corpus = corpus_lib.load_jsonl(args.corpus)
        outcomes = detok.load_outcomes(args.outcomes)
        store = annosvc.AnnotationStore.create(
            store_path, corpus, outcomes,
            k=args.k, seed=args.seed, lease_timeout=args.lease_timeout,
        )
    else:
        store = annosvc.AnnotationStore(store_path, lease_timeout=args.lease_timeout)
    token = args.token or os.environ.get("GECKIT_ANNO_TOKEN")
    app = annosvc.create_app(store, token=token)
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


def cmd_anno_export(args) -> int:
    config = read_config(args.config)
    store = annosvc.AnnotationStore(_store_path(args, config))
    corpus = store.export(args.policy)
    corpus_lib.save_jsonl(corpus, args.out)
    emit({
        "policy": args.policy,
        "name": corpus.name,
        "n_pairs": len(corpus.pairs),
        "out": args.out,
    })
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def _add_llm_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--llm-endpoint", help="chat-completion endpoint URL")
    parser.add_argument("--llm-model", help="model name sent in requests")
    parser.add_argument("--llm-token", help="bearer token, if the endpoint needs one")
    parser.add_argument("--retries", type=int, help="transport retries per request")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="geckit",
        description="Data toolkit for minimal-edit grammatical error correction.",
    )
    parser.add_argument("--config", help="INI config file (sections: llm, paths, schedule)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("convert", help="convert between parallel text files and jsonl")
    p.add_argument("--src", help="source side of a parallel corpus")
    p.add_argument("--trg", help="target side of a parallel corpus")
    p.add_argument("--out", help="jsonl output path")
    p.add_argument("--name", help="corpus name (default: output file stem)")
    p.add_argument("--tokenized", action="store_true", help="mark texts as tokenized")
    p.add_argument("--jsonl", help="jsonl corpus to convert back to parallel files")
    p.add_argument("--src-out", help="source-side output path")
    p.add_argument("--trg-out", help="target-side output path")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("stats", help="corpus size and erroneous ratio")
    p.add_argument("corpus", help="jsonl corpus")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("detok", help="detokenize a corpus, optionally via an LLM")
    p.add_argument("corpus", help="tokenized jsonl corpus")
    p.add_argument("out", help="detokenized jsonl output")
    p.add_argument("--llm", action=argparse.BooleanOptionalAction, default=False,
                   help="refine spacing through the configured LLM")
    p.add_argument("--outcomes",
                   help="outcome log path (default: out with its suffix replaced by .outcomes.jsonl)")
    p.add_argument("--jobs", type=int, default=4, help="parallel LLM requests")
    _add_llm_flags(p)
    p.set_defaults(func=cmd_detok)

    p = sub.add_parser("detok-report", help="modification rate and edit-kind breakdown")
    p.add_argument("--outcomes", required=True, help="outcome log from detok")
    p.add_argument("--corpus", required=True, help="the original tokenized corpus")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_detok_report)

    p = sub.add_parser("m2-parse", help="parse an M2 file to JSON records")
    p.add_argument("m2", help="M2 file")
    p.set_defaults(func=cmd_m2_parse)

    p = sub.add_parser("m2-apply", help="apply one annotator's edits to every sentence")
    p.add_argument("m2", help="M2 file")
    p.add_argument("--annotator", type=int, default=0)
    p.add_argument("--out", help="write corrected sentences here instead of stdout")
    p.set_defaults(func=cmd_m2_apply)

    p = sub.add_parser("extract-edits", help="token-level edits for every pair")
    p.add_argument("corpus", help="jsonl corpus")
    p.add_argument("--op-stats", action="store_true",
                   help="include missing/replacement/unnecessary fractions")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_extract_edits)

    p = sub.add_parser("score", help="edit-matched F0.5 against M2 gold")
    p.add_argument("--hyp", required=True, help="hypothesis jsonl corpus")
    p.add_argument("--gold", required=True, help="gold M2 file")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("gleu", help="n-gram fluency score against references")
    p.add_argument("--hyp", required=True, help="hypothesis text, one sentence per line")
    p.add_argument("--src", required=True, help="source text, one sentence per line")
    p.add_argument("--refs", required=True, nargs="+", help="reference text file(s)")
    p.add_argument("--n", type=int, default=4, help="maximum n-gram order")
    p.set_defaults(func=cmd_gleu)

    p = sub.add_parser("setup", help="materialize a training setup")
    p.add_argument("corpus", help="jsonl corpus")
    p.add_argument("out", help="jsonl output")
    p.add_argument("--mode", required=True,
                   choices=[m.value for m in pipeline.SetupMode])
    p.set_defaults(func=cmd_setup)

    p = sub.add_parser("augment", help="add identity twins for erroneous pairs")
    p.add_argument("corpus", help="jsonl corpus")
    p.add_argument("out", help="jsonl output")
    p.set_defaults(func=cmd_augment)

    p = sub.add_parser("split-groups", help="split into erroneous and correct pairs")
    p.add_argument("corpus", help="jsonl corpus")
    p.add_argument("--erroneous-out", required=True)
    p.add_argument("--correct-out", required=True)
    p.set_defaults(func=cmd_split_groups)

    p = sub.add_parser("schedule-build", help="build the three-stage training schedule")
    p.add_argument("--first-corpus", help="corpus name for stage 1")
    p.add_argument("--second-corpus", help="corpus name for stages 2 and 3")
    p.add_argument("--base-lr", type=float, help="stage 1/2 learning rate")
    p.add_argument("--final-lr", type=float, help="stage 3 learning rate (<= base)")
    p.add_argument("--epochs", type=int)
    p.add_argument("--warmup", type=int, dest="warmup")
    p.add_argument("--augment-first", action=argparse.BooleanOptionalAction, default=None,
                   help="record whether stage 1 data should be augmented")
    p.add_argument("--grid", help="comma-separated final learning rates; builds one schedule each")
    p.add_argument("--out", help="write schedule JSON here instead of stdout")
    p.set_defaults(func=cmd_schedule_build)

    p = sub.add_parser("sft-emit", help="emit prompt/completion files plus a manifest")
    p.add_argument("--schedule", required=True, help="schedule JSON from schedule-build")
    p.add_argument("--corpus", required=True, action="append",
                   help="NAME=PATH jsonl corpus; repeat per corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--augment-first", action="store_true",
                   help="augment the stage 1 corpus before emitting")
    p.set_defaults(func=cmd_sft_emit)

    p = sub.add_parser("surrogate-train", help="train the rule surrogate on a schedule")
    p.add_argument("--schedule", required=True, help="schedule JSON")
    p.add_argument("--corpus", required=True, action="append", help="NAME=PATH; repeat")
    p.add_argument("--model-out", required=True, help="rule model JSONL output")
    p.set_defaults(func=cmd_surrogate_train)

    p = sub.add_parser("surrogate-eval", help="score the surrogate on a corpus")
    p.add_argument("--model", required=True, help="rule model JSONL")
    p.add_argument("--eval", required=True, help="jsonl corpus")
    p.add_argument("--theta", type=float, default=0.0, help="rule activation threshold")
    p.add_argument("--pretty", action="store_true")
    p.set_defaults(func=cmd_surrogate_eval)

    p = sub.add_parser("sweep", help="final-stage learning-rate sweep table")
    p.add_argument("--grid", required=True, help="comma-separated final learning rates")
    p.add_argument("--first", required=True, help="stage 1 jsonl corpus")
    p.add_argument("--second", required=True, help="stage 2/3 jsonl corpus")
    p.add_argument("--eval", required=True, help="evaluation jsonl corpus")
    p.add_argument("--base-lr", type=float, default=5e-6)
    p.add_argument("--format", choices=["tsv", "json"], default="tsv")
    p.add_argument("--out", help="write the table here instead of stdout")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("anno-serve", help="run the annotation HTTP service")
    p.add_argument("--store", help="store directory (or [paths] anno_store)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--token", help="require this x-anno-token header (or GECKIT_ANNO_TOKEN)")
    p.add_argument("--lease-timeout", type=float, default=300.0)
    p.add_argument("--create", action="store_true", help="initialize the store first")
    p.add_argument("--corpus", help="detokenized jsonl corpus (with --create)")
    p.add_argument("--outcomes", help="outcome log from detok (with --create)")
    p.add_argument("--k", type=int, help="sample this many tasks (with --create)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (with --create)")
    p.set_defaults(func=cmd_anno_serve)

    p = sub.add_parser("anno-export", help="export a corpus under a labeling policy")
    p.add_argument("--store", help="store directory (or [paths] anno_store)")
    p.add_argument("--policy", required=True, choices=list(annosvc.EXPORT_POLICIES))
    p.add_argument("--out", required=True, help="jsonl output")
    p.set_defaults(func=cmd_anno_export)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or EXIT_OK
    except (ValueError, OSError, RuntimeError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "detail": str(exc)}),
            file=sys.stderr,
        )
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
