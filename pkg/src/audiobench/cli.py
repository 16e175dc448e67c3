"""Command-line pipeline: ingest, convert, grade, build, evaluate, fuse.

Every subcommand writes a ``run_config.json`` snapshot next to its outputs;
``rerun`` replays a snapshot, and with warm caches the replay is
byte-identical. Exit codes: 0 ok, 2 usage, 3 data error, 4 transport error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .builder import (
    McqBenchmark,
    RetrievalBenchmark,
    attach_llm_texts,
    build_inter_mcq,
    build_intra_mcq,
    build_retrieval_benchmark,
    load_benchmark,
    save_benchmark,
    save_drop_log,
)
from .corpus import (
    DEFAULT_SILENCE_THRESHOLD,
    ManifestFormat,
    TextKind,
    corpus_stats,
    load_manifest,
    save_corpus,
)
from .embeddings import cosine_similarity, fuse, load_embeddings
from .errors import DataError, TransportError
from .llm import (
    ConversionStatus,
    GradeStatus,
    HttpTransport,
    LlmConfig,
    ReplayTransport,
    convert_batch,
    grade_batch,
)
from .metrics import (
    evaluate_mcq,
    evaluate_retrieval,
    random_mcq_baseline,
    random_retrieval_baseline,
    render_table,
)
from .relevance import Grade, MatrixKind, RelevancyGrade, load_grades, save_grades

_SNAPSHOT_EXCLUDE = {"func", "config"}


def _write_snapshot(out_dir: Path, subcommand: str, args: argparse.Namespace) -> None:
    options = {
        k: (str(v) if isinstance(v, Path) else v)
        for k, v in vars(args).items()
        if k not in _SNAPSHOT_EXCLUDE
    }
    snapshot = {"subcommand": subcommand, "options": options}
    (out_dir / "run_config.json").write_text(
        json.dumps(snapshot, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_corpus(path, threshold=DEFAULT_SILENCE_THRESHOLD):
    return load_manifest(path, ManifestFormat.JSONL, silence_threshold=threshold)


def _make_transport(args, parser):
    if args.transport == "replay":
        if not args.replay_file:
            parser.error("--transport replay requires --replay-file")
        return ReplayTransport.from_file(args.replay_file)
    if not args.endpoint:
        parser.error("--transport http requires --endpoint")
    return HttpTransport()


def _llm_config(args, out_dir: Path) -> LlmConfig:
    cache_dir = args.cache_dir or str(out_dir / "llm_cache")
    return LlmConfig(
        endpoint=args.endpoint or "",
        model=args.model,
        temperature=args.temperature,
        max_batch=args.max_batch,
        retry_limit=args.retry_limit,
        cache_dir=cache_dir,
        timeout_s=args.timeout_s,
    )


def cmd_ingest(args, parser) -> int:
    out = _out_dir(args)
    corpus = load_manifest(
        args.manifest,
        ManifestFormat(args.format),
        silence_threshold=args.silence_threshold,
    )
    save_corpus(corpus, out / "corpus.jsonl")
    stats = {}
    for kind in TextKind:
        if corpus.texts_of_kind(kind):
            s = corpus_stats(corpus, kind)
            stats[kind.value] = {
                "n_clips": s.n_clips,
                "n_texts": s.n_texts,
                "n_silent": s.n_silent,
                "mean_words": s.mean_words,
                "std_words": s.std_words,
            }
            print(
                f"{kind.value}: {s.n_texts} texts, {s.n_clips} clips "
                f"({s.n_silent} silent), words/text {s.mean_words:.2f} "
                f"+- {s.std_words:.2f}"
            )
    (out / "corpus_stats.json").write_text(
        json.dumps(stats, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    _write_snapshot(out, "ingest", args)
    return 0


def cmd_convert(args, parser) -> int:
    out = _out_dir(args)
    corpus = _load_corpus(args.corpus)
    texts = corpus.texts_of_kind(TextKind(args.text_kind))
    transport = _make_transport(args, parser)
    config = _llm_config(args, out)
    results = convert_batch([t.text for t in texts], config, transport)
    lines = []
    n_fallback = 0
    for text, result in zip(texts, results):
        if result.status == ConversionStatus.FALLBACK:
            n_fallback += 1
        lines.append(
            json.dumps(
                {
                    "text_id": text.text_id,
                    "source_text": result.source_text,
                    "audio_text": result.audio_text,
                    "status": result.status.value,
                },
                sort_keys=True,
            )
        )
    (out / "conversions.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    print(f"converted {len(results)} texts ({n_fallback} fallback)")
    _write_snapshot(out, "convert", args)
    return 0


def cmd_grade(args, parser) -> int:
    out = _out_dir(args)
    corpus = _load_corpus(args.corpus)
    texts = corpus.texts_of_kind(TextKind(args.text_kind))
    transport = _make_transport(args, parser)
    config = _llm_config(args, out)
    results = grade_batch([t.text for t in texts], config, transport)
    graded = [
        RelevancyGrade(text_id=text.text_id, grade=result.grade)
        for text, result in zip(texts, results)
        if result.status == GradeStatus.OK
    ]
    failed = [
        text.text_id
        for text, result in zip(texts, results)
        if result.status == GradeStatus.FAILED
    ]
    save_grades(graded, out / "grades.tsv")
    print(f"graded {len(graded)} of {len(results)} texts")
    _write_snapshot(out, "grade", args)
    if failed:
        print(f"failed to grade {len(failed)}: {failed[:5]}", file=sys.stderr)
        return 3
    return 0


def _apply_grade_filter(corpus, args, parser):
    if not args.grade_filter:
        return corpus
    if not args.grades:
        parser.error("--grade-filter requires --grades")
    from .relevance import split_by_grade

    grades = load_grades(args.grades)
    subsets = split_by_grade(corpus, grades)
    return subsets[Grade(args.grade_filter)]


def _load_conversion_map(path) -> dict[str, str]:
    mapping = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        record = json.loads(line)
        mapping[record["text_id"]] = record["audio_text"]
    return mapping


def cmd_build(args, parser) -> int:
    out = _out_dir(args)
    corpus = _load_corpus(args.corpus)
    corpus = _apply_grade_filter(corpus, args, parser)
    if args.task == "retrieval":
        benchmark = build_retrieval_benchmark(
            corpus,
            TextKind(args.text_kind),
            MatrixKind(args.relevance_kind),
            name=args.name,
            grade_filter=Grade(args.grade_filter) if args.grade_filter else None,
        )
    elif args.task == "mcq-intra":
        benchmark = build_intra_mcq(
            corpus, strict=args.mcq_mode == "strict", name=args.name or "mcq-intra"
        )
    else:
        benchmark = build_inter_mcq(corpus, seed=args.seed, name=args.name or "mcq-inter")
    if args.conversions:
        benchmark = attach_llm_texts(benchmark, _load_conversion_map(args.conversions))
    relevance_path = (
        out / "relevance.jsonl" if isinstance(benchmark, RetrievalBenchmark) else None
    )
    save_benchmark(benchmark, out / "benchmark.jsonl", relevance_path)
    save_drop_log(benchmark.dropped, out / "drops.jsonl")
    if isinstance(benchmark, RetrievalBenchmark):
        print(
            f"{benchmark.spec.name}: {len(benchmark.query_ids)} queries, "
            f"{len(benchmark.item_ids)} items, {len(benchmark.dropped)} drops"
        )
    else:
        print(
            f"{benchmark.spec.name}: {len(benchmark.items)} items emitted, "
            f"{len(benchmark.dropped)} dropped"
        )
    _write_snapshot(out, "build", args)
    return 0


def _mcq_axes(items):
    query_ids, item_ids, seen_q, seen_i = [], [], set(), set()
    for item in items:
        if item.query_text_id not in seen_q:
            seen_q.add(item.query_text_id)
            query_ids.append(item.query_text_id)
        for cand in item.candidates:
            if cand not in seen_i:
                seen_i.add(cand)
                item_ids.append(cand)
    return query_ids, item_ids


def _similarity_for(benchmark, text_emb_path, audio_emb_path):
    text_emb = load_embeddings(text_emb_path)
    audio_emb = load_embeddings(audio_emb_path)
    if isinstance(benchmark, RetrievalBenchmark):
        query_ids, item_ids = benchmark.query_ids, benchmark.item_ids
    else:
        query_ids, item_ids = _mcq_axes(benchmark.items)
    return cosine_similarity(text_emb.subset(query_ids), audio_emb.subset(item_ids))


def _report_retrieval(benchmark, sim, args, out: Path) -> None:
    report = evaluate_retrieval(sim, benchmark.relevance, tau=args.tau, k=args.k)
    table = render_table(report, name=benchmark.spec.name)
    print(table)
    (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    (out / "table.txt").write_text(table + "\n", encoding="utf-8")
    if args.random_seeds:
        baseline = random_retrieval_baseline(
            benchmark.relevance, args.random_seeds, seed=args.seed, tau=args.tau
        )
        payload = {
            "mean": baseline.mean.to_dict(),
            "stderr": baseline.stderr,
            "n_seeds": baseline.n_seeds,
        }
        (out / "random_baseline.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        print(
            f"random baseline ({baseline.n_seeds} seeds): "
            f"mAP {baseline.mean.map_avg:.2f} +- {baseline.stderr['map_avg']:.2f}, "
            f"nDCG {baseline.mean.ndcg_avg:.2f} +- {baseline.stderr['ndcg_avg']:.2f}"
        )


def _format_acc(value) -> str:
    return f"{value:.1f}" if value is not None else "n/a"


def _report_mcq(benchmark, sim, args, out: Path) -> None:
    report = evaluate_mcq(list(benchmark.items), sim)
    print(
        f"{benchmark.spec.name}: accuracy intra {_format_acc(report.accuracy_intra)} "
        f"({report.n_intra}), inter {_format_acc(report.accuracy_inter)} "
        f"({report.n_inter}), overall {report.accuracy_overall:.1f}"
    )
    (out / "report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    if args.random_seeds:
        baseline = random_mcq_baseline(
            list(benchmark.items), args.random_seeds, seed=args.seed
        )
        payload = {
            "mean": baseline.mean.to_dict(),
            "stderr": baseline.stderr,
            "n_seeds": baseline.n_seeds,
        }
        (out / "random_baseline.json").write_text(
            json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8"
        )
        print(
            f"random baseline ({baseline.n_seeds} seeds): accuracy "
            f"{baseline.mean.accuracy_overall:.2f} "
            f"+- {baseline.stderr['accuracy_overall']:.2f}"
        )


def _load_benchmark_arg(args, parser):
    benchmark_path = Path(args.benchmark)
    relevance = args.relevance
    if relevance is None:
        default = benchmark_path.with_name("relevance.jsonl")
        relevance = default if default.exists() else None
    return load_benchmark(benchmark_path, relevance)


def cmd_evaluate(args, parser) -> int:
    out = _out_dir(args)
    benchmark = _load_benchmark_arg(args, parser)
    sim = _similarity_for(benchmark, args.text_emb[0], args.audio_emb[0])
    if isinstance(benchmark, McqBenchmark):
        _report_mcq(benchmark, sim, args, out)
    else:
        _report_retrieval(benchmark, sim, args, out)
    _write_snapshot(out, "evaluate", args)
    return 0


def cmd_fuse_evaluate(args, parser) -> int:
    out = _out_dir(args)
    if len(args.text_emb) != len(args.audio_emb):
        parser.error("--text-emb and --audio-emb must be given the same number of times")
    benchmark = _load_benchmark_arg(args, parser)
    sims = [
        _similarity_for(benchmark, t, a) for t, a in zip(args.text_emb, args.audio_emb)
    ]
    weights = tuple(float(w) for w in args.weights.split(","))
    fused = fuse(sims, weights)
    if isinstance(benchmark, McqBenchmark):
        _report_mcq(benchmark, fused, args, out)
    else:
        _report_retrieval(benchmark, fused, args, out)
    _write_snapshot(out, "fuse-evaluate", args)
    return 0


def cmd_rerun(args, parser) -> int:
    snapshot = json.loads(Path(args.config).read_text(encoding="utf-8"))
    subcommand = snapshot["subcommand"]
    options = snapshot["options"]
    if args.out is not None:
        options["out"] = args.out
    replayed = argparse.Namespace(**options)
    handler = _HANDLERS.get(subcommand)
    if handler is None:
        parser.error(f"snapshot names unknown subcommand {subcommand!r}")
    return handler(replayed, parser)


def _add_llm_flags(sub):
    sub.add_argument("--transport", choices=("http", "replay"), default="http")
    sub.add_argument("--endpoint", default="")
    sub.add_argument("--model", default="gpt-3.5-turbo")
    sub.add_argument("--temperature", type=float, default=0.0)
    sub.add_argument("--max-batch", type=int, default=20)
    sub.add_argument("--retry-limit", type=int, default=2)
    sub.add_argument("--cache-dir", default="")
    sub.add_argument("--timeout-s", type=float, default=60.0)
    sub.add_argument("--replay-file", default="")


def _add_eval_flags(sub):
    sub.add_argument("--benchmark", required=True)
    sub.add_argument("--relevance", default=None)
    sub.add_argument("--text-emb", action="append", required=True)
    sub.add_argument("--audio-emb", action="append", required=True)
    sub.add_argument("--tau", type=float, default=None)
    sub.add_argument("--k", type=int, default=None)
    sub.add_argument("--random-seeds", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="audiobench",
        description="Text-audio retrieval benchmarks: build, convert, evaluate.",
    )
    subs = parser.add_subparsers(dest="subcommand", required=True)

    p = subs.add_parser("ingest", help="load a manifest, write normalized corpus + stats")
    p.add_argument("--manifest", required=True)
    p.add_argument("--format", choices=[f.value for f in ManifestFormat], default="jsonl")
    p.add_argument(
        "--silence-threshold", type=float, default=DEFAULT_SILENCE_THRESHOLD
    )
    p.set_defaults(func=cmd_ingest)

    p = subs.add_parser("convert", help="generate audio descriptions for query texts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--text-kind", choices=[k.value for k in TextKind], default="visual_caption")
    _add_llm_flags(p)
    p.set_defaults(func=cmd_convert)

    p = subs.add_parser("grade", help="grade audio relevancy of query texts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--text-kind", choices=[k.value for k in TextKind], default="visual_caption")
    _add_llm_flags(p)
    p.set_defaults(func=cmd_grade)

    p = subs.add_parser("build", help="assemble a retrieval or MCQ benchmark")
    p.add_argument("--corpus", required=True)
    p.add_argument("--task", choices=("retrieval", "mcq-intra", "mcq-inter"), required=True)
    p.add_argument("--text-kind", choices=[k.value for k in TextKind], default="visual_caption")
    p.add_argument(
        "--relevance-kind", choices=[k.value for k in MatrixKind], default="caption_overlap"
    )
    p.add_argument("--mcq-mode", choices=("strict", "lenient"), default="strict")
    p.add_argument("--name", default=None)
    p.add_argument("--conversions", default=None)
    p.add_argument("--grades", default=None)
    p.add_argument("--grade-filter", choices=[g.value for g in Grade], default=None)
    p.set_defaults(func=cmd_build)

    p = subs.add_parser("evaluate", help="score a benchmark with embeddings")
    _add_eval_flags(p)
    p.set_defaults(func=cmd_evaluate)

    p = subs.add_parser("fuse-evaluate", help="late-fuse modality similarities, then score")
    _add_eval_flags(p)
    p.add_argument("--weights", default="0.5,0.5")
    p.set_defaults(func=cmd_fuse_evaluate)

    p = subs.add_parser("rerun", help="replay a run_config.json snapshot")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_rerun)

    for name, sub in subs.choices.items():
        if name != "rerun":
            sub.add_argument("--out", default=".")
        sub.add_argument("--seed", type=int, default=0)
    return parser


_HANDLERS = {
    "ingest": cmd_ingest,
    "convert": cmd_convert,
    "grade": cmd_grade,
    "build": cmd_build,
    "evaluate": cmd_evaluate,
    "fuse-evaluate": cmd_fuse_evaluate,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except TransportError as exc:
        detail = f" ({len(exc.unconverted)} unconverted)" if exc.unconverted else ""
        print(f"transport error: {exc}{detail}", file=sys.stderr)
        return 4
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
