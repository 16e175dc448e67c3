#!/usr/bin/env python3
"""End-to-end walkthrough of the benchmark pipeline on generated data.

Runs every command-line stage against the demo workspace: ingest, caption
conversion and relevancy grading through a replay transport, retrieval and
MCQ benchmark construction, evaluation with a strict and a lenient
relevance threshold, two-set similarity fusion, a grade-filtered rebuild,
and a byte-for-byte reproduction of an evaluation from its run_config
snapshot. If the companion embedding service is installed, its exported
EMB1 files are scored too.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

import make_demo_data
from audiobench.cli import main as audiobench_main


def run(argv: list[str], expect: int = 0) -> None:
    print(f"\n$ audiobench {' '.join(argv)}")
    code = audiobench_main(argv)
    if code != expect:
        sys.exit(f"step failed: exit {code} (expected {expect})")


def show(path: Path, title: str, max_lines: int = 30) -> None:
    print(f"--- {title} ({path}) ---")
    lines = path.read_text(encoding="utf-8").rstrip("\n").splitlines()
    for line in lines[:max_lines]:
        print(f"  {line}")
    if len(lines) > max_lines:
        print(f"  ... ({len(lines) - max_lines} more lines)")


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workspace", default="demo_workspace")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    ws = Path(args.workspace)
    if ws.exists():
        shutil.rmtree(ws)
    print("== 1. generate data ==")
    make_demo_data.build_workspace(ws, args.seed)
    print(f"workspace at {ws}/")

    work = ws / "work"
    emb = ws / "emb"

    print("\n== 2. ingest the manifest ==")
    run(["ingest", "--manifest", str(ws / "manifest.jsonl"), "--out", str(work / "ingest")])
    corpus = work / "ingest" / "corpus.jsonl"

    print("\n== 3. convert visual captions to audio captions (replay transport) ==")
    run(
        [
            "convert",
            "--corpus", str(corpus),
            "--transport", "replay",
            "--replay-file", str(ws / "replay_convert.json"),
            "--out", str(work / "convert"),
        ]
    )
    show(work / "convert" / "conversions.jsonl", "first conversions", max_lines=3)

    print("\n== 4. grade audio relevancy (replay transport) ==")
    run(
        [
            "grade",
            "--corpus", str(corpus),
            "--transport", "replay",
            "--replay-file", str(ws / "replay_grade.json"),
            "--out", str(work / "grade"),
        ]
    )

    print("\n== 5. build the retrieval benchmark (audio captions attached) ==")
    conversions = str(work / "convert" / "conversions.jsonl")
    run(
        [
            "build",
            "--corpus", str(corpus),
            "--task", "retrieval",
            "--conversions", conversions,
            "--out", str(work / "retrieval"),
        ]
    )
    show(work / "retrieval" / "drops.jsonl", "dropped during construction")

    benchmark = str(work / "retrieval" / "benchmark.jsonl")
    eval_common = [
        "--benchmark", benchmark,
        "--text-emb", str(emb / "text_a.emb1"),
        "--audio-emb", str(emb / "audio_a.emb1"),
        "--k", "5",
        "--random-seeds", "10",
    ]

    print("\n== 6. evaluate: overlap-graded vs strict ground-truth relevance ==")
    run(["evaluate", *eval_common, "--out", str(work / "eval_lenient")])
    run(["evaluate", *eval_common, "--tau", "1.0", "--out", str(work / "eval_strict")])
    show(work / "eval_lenient" / "table.txt", "any caption-overlap counts as relevant")
    show(work / "eval_strict" / "table.txt", "only the paired clip counts (tau 1.0)")

    print("\n== 7. fuse two embedding sets, then score ==")
    run(
        [
            "fuse-evaluate",
            "--benchmark", benchmark,
            "--text-emb", str(emb / "text_a.emb1"),
            "--audio-emb", str(emb / "audio_a.emb1"),
            "--text-emb", str(emb / "text_b.emb1"),
            "--audio-emb", str(emb / "audio_b.emb1"),
            "--weights", "0.6,0.4",
            "--tau", "1.0",
            "--k", "5",
            "--out", str(work / "eval_fused"),
        ]
    )
    show(work / "eval_fused" / "table.txt", "late fusion, weights 0.6/0.4")

    print("\n== 8. keep only queries graded 'high', rebuild, re-evaluate ==")
    run(
        [
            "build",
            "--corpus", str(corpus),
            "--task", "retrieval",
            "--conversions", conversions,
            "--grades", str(work / "grade" / "grades.tsv"),
            "--grade-filter", "high",
            "--out", str(work / "retrieval_high"),
        ]
    )
    run(
        [
            "evaluate",
            "--benchmark", str(work / "retrieval_high" / "benchmark.jsonl"),
            "--text-emb", str(emb / "text_a.emb1"),
            "--audio-emb", str(emb / "audio_a.emb1"),
            "--tau", "1.0",
            "--k", "5",
            "--out", str(work / "eval_high"),
        ]
    )

    print("\n== 9. multiple-choice benchmarks ==")
    for task, seed in (("mcq-intra", "0"), ("mcq-inter", "7")):
        tag = task.replace("-", "_")
        run(
            [
                "build",
                "--corpus", str(corpus),
                "--task", task,
                "--conversions", conversions,
                "--seed", seed,
                "--out", str(work / tag),
            ]
        )
        run(
            [
                "evaluate",
                "--benchmark", str(work / tag / "benchmark.jsonl"),
                "--text-emb", str(emb / "text_a.emb1"),
                "--audio-emb", str(emb / "audio_a.emb1"),
                "--random-seeds", "10",
                "--out", str(work / f"eval_{tag}"),
            ]
        )
    replaced = json.loads(
        next(
            line
            for line in (work / "mcq_inter" / "benchmark.jsonl").read_text().splitlines()
            if '"q25"' in line
        )
    )
    print(f"q25 candidates after silent-distractor replacement: {replaced['candidates']}")

    print("\n== 10. reproduce an evaluation from its snapshot ==")
    run(
        [
            "rerun",
            "--config", str(work / "eval_strict" / "run_config.json"),
            "--out", str(work / "eval_rerun"),
        ]
    )
    original = (work / "eval_strict" / "report.json").read_bytes()
    rerun_bytes = (work / "eval_rerun" / "report.json").read_bytes()
    if original != rerun_bytes:
        sys.exit("rerun produced a different report — reproducibility broken")
    print("rerun report is byte-identical to the original")

    print("\n== 11. score embeddings exported by the companion service ==")
    try:
        from embed_service.export import export_manifest
    except ImportError:
        print("embed-service is not installed; skipping")
        return 0
    export_manifest(ws / "manifest.jsonl", emb / "text_svc.emb1", modality="text")
    export_manifest(ws / "manifest.jsonl", emb / "audio_svc.emb1", modality="audio")
    run(
        [
            "evaluate",
            "--benchmark", benchmark,
            "--text-emb", str(emb / "text_svc.emb1"),
            "--audio-emb", str(emb / "audio_svc.emb1"),
            "--tau", "1.0",
            "--k", "5",
            "--random-seeds", "10",
            "--out", str(work / "eval_svc"),
        ]
    )
    show(work / "eval_svc" / "table.txt", "service embeddings (lexicon DSP backend)")
    print(
        "note: the service's checkpoint-free backend has no knowledge of these\n"
        "synthetic tone clips, so it scores near the random baseline here; the\n"
        "point of this section is the file-format interoperability, not quality."
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
