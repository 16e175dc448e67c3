"""End-to-end command-line flows on temporary workspaces."""

import json

import numpy as np
import pytest

from audiobench.builder import load_benchmark
from audiobench.cli import main
from audiobench.embeddings import EmbeddingSet, Modality, save_embeddings
from audiobench.relevance import load_grades

N_CLIPS = 6  # last one silent


def clip_record(clip_id, video_id, silent=False):
    return {
        "type": "clip",
        "clip_id": clip_id,
        "video_id": video_id,
        "start_s": 0.0,
        "end_s": 4.0,
        "rms_energy": 0.0 if silent else 0.3,
    }


def text_record(text_id, text, clip_ids, kind="visual_caption", mcq=None):
    record = {
        "type": "text",
        "text_id": text_id,
        "kind": kind,
        "text": text,
        "clip_ids": list(clip_ids),
    }
    if mcq:
        record["mcq"] = mcq
    return record


def write_jsonl(path, records):
    path.write_text(
        "".join(json.dumps(r, sort_keys=True) + "\n" for r in records),
        encoding="utf-8",
    )


@pytest.fixture
def workspace(tmp_path):
    """Manifest with one silent clip, plus embedding files covering all ids."""
    records = []
    for i in range(N_CLIPS):
        records.append(clip_record(f"c{i}", f"v{i}", silent=i == N_CLIPS - 1))
    for i in range(N_CLIPS):
        records.append(text_record(f"t{i}", f"action{i} object{i}", [f"c{i}"]))
    manifest = tmp_path / "manifest.jsonl"
    write_jsonl(manifest, records)

    rng = np.random.default_rng(7)
    text_ids = tuple(f"t{i}" for i in range(N_CLIPS))
    clip_ids = tuple(f"c{i}" for i in range(N_CLIPS))
    paths = {}
    for name, ids, modality, seed_shift in (
        ("text_emb.bin", text_ids, Modality.TEXT, 0),
        ("audio_emb.bin", clip_ids, Modality.AUDIO, 1),
        ("text_emb2.bin", text_ids, Modality.TEXT, 2),
        ("audio_emb2.bin", clip_ids, Modality.AUDIO, 3),
    ):
        vectors = np.random.default_rng(7 + seed_shift).normal(size=(N_CLIPS, 8))
        emb = EmbeddingSet(ids=ids, vectors=vectors.astype(np.float32), modality=modality)
        save_embeddings(emb, tmp_path / name)
        paths[name] = tmp_path / name
    del rng
    return tmp_path, manifest, paths


def run_ingest(tmp_path, manifest, out_name="ingested"):
    out = tmp_path / out_name
    code = main(["ingest", "--manifest", str(manifest), "--out", str(out)])
    assert code == 0
    return out


def run_build(tmp_path, corpus, out_name="built", extra=()):
    out = tmp_path / out_name
    code = main(
        ["build", "--corpus", str(corpus), "--task", "retrieval", "--out", str(out)]
        + list(extra)
    )
    assert code == 0
    return out


class TestIngest:
    def test_outputs_and_stats(self, workspace, capsys):
        tmp_path, manifest, _ = workspace
        out = run_ingest(tmp_path, manifest)
        assert (out / "corpus.jsonl").exists()
        stats = json.loads((out / "corpus_stats.json").read_text())
        assert stats["visual_caption"]["n_clips"] == N_CLIPS
        assert stats["visual_caption"]["n_silent"] == 1
        snapshot = json.loads((out / "run_config.json").read_text())
        assert snapshot["subcommand"] == "ingest"
        assert "t0" not in capsys.readouterr().err

    def test_bad_manifest_exits_3(self, tmp_path, capsys):
        manifest = tmp_path / "manifest.jsonl"
        write_jsonl(manifest, [text_record("t0", "a b", ["missing_clip"])])
        code = main(["ingest", "--manifest", str(manifest), "--out", str(tmp_path / "o")])
        assert code == 3
        assert "data error" in capsys.readouterr().err

    def test_missing_input_file_exits_3(self, tmp_path, capsys):
        code = main(["ingest", "--manifest", str(tmp_path / "absent.jsonl"), "--out", str(tmp_path / "o")])
        assert code == 3
        assert "data error" in capsys.readouterr().err


class TestBuild:
    def test_retrieval_outputs(self, workspace):
        tmp_path, manifest, _ = workspace
        ingested = run_ingest(tmp_path, manifest)
        out = run_build(tmp_path, ingested / "corpus.jsonl")
        assert (out / "benchmark.jsonl").exists()
        assert (out / "relevance.jsonl").exists()
        drops = [json.loads(l) for l in (out / "drops.jsonl").read_text().splitlines()]
        assert {
            (d["reason"], d["ref"]) for d in drops
        } == {("silent_clip", f"c{N_CLIPS - 1}"), ("no_audible_item", f"t{N_CLIPS - 1}")}
        bench = load_benchmark(out / "benchmark.jsonl", out / "relevance.jsonl")
        assert len(bench.item_ids) == N_CLIPS - 1

    def test_usage_error_without_task(self, workspace):
        tmp_path, manifest, _ = workspace
        with pytest.raises(SystemExit) as exc_info:
            main(["build", "--corpus", str(manifest)])
        assert exc_info.value.code == 2

    def test_unknown_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc_info:
            main(["frobnicate"])
        assert exc_info.value.code == 2


class TestEvaluate:
    def evaluate(self, tmp_path, built, paths, out_name="scored", extra=()):
        out = tmp_path / out_name
        code = main(
            [
                "evaluate",
                "--benchmark", str(built / "benchmark.jsonl"),
                "--text-emb", str(paths["text_emb.bin"]),
                "--audio-emb", str(paths["audio_emb.bin"]),
                "--out", str(out),
                "--k", "5",
            ]
            + list(extra)
        )
        assert code == 0
        return out

    def test_report_written(self, workspace, capsys):
        tmp_path, manifest, paths = workspace
        ingested = run_ingest(tmp_path, manifest)
        built = run_build(tmp_path, ingested / "corpus.jsonl")
        out = self.evaluate(tmp_path, built, paths, extra=["--random-seeds", "3"])
        report = json.loads((out / "report.json").read_text())
        for key in ("map_avg", "ndcg_avg", "map_a2t", "map_t2a"):
            assert 0.0 <= report[key] <= 100.0
        assert report["n_queries_t2a"] == N_CLIPS - 1
        table = (out / "table.txt").read_text()
        assert "mAP(%)" in table and "nDCG(%)" in table
        baseline = json.loads((out / "random_baseline.json").read_text())
        assert baseline["n_seeds"] == 3
        assert "random baseline" in capsys.readouterr().out

    def test_relevance_defaults_to_sibling(self, workspace):
        tmp_path, manifest, paths = workspace
        ingested = run_ingest(tmp_path, manifest)
        built = run_build(tmp_path, ingested / "corpus.jsonl")
        out = self.evaluate(tmp_path, built, paths, out_name="sibling")
        assert (out / "report.json").exists()

    def test_missing_embedding_id_exits_3(self, workspace, capsys):
        tmp_path, manifest, paths = workspace
        ingested = run_ingest(tmp_path, manifest)
        built = run_build(tmp_path, ingested / "corpus.jsonl")
        short = EmbeddingSet(
            ids=("t0",), vectors=np.ones((1, 8), dtype=np.float32), modality=Modality.TEXT
        )
        save_embeddings(short, tmp_path / "short.bin")
        code = main(
            [
                "evaluate",
                "--benchmark", str(built / "benchmark.jsonl"),
                "--text-emb", str(tmp_path / "short.bin"),
                "--audio-emb", str(paths["audio_emb.bin"]),
                "--out", str(tmp_path / "broken"),
            ]
        )
        assert code == 3
        assert "data error" in capsys.readouterr().err

    def test_rerun_is_byte_identical(self, workspace):
        tmp_path, manifest, paths = workspace
        ingested = run_ingest(tmp_path, manifest)
        built = run_build(tmp_path, ingested / "corpus.jsonl")
        out = self.evaluate(tmp_path, built, paths, extra=["--random-seeds", "2"])
        rerun_out = tmp_path / "rescored"
        code = main(
            ["rerun", "--config", str(out / "run_config.json"), "--out", str(rerun_out)]
        )
        assert code == 0
        for name in ("report.json", "table.txt", "random_baseline.json"):
            assert (rerun_out / name).read_bytes() == (out / name).read_bytes()


class TestFuseEvaluate:
    def test_weights_one_zero_match_single_pair(self, workspace):
        tmp_path, manifest, paths = workspace
        ingested = run_ingest(tmp_path, manifest)
        built = run_build(tmp_path, ingested / "corpus.jsonl")
        solo = TestEvaluate().evaluate(tmp_path, built, paths, out_name="solo")
        fused_out = tmp_path / "fused"
        code = main(
            [
                "fuse-evaluate",
                "--benchmark", str(built / "benchmark.jsonl"),
                "--text-emb", str(paths["text_emb.bin"]),
                "--audio-emb", str(paths["audio_emb.bin"]),
                "--text-emb", str(paths["text_emb2.bin"]),
                "--audio-emb", str(paths["audio_emb2.bin"]),
                "--weights", "1,0",
                "--out", str(fused_out),
                "--k", "5",
            ]
        )
        assert code == 0
        assert json.loads((fused_out / "report.json").read_text()) == json.loads(
            (solo / "report.json").read_text()
        )

    def test_mismatched_pair_counts_exit_2(self, workspace):
        tmp_path, manifest, paths = workspace
        ingested = run_ingest(tmp_path, manifest)
        built = run_build(tmp_path, ingested / "corpus.jsonl")
        with pytest.raises(SystemExit) as exc_info:
            main(
                [
                    "fuse-evaluate",
                    "--benchmark", str(built / "benchmark.jsonl"),
                    "--text-emb", str(paths["text_emb.bin"]),
                    "--text-emb", str(paths["text_emb2.bin"]),
                    "--audio-emb", str(paths["audio_emb.bin"]),
                    "--out", str(tmp_path / "nope"),
                ]
            )
        assert exc_info.value.code == 2


class TestConvert:
    def conversion_reply(self):
        entries = " ".join(
            f"[{i + 1}. action{i} object{i}: Sound number {i}]" for i in range(N_CLIPS)
        )
        return entries

    def test_convert_writes_conversions(self, workspace):
        tmp_path, manifest, _ = workspace
        ingested = run_ingest(tmp_path, manifest)
        replay = tmp_path / "replay.json"
        replay.write_text(json.dumps([self.conversion_reply()]))
        out = tmp_path / "converted"
        code = main(
            [
                "convert",
                "--corpus", str(ingested / "corpus.jsonl"),
                "--transport", "replay",
                "--replay-file", str(replay),
                "--out", str(out),
            ]
        )
        assert code == 0
        lines = [json.loads(l) for l in (out / "conversions.jsonl").read_text().splitlines()]
        assert len(lines) == N_CLIPS
        assert lines[0] == {
            "audio_text": "Sound number 0",
            "source_text": "action0 object0",
            "status": "ok",
            "text_id": "t0",
        }

    def test_build_attaches_conversions(self, workspace):
        tmp_path, manifest, _ = workspace
        ingested = run_ingest(tmp_path, manifest)
        replay = tmp_path / "replay.json"
        replay.write_text(json.dumps([self.conversion_reply()]))
        converted = tmp_path / "converted"
        main(
            [
                "convert",
                "--corpus", str(ingested / "corpus.jsonl"),
                "--transport", "replay",
                "--replay-file", str(replay),
                "--out", str(converted),
            ]
        )
        built = run_build(
            tmp_path,
            ingested / "corpus.jsonl",
            out_name="built_attached",
            extra=["--conversions", str(converted / "conversions.jsonl")],
        )
        bench = load_benchmark(built / "benchmark.jsonl", built / "relevance.jsonl")
        assert bench.query_texts["t0"] == "Sound number 0"

    def test_exhausted_replay_exits_4(self, workspace, capsys):
        tmp_path, manifest, _ = workspace
        ingested = run_ingest(tmp_path, manifest)
        replay = tmp_path / "replay.json"
        replay.write_text("[]")
        code = main(
            [
                "convert",
                "--corpus", str(ingested / "corpus.jsonl"),
                "--transport", "replay",
                "--replay-file", str(replay),
                "--out", str(tmp_path / "failed"),
            ]
        )
        assert code == 4
        err = capsys.readouterr().err
        assert "transport error" in err
        assert "unconverted" in err

    def test_replay_without_file_exits_2(self, workspace):
        tmp_path, manifest, _ = workspace
        with pytest.raises(SystemExit) as exc_info:
            main(
                [
                    "convert",
                    "--corpus", str(manifest),
                    "--transport", "replay",
                    "--out", str(tmp_path / "x"),
                ]
            )
        assert exc_info.value.code == 2


class TestGrade:
    def test_grade_ok(self, workspace):
        tmp_path, manifest, _ = workspace
        ingested = run_ingest(tmp_path, manifest)
        reply = json.dumps(
            {f"action{i} object{i}": ("high" if i % 2 == 0 else "low") for i in range(N_CLIPS)}
        )
        replay = tmp_path / "replay.json"
        replay.write_text(json.dumps([reply]))
        out = tmp_path / "graded"
        code = main(
            [
                "grade",
                "--corpus", str(ingested / "corpus.jsonl"),
                "--transport", "replay",
                "--replay-file", str(replay),
                "--out", str(out),
            ]
        )
        assert code == 0
        grades = load_grades(out / "grades.tsv")
        assert len(grades) == N_CLIPS
        assert grades[0].text_id == "t0"

    def test_grade_failures_exit_3(self, workspace, capsys):
        tmp_path, manifest, _ = workspace
        ingested = run_ingest(tmp_path, manifest)
        replay = tmp_path / "replay.json"
        replay.write_text(json.dumps(["nonsense"]))
        out = tmp_path / "graded_fail"
        code = main(
            [
                "grade",
                "--corpus", str(ingested / "corpus.jsonl"),
                "--transport", "replay",
                "--replay-file", str(replay),
                "--retry-limit", "0",
                "--out", str(out),
            ]
        )
        assert code == 3
        assert "failed to grade" in capsys.readouterr().err
        assert load_grades(out / "grades.tsv") == []


class TestMcqFlow:
    @pytest.fixture
    def mcq_workspace(self, tmp_path):
        records = []
        clip_ids = []
        for k in range(3):
            for j in range(5):
                cid = f"p{k}_c{j}"
                records.append(clip_record(cid, f"v{k}"))
                clip_ids.append(cid)
        for k in range(3):
            candidates = [f"p{k}_c{j}" for j in range(5)]
            records.append(
                text_record(
                    f"t{k}",
                    f"action{k} object{k}",
                    [candidates[0]],
                    mcq={"candidates": candidates, "answer_index": 0, "task": "intra"},
                )
            )
        manifest = tmp_path / "mcq_manifest.jsonl"
        write_jsonl(manifest, records)

        text_ids = tuple(f"t{k}" for k in range(3))
        text_vecs = np.random.default_rng(0).normal(size=(3, 8)).astype(np.float32)
        save_embeddings(
            EmbeddingSet(ids=text_ids, vectors=text_vecs, modality=Modality.TEXT),
            tmp_path / "text_emb.bin",
        )
        audio_vecs = np.random.default_rng(1).normal(size=(15, 8)).astype(np.float32)
        save_embeddings(
            EmbeddingSet(ids=tuple(clip_ids), vectors=audio_vecs, modality=Modality.AUDIO),
            tmp_path / "audio_emb.bin",
        )
        return tmp_path, manifest

    def test_build_and_evaluate_mcq(self, mcq_workspace, capsys):
        tmp_path, manifest = mcq_workspace
        ingested = run_ingest(tmp_path, manifest)
        built = tmp_path / "mcq_built"
        code = main(
            [
                "build",
                "--corpus", str(ingested / "corpus.jsonl"),
                "--task", "mcq-intra",
                "--out", str(built),
            ]
        )
        assert code == 0
        scored = tmp_path / "mcq_scored"
        code = main(
            [
                "evaluate",
                "--benchmark", str(built / "benchmark.jsonl"),
                "--text-emb", str(tmp_path / "text_emb.bin"),
                "--audio-emb", str(tmp_path / "audio_emb.bin"),
                "--out", str(scored),
                "--random-seeds", "2",
            ]
        )
        assert code == 0
        report = json.loads((scored / "report.json").read_text())
        assert report["n_intra"] == 3
        assert 0.0 <= report["accuracy_overall"] <= 100.0
        assert (scored / "random_baseline.json").exists()
        assert "accuracy intra" in capsys.readouterr().out

    def test_mcq_rerun_identical(self, mcq_workspace):
        tmp_path, manifest = mcq_workspace
        ingested = run_ingest(tmp_path, manifest)
        built = tmp_path / "mcq_built"
        main(
            [
                "build",
                "--corpus", str(ingested / "corpus.jsonl"),
                "--task", "mcq-intra",
                "--out", str(built),
            ]
        )
        rebuilt = tmp_path / "mcq_rebuilt"
        code = main(
            ["rerun", "--config", str(built / "run_config.json"), "--out", str(rebuilt)]
        )
        assert code == 0
        assert (rebuilt / "benchmark.jsonl").read_bytes() == (
            built / "benchmark.jsonl"
        ).read_bytes()


class TestSnapshots:
    def test_snapshot_round_trips(self, workspace):
        tmp_path, manifest, _ = workspace
        out = run_ingest(tmp_path, manifest)
        snapshot = json.loads((out / "run_config.json").read_text())
        assert snapshot["options"]["manifest"] == str(manifest)
        assert "func" not in snapshot["options"]
        rerun_out = tmp_path / "reingested"
        code = main(
            ["rerun", "--config", str(out / "run_config.json"), "--out", str(rerun_out)]
        )
        assert code == 0
        assert (rerun_out / "corpus.jsonl").read_bytes() == (out / "corpus.jsonl").read_bytes()
        again = json.loads((rerun_out / "run_config.json").read_text())
        assert again["subcommand"] == snapshot["subcommand"]
