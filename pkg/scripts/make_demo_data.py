#!/usr/bin/env python3
"""Generate a self-contained demo workspace: manifest, WAV clips, canned
LLM replies, and synthetic embedding files.

Everything is seeded, so two runs with the same seed produce identical
bytes. The workspace exercises the full pipeline: silent-clip detection,
caption conversion via a replay transport, relevancy grading, retrieval and
MCQ benchmark construction, and evaluation with two embedding sets whose
similarities can be fused.
"""

from __future__ import annotations

import argparse
import json
import math
import wave
from pathlib import Path

import numpy as np

from audiobench import EmbeddingSet, Modality, save_embeddings

SAMPLE_RATE = 16000
CLIP_SECONDS = 0.5
EMB_DIM = 24

# (visual caption, audio caption) pairs; index order is manifest order.
CAPTIONS = [
    ("a chef slicing carrots on a wooden board", "a knife chopping steadily against wood"),
    ("a man pouring water from a jug into a glass", "liquid trickling into a vessel"),
    ("a woman typing quickly on a laptop", "plastic keys clattering in rapid bursts"),
    ("a barista steaming milk at a cafe counter", "a steam wand hissing into a metal pitcher"),
    ("a child bouncing a basketball in a driveway", "a rubber ball thumping on concrete"),
    ("a dog shaking water off its coat", "fur flapping and droplets spattering"),
    ("a cyclist pedaling down a gravel path", "tires crunching over loose stones"),
    ("a blacksmith hammering a glowing bar", "metal ringing under heavy hammer blows"),
    ("a crowd applauding at a theater", "many hands clapping in a large hall"),
    ("rain falling on a tin roof at night", "steady rain drumming on sheet metal"),
    ("a carpenter sanding a table edge", "sandpaper rasping across wood"),
    ("a train arriving at a station platform", "wheels squealing and brakes releasing air"),
    ("a woman opening a fizzy drink can", "a can cracking open with a sharp fizz"),
    ("a man raking dry leaves in a yard", "leaves rustling against metal tines"),
    ("a boy zipping up his winter jacket", "a zipper rasping quickly upward"),
    ("a cat knocking a pencil off a desk", "a light object clattering onto the floor"),
    ("waves rolling onto a pebble beach", "surf washing over clattering pebbles"),
    ("a teacher writing with chalk on a board", "chalk tapping and scraping on slate"),
    ("a motorbike accelerating away at a light", "an engine revving and fading into distance"),
    ("a mime performing in a silent hall", "soft room tone with no distinct events"),
    ("a cook stirring soup in a busy kitchen", "a spoon scraping a simmering pot"),
    ("a mechanic tightening bolts in a garage", "a ratchet clicking against steel"),
    ("a gardener clipping a hedge in the sun", "shears snipping through twigs"),
    ("a farrier shoeing a horse in a stable", "hammer taps and a horse shifting hooves"),
    ("a bartender shaking a cocktail mixer", "ice rattling inside a metal shaker"),
    ("a glassblower turning a pipe at a furnace", "a furnace roaring with a soft rotation"),
]

GRADES = {
    "t04": "moderate",
    "t05": "low",
    "t13": "moderate",
    "t14": "moderate",
    "t15": "moderate",
    "t19": "low",
}

CONVERT_MAX_BATCH = 20  # matches the CLI default; keeps replay files aligned


def clip_plan() -> tuple[list[tuple[str, str]], str]:
    """All (clip_id, video_id) pairs plus the one silent clip id.

    Videos v00..v02 have six clips each (enough for same-video MCQ pools);
    v03..v10 have one clip each (cross-video distractor material). Captions
    cover five of the six clips per multi-clip video, so the sixth clip of
    each — and the singleton clips c07_0, c08_0, c10_0 — stay caption-free
    and can serve as MCQ answers without giving any clip two captions.
    """
    clips = [
        (f"c{v:02d}_{j}", f"v{v:02d}") for v in range(3) for j in range(6)
    ]
    clips += [(f"c{v:02d}_0", f"v{v:02d}") for v in range(3, 11)]
    return clips, "c09_0"


def caption_clip_ids(clips: list[tuple[str, str]]) -> list[str]:
    """Clips paired 1:1 with captions t00..t19, in caption order."""
    ordered = [
        f"c{v:02d}_{j}" for v in range(3) for j in range(5)
    ]  # 15 captioned clips on the multi-clip videos
    ordered += ["c03_0", "c04_0", "c05_0", "c06_0"]
    ordered.append("c09_0")  # the silent clip: its caption gets dropped
    assert all(any(cid == c for c, _ in clips) for cid in ordered)
    return ordered


def mcq_texts() -> list[dict]:
    """Six MCQ query records: three same-video pools, three cross-video."""
    intra = [
        ("q20", ["c00_5", "c00_0", "c00_1", "c00_2", "c00_3"], 0, "intra"),
        ("q21", ["c01_1", "c01_2", "c01_5", "c01_3", "c01_4"], 2, "intra"),
        ("q22", ["c02_0", "c02_2", "c02_3", "c02_4", "c02_5"], 4, "intra"),
    ]
    inter = [
        ("q23", ["c07_0", "c04_0", "c05_0", "c06_0", "c03_0"], 0, "inter"),
        ("q24", ["c03_0", "c05_0", "c01_0", "c08_0", "c06_0"], 3, "inter"),
        # one silent distractor (c09_0): the builder must replace it
        ("q25", ["c10_0", "c09_0", "c04_0", "c06_0", "c03_0"], 0, "inter"),
    ]
    records = []
    for idx, (text_id, candidates, answer, task) in enumerate(intra + inter):
        visual, _ = CAPTIONS[20 + idx]
        records.append(
            {
                "type": "text",
                "text_id": text_id,
                "kind": "visual_caption",
                "text": visual,
                "clip_ids": [candidates[answer]],
                "mcq": {
                    "candidates": candidates,
                    "answer_index": answer,
                    "task": task,
                },
            }
        )
    return records


def write_wav(path: Path, samples: np.ndarray) -> None:
    pcm = (np.clip(samples, -1.0, 1.0) * 32767).astype("<i2")
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(1)
        fh.setsampwidth(2)
        fh.setframerate(SAMPLE_RATE)
        fh.writeframes(pcm.tobytes())


def clip_waveform(rng: np.random.Generator) -> np.ndarray:
    """A deterministic little soundscape: two tones plus shaped noise."""
    n = int(SAMPLE_RATE * CLIP_SECONDS)
    t = np.arange(n) / SAMPLE_RATE
    freqs = rng.uniform(110.0, 3500.0, size=2)
    tone = sum(np.sin(2.0 * math.pi * f * t + rng.uniform(0, 2 * math.pi)) for f in freqs)
    noise = rng.normal(0.0, rng.uniform(0.05, 0.3), size=n)
    mix = 0.3 * tone / 2.0 + noise
    peak = np.max(np.abs(mix))
    return 0.4 * mix / peak if peak > 0 else mix


def conversion_reply(batch: list[tuple[str, str]]) -> str:
    return " ".join(
        f"[{j}. {visual}: {audio}]" for j, (visual, audio) in enumerate(batch, start=1)
    )


def unit(vector: np.ndarray) -> np.ndarray:
    return vector / np.linalg.norm(vector)


def synth_embeddings(
    text_ids: list[str],
    clip_of_text: dict[str, str],
    clip_ids: list[str],
    seed: int,
    noise_scale: float,
) -> tuple[EmbeddingSet, EmbeddingSet]:
    """Correlated text/audio vectors: each clip sits near its caption."""

    def draw(tag: int, idx: int) -> np.ndarray:
        return np.random.default_rng((seed, tag, idx)).standard_normal(EMB_DIM)

    caption_base = {tid: unit(draw(0, i)) for i, tid in enumerate(text_ids[:20])}
    audio_vec: dict[str, np.ndarray] = {}
    for i, cid in enumerate(clip_ids):
        owners = [t for t, c in clip_of_text.items() if c == cid and t in caption_base]
        if owners:
            base = caption_base[owners[0]]
            audio_vec[cid] = unit(base + noise_scale * draw(1, i))
        else:
            audio_vec[cid] = unit(draw(1, i))
    text_vec = dict(caption_base)
    for i, tid in enumerate(text_ids[20:], start=20):
        answer_clip = clip_of_text[tid]
        text_vec[tid] = unit(audio_vec[answer_clip] + noise_scale * draw(2, i))

    texts = EmbeddingSet(
        ids=tuple(text_ids),
        vectors=np.asarray([text_vec[t] for t in text_ids], dtype=np.float32),
        modality=Modality.TEXT,
    )
    audio = EmbeddingSet(
        ids=tuple(clip_ids),
        vectors=np.asarray([audio_vec[c] for c in clip_ids], dtype=np.float32),
        modality=Modality.AUDIO,
    )
    return texts, audio


def build_workspace(out_dir: Path, seed: int = 0) -> Path:
    out_dir = Path(out_dir)
    (out_dir / "audio").mkdir(parents=True, exist_ok=True)
    (out_dir / "emb").mkdir(parents=True, exist_ok=True)

    clips, silent_clip = clip_plan()
    owned = caption_clip_ids(clips)

    records = []
    for idx, (clip_id, video_id) in enumerate(clips):
        rng = np.random.default_rng((seed, 100, idx))
        samples = (
            np.zeros(int(SAMPLE_RATE * CLIP_SECONDS))
            if clip_id == silent_clip
            else clip_waveform(rng)
        )
        write_wav(out_dir / "audio" / f"{clip_id}.wav", samples)
        records.append(
            {
                "type": "clip",
                "clip_id": clip_id,
                "video_id": video_id,
                "start_s": 0.0,
                "end_s": CLIP_SECONDS,
                "audio_path": f"audio/{clip_id}.wav",
            }
        )

    text_ids = [f"t{i:02d}" for i in range(20)]
    clip_of_text = {tid: owned[i] for i, tid in enumerate(text_ids)}
    for i, tid in enumerate(text_ids):
        records.append(
            {
                "type": "text",
                "text_id": tid,
                "kind": "visual_caption",
                "text": CAPTIONS[i][0],
                "clip_ids": [clip_of_text[tid]],
            }
        )
    for record in mcq_texts():
        records.append(record)
        clip_of_text[record["text_id"]] = record["clip_ids"][0]
        text_ids.append(record["text_id"])

    manifest = out_dir / "manifest.jsonl"
    manifest.write_text(
        "\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8"
    )

    # Canned LLM replies, batched exactly the way the convert command batches.
    convert_replies = [
        conversion_reply(CAPTIONS[start : start + CONVERT_MAX_BATCH])
        for start in range(0, len(CAPTIONS), CONVERT_MAX_BATCH)
    ]
    (out_dir / "replay_convert.json").write_text(
        json.dumps(convert_replies, indent=2) + "\n", encoding="utf-8"
    )
    grade_replies = []
    for start in range(0, len(text_ids), CONVERT_MAX_BATCH):
        batch = text_ids[start : start + CONVERT_MAX_BATCH]
        grade_replies.append(
            json.dumps(
                {
                    CAPTIONS[text_ids.index(tid)][0]: GRADES.get(tid, "high")
                    for tid in batch
                }
            )
        )
    (out_dir / "replay_grade.json").write_text(
        json.dumps(grade_replies, indent=2) + "\n", encoding="utf-8"
    )

    clip_ids = [cid for cid, _ in clips]
    for tag, noise_scale in (("a", 0.35), ("b", 0.9)):
        texts, audio = synth_embeddings(
            text_ids, clip_of_text, clip_ids, seed + (0 if tag == "a" else 1), noise_scale
        )
        save_embeddings(texts, out_dir / "emb" / f"text_{tag}.emb1")
        save_embeddings(audio, out_dir / "emb" / f"audio_{tag}.emb1")

    return manifest


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="demo_workspace")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()
    manifest = build_workspace(Path(args.out), args.seed)
    n_wavs = len(list((Path(args.out) / "audio").glob("*.wav")))
    print(f"wrote {manifest} ({n_wavs} wav clips, 4 embedding files, 2 replay files)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
