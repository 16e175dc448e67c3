"""Deterministic embedding backends sharing a text/audio feature space.

The built-in backend places both modalities in one acoustic feature space:
a 16-band spectral profile plus summary features (bias, RMS, zero-crossing
rate, spectral centroid, spectral flatness). Audio is featurized by DSP on
the decoded waveform; text is featurized through a lexicon that maps sound
words onto the same band layout, with a hashed low-weight residual so
distinct texts stay distinct. Everything is pure arithmetic on the inputs,
so repeated calls are bit-identical. Real encoder checkpoints plug in as
additional Backend implementations; this one exists so the service contract
is exercisable without model weights.
"""

from __future__ import annotations

import hashlib
import string
import wave
from dataclasses import dataclass
from pathlib import Path

import numpy as np

N_BANDS = 16
N_SUMMARY = 5  # bias, rms, zcr, centroid, flatness
DIM = N_SUMMARY + N_BANDS
_BIAS = 0.25
_RESIDUAL_WEIGHT = 0.05
_F_LO = 20.0


class AudioDecodeError(ValueError):
    pass


def _band_edges(sample_rate: int) -> np.ndarray:
    return np.geomspace(_F_LO, sample_rate / 2.0, N_BANDS + 1)


def read_wav(path: str | Path) -> tuple[int, np.ndarray]:
    """Mono float64 samples in [-1, 1] from a PCM WAV file."""
    try:
        with wave.open(str(path), "rb") as fh:
            sample_rate = fh.getframerate()
            n_channels = fh.getnchannels()
            width = fh.getsampwidth()
            frames = fh.readframes(fh.getnframes())
    except (wave.Error, EOFError, OSError) as exc:
        raise AudioDecodeError(f"{path}: {exc}") from exc
    if width == 2:
        data = np.frombuffer(frames, dtype="<i2").astype(np.float64) / 32768.0
    elif width == 1:
        data = (np.frombuffer(frames, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif width == 4:
        data = np.frombuffer(frames, dtype="<i4").astype(np.float64) / 2147483648.0
    else:
        raise AudioDecodeError(f"{path}: unsupported sample width {width}")
    if n_channels > 1:
        data = data.reshape(-1, n_channels).mean(axis=1)
    return sample_rate, data


def _band_profile(sample_rate: int, samples: np.ndarray) -> tuple[np.ndarray, float, float]:
    """(16-band energy fractions, centroid / nyquist, spectral flatness)."""
    if samples.size == 0:
        return np.zeros(N_BANDS), 0.0, 0.0
    window = np.hanning(samples.size)
    power = np.abs(np.fft.rfft(samples * window)) ** 2
    freqs = np.fft.rfftfreq(samples.size, d=1.0 / sample_rate)
    total = float(power.sum())
    if total <= 0.0:
        return np.zeros(N_BANDS), 0.0, 0.0
    edges = _band_edges(sample_rate)
    profile = np.zeros(N_BANDS)
    for b in range(N_BANDS):
        mask = (freqs >= edges[b]) & (freqs < edges[b + 1])
        profile[b] = power[mask].sum() / total
    centroid = float((freqs * power).sum() / total) / (sample_rate / 2.0)
    eps = 1e-12
    flatness = float(np.exp(np.mean(np.log(power + eps))) / (np.mean(power) + eps))
    return profile, centroid, flatness


def _tokens(text: str) -> list[str]:
    out = []
    for raw in text.lower().split():
        token = raw.strip(string.punctuation)
        if token:
            out.append(token)
    return out


def _hash_band(token: str) -> int:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "little") % N_BANDS


def _template(bands, zcr=0.0, flatness=0.0, centroid=None) -> dict:
    profile = np.zeros(N_BANDS)
    for b in bands:
        profile[b] = 1.0 / len(bands)
    if centroid is None:
        centroid = float(np.mean(bands)) / N_BANDS
    return {"profile": profile, "zcr": zcr, "flatness": flatness, "centroid": centroid}


# sound words -> where their energy sits in the shared band layout
LEXICON = {
    "hum": _template((2, 3, 4)),
    "humming": _template((2, 3, 4)),
    "tone": _template((3, 4, 5)),
    "drone": _template((2, 3)),
    "rumble": _template((0, 1, 2)),
    "rumbling": _template((0, 1, 2)),
    "bass": _template((0, 1, 2)),
    "buzz": _template((3, 4, 5)),
    "buzzing": _template((3, 4, 5)),
    "voice": _template((5, 6, 7)),
    "speech": _template((5, 6, 7)),
    "talking": _template((5, 6, 7)),
    "singing": _template((6, 7, 8)),
    "water": _template((8, 9, 10)),
    "splashing": _template((9, 10, 11)),
    "splash": _template((9, 10, 11)),
    "trickling": _template((9, 10)),
    "pouring": _template((8, 9)),
    "ring": _template((7, 8, 9)),
    "ringing": _template((7, 8, 9)),
    "beep": _template((6, 7)),
    "whistle": _template((10, 11)),
    "chirp": _template((11, 12)),
    "hiss": _template((12, 13, 14, 15), flatness=0.6),
    "hissing": _template((12, 13, 14, 15), flatness=0.6),
    "static": _template((12, 13, 14, 15), flatness=0.8),
    "noise": _template(tuple(range(8, 16)), flatness=0.8),
    "sizzle": _template((11, 12, 13), flatness=0.4),
    "sizzling": _template((11, 12, 13), flatness=0.4),
    "click": _template(tuple(range(4, 16)), zcr=0.4),
    "clicking": _template(tuple(range(4, 16)), zcr=0.4),
    "tap": _template(tuple(range(4, 14)), zcr=0.3),
    "tapping": _template(tuple(range(4, 14)), zcr=0.3),
    "knock": _template((2, 3, 4), zcr=0.2),
    "knocking": _template((2, 3, 4), zcr=0.2),
    "clack": _template(tuple(range(6, 16)), zcr=0.4),
    "clanging": _template((7, 8, 9, 10), zcr=0.2),
    "clinking": _template((9, 10, 11), zcr=0.3),
    "chop": _template(tuple(range(3, 12)), zcr=0.3),
    "chopping": _template(tuple(range(3, 12)), zcr=0.3),
}


def _normalized(vector: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(vector))
    return (vector / norm).astype(np.float32)


@dataclass(frozen=True)
class BandProfileBackend:
    """The built-in checkpoint-free backend."""

    name: str = "band-profile"
    version: str = "1.0"
    dim: int = DIM
    modalities: tuple[str, ...] = ("text", "audio")

    def embed_text(self, payloads: list[str]) -> np.ndarray:
        out = np.zeros((len(payloads), DIM), dtype=np.float32)
        for row, text in enumerate(payloads):
            profile = np.zeros(N_BANDS)
            zcr = flatness = centroid = 0.0
            n_hits = 0
            for token in _tokens(text):
                template = LEXICON.get(token)
                if template is not None:
                    profile += template["profile"]
                    zcr += template["zcr"]
                    flatness += template["flatness"]
                    centroid += template["centroid"]
                    n_hits += 1
                else:
                    profile[_hash_band(token)] += _RESIDUAL_WEIGHT
            if n_hits:
                zcr /= n_hits
                flatness /= n_hits
                centroid /= n_hits
            vector = np.concatenate(([_BIAS, 0.0, zcr, centroid, flatness], profile))
            out[row] = _normalized(vector)
        return out

    def embed_audio(self, payloads: list[str]) -> np.ndarray:
        out = np.zeros((len(payloads), DIM), dtype=np.float32)
        for row, path in enumerate(payloads):
            sample_rate, samples = read_wav(path)
            rms = float(np.sqrt(np.mean(samples**2))) if samples.size else 0.0
            zcr = (
                float(np.mean(np.abs(np.diff(np.signbit(samples)))))
                if samples.size > 1
                else 0.0
            )
            profile, centroid, flatness = _band_profile(sample_rate, samples)
            vector = np.concatenate(([_BIAS, rms, zcr, centroid, flatness], profile))
            out[row] = _normalized(vector)
        return out

    def embed(self, modality: str, payloads: list[str]) -> np.ndarray:
        if modality == "text":
            return self.embed_text(payloads)
        if modality == "audio":
            return self.embed_audio(payloads)
        raise ValueError(f"unsupported modality {modality!r}")


BUILTIN_BACKENDS = {backend.name: backend for backend in (BandProfileBackend(),)}
