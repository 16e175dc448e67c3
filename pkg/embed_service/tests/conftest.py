"""Shared fixtures for the embedding service tests: WAV synthesis and
acceptance reporting.

Helpers are exposed only through fixtures, never imported by test modules,
so this conftest coexists with same-named conftests elsewhere in the
repository when the whole tree is collected in one pytest run.
"""

import math
import wave
from pathlib import Path

import numpy as np
import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "acceptance(name): top-level acceptance criterion"
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        reporter = item.config.pluginmanager.get_plugin("terminalreporter")
        if reporter is not None:
            verdict = "PASS" if report.passed else "FAIL"
            reporter.write_line(f"ACCEPTANCE {marker.args[0]}: {verdict}")


class WavFactory:
    """Writes deterministic 16-bit mono PCM WAV files under one directory."""

    def __init__(self, root: Path, sample_rate: int = 16000):
        self.root = Path(root)
        self.sample_rate = sample_rate

    def write(self, name: str, samples) -> Path:
        pcm = (
            np.clip(np.asarray(samples, dtype=np.float64), -1.0, 1.0) * 32767
        ).astype("<i2")
        path = self.root / name
        with wave.open(str(path), "wb") as fh:
            fh.setnchannels(1)
            fh.setsampwidth(2)
            fh.setframerate(self.sample_rate)
            fh.writeframes(pcm.tobytes())
        return path

    def sine(self, name: str, freq_hz: float, seconds: float = 1.0) -> Path:
        t = np.arange(int(self.sample_rate * seconds)) / self.sample_rate
        return self.write(name, 0.5 * np.sin(2.0 * math.pi * freq_hz * t))

    def noise(self, name: str, seed: int = 7, seconds: float = 1.0) -> Path:
        rng = np.random.default_rng(seed)
        return self.write(
            name, rng.uniform(-0.5, 0.5, int(self.sample_rate * seconds))
        )


@pytest.fixture
def wav_factory(tmp_path):
    return WavFactory(tmp_path)
