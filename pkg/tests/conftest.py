"""Shared fixtures: synthetic corpus builders and acceptance reporting."""

import json

import pytest

from corpus_helpers import make_clip, make_corpus, make_text


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


@pytest.fixture
def corpus_factory():
    return make_corpus


@pytest.fixture
def clip_factory():
    return make_clip


@pytest.fixture
def text_factory():
    return make_text


@pytest.fixture
def manifest_writer(tmp_path):
    """Write manifest records to a JSONL file and return its path."""

    def write(records, name="manifest.jsonl"):
        path = tmp_path / name
        path.write_text(
            "\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8"
        )
        return path

    return write
