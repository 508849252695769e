import pytest

from smdtw.config import Config
from smdtw.sigmodel import synth_corpus, synth_signature
from smdtw.verifier import enroll

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def template():
    return synth_signature(7, 6, 0.0, writer_id="w7", specimen_id="t", label="genuine")


@pytest.fixture(scope="session")
def small_corpus():
    return synth_corpus(3, 8, 3, n_strokes=6)


@pytest.fixture(scope="session")
def refset(small_corpus):
    refs = [s for s in small_corpus if s.writer_id == "w000" and s.label == "genuine"][:5]
    return enroll(refs, Config())


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
