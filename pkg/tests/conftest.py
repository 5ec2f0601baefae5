import pytest

from impactlab import corpus
from impactlab.frontend import SourceUnit, parse, parse_and_check


def compile_source(text, path="t.moo"):
    return parse_and_check([SourceUnit(path, text)])


def parse_source(text, path="t.moo"):
    return parse([SourceUnit(path, text)])


OVERRIDE_FIELD_DIR = corpus.fixture_dir("override_field")


@pytest.fixture(scope="session")
def override_field():
    return corpus.CorpusProject("override_field", OVERRIDE_FIELD_DIR, {}).load()


@pytest.fixture(scope="session")
def calc():
    return corpus.project(corpus.REFLECTION_PROJECT).load()


@pytest.fixture(scope="session")
def corpus_programs():
    return {p.name: p.load() for p in corpus.projects()}


def pytest_terminal_summary(terminalreporter):
    from verdicts import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(LINES):
            terminalreporter.write_line(line)
