import shutil
import sys
from pathlib import Path

import pytest

from tachecker import smt
from tachecker.parser import parse_file

FIXTURES = Path(__file__).parent / "fixtures"
sys.path.insert(0, str(Path(__file__).parent))

requires_solver = pytest.mark.skipif(
    shutil.which(smt.default_command().split()[0]) is None, reason="no SMT solver on PATH")


def load(name: str):
    return parse_file(str(FIXTURES / name))


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def session():
    with smt.SmtSession() as s:
        yield s


@pytest.fixture(scope="module")
def shared_session():
    with smt.SmtSession() as s:
        yield s


# criterion number -> summary line, filled in by test_acceptance
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for number in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[number])
