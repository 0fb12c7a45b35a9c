import shutil
from pathlib import Path

import pytest

from perfpatch.fixtures.minirepo import create_minirepo


@pytest.fixture(scope="session")
def minirepo(tmp_path_factory) -> Path:
    return create_minirepo(tmp_path_factory.mktemp("mini") / "repo")


@pytest.fixture
def repo_copy(minirepo, tmp_path) -> Path:
    """A private clone of the mini repository that a test may mutate."""
    dest = tmp_path / "repo"
    shutil.copytree(minirepo, dest, symlinks=True)
    return dest


ACCEPTANCE_LINES: list[str] = []


class _Recorder:
    def __call__(self, number: int, ok: bool, detail: str) -> None:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)


@pytest.fixture
def acceptance():
    return _Recorder()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
