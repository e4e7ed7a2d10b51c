import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

TOY = Path(__file__).resolve().parents[1] / "src" / "clirkit" / "data" / "toy"


@pytest.fixture
def toy_dir():
    return TOY


@pytest.fixture
def write_lines(tmp_path):
    def _write(name, lines):
        p = tmp_path / name
        p.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return p
    return _write


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "REPORT", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
