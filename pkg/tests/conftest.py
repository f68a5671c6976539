from pathlib import Path

import numpy as np
import pytest

CORPUS = Path(__file__).resolve().parent.parent / "src" / "nodalgraph" / "corpus"


@pytest.fixture
def corpus():
    return CORPUS


@pytest.fixture
def rng():
    return np.random.Generator(np.random.Philox(20240611))


_CRITERIA: dict[int, str] = {}


class CriterionLog:
    """Collects one verdict line per acceptance criterion."""

    def __call__(self, number: int, passed: bool, detail: str) -> bool:
        _CRITERIA[number] = f"criterion {number:2d}: {'PASS' if passed else 'FAIL'}  {detail}"
        print(_CRITERIA[number])
        return passed


@pytest.fixture
def criterion():
    return CriterionLog()


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        terminalreporter.write_line(_CRITERIA[number])
