from functools import lru_cache
from pathlib import Path

import pytest

from bslts.parser import parse_component
from bslts.refinement import generate_projected
from bslts.sltsgen import generate

MODELS = Path(__file__).resolve().parent.parent / "models"


@lru_cache(maxsize=None)
def load(name: str):
    """Parse a fixture; refinements find their abstraction among the fixtures."""

    def find(machine):
        for path in sorted(MODELS.glob("*.mch")):
            text = path.read_text()
            if f"MACHINE {machine}\n" in text:
                return parse_component(text, find)
        return None

    return parse_component((MODELS / name).read_text(), find)


@lru_cache(maxsize=None)
def slts_of(name: str, mode: str = "strict", budget=None):
    m = load(name)
    if name.endswith(".ref"):
        return generate_projected(m, mode, budget)
    return generate(m, mode, budget)


@pytest.fixture
def models_dir():
    return MODELS


@pytest.fixture(scope="session")
def demoney():
    return load("demoney.mch")


@pytest.fixture(scope="session")
def r1():
    return load("demoney_r1.ref")


@pytest.fixture(scope="session")
def demoney_slts():
    return slts_of("demoney.mch")


@pytest.fixture(scope="session")
def r1_slts():
    return slts_of("demoney_r1.ref")


# one line per acceptance criterion at the end of the run
_criteria: dict = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        name = report.nodeid.split("::")[-1][len("test_criterion_"):]
        _criteria[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_criteria, key=lambda n: int(n.split("_")[0])):
        terminalreporter.write_line(f"{_criteria[name]}  criterion {name}")
