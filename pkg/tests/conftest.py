import sys
from pathlib import Path

import pytest

from statsize.cell_library import read_library
from statsize.netlist_io import read_bench

DATA = Path(__file__).resolve().parents[1] / "src" / "statsize" / "data"


@pytest.fixture(scope="session")
def library():
    return read_library(DATA / "example.lib")


@pytest.fixture(scope="session")
def c432():
    return read_bench(DATA / "c432.bench")


@pytest.fixture(scope="session")
def c17():
    return read_bench(DATA / "c17.bench")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
