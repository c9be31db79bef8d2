import json
import sys

import pytest
from hypothesis import settings

from qserre.cartan import symmetrize

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

A2 = [[2, -1], [-1, 2]]
B2 = [[2, -1], [-2, 2]]
G2 = [[2, -1], [-3, 2]]
AFFINE = [[2, -2], [-2, 2]]


@pytest.fixture
def a2():
    return symmetrize(A2)


@pytest.fixture
def b2():
    return symmetrize(B2)


@pytest.fixture
def g2():
    return symmetrize(G2)


@pytest.fixture
def cartan_file(tmp_path):
    def write(a, name="cartan.json"):
        p = tmp_path / name
        p.write_text(json.dumps({"a": a}))
        return str(p)
    return write


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for n in sorted(lines):
            terminalreporter.write_line(lines[n])
