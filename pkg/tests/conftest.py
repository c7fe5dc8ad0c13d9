import sys

import numpy as np
import pytest
from hypothesis import settings

from serieslab.core import Alphabet, SymbolSequence

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def seq_from(text, size=None):
    """Sequence from a string of digits or letters; letters map a->0, b->1, ..."""
    if text.isdigit():
        data = [int(c) for c in text]
    else:
        data = [ord(c) - ord("a") for c in text]
    size = size or max(2, max(data) + 1)
    return SymbolSequence(Alphabet(size), np.array(data))


@pytest.fixture
def make_seq():
    return seq_from


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
