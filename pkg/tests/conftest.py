import numpy as np
import pytest
from hypothesis import settings

from ccmsp.model import Instance, Variant

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

ACCEPTANCE_LINES = []


class ScriptedRng:
    """Stand-in for numpy's Generator that replays fixed draws."""

    def __init__(self, ints=(), reals=()):
        self.ints = list(ints)
        self.reals = list(reals)

    def integers(self, high, *args, **kwargs):
        v = self.ints.pop(0)
        assert 0 <= v < high
        return v

    def random(self, size=None):
        if size is None:
            return self.reals.pop(0)
        out, self.reals = self.reals[:size], self.reals[size:]
        return np.asarray(out, dtype=float)


@pytest.fixture
def k2m2():
    return Instance((2, 2), 100.0, 0.01, 0.01, 0.05, Variant.CCMSP1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
