import numpy as np
import pytest
from hypothesis import strategies as st

from penscore.scoring import LabelBatch, PredictionBatch

# acceptance outcomes, filled by test_acceptance and echoed in the summary
ACCEPTANCE: dict = {}


@st.composite
def prob_rows(draw, c=None, n=None, allow_zero=True):
    """(n x c) matrix of probability rows plus true classes."""
    c = draw(st.integers(2, 8)) if c is None else c
    n = draw(st.integers(1, 12)) if n is None else n
    lo = 0.0 if allow_zero else 1e-3
    raw = draw(st.lists(st.lists(st.floats(lo, 1.0), min_size=c, max_size=c), min_size=n, max_size=n))
    arr = np.array(raw) + 1e-12
    arr = arr / arr.sum(axis=1, keepdims=True)
    true = draw(st.lists(st.integers(0, c - 1), min_size=n, max_size=n))
    return arr, np.array(true)


def batch(rows, true):
    rows = np.atleast_2d(np.asarray(rows, dtype=float))
    return PredictionBatch(rows), LabelBatch.from_classes(np.atleast_1d(true), rows.shape[1])


@pytest.fixture
def motivation():
    """The two-row example: A is correct for class 1, B is not."""
    A = [0.33, 0.34, 0.33]
    B = [0.51, 0.49, 0.0]
    return A, B


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
