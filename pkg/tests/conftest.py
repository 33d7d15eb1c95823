import re
import sys

import numpy as np
import pytest
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays


def random_spd(rng, p, jitter=0.1):
    A = rng.standard_normal((p, p))
    return A @ A.T / p + jitter * np.eye(p)


def random_symmetric(rng, p):
    A = rng.standard_normal((p, p))
    return 0.5 * (A + A.T)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


@st.composite
def symmetric_matrices(draw, min_p=2, max_p=8):
    p = draw(st.integers(min_p, max_p))
    A = draw(arrays(np.float64, (p, p), elements=finite))
    return 0.5 * (A + A.T)


@st.composite
def spd_matrices(draw, min_p=3, max_p=8):
    p = draw(st.integers(min_p, max_p))
    A = draw(arrays(np.float64, (p + 2, p), elements=finite))
    return A.T @ A / (p + 2) + 0.05 * np.eye(p)


def _natural(key):
    return [int(t) if t.isdigit() else t for t in re.split(r"(\d+)", key)]


def pytest_terminal_summary(terminalreporter):
    test_acceptance = sys.modules.get("tests.test_acceptance")
    if test_acceptance is None or not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(test_acceptance.RESULTS, key=_natural):
        ok, detail = test_acceptance.RESULTS[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
