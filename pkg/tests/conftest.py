import time

import numpy as np
import pytest

from sparsela.matcore import binomial

# criterion number -> (ok, detail), filled by test_acceptance.py
ACCEPTANCE = {}
SUITE_LIMIT = 60.0
_start = time.perf_counter()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def B3():
    return binomial(3)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    elapsed = time.perf_counter() - _start
    if 13 in ACCEPTANCE and elapsed >= SUITE_LIMIT:
        ok, detail = ACCEPTANCE[13]
        ACCEPTANCE[13] = (False, f"{detail}; suite took {elapsed:.0f} s")
    terminalreporter.section("acceptance criteria")
    terminalreporter.write_line(f"suite runtime {elapsed:.1f} s (limit {SUITE_LIMIT:.0f} s, part of criterion 13)")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
