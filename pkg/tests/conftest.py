import numpy as np
import pytest

from helpers import ACCEPTANCE


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        lines = ACCEPTANCE[n]
        ok = all(o for o, _ in lines)
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {n}")
        for _, line in lines:
            terminalreporter.write_line("    " + line)
