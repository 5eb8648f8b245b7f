import numpy as np
import pytest
from scipy.linalg import expm


def ladder(dim):
    return np.diag(np.sqrt(np.arange(1, dim)), 1)


def dense_displacement(alpha, dim):
    """exp(alpha a^dag - alpha* a) in a truncated space (accurate in the top-left block)."""
    a = ladder(dim)
    return expm(alpha * a.T - np.conj(alpha) * a)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
