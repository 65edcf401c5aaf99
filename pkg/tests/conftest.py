import numpy as np
import pytest

from phasegate.gate import DEFAULT_OMEGA, build_gate, run_gate

ACCEPTANCE_LINES = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES, key=lambda item: item[0]):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def omega():
    return DEFAULT_OMEGA


@pytest.fixture(scope="session")
def fig3c(omega):
    """Compensated gate, T = 0.8 us, gamma = 0.1 omega."""
    cfg = build_gate(omega, 0.1 * omega, 0.8)
    return cfg, run_gate(cfg)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
