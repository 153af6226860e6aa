import numpy as np
import pytest

from topostat import SimplicialComplex, random_complex


def pytest_configure(config):
    config._acceptance_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_acceptance_lines", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture
def report(request):
    """report(n, name, ok, detail) records a PASS/FAIL line and asserts ok."""

    def _report(n, name, ok, detail=""):
        line = f"{'PASS' if ok else 'FAIL'} {n}: {name}" + (f" ({detail})" if detail else "")
        print(line)
        request.config._acceptance_lines.append(line)
        assert ok, line

    return _report


@pytest.fixture
def triangle():
    return SimplicialComplex.from_simplices([(0, 1, 2)])


@pytest.fixture
def hollow_square():
    # four edges around a square plus one filled triangle glued on: beta_1 = 1
    return SimplicialComplex.from_simplices([(0, 1), (1, 2), (2, 3), (0, 3), (1, 2, 4)])


@pytest.fixture(scope="session")
def small_complex():
    return random_complex(12, 0.45, 0.5, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
