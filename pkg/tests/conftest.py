import numpy as np
import pytest

from racsim.radial import DiscreteRadial, GalambosRadial, HarmonicRadial


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(
    params=[
        ("galambos", 1.0, 2),
        ("galambos", 0.5, 3),
        ("galambos", 2.0, 2),
        ("harmonic", 0.5, 2),
        ("harmonic", 0.025, 2),
        ("discrete", None, 2),
    ],
    ids=lambda p: f"{p[0]}-{p[1]}-{p[2]}",
)
def measure(request):
    kind, theta, d = request.param
    if kind == "galambos":
        return GalambosRadial(theta, d)
    if kind == "harmonic":
        return HarmonicRadial(theta)
    return DiscreteRadial([3.0, 2.0, 1.0, 0.5, 0.1], [0.5, 1.0, 0.0, 2.0, 1.5])


_ACCEPTANCE = []


@pytest.fixture(scope="session")
def acceptance_log():
    """Collects one ``(criterion, passed, detail)`` line per acceptance criterion."""
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, name, passed, detail in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {number}. {name}: {detail}")
