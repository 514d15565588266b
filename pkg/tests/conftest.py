import pytest

from chasm.core.circuit import CircuitBuilder


@pytest.fixture
def small_circuit():
    """x0*x1 + 2 over GF(101)."""
    b = CircuitBuilder(2, 101)
    x, y = b.var(0), b.var(1)
    return b.build(b.add(b.mul(x, y), b.const(2)))


def pytest_terminal_summary(terminalreporter):
    """Collect the one-line verdicts printed by the acceptance tests."""
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if "test_acceptance.py" in rep.nodeid and rep.when == "call":
                lines += [ln for ln in rep.capstdout.splitlines()
                          if ln.startswith(("PASS", "FAIL"))]
    if lines:
        terminalreporter.section("acceptance criteria")
        for ln in sorted(lines, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(ln)
