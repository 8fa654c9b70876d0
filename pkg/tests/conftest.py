import pytest

from multicover.hypergraph import Hypergraph

_ACCEPTANCE: list[str] = []


@pytest.fixture
def h_a():
    # Triangle plus the full triple, every demand 2.
    return Hypergraph(3, [(0, 1), (1, 2), (0, 2), (0, 1, 2)], [2, 2, 2])


@pytest.fixture
def two_loops():
    # One vertex, two singleton edges, demand 2: every edge is forced.
    return Hypergraph(1, [(0,), (0,)], [2])


@pytest.fixture
def disjoint():
    # Pairwise disjoint edges. Too thin to be a multicover instance, used
    # for matchings only.
    return Hypergraph(5, [(0, 1), (2, 3), (4,)], [2] * 5)


@pytest.fixture
def acceptance():
    """Record one summary line per acceptance criterion."""

    def record(number: int, name: str, passed: bool, detail: str = "") -> bool:
        status = "PASS" if passed else "FAIL"
        _ACCEPTANCE.append(f"[{status}] criterion {number}: {name}" + (f"  ({detail})" if detail else ""))
        print(_ACCEPTANCE[-1])
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
