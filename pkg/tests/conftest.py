import random

import pytest
from hypothesis import settings

from namikawa.generators import random_graph, random_polarization
from namikawa.graph import MetricGraph
from namikawa.io import load_fixture

settings.register_profile("default", max_examples=40, deadline=None, derandomize=True)
settings.load_profile("default")


@pytest.fixture(scope="session")
def l2():
    return load_fixture("l2")


@pytest.fixture(scope="session")
def tri():
    return load_fixture("triangle")


@pytest.fixture(scope="session")
def db():
    return load_fixture("dumbbell")


@pytest.fixture(scope="session")
def fixtures(l2, tri, db):
    return {"l2": l2, "triangle": tri, "dumbbell": db}


def tree_graph() -> MetricGraph:
    return MetricGraph.build([("a", 1), ("b", 0), ("c", 2)], [("t1", "a", "b", "1/2"), ("t2", "b", "c", 3)])


def random_problems(count: int, seed: int):
    """Seeded (graph, polarization) pairs in the acceptance size range."""
    rng = random.Random(seed)
    out = []
    for _ in range(count):
        G = random_graph(rng, max_vertices=4, max_edges=6, max_den=7)
        out.append((G, random_polarization(rng, G, max_entry=3)))
    return out


# one line per acceptance criterion, printed after the run
ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def acceptance():
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
