from importlib.resources import files

import pytest

from smartregion.region_map import build_region_graph
from smartregion.regions import Variant, parse_decomposition
from smartregion.topology import parse_topology

FIXTURES = files("smartregion") / "fixtures"

# letter names of the regions in the bundled nine-region fixture
A, C, E, F, G, H, M, R, S = 1, 3, 5, 6, 7, 8, 13, 18, 19


def fixture_text(name: str) -> str:
    return (FIXTURES / name).read_text(encoding="utf-8")


@pytest.fixture(scope="session")
def fig5_graph():
    return parse_topology(fixture_text("fig5.topo"))


@pytest.fixture(scope="session")
def fig5_decomp(fig5_graph):
    return parse_decomposition(fixture_text("fig5.regions"), fig5_graph, Variant.DISAGG)


@pytest.fixture(scope="session")
def fig5_rgraph(fig5_graph, fig5_decomp):
    return build_region_graph(fig5_graph, fig5_decomp)


@pytest.fixture(scope="session")
def bcube_graph():
    return parse_topology(fixture_text("bcube16.topo"))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[n])
