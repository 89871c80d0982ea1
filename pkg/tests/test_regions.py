import random
from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import A, C, E, F, G, H, M, R, S, fixture_text
from oracles import MaskGraph, brute_force_cfrs, pfr_mask, random_graph
from smartregion.regions import (
    AmbiguousRid,
    CycleDetected,
    DecompositionError,
    EmptyChildren,
    HighLevelRegion,
    NotABasicRegion,
    NotAPFR,
    Region,
    RegionBudgetExceeded,
    RegionDecomposition,
    UnknownRid,
    Variant,
    build_hcr,
    common_nodes,
    decompose,
    enumerate_cfrs,
    is_basic_region,
    is_cfr,
    is_pfr,
    parse_decomposition,
    resolve_rid,
    serialize_decomposition,
)
from smartregion.topology import NetworkGraph, UnknownVertex, parse_topology


def two_switch_graph(extra_node=False):
    nodes = [10, 11] if extra_node else [10]
    links = [(1, 2), (1, 10)] + ([(1, 11), (2, 11)] if extra_node else [])
    return NetworkGraph.build(nodes=nodes, switches=[1, 2], links=links)


def test_basic_region():
    g = NetworkGraph.build(nodes=[3], switches=[1, 2], links=[(1, 2), (2, 3), (1, 3)])
    assert is_basic_region(g, {1})
    assert is_basic_region(g, {1, 2, 3})
    g2 = NetworkGraph.build(switches=[1, 2])
    assert not is_basic_region(g2, {1, 2})
    assert not is_basic_region(g2, set())
    with pytest.raises(UnknownVertex):
        is_basic_region(g2, {9})


def test_pfr_examples():
    g = NetworkGraph.build(nodes=[10], switches=[1], links=[(1, 10)])
    for variant in Variant:
        assert is_pfr(g, {1, 10}, variant)
    g = two_switch_graph()
    assert not is_pfr(g, {1, 2, 10}, Variant.DISAGG)
    assert is_pfr(g, {1, 2, 10}, Variant.REACH)
    g = two_switch_graph(extra_node=True)
    # 11 is adjacent to both switches and must be a member
    assert not is_pfr(g, {1, 2, 10}, Variant.REACH)
    assert is_pfr(g, {1, 2, 10, 11}, Variant.REACH)
    with pytest.raises(NotABasicRegion):
        is_pfr(g, {2, 10}, Variant.DISAGG)


def test_cfr_examples():
    g = NetworkGraph.build(nodes=[10, 11], switches=[1], links=[(1, 10), (1, 11)])
    assert is_cfr(g, {1, 10, 11})
    assert not is_cfr(g, {1, 10})
    g2 = two_switch_graph()
    with pytest.raises(NotAPFR):
        is_cfr(g2, {1, 2, 10}, Variant.DISAGG)


def test_star_has_one_region():
    g = parse_topology(fixture_text("star.topo"))
    (region,) = enumerate_cfrs(g, Variant.DISAGG)
    assert region.vertices == frozenset(g)


def test_bcube_regions_overlap(bcube_graph):
    cfrs = enumerate_cfrs(bcube_graph, Variant.DISAGG)
    assert all(is_cfr(bcube_graph, r.vertices, Variant.DISAGG) for r in cfrs)
    left = next(r for r in cfrs if r.switches == {11})
    pair = next(r for r in cfrs if r.switches == {21})
    assert left.nodes == {1, 2, 3, 4} and pair.nodes == {1, 5}
    assert left.nodes & pair.nodes == {1}
    # the two full regions of the level-0 switches share no node, but both
    # overlap every pairing-switch region
    assert len(cfrs) == 34
    assert len(enumerate_cfrs(bcube_graph, Variant.REACH)) == 206


def test_rids_are_sorted_and_deterministic(bcube_graph):
    a = enumerate_cfrs(bcube_graph)
    b = enumerate_cfrs(bcube_graph)
    assert a == b
    assert [r.rid for r in a] == list(range(1, len(a) + 1))
    keys = [(min(r.vertices), len(r.vertices)) for r in a]
    assert keys == sorted(keys)


def test_budget_carries_partial(bcube_graph):
    with pytest.raises(RegionBudgetExceeded) as err:
        enumerate_cfrs(bcube_graph, max_regions=5)
    assert len(err.value.partial) == 5


@pytest.mark.parametrize("variant", ["disagg", "reach"])
def test_enumeration_matches_exhaustive_oracle(variant):
    rng = random.Random(7 if variant == "disagg" else 8)
    for _ in range(60):
        g = random_graph(rng, max_vertices=10)
        got = {r.vertices for r in enumerate_cfrs(g, variant)}
        assert got == brute_force_cfrs(g, variant)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(["disagg", "reach"]))
def test_enumerated_regions_are_self_consistent(seed, variant):
    g = random_graph(random.Random(seed), max_vertices=10)
    for r in enumerate_cfrs(g, variant):
        assert is_pfr(g, r.vertices, variant) and is_cfr(g, r.vertices, variant)
        adjacent_to_all = common_nodes(g, r.switches)
        if variant == "reach":
            assert adjacent_to_all <= r.nodes
        else:
            for n in g.nodes:
                if n not in r.vertices:
                    assert not is_pfr(g, r.vertices | {n}, variant) if is_basic_region(g, r.vertices | {n}) else True


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32))
def test_is_cfr_agrees_with_superset_search(seed):
    g = random_graph(random.Random(seed), max_vertices=10)
    mg = MaskGraph(g)
    for s in g.switches:
        vs = frozenset({s})
        if not is_pfr(g, vs, "disagg"):
            continue
        others = [n for n in g.nodes if n not in vs]
        bigger = any(
            pfr_mask(mg, sum(1 << mg.index[v] for v in vs | set(extra)), "disagg")
            for k in range(1, len(others) + 1) for extra in combinations(others, k))
        assert is_cfr(g, vs, "disagg") == (not bigger)


def test_build_hcr(fig5_decomp):
    a = fig5_decomp.region(A)
    assert build_hcr([a], 40).flatten() == a.vertices
    m = fig5_decomp.hcr(M)
    union = frozenset().union(*(fig5_decomp.region(r).vertices for r in (A, C, E, F, G, H)))
    assert m.flatten() == union
    with pytest.raises(EmptyChildren):
        build_hcr([], 40)
    inner = HighLevelRegion(41, (HighLevelRegion(40, (a,)),))
    with pytest.raises(CycleDetected):
        build_hcr([inner], 40)


def test_resolve_rid(fig5_decomp):
    assert resolve_rid(fig5_decomp, [S]).rid == S
    assert resolve_rid(fig5_decomp, [M, A]) is fig5_decomp.region(A)
    with pytest.raises(UnknownRid) as err:
        resolve_rid(fig5_decomp, [M, R])
    assert err.value.position == 1


def test_sibling_rids_are_ambiguous():
    g = NetworkGraph.build(switches=[1, 2], links=[(1, 2)])
    r1 = Region(7, frozenset({1}))
    r2 = Region(7, frozenset({2}))
    d = RegionDecomposition(g, [r1, r2], [HighLevelRegion(9, (r1, r2))], Variant.DISAGG)
    with pytest.raises(AmbiguousRid) as err:
        resolve_rid(d, [9, 7])
    assert err.value.position == 1


def test_fig5_decomposition_is_valid(fig5_decomp):
    fig5_decomp.validate()
    assert {r.rid for r in fig5_decomp.regions} == {A, C, E, F, G, H, R, S}
    assert fig5_decomp.members(M) == {A, C, E, F, G, H}


def test_uncovered_vertex_fails_validation():
    g = NetworkGraph.build(nodes=[5], switches=[1, 2], links=[(1, 5), (1, 2)])
    d = RegionDecomposition(g, [Region(1, frozenset({1}), frozenset({5}))])
    with pytest.raises(DecompositionError, match="vertex 2"):
        d.validate()


def test_decompose_covers_and_round_trips(bcube_graph, fig5_graph):
    for g in (bcube_graph, fig5_graph):
        for variant in Variant:
            d = decompose(g, variant)
            d.validate()
            text = serialize_decomposition(d)
            again = parse_decomposition(text, g, variant)
            assert serialize_decomposition(again) == text


def test_greedy_cover_reproduces_fig5(fig5_graph, fig5_decomp):
    d = decompose(fig5_graph, Variant.DISAGG)
    assert {r.vertices for r in d.regions} == {r.vertices for r in fig5_decomp.regions}


def test_star_decomposition_file():
    g = parse_topology(fixture_text("star.topo"))
    assert serialize_decomposition(decompose(g)) == "variant disagg\nregion 1 switches 1 nodes 2,3,4,5\n"


def test_decomposition_file_errors(fig5_graph):
    for text in ("region 1 switches 191 nodes 1191,1192\nregion 1 switches 31,32 nodes 1031\n",
                 "region 1 switches 191 nodes 1191\n",          # not complete-full
                 "hcr 40 children 41\nhcr 41 children 40\n",
                 "bogus 1\n"):
        with pytest.raises(ValueError):
            parse_decomposition(text, fig5_graph)
