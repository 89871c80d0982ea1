"""Region predicates, complete-full region enumeration and decompositions.

Two region definitions are supported. Under ``DISAGG`` every switch of a
partial-full region links to every node in it. Under ``REACH`` a region must
contain every node adjacent to all of its switches, and may hold other nodes
as well. A complete-full region (CFR) is a partial-full region that cannot
grow by adding nodes while keeping its switch set.

Both definitions fix the node side of a CFR once the switch set is chosen, so
enumeration walks candidate switch sets and closes each one on the node side.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Iterator, Sequence, Union

from .topology import NetworkGraph, TopologyError, UnknownVertex, connected_components

MAX_RID = 0xFFFF


class Variant(enum.Enum):
    DISAGG = "disagg"
    REACH = "reach"

    @classmethod
    def parse(cls, value: "Variant | str") -> "Variant":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class RegionError(ValueError):
    pass


class NotABasicRegion(RegionError):
    pass


class NotAPFR(RegionError):
    pass


class EmptyChildren(RegionError):
    pass


class CycleDetected(RegionError):
    pass


class UnknownRid(RegionError):
    def __init__(self, position: int, rid: int):
        self.position = position
        self.rid = rid
        super().__init__(f"unknown RID {rid} at path position {position}")


class AmbiguousRid(RegionError):
    def __init__(self, position: int, rid: int):
        self.position = position
        self.rid = rid
        super().__init__(f"ambiguous RID {rid} at path position {position}")


class RegionBudgetExceeded(RegionError):
    def __init__(self, partial: list["Region"], budget: int):
        self.partial = partial
        self.budget = budget
        super().__init__(f"more than {budget} complete-full regions")


class DecompositionError(RegionError):
    pass


@dataclass(frozen=True)
class Region:
    rid: int
    switches: frozenset[int]
    nodes: frozenset[int] = frozenset()

    def __post_init__(self):
        if not 1 <= self.rid <= MAX_RID:
            raise RegionError(f"RID {self.rid} outside 1..{MAX_RID}")
        if not self.switches:
            raise RegionError(f"region {self.rid} has no switches")
        object.__setattr__(self, "switches", frozenset(self.switches))
        object.__setattr__(self, "nodes", frozenset(self.nodes))

    @property
    def vertices(self) -> frozenset[int]:
        return self.switches | self.nodes

    def flatten(self) -> frozenset[int]:
        return self.vertices

    def leaves(self) -> list["Region"]:
        return [self]

    def __contains__(self, v: int) -> bool:
        return v in self.switches or v in self.nodes


@dataclass(frozen=True)
class HighLevelRegion:
    rid: int
    children: tuple["RegionRef", ...] = field(default=())

    def flatten(self) -> frozenset[int]:
        out: frozenset[int] = frozenset()
        for child in self.children:
            out |= child.flatten()
        return out

    @property
    def vertices(self) -> frozenset[int]:
        return self.flatten()

    def leaves(self) -> list[Region]:
        out: list[Region] = []
        for child in self.children:
            for leaf in child.leaves():
                if leaf not in out:
                    out.append(leaf)
        return out

    def __contains__(self, v: int) -> bool:
        return v in self.flatten()


RegionRef = Union[Region, HighLevelRegion]


# ---------------------------------------------------------------- predicates

def _check_members(graph: NetworkGraph, vs: Iterable[int]) -> frozenset[int]:
    vs = frozenset(vs)
    for v in vs:
        if v not in graph:
            raise UnknownVertex(f"unknown vertex {v}")
    return vs


def _is_connected(graph: NetworkGraph, vs: frozenset[int]) -> bool:
    return bool(vs) and len(connected_components(graph, vs)) == 1


def is_basic_region(graph: NetworkGraph, vs: Iterable[int]) -> bool:
    return _is_connected(graph, _check_members(graph, vs))


def _split(graph: NetworkGraph, vs: frozenset[int]) -> tuple[set[int], set[int]]:
    switches = {v for v in vs if graph.is_switch(v)}
    return switches, set(vs) - switches


def common_nodes(graph: NetworkGraph, switches: Iterable[int]) -> frozenset[int]:
    """Nodes of the graph adjacent to every switch in ``switches``."""
    switches = list(switches)
    if not switches:
        return frozenset(graph.nodes)
    common = {w for w in graph.neighbors(switches[0]) if graph.is_node(w)}
    for s in switches[1:]:
        common &= graph.neighbors(s)
    return frozenset(common)


def is_pfr(graph: NetworkGraph, vs: Iterable[int], variant: Variant | str = Variant.DISAGG) -> bool:
    vs = _check_members(graph, vs)
    variant = Variant.parse(variant)
    if not _is_connected(graph, vs):
        raise NotABasicRegion(f"{sorted(vs)} is not a basic region")
    switches, nodes = _split(graph, vs)
    if variant is Variant.DISAGG:
        return all(graph.has_link(s, n) for s in switches for n in nodes)
    return common_nodes(graph, switches) <= vs


def is_cfr(graph: NetworkGraph, vs: Iterable[int], variant: Variant | str = Variant.DISAGG) -> bool:
    vs = _check_members(graph, vs)
    variant = Variant.parse(variant)
    if not is_pfr(graph, vs, variant):
        raise NotAPFR(f"{sorted(vs)} is not a partial-full region")
    # A strict superset PFR with the same switches exists iff one adjacent
    # node can be added, so single-node extension is exhaustive here.
    outside = set()
    for v in vs:
        outside |= {w for w in graph.neighbors(v) if w not in vs and graph.is_node(w)}
    for n in sorted(outside):
        if is_pfr(graph, vs | {n}, variant):
            return False
    return True


# ---------------------------------------------------------------- enumeration

def _node_components(graph: NetworkGraph) -> dict[int, frozenset[int]]:
    comp_of = {}
    for comp in connected_components(graph, graph.nodes):
        fs = frozenset(comp)
        for n in comp:
            comp_of[n] = fs
    return comp_of


class _Closure:
    """Maps a switch set to its CFR vertex set under one variant."""

    def __init__(self, graph: NetworkGraph, variant: Variant):
        self.graph = graph
        self.variant = variant
        self.comp_of = _node_components(graph)
        self.switches = graph.switches
        self.adj: dict[int, set[int]] = {s: set() for s in self.switches}
        sw = set(self.switches)
        for s in self.switches:
            self.adj[s] |= {w for w in graph.neighbors(s) if w in sw}
        if variant is Variant.REACH:
            # switches touching the same node component are mutually reachable
            touching: dict[frozenset[int], set[int]] = {}
            for s in self.switches:
                for w in graph.neighbors(s):
                    if w in self.comp_of:
                        touching.setdefault(self.comp_of[w], set()).add(s)
            for group in touching.values():
                for s in group:
                    self.adj[s] |= group - {s}

    def close(self, switches: frozenset[int]) -> frozenset[int] | None:
        g = self.graph
        if self.variant is Variant.DISAGG:
            cn = common_nodes(g, switches)
            if cn:
                return switches | cn
            return switches if _is_connected(g, switches) else None
        nodes: set[int] = set()
        for s in switches:
            for w in g.neighbors(s):
                if w in self.comp_of:
                    nodes |= self.comp_of[w]
        vs = switches | nodes
        return frozenset(vs) if _is_connected(g, frozenset(vs)) else None

    def connected_switch_sets(self) -> Iterator[frozenset[int]]:
        """Every connected vertex set of the switch affinity graph, once each."""
        adj = self.adj

        def extend(sub: frozenset[int], ext: list[int], root: int, nbhd: frozenset[int]):
            yield sub
            ext = sorted(ext)
            while ext:
                w = ext.pop(0)
                excl = [u for u in adj[w] if u > root and u not in nbhd]
                yield from extend(sub | {w}, ext + excl, root, nbhd | adj[w] | {w})

        for v in self.switches:
            yield from extend(frozenset([v]), [u for u in adj[v] if u > v], v,
                              frozenset(adj[v]) | {v})

    def node_anchored_switch_sets(self, max_degree: int = 12) -> Iterator[frozenset[int]]:
        for n in self.graph.nodes:
            sn = sorted(w for w in self.graph.neighbors(n) if self.graph.is_switch(w))
            if len(sn) > max_degree:
                yield frozenset(sn)
                continue
            for size in range(1, len(sn) + 1):
                for combo in combinations(sn, size):
                    yield frozenset(combo)


def region_sort_key(vs: Iterable[int]) -> tuple:
    members = sorted(vs)
    return (members[0], len(members), tuple(members))


def enumerate_cfrs(graph: NetworkGraph, variant: Variant | str = Variant.DISAGG,
                   max_regions: int = 10_000) -> list[Region]:
    """All complete-full regions of ``graph``, with RIDs 1..n in sorted order.

    Raises :class:`RegionBudgetExceeded` carrying a partial, sorted result if
    more than ``max_regions`` distinct regions exist.
    """
    if max_regions < 1:
        raise ValueError("max_regions must be positive")
    variant = Variant.parse(variant)
    closure = _Closure(graph, variant)
    found: dict[frozenset[int], None] = {}

    def sources() -> Iterator[frozenset[int]]:
        if variant is Variant.DISAGG:
            # sets with a common node are connected through it
            yield from closure.node_anchored_switch_sets(max_degree=len(closure.switches))
        yield from closure.connected_switch_sets()

    truncated = False
    for s_set in sources():
        vs = closure.close(s_set)
        if vs is None or vs in found:
            continue
        if len(found) >= max_regions:
            truncated = True
            break
        found[vs] = None
    regions = [_region_from_set(graph, i, vs)
               for i, vs in enumerate(sorted(found, key=region_sort_key), start=1)]
    if truncated:
        raise RegionBudgetExceeded(regions, max_regions)
    return regions


def _region_from_set(graph: NetworkGraph, rid: int, vs: Iterable[int]) -> Region:
    switches, nodes = _split(graph, frozenset(vs))
    return Region(rid, frozenset(switches), frozenset(nodes))


def cfr_for_switches(graph: NetworkGraph, switches: Iterable[int],
                     variant: Variant | str = Variant.DISAGG) -> frozenset[int] | None:
    """Vertex set of the unique CFR with exactly ``switches``, or ``None``."""
    switches = frozenset(switches)
    if not switches or any(not graph.is_switch(s) for s in switches):
        return None
    return _Closure(graph, Variant.parse(variant)).close(switches)


# ---------------------------------------------------------------- hierarchy

def build_hcr(children: Iterable[RegionRef], rid: int) -> HighLevelRegion:
    children = tuple(children)
    if not children:
        raise EmptyChildren(f"HCR {rid} needs at least one child")
    if not 1 <= rid <= MAX_RID:
        raise RegionError(f"RID {rid} outside 1..{MAX_RID}")

    def walk(ref: RegionRef, trail: tuple[int, ...]):
        if isinstance(ref, HighLevelRegion):
            if ref.rid == rid:
                raise CycleDetected(f"HCR {rid} contains itself via {trail + (ref.rid,)}")
            for child in ref.children:
                walk(child, trail + (ref.rid,))

    for child in children:
        walk(child, (rid,))
    return HighLevelRegion(rid, children)


@dataclass
class RegionDecomposition:
    host: NetworkGraph
    regions: list[Region]
    hcrs: list[HighLevelRegion] = field(default_factory=list)
    variant: Variant = Variant.DISAGG

    def __post_init__(self):
        self.variant = Variant.parse(self.variant)
        self.regions = sorted(self.regions, key=lambda r: r.rid)

    @property
    def roots(self) -> list[RegionRef]:
        """Top-level entries: regions and HCRs that no HCR lists as a child."""
        nested = set()
        for h in self.hcrs:
            for child in h.children:
                nested.add(id(child))
        refs: list[RegionRef] = list(self.hcrs) + list(self.regions)
        return [r for r in refs if id(r) not in nested]

    def region(self, rid: int) -> Region:
        matches = [r for r in self.regions if r.rid == rid]
        if len(matches) != 1:
            raise (AmbiguousRid(0, rid) if matches else UnknownRid(0, rid))
        return matches[0]

    def hcr(self, rid: int) -> HighLevelRegion:
        matches = [h for h in self.hcrs if h.rid == rid]
        if len(matches) != 1:
            raise (AmbiguousRid(0, rid) if matches else UnknownRid(0, rid))
        return matches[0]

    def lookup(self, rid: int) -> RegionRef:
        """Leaf region or HCR by (unique) RID."""
        matches: list[RegionRef] = [r for r in self.regions if r.rid == rid]
        matches += [h for h in self.hcrs if h.rid == rid]
        if len(matches) != 1:
            raise (AmbiguousRid(0, rid) if matches else UnknownRid(0, rid))
        return matches[0]

    def members(self, rid: int) -> frozenset[int]:
        """Leaf RIDs satisfying ``rid`` (itself for a leaf, all leaves for an HCR)."""
        ref = self.lookup(rid)
        return frozenset(leaf.rid for leaf in ref.leaves())

    def regions_of(self, v: int) -> list[Region]:
        return [r for r in self.regions if v in r]

    def uncovered(self) -> list[int]:
        covered = set()
        for r in self.regions:
            covered |= r.vertices
        return [v for v in self.host if v not in covered]

    def problems(self) -> list[str]:
        out = []
        for r in self.regions:
            try:
                ok = is_cfr(self.host, r.vertices, self.variant)
            except (RegionError, TopologyError) as exc:
                out.append(f"region {r.rid}: {exc}")
                continue
            if not ok:
                out.append(f"region {r.rid}: not a complete-full region")
        for v in self.uncovered():
            out.append(f"vertex {v} is not covered by any region")
        for level in [self.roots] + [list(h.children) for h in self.hcrs]:
            rids = [c.rid for c in level]
            for rid in sorted({r for r in rids if rids.count(r) > 1}):
                out.append(f"sibling RID {rid} repeated")
        out += _cycle_problems(self.hcrs)
        return out

    def validate(self) -> None:
        problems = self.problems()
        if problems:
            raise DecompositionError("; ".join(problems))


def resolve_rid(decomp: RegionDecomposition, rid_path: Sequence[int]) -> RegionRef:
    """Walk ``rid_path`` (root first) down the hierarchy to a unique region."""
    if not rid_path:
        raise ValueError("rid_path must be nonempty")
    frontier: list[RegionRef] = list(decomp.roots)
    ambiguous_at = None
    for pos, rid in enumerate(rid_path):
        hits = [r for r in frontier if r.rid == rid]
        if not hits:
            raise UnknownRid(pos, rid)
        if len(hits) > 1 and ambiguous_at is None:
            ambiguous_at = pos
        if pos == len(rid_path) - 1:
            frontier = hits
            break
        frontier = [c for h in hits if isinstance(h, HighLevelRegion) for c in h.children]
    if len(frontier) > 1:
        pos = ambiguous_at if ambiguous_at is not None else len(rid_path) - 1
        raise AmbiguousRid(pos, rid_path[pos])
    return frontier[0]


def _cycle_problems(hcrs: Sequence[HighLevelRegion]) -> list[str]:
    out = []
    for h in hcrs:
        try:
            build_hcr(h.children, h.rid)
        except CycleDetected as exc:
            out.append(str(exc))
    return out


# ---------------------------------------------------------------- decomposition

def decompose(graph: NetworkGraph, variant: Variant | str = Variant.DISAGG,
              strategy: str = "cover", max_regions: int = 10_000) -> RegionDecomposition:
    """Build a covering decomposition from complete-full regions.

    ``strategy="all"`` keeps every CFR. ``strategy="cover"`` greedily picks
    node-anchored CFRs that cover the most new nodes, then the most new
    vertices, preferring fewer switches; RIDs are renumbered 1..n.
    """
    variant = Variant.parse(variant)
    if strategy == "all":
        regions = enumerate_cfrs(graph, variant, max_regions)
    elif strategy == "cover":
        regions = _greedy_cover(graph, variant)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    decomp = RegionDecomposition(graph, regions, [], variant)
    uncovered = decomp.uncovered()
    if uncovered:
        raise DecompositionError(f"vertices not covered by any region: {uncovered}")
    return decomp


def _greedy_cover(graph: NetworkGraph, variant: Variant) -> list[Region]:
    closure = _Closure(graph, variant)
    candidates: dict[frozenset[int], None] = {}
    singles = (frozenset([s]) for s in closure.switches)
    for s_set in list(closure.node_anchored_switch_sets()) + list(singles):
        vs = closure.close(s_set)
        if vs is not None:
            candidates.setdefault(vs, None)
    pool = sorted(candidates, key=region_sort_key)
    node_set = set(graph.nodes)
    covered: set[int] = set()
    chosen = []
    while True:
        best, best_score = None, None
        for vs in pool:
            new = vs - covered
            if not new:
                continue
            score = (len(new & node_set), len(new), -len(vs - node_set))
            if best_score is None or score > best_score:
                best, best_score = vs, score
        if best is None:
            break
        chosen.append(best)
        covered |= best
    return [_region_from_set(graph, i, vs)
            for i, vs in enumerate(sorted(chosen, key=region_sort_key), start=1)]


def _ids(tok: str) -> list[int]:
    if tok in ("-", ""):
        return []
    return [int(t, 10) for t in tok.split(",") if t]


def parse_decomposition(text: str, graph: NetworkGraph,
                        variant: Variant | str = Variant.DISAGG,
                        validate: bool = True) -> RegionDecomposition:
    """Read ``region``/``hcr`` statements; RIDs must be unique within a file.

    With ``validate`` the result must cover the graph with complete-full
    regions (:meth:`RegionDecomposition.validate`).
    """
    variant = Variant.parse(variant)
    regions: dict[int, Region] = {}
    hcr_children: dict[int, list[int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        try:
            if toks[0] == "variant" and len(toks) == 2:
                variant = Variant.parse(toks[1])
            elif toks[0] == "region" and len(toks) in (4, 6) and toks[2] == "switches":
                rid = int(toks[1])
                nodes = _ids(toks[5]) if len(toks) == 6 and toks[4] == "nodes" else []
                if len(toks) == 6 and toks[4] != "nodes":
                    raise ValueError("expected 'nodes'")
                if rid in regions or rid in hcr_children:
                    raise ValueError(f"duplicate RID {rid}")
                regions[rid] = Region(rid, frozenset(_ids(toks[3])), frozenset(nodes))
            elif toks[0] == "hcr" and len(toks) == 4 and toks[2] == "children":
                rid = int(toks[1])
                if rid in regions or rid in hcr_children:
                    raise ValueError(f"duplicate RID {rid}")
                hcr_children[rid] = _ids(toks[3])
            else:
                raise ValueError(f"malformed statement {line!r}")
        except (ValueError, RegionError) as exc:
            raise DecompositionError(f"line {lineno}: {exc}") from None
    for r in regions.values():
        for v in r.vertices:
            if v not in graph:
                raise DecompositionError(f"region {r.rid} names unknown vertex {v}")
        if any(not graph.is_switch(s) for s in r.switches) or any(graph.is_switch(n) for n in r.nodes):
            raise DecompositionError(f"region {r.rid} mixes up switches and nodes")

    built: dict[int, HighLevelRegion] = {}

    def build(rid: int, stack: tuple[int, ...]) -> HighLevelRegion:
        if rid in stack:
            raise CycleDetected(f"HCR cycle {' -> '.join(map(str, stack + (rid,)))}")
        if rid in built:
            return built[rid]
        kids: list[RegionRef] = []
        for c in hcr_children[rid]:
            if c in regions:
                kids.append(regions[c])
            elif c in hcr_children:
                kids.append(build(c, stack + (rid,)))
            else:
                raise DecompositionError(f"HCR {rid} names unknown child {c}")
        built[rid] = build_hcr(kids, rid)
        return built[rid]

    for rid in hcr_children:
        build(rid, ())
    decomp = RegionDecomposition(graph, list(regions.values()),
                                 [built[r] for r in sorted(built)], variant)
    if validate:
        decomp.validate()
    return decomp


def serialize_decomposition(decomp: RegionDecomposition) -> str:
    def ids(values: Iterable[int]) -> str:
        values = sorted(values)
        return ",".join(map(str, values)) if values else "-"

    out = [f"variant {decomp.variant.value}"]
    for r in decomp.regions:
        out.append(f"region {r.rid} switches {ids(r.switches)} nodes {ids(r.nodes)}")
    for h in sorted(decomp.hcrs, key=lambda h: h.rid):
        out.append(f"hcr {h.rid} children {ids(c.rid for c in h.children)}")
    return "\n".join(out) + "\n"


def load_decomposition(path, graph: NetworkGraph, variant: Variant | str = Variant.DISAGG,
                       validate: bool = True) -> RegionDecomposition:
    with open(path, encoding="utf-8") as fh:
        return parse_decomposition(fh.read(), graph, variant, validate)
