"""Region graphs, per-origin region maps and inter-region path enumeration.

Latency along a region path is the sum of the crossing links between
consecutive regions plus the switch-level transit inside every intermediate
region. Loss composes as ``1 - prod(1 - l_i)`` over the same links. The
origin's own transit and the destination's delivery leg are not counted.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence, Union

from .regions import HighLevelRegion, Region, RegionDecomposition, RegionError
from .topology import NetworkGraph


class UnknownRegion(RegionError):
    pass


class NoPath(RegionError):
    pass


class NotInRegion(RegionError):
    pass


@dataclass(frozen=True, order=True)
class Witness:
    """Evidence for an adjacency: a shared vertex or a crossing link.

    ``a`` lies in the lower-RID region and ``b`` in the other; for a shared
    vertex ``a == b``.
    """

    a: int
    b: int

    @property
    def shared(self) -> bool:
        return self.a == self.b


@dataclass(frozen=True)
class QosMeasures:
    path_latency: int = 0
    path_loss: float = 0.0
    hop_count: int = 0

    def __post_init__(self):
        if self.path_latency < 0 or self.hop_count < 0 or not 0.0 <= self.path_loss <= 1.0:
            raise ValueError(f"invalid QoS measures {self}")

    @property
    def key(self) -> tuple:
        return (self.path_latency, self.path_loss)


@dataclass(frozen=True, order=True)
class RegionInstance:
    """One internal switch path through a region, written ``R<rid>@P<n>``."""

    region: int
    path_label: str
    switches: tuple[int, ...] = field(default=(), compare=False)
    latency: int = field(default=0, compare=False)

    def __str__(self) -> str:
        return f"{self.region}@{self.path_label}"


Hop = Union[int, RegionInstance]


def rid_of(hop: Hop) -> int:
    return hop.region if isinstance(hop, RegionInstance) else hop


def hop_key(hop: Hop) -> tuple:
    if isinstance(hop, RegionInstance):
        return (hop.region, int(hop.path_label[1:]))
    return (hop, 0)


@dataclass(frozen=True)
class RegionPath:
    """Loop-free region sequence, origin first."""

    hops: tuple[Hop, ...]
    qos: QosMeasures = field(default=QosMeasures(), compare=False)

    def __post_init__(self):
        object.__setattr__(self, "hops", tuple(self.hops))
        rids = self.rids
        if len(set(rids)) != len(rids):
            raise ValueError(f"region path {rids} repeats a region")

    @property
    def rids(self) -> tuple[int, ...]:
        return tuple(rid_of(h) for h in self.hops)

    @property
    def tail(self) -> tuple[Hop, ...]:
        return self.hops[1:]

    @property
    def sort_key(self) -> tuple:
        return (len(self.hops) - 1, self.qos.path_latency, self.qos.path_loss,
                tuple(hop_key(h) for h in self.hops))

    def __len__(self) -> int:
        return len(self.hops)

    def __iter__(self):
        return iter(self.hops)

    def __str__(self) -> str:
        return "{" + ",".join(str(h) for h in self.hops) + "}"


@dataclass(frozen=True)
class _Crossing:
    egress: int
    ingress: int
    latency: int
    survival: float


class RegionGraph:
    """Leaf regions of a decomposition as vertices.

    Two regions are adjacent when they share a vertex or a link joins them.
    Only shared switches and switch-to-switch links can carry packets, so
    path search runs over :meth:`transit_neighbors`.
    """

    def __init__(self, graph: NetworkGraph, decomp: RegionDecomposition):
        self.host = graph
        self.decomp = decomp
        self.regions: dict[int, Region] = {}
        for r in decomp.regions:
            if r.rid in self.regions:
                raise RegionError(f"leaf RID {r.rid} is not unique")
            self.regions[r.rid] = r
        self.border: dict[tuple[int, int], list[Witness]] = {}
        self._crossings: dict[tuple[int, int], list[_Crossing]] = {}
        self._transit: dict[int, set[int]] = {rid: set() for rid in self.regions}
        self._internal: dict[int, dict[int, list[tuple[int, int]]]] = {}
        self._build()

    def _build(self):
        g = self.host
        rids = sorted(self.regions)
        for i, ra in enumerate(rids):
            A = self.regions[ra]
            for rb in rids[i + 1:]:
                B = self.regions[rb]
                wit = {Witness(v, v) for v in A.vertices & B.vertices}
                for u in A.vertices:
                    for w in g.neighbors(u):
                        if w in B.vertices and u not in B.vertices and w not in A.vertices:
                            wit.add(Witness(u, w))
                if wit:
                    self.border[(ra, rb)] = sorted(wit)
                    self._add_crossings(ra, rb, sorted(wit))
        for rid, r in self.regions.items():
            adj: dict[int, list[tuple[int, int]]] = {s: [] for s in r.switches}
            for s in r.switches:
                for w in g.neighbors(s):
                    if w in r.switches:
                        adj[s].append((w, g.link(s, w).latency))
            self._internal[rid] = {s: sorted(v) for s, v in adj.items()}

    def _add_crossings(self, ra: int, rb: int, witnesses: list[Witness]):
        g = self.host
        fwd, back = [], []
        for w in witnesses:
            if w.shared:
                if g.is_switch(w.a):
                    fwd.append(_Crossing(w.a, w.a, 0, 1.0))
                    back.append(_Crossing(w.a, w.a, 0, 1.0))
            elif g.is_switch(w.a) and g.is_switch(w.b):
                link = g.link(w.a, w.b)
                fwd.append(_Crossing(w.a, w.b, link.latency, 1.0 - link.loss_probability))
                back.append(_Crossing(w.b, w.a, link.latency, 1.0 - link.loss_probability))
        if fwd:
            self._crossings[(ra, rb)] = sorted(fwd, key=lambda c: (c.latency, -c.survival, c.egress, c.ingress))
            self._crossings[(rb, ra)] = sorted(back, key=lambda c: (c.latency, -c.survival, c.egress, c.ingress))
            self._transit[ra].add(rb)
            self._transit[rb].add(ra)

    # -- structure

    def __contains__(self, rid: int) -> bool:
        return rid in self.regions

    def _need(self, rid: int):
        if rid not in self.regions:
            raise UnknownRegion(f"unknown region {rid}")

    @property
    def edges(self) -> set[frozenset[int]]:
        return {frozenset(k) for k in self.border}

    def adjacent(self, a: int, b: int) -> bool:
        return (min(a, b), max(a, b)) in self.border

    def neighbors(self, rid: int) -> list[int]:
        self._need(rid)
        out = set()
        for a, b in self.border:
            if a == rid:
                out.add(b)
            elif b == rid:
                out.add(a)
        return sorted(out)

    def transit_neighbors(self, rid: int) -> list[int]:
        self._need(rid)
        return sorted(self._transit[rid])

    def crossings(self, a: int, b: int) -> list[tuple[int, int, int]]:
        """``(egress switch in a, ingress switch in b, latency)`` options, best first."""
        return [(c.egress, c.ingress, c.latency) for c in self._crossings.get((a, b), [])]

    def border_switches(self, a: int, b: int) -> list[int]:
        return sorted({c.egress for c in self._crossings.get((a, b), [])})

    def reachable(self, src: int) -> set[int]:
        self._need(src)
        seen = {src}
        stack = [src]
        while stack:
            v = stack.pop()
            for w in self._transit[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    def hop_distances(self, src: int) -> dict[int, int]:
        self._need(src)
        dist = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for v in frontier:
                for w in sorted(self._transit[v]):
                    if w not in dist:
                        dist[w] = dist[v] + 1
                        nxt.append(w)
            frontier = nxt
        return dist

    def diameter(self) -> int:
        best = 0
        for rid in self.regions:
            best = max(best, max(self.hop_distances(rid).values()))
        return best

    # -- intra-region

    def transit(self, rid: int, ingress: int, egress: int) -> tuple[int, float] | None:
        """Least-latency switch walk inside ``rid``: ``(latency, survival)``."""
        if ingress == egress:
            return (0, 1.0)
        adj = self._internal[rid]
        best = {ingress: (0, -1.0)}
        heap = [(0, -1.0, ingress)]
        while heap:
            lat, negsurv, v = heapq.heappop(heap)
            if (lat, negsurv) > best.get(v, (lat, negsurv)):
                continue
            if v == egress:
                return (lat, -negsurv)
            for w, l in adj.get(v, ()):
                link = self.host.link(v, w)
                cand = (lat + l, negsurv * (1.0 - link.loss_probability))
                if w not in best or cand < best[w]:
                    best[w] = cand
                    heapq.heappush(heap, (cand[0], cand[1], w))
        return None

    def instances(self, prev: int, rid: int, nxt: int) -> list[RegionInstance]:
        """Internal switch paths of ``rid`` between its borders with ``prev`` and ``nxt``."""
        ins = sorted({c.ingress for c in self._crossings.get((prev, rid), [])})
        outs = sorted({c.egress for c in self._crossings.get((rid, nxt), [])})
        paths = []
        for i in ins:
            for e in outs:
                paths += _simple_switch_paths(self.host, self.regions[rid], i, e)
        return _label(rid, self.host, paths)

    # -- QoS

    def path_qos(self, hops: Sequence[Hop], start_switch: int | None = None) -> QosMeasures | None:
        """Best QoS along ``hops`` or ``None`` if some leg cannot be crossed.

        A :class:`RegionInstance` pins the transit of that region to its own
        switch path.
        """
        rids = [rid_of(h) for h in hops]
        for r in rids:
            self._need(r)
        # state: ingress switch of the current region -> (latency, -survival)
        if start_switch is None:
            states = {None: (0, -1.0)}
        else:
            states = {start_switch: (0, -1.0)}
        for k in range(len(rids) - 1):
            here, there = rids[k], rids[k + 1]
            hop = hops[k]
            nxt: dict = {}
            for ingress, (lat, negsurv) in states.items():
                for c in self._crossings.get((here, there), []):
                    if ingress is None:
                        t = (0, 1.0)
                    elif isinstance(hop, RegionInstance):
                        sw = hop.switches
                        t = (hop.latency, _walk_survival(self.host, sw)) \
                            if sw and sw[0] == ingress and sw[-1] == c.egress else None
                    else:
                        t = self.transit(here, ingress, c.egress)
                    if t is None:
                        continue
                    cand = (lat + t[0] + c.latency, negsurv * t[1] * c.survival)
                    if c.ingress not in nxt or cand < nxt[c.ingress]:
                        nxt[c.ingress] = cand
            if not nxt:
                return None
            states = nxt
        lat, negsurv = min(states.values())
        return QosMeasures(int(lat), _clip(1.0 + negsurv), len(rids) - 1)

    # -- paths

    def simple_paths(self, src: int, dst: int, max_hops: int | None = None,
                     limit: int = 100_000) -> Iterator[tuple[int, ...]]:
        """Simple transit paths ``src -> dst`` in nondecreasing hop count."""
        self._need(src)
        self._need(dst)
        if src == dst:
            yield (src,)
            return
        reach = self.reachable(src)
        if dst not in reach:
            return
        bound = len(reach) - 1 if max_hops is None else min(max_hops, len(reach) - 1)
        count = 0
        for length in range(1, bound + 1):
            for p in self._paths_of_length(src, dst, length):
                yield p
                count += 1
                if count >= limit:
                    return

    def _paths_of_length(self, src: int, dst: int, length: int) -> Iterator[tuple[int, ...]]:
        dist_to_dst = self.hop_distances(dst)

        def dfs(path: list[int]):
            v = path[-1]
            remaining = length - (len(path) - 1)
            if v == dst:
                if remaining == 0:
                    yield tuple(path)
                return
            if remaining <= 0 or dist_to_dst.get(v, length + 1) > remaining:
                return
            for w in sorted(self._transit[v]):
                if w not in path:
                    path.append(w)
                    yield from dfs(path)
                    path.pop()

        yield from dfs([src])

    def expand(self, rids: Sequence[int]) -> list[tuple[Hop, ...]]:
        """Multiply intermediate regions that have several internal paths."""
        out: list[list[Hop]] = [[rids[0]]]
        for k in range(1, len(rids)):
            r = rids[k]
            options: list[Hop] = [r]
            if k < len(rids) - 1:
                inst = self.instances(rids[k - 1], r, rids[k + 1])
                if len(inst) > 1:
                    options = list(inst)
            out = [p + [o] for p in out for o in options]
        return [tuple(p) for p in out]

    def make_path(self, hops: Sequence[Hop], start_switch: int | None = None) -> RegionPath | None:
        qos = self.path_qos(hops, start_switch)
        return None if qos is None else RegionPath(tuple(hops), qos)


def _clip(p: float) -> float:
    return min(1.0, max(0.0, p))


def _walk_survival(graph: NetworkGraph, switches: Sequence[int]) -> float:
    s = 1.0
    for a, b in zip(switches, switches[1:]):
        s *= 1.0 - graph.link(a, b).loss_probability
    return s


def _simple_switch_paths(graph: NetworkGraph, region: Region, ingress: int, egress: int) -> list[tuple[int, ...]]:
    out = []

    def dfs(path: list[int]):
        v = path[-1]
        if v == egress:
            out.append(tuple(path))
            return
        for w in sorted(graph.neighbors(v)):
            if w in region.switches and w not in path:
                path.append(w)
                dfs(path)
                path.pop()

    dfs([ingress])
    return out


def _walk_latency(graph: NetworkGraph, switches: Sequence[int]) -> int:
    return sum(graph.link(a, b).latency for a, b in zip(switches, switches[1:]))


def _label(rid: int, graph: NetworkGraph, paths: Iterable[tuple[int, ...]]) -> list[RegionInstance]:
    ordered = sorted(set(paths), key=lambda p: (_walk_latency(graph, p), len(p), p))
    return [RegionInstance(rid, f"P{i}", p, _walk_latency(graph, p))
            for i, p in enumerate(ordered, start=1)]


def build_region_graph(graph: NetworkGraph, decomp: RegionDecomposition) -> RegionGraph:
    return RegionGraph(graph, decomp)


def expand_region_instances(region: Region, graph: NetworkGraph, ingress: int,
                            egress: int) -> list[RegionInstance]:
    for v in (ingress, egress):
        if v not in region.switches:
            raise NotInRegion(f"switch {v} is not in region {region.rid}")
    return _label(region.rid, graph, _simple_switch_paths(graph, region, ingress, egress))


def k_region_paths(rgraph: RegionGraph, src: int, dst: int, k: int,
                   expand_instances: bool = False) -> list[RegionPath]:
    """Up to ``k`` loop-free paths ordered by (hops, latency, loss, RIDs)."""
    if k < 1:
        raise ValueError("k must be positive")
    if src == dst:
        raise ValueError("src and dst must differ")
    found: list[RegionPath] = []
    tier = None
    for rids in rgraph.simple_paths(src, dst):
        hops = len(rids) - 1
        if tier is not None and hops > tier and len(found) >= k:
            break
        tier = hops
        variants = rgraph.expand(rids) if expand_instances else [tuple(rids)]
        for hv in variants:
            p = rgraph.make_path(hv)
            if p is not None:
                found.append(p)
    if not found:
        raise NoPath(f"no region path {src} -> {dst}")
    found.sort(key=lambda p: p.sort_key)
    return found[:k]


@dataclass(frozen=True)
class MapEntry:
    immediate: Hop
    qos: QosMeasures


@dataclass
class RegionMap:
    origin: int
    entries: dict[int, list[MapEntry]]

    def immediates(self, dest: int) -> list[Hop]:
        return [e.immediate for e in self.entries.get(dest, [])]

    def dump(self) -> str:
        lines = []
        for dest in sorted(self.entries):
            for e in self.entries[dest]:
                if isinstance(e.immediate, RegionInstance):
                    imm = f"{e.immediate.region}@{e.immediate.path_label}"
                else:
                    imm = str(e.immediate)
                ppm = round(e.qos.path_loss * 1_000_000)
                lines.append(f"map {self.origin}: {dest} -> {imm} lat={e.qos.path_latency} "
                             f"loss={ppm} hops={e.qos.hop_count}")
        return "\n".join(lines) + ("\n" if lines else "")


def generate_region_map(rgraph: RegionGraph, origin: int, instance_expansion: bool = False,
                        depth: int | None = None, path_limit: int = 100_000) -> RegionMap:
    """Immediate next regions toward every reachable destination.

    With ``depth``, destinations more than ``depth`` hops away are folded
    into the smallest enclosing HCR that does not contain the origin.
    """
    if origin not in rgraph:
        raise UnknownRegion(f"unknown region {origin}")
    entries: dict[int, list[MapEntry]] = {}
    for dest in sorted(rgraph.reachable(origin) - {origin}):
        best: dict[Hop, QosMeasures] = {}
        for rids in rgraph.simple_paths(origin, dest, limit=path_limit):
            variants = rgraph.expand(rids) if instance_expansion else [tuple(rids)]
            for hv in variants:
                q = rgraph.path_qos(hv)
                if q is None:
                    continue
                imm = hv[1]
                if imm not in best or (q.key, q.hop_count) < (best[imm].key, best[imm].hop_count):
                    best[imm] = q
        entries[dest] = _ordered(best)
    if depth is not None:
        entries = _fold(rgraph, origin, entries, depth)
    return RegionMap(origin, entries)


def _ordered(best: dict[Hop, QosMeasures]) -> list[MapEntry]:
    items = sorted(best.items(), key=lambda kv: (kv[1].key, kv[1].hop_count, hop_key(kv[0])))
    return [MapEntry(h, q) for h, q in items]


def _fold(rgraph: RegionGraph, origin: int, entries: dict[int, list[MapEntry]], depth: int):
    dist = rgraph.hop_distances(origin)
    hcrs = sorted(rgraph.decomp.hcrs, key=lambda h: (len(h.leaves()), h.rid))
    out: dict[int, list[MapEntry]] = {}
    for dest, ents in entries.items():
        key = dest
        if dist.get(dest, 0) > depth:
            for h in hcrs:
                leaf_ids = {leaf.rid for leaf in h.leaves()}
                if dest in leaf_ids and origin not in leaf_ids:
                    key = h.rid
                    break
        merged = {e.immediate: e.qos for e in out.get(key, [])}
        for e in ents:
            if e.immediate not in merged or e.qos.key < merged[e.immediate].key:
                merged[e.immediate] = e.qos
        out[key] = _ordered(merged)
    return out
