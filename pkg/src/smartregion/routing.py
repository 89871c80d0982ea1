"""Region-routing tables and the stationary routing decision.

Every switch keeps a table from destination RID to candidate
``(next region, border switch)`` pairs: a permanent section that is never
aged out and a dynamic section filled on demand by pulling from peers and
neighbouring regions. A switch that also hosts a region map can resolve a
packet's whole region stack (maximal effort); otherwise it only picks the
next region (minimal effort).

Candidate region paths are the loop-free paths that visit every stack entry
in order and have the fewest inter-region hops (plus ``hop_slack``). Stack
entries naming a high-level region are satisfied by any of its leaves.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional, Sequence

from .region_map import (
    NoPath,
    QosMeasures,
    RegionGraph,
    RegionPath,
    generate_region_map,
    hop_key,
    rid_of,
)
from .regions import Region, RegionDecomposition, RegionError, UnknownRid
from .topology import NetworkGraph
from .wire.header import QosSF, SmartRegionHeader, pop_region
from .wire.quantize import dequantize_latency, dequantize_loss


class EffortMode(enum.Enum):
    MINIMAL = "minimal"
    MAXIMAL = "maximal"

    @classmethod
    def parse(cls, value: "EffortMode | str") -> "EffortMode":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower())


class Action(enum.Enum):
    FORWARD_INTER_REGION = "ForwardInterRegion"
    FORWARD_INTRA_REGION = "ForwardIntraRegion"
    DELIVER_LOCAL = "DeliverLocal"
    MULTICAST_LOCAL = "MulticastLocal"
    DROP = "Drop"


class RoutingError(RegionError):
    pass


class PullTtlExceeded(RoutingError):
    pass


class NoFeasibleCandidate(RoutingError):
    pass


@dataclass
class PolicyConfig:
    refresh_interval_us: int = 100_000
    pull_ttl: int = 8
    effort_mode: EffortMode = EffortMode.MINIMAL
    negative_ttl_us: int = 10_000
    hop_slack: int = 0
    instance_expansion: bool = False
    max_paths: int = 64

    def __post_init__(self):
        self.effort_mode = EffortMode.parse(self.effort_mode)
        if self.pull_ttl < 1 or self.refresh_interval_us <= 0:
            raise ValueError("pull_ttl and refresh_interval must be positive")


def parse_policy(text: str) -> PolicyConfig:
    """``key=value`` lines: refresh_interval_ms, pull_ttl, effort_mode, ..."""
    kwargs = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"expected key=value, got {line!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "refresh_interval_ms":
            kwargs["refresh_interval_us"] = int(float(value) * 1000)
        elif key == "negative_ttl_ms":
            kwargs["negative_ttl_us"] = int(float(value) * 1000)
        elif key in ("pull_ttl", "hop_slack", "max_paths"):
            kwargs[key] = int(value)
        elif key == "effort_mode":
            kwargs[key] = EffortMode.parse(value)
        elif key == "instance_expansion":
            kwargs[key] = value.lower() in ("1", "true", "yes", "on")
        else:
            raise ValueError(f"unknown policy key {key!r}")
    return PolicyConfig(**kwargs)


# ---------------------------------------------------------------- tables

@dataclass(frozen=True, order=True)
class TableEntry:
    next_rid: int
    border_switch: int


@dataclass
class DynamicEntry:
    entries: list[TableEntry]
    refreshed_at: int
    negative: bool = False


@dataclass(frozen=True)
class ChangeNotice:
    region: int
    kind: str = "removed"   # removed | added | membership
    seq: int = 0
    switches: frozenset[int] = frozenset()


@dataclass(frozen=True)
class Tick:
    now: int


class RegionRoutingTable:
    def __init__(self, owner_switch: int, self_region: int,
                 permanent: Mapping[int, Iterable[TableEntry]] | None = None,
                 refresh_interval_us: int = 100_000, negative_ttl_us: int = 10_000):
        self.owner_switch = owner_switch
        self.self_region = self_region
        self.permanent: dict[int, list[TableEntry]] = {
            d: sorted(set(es)) for d, es in (permanent or {}).items()}
        self.dynamic: dict[int, DynamicEntry] = {}
        self.refresh_interval_us = refresh_interval_us
        self.negative_ttl_us = negative_ttl_us
        self.epoch = 0

    def _fresh(self, d: DynamicEntry, now: Optional[int]) -> bool:
        if now is None:
            return True
        limit = self.negative_ttl_us if d.negative else self.refresh_interval_us
        return now - d.refreshed_at <= limit

    def knows(self, dest: int, now: Optional[int] = None) -> bool:
        return bool(lookup_next_regions(self, dest, now))

    def negative(self, dest: int, now: Optional[int] = None) -> bool:
        d = self.dynamic.get(dest)
        return d is not None and d.negative and self._fresh(d, now)

    def merge(self, dest: int, entries: Iterable[TableEntry], now: int) -> None:
        entries = sorted(set(entries))
        if dest in self.dynamic and not self.dynamic[dest].negative:
            entries = sorted(set(entries) | set(self.dynamic[dest].entries))
        self.dynamic[dest] = DynamicEntry(entries, now, negative=not entries)
        self.epoch += 1

    def dump(self) -> str:
        lines = [f"route {d} via {e.next_rid} border {e.border_switch}"
                 for d in sorted(self.permanent) for e in self.permanent[d]]
        return "\n".join(lines) + ("\n" if lines else "")


def load_table(text: str, owner_switch: int, self_region: int, **kwargs) -> RegionRoutingTable:
    perm: dict[int, list[TableEntry]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        if len(toks) != 6 or toks[0] != "route" or toks[2] != "via" or toks[4] != "border":
            raise ValueError(f"line {lineno}: expected 'route <dest> via <next> border <switch>'")
        perm.setdefault(int(toks[1]), []).append(TableEntry(int(toks[3]), int(toks[5])))
    return RegionRoutingTable(owner_switch, self_region, perm, **kwargs)


def lookup_next_regions(table: RegionRoutingTable, dest: int,
                        now: Optional[int] = None) -> list[TableEntry]:
    if dest == table.self_region:
        return []
    out = list(table.permanent.get(dest, []))
    d = table.dynamic.get(dest)
    if d is not None and not d.negative and table._fresh(d, now):
        out += [e for e in d.entries if e not in out]
    return out


def refresh_table(table: RegionRoutingTable, event: ChangeNotice | Tick) -> RegionRoutingTable:
    """Age out stale dynamic entries, or drop everything a change touches.

    Permanent entries never age, but a change notice still removes the
    routes that lead into (or target) the changed region.
    """
    changed = False
    if isinstance(event, Tick):
        for dest in list(table.dynamic):
            if not table._fresh(table.dynamic[dest], event.now):
                del table.dynamic[dest]
                changed = True
    else:
        x = event.region

        def affected(e: TableEntry) -> bool:
            return e.next_rid == x or e.border_switch in event.switches

        for section in (table.permanent,):
            for dest in list(section):
                kept = [] if dest == x else [e for e in section[dest] if not affected(e)]
                if kept != section[dest]:
                    changed = True
                    if kept:
                        section[dest] = kept
                    else:
                        del section[dest]
        for dest in list(table.dynamic):
            d = table.dynamic[dest]
            kept = [] if dest == x else [e for e in d.entries if not affected(e)]
            if dest == x or kept != d.entries:
                changed = True
                if kept:
                    d.entries = kept
                else:
                    del table.dynamic[dest]
    if changed:
        table.epoch += 1
    return table


class TableView:
    """All switch tables plus the physical adjacency between regions."""

    def __init__(self, rgraph: RegionGraph, tables: Mapping[tuple[int, int], RegionRoutingTable]):
        self.rgraph = rgraph
        self.tables = dict(tables)

    def of_region(self, rid: int) -> list[RegionRoutingTable]:
        return [t for (s, r), t in sorted(self.tables.items()) if r == rid]

    def get(self, switch: int, rid: int) -> RegionRoutingTable | None:
        return self.tables.get((switch, rid))


def build_tables(rgraph: RegionGraph, policy: PolicyConfig | None = None,
                 populate: bool = True) -> TableView:
    """One table per (switch, region); ``populate`` fills the permanent part."""
    policy = policy or PolicyConfig()
    tables = {}
    for rid, region in sorted(rgraph.regions.items()):
        perm: dict[int, list[TableEntry]] = {}
        if populate:
            for dest in sorted(rgraph.reachable(rid) - {rid}):
                nexts = minimal_next_regions(rgraph, rid, [dest])
                perm[dest] = [TableEntry(n, b) for n in nexts for b in rgraph.border_switches(rid, n)]
        for s in sorted(region.switches):
            tables[(s, rid)] = RegionRoutingTable(
                s, rid, {d: list(es) for d, es in perm.items()},
                refresh_interval_us=policy.refresh_interval_us,
                negative_ttl_us=policy.negative_ttl_us)
    return TableView(rgraph, tables)


@dataclass
class PullResult:
    entries: list[TableEntry]
    rounds: int
    depth: int


def pull_missing_entry(view: TableView, self_region: int, dest: int, now: int = 0,
                       ttl: int = 8, requester: RegionRoutingTable | None = None) -> PullResult:
    """Ask peers first, then neighbouring regions breadth-first, up to ``ttl`` regions out.

    ``rounds`` counts query waves (peers are wave 1); ``depth`` is the region
    distance of the answer (0 when a peer knew it). The result is merged into
    every table of ``self_region`` (or only ``requester`` if given).
    """
    rg = view.rgraph
    targets = [requester] if requester is not None else view.of_region(self_region)

    def store(entries: list[TableEntry]):
        for t in targets:
            t.merge(dest, entries, now)

    for peer in view.of_region(self_region):
        if peer is requester:
            continue
        known = lookup_next_regions(peer, dest, now)
        if known:
            store(known)
            return PullResult(known, 1, 0)

    first_hops: dict[int, set[int]] = {n: {n} for n in rg.transit_neighbors(self_region)}
    visited = {self_region} | set(first_hops)
    depth = 1
    while first_hops:
        if depth > ttl:
            raise PullTtlExceeded(f"no answer for region {dest} within {ttl} regions")
        answering: set[int] = set()
        for region, firsts in first_hops.items():
            if region == dest or (depth == 1 and _region_knows(view, region, dest, now, self_region)):
                answering |= firsts
        if answering:
            entries = [TableEntry(n, b) for n in sorted(answering)
                       for b in rg.border_switches(self_region, n)]
            store(entries)
            return PullResult(entries, depth + 1, depth)
        nxt: dict[int, set[int]] = {}
        for region, firsts in sorted(first_hops.items()):
            for w in rg.transit_neighbors(region):
                if w not in visited:
                    nxt.setdefault(w, set()).update(firsts)
        visited |= set(nxt)
        first_hops = nxt
        depth += 1
    store([])
    return PullResult([], depth, depth)


def _region_knows(view: TableView, region: int, dest: int, now: int, requester: int) -> bool:
    """True if some table of ``region`` reaches ``dest`` without going back to ``requester``.

    Only adjacent regions answer from their tables. Farther out the search
    runs until it meets ``dest`` itself, so every pulled route is a
    minimum-hop one and cannot lead back into the requesting region.
    """
    for t in view.of_region(region):
        entries = lookup_next_regions(t, dest, now)
        if entries and all(e.next_rid != requester for e in entries):
            return True
    return False


# ---------------------------------------------------------------- stack resolution

def _waypoints(rgraph: RegionGraph, stack: Sequence[int]) -> list[frozenset[int]]:
    out = []
    for pos, rid in enumerate(stack):
        try:
            out.append(rgraph.decomp.members(rid))
        except UnknownRid:
            raise UnknownRid(pos, rid) from None
    return out


def waypoint_paths(rgraph: RegionGraph, self_region: int, stack: Sequence[int],
                   hop_slack: int = 0, banned: Iterable[int] = (),
                   limit: int = 10_000) -> list[tuple[int, ...]]:
    """Loop-free region paths visiting every stack entry in order.

    Only paths within ``hop_slack`` of the shortest such path are kept.
    """
    if self_region not in rgraph:
        raise RegionError(f"unknown region {self_region}")
    wps = _waypoints(rgraph, stack)
    banned = set(banned) - {self_region}
    dist_to = []
    for members in wps:
        d: dict[int, int] = {}
        for m in members:
            if m in rgraph:
                for r, h in rgraph.hop_distances(m).items():
                    d[r] = min(d.get(r, h), h)
        dist_to.append(d)
    n_regions = len(rgraph.regions)
    found: list[tuple[int, ...]] = []
    best_len = None

    def dfs(path: list[int], idx: int, budget: int):
        v = path[-1]
        if idx == len(wps):
            if len(path) - 1 == budget:
                found.append(tuple(path))
            return
        remaining = budget - (len(path) - 1)
        if remaining <= 0 or dist_to[idx].get(v, n_regions + 1) > remaining:
            return
        for w in rgraph.transit_neighbors(v):
            if w in path or w in banned:
                continue
            path.append(w)
            nidx = idx
            while nidx < len(wps) and w in wps[nidx]:
                nidx += 1
            dfs(path, nidx, budget)
            path.pop()
            if len(found) >= limit:
                return

    for length in range(1, n_regions):
        dfs([self_region], 0, length)
        if found and best_len is None:
            best_len = length
        if best_len is not None and length >= best_len + hop_slack:
            break
    if not found:
        raise NoPath(f"no loop-free region path from {self_region} through {list(stack)}")
    return found


def resolve_stack(rgraph: RegionGraph, self_region: int, header: SmartRegionHeader,
                  mode: EffortMode | str = EffortMode.MINIMAL, instance_expansion: bool = False,
                  hop_slack: int = 0, banned: Iterable[int] = (),
                  start_switch: int | None = None) -> list[RegionPath]:
    """Candidate region paths for ``header`` at ``self_region``, best first.

    Minimal effort returns one ``(self, next)`` path per distinct next
    region. Maximal effort returns full paths to the last stack entry, with
    multi-path regions split into instances when ``instance_expansion``.
    """
    mode = EffortMode.parse(mode)
    stack = header.stack
    if not stack:
        raise ValueError("region stack is empty")
    if stack[0] == self_region:
        raise ValueError("top of stack is the current region; pop it first")
    raw = waypoint_paths(rgraph, self_region, stack, hop_slack, banned)
    out: dict[tuple, RegionPath] = {}
    for rids in raw:
        if mode is EffortMode.MINIMAL:
            variants = [tuple(rids)]
        else:
            variants = rgraph.expand(rids) if instance_expansion else [tuple(rids)]
        for hops in variants:
            p = rgraph.make_path(hops, start_switch)
            if p is None:
                continue
            if mode is EffortMode.MINIMAL:
                key = (rid_of(hops[1]),)
                short = RegionPath(hops[:2], p.qos)
                if key not in out or p.qos.key < out[key].qos.key:
                    out[key] = short
            else:
                out[tuple(hops)] = p
    if not out:
        raise NoPath(f"no crossable region path from {self_region}")
    return sorted(out.values(), key=_candidate_key)


def minimal_next_regions(rgraph: RegionGraph, self_region: int, stack: Sequence[int]) -> list[int]:
    paths = waypoint_paths(rgraph, self_region, stack)
    return sorted({p[1] for p in paths})


def _candidate_key(p: RegionPath) -> tuple:
    return (p.qos.path_latency, p.qos.path_loss, tuple(hop_key(h) for h in p.hops))


# ---------------------------------------------------------------- selection

@dataclass
class Selection:
    paths: list[RegionPath]
    fallback: bool = False


def _intermediates(p: RegionPath) -> set[int]:
    return set(p.rids[1:-1])


def select_next_region(candidates: Sequence[RegionPath], qos: QosSF | None = None,
                       policy: PolicyConfig | None = None, strict: bool = False) -> Selection:
    """QoS filter, then the best ``fission_rate`` candidates, spread across regions.

    When the QoS bounds rule out every candidate the best one is returned
    with ``fallback=True`` (or :class:`NoFeasibleCandidate` if ``strict``).
    """
    if not candidates:
        raise ValueError("no candidates")
    ordered = sorted(candidates, key=_candidate_key)
    feasible = ordered
    if qos is not None:
        lat_cap = dequantize_latency(qos.path_latency) if qos.path_latency is not None else None
        loss_cap = dequantize_loss(qos.path_loss) if qos.path_loss is not None else None
        feasible = [p for p in ordered
                    if (lat_cap is None or p.qos.path_latency <= lat_cap)
                    and (loss_cap is None or p.qos.path_loss <= loss_cap)]
    if not feasible:
        if strict:
            raise NoFeasibleCandidate("QoS bounds exclude every candidate")
        return Selection([ordered[0]], fallback=True)
    want = qos.fission_rate if qos is not None else 1
    chosen = [feasible[0]]
    rest = list(feasible[1:])
    while len(chosen) < want and rest:
        used = [_intermediates(c) for c in chosen]

        def overlap(p: RegionPath) -> int:
            mine = _intermediates(p) | {p.rids[1]} if len(p.rids) > 1 else set()
            return sum(len(mine & (u | {c.rids[1]})) for u, c in zip(used, chosen))

        best = min(rest, key=lambda p: (overlap(p), rest.index(p)))
        chosen.append(best)
        rest.remove(best)
    return Selection(chosen)


# ---------------------------------------------------------------- decisions

@dataclass
class Branch:
    path: RegionPath
    next_region: int
    egress_switch: int
    ingress_switch: int
    header: SmartRegionHeader


@dataclass
class RoutingDecision:
    action: Action
    updated_header: SmartRegionHeader
    next_region: Optional[int] = None
    egress_switch: Optional[int] = None
    chosen_paths: list[RegionPath] = field(default_factory=list)
    branches: list[Branch] = field(default_factory=list)
    targets: list[int] = field(default_factory=list)
    reason: str = ""
    fallback: bool = False
    cached: bool = False


@dataclass
class SwitchContext:
    switch: int
    region: int
    graph: NetworkGraph
    decomp: RegionDecomposition
    rgraph: Optional[RegionGraph] = None
    table: Optional[RegionRoutingTable] = None
    view: Optional[TableView] = None
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    now: int = 0
    flow_cache: Optional[dict] = None
    region_nodes: Optional[frozenset[int]] = None

    @property
    def region_obj(self) -> Region:
        return self.decomp.region(self.region)

    @property
    def nodes(self) -> frozenset[int]:
        return self.region_nodes if self.region_nodes is not None else self.region_obj.nodes


def route_packet(ctx: SwitchContext, header: SmartRegionHeader,
                 mode: EffortMode | str | None = None) -> RoutingDecision:
    mode = ctx.policy.effort_mode if mode is None else EffortMode.parse(mode)
    h = header
    if not h.stack:
        return RoutingDecision(Action.DROP, h, reason="EmptyStack")
    while h.stack:
        try:
            members = ctx.decomp.members(h.stack[0])
        except UnknownRid:
            return RoutingDecision(Action.DROP, h, reason="UnknownRid")
        if ctx.region not in members:
            break
        h = pop_region(h)
    if not h.stack:
        return _deliver(ctx, h)

    key = None
    if ctx.flow_cache is not None and h.ids is not None and h.ids.flow_fid is not None:
        epoch = ctx.table.epoch if ctx.table is not None else 0
        key = (h.ids.sender_nid, h.ids.flow_fid, ctx.switch, ctx.region, h.stack,
               mode, h.brs.trail if h.brs is not None else None, epoch, h.fission_rate)
        hit = ctx.flow_cache.get(key)
        if hit is not None:
            return _rebind(hit, header, h)

    decision = _route_inter(ctx, h, mode)
    if key is not None and decision.action is not Action.DROP:
        ctx.flow_cache[key] = decision
    return decision


def _rebind(cached: RoutingDecision, original: SmartRegionHeader, h: SmartRegionHeader) -> RoutingDecision:
    """Reuse a cached decision for another packet of the same flow."""
    branches = []
    for b in cached.branches:
        bh = replace(h, region_stack=b.header.region_stack, qos=b.header.qos, brs=b.header.brs)
        branches.append(replace(b, header=bh))
    return replace(cached, branches=branches,
                   updated_header=branches[0].header if branches else h, cached=True)


def _deliver(ctx: SwitchContext, h: SmartRegionHeader) -> RoutingDecision:
    nodes = ctx.nodes
    receiver = h.ids.receiver_nid if h.ids is not None else 0
    if receiver == 0:
        return RoutingDecision(Action.MULTICAST_LOCAL, h, targets=sorted(nodes))
    if receiver in nodes:
        return RoutingDecision(Action.DELIVER_LOCAL, h, targets=[receiver])
    return RoutingDecision(Action.DROP, h, reason="ReceiverNotInRegion")


def _route_inter(ctx: SwitchContext, h: SmartRegionHeader, mode: EffortMode) -> RoutingDecision:
    banned: set[int] = set()
    if h.brs is not None:
        banned = set(h.brs.trail) - {ctx.region}
        if not h.brs.trail or h.brs.trail[-1] != ctx.region:
            h = h.append_brs(ctx.region)
    rg = ctx.rgraph
    try:
        if mode is EffortMode.MAXIMAL and rg is not None:
            candidates = resolve_stack(rg, ctx.region, h, EffortMode.MAXIMAL,
                                       ctx.policy.instance_expansion, ctx.policy.hop_slack,
                                       banned, start_switch=ctx.switch)
            entries = None
        else:
            candidates, entries = _minimal_candidates(ctx, h, banned)
    except (NoPath, RegionError) as exc:
        return RoutingDecision(Action.DROP, h, reason=type(exc).__name__)
    if not candidates:
        return RoutingDecision(Action.DROP, h, reason="NoPath")

    sel = select_next_region(candidates[:ctx.policy.max_paths], h.qos, ctx.policy)
    branches = []
    for p in sel.paths:
        nxt = rid_of(p.hops[1])
        egress, ingress = _border(ctx, nxt, entries)
        if egress is None:
            continue
        if mode is EffortMode.MAXIMAL and rg is not None:
            bh = h.with_stack(p.rids[1:])
        else:
            bh = h
        branches.append(Branch(p, nxt, egress, ingress, bh))
    if not branches:
        return RoutingDecision(Action.DROP, h, reason="NoBorder")
    if len(branches) > 1:
        # replication happens once; copies travel with fission rate 1
        branches = [replace(b, header=b.header.with_fission(1)) for b in branches]
    first = branches[0]
    return RoutingDecision(Action.FORWARD_INTER_REGION, first.header, first.next_region,
                           first.egress_switch, [b.path for b in branches], branches,
                           fallback=sel.fallback)


def _minimal_candidates(ctx: SwitchContext, h: SmartRegionHeader, banned: set[int]):
    top = h.stack[0]
    rg = ctx.rgraph
    entries: list[TableEntry] = []
    if ctx.table is not None:
        entries = lookup_next_regions(ctx.table, top, ctx.now)
        if not entries and ctx.view is not None and not ctx.table.negative(top, ctx.now):
            try:
                entries = pull_missing_entry(ctx.view, ctx.region, top, ctx.now,
                                             ctx.policy.pull_ttl, requester=ctx.table).entries
            except PullTtlExceeded:
                entries = []
    if not entries and rg is not None:
        nexts = [p.rids[1] for p in resolve_stack(rg, ctx.region, h, EffortMode.MINIMAL, banned=banned)]
        entries = [TableEntry(n, b) for n in nexts for b in rg.border_switches(ctx.region, n)]
    nexts = sorted({e.next_rid for e in entries} - banned)
    candidates = []
    qos_by_next: dict[int, QosMeasures] = {}
    if rg is not None:
        try:
            for p in resolve_stack(rg, ctx.region, h, EffortMode.MINIMAL, banned=banned,
                                   start_switch=ctx.switch):
                qos_by_next[p.rids[1]] = p.qos
        except (NoPath, RegionError):
            pass
    for n in nexts:
        candidates.append(RegionPath((ctx.region, n), qos_by_next.get(n, QosMeasures(hop_count=1))))
    return candidates, entries


def _border(ctx: SwitchContext, nxt: int, entries: list[TableEntry] | None):
    rg = ctx.rgraph
    options = []
    if rg is not None:
        options = rg.crossings(ctx.region, nxt)
    allowed = {e.border_switch for e in entries or [] if e.next_rid == nxt}
    if allowed:
        options = [o for o in options if o[0] in allowed] or options
    if options:
        if rg is not None:
            # prefer the border reachable fastest from the current switch
            def cost(o):
                t = rg.transit(ctx.region, ctx.switch, o[0]) if ctx.switch in rg.regions[ctx.region].switches else None
                return (float("inf") if t is None else t[0]) + o[2]
            options = sorted(options, key=lambda o: (cost(o), o[0], o[1]))
        return options[0][0], options[0][1]
    if allowed:
        b = min(allowed)
        return b, None
    return None, None


def intra_region_paths(region: Region, graph: NetworkGraph, ingress: int, target: int,
                       k: int = 1) -> list[tuple[int, ...]]:
    """Up to ``k`` loop-free switch paths inside ``region``; a node target ends the path."""
    if k < 1:
        raise ValueError("k must be positive")
    if ingress not in region.switches or target not in region:
        raise RegionError(f"{ingress} or {target} is not in region {region.rid}")
    if ingress == target:
        return [(ingress,)]
    out: list[tuple[int, ...]] = []

    def dfs(path: list[int]):
        v = path[-1]
        for w in sorted(graph.neighbors(v)):
            if w in path:
                continue
            if w == target:
                out.append(tuple(path) + (w,))
            elif w in region.switches:
                path.append(w)
                dfs(path)
                path.pop()

    dfs([ingress])
    if not out:
        raise NoPath(f"no path {ingress} -> {target} inside region {region.rid}")

    def latency(p):
        return sum(graph.link(a, b).latency for a, b in zip(p, p[1:]))

    out.sort(key=lambda p: (latency(p), p))
    return out[:k]


def region_map_for(rgraph: RegionGraph, origin: int, instance_expansion: bool = False):
    """Hosted region map of a capable switch."""
    return generate_region_map(rgraph, origin, instance_expansion)
