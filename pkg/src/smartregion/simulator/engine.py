"""Deterministic discrete-event engine.

Events are ordered by ``(time, sequence)``; the sequence number is taken at
enqueue time, so equal (scenario, seed) pairs replay identically. Packets
walk the physical graph one link at a time. A routing decision is taken
whenever a packet enters a region (or finishes its planned walk), using the
switch's region-routing table and, for maximal effort, the global region
graph.

Explorer, event and redirect messages move at region granularity: one
region hop costs the latency of the cheapest link joining the two regions.
"""

from __future__ import annotations

import enum
import heapq
import random
from dataclasses import dataclass, field, replace
from typing import Any, Optional

from ..region_map import RegionGraph, UnknownRegion, build_region_graph
from ..routing import (
    Action,
    ChangeNotice,
    EffortMode,
    PolicyConfig,
    SwitchContext,
    Tick,
    build_tables,
    refresh_table,
    route_packet,
)
from ..topology import DEFAULT_LATENCY_US
from ..wire.header import BrsSF, IdsSF, QosSF, RegionStackSF, SmartRegionHeader
from .metrics import Metrics
from .scenario import ScenarioConfig

MAX_DECISIONS_PER_VISIT = 8


class SimConfigError(ValueError):
    pass


class NodeNotInRegion(SimConfigError):
    pass


class EventKind(enum.Enum):
    PACKET_ARRIVAL = "PacketArrival"
    PERIODIC_TICK = "PeriodicTick"
    EXPLORER_EMIT = "ExplorerEmit"
    EVENT_EMIT = "EventEmit"
    NODE_MIGRATION = "NodeMigration"
    FORWARD_WINDOW_EXPIRY = "ForwardWindowExpiry"
    NOTIFY_WINDOW_EXPIRY = "NotifyWindowExpiry"
    INJECT = "Inject"
    EXPLORER_ARRIVAL = "ExplorerArrival"
    EXPLORER_RETURN = "ExplorerReturn"
    EVENT_ARRIVAL = "EventArrival"
    REDIRECT_ARRIVAL = "RedirectArrival"
    NOTIFY_ARRIVAL = "NotifyArrival"


@dataclass(order=True)
class SimEvent:
    time: int
    seq: int
    kind: EventKind = field(compare=False)
    payload: Any = field(compare=False, default=None)


@dataclass
class Packet:
    header: SmartRegionHeader
    payload_size: int
    birth_time: int
    key: tuple[int, int]
    region: int
    hop_trace: list[int] = field(default_factory=list)
    plan: list[tuple[str, int]] = field(default_factory=list)
    visited: list[int] = field(default_factory=list)
    final: Optional[int] = None
    redirected: bool = False

    def clone(self) -> "Packet":
        return replace(self, hop_trace=list(self.hop_trace), plan=list(self.plan),
                       visited=list(self.visited))


@dataclass
class ExplorerPacket:
    explorer_id: int
    origin_region: int
    brs: BrsSF
    ttl: int


@dataclass
class EventPacket:
    origin_region: int
    change: ChangeNotice


@dataclass
class LogicalPacket:
    flow: int
    birth: int
    copies: int = 1
    delivered: bool = False
    delivered_at: Optional[int] = None
    delivered_nodes: set = field(default_factory=set)
    trail: tuple[int, ...] = ()
    header: Optional[SmartRegionHeader] = None
    drop_reason: Optional[str] = None


@dataclass
class _Migration:
    node: int
    from_region: int
    to_region: int
    at: int
    forwarding: bool = True
    notifying: bool = True
    started: bool = False
    redirect_seen: dict = field(default_factory=dict)
    notified: set = field(default_factory=set)


def _ms(t: float) -> int:
    return int(round(t * 1000))


class Simulation:
    def __init__(self, scenario: ScenarioConfig, seed: int = 0, record_trace: bool = False):
        self.scenario = scenario
        self.seed = seed
        k = scenario.knobs
        self.t_fwd = _ms(k["t_fwd_ms"])
        self.t_notify = _ms(k["t_notify_ms"])
        if self.t_notify <= self.t_fwd:
            raise SimConfigError("t_notify_ms must exceed t_fwd_ms")
        if self.t_fwd < 0:
            raise SimConfigError("t_fwd_ms must be non-negative")
        self.redirect = k["redirect"]
        self.explorer_ttl = k["explorer_ttl"]
        self.graph = scenario.graph
        self.decomp = scenario.decomp
        self.rgraph: RegionGraph = build_region_graph(self.graph, self.decomp)
        self.policy = PolicyConfig(
            refresh_interval_us=_ms(k["refresh_interval_ms"]), pull_ttl=k["pull_ttl"],
            effort_mode=EffortMode.parse(k["effort_mode"]),
            instance_expansion=k["instance_expansion"])
        self.view = build_tables(self.rgraph, self.policy, populate=k["populate_tables"])
        self.flow_caches: Optional[dict[int, dict]] = {} if k["flow_cache"] else None

        self.region_nodes = {rid: set(r.nodes) for rid, r in self.rgraph.regions.items()}
        self.node_region: dict[int, int] = {}
        for rid in sorted(self.region_nodes):
            for n in self.region_nodes[rid]:
                self.node_region.setdefault(n, rid)
        self.attach: dict[int, dict[int, tuple[int, float]]] = {}
        for n in self.graph.nodes:
            self.attach[n] = {w: (self.graph.link(n, w).latency, self.graph.link(n, w).loss_probability)
                              for w in self.graph.neighbors(n) if self.graph.is_switch(w)}
        # what each source believes about a receiver's region
        self.knowledge: dict[tuple[int, int], int] = {}

        self.metrics = Metrics()
        self.records: dict[tuple[int, int], LogicalPacket] = {}
        self.learned_regions: dict[int, set[int]] = {}
        self.learned_edges: dict[int, set[frozenset[int]]] = {}
        self.table_changes = 0
        self.removed_regions: set[int] = set()
        self._explorer_seen: dict[int, dict[int, int]] = {}
        self._event_seen: dict[tuple[int, int], dict[int, int]] = {}
        self._rngs: dict[tuple[int, int], random.Random] = {}
        self._walk_cache: dict = {}
        self._lat_cache: dict = {}
        self._heap: list[SimEvent] = []
        self._seq = 0
        self._pending = 0
        self.now = 0
        self.trace: Optional[list[tuple[int, int, str]]] = [] if record_trace else None
        self._migrations = self._check_migrations()
        self._schedule_scenario()

    # ---------------------------------------------------------------- setup

    def _check_migrations(self) -> list[_Migration]:
        where = dict(self.node_region)
        out = []
        for m in sorted(self.scenario.migrations, key=lambda m: m.at_ms):
            for rid in (m.from_region, m.to_region):
                if rid not in self.rgraph:
                    raise UnknownRegion(f"migration names unknown region {rid}")
            if m.node not in where:
                raise NodeNotInRegion(f"{m.node} is not a node of any region")
            if where[m.node] != m.from_region:
                raise NodeNotInRegion(f"node {m.node} is not in region {m.from_region} at {m.at_ms} ms")
            where[m.node] = m.to_region
            out.append(_Migration(m.node, m.from_region, m.to_region, _ms(m.at_ms)))
        return out

    def _schedule_scenario(self):
        sc = self.scenario
        for fi, f in enumerate(sc.flows):
            for n in (f.src, f.dst):
                if n and n not in self.node_region:
                    raise SimConfigError(f"flow endpoint {n} is not a node of any region")
            if f.dst == 0 and not f.stack:
                raise SimConfigError("multicast flows need an explicit stack")
            for rid in f.stack or ():
                self.decomp.members(rid)
            gap = 1_000_000 / f.rate_pps
            for i in range(f.count):
                self._push(_ms(f.start_ms) + int(round(i * gap)), EventKind.INJECT, (fi, i))
        for mi, m in enumerate(self._migrations):
            self._push(m.at, EventKind.NODE_MIGRATION, mi)
        for ei, e in enumerate(sc.explorers):
            if e.region not in self.rgraph:
                raise UnknownRegion(f"explorer from unknown region {e.region}")
            ttl = self.explorer_ttl if e.ttl is None else e.ttl
            self._push(_ms(e.at_ms), EventKind.EXPLORER_EMIT, (ei + 1, e.region, ttl))
        for si, e in enumerate(sc.events):
            if e.region not in self.rgraph:
                raise UnknownRegion(f"event from unknown region {e.region}")
            self._push(_ms(e.at_ms), EventKind.EVENT_EMIT, (si + 1, e.region, e.kind))
        if self._pending:
            self._push(self.policy.refresh_interval_us, EventKind.PERIODIC_TICK, None)

    def _push(self, time: int, kind: EventKind, payload=None):
        self._seq += 1
        if kind is not EventKind.PERIODIC_TICK:
            self._pending += 1
        heapq.heappush(self._heap, SimEvent(time, self._seq, kind, payload))

    # ---------------------------------------------------------------- loop

    def step(self) -> Optional[SimEvent]:
        if not self._heap:
            return None
        ev = heapq.heappop(self._heap)
        if ev.kind is not EventKind.PERIODIC_TICK:
            self._pending -= 1
        self.now = ev.time
        if self.trace is not None:
            self.trace.append((ev.time, ev.seq, ev.kind.value))
        getattr(self, "_on_" + ev.kind.name.lower())(ev.payload)
        return ev

    def run(self) -> Metrics:
        while self.step() is not None:
            pass
        self.metrics.in_flight = self.in_flight()
        return self.metrics

    def in_flight(self) -> int:
        return sum(1 for r in self.records.values() if not r.delivered and r.copies > 0)

    # ---------------------------------------------------------------- helpers

    def _rng(self, a: int, b: int) -> random.Random:
        key = (min(a, b), max(a, b))
        if key not in self._rngs:
            self._rngs[key] = random.Random(f"{self.seed}:{key[0]}:{key[1]}")
        return self._rngs[key]

    def _link(self, a: int, b: int) -> Optional[tuple[int, float]]:
        for n, s in ((a, b), (b, a)):
            if n in self.attach:
                return self.attach[n].get(s)
        if not self.graph.has_link(a, b):
            return None
        link = self.graph.link(a, b)
        return link.latency, link.loss_probability

    def _hop_latency(self, a: int, b: int) -> int:
        return self.rgraph.crossings(a, b)[0][2]

    def _region_latency(self, a: int, b: int) -> int:
        """Cheapest region-level latency between two regions."""
        key = (a, b)
        if key in self._lat_cache:
            return self._lat_cache[key]
        dist = {a: 0}
        heap = [(0, a)]
        while heap:
            d, v = heapq.heappop(heap)
            if d > dist.get(v, d):
                continue
            for w in self.rgraph.transit_neighbors(v):
                nd = d + self._hop_latency(v, w)
                if nd < dist.get(w, nd + 1):
                    dist[w] = nd
                    heapq.heappush(heap, (nd, w))
        self._lat_cache[key] = dist.get(b, 0)
        return self._lat_cache[key]

    def _walk(self, rid: int, start: int, goals: frozenset[int]) -> Optional[list[int]]:
        """Least-latency switch walk inside ``rid`` from ``start`` to any goal."""
        key = (rid, start, goals)
        if key in self._walk_cache:
            return self._walk_cache[key]
        inside = self.rgraph.regions[rid].switches
        best = {start: (0, [start])}
        heap = [(0, [start])]
        result = None
        while heap:
            d, path = heapq.heappop(heap)
            v = path[-1]
            if best[v][0] < d:
                continue
            if v in goals:
                result = path
                break
            for w in sorted(self.graph.neighbors(v)):
                if w in inside and w not in path:
                    nd = d + self.graph.link(v, w).latency
                    if w not in best or (nd, path + [w]) < (best[w][0], best[w][1]):
                        best[w] = (nd, path + [w])
                        heapq.heappush(heap, (nd, path + [w]))
        self._walk_cache[key] = result
        return result

    def _send(self, p: Packet, a: int, b: int):
        link = self._link(a, b)
        if link is None:
            self._copy_dropped(p, "NoPath")
            return
        latency, loss = link
        if loss > 0 and self._rng(a, b).random() < loss:
            self._copy_dropped(p, "LinkLoss")
            return
        self._push(self.now + latency, EventKind.PACKET_ARRIVAL, (p, b))

    def _copy_dropped(self, p: Packet, reason: str):
        rec = self.records[p.key]
        rec.copies -= 1
        if rec.copies == 0 and not rec.delivered:
            rec.drop_reason = reason
            self.metrics.dropped[reason] += 1

    def _continue(self, p: Packet, at: int):
        """Follow the planned walk; decide again once it runs out."""
        while p.plan:
            step, value = p.plan.pop(0)
            if step == "enter":
                if value in p.visited:
                    self.metrics.region_loops += 1
                p.visited.append(value)
                p.region = value
                continue
            self._send(p, at, value)
            return
        self._decide(p, at)

    # ---------------------------------------------------------------- packets

    def _on_inject(self, payload):
        fi, i = payload
        f = self.scenario.flows[fi]
        fid = fi + 1
        pid = i % 0x10000
        stack = tuple(f.stack) if f.stack else (self._believed_region(f.src, f.dst),)
        qos = None
        if f.fission > 1 or f.latency_bucket is not None or f.loss_bucket is not None:
            qos = QosSF(path_latency=f.latency_bucket, path_loss=f.loss_bucket, fission_rate=f.fission)
        header = SmartRegionHeader(
            region_stack=RegionStackSF(stack),
            ids=IdsSF(f.src, f.dst, packet_pid=pid, flow_fid=fid),
            qos=qos, brs=BrsSF(()) if f.brs else None)
        src_region = self.node_region[f.src]
        key = (fid, i)
        self.records[key] = LogicalPacket(fi, self.now)
        self.metrics.injected += 1
        p = Packet(header, f.size, self.now, key, src_region, hop_trace=[f.src], visited=[src_region])
        inside = self.rgraph.regions[src_region].switches
        options = sorted((lat, s) for s, (lat, _) in self.attach[f.src].items() if s in inside)
        if not options:
            self._copy_dropped(p, "NoPath")
            return
        self._send(p, f.src, options[0][1])

    def _believed_region(self, src: int, dst: int) -> int:
        return self.knowledge.get((src, dst), self._initial_region(dst))

    def _initial_region(self, node: int) -> int:
        for m in self._migrations:
            if m.node == node:
                return m.from_region
        return self.node_region[node]

    def _on_packet_arrival(self, payload):
        p, v = payload
        p.hop_trace.append(v)
        if v in self.attach:
            self._deliver(p, v)
            return
        self._continue(p, v)

    def _deliver(self, p: Packet, node: int):
        rec = self.records[p.key]
        rec.copies -= 1
        multicast = p.header.ids is not None and p.header.ids.receiver_nid == 0
        if node in rec.delivered_nodes:
            self.metrics.duplicates_suppressed += 1
            return
        rec.delivered_nodes.add(node)
        if multicast:
            self.metrics.multicast_deliveries += 1
        if not rec.delivered:
            rec.delivered = True
            rec.delivered_at = self.now
            rec.trail = tuple(p.visited)
            rec.header = p.header
            self.metrics.delivered += 1
            self.metrics.latencies.append(self.now - rec.birth)
            self.metrics.hops[len(p.visited) - 1] += 1

    def _intercept(self, p: Packet):
        ids = p.header.ids
        if not self.redirect or ids is None or not p.header.stack:
            return
        for m in self._migrations:
            if (m.started and m.node == ids.receiver_nid and p.header.stack[-1] == m.from_region
                    and m.redirect_seen.get(p.region, self.now + 1) <= self.now):
                p.header = p.header.with_stack(p.header.stack[:-1] + (m.to_region,))
                if not p.redirected:
                    p.redirected = True
                    self.metrics.redirected += 1

    def _ctx(self, s: int, rid: int) -> SwitchContext:
        caches = self.flow_caches
        return SwitchContext(
            s, rid, self.graph, self.decomp, self.rgraph, self.view.get(s, rid), self.view,
            self.policy, self.now,
            flow_cache=caches.setdefault(s, {}) if caches is not None else None,
            region_nodes=frozenset(self.region_nodes[rid]))

    def _decide(self, p: Packet, s: int, depth: int = 0):
        if depth >= MAX_DECISIONS_PER_VISIT:
            self._copy_dropped(p, "NoPath")
            return
        rid = p.region
        self._intercept(p)
        f = self.scenario.flows[self.records[p.key].flow]
        mode = EffortMode.parse(f.mode) if f.mode else self.policy.effort_mode
        d = route_packet(self._ctx(s, rid), p.header, mode)
        p.header = d.updated_header
        if d.action is Action.DROP:
            outcome = self._transition(p, rid) if d.reason == "ReceiverNotInRegion" else None
            if outcome == "reroute":
                self._decide(p, s, depth + 1)
            elif outcome is None:
                self._copy_dropped(p, d.reason)
            return
        if d.action in (Action.DELIVER_LOCAL, Action.MULTICAST_LOCAL):
            copies = [p] + [p.clone() for _ in d.targets[1:]]
            self.records[p.key].copies += len(copies) - 1
            for c, node in zip(copies, d.targets):
                self._walk_to_node(c, s, rid, node)
            return
        copies = [p] + [p.clone() for _ in d.branches[1:]]
        self.records[p.key].copies += len(copies) - 1
        for c, b in zip(copies, d.branches):
            c.header = b.header
            walk = self._walk(rid, s, frozenset({b.egress_switch}))
            if walk is None:
                self._copy_dropped(c, "NoPath")
                continue
            c.plan = [("move", w) for w in walk[1:]]
            if b.ingress_switch is not None and b.ingress_switch != b.egress_switch:
                c.plan.append(("move", b.ingress_switch))
            c.plan.append(("enter", b.next_region))
            self._continue(c, s)

    def _walk_to_node(self, p: Packet, s: int, rid: int, node: int):
        goals = frozenset(self.attach.get(node, {})) & self.rgraph.regions[rid].switches
        walk = self._walk(rid, s, goals) if goals else None
        if walk is None:
            self._copy_dropped(p, "NoPath")
            return
        p.final = node
        p.plan = [("move", w) for w in walk[1:]] + [("move", node)]
        self._continue(p, s)

    def _transition(self, p: Packet, rid: int) -> Optional[str]:
        """Arrival for a node that left ``rid``: "reroute", "dropped" or None."""
        receiver = p.header.ids.receiver_nid
        active = [m for m in self._migrations if m.started and m.node == receiver and m.from_region == rid]
        if not active:
            return None
        m = active[-1]
        src = p.header.ids.sender_nid
        if m.notifying and src not in m.notified:
            m.notified.add(src)
            self.metrics.notifications_sent += 1
            delay = self._region_latency(rid, self.node_region[src])
            self._push(self.now + delay, EventKind.NOTIFY_ARRIVAL, (m, src))
        if not m.forwarding:
            self._copy_dropped(p, "StaleDestination")
            return "dropped"
        p.header = p.header.with_stack((m.to_region,))
        self.metrics.forwarded_in_transition += 1
        return "reroute"

    # ---------------------------------------------------------------- migration

    def _on_node_migration(self, mi: int):
        m = self._migrations[mi]
        m.started = True
        self.region_nodes[m.from_region].discard(m.node)
        self.region_nodes[m.to_region].add(m.node)
        self.node_region[m.node] = m.to_region
        self.attach[m.node] = {s: (DEFAULT_LATENCY_US, 0.0) for s in self.rgraph.regions[m.to_region].switches}
        self._walk_cache.clear()
        self._push(m.at + self.t_fwd, EventKind.FORWARD_WINDOW_EXPIRY, mi)
        self._push(m.at + self.t_notify, EventKind.NOTIFY_WINDOW_EXPIRY, mi)
        if self.redirect:
            self._push(self.now, EventKind.REDIRECT_ARRIVAL, (m, m.to_region))

    def _on_forward_window_expiry(self, mi: int):
        self._migrations[mi].forwarding = False

    def _on_notify_window_expiry(self, mi: int):
        self._migrations[mi].notifying = False

    def _on_redirect_arrival(self, payload):
        m, rid = payload
        if rid in m.redirect_seen:
            return
        m.redirect_seen[rid] = self.now
        for w in self.rgraph.transit_neighbors(rid):
            if w not in m.redirect_seen:
                self._push(self.now + self._hop_latency(rid, w), EventKind.REDIRECT_ARRIVAL, (m, w))

    def _on_notify_arrival(self, payload):
        m, src = payload
        self.knowledge[(src, m.node)] = m.to_region

    # ---------------------------------------------------------------- explorers

    def _on_explorer_emit(self, payload):
        eid, origin, ttl = payload
        self.metrics.explorers_emitted += 1
        self.learned_regions.setdefault(origin, set()).add(origin)
        self.learned_edges.setdefault(origin, set())
        self._explorer_seen[eid] = {origin: ttl + 1}
        if ttl < 1:
            self.metrics.explorers_absorbed += 1
            return
        for w in self.rgraph.transit_neighbors(origin):
            x = ExplorerPacket(eid, origin, BrsSF((origin,)), ttl)
            self._push(self.now + self._hop_latency(origin, w), EventKind.EXPLORER_ARRIVAL, (x, w))

    def _on_explorer_arrival(self, payload):
        x, rid = payload
        self.metrics.explorer_copies += 1
        trail = x.brs.trail + (rid,)
        back = sum(self._hop_latency(a, b) for a, b in zip(trail[1:][::-1], trail[:-1][::-1]))
        self._push(self.now + back, EventKind.EXPLORER_RETURN, (x.origin_region, trail))
        seen = self._explorer_seen[x.explorer_id]
        if seen.get(rid, 0) >= x.ttl:
            self.metrics.explorers_suppressed += 1
            return
        seen[rid] = x.ttl
        ttl = x.ttl - 1
        if ttl < 1:
            self.metrics.explorers_absorbed += 1
            return
        for w in self.rgraph.transit_neighbors(rid):
            if w not in trail:
                nx = ExplorerPacket(x.explorer_id, x.origin_region, BrsSF(trail), ttl)
                self._push(self.now + self._hop_latency(rid, w), EventKind.EXPLORER_ARRIVAL, (nx, w))

    def _on_explorer_return(self, payload):
        origin, trail = payload
        self.metrics.explorer_returns += 1
        self.learned_regions.setdefault(origin, set()).update(trail)
        self.learned_edges.setdefault(origin, set()).update(
            frozenset(e) for e in zip(trail, trail[1:]))

    # ---------------------------------------------------------------- events

    def _on_event_emit(self, payload):
        seq, rid, kind = payload
        self.metrics.events_emitted += 1
        switches = frozenset(self.rgraph.regions[rid].switches) if kind == "removed" else frozenset()
        e = EventPacket(rid, ChangeNotice(rid, kind, seq, switches))
        if kind == "removed":
            self.removed_regions.add(rid)
        self._event_seen[(rid, seq)] = {rid: self.now}
        for w in self.rgraph.transit_neighbors(rid):
            self._push(self.now + self._hop_latency(rid, w), EventKind.EVENT_ARRIVAL, (e, w, self.now))

    def _on_event_arrival(self, payload):
        e, rid, emitted = payload
        seen = self._event_seen[(e.origin_region, e.change.seq)]
        if rid in seen:
            self.metrics.event_copies_suppressed += 1
            return
        seen[rid] = self.now
        for t in self.view.of_region(rid):
            before = t.epoch
            refresh_table(t, e.change)
            if t.epoch != before:
                self.table_changes += 1
        self.metrics.table_convergence_us = max(self.metrics.table_convergence_us, self.now - emitted)
        for w in self.rgraph.transit_neighbors(rid):
            if w not in seen:
                self._push(self.now + self._hop_latency(rid, w), EventKind.EVENT_ARRIVAL, (e, w, emitted))

    # ---------------------------------------------------------------- ticks

    def _on_periodic_tick(self, _):
        for t in self.view.tables.values():
            if t.dynamic:
                refresh_table(t, Tick(self.now))
        if self._pending:
            self._push(self.now + self.policy.refresh_interval_us, EventKind.PERIODIC_TICK, None)


def run(scenario: ScenarioConfig, seed: int = 0) -> Metrics:
    return Simulation(scenario, seed).run()
