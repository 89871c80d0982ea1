"""Brute-force reference implementations used only by the test-suite.

Nothing here imports the enumeration or path code under test; every oracle
works from the raw vertex/link lists.
"""

from __future__ import annotations

import random
from itertools import combinations

from smartregion.topology import NetworkGraph


def random_graph(rng: random.Random, max_vertices: int = 12, p: float | None = None) -> NetworkGraph:
    n = rng.randint(1, max_vertices)
    p = rng.uniform(0.15, 0.6) if p is None else p
    ids = list(range(1, n + 1))
    switches = [v for v in ids if rng.random() < 0.5]
    if not switches:
        switches = [ids[0]]
    nodes = [v for v in ids if v not in switches]
    links = [(a, b) for a, b in combinations(ids, 2) if rng.random() < p]
    return NetworkGraph.build(nodes=nodes, switches=switches, links=links)


class MaskGraph:
    def __init__(self, graph: NetworkGraph):
        self.ids = list(graph)
        self.index = {v: i for i, v in enumerate(self.ids)}
        n = len(self.ids)
        self.n = n
        self.adj = [0] * n
        for link in graph.links:
            i, j = self.index[link.a], self.index[link.b]
            self.adj[i] |= 1 << j
            self.adj[j] |= 1 << i
        self.switch_mask = sum(1 << self.index[s] for s in graph.switches)
        self.node_mask = ((1 << n) - 1) & ~self.switch_mask

    def bits(self, mask: int):
        i = 0
        while mask:
            if mask & 1:
                yield i
            mask >>= 1
            i += 1

    def connected(self, mask: int) -> bool:
        if not mask:
            return False
        start = mask & -mask
        seen = start
        frontier = start
        while frontier:
            nxt = 0
            for i in self.bits(frontier):
                nxt |= self.adj[i]
            nxt &= mask & ~seen
            seen |= nxt
            frontier = nxt
        return seen == mask

    def to_set(self, mask: int) -> frozenset[int]:
        return frozenset(self.ids[i] for i in self.bits(mask))


def pfr_mask(mg: MaskGraph, mask: int, variant: str) -> bool:
    if not mg.connected(mask):
        return False
    sw = mask & mg.switch_mask
    nd = mask & mg.node_mask
    if variant == "disagg":
        return all((mg.adj[s] & nd) == nd for s in mg.bits(sw))
    # every graph node adjacent to all member switches must be a member
    for n in mg.bits(mg.node_mask):
        if (mg.adj[n] & sw) == sw and not (nd >> n) & 1:
            return False
    return True


def brute_force_cfrs(graph: NetworkGraph, variant: str) -> set[frozenset[int]]:
    """Exhaustive subset search: PFRs with no strict PFR superset on the same switches."""
    mg = MaskGraph(graph)
    full = 1 << mg.n
    pfr = [pfr_mask(mg, m, variant) for m in range(full)]
    node_bits = list(mg.bits(mg.node_mask))
    # sup[m]: m or some superset differing only in node bits is a PFR
    sup = pfr[:]
    for b in node_bits:
        bit = 1 << b
        for m in range(full):
            if not m & bit and sup[m | bit]:
                sup[m] = True
    out = set()
    for m in range(full):
        if not pfr[m] or not m & mg.switch_mask:
            continue
        bigger = any(sup[m | (1 << b)] for b in node_bits if not (m >> b) & 1)
        if not bigger:
            out.add(mg.to_set(m))
    return out


def brute_force_simple_paths(adj: dict, src, dst) -> list[tuple]:
    """All simple paths via plain DFS over an adjacency dict."""
    out = []

    def dfs(path):
        v = path[-1]
        if v == dst:
            out.append(tuple(path))
            return
        for w in sorted(adj.get(v, ())):
            if w not in path:
                dfs(path + [w])

    dfs([src])
    return out


def bit_string_writer(fields: list[tuple[int, int]]) -> bytes:
    """Pack ``(value, width)`` pairs MSB-first via a literal '0'/'1' string."""
    bits = "".join(format(value, f"0{width}b") for value, width in fields)
    assert len(bits) % 8 == 0, "fields must fill whole bytes"
    return bytes(int(bits[i:i + 8], 2) for i in range(0, len(bits), 8))


def reference_header_bytes(stack=None, eph=None, intra=None, ids=None, qos=None, brs=None) -> bytes:
    """Header bytes built field by field from the documented layout.

    ``ids`` is ``(pid, fid, sender, receiver)`` and ``qos`` is
    ``(sh_lat, path_lat, sh_loss, path_loss, fission)``; ``None`` marks an
    absent field.
    """
    f = []
    active = (8 if stack is not None else 0) | (4 if ids is not None else 0) \
        | (2 if qos is not None else 0) | (1 if brs is not None else 0)
    f.append((active, 4))
    f.append((1 if eph is not None else 0, 1))
    f.append((1 if intra is not None else 0, 1))
    f.append((0, 2))
    if stack is not None:
        if eph is not None:
            f += [(eph, 4), (0, 4)]
        if intra is not None:
            f.append((intra, 8))
        f.append((len(stack), 8))
        f += [(r, 16) for r in stack]
    if ids is not None:
        pid, fid, sender, receiver = ids
        f += [(1 if pid is not None else 0, 1), (1 if fid is not None else 0, 1), (0, 2), (0, 4)]
        present = [v for v in (pid, fid) if v is not None]
        f += [(v, 12) for v in present]
        if len(present) == 1:
            f.append((0, 4))
        f += [(sender, 16), (receiver, 16)]
    if qos is not None:
        *metrics, fission = qos
        f += [(1 if m is not None else 0, 1) for m in metrics]
        f.append((fission, 4))
        present = [m for m in metrics if m is not None]
        f += [(m, 4) for m in present]
        if len(present) % 2:
            f.append((0, 4))
    if brs is not None:
        f += [(0, 4), (0, 4), (len(brs), 8)]
        f += [(r, 16) for r in brs]
    return bit_string_writer(f)
