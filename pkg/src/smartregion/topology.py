"""Network graph model and the line-oriented topology file format.

A topology file holds one statement per line::

    # comment
    node <id>
    switch <id>
    link <id> <id> [latency_us] [loss_ppm] [bw_kbps]

Ids are decimal 16-bit values; 0 is reserved as the unset sentinel.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Iterator

MAX_ID = 0xFFFF

DEFAULT_LATENCY_US = 100
DEFAULT_LOSS_PPM = 0
DEFAULT_BANDWIDTH_KBPS = 1_000_000


class TopologyError(ValueError):
    """Raised for malformed or inconsistent topology input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DuplicateVertex(TopologyError):
    pass


class DuplicateLink(TopologyError):
    pass


class UnknownVertex(TopologyError):
    pass


class MalformedLine(TopologyError):
    pass


class Kind(enum.Enum):
    NODE = "node"
    SWITCH = "switch"


@dataclass(frozen=True, order=True)
class Vertex:
    id: int
    kind: Kind = field(compare=False)


@dataclass(frozen=True)
class Link:
    a: int
    b: int
    latency: int = DEFAULT_LATENCY_US
    loss: int = DEFAULT_LOSS_PPM
    bandwidth: int = DEFAULT_BANDWIDTH_KBPS

    def __post_init__(self):
        if self.a == self.b:
            raise TopologyError(f"self-loop on vertex {self.a}")
        # canonical orientation keeps (a, b) and (b, a) the same link
        if self.a > self.b:
            a, b = self.b, self.a
            object.__setattr__(self, "a", a)
            object.__setattr__(self, "b", b)
        if self.latency < 0:
            raise TopologyError("latency must be non-negative")
        if not 0 <= self.loss <= 1_000_000:
            raise TopologyError("loss must be within 0..1000000 ppm")
        if self.bandwidth <= 0:
            raise TopologyError("bandwidth must be positive")

    @property
    def key(self) -> tuple[int, int]:
        return (self.a, self.b)

    def other(self, v: int) -> int:
        return self.b if v == self.a else self.a

    @property
    def loss_probability(self) -> float:
        return self.loss / 1_000_000


def _check_id(value: int, line: int | None = None) -> int:
    if not 1 <= value <= MAX_ID:
        raise TopologyError(f"vertex id {value} outside 1..{MAX_ID}", line)
    return value


class NetworkGraph:
    """Undirected graph of typed vertices. Immutable once built."""

    def __init__(self, vertices: Iterable[Vertex] = (), links: Iterable[Link] = ()):
        self._vertices: dict[int, Vertex] = {}
        for v in vertices:
            _check_id(v.id)
            if v.id in self._vertices:
                raise DuplicateVertex(f"duplicate vertex {v.id}")
            self._vertices[v.id] = v
        self._links: dict[tuple[int, int], Link] = {}
        self._adj: dict[int, set[int]] = {v: set() for v in self._vertices}
        for link in links:
            for end in (link.a, link.b):
                if end not in self._vertices:
                    raise UnknownVertex(f"link references undeclared vertex {end}")
            if link.key in self._links:
                raise DuplicateLink(f"duplicate link {link.a}-{link.b}")
            self._links[link.key] = link
            self._adj[link.a].add(link.b)
            self._adj[link.b].add(link.a)

    @classmethod
    def build(cls, nodes: Iterable[int] = (), switches: Iterable[int] = (),
              links: Iterable[tuple] = ()) -> "NetworkGraph":
        """Convenience constructor: ``links`` holds ``(a, b, *attrs)`` tuples."""
        verts = [Vertex(n, Kind.NODE) for n in nodes]
        verts += [Vertex(s, Kind.SWITCH) for s in switches]
        return cls(verts, [Link(*spec) for spec in links])

    def __contains__(self, v: int) -> bool:
        return v in self._vertices

    def __len__(self) -> int:
        return len(self._vertices)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._vertices))

    @property
    def vertices(self) -> list[Vertex]:
        return [self._vertices[v] for v in sorted(self._vertices)]

    @property
    def links(self) -> list[Link]:
        return [self._links[k] for k in sorted(self._links)]

    def vertex(self, v: int) -> Vertex:
        try:
            return self._vertices[v]
        except KeyError:
            raise UnknownVertex(f"unknown vertex {v}") from None

    def kind(self, v: int) -> Kind:
        return self.vertex(v).kind

    def is_switch(self, v: int) -> bool:
        return self.vertex(v).kind is Kind.SWITCH

    def is_node(self, v: int) -> bool:
        return self.vertex(v).kind is Kind.NODE

    @property
    def switches(self) -> list[int]:
        return [v for v in sorted(self._vertices) if self._vertices[v].kind is Kind.SWITCH]

    @property
    def nodes(self) -> list[int]:
        return [v for v in sorted(self._vertices) if self._vertices[v].kind is Kind.NODE]

    def neighbors(self, v: int) -> set[int]:
        if v not in self._adj:
            raise UnknownVertex(f"unknown vertex {v}")
        return set(self._adj[v])

    def has_link(self, a: int, b: int) -> bool:
        return b in self._adj.get(a, ())

    def link(self, a: int, b: int) -> Link:
        key = (a, b) if a < b else (b, a)
        try:
            return self._links[key]
        except KeyError:
            raise TopologyError(f"no link {a}-{b}") from None

    def with_link_overrides(self, overrides: dict[tuple[int, int], dict]) -> "NetworkGraph":
        """Copy of the graph with selected link attributes replaced."""
        links = []
        for link in self.links:
            attrs = overrides.get(link.key)
            if attrs:
                link = Link(link.a, link.b, **{
                    "latency": link.latency, "loss": link.loss,
                    "bandwidth": link.bandwidth, **attrs})
            links.append(link)
        return NetworkGraph(self.vertices, links)


def neighbors(graph: NetworkGraph, v: int) -> set[int]:
    return graph.neighbors(v)


def connected_components(graph: NetworkGraph, within: Iterable[int] | None = None) -> list[list[int]]:
    """Components of the graph (or of the subgraph induced by ``within``)."""
    members = set(graph) if within is None else set(within)
    seen: set[int] = set()
    comps = []
    for start in sorted(members):
        if start in seen:
            continue
        comp = []
        queue = deque([start])
        seen.add(start)
        while queue:
            v = queue.popleft()
            comp.append(v)
            for w in graph.neighbors(v):
                if w in members and w not in seen:
                    seen.add(w)
                    queue.append(w)
        comps.append(sorted(comp))
    return comps


@dataclass
class ValidationReport:
    components: list[list[int]]
    switches: list[int]
    nodes: list[int]
    warnings: list[tuple[str, int]]

    @property
    def ok(self) -> bool:
        return not self.warnings


def validate_graph(graph: NetworkGraph) -> ValidationReport:
    warnings = []
    for n in graph.nodes:
        if not any(graph.is_switch(w) for w in graph.neighbors(n)):
            warnings.append(("UnreachableNode", n))
    return ValidationReport(
        components=connected_components(graph),
        switches=graph.switches,
        nodes=graph.nodes,
        warnings=warnings,
    )


def _tokens(text: str) -> Iterator[tuple[int, list[str]]]:
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield lineno, line.split()


def _int(tok: str, lineno: int) -> int:
    try:
        return int(tok, 10)
    except ValueError:
        raise MalformedLine(f"expected decimal integer, got {tok!r}", lineno) from None


def parse_topology(text: str) -> NetworkGraph:
    vertices: dict[int, Vertex] = {}
    links: dict[tuple[int, int], Link] = {}
    for lineno, toks in _tokens(text):
        head = toks[0]
        if head in ("node", "switch"):
            if len(toks) != 2:
                raise MalformedLine(f"'{head}' takes exactly one id", lineno)
            vid = _check_id(_int(toks[1], lineno), lineno)
            if vid in vertices:
                raise DuplicateVertex(f"duplicate vertex {vid}", lineno)
            vertices[vid] = Vertex(vid, Kind(head))
        elif head == "link":
            if not 3 <= len(toks) <= 6:
                raise MalformedLine("'link' takes 2 ids and up to 3 attributes", lineno)
            vals = [_int(t, lineno) for t in toks[1:]]
            for end in vals[:2]:
                if end not in vertices:
                    raise UnknownVertex(f"link references undeclared vertex {end}", lineno)
            try:
                link = Link(*vals)
            except TopologyError as exc:
                raise MalformedLine(str(exc), lineno) from None
            if link.key in links:
                raise DuplicateLink(f"duplicate link {link.a}-{link.b}", lineno)
            links[link.key] = link
        else:
            raise MalformedLine(f"unknown statement {head!r}", lineno)
    return NetworkGraph(vertices.values(), links.values())


def serialize_topology(graph: NetworkGraph) -> str:
    """Canonical text form; ``parse_topology`` inverts it exactly."""
    out = [f"{v.kind.value} {v.id}" for v in graph.vertices]
    for link in graph.links:
        out.append(f"link {link.a} {link.b} {link.latency} {link.loss} {link.bandwidth}")
    return "\n".join(out) + "\n"


def load_topology(path) -> NetworkGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_topology(fh.read())
