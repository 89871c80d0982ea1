"""Scenario description files for the simulator.

One statement per line, ``#`` starts a comment::

    topology fig5.topo
    decomposition fig5.regions
    flow <src-nid> <dst-nid|0> rate_pps <n> size <bytes> fission <k> [stack <rid,...>]
         [count <n>] [start_ms <t>] [mode minimal|maximal] [brs on|off]
         [latency_bucket <q>] [loss_bucket <q>]
    migrate <nid> <from-rid> <to-rid> at_ms <t>
    explorer <rid> at_ms <t> [ttl <n>]
    event <rid> at_ms <t> [removed|added|membership]
    loss <a> <b> <ppm>
    set <knob> <value>

Paths are relative to the scenario file. A ``fixture:`` prefix names one of
the bundled fixture files.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib.resources import files
from pathlib import Path
from typing import Optional

from ..regions import RegionDecomposition, Variant, parse_decomposition
from ..topology import NetworkGraph, parse_topology


class ScenarioError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass
class FlowSpec:
    src: int
    dst: int
    rate_pps: float = 1000.0
    size: int = 64
    fission: int = 1
    stack: Optional[tuple[int, ...]] = None
    count: int = 1
    start_ms: float = 0.0
    mode: Optional[str] = None
    brs: bool = False
    latency_bucket: Optional[int] = None
    loss_bucket: Optional[int] = None


@dataclass
class MigrationSpec:
    node: int
    from_region: int
    to_region: int
    at_ms: float


@dataclass
class ExplorerSpec:
    region: int
    at_ms: float
    ttl: Optional[int] = None


@dataclass
class EventSpec:
    region: int
    at_ms: float
    kind: str = "removed"


KNOBS = {
    "t_fwd_ms": float,
    "t_notify_ms": float,
    "redirect": "bool",
    "explorer_ttl": int,
    "effort_mode": str,
    "flow_cache": "bool",
    "populate_tables": "bool",
    "pull_ttl": int,
    "refresh_interval_ms": float,
    "instance_expansion": "bool",
    "variant": str,
}

DEFAULT_KNOBS = {
    "t_fwd_ms": 50.0,
    "t_notify_ms": 200.0,
    "redirect": True,
    "explorer_ttl": 16,
    "effort_mode": "minimal",
    "flow_cache": True,
    "populate_tables": True,
    "pull_ttl": 8,
    "refresh_interval_ms": 100.0,
    "instance_expansion": False,
    "variant": "disagg",
}


def _bool(value: str) -> bool:
    v = value.lower()
    if v in ("1", "on", "true", "yes"):
        return True
    if v in ("0", "off", "false", "no"):
        return False
    raise ValueError(f"expected on/off, got {value!r}")


@dataclass
class ScenarioConfig:
    graph: NetworkGraph
    decomp: RegionDecomposition
    flows: list[FlowSpec] = field(default_factory=list)
    migrations: list[MigrationSpec] = field(default_factory=list)
    explorers: list[ExplorerSpec] = field(default_factory=list)
    events: list[EventSpec] = field(default_factory=list)
    loss_overrides: dict[tuple[int, int], int] = field(default_factory=dict)
    knobs: dict = field(default_factory=lambda: dict(DEFAULT_KNOBS))

    def knob(self, name: str):
        return self.knobs[name]


def _resolve(ref: str, base: Path | None) -> str:
    if ref.startswith("fixture:"):
        return (files("smartregion") / "fixtures" / ref[len("fixture:"):]).read_text(encoding="utf-8")
    path = Path(ref)
    if not path.is_absolute() and base is not None:
        path = base / path
    return path.read_text(encoding="utf-8")


def _opts(toks: list[str], allowed: set[str], lineno: int) -> dict[str, str]:
    if len(toks) % 2:
        raise ScenarioError(f"dangling option {toks[-1]!r}", lineno)
    out = {}
    for k, v in zip(toks[::2], toks[1::2]):
        if k not in allowed:
            raise ScenarioError(f"unknown option {k!r}", lineno)
        out[k] = v
    return out


def parse_scenario(text: str, base: Path | str | None = None) -> ScenarioConfig:
    base = Path(base) if base is not None else None
    topo_ref = decomp_ref = None
    flows, migrations, explorers, events = [], [], [], []
    overrides: dict[tuple[int, int], int] = {}
    knobs = dict(DEFAULT_KNOBS)
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *toks = line.split()
        try:
            if head == "topology" and len(toks) == 1:
                topo_ref = toks[0]
            elif head == "decomposition" and len(toks) == 1:
                decomp_ref = toks[0]
            elif head == "flow":
                if len(toks) < 2:
                    raise ScenarioError("flow needs <src> <dst>", lineno)
                o = _opts(toks[2:], {"rate_pps", "size", "fission", "stack", "count", "start_ms",
                                     "mode", "brs", "latency_bucket", "loss_bucket"}, lineno)
                flows.append(FlowSpec(
                    int(toks[0]), int(toks[1]),
                    rate_pps=float(o.get("rate_pps", 1000)), size=int(o.get("size", 64)),
                    fission=int(o.get("fission", 1)),
                    stack=tuple(int(r) for r in o["stack"].split(",")) if "stack" in o else None,
                    count=int(o.get("count", 1)), start_ms=float(o.get("start_ms", 0)),
                    mode=o.get("mode"), brs=_bool(o.get("brs", "off")),
                    latency_bucket=int(o["latency_bucket"]) if "latency_bucket" in o else None,
                    loss_bucket=int(o["loss_bucket"]) if "loss_bucket" in o else None))
                f = flows[-1]
                if f.rate_pps <= 0 or f.count < 0 or not 1 <= f.fission <= 15:
                    raise ScenarioError("rate_pps must be positive, count >= 0, fission 1..15", lineno)
            elif head == "migrate":
                if len(toks) != 5 or toks[3] != "at_ms":
                    raise ScenarioError("expected 'migrate <nid> <from> <to> at_ms <t>'", lineno)
                migrations.append(MigrationSpec(int(toks[0]), int(toks[1]), int(toks[2]), float(toks[4])))
            elif head == "explorer":
                if len(toks) < 3 or toks[1] != "at_ms":
                    raise ScenarioError("expected 'explorer <rid> at_ms <t> [ttl <n>]'", lineno)
                o = _opts(toks[3:], {"ttl"}, lineno)
                explorers.append(ExplorerSpec(int(toks[0]), float(toks[2]),
                                              int(o["ttl"]) if "ttl" in o else None))
            elif head == "event":
                if len(toks) not in (3, 4) or toks[1] != "at_ms":
                    raise ScenarioError("expected 'event <rid> at_ms <t> [kind]'", lineno)
                kind = toks[3] if len(toks) == 4 else "removed"
                if kind not in ("removed", "added", "membership"):
                    raise ScenarioError(f"unknown event kind {kind!r}", lineno)
                events.append(EventSpec(int(toks[0]), float(toks[2]), kind))
            elif head == "loss" and len(toks) == 3:
                a, b, ppm = (int(t) for t in toks)
                overrides[(min(a, b), max(a, b))] = ppm
            elif head == "set" and len(toks) == 2:
                key, value = toks
                if key not in KNOBS:
                    raise ScenarioError(f"unknown knob {key!r}", lineno)
                conv = KNOBS[key]
                knobs[key] = _bool(value) if conv == "bool" else conv(value)
            else:
                raise ScenarioError(f"unrecognised statement {line!r}", lineno)
        except ValueError as exc:
            if isinstance(exc, ScenarioError):
                raise
            raise ScenarioError(str(exc), lineno) from None
    if topo_ref is None or decomp_ref is None:
        raise ScenarioError("scenario needs 'topology' and 'decomposition' lines")
    graph = parse_topology(_resolve(topo_ref, base))
    if overrides:
        for key in overrides:
            if not graph.has_link(*key):
                raise ScenarioError(f"loss override for missing link {key[0]}-{key[1]}")
        graph = graph.with_link_overrides({k: {"loss": v} for k, v in overrides.items()})
    decomp = parse_decomposition(_resolve(decomp_ref, base), graph, Variant.parse(knobs["variant"]))
    return ScenarioConfig(graph, decomp, flows, migrations, explorers, events, overrides, knobs)


def load_scenario(path) -> ScenarioConfig:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), path.parent)
