"""``smartregion`` command-line tool.

Exit status: 0 on success, 1 on a domain error (bad input data, no route,
...), 2 on a usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import nr2
from .region_map import build_region_graph, generate_region_map
from .regions import Variant, decompose, load_decomposition, serialize_decomposition
from .routing import EffortMode, PolicyConfig, SwitchContext, build_tables, parse_policy, route_packet
from .simulator import Simulation, load_scenario
from .topology import load_topology
from .wire import header as hdr
from .wire import matin


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    return Path(path).read_text(encoding="utf-8")


def _write(text: str, output: str | None):
    if output and output != "-":
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load_pair(args):
    graph = load_topology(args.topology)
    decomp = load_decomposition(args.decomposition, graph, Variant.parse(args.variant))
    return graph, decomp


def cmd_decompose(args) -> int:
    graph = load_topology(args.topology)
    d = decompose(graph, Variant.parse(args.variant), strategy=args.strategy,
                  max_regions=args.max_regions)
    _write(serialize_decomposition(d), args.output)
    return 0


def cmd_map(args) -> int:
    graph, decomp = _load_pair(args)
    rg = build_region_graph(graph, decomp)
    origins = [args.origin] if args.origin is not None else sorted(rg.regions)
    text = "".join(generate_region_map(rg, o, args.instances).dump() for o in origins)
    _write(text, args.output)
    return 0


def _header_hex(h: hdr.SmartRegionHeader) -> str:
    # a fully popped stack has no wire form; show the rest of the header
    if h.region_stack is not None and not h.stack:
        h = hdr.SmartRegionHeader(None, h.ids, h.qos, h.brs)
    return hdr.to_hex(hdr.encode_header(h)) if h.active else "-"


def cmd_route(args) -> int:
    graph, decomp = _load_pair(args)
    rg = build_region_graph(graph, decomp)
    policy = parse_policy(_read(args.policy)) if args.policy else PolicyConfig()
    if args.mode:
        policy.effort_mode = EffortMode.parse(args.mode)
    if args.instances:
        policy.instance_expansion = True
    region = rg.regions.get(args.region)
    if region is None:
        raise ValueError(f"unknown region {args.region}")
    switch = args.switch if args.switch is not None else min(region.switches)
    view = build_tables(rg, policy)
    table = view.get(switch, args.region)
    if table is None:
        raise ValueError(f"switch {switch} is not in region {args.region}")
    if args.dump_table:
        _write(table.dump(), args.output)
        return 0
    if args.header is None:
        raise ValueError("route needs --header (or --dump-table)")
    h, _ = hdr.decode_header(hdr.parse_hex(" ".join(args.header)))
    ctx = SwitchContext(switch, args.region, graph, decomp, rg, table, view, policy)
    d = route_packet(ctx, h)
    lines = [f"action={d.action.value}"]
    if d.reason:
        lines.append(f"reason={d.reason}")
    if d.fallback:
        lines.append("fallback=1")
    if d.targets:
        lines.append("targets=" + ",".join(map(str, d.targets)))
    for b in d.branches:
        lines.append(f"branch next={b.next_region} egress={b.egress_switch} path={b.path} "
                     f"header={_header_hex(b.header)}")
    if not d.branches:
        lines.append(f"header={_header_hex(d.updated_header)}")
    _write("\n".join(lines) + "\n", args.output)
    return 0


def cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    metrics = Simulation(scenario, args.seed).run()
    _write(metrics.to_csv(), args.output)
    return 0


def cmd_encode_header(args) -> int:
    text = " ".join(args.description) if args.description else _read(args.input)
    h = hdr.parse_description(text)
    _write(hdr.to_hex(hdr.encode_header(h)) + "\n", args.output)
    return 0


def cmd_decode_header(args) -> int:
    text = " ".join(args.hex) if args.hex else _read(args.input)
    h, rest = hdr.decode_header(hdr.parse_hex(text))
    out = hdr.describe_header(h) + "\n"
    if rest:
        out += f"# {len(rest)} trailing bytes\n"
    _write(out, args.output)
    return 0


def cmd_name(args) -> int:
    if args.bits:
        _write(matin.address_to_name(matin.parse_bits(args.bits)) + "\n", None)
    else:
        _write(matin.format_bits(matin.name_to_address(args.name)) + "\n", None)
    return 0


def cmd_nr2(args) -> int:
    s = nr2.Nr2Scenario.from_units(args.speed_kmh, args.stream_mbps, args.segment_mb, args.access_mbps)
    r = nr2.report(s, args.window)
    lines = [
        f"survivable_gap_m={r.survivable_gap:.1f}",
        f"access_window_s={r.access_window:.3f}",
        f"cell_diameter_m={r.cell_diameter:.1f}",
        f"coverage_fraction={r.coverage_fraction:.4f}",
    ]
    if args.compare_window is not None:
        other = nr2.report(s, args.compare_window)
        c = nr2.compare_scenarios(r, other)
        lines += [f"compare_cell_diameter_m={other.cell_diameter:.1f}",
                  f"compare_coverage_fraction={other.coverage_fraction:.4f}",
                  f"power_saving={c.power_saving:.4f}"]
    _write("\n".join(lines) + "\n", None)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="smartregion", description="Region decomposition, routing and simulation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def pair(sp):
        sp.add_argument("--topology", required=True)
        sp.add_argument("--decomposition", required=True)
        sp.add_argument("--variant", default="disagg", choices=["disagg", "reach"])

    sp = sub.add_parser("decompose", help="derive a region decomposition from a topology")
    sp.add_argument("--topology", required=True)
    sp.add_argument("--variant", default="disagg", choices=["disagg", "reach"])
    sp.add_argument("--strategy", default="cover", choices=["cover", "all"])
    sp.add_argument("--max-regions", type=int, default=10_000)
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("map", help="print region maps")
    pair(sp)
    sp.add_argument("--origin", type=int)
    sp.add_argument("--instances", action="store_true", help="split multi-path regions")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_map)

    sp = sub.add_parser("route", help="route one encoded header at a switch")
    pair(sp)
    sp.add_argument("--region", type=int, required=True)
    sp.add_argument("--switch", type=int)
    sp.add_argument("--header", nargs="+", help="hex bytes, whitespace allowed")
    sp.add_argument("--mode", choices=["minimal", "maximal"])
    sp.add_argument("--instances", action="store_true")
    sp.add_argument("--policy", help="key=value policy file")
    sp.add_argument("--dump-table", action="store_true")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_route)

    sp = sub.add_parser("simulate", help="run a scenario and print metrics CSV")
    sp.add_argument("--scenario", required=True)
    sp.add_argument("--seed", type=int, default=int(os.environ.get("SMARTREGION_SEED", "0")))
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("encode-header", help="key=value description to hex")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--description", nargs="+")
    g.add_argument("--input")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_encode_header)

    sp = sub.add_parser("decode-header", help="hex to key=value description")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--hex", nargs="+")
    g.add_argument("--input")
    sp.add_argument("--output")
    sp.set_defaults(func=cmd_decode_header)

    sp = sub.add_parser("name", help="convert between address bits and names")
    g = sp.add_mutually_exclusive_group(required=True)
    g.add_argument("--bits", nargs="+", help="16-bit groups, X counts as 0")
    g.add_argument("--name")
    sp.set_defaults(func=cmd_name)

    sp = sub.add_parser("nr2", help="next-region reservation numbers")
    sp.add_argument("--speed-kmh", type=float, required=True)
    sp.add_argument("--stream-mbps", type=float, required=True)
    sp.add_argument("--segment-mb", type=float, required=True)
    sp.add_argument("--access-mbps", type=float, required=True)
    sp.add_argument("--window", type=float, help="override the access window (s)")
    sp.add_argument("--compare-window", type=float, help="second window for a power comparison")
    sp.set_defaults(func=cmd_nr2)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"smartregion: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
