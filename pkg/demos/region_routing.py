"""Walk a packet across the bundled nine-region fixture.

Loads the topology and its decomposition, prints the region graph, then
shows what a switch in region 3 does with the same destination under both
effort modes.
"""

from importlib.resources import files

from smartregion.region_map import build_region_graph
from smartregion.regions import Variant, parse_decomposition
from smartregion.routing import PolicyConfig, SwitchContext, build_tables, resolve_stack, route_packet
from smartregion.topology import parse_topology
from smartregion.wire.header import IdsSF, RegionStackSF, SmartRegionHeader, encode_header, to_hex

fixtures = files("smartregion") / "fixtures"
graph = parse_topology((fixtures / "fig5.topo").read_text())
decomp = parse_decomposition((fixtures / "fig5.regions").read_text(), graph, Variant.DISAGG)
rg = build_region_graph(graph, decomp)

print("regions:", sorted(rg.regions))
print("region links:", sorted(tuple(sorted(e)) for e in rg.edges))
print("diameter:", rg.diameter())

# A stack holding only the destination region leaves the choice of path open.
h = SmartRegionHeader(RegionStackSF((18,)), IdsSF(1191, 1181, flow_fid=1))
print("\nheader on the wire:", to_hex(encode_header(h)))
for mode in ("minimal", "maximal"):
    paths = resolve_stack(rg, 3, h, mode, instance_expansion=True)
    print(f"{mode:8s} candidates at region 3:", ", ".join(map(str, paths)))

# Waypoints pin the route: 8 then 7 before reaching 18.
pinned = h.with_stack((8, 7, 18))
print("via 8,7:", ", ".join(map(str, resolve_stack(rg, 3, pinned, "maximal"))))

view = build_tables(rg)
switch = 31
print(f"\ntable at switch {switch}:")
print(view.get(switch, 3).dump(), end="")

ctx = SwitchContext(switch, 3, graph, decomp, rg, view.get(switch, 3), view, PolicyConfig())
d = route_packet(ctx, h, mode="maximal")
print(f"decision: {d.action.value} to region {d.next_region} via border {d.egress_switch}")
print("rewritten stack:", d.updated_header.stack)
