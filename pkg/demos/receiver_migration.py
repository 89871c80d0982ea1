"""A receiver changes region while a flow is running.

The old region keeps forwarding for a short window and tells the source
where the receiver went. Turning both mechanisms off shows the packets that
would otherwise be lost.
"""

from smartregion.simulator import Simulation, parse_scenario

BASE = """
topology fixture:fig5.topo
decomposition fixture:fig5.regions
flow 1191 1181 rate_pps 10000 size 64 fission 1 count 200
migrate 1181 18 7 at_ms 10
"""

runs = {
    "forwarding window 50 ms, redirects on": "set t_fwd_ms 50\n",
    "no forwarding window, redirects off": "set t_fwd_ms 0\nset redirect off\n",
}

for label, knobs in runs.items():
    sim = Simulation(parse_scenario(BASE + knobs), seed=1)
    m = sim.run()
    print(label)
    print(f"  delivered {m.delivered}/{m.injected}, stale drops {m.dropped['StaleDestination']}")
    print(f"  redirected {m.redirected}, forwarded by old region {m.forwarded_in_transition}, "
          f"notifications {m.notifications_sent}")
    late = [r for r in sim.records.values() if r.delivered and r.trail[-1] == 7]
    if late:
        print(f"  first packet delivered in region 7 took {late[0].delivered_at - late[0].birth} us")
