"""How much of a rail line needs small cells if riders buffer ahead.

A 10 MB segment of a 2.6 Mbps stream lasts about half a minute. At 300 km/h
that is a long stretch of track with no coverage at all, as long as the
next segment downloads while the train passes a cell.
"""

from smartregion import nr2

train = nr2.Nr2Scenario.from_units(speed_kmh=300, stream_mbps=2.6, segment_mb=10, access_mbps=50)
fast = nr2.report(train)
print(f"gap a segment covers      {fast.survivable_gap:8.0f} m")
print(f"download window at 50 Mbps {fast.access_window:7.2f} s")
print(f"cell diameter             {fast.cell_diameter:8.1f} m")
print(f"track needing coverage    {fast.coverage_fraction:8.1%}")

slow_train = nr2.Nr2Scenario.from_units(300, 2.6, 10, 18.4)
print(f"\nat 18.4 Mbps the window is {nr2.access_window(slow_train):.2f} s")
slow = nr2.report(slow_train, window=8.2)
print(f"with an 8.2 s window: cell {slow.cell_diameter:.0f} m, coverage {slow.coverage_fraction:.1%}")

c = nr2.compare_scenarios(fast, slow)
print(f"\nsmaller cells, if power tracks cell area: {c.power_saving:.0%} less power")
