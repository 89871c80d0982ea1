"""Simulation counters and their CSV form.

The CSV has two columns, ``metric,value``, one row per metric in a fixed
order:

===========================  ================================================
injected                     logical packets sent by flows
delivered                    logical packets that reached their receiver
dropped                      logical packets lost (all copies gone)
dropped_<Reason>             ``dropped`` split by the reason of the last copy
in_flight                    logical packets still travelling at the end
duplicates_suppressed        extra copies discarded at the receiver
multicast_deliveries         node deliveries made by region multicast
latency_mean_us              mean delivery latency
latency_p50_us ... p99_us    nearest-rank percentiles of delivery latency
latency_max_us               worst delivery latency
hops_<n>                     delivered packets that crossed ``n`` regions
redirected                   packets whose stack a redirect rewrote
forwarded_in_transition      arrivals the old region forwarded onward
notifications_sent           source notifications sent by the old region
explorers_emitted            explorer rounds started
explorer_copies              explorer copies delivered to some region
explorer_returns             return copies that reached their origin
explorers_suppressed         copies that arrived at an already-seen region
explorers_absorbed           copies that ran out of TTL
events_emitted               event packets started
event_copies_suppressed      duplicate event copies discarded
table_convergence_us         slowest event flood, emit to last region
region_loops                 copies that re-entered a region already visited
===========================  ================================================
"""

from __future__ import annotations

import csv
import io
import math
from collections import Counter
from dataclasses import dataclass, field

DROP_REASONS = (
    "EmptyStack",
    "LinkLoss",
    "NoBorder",
    "NoPath",
    "ReceiverNotInRegion",
    "StaleDestination",
    "UnknownRid",
)


def percentile(values: list[int], q: float) -> int:
    """Nearest-rank percentile; 0 for an empty list."""
    if not values:
        return 0
    ordered = sorted(values)
    rank = max(1, math.ceil(q / 100 * len(ordered)))
    return ordered[rank - 1]


@dataclass
class Metrics:
    injected: int = 0
    delivered: int = 0
    dropped: Counter = field(default_factory=Counter)
    in_flight: int = 0
    duplicates_suppressed: int = 0
    multicast_deliveries: int = 0
    latencies: list[int] = field(default_factory=list)
    hops: Counter = field(default_factory=Counter)
    redirected: int = 0
    forwarded_in_transition: int = 0
    notifications_sent: int = 0
    explorers_emitted: int = 0
    explorer_copies: int = 0
    explorer_returns: int = 0
    explorers_suppressed: int = 0
    explorers_absorbed: int = 0
    events_emitted: int = 0
    event_copies_suppressed: int = 0
    table_convergence_us: int = 0
    region_loops: int = 0

    @property
    def dropped_total(self) -> int:
        return sum(self.dropped.values())

    def rows(self) -> list[tuple[str, str]]:
        lat = self.latencies
        mean = sum(lat) / len(lat) if lat else 0.0
        rows = [
            ("injected", self.injected),
            ("delivered", self.delivered),
            ("dropped", self.dropped_total),
        ]
        reasons = sorted(set(DROP_REASONS) | set(self.dropped))
        rows += [(f"dropped_{r}", self.dropped.get(r, 0)) for r in reasons]
        rows += [
            ("in_flight", self.in_flight),
            ("duplicates_suppressed", self.duplicates_suppressed),
            ("multicast_deliveries", self.multicast_deliveries),
            ("latency_mean_us", f"{mean:.3f}"),
            ("latency_p50_us", percentile(lat, 50)),
            ("latency_p95_us", percentile(lat, 95)),
            ("latency_p99_us", percentile(lat, 99)),
            ("latency_max_us", max(lat) if lat else 0),
        ]
        top = max(self.hops) if self.hops else 0
        rows += [(f"hops_{n}", self.hops.get(n, 0)) for n in range(top + 1)]
        rows += [
            ("redirected", self.redirected),
            ("forwarded_in_transition", self.forwarded_in_transition),
            ("notifications_sent", self.notifications_sent),
            ("explorers_emitted", self.explorers_emitted),
            ("explorer_copies", self.explorer_copies),
            ("explorer_returns", self.explorer_returns),
            ("explorers_suppressed", self.explorers_suppressed),
            ("explorers_absorbed", self.explorers_absorbed),
            ("events_emitted", self.events_emitted),
            ("event_copies_suppressed", self.event_copies_suppressed),
            ("table_convergence_us", self.table_convergence_us),
            ("region_loops", self.region_loops),
        ]
        return [(k, str(v)) for k, v in rows]

    def as_dict(self) -> dict[str, str]:
        return dict(self.rows())

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(("metric", "value"))
        w.writerows(self.rows())
        return buf.getvalue()
