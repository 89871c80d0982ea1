"""Next-region reservation arithmetic for riders on fast vehicles.

A node that buffers one media segment can ride through a coverage gap as
long as the segment lasts; it then needs an access window long enough to
download the next segment. Decimal units throughout (1 MB = 1e6 bytes,
1 Mbps = 1e6 bit/s).
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Nr2Scenario:
    speed: float        # m/s
    stream_rate: float  # bit/s
    segment_size: float  # bytes
    access_rate: float  # bit/s

    def __post_init__(self):
        for name in ("speed", "stream_rate", "segment_size", "access_rate"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be strictly positive")

    @classmethod
    def from_units(cls, speed_kmh: float, stream_mbps: float, segment_mb: float,
                   access_mbps: float) -> "Nr2Scenario":
        return cls(speed_kmh / 3.6, stream_mbps * 1e6, segment_mb * 1e6, access_mbps * 1e6)


@dataclass(frozen=True)
class Nr2Report:
    survivable_gap: float   # m
    access_window: float    # s
    cell_diameter: float    # m
    coverage_fraction: float


def segment_bits(s: Nr2Scenario) -> float:
    return s.segment_size * 8


def survivable_gap(s: Nr2Scenario) -> float:
    return s.speed * segment_bits(s) / s.stream_rate


def access_window(s: Nr2Scenario) -> float:
    return segment_bits(s) / s.access_rate


def cell_diameter(s: Nr2Scenario, window: float | None = None) -> float:
    return s.speed * (access_window(s) if window is None else window)


def coverage_fraction(s: Nr2Scenario, window: float | None = None) -> float:
    return cell_diameter(s, window) / survivable_gap(s)


def report(s: Nr2Scenario, window: float | None = None) -> Nr2Report:
    """Full report; ``window`` overrides the computed access window."""
    w = access_window(s) if window is None else window
    return Nr2Report(survivable_gap(s), w, cell_diameter(s, w), coverage_fraction(s, w))


@dataclass(frozen=True)
class Comparison:
    window_ratio: float
    diameter_ratio: float
    fraction_ratio: float
    power_saving: float


def compare_scenarios(a: Nr2Report, b: Nr2Report) -> Comparison:
    """Ratios a/b, plus the saving of ``a`` over ``b`` if power tracks cell area."""
    d = a.cell_diameter / b.cell_diameter
    return Comparison(
        window_ratio=a.access_window / b.access_window,
        diameter_ratio=d,
        fraction_ratio=a.coverage_fraction / b.coverage_fraction,
        power_saving=1.0 - d * d,
    )
