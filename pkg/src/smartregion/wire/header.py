"""In-memory SmartRegion header and its binary codec.

Wire layout, MSB first within each byte, multi-byte integers big-endian::

    byte 0        [active SFs: RS IDS QOS BRS][RS flags: EPH INTRA 0 0]
    region stack  [eph FID nibble | 0]? [intra FID]? [depth] [RID x depth]
    IDs           [flags: PID FID 0 0 | 0] [12-bit PID/FID, packed]
                  [sender NID] [receiver NID]
    QoS           [flags: SHL PL SHLOSS PLOSS | fission] [4-bit metrics, packed]
    BRS           [0 | 0] [depth] [RID x depth]

Blocks appear in that order and only when flagged in byte 0.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional


class HeaderError(ValueError):
    pass


class InvariantViolation(HeaderError):
    def __init__(self, field_name: str, message: str):
        self.field = field_name
        super().__init__(f"{field_name}: {message}")


class DecodeError(HeaderError):
    def __init__(self, offset: int, message: str):
        self.offset = offset
        super().__init__(f"offset {offset}: {message}")


class Truncated(DecodeError):
    def __init__(self, offset: int):
        super().__init__(offset, "truncated header")


class ReservedBitsNonzero(DecodeError):
    def __init__(self, offset: int):
        super().__init__(offset, "reserved or filler bits are nonzero")


class ZeroRid(DecodeError):
    def __init__(self, offset: int):
        super().__init__(offset, "RID 0 is reserved")


class BadField(DecodeError):
    pass


class EmptyStack(HeaderError):
    pass


SF_REGION_STACK = 0x8
SF_IDS = 0x4
SF_QOS = 0x2
SF_BRS = 0x1

QOS_FIELDS = ("single_hop_latency", "path_latency", "single_hop_loss", "path_loss")


@dataclass(frozen=True)
class RegionStackSF:
    stack: tuple[int, ...] = ()
    ephemeral_single_hop_fid: Optional[int] = None
    intra_region_fid: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "stack", tuple(self.stack))

    @property
    def top(self) -> int:
        if not self.stack:
            raise EmptyStack("region stack is empty")
        return self.stack[0]


@dataclass(frozen=True)
class IdsSF:
    sender_nid: int
    receiver_nid: int = 0
    packet_pid: Optional[int] = None
    flow_fid: Optional[int] = None

    @property
    def multicast(self) -> bool:
        return self.receiver_nid == 0


@dataclass(frozen=True)
class QosSF:
    single_hop_latency: Optional[int] = None
    path_latency: Optional[int] = None
    single_hop_loss: Optional[int] = None
    path_loss: Optional[int] = None
    fission_rate: int = 1


@dataclass(frozen=True)
class BrsSF:
    trail: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "trail", tuple(self.trail))


@dataclass(frozen=True)
class SmartRegionHeader:
    region_stack: Optional[RegionStackSF] = None
    ids: Optional[IdsSF] = None
    qos: Optional[QosSF] = None
    brs: Optional[BrsSF] = None

    @property
    def active(self) -> int:
        return ((SF_REGION_STACK if self.region_stack is not None else 0)
                | (SF_IDS if self.ids is not None else 0)
                | (SF_QOS if self.qos is not None else 0)
                | (SF_BRS if self.brs is not None else 0))

    @property
    def stack(self) -> tuple[int, ...]:
        return self.region_stack.stack if self.region_stack is not None else ()

    @property
    def fission_rate(self) -> int:
        return self.qos.fission_rate if self.qos is not None else 1

    def with_stack(self, stack) -> "SmartRegionHeader":
        rs = self.region_stack or RegionStackSF()
        return replace(self, region_stack=replace(rs, stack=tuple(stack)))

    def with_fission(self, rate: int) -> "SmartRegionHeader":
        if self.qos is None:
            return self if rate == 1 else replace(self, qos=QosSF(fission_rate=rate))
        return replace(self, qos=replace(self.qos, fission_rate=rate))

    def append_brs(self, rid: int) -> "SmartRegionHeader":
        if self.brs is None:
            return self
        return replace(self, brs=BrsSF(self.brs.trail + (rid,)))


def push_region(h: SmartRegionHeader, rid: int) -> SmartRegionHeader:
    if not 1 <= rid <= 0xFFFF:
        raise InvariantViolation("region_stack.stack", f"RID {rid} outside 1..65535")
    return h.with_stack((rid,) + h.stack)


def pop_region(h: SmartRegionHeader) -> SmartRegionHeader:
    if not h.stack:
        raise EmptyStack("cannot pop an empty region stack")
    return h.with_stack(h.stack[1:])


# ---------------------------------------------------------------- validation

def _uint(name: str, value, bits: int, minimum: int = 0):
    if not isinstance(value, int) or isinstance(value, bool) or not minimum <= value < (1 << bits):
        raise InvariantViolation(name, f"{value!r} is not in {minimum}..{(1 << bits) - 1}")


def _rids(name: str, rids, lo: int):
    if not lo <= len(rids) <= 255:
        raise InvariantViolation(name, f"length {len(rids)} outside {lo}..255")
    for r in rids:
        _uint(name, r, 16, minimum=1)


def validate_header(h: SmartRegionHeader) -> None:
    if h.active == 0:
        raise InvariantViolation("header", "at least one SuperField must be present")
    rs = h.region_stack
    if rs is not None:
        _rids("region_stack.stack", rs.stack, 1)
        if rs.ephemeral_single_hop_fid is not None:
            _uint("region_stack.ephemeral_single_hop_fid", rs.ephemeral_single_hop_fid, 4)
        if rs.intra_region_fid is not None:
            _uint("region_stack.intra_region_fid", rs.intra_region_fid, 8)
    if h.ids is not None:
        _uint("ids.sender_nid", h.ids.sender_nid, 16, minimum=1)
        _uint("ids.receiver_nid", h.ids.receiver_nid, 16)
        if h.ids.packet_pid is not None:
            _uint("ids.packet_pid", h.ids.packet_pid, 12)
        if h.ids.flow_fid is not None:
            _uint("ids.flow_fid", h.ids.flow_fid, 12)
    if h.qos is not None:
        for name in QOS_FIELDS:
            value = getattr(h.qos, name)
            if value is not None:
                _uint(f"qos.{name}", value, 4)
        _uint("qos.fission_rate", h.qos.fission_rate, 4, minimum=1)
    if h.brs is not None:
        _rids("brs.trail", h.brs.trail, 0)


# ---------------------------------------------------------------- encoding

def _pack_nibbles(nibbles: list[int]) -> bytes:
    if len(nibbles) % 2:
        nibbles = nibbles + [0]
    return bytes((nibbles[i] << 4) | nibbles[i + 1] for i in range(0, len(nibbles), 2))


def encode_header(h: SmartRegionHeader) -> bytes:
    validate_header(h)
    rs = h.region_stack
    flags = 0
    if rs is not None:
        flags = (0x8 if rs.ephemeral_single_hop_fid is not None else 0) | \
                (0x4 if rs.intra_region_fid is not None else 0)
    out = bytearray([(h.active << 4) | flags])

    if rs is not None:
        if rs.ephemeral_single_hop_fid is not None:
            out.append(rs.ephemeral_single_hop_fid << 4)
        if rs.intra_region_fid is not None:
            out.append(rs.intra_region_fid)
        out.append(len(rs.stack))
        for rid in rs.stack:
            out += rid.to_bytes(2, "big")

    if h.ids is not None:
        ids = h.ids
        present = [v for v in (ids.packet_pid, ids.flow_fid) if v is not None]
        out.append(((0x8 if ids.packet_pid is not None else 0)
                    | (0x4 if ids.flow_fid is not None else 0)) << 4)
        if len(present) == 2:
            out += ((present[0] << 12) | present[1]).to_bytes(3, "big")
        elif present:
            out += (present[0] << 4).to_bytes(2, "big")
        out += ids.sender_nid.to_bytes(2, "big")
        out += ids.receiver_nid.to_bytes(2, "big")

    if h.qos is not None:
        q = h.qos
        mask = 0
        metrics = []
        for bit, name in zip((0x8, 0x4, 0x2, 0x1), QOS_FIELDS):
            value = getattr(q, name)
            if value is not None:
                mask |= bit
                metrics.append(value)
        out.append((mask << 4) | q.fission_rate)
        out += _pack_nibbles(metrics)

    if h.brs is not None:
        out.append(0)
        out.append(len(h.brs.trail))
        for rid in h.brs.trail:
            out += rid.to_bytes(2, "big")
    return bytes(out)


# ---------------------------------------------------------------- decoding

class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise Truncated(self.pos)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def byte(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return int.from_bytes(self.take(2), "big")

    def rids(self, depth: int) -> tuple[int, ...]:
        out = []
        for _ in range(depth):
            at = self.pos
            rid = self.u16()
            if rid == 0:
                raise ZeroRid(at)
            out.append(rid)
        return tuple(out)


def decode_header(data: bytes) -> tuple[SmartRegionHeader, bytes]:
    """Parse a header; returns ``(header, remaining payload bytes)``."""
    data = bytes(data)
    r = _Reader(data)
    first = r.byte()
    active, rs_flags = first >> 4, first & 0xF
    if active == 0:
        raise BadField(0, "no SuperField present")
    if rs_flags & 0x3 or (rs_flags and not active & SF_REGION_STACK):
        raise ReservedBitsNonzero(0)

    region_stack = ids = qos = brs = None
    if active & SF_REGION_STACK:
        eph = intra = None
        if rs_flags & 0x8:
            at = r.pos
            b = r.byte()
            if b & 0xF:
                raise ReservedBitsNonzero(at)
            eph = b >> 4
        if rs_flags & 0x4:
            intra = r.byte()
        at = r.pos
        depth = r.byte()
        if depth == 0:
            raise BadField(at, "region stack depth must be at least 1")
        region_stack = RegionStackSF(r.rids(depth), eph, intra)

    if active & SF_IDS:
        at = r.pos
        b = r.byte()
        if b & 0x3F:
            raise ReservedBitsNonzero(at)
        has_pid, has_fid = bool(b & 0x80), bool(b & 0x40)
        pid = fid = None
        if has_pid and has_fid:
            v = int.from_bytes(r.take(3), "big")
            pid, fid = v >> 12, v & 0xFFF
        elif has_pid or has_fid:
            at = r.pos
            v = int.from_bytes(r.take(2), "big")
            if v & 0xF:
                raise ReservedBitsNonzero(at + 1)
            if has_pid:
                pid = v >> 4
            else:
                fid = v >> 4
        at = r.pos
        sender = r.u16()
        if sender == 0:
            raise BadField(at, "sender NID must be nonzero")
        ids = IdsSF(sender, r.u16(), pid, fid)

    if active & SF_QOS:
        at = r.pos
        b = r.byte()
        mask, fission = b >> 4, b & 0xF
        if fission == 0:
            raise BadField(at, "fission rate must be at least 1")
        count = bin(mask).count("1")
        raw = r.take((count + 1) // 2)
        nibbles = []
        for byte in raw:
            nibbles += [byte >> 4, byte & 0xF]
        if count % 2 and nibbles[-1]:
            raise ReservedBitsNonzero(r.pos - 1)
        values = iter(nibbles[:count])
        kwargs = {}
        for bit, name in zip((0x8, 0x4, 0x2, 0x1), QOS_FIELDS):
            if mask & bit:
                kwargs[name] = next(values)
        qos = QosSF(fission_rate=fission, **kwargs)

    if active & SF_BRS:
        at = r.pos
        if r.byte() != 0:
            raise ReservedBitsNonzero(at)
        brs = BrsSF(r.rids(r.byte()))

    return SmartRegionHeader(region_stack, ids, qos, brs), data[r.pos:]


# ---------------------------------------------------------------- text form

def describe_header(h: SmartRegionHeader) -> str:
    """Canonical ``key=value`` description, inverse of :func:`parse_description`."""
    parts = []
    rs = h.region_stack
    if rs is not None:
        parts.append("stack=" + ",".join(map(str, rs.stack)))
        if rs.ephemeral_single_hop_fid is not None:
            parts.append(f"eph={rs.ephemeral_single_hop_fid}")
        if rs.intra_region_fid is not None:
            parts.append(f"intra={rs.intra_region_fid}")
    if h.ids is not None:
        if h.ids.packet_pid is not None:
            parts.append(f"pid={h.ids.packet_pid}")
        if h.ids.flow_fid is not None:
            parts.append(f"fid={h.ids.flow_fid}")
        parts.append(f"sender={h.ids.sender_nid}")
        parts.append(f"receiver={h.ids.receiver_nid}")
    if h.qos is not None:
        for key, name in zip(("sh_lat", "path_lat", "sh_loss", "path_loss"), QOS_FIELDS):
            value = getattr(h.qos, name)
            if value is not None:
                parts.append(f"{key}={value}")
        parts.append(f"fission={h.qos.fission_rate}")
    if h.brs is not None:
        parts.append("brs=" + ",".join(map(str, h.brs.trail)))
    return " ".join(parts)


_QOS_KEYS = dict(zip(("sh_lat", "path_lat", "sh_loss", "path_loss"), QOS_FIELDS))


def parse_description(text: str) -> SmartRegionHeader:
    kv: dict[str, str] = {}
    for tok in text.split():
        if "=" not in tok:
            raise HeaderError(f"expected key=value, got {tok!r}")
        key, value = tok.split("=", 1)
        if key in kv:
            raise HeaderError(f"duplicate key {key!r}")
        kv[key] = value
    known = {"stack", "eph", "intra", "pid", "fid", "sender", "receiver", "fission", "brs", *_QOS_KEYS}
    unknown = set(kv) - known
    if unknown:
        raise HeaderError(f"unknown keys {sorted(unknown)}")

    def num(key):
        try:
            return int(kv[key], 0)
        except ValueError:
            raise HeaderError(f"{key} must be an integer") from None

    def rid_list(key):
        return tuple(int(t, 0) for t in kv[key].split(",") if t)

    region_stack = ids = qos = brs = None
    if "stack" in kv:
        region_stack = RegionStackSF(rid_list("stack"),
                                     num("eph") if "eph" in kv else None,
                                     num("intra") if "intra" in kv else None)
    elif "eph" in kv or "intra" in kv:
        raise HeaderError("eph/intra need a stack")
    if "sender" in kv:
        ids = IdsSF(num("sender"), num("receiver") if "receiver" in kv else 0,
                    num("pid") if "pid" in kv else None,
                    num("fid") if "fid" in kv else None)
    elif {"receiver", "pid", "fid"} & set(kv):
        raise HeaderError("receiver/pid/fid need a sender")
    if "fission" in kv or set(_QOS_KEYS) & set(kv):
        qos = QosSF(fission_rate=num("fission") if "fission" in kv else 1,
                    **{name: num(key) for key, name in _QOS_KEYS.items() if key in kv})
    if "brs" in kv:
        brs = BrsSF(rid_list("brs"))
    h = SmartRegionHeader(region_stack, ids, qos, brs)
    validate_header(h)
    return h


def parse_hex(text: str) -> bytes:
    cleaned = "".join(text.split())
    try:
        return bytes.fromhex(cleaned)
    except ValueError:
        raise HeaderError("hex text must hold two hex digits per byte") from None


def to_hex(data: bytes) -> str:
    return " ".join(f"{b:02x}" for b in data)
