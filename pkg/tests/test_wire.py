import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import reference_header_bytes
from smartregion.wire.header import (
    BrsSF,
    DecodeError,
    EmptyStack,
    IdsSF,
    InvariantViolation,
    QosSF,
    RegionStackSF,
    ReservedBitsNonzero,
    SmartRegionHeader,
    Truncated,
    ZeroRid,
    decode_header,
    describe_header,
    encode_header,
    parse_description,
    parse_hex,
    pop_region,
    push_region,
    to_hex,
)
from smartregion.wire.quantize import (
    LATENCY,
    LOSS,
    dequantize_latency,
    dequantize_loss,
    dequantize_qos,
    quantize_latency,
    quantize_loss,
    quantize_qos,
)



def headers():
    rid = st.integers(1, 0xFFFF)
    stack = st.builds(RegionStackSF, st.lists(rid, min_size=1, max_size=6).map(tuple),
                      st.none() | st.integers(0, 15), st.none() | st.integers(0, 255))
    ids = st.builds(IdsSF, st.integers(1, 0xFFFF), st.integers(0, 0xFFFF),
                    st.none() | st.integers(0, 0xFFF), st.none() | st.integers(0, 0xFFF))
    bucket = st.none() | st.integers(0, 15)
    qos = st.builds(QosSF, bucket, bucket, bucket, bucket, st.integers(1, 15))
    brs = st.builds(BrsSF, st.lists(rid, max_size=6).map(tuple))
    return st.builds(SmartRegionHeader, st.none() | stack, st.none() | ids, st.none() | qos,
                     st.none() | brs).filter(lambda h: h.active)


def reference(h: SmartRegionHeader) -> bytes:
    rs = h.region_stack
    return reference_header_bytes(
        stack=rs.stack if rs else None,
        eph=rs.ephemeral_single_hop_fid if rs else None,
        intra=rs.intra_region_fid if rs else None,
        ids=(h.ids.packet_pid, h.ids.flow_fid, h.ids.sender_nid, h.ids.receiver_nid) if h.ids else None,
        qos=(h.qos.single_hop_latency, h.qos.path_latency, h.qos.single_hop_loss,
             h.qos.path_loss, h.qos.fission_rate) if h.qos else None,
        brs=h.brs.trail if h.brs else None)


def test_golden_stack_only():
    h = SmartRegionHeader(region_stack=RegionStackSF((1,)))
    assert encode_header(h) == reference(h) == bytes.fromhex("80 01 00 01")


def test_golden_stack_with_zero_ephemeral_fid():
    h = SmartRegionHeader(region_stack=RegionStackSF((1,), ephemeral_single_hop_fid=0))
    assert encode_header(h) == reference(h) == bytes.fromhex("88 00 01 00 01")


def test_golden_qos_only():
    h = SmartRegionHeader(qos=QosSF(fission_rate=3))
    assert encode_header(h) == reference(h) == bytes.fromhex("20 03")


def test_golden_full_header():
    h = SmartRegionHeader(RegionStackSF((18,), 5, 0x21), IdsSF(1191, 1181, 7, 1),
                          QosSF(None, 6, None, 9, 2), BrsSF((19, 3)))
    assert encode_header(h) == reference(h)
    assert to_hex(encode_header(h)) == \
        "fc 50 21 01 00 12 c0 00 70 01 04 a7 04 9d 52 69 00 02 00 13 00 03"


def test_no_superfield_is_rejected():
    with pytest.raises(InvariantViolation):
        encode_header(SmartRegionHeader())


@pytest.mark.parametrize("h,field", [
    (SmartRegionHeader(region_stack=RegionStackSF(())), "region_stack.stack"),
    (SmartRegionHeader(region_stack=RegionStackSF((0,))), "region_stack.stack"),
    (SmartRegionHeader(ids=IdsSF(0)), "ids.sender_nid"),
    (SmartRegionHeader(ids=IdsSF(1, packet_pid=4096)), "ids.packet_pid"),
    (SmartRegionHeader(qos=QosSF(fission_rate=0)), "qos.fission_rate"),
    (SmartRegionHeader(qos=QosSF(path_latency=16)), "qos.path_latency"),
    (SmartRegionHeader(brs=BrsSF(tuple(range(1, 257)))), "brs.trail"),
])
def test_invariant_violation_names_field(h, field):
    with pytest.raises(InvariantViolation) as err:
        encode_header(h)
    assert err.value.field == field


def test_decode_errors():
    with pytest.raises(Truncated) as err:
        decode_header(b"")
    assert err.value.offset == 0
    with pytest.raises(Truncated):
        decode_header(bytes.fromhex("80 02 00 01"))
    with pytest.raises(ZeroRid) as err:
        decode_header(bytes.fromhex("80 01 00 00"))
    assert err.value.offset == 2
    with pytest.raises(ReservedBitsNonzero):
        decode_header(bytes.fromhex("81 01 00 01"))
    with pytest.raises(ReservedBitsNonzero):
        decode_header(bytes.fromhex("10 10 00"))
    with pytest.raises(DecodeError):
        decode_header(bytes.fromhex("00"))


def test_remainder_is_returned():
    h, rest = decode_header(bytes.fromhex("20 03 de ad"))
    assert h == SmartRegionHeader(qos=QosSF(fission_rate=3)) and rest == b"\xde\xad"


@settings(max_examples=300, deadline=None)
@given(headers())
def test_round_trip_and_reference_layout(h):
    data = encode_header(h)
    assert data == reference(h)
    assert decode_header(data + b"\x99") == (h, b"\x99")
    assert parse_description(describe_header(h)) == h


@settings(max_examples=300, deadline=None)
@given(st.binary(max_size=48))
def test_fuzz_decode_never_crashes(data):
    try:
        h, rest = decode_header(data)
    except DecodeError:
        return
    # anything accepted re-encodes to the consumed prefix
    assert encode_header(h) + rest == data


def test_push_pop():
    h = SmartRegionHeader(region_stack=RegionStackSF((5,)))
    assert pop_region(push_region(h, 9)) == h
    assert push_region(h, 9).stack == (9, 5)
    empty = pop_region(h)
    assert empty.stack == ()
    with pytest.raises(EmptyStack):
        pop_region(empty)


def test_hex_text_is_whitespace_tolerant():
    assert parse_hex(" 80 01\n00\t01 ") == bytes.fromhex("80010001")
    with pytest.raises(ValueError):
        parse_hex("8")


def test_latency_buckets():
    assert quantize_latency(0) == 0
    assert quantize_latency(10) == 0
    assert quantize_latency(11) == 1
    assert quantize_latency(10 * 2 ** 7) == 7
    assert quantize_latency(10 * 2 ** 7 + 1) == 8
    assert quantize_latency(10 ** 9) == 15
    assert dequantize_latency(7) == 1280


def test_loss_buckets():
    assert quantize_loss(1.0) == 0
    assert quantize_loss(0.5) == 1
    assert quantize_loss(0.5000001) == 0
    assert quantize_loss(0.0) == 15
    assert quantize_loss(2 ** -20) == 15
    assert dequantize_loss(3) == 0.125


def test_quantize_inverts_dequantize():
    for k in range(16):
        assert quantize_qos(dequantize_qos(k, LATENCY), LATENCY) == k
        assert quantize_qos(dequantize_qos(k, LOSS), LOSS) == k


@settings(max_examples=400, deadline=None)
@given(st.floats(10, 10 * 2 ** 15))
def test_latency_bucket_bound_within_factor_two(v):
    up = dequantize_latency(quantize_latency(v))
    assert v <= up <= 2 * v


@settings(max_examples=400, deadline=None)
@given(st.floats(2 ** -15, 1))
def test_loss_bucket_bound_within_factor_two(p):
    up = dequantize_loss(quantize_loss(p))
    assert p <= up <= 2 * p


def test_random_headers_cover_every_superfield_mix():
    rng = random.Random(3)
    seen = set()
    for _ in range(400):
        mask = rng.randint(1, 15)
        h = SmartRegionHeader(
            RegionStackSF((rng.randint(1, 9),)) if mask & 8 else None,
            IdsSF(rng.randint(1, 9)) if mask & 4 else None,
            QosSF() if mask & 2 else None,
            BrsSF(()) if mask & 1 else None)
        seen.add(h.active)
        assert decode_header(encode_header(h))[0] == h
    assert seen == set(range(1, 16))
