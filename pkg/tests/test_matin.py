import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import bit_string_writer
from smartregion.wire.matin import (
    ALPHABET,
    BadGroupLength,
    InvalidCharacter,
    address_to_name,
    encode_unit,
    format_bits,
    matin_char,
    matin_value,
    name_capacity_bits,
    name_to_address,
    parse_bits,
)


def unit(c1, c2, c3, sep):
    return int.from_bytes(bit_string_writer([(c1, 5), (c2, 5), (c3, 5), (sep, 1)]), "big")


def test_alphabet_rows():
    assert ALPHABET == "0123456789ABCDEFGHIKLMNOPRSTWXYZ"
    rows = ["0123", "4567", "89AB", "CDEF", "GHIK", "LMNO", "PRST", "WXYZ"]
    for row, text in enumerate(rows):
        for col, ch in enumerate(text):
            assert matin_char((row << 2) | col) == ch
    assert not set("JQUV") & set(ALPHABET)


def test_single_characters():
    assert matin_char(0b00000) == "0"
    assert (matin_char(0b01110), matin_char(0b11001), matin_char(0b10010)) == ("E", "R", "I")
    with pytest.raises(InvalidCharacter):
        matin_value("J")


def test_full_name_from_bit_strings():
    units = parse_bits(["100101011011011X", "0111011001100101"])
    assert units == [unit(0b10010, 0b10110, 0b11011, 0), unit(0b01110, 0b11001, 0b10010, 1)]
    assert address_to_name(units) == "ERI.INT"


def test_horizontal_separator():
    eri = unit(0b01110, 0b11001, 0b10010, 0)
    sne = unit(0b11010, 0b10110, 0b01110, 0)
    assert encode_unit(sne)[0] == "SNE"
    assert address_to_name([eri, sne]) == "SNE-ERI"


def test_name_errors():
    with pytest.raises(BadGroupLength):
        name_to_address("ER.INT")
    with pytest.raises(InvalidCharacter):
        name_to_address("ERJ.INT")
    with pytest.raises(ValueError):
        address_to_name([])


def test_capacity():
    assert name_capacity_bits(8) == 120
    assert 2 ** name_capacity_bits(8) == 2 ** (8 * 15)
    assert 1.3e36 < 2 ** 120 < 1.4e36


@settings(max_examples=300, deadline=None)
@given(st.lists(st.integers(0, 0xFFFF), min_size=1, max_size=8))
def test_round_trip(units):
    normalized = [units[0] & ~1] + units[1:]
    assert name_to_address(address_to_name(units)) == normalized
    name = address_to_name(normalized)
    assert address_to_name(name_to_address(name)) == name


def test_format_bits():
    assert format_bits(parse_bits(["100101011011011X"])) == "1001010110110110"
