"""Matin characters and region names.

Each 16-bit unit carries three 5-bit characters followed by one separator
bit: 1 renders as ``.`` (the unit above is vertical), 0 as ``-``
(horizontal). Names list units from the last one to the first, so the bit
sequence ``INT|ERI`` (first unit first) reads ``ERI.INT``. The first unit's
separator bit has no neighbour to describe; it is ignored on decode and
written as 0.
"""

from __future__ import annotations

from typing import Sequence

ALPHABET = "0123456789ABCDEFGHIKLMNOPRSTWXYZ"
_INDEX = {c: i for i, c in enumerate(ALPHABET)}
SEPARATORS = {1: ".", 0: "-"}
MAX_UNITS = 8


class MatinError(ValueError):
    pass


class InvalidCharacter(MatinError):
    pass


class BadGroupLength(MatinError):
    pass


def matin_char(bits5: int) -> str:
    if not 0 <= bits5 <= 31:
        raise ValueError(f"{bits5} is not a 5-bit value")
    return ALPHABET[bits5]


def matin_value(ch: str) -> int:
    try:
        return _INDEX[ch.upper()]
    except (KeyError, AttributeError):
        raise InvalidCharacter(f"{ch!r} is not a Matin character") from None


def encode_unit(unit: int) -> tuple[str, int]:
    """Three characters and the separator bit of one 16-bit unit."""
    if not 0 <= unit <= 0xFFFF:
        raise ValueError(f"{unit} is not a 16-bit unit")
    chars = "".join(matin_char((unit >> shift) & 0x1F) for shift in (11, 6, 1))
    return chars, unit & 1


def decode_unit(chars: str, separator_bit: int = 0) -> int:
    if len(chars) != 3:
        raise BadGroupLength(f"group {chars!r} must have exactly 3 characters")
    a, b, c = (matin_value(ch) for ch in chars)
    return (a << 11) | (b << 6) | (c << 1) | (separator_bit & 1)


def address_to_name(units: Sequence[int]) -> str:
    """Render 1-8 units (first unit first) as a Matin name."""
    if not 1 <= len(units) <= MAX_UNITS:
        raise ValueError(f"need 1..{MAX_UNITS} units, got {len(units)}")
    encoded = [encode_unit(u) for u in units]
    out = []
    for i in range(len(encoded) - 1, -1, -1):
        chars, sep = encoded[i]
        out.append(chars)
        if i:
            out.append(SEPARATORS[sep])
    return "".join(out)


def name_to_address(name: str) -> list[int]:
    """Inverse of :func:`address_to_name`; the first unit's separator bit is 0."""
    groups, seps = [], []
    current = ""
    for ch in name:
        if ch in ".-":
            groups.append(current)
            seps.append(1 if ch == "." else 0)
            current = ""
        else:
            current += ch
    groups.append(current)
    if len(groups) > MAX_UNITS:
        raise ValueError(f"at most {MAX_UNITS} units")
    for g in groups:
        if len(g) != 3:
            raise BadGroupLength(f"group {g!r} must have exactly 3 characters")
    # groups are written last unit first; separator after a group belongs to it
    units = []
    for pos, g in enumerate(groups):
        sep = seps[pos] if pos < len(seps) else 0
        units.append(decode_unit(g, sep))
    return list(reversed(units))


def parse_bits(tokens: Sequence[str]) -> list[int]:
    """16-character bit strings (``X`` read as 0) into units."""
    units = []
    for tok in tokens:
        tok = tok.strip().upper().replace("X", "0")
        if len(tok) != 16 or set(tok) - {"0", "1"}:
            raise ValueError(f"{tok!r} is not a 16-bit unit")
        units.append(int(tok, 2))
    return units


def format_bits(units: Sequence[int]) -> str:
    return " ".join(format(u, "016b") for u in units)


def name_capacity_bits(units: int = MAX_UNITS, vertical_only: bool = True) -> int:
    """Bits of name space: 15 per unit when every separator is fixed."""
    per_unit = 15 if vertical_only else 16
    return units * per_unit
