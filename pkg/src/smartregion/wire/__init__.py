"""Header SuperFields, their binary codec, QoS buckets and Matin names."""

from .header import (
    BrsSF,
    DecodeError,
    EmptyStack,
    HeaderError,
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
    validate_header,
)
from .matin import ALPHABET, address_to_name, matin_char, matin_value, name_to_address
from .quantize import dequantize_qos, quantize_qos

__all__ = [
    "ALPHABET", "BrsSF", "DecodeError", "EmptyStack", "HeaderError", "IdsSF",
    "InvariantViolation", "QosSF", "RegionStackSF", "ReservedBitsNonzero",
    "SmartRegionHeader", "Truncated", "ZeroRid", "address_to_name", "decode_header",
    "dequantize_qos", "describe_header", "encode_header", "matin_char", "matin_value",
    "name_to_address", "parse_description", "parse_hex", "pop_region", "push_region",
    "quantize_qos", "to_hex", "validate_header",
]
