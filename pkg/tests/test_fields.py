import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from spikefloat.fields import Float32Fields, UnsupportedOperandError, from_bits, parse_operand, to_bits


def test_hex_round_trip():
    f = Float32Fields.from_hex("0x410C0000")
    assert (f.sign, f.exponent, f.mantissa) == (0, 130, 0x0C0000)
    assert f.value == 8.75
    assert f.to_hex() == "0x410C0000"


def test_decimal_parse():
    assert parse_operand("2.5").to_hex() == "0x40200000"
    assert parse_operand("-1.5").sign == 1


@pytest.mark.parametrize(
    "text,kind",
    [("0x00000000", "zero"), ("0.0", "zero"), ("0x00000010", "subnormal"), ("inf", "infinity"), ("nan", "NaN"),
     ("0xFF800000", "infinity")],
)
def test_rejects_special_classes(text, kind):
    with pytest.raises(UnsupportedOperandError) as exc:
        parse_operand(text)
    assert exc.value.kind == kind
    assert kind in str(exc.value)


@pytest.mark.parametrize("text", ["0x3F80", "abc", "0xZZZZZZZZ", ""])
def test_parse_failure(text):
    with pytest.raises(ValueError):
        parse_operand(text)


def test_reduced_width_truncates():
    f = Float32Fields.from_float(1.75, 2)
    assert f.mantissa == 0b11 and f.value == 1.75
    g = Float32Fields.from_float(1.0 + 2**-5, 2)
    assert g.mantissa == 0 and g.value == 1.0
    assert Float32Fields(0, 127, 0b11, 2).to_hex() == "0x3FE00000"


@given(st.integers(0, 2**32 - 1))
def test_int_round_trip(pattern):
    assert Float32Fields.from_int(pattern).to_int() == pattern


@given(st.floats(width=32, allow_nan=False, allow_infinity=False))
def test_value_matches_host(v):
    f = Float32Fields.from_float(v)
    if v == 0:
        assert f.value == 0
    else:
        assert f.value == v


def test_bit_helpers():
    assert to_bits(6, 4) == [0, 1, 1, 0]
    assert from_bits([0, 1, 1, 0]) == 6


def test_field_validation():
    with pytest.raises(ValueError):
        Float32Fields(2, 0, 0)
    with pytest.raises(ValueError):
        Float32Fields(0, 256, 0)
    with pytest.raises(ValueError):
        Float32Fields(0, 1, 8, 3)
