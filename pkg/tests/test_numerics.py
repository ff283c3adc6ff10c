"""Format parsing and quantization against exact-arithmetic references."""

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from basecamp.numerics import (
    F64, FormatError, NumericFormat, packed_lane_count, parse_format, quantize,
)

from oracles import fixed_quantize_ref, minifloat_lattice, nearest_in_lattice


def test_parse_round_trip():
    for text in ("f64", "fixed:8:8", "fixed:1:0", "float:5:2", "float:2:1"):
        assert parse_format(text).spec() == text


def test_parse_rejects_garbage():
    for text in ("", "fixed", "fixed:8", "fixed:8:8:8", "float:x:2",
                 "fixed:0:4", "fixed:40:30", "float:1:3", "float:12:2",
                 "float:5:0", "float:5:60", "double"):
        with pytest.raises(FormatError):
            parse_format(text)


def test_bit_widths():
    assert F64.bit_width == 64
    assert parse_format("fixed:8:8").bit_width == 16
    assert parse_format("float:5:2").bit_width == 8
    assert parse_format("fixed:1:0").bit_width == 1


def test_f64_is_identity():
    for x in (0.0, -0.0, 1.5, -3.75, 1e300, math.pi):
        q = quantize(x, F64)
        assert q == x and math.copysign(1, q) == math.copysign(1, x)


def test_nan_propagates():
    assert math.isnan(quantize(math.nan, parse_format("fixed:8:8")))
    assert math.isnan(quantize(math.nan, parse_format("float:5:2")))
    assert math.isnan(quantize(math.nan, F64))


# frozen: 0.1 * 256 = 25.6 rounds to 26, giving 26/256
def test_fixed_8_8_tenth():
    fmt = parse_format("fixed:8:8")
    assert quantize(0.1, fmt) == 0.1015625
    assert quantize(0.1, fmt) == fixed_quantize_ref(0.1, 8, 8)


def test_fixed_matches_rational_reference():
    rng = random.Random(7)
    for i_bits, f_bits in ((8, 8), (4, 4), (2, 6), (12, 0), (1, 7)):
        fmt = NumericFormat.fixed(i_bits, f_bits)
        for _ in range(400):
            x = rng.uniform(-2.0 ** i_bits, 2.0 ** i_bits)
            assert quantize(x, fmt) == fixed_quantize_ref(x, i_bits, f_bits), x


def test_fixed_halfway_ties_go_even():
    fmt = parse_format("fixed:8:8")
    # midpoints (2k+1)/512 are exact doubles; round() must land on even k
    for k in range(-40, 40):
        mid = (2 * k + 1) / 512
        got = quantize(mid, fmt)
        assert got == fixed_quantize_ref(mid, 8, 8)
        steps = round(got * 256)
        assert steps % 2 == 0


def test_fixed_saturates():
    fmt = parse_format("fixed:8:8")
    hi = (2 ** 15 - 1) / 256
    lo = -(2 ** 15) / 256
    assert quantize(1e9, fmt) == hi
    assert quantize(math.inf, fmt) == hi
    assert quantize(-1e9, fmt) == lo
    assert quantize(-math.inf, fmt) == lo


@pytest.mark.parametrize("e,m", [(2, 1), (3, 2), (4, 3), (5, 2)])
def test_minifloat_matches_lattice(e, m):
    fmt = NumericFormat.minifloat(e, m)
    values, parity = minifloat_lattice(e, m)
    rng = random.Random(e * 31 + m)
    top = values[-1]
    probes = [rng.uniform(-1.5 * top, 1.5 * top) for _ in range(300)]
    probes += [rng.uniform(-1.0, 1.0) for _ in range(300)]
    probes += values  # representable values must be fixed points
    for a, b in zip(values, values[1:]):
        probes.append((a + b) / 2)  # exact midpoints: ties to even code
    for x in probes:
        assert quantize(x, fmt) == nearest_in_lattice(x, values, parity), x


def test_minifloat_infinity_saturates():
    values, _ = minifloat_lattice(5, 2)
    fmt = parse_format("float:5:2")
    assert quantize(math.inf, fmt) == values[-1]
    assert quantize(-math.inf, fmt) == values[0]


# frozen: (2 - 2^-2) * 2^15 for the 5-exponent 2-mantissa format
def test_e5m2_extremes():
    values, _ = minifloat_lattice(5, 2)
    assert values[-1] == 57344.0
    assert quantize(1e9, parse_format("float:5:2")) == 57344.0


@settings(derandomize=True, max_examples=200)
@given(st.floats(allow_nan=False, allow_infinity=False, width=64,
                 min_value=-1e6, max_value=1e6))
def test_quantize_idempotent(x):
    for text in ("fixed:8:8", "fixed:4:4", "float:5:2", "float:4:3"):
        fmt = parse_format(text)
        once = quantize(x, fmt)
        assert quantize(once, fmt) == once


@settings(derandomize=True, max_examples=100)
@given(st.floats(allow_nan=False, allow_infinity=False,
                 min_value=-300.0, max_value=300.0),
       st.floats(allow_nan=False, allow_infinity=False,
                 min_value=-300.0, max_value=300.0))
def test_quantize_monotone(x, y):
    if x > y:
        x, y = y, x
    for text in ("fixed:6:4", "float:4:2"):
        fmt = parse_format(text)
        assert quantize(x, fmt) <= quantize(y, fmt)


def test_packed_lane_count():
    assert packed_lane_count(512, F64) == 8
    assert packed_lane_count(512, parse_format("fixed:8:8")) == 32
    assert packed_lane_count(64, parse_format("float:5:2")) == 8
    assert packed_lane_count(65, parse_format("float:5:2")) == 8
    with pytest.raises(FormatError):
        packed_lane_count(32, F64)


def test_format_validation():
    with pytest.raises(FormatError):
        NumericFormat.fixed(0, 8)
    with pytest.raises(FormatError):
        NumericFormat.fixed(8, -1)
    with pytest.raises(FormatError):
        NumericFormat.fixed(60, 8)
    with pytest.raises(FormatError):
        NumericFormat.minifloat(1, 2)
    with pytest.raises(FormatError):
        NumericFormat.minifloat(5, 0)
    with pytest.raises(FormatError):
        NumericFormat("mystery")
