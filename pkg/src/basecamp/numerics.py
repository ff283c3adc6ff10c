"""Parametric low-precision numeric formats.

Three families: ieee-double (the carrier), signed/unsigned fixed-point
(Q-style, integer bits include the sign), and minifloats with a sign bit,
e exponent bits and m explicit mantissa bits (IEEE-like: bias 2^(e-1)-1,
subnormals, top exponent code reserved).

Values are always *carried* as IEEE doubles; a format only constrains the
set of representable values. quantize() projects onto that set with
round-half-to-even and saturation on overflow, which makes it idempotent
and monotone. Fixed-point rounding goes through exact rational arithmetic
so no double-rounding can creep in; every minifloat value with m <= 52 and
e <= 11 is exactly representable as a double, so the minifloat path can
stay in float arithmetic (all scale factors are powers of two).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BasecampError


class FormatError(BasecampError):
    """Malformed or out-of-range numeric format."""


@dataclass(frozen=True)
class NumericFormat:
    """A value format: kind is one of 'ieee-double', 'fixed', 'minifloat'."""

    kind: str
    int_bits: int = 0
    frac_bits: int = 0
    signed: bool = True
    exp_bits: int = 0
    mantissa_bits: int = 0

    def __post_init__(self) -> None:
        if self.kind == "ieee-double":
            return
        if self.kind == "fixed":
            if self.int_bits < 1:
                raise FormatError(
                    f"fixed-point int_bits must be >= 1, got {self.int_bits}")
            if self.frac_bits < 0:
                raise FormatError(
                    f"fixed-point frac_bits must be >= 0, got {self.frac_bits}")
            if self.int_bits + self.frac_bits > 64:
                raise FormatError(
                    "fixed-point total width must be <= 64 bits, got "
                    f"{self.int_bits + self.frac_bits}")
            return
        if self.kind == "minifloat":
            if not 2 <= self.exp_bits <= 11:
                raise FormatError(
                    f"minifloat exp_bits must be in [2, 11], got {self.exp_bits}")
            if not 1 <= self.mantissa_bits <= 52:
                raise FormatError(
                    "minifloat mantissa_bits must be in [1, 52], got "
                    f"{self.mantissa_bits}")
            return
        raise FormatError(f"unknown format kind '{self.kind}'")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def ieee_double() -> "NumericFormat":
        return NumericFormat("ieee-double")

    @staticmethod
    def fixed(int_bits: int, frac_bits: int, signed: bool = True) -> "NumericFormat":
        return NumericFormat("fixed", int_bits=int_bits, frac_bits=frac_bits,
                             signed=signed)

    @staticmethod
    def minifloat(exp_bits: int, mantissa_bits: int) -> "NumericFormat":
        return NumericFormat("minifloat", exp_bits=exp_bits,
                             mantissa_bits=mantissa_bits)

    # -- derived quantities ------------------------------------------------

    @property
    def bit_width(self) -> int:
        if self.kind == "ieee-double":
            return 64
        if self.kind == "fixed":
            return self.int_bits + self.frac_bits
        return 1 + self.exp_bits + self.mantissa_bits

    def spec(self) -> str:
        """The parseable text form of this format."""
        if self.kind == "ieee-double":
            return "f64"
        if self.kind == "fixed":
            return f"fixed:{self.int_bits}:{self.frac_bits}"
        return f"float:{self.exp_bits}:{self.mantissa_bits}"

    def __str__(self) -> str:
        return self.spec()


F64 = NumericFormat.ieee_double()


def parse_format(text: str) -> NumericFormat:
    """Parse 'f64', 'fixed:<i>:<f>' or 'float:<e>:<m>'."""
    if text == "f64":
        return F64
    parts = text.split(":")
    if len(parts) == 3 and parts[0] in ("fixed", "float"):
        fields = ("int_bits", "frac_bits") if parts[0] == "fixed" \
            else ("exp_bits", "mantissa_bits")
        vals = []
        for field, part in zip(fields, parts[1:]):
            try:
                vals.append(int(part))
            except ValueError:
                raise FormatError(
                    f"malformed format '{text}': {field} is not an integer "
                    f"('{part}')") from None
        if parts[0] == "fixed":
            return NumericFormat.fixed(vals[0], vals[1])
        return NumericFormat.minifloat(vals[0], vals[1])
    raise FormatError(
        f"malformed format '{text}': expected f64, fixed:<i>:<f> or "
        "float:<e>:<m>")


# -- quantization ----------------------------------------------------------


def _quantize_fixed(x: float, fmt: NumericFormat) -> float:
    total = fmt.int_bits + fmt.frac_bits
    if fmt.signed:
        lo, hi = -(1 << (total - 1)), (1 << (total - 1)) - 1
    else:
        lo, hi = 0, (1 << total) - 1
    if math.isinf(x):
        n = hi if x > 0 else lo
    else:
        # Exact rational scaling; round() on Fraction is half-to-even.
        n = round(Fraction(x) * (1 << fmt.frac_bits))
        n = min(max(n, lo), hi)
    # int/int division is correctly rounded, preserving monotonicity.
    return n / (1 << fmt.frac_bits)


def _quantize_minifloat(x: float, fmt: NumericFormat) -> float:
    bias = (1 << (fmt.exp_bits - 1)) - 1
    max_exp = (1 << fmt.exp_bits) - 2 - bias   # largest finite exponent
    min_exp = 1 - bias                         # smallest normal exponent
    max_val = (2.0 - 2.0 ** -fmt.mantissa_bits) * 2.0 ** max_exp
    if math.isinf(x):
        return math.copysign(max_val, x)
    if x == 0.0:
        return 0.0
    a = abs(x)
    # frexp gives a = f * 2^e with f in [0.5, 1); clamp into subnormal range.
    exp = max(math.frexp(a)[1] - 1, min_exp)
    step = math.ldexp(1.0, exp - fmt.mantissa_bits)
    # a/step is an exact power-of-two rescale; round() is half-to-even.
    q = round(a / step) * step
    if q > max_val:
        q = max_val
    return math.copysign(q, x)


def quantize(x: float, fmt: NumericFormat) -> float:
    """Nearest representable value of fmt (ties to even, saturating).

    NaN propagates; infinities saturate to the extreme finite values.
    """
    if math.isnan(x):
        return math.nan
    if fmt.kind == "ieee-double":
        return float(x)
    if fmt.kind == "fixed":
        return _quantize_fixed(float(x), fmt)
    return _quantize_minifloat(float(x), fmt)


def packed_lane_count(bus_width_bits: int, fmt: NumericFormat) -> int:
    """How many values of fmt fit side by side in one bus word."""
    w = fmt.bit_width
    if bus_width_bits < w:
        raise FormatError(
            f"bus width {bus_width_bits} is narrower than one {fmt} value "
            f"({w} bits)")
    return bus_width_bits // w
