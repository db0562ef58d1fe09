"""IEEE 754 single-precision register model with a configurable mantissa width."""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

EXPONENT_WIDTH = 8
FULL_MANTISSA_WIDTH = 23
BIAS = 127


class UnsupportedOperandError(ValueError):
    """Raised for zero, subnormal, NaN or infinite operands."""

    def __init__(self, kind: str, text: str = ""):
        self.kind = kind
        super().__init__(f"{kind} input unsupported{': ' + text if text else ''}")


def to_bits(value: int, width: int) -> list[int]:
    """Little-endian bit list."""
    return [(value >> k) & 1 for k in range(width)]


def from_bits(bits) -> int:
    return sum(int(b) << k for k, b in enumerate(bits))


@dataclass(frozen=True)
class Float32Fields:
    sign: int
    exponent: int
    mantissa: int
    mantissa_width: int = FULL_MANTISSA_WIDTH

    def __post_init__(self):
        if self.sign not in (0, 1):
            raise ValueError("sign must be 0 or 1")
        if not 0 <= self.exponent < 1 << EXPONENT_WIDTH:
            raise ValueError("exponent out of range")
        if not 1 <= self.mantissa_width <= FULL_MANTISSA_WIDTH:
            raise ValueError("mantissa_width must be in [1, 23]")
        if not 0 <= self.mantissa < 1 << self.mantissa_width:
            raise ValueError("mantissa out of range")

    @property
    def is_normal(self) -> bool:
        return 0 < self.exponent < 255

    def check_normal(self) -> None:
        if self.exponent == 255:
            raise UnsupportedOperandError("NaN" if self.mantissa else "infinity", self.to_hex())
        if self.exponent == 0:
            raise UnsupportedOperandError("subnormal" if self.mantissa else "zero", self.to_hex())

    @property
    def significand(self) -> int:
        """Integer 1.M with the hidden bit at position ``mantissa_width``."""
        return (1 << self.mantissa_width) | self.mantissa

    @property
    def value(self) -> float:
        if self.exponent == 255:
            return math.nan if self.mantissa else math.copysign(math.inf, -self.sign)
        if self.exponent == 0:
            frac = self.mantissa / (1 << self.mantissa_width)
            return (-1) ** self.sign * frac * 2.0 ** (1 - BIAS)
        return (-1) ** self.sign * math.ldexp(self.significand, self.exponent - BIAS - self.mantissa_width)

    def to_int(self) -> int:
        """32-bit pattern; a reduced mantissa occupies the top bits of the field."""
        m = self.mantissa << (FULL_MANTISSA_WIDTH - self.mantissa_width)
        return (self.sign << 31) | (self.exponent << FULL_MANTISSA_WIDTH) | m

    def to_hex(self) -> str:
        return f"0x{self.to_int():08X}"

    def triple(self) -> str:
        return f"({self.sign}, {self.exponent:08b}, {self.mantissa:0{self.mantissa_width}b})"

    @classmethod
    def from_int(cls, pattern: int, mantissa_width: int = FULL_MANTISSA_WIDTH) -> "Float32Fields":
        if not 0 <= pattern < 1 << 32:
            raise ValueError("pattern must fit in 32 bits")
        m = pattern & ((1 << FULL_MANTISSA_WIDTH) - 1)
        return cls(pattern >> 31, (pattern >> 23) & 0xFF, m >> (FULL_MANTISSA_WIDTH - mantissa_width), mantissa_width)

    @classmethod
    def from_hex(cls, text: str, mantissa_width: int = FULL_MANTISSA_WIDTH) -> "Float32Fields":
        t = text.strip().lower()
        if not t.startswith("0x") or len(t) != 10:
            raise ValueError(f"expected 0x-prefixed 8-digit hex pattern, got {text!r}")
        return cls.from_int(int(t, 16), mantissa_width)

    @classmethod
    def from_float(cls, value: float, mantissa_width: int = FULL_MANTISSA_WIDTH) -> "Float32Fields":
        """Round to float32 as the host does, then keep the top mantissa bits."""
        try:
            pattern = struct.unpack(">I", struct.pack(">f", value))[0]
        except OverflowError:
            pattern = 0xFF800000 if value < 0 else 0x7F800000
        return cls.from_int(pattern, mantissa_width)


def parse_operand(text: str, mantissa_width: int = FULL_MANTISSA_WIDTH) -> Float32Fields:
    """Accepts ``0x3F800000`` style patterns or decimal floats; rejects specials."""
    t = text.strip()
    if t.lower().startswith("0x"):
        full = Float32Fields.from_hex(t)
    else:
        try:
            v = float(t)
        except ValueError:
            raise ValueError(f"cannot parse operand {text!r}") from None
        full = Float32Fields.from_float(v)
    # classify before truncation so a subnormal never reads as zero
    full.check_normal()
    return Float32Fields.from_int(full.to_int(), mantissa_width)
