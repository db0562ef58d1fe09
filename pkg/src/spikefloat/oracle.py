"""Integer reference for the truncating multiply, plus a boolean array-multiplier trace."""

from __future__ import annotations

from dataclasses import dataclass

from spikefloat.fields import BIAS, Float32Fields


@dataclass(frozen=True)
class OracleResult:
    fields: Float32Fields
    norm_bit: int
    raw_product: int
    exponent_sum: int
    exponent_carry: int
    paper_flag: int
    true_overflow: int
    true_underflow: int


def ieee_mul_truncate(a: Float32Fields, b: Float32Fields, width: int | None = None) -> OracleResult:
    """Truncating floating-point multiply on normalized operands.

    Exponents wrap modulo 256 exactly as the 8-bit adders would.  The OF/UF
    flag is the carry out of ``E1 + E2 + norm``; the true overflow and
    underflow predicates look at the unbounded biased exponent instead.
    """
    W = a.mantissa_width if width is None else width
    if a.mantissa_width != W or b.mantissa_width != W:
        raise ValueError("operand widths differ")
    a.check_normal()
    b.check_normal()

    product = a.significand * b.significand
    norm = product >> (2 * W + 1)
    # bits below the leading one, truncated to W
    mantissa = (product >> (W + norm)) & ((1 << W) - 1)

    total = a.exponent + b.exponent + norm
    carry = total >> 8
    e_sum = total & 0xFF
    e_out = (e_sum - BIAS) & 0xFF
    unbounded = total - BIAS

    fields = Float32Fields(a.sign ^ b.sign, e_out, mantissa, W)
    return OracleResult(
        fields=fields,
        norm_bit=norm,
        raw_product=product,
        exponent_sum=e_sum,
        exponent_carry=carry,
        paper_flag=carry,
        true_overflow=int(unbounded > 254),
        true_underflow=int(unbounded < 1),
    )


@dataclass(frozen=True)
class BlockTrace:
    stage: int
    block: int
    and_out: int
    s_in: int
    c_in: int
    s_out: int
    c_out: int


def array_multiply_reference(A: int, B: int, width: int) -> tuple[int, list[BlockTrace]]:
    """Ideal-gate run of the (W+1) x (W+1) stage array.

    Block j of stage i adds A_i & B_j, the sum from block j+1 of stage i-1 and
    the carry from block j-1 of stage i.  The last block of a stage takes the
    previous stage's last carry as its sum input.  Returns the product and the
    per-block trace.
    """
    n = width + 1
    if not (0 <= A < 1 << n and 0 <= B < 1 << n):
        raise ValueError("operands exceed width + 1 bits")
    trace = []
    s_in = [0] * n
    bits = []
    for i in range(n):
        a_i = (A >> i) & 1
        carry = 0
        s_out = [0] * n
        for j in range(n):
            ab = a_i & ((B >> j) & 1)
            total = ab + s_in[j] + carry
            s_out[j], c_out = total & 1, total >> 1
            trace.append(BlockTrace(i, j, ab, s_in[j], carry, s_out[j], c_out))
            carry = c_out
        bits.append(s_out[0])
        s_in = s_out[1:] + [carry]
    bits.extend(s_in)
    product = sum(b << k for k, b in enumerate(bits))
    return product, trace
