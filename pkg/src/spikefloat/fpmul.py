"""The four-component floating-point multiplier wired from gate ensembles.

Mantissa Multiplier -> normalize, Exponent Adder (normalization bit as
carry-in) -> Bias Subtractor, and Sign / OF-UF.  Execution is staged: each
multiplier stage runs as one spiking network in which AND outputs and the
stage's carry chain pass neuron to neuron; stage outputs are binarized by the
host before feeding the next stage.
"""

from __future__ import annotations

from dataclasses import dataclass, field


from spikefloat.fields import BIAS, EXPONENT_WIDTH, Float32Fields, from_bits, to_bits
from spikefloat.gates import (
    AndGate,
    BitLine,
    FullAdderGate,
    GateConfig,
    RippleAdder,
    XorGate,
    derive_seed,
)
from spikefloat.nef import Network, readout, run_network

COMPONENTS = ("exponent_adder", "bias_subtractor", "mantissa_multiplier", "sign_of_uf")

# neurons per ensemble that each component settles on
DEFAULT_BUDGET = {
    "exponent_adder": 300,
    "bias_subtractor": 300,
    "mantissa_multiplier": 600,
    "sign_of_uf": 100,
}

_AND_ENCODE_COL = 1
_FA_SUM, _FA_CARRY = 0, 1


def _bits(value: int, width: int) -> list[int]:
    if not 0 <= value < 1 << width:
        raise ValueError(f"{value} does not fit in {width} bits")
    return to_bits(value, width)


class MantissaMultiplier:
    """(W+1) x (W+1) array of AND-ensemble + full-adder blocks."""

    def __init__(self, width: int, cfg: GateConfig, seed: int | None = None):
        if width < 0:
            raise ValueError("width must be >= 0")
        self.width = width
        self.cfg = cfg
        base = cfg.seed if seed is None else seed
        n = width + 1
        self.blocks = [
            [
                (AndGate(cfg, derive_seed(base, i, j, 0)), FullAdderGate(cfg, derive_seed(base, i, j, 1)))
                for j in range(n)
            ]
            for i in range(n)
        ]

    def _stage_rate(self, i: int, a_i: int, b_bits, s_in):
        sums = []
        c = 0.0
        for j, (and_g, fa) in enumerate(self.blocks[i]):
            ab = and_g.respond(a_i + b_bits[j])[_AND_ENCODE_COL]
            out = fa.respond(ab + s_in[j] + c)
            sums.append(float(out[_FA_SUM]))
            c = float(out[_FA_CARRY])
        return sums, c

    def stage_network(self, i: int, a_i: int, b_bits, s_in):
        """Network for stage ``i`` plus its sum connections and final carry connection."""
        net = Network()
        row = self.blocks[i]
        sum_conns = []
        for j, (and_g, fa) in enumerate(row):
            net.add(and_g.ensemble)
            net.add(fa.ensemble)
            net.stim([a_i + b_bits[j]], and_g.ensemble)
            if s_in[j]:
                net.stim([s_in[j]], fa.ensemble)
            net.link(and_g.connection(_AND_ENCODE_COL, target=fa.ensemble))
            sum_conns.append(net.link(fa.connection(_FA_SUM)))
            nxt = row[j + 1][1].ensemble if j + 1 < len(row) else None
            carry_conn = net.link(fa.connection(_FA_CARRY, target=nxt))
        return net, sum_conns, carry_conn

    def _stage_spiking(self, i: int, a_i: int, b_bits, s_in, run_seed: int):
        net, sum_conns, carry_conn = self.stage_network(i, a_i, b_bits, s_in)
        sim = self.cfg.sim
        probes = {id(p.connection): p for p in run_network(net, sim, "spiking", seed=run_seed)}
        sums = [float(readout(probes[id(c)], sim)[0]) for c in sum_conns]
        return sums, float(readout(probes[id(carry_conn)], sim)[0])

    def __call__(self, m1: int, m2: int, run_seed: int = 0) -> tuple[list[BitLine], int]:
        """Product bit lines (LSB first, 2(W+1) of them) and the normalization bit."""
        W = self.width
        A = (1 << W) | m1
        B = (1 << W) | m2
        a_bits = _bits(A, W + 1)
        b_bits = _bits(B, W + 1)
        s_in = [0] * (W + 1)
        lines: list[BitLine] = []
        for i in range(W + 1):
            if self.cfg.mode == "rate":
                sums, c = self._stage_rate(i, a_bits[i], b_bits, s_in)
            else:
                sums, c = self._stage_spiking(i, a_bits[i], b_bits, s_in, derive_seed(run_seed, i))
            stage = [BitLine.decoded(v) for v in sums] + [BitLine.decoded(c)]
            lines.append(stage[0])
            high = stage[1:]
            s_in = [b.logical_value for b in high]
        lines.extend(high)
        return lines, lines[-1].logical_value


class ExponentAdder:
    def __init__(self, cfg: GateConfig, seed: int | None = None):
        self.adder = RippleAdder(EXPONENT_WIDTH, cfg, cfg.seed if seed is None else seed)

    def __call__(self, e1: int, e2: int, norm_bit: int, run_seed: int = 0):
        return self.adder(_bits(e1, 8), _bits(e2, 8), norm_bit, run_seed)


class BiasSubtractor:
    """Adds the two's complement of the bias, formed by flip-then-increment."""

    def __init__(self, cfg: GateConfig, seed: int | None = None):
        base = cfg.seed if seed is None else seed
        self.increment = RippleAdder(EXPONENT_WIDTH, cfg, derive_seed(base, 0))
        self.add = RippleAdder(EXPONENT_WIDTH, cfg, derive_seed(base, 1))

    def __call__(self, e_sum: int, run_seed: int = 0) -> list[BitLine]:
        ones = [1 - b for b in _bits(BIAS, 8)]
        twos, _ = self.increment(ones, _bits(1, 8), 0, derive_seed(run_seed, 0))
        out, _ = self.add(_bits(e_sum, 8), [b.logical_value for b in twos], 0, derive_seed(run_seed, 1))
        return out


class SignOfUf:
    def __init__(self, cfg: GateConfig, seed: int | None = None):
        self.xor = XorGate(cfg, cfg.seed if seed is None else seed)

    def __call__(self, s1: int, s2: int, exponent_carry: int, run_seed: int = 0) -> tuple[BitLine, int]:
        return self.xor(s1, s2, run_seed), int(exponent_carry)


def normalize(raw_bits, norm_bit: int, width: int) -> int:
    """Mantissa field: the ``width`` bits below the leading one, truncated."""
    product = from_bits(raw_bits)
    if len(raw_bits) != 2 * (width + 1):
        raise ValueError("raw product width does not match mantissa width")
    return (product >> (width + norm_bit)) & ((1 << width) - 1)


@dataclass
class ProductResult:
    fields: Float32Fields
    normalization_bit: int
    exponent_carry: int
    of_uf_flag: int
    raw_product: int
    raw_product_bits: list[int]
    lines: dict[str, list[BitLine]] = field(repr=False, default_factory=dict)

    @property
    def value(self) -> float:
        return self.fields.value


class MultiplierCircuit:
    """All four components at one mantissa width, with per-component neuron budgets."""

    def __init__(
        self,
        width: int = 23,
        cfg: GateConfig = GateConfig(),
        budget: dict[str, int] | None = None,
        seed: int | None = None,
    ):
        self.width = width
        self.cfg = cfg
        self.budget = dict(DEFAULT_BUDGET)
        if budget:
            unknown = set(budget) - set(COMPONENTS)
            if unknown:
                raise ValueError(f"unknown components: {sorted(unknown)}")
            self.budget.update(budget)
        self.seed = cfg.seed if seed is None else seed
        s = self.seed
        self.mantissa_multiplier = MantissaMultiplier(
            width, cfg.with_neurons(self.budget["mantissa_multiplier"]), derive_seed(s, 1)
        )
        self.exponent_adder = ExponentAdder(cfg.with_neurons(self.budget["exponent_adder"]), derive_seed(s, 2))
        self.bias_subtractor = BiasSubtractor(cfg.with_neurons(self.budget["bias_subtractor"]), derive_seed(s, 3))
        self.sign_of_uf = SignOfUf(cfg.with_neurons(self.budget["sign_of_uf"]), derive_seed(s, 4))

    def multiply(self, x: Float32Fields, y: Float32Fields, run_seed: int = 0) -> ProductResult:
        W = self.width
        if x.mantissa_width != W or y.mantissa_width != W:
            raise ValueError(f"operands must have mantissa width {W}")
        x.check_normal()
        y.check_normal()

        prod_lines, norm = self.mantissa_multiplier(x.mantissa, y.mantissa, derive_seed(run_seed, 1))
        raw_bits = [b.logical_value for b in prod_lines]
        m_out = normalize(raw_bits, norm, W)

        e_lines, c_line = self.exponent_adder(x.exponent, y.exponent, norm, derive_seed(run_seed, 2))
        e_sum = from_bits(b.logical_value for b in e_lines)
        out_lines = self.bias_subtractor(e_sum, derive_seed(run_seed, 3))
        e_out = from_bits(b.logical_value for b in out_lines)

        s_line, flag = self.sign_of_uf(x.sign, y.sign, c_line.logical_value, derive_seed(run_seed, 4))
        return ProductResult(
            fields=Float32Fields(s_line.logical_value, e_out, m_out, W),
            normalization_bit=norm,
            exponent_carry=c_line.logical_value,
            of_uf_flag=flag,
            raw_product=from_bits(raw_bits),
            raw_product_bits=raw_bits,
            lines={
                "mantissa_multiplier": prod_lines,
                "exponent_adder": list(e_lines) + [c_line],
                "bias_subtractor": out_lines,
                "sign_of_uf": [s_line],
            },
        )


# Single-call conveniences; each builds the component afresh from ``cfg``.
def exponent_adder(e1: int, e2: int, norm_bit: int, cfg: GateConfig = GateConfig(), run_seed: int = 0):
    sums, c = ExponentAdder(cfg)(e1, e2, norm_bit, run_seed)
    return from_bits(b.logical_value for b in sums), c.logical_value


def bias_subtractor(e_sum: int, cfg: GateConfig = GateConfig(), run_seed: int = 0) -> int:
    return from_bits(b.logical_value for b in BiasSubtractor(cfg)(e_sum, run_seed))


def mantissa_multiplier(m1: int, m2: int, width: int, cfg: GateConfig = GateConfig(), run_seed: int = 0):
    lines, norm = MantissaMultiplier(width, cfg)(m1, m2, run_seed)
    return from_bits(b.logical_value for b in lines), norm


def sign_of_uf(s1: int, s2: int, exponent_carry: int, cfg: GateConfig = GateConfig(), run_seed: int = 0):
    line, flag = SignOfUf(cfg)(s1, s2, exponent_carry, run_seed)
    return line.logical_value, flag


def multiply(x: Float32Fields, y: Float32Fields, cfg: GateConfig = GateConfig(), budget=None, run_seed: int = 0):
    return MultiplierCircuit(x.mantissa_width, cfg, budget).multiply(x, y, run_seed)
