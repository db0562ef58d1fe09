"""Logic gates built from single NEF ensembles, with host-side binarization.

Each gate is one 1-D ensemble representing the sum of its input bits.  The
gate's outputs are functions of that sum, decoded from the ensemble's
activity and then binarized against a threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from spikefloat.nef import (
    DecodedConnection,
    Ensemble,
    LifParameters,
    Network,
    SimConfig,
    build_ensemble,
    eval_grid,
    neuron_activities,
    readout,
    run_network,
    solve_decoders,
)

AND_THRESHOLD = 1.5
BIT_THRESHOLD = 0.5
MODES = ("rate", "spiking")


def derive_seed(*keys) -> int:
    return _derive_seed(tuple(int(k) for k in keys))


@lru_cache(maxsize=1 << 16)
def _derive_seed(keys: tuple) -> int:
    return int(np.random.SeedSequence(list(keys)).generate_state(1)[0])


def binarize(x, threshold: float = BIT_THRESHOLD) -> int:
    """1 iff ``x >= threshold``."""
    return int(x >= threshold)


@dataclass(frozen=True)
class BitLine:
    analog_value: float
    logical_value: int
    threshold: float = BIT_THRESHOLD

    def __post_init__(self):
        if self.logical_value != binarize(self.analog_value, self.threshold):
            raise ValueError("logical_value disagrees with analog_value and threshold")

    @classmethod
    def const(cls, bit: int) -> "BitLine":
        bit = int(bit)
        if bit not in (0, 1):
            raise ValueError(f"not a bit: {bit}")
        return cls(float(bit), bit)

    @classmethod
    def decoded(cls, x: float, threshold: float = BIT_THRESHOLD) -> "BitLine":
        return cls(float(x), binarize(x, threshold), threshold)

    def __int__(self) -> int:
        return self.logical_value


def _as_bit(b) -> int:
    v = int(b.logical_value if isinstance(b, BitLine) else b)
    if v not in (0, 1):
        raise ValueError(f"not a bit: {b!r}")
    return v


@dataclass(frozen=True)
class GateConfig:
    neurons_per_ensemble: int = 300
    radius: float | None = None
    mode: str = "rate"
    sim: SimConfig = field(default_factory=SimConfig)
    lif: LifParameters = field(default_factory=LifParameters)
    seed: int = 0
    regularization: float = 0.1
    n_eval_points: int = 500

    def __post_init__(self):
        if self.neurons_per_ensemble < 1:
            raise ValueError("neurons_per_ensemble must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    def with_neurons(self, n: int) -> "GateConfig":
        return replace(self, neurons_per_ensemble=n)


# Decoded targets.  Steps sit midway between integer sums so that integer
# inputs are as far as possible from every discontinuity.
def identity(s):
    return s


def parity(s):
    return np.mod(np.floor(np.asarray(s) + 0.5), 2.0)


def carry(s):
    return (np.asarray(s) >= 1.5).astype(float)


def and_encode(s):
    return (np.asarray(s) >= AND_THRESHOLD).astype(float)


class SumGate:
    """One ensemble of radius ``n_inputs`` with one decoder column per output."""

    n_inputs = 2
    functions: tuple = ()
    thresholds: tuple = ()

    def __init__(self, cfg: GateConfig, seed: int | None = None):
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        r = cfg.radius if cfg.radius is not None else float(self.n_inputs)
        self.ensemble: Ensemble = build_ensemble(cfg.neurons_per_ensemble, 1, r, cfg.lif, self.seed)
        pts = eval_grid(r, 1, cfg.n_eval_points)
        targets = np.column_stack([f(pts[:, 0]) for f in self.functions])
        self.decoders = solve_decoders(self.ensemble, pts, targets, cfg.regularization)
        self._cache: dict[float, np.ndarray] = {}

    def respond(self, x: float) -> np.ndarray:
        """Noise-free decoded outputs for represented value ``x``."""
        key = float(x)
        out = self._cache.get(key)
        if out is None:
            out = neuron_activities(self.ensemble, [key]) @ self.decoders
            self._cache[key] = out
        return out

    def connection(self, col: int, target: Ensemble | None = None) -> DecodedConnection:
        return DecodedConnection(
            self.ensemble,
            self.decoders[:, col : col + 1],
            self.cfg.sim.synapse_tau,
            self.functions[col].__name__,
            target,
        )

    def run_probes(self, total: float, run_seed: int = 0):
        """Spiking run with every output probed; returns probes in decoder-column order."""
        net = Network()
        net.add(self.ensemble)
        net.stim([total], self.ensemble)
        conns = [net.link(self.connection(c)) for c in range(len(self.functions))]
        by_conn = {id(p.connection): p for p in run_network(net, self.cfg.sim, "spiking", seed=run_seed)}
        return [by_conn[id(c)] for c in conns]

    def evaluate_analog(self, total: float, run_seed: int = 0) -> np.ndarray:
        if self.cfg.mode == "rate":
            return self.respond(total)
        return np.array([readout(p, self.cfg.sim)[0] for p in self.run_probes(total, run_seed)])

    def evaluate(self, *bits, run_seed: int = 0) -> tuple[BitLine, ...]:
        if len(bits) != self.n_inputs:
            raise ValueError(f"expected {self.n_inputs} inputs")
        total = float(sum(_as_bit(b) for b in bits))
        vals = self.evaluate_analog(total, run_seed)
        return tuple(BitLine.decoded(v, t) for v, t in zip(vals, self.thresholds))


class AndGate(SumGate):
    n_inputs = 2
    functions = (identity, and_encode)
    thresholds = (AND_THRESHOLD,)

    def __call__(self, a, b, run_seed: int = 0) -> BitLine:
        return self.evaluate(a, b, run_seed=run_seed)[0]


class XorGate(SumGate):
    n_inputs = 2
    functions = (parity,)
    thresholds = (BIT_THRESHOLD,)

    def __call__(self, a, b, run_seed: int = 0) -> BitLine:
        return self.evaluate(a, b, run_seed=run_seed)[0]


class FullAdderGate(SumGate):
    n_inputs = 3
    functions = (parity, carry)
    thresholds = (BIT_THRESHOLD, BIT_THRESHOLD)

    def __call__(self, a, b, c_in, run_seed: int = 0) -> tuple[BitLine, BitLine]:
        return self.evaluate(a, b, c_in, run_seed=run_seed)


class RippleAdder:
    """``width`` full adders; each stage's carry is binarized before the next."""

    def __init__(self, width: int, cfg: GateConfig, seed: int | None = None):
        self.width = width
        self.cfg = cfg
        base = cfg.seed if seed is None else seed
        self.stages = [FullAdderGate(cfg, derive_seed(base, k)) for k in range(width)]

    def __call__(self, a_bits, b_bits, c_in=0, run_seed: int = 0) -> tuple[list[BitLine], BitLine]:
        if len(a_bits) != self.width or len(b_bits) != self.width:
            raise ValueError(f"operands must be {self.width} bits wide")
        c = BitLine.const(_as_bit(c_in))
        sums = []
        for k, fa in enumerate(self.stages):
            s, c = fa(a_bits[k], b_bits[k], c, run_seed=derive_seed(run_seed, k))
            sums.append(s)
        return sums, c


def and_gate(a, b, cfg: GateConfig = GateConfig(), run_seed: int = 0) -> BitLine:
    return AndGate(cfg)(a, b, run_seed)


def xor_gate(a, b, cfg: GateConfig = GateConfig(), run_seed: int = 0) -> BitLine:
    return XorGate(cfg)(a, b, run_seed)


def full_adder(a, b, c_in, cfg: GateConfig = GateConfig(), run_seed: int = 0) -> tuple[BitLine, BitLine]:
    return FullAdderGate(cfg)(a, b, c_in, run_seed)


def ripple_adder(a_bits, b_bits, c_in=0, cfg: GateConfig = GateConfig(), run_seed: int = 0):
    """Little-endian ``a + b + c_in``; returns (sum bit lines, carry-out line)."""
    if len(a_bits) != len(b_bits):
        raise ValueError("operand widths differ")
    return RippleAdder(len(a_bits), cfg)(a_bits, b_bits, c_in, run_seed)
