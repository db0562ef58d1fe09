import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from spikefloat.gates import (
    AND_THRESHOLD,
    AndGate,
    BitLine,
    FullAdderGate,
    GateConfig,
    RippleAdder,
    XorGate,
    and_gate,
    binarize,
    full_adder,
    ripple_adder,
    xor_gate,
)
from spikefloat.fields import from_bits, to_bits
from spikefloat.nef import readout

RATE = GateConfig(neurons_per_ensemble=100, mode="rate")
SPIKING = GateConfig(neurons_per_ensemble=300, mode="spiking")


class TestBinarize:
    def test_examples(self):
        assert binarize(1.6, 1.5) == 1
        assert binarize(1.5, 1.5) == 1
        assert binarize(0.49, 0.5) == 0

    @given(st.floats(-10, 10), st.floats(-5, 5))
    def test_output_is_a_bit(self, x, t):
        b = binarize(x, t)
        assert b in (0, 1)
        # a binarized value is a valid gate input
        assert int(BitLine.const(b)) == b

    def test_bitline_invariant(self):
        BitLine(1.6, 1, 1.5)
        with pytest.raises(ValueError):
            BitLine(1.4, 1, 1.5)


class TestRateTruthTables:
    def test_and(self):
        for seed in range(10):
            g = AndGate(RATE, seed)
            for a, b in itertools.product((0, 1), repeat=2):
                assert int(g(a, b)) == (a & b)

    def test_xor(self):
        for seed in range(10):
            g = XorGate(RATE, seed)
            for a, b in itertools.product((0, 1), repeat=2):
                assert int(g(a, b)) == (a ^ b)

    def test_full_adder(self):
        for seed in range(10):
            g = FullAdderGate(RATE, seed)
            for a, b, c in itertools.product((0, 1), repeat=3):
                s, co = g(a, b, c)
                assert (int(s), int(co)) == ((a + b + c) & 1, (a + b + c) >> 1)

    def test_functional_wrappers(self):
        assert int(and_gate(1, 1, RATE)) == 1
        assert int(and_gate(0, 0, RATE)) == 0
        assert int(xor_gate(1, 1, RATE)) == 0
        assert int(xor_gate(1, 0, RATE)) == 1
        assert tuple(map(int, full_adder(1, 1, 1, RATE))) == (1, 1)
        assert tuple(map(int, full_adder(1, 0, 1, RATE))) == (0, 1)
        assert tuple(map(int, full_adder(0, 0, 0, RATE))) == (0, 0)

    def test_and_sum_is_the_analog_line(self):
        line = and_gate(1, 1, RATE)
        assert line.threshold == AND_THRESHOLD
        assert line.analog_value == pytest.approx(2.0, abs=0.25)


class TestSpiking:
    def test_and_readout_above_threshold(self):
        line = AndGate(SPIKING, 0)(1, 1, run_seed=1)
        assert line.analog_value >= 1.5 and int(line) == 1

    def test_truth_tables_one_seed(self):
        g_and, g_xor, g_fa = AndGate(SPIKING, 3), XorGate(SPIKING, 3), FullAdderGate(SPIKING, 3)
        for a, b in itertools.product((0, 1), repeat=2):
            assert int(g_and(a, b, run_seed=7)) == a & b
            assert int(g_xor(a, b, run_seed=7)) == a ^ b
        for a, b, c in itertools.product((0, 1), repeat=3):
            s, co = g_fa(a, b, c, run_seed=7)
            assert (int(s), int(co)) == ((a + b + c) & 1, (a + b + c) >> 1)

    @pytest.mark.slow
    def test_noise_margin(self):
        sim = SPIKING.sim
        for trial in range(20):
            g = AndGate(SPIKING, 100 + trial)
            for bits, above in (((1, 1), True), ((1, 0), False)):
                probe = g.run_probes(float(sum(bits)), run_seed=trial)[0]
                window = probe.samples[probe.times > probe.times[-1] - sim.readout_window + 1e-12, 0]
                assert len(window) == 5
                assert np.all(window > 1.5) if above else np.all(window < 1.5)

    def test_deterministic(self):
        g = FullAdderGate(SPIKING, 2)
        a = g.evaluate_analog(2.0, run_seed=4)
        b = g.evaluate_analog(2.0, run_seed=4)
        assert np.array_equal(a, b)


class TestRippleAdder:
    def _check(self, add, W, a, b, c):
        sums, co = add(to_bits(a, W), to_bits(b, W), c)
        total = a + b + c
        assert from_bits(int(s) for s in sums) == total % (1 << W)
        assert int(co) == total >> W

    def test_examples_w8(self):
        add = RippleAdder(8, RATE, 0)
        self._check(add, 8, 0b01111111, 0b10000000, 0)
        self._check(add, 8, 0b11111111, 0b00000001, 0)
        sums, co = add(to_bits(127, 8), to_bits(128, 8), 0)
        assert [int(s) for s in sums] == [1] * 8 and int(co) == 0

    def test_additive_identity(self):
        add = RippleAdder(8, RATE, 1)
        for a in (0, 1, 77, 200, 255):
            self._check(add, 8, a, 0, 0)

    @pytest.mark.parametrize("W", [1, 2, 3, 4])
    def test_exhaustive_small(self, W):
        add = RippleAdder(W, RATE, W)
        for a in range(1 << W):
            for b in range(1 << W):
                for c in (0, 1):
                    self._check(add, W, a, b, c)

    def test_random_w8(self):
        add = RippleAdder(8, RATE, 9)
        rng = np.random.default_rng(0)
        for _ in range(500):
            a, b, c = int(rng.integers(256)), int(rng.integers(256)), int(rng.integers(2))
            self._check(add, 8, a, b, c)

    def test_width_mismatch(self):
        with pytest.raises(ValueError):
            ripple_adder([0, 1], [1], 0, RATE)
        with pytest.raises(ValueError):
            RippleAdder(3, RATE)([0, 1], [1, 0], 0)
