import csv

import pytest

from spikefloat.analysis import (
    CSV_COLUMNS,
    MetricsReport,
    SweepResult,
    bit_error_rate,
    combine,
    default_neuron_budget,
    mean_absolute_error,
    mean_encoded_error,
    measure,
    sweep_neurons,
    write_csv,
)
from spikefloat.fpmul import COMPONENTS
from spikefloat.gates import GateConfig


class TestMetrics:
    def test_mae(self):
        assert mean_absolute_error([1.0, 0.0], [1, 0]) == 0
        assert mean_absolute_error([0.9, 0.1], [1, 0]) == pytest.approx(0.1)

    def test_mee(self):
        assert mean_encoded_error([1, 0, 1], [1, 0, 1]) == 0
        assert mean_encoded_error([1, 0, 0, 0], [0, 0, 0, 0]) == 0.25

    @pytest.mark.parametrize("fn", [mean_absolute_error, mean_encoded_error])
    def test_empty_and_mismatch(self, fn):
        with pytest.raises(ValueError):
            fn([], [])
        with pytest.raises(ValueError):
            fn([1, 0], [1])

    def test_report_invariants(self):
        r = MetricsReport.from_samples("x", [0.8, 0.3, 0.9], [1, 0, 1], [1, 1, 1], 100, [0])
        assert r.accuracy + 100 * r.mae == pytest.approx(100.0, abs=1e-12)
        assert r.bit_errors == 1 and r.total_bits == 3
        assert 0 <= r.mee <= 1 and r.mee == pytest.approx(1 / 3)

    def test_budget(self):
        b = default_neuron_budget()
        assert b == {"exponent_adder": 300, "bias_subtractor": 300, "mantissa_multiplier": 600, "sign_of_uf": 100}


class TestCampaigns:
    @pytest.mark.parametrize("component", COMPONENTS)
    def test_rate_mode_is_error_free(self, component):
        r = bit_error_rate(component, 300, 3, seed=1, width=3, cfg=GateConfig(mode="rate"), inputs_per_trial=3)
        assert r.bit_errors == 0 and r.mee == 0
        assert (r.mee == 0) == (r.bit_errors == 0)

    def test_full_adder_spiking_mae(self):
        # a spiking exponent adder exercises full adders on every input row
        r = bit_error_rate("exponent_adder", 300, 2, seed=3, inputs_per_trial=2)
        assert r.mae < 0.1

    def test_measure_rows(self):
        r = measure("sign_of_uf", 100, seed=4, n_inputs=3)
        assert r.total_bits == 3 and r.seeds == [4]

    def test_combine(self):
        a = MetricsReport.from_samples("x", [1.0, 0.5], [1, 1], [1, 0], 10, [1])
        b = MetricsReport.from_samples("x", [0.0, 0.0], [0, 0], [0, 0], 10, [2])
        c = combine([a, b])
        assert c.total_bits == 4 and c.bit_errors == 1 and c.mae == pytest.approx(0.125)
        assert c.accuracy + 100 * c.mae == pytest.approx(100)

    def test_unknown_component(self):
        with pytest.raises(ValueError):
            measure("divider", 100, 0)
        with pytest.raises(ValueError):
            sweep_neurons("divider", [100])
        with pytest.raises(ValueError):
            sweep_neurons("sign_of_uf", [])


class TestSweep:
    def test_deterministic_and_csv(self, tmp_path):
        kw = dict(trials_per_count=2, master_seed=3, width=2, inputs_per_trial=1)
        a = sweep_neurons("sign_of_uf", [50, 100], **kw)
        b = sweep_neurons("sign_of_uf", [100, 50], **kw)
        assert a.neuron_counts == [50, 100]
        assert [(r.mae, r.bit_errors, r.seeds) for r in a.rows] == [(r.mae, r.bit_errors, r.seeds) for r in b.rows]
        path = tmp_path / "out.csv"
        write_csv(a.rows, path)
        rows = list(csv.DictReader(open(path)))
        assert tuple(rows[0].keys()) == CSV_COLUMNS
        assert len(rows) == 4
        assert [int(r["neurons"]) for r in rows] == [50, 50, 100, 100]

    def test_knee(self):
        rows = [
            MetricsReport("x", 0, acc, 0, 0, 1, n, 1, [s])
            for n, acc in ((100, 80.0), (200, 94.5), (300, 95.0), (400, 95.2))
            for s in (0,)
        ]
        s = SweepResult("x", [100, 200, 300, 400], rows, rows)
        assert s.knee() == 200
        with pytest.raises(ValueError):
            SweepResult("x", [200, 100], [], [])
