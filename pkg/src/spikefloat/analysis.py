"""Error metrics, bit-error campaigns and neuron-count sweeps."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from spikefloat.fields import BIAS, to_bits
from spikefloat.fpmul import (
    COMPONENTS,
    DEFAULT_BUDGET,
    BiasSubtractor,
    ExponentAdder,
    MantissaMultiplier,
    SignOfUf,
)
from spikefloat.gates import GateConfig, derive_seed

CSV_COLUMNS = ("component", "neurons", "seed", "mae", "accuracy", "mee", "bit_errors", "total_bits", "wall_time_s")


def mean_absolute_error(computed: Sequence[float], actual: Sequence[int]) -> float:
    computed = np.asarray(computed, dtype=np.float64)
    actual = np.asarray(actual, dtype=np.float64)
    if computed.size == 0:
        raise ValueError("empty input")
    if computed.shape != actual.shape:
        raise ValueError("length mismatch")
    return float(np.abs(computed - actual).mean())


def mean_encoded_error(encoded: Sequence[int], actual: Sequence[int]) -> float:
    """Average Hamming distance between binarized outputs and reference bits."""
    encoded = np.asarray(encoded, dtype=np.int64)
    actual = np.asarray(actual, dtype=np.int64)
    if encoded.size == 0:
        raise ValueError("empty input")
    if encoded.shape != actual.shape:
        raise ValueError("length mismatch")
    return float((encoded ^ actual).mean())


def accuracy_from_mae(mae: float) -> float:
    return (1.0 - mae) * 100.0


def default_neuron_budget() -> dict[str, int]:
    return dict(DEFAULT_BUDGET)


@dataclass
class MetricsReport:
    component: str
    mae: float
    accuracy: float
    mee: float
    bit_errors: int
    total_bits: int
    neurons_per_ensemble: int
    n_trials: int
    seeds: list[int] = field(default_factory=list)
    wall_time_s: float = 0.0

    @classmethod
    def from_samples(cls, component, analog, encoded, actual, neurons, seeds, wall_time_s=0.0):
        mae = mean_absolute_error(analog, actual)
        mee = mean_encoded_error(encoded, actual)
        errors = int(np.sum(np.asarray(encoded) != np.asarray(actual)))
        return cls(
            component, mae, accuracy_from_mae(mae), mee, errors, len(actual), neurons, len(seeds), list(seeds),
            wall_time_s,
        )

    @property
    def bit_error_rate(self) -> float:
        return self.bit_errors / self.total_bits


# A trial runner draws a random input, evaluates the component and returns
# (pre-binarization analog outputs, binarized outputs, reference bits).
Trial = Callable[[np.random.Generator, int], tuple[list[float], list[int], list[int]]]


def _lines(lines):
    return [b.analog_value for b in lines], [b.logical_value for b in lines]


def build_component(component: str, cfg: GateConfig, width: int = 6, seed: int = 0) -> Trial:
    """Fresh component of the given name; returns its trial runner."""
    if component == "mantissa_multiplier":
        mm = MantissaMultiplier(width, cfg, seed)

        def trial(rng, run_seed):
            m1, m2 = (int(v) for v in rng.integers(0, 1 << width, 2))
            lines, _ = mm(m1, m2, run_seed)
            product = ((1 << width) | m1) * ((1 << width) | m2)
            return (*_lines(lines), to_bits(product, 2 * (width + 1)))

    elif component == "exponent_adder":
        ea = ExponentAdder(cfg, seed)

        def trial(rng, run_seed):
            e1, e2 = (int(v) for v in rng.integers(1, 255, 2))
            norm = int(rng.integers(0, 2))
            sums, c = ea(e1, e2, norm, run_seed)
            return (*_lines(list(sums) + [c]), to_bits(e1 + e2 + norm, 9))

    elif component == "bias_subtractor":
        bs = BiasSubtractor(cfg, seed)

        def trial(rng, run_seed):
            e_sum = int(rng.integers(0, 256))
            out = bs(e_sum, run_seed)
            return (*_lines(out), to_bits((e_sum - BIAS) & 0xFF, 8))

    elif component == "sign_of_uf":
        so = SignOfUf(cfg, seed)

        def trial(rng, run_seed):
            s1, s2, c = (int(v) for v in rng.integers(0, 2, 3))
            line, _ = so(s1, s2, c, run_seed)
            return [line.analog_value], [line.logical_value], [s1 ^ s2]

    else:
        raise ValueError(f"unknown component {component!r}; expected one of {COMPONENTS}")
    return trial


def measure(
    component: str,
    neurons: int,
    seed: int,
    n_inputs: int = 1,
    width: int = 6,
    cfg: GateConfig | None = None,
) -> MetricsReport:
    """Build one component instance from ``seed`` and run ``n_inputs`` random inputs through it."""
    cfg = (cfg or GateConfig(mode="spiking")).with_neurons(neurons)
    t0 = time.perf_counter()
    trial = build_component(component, cfg, width, derive_seed(seed, 0))
    rng = np.random.default_rng(derive_seed(seed, 1))
    analog, encoded, actual = [], [], []
    for k in range(n_inputs):
        a, e, r = trial(rng, derive_seed(seed, 2, k))
        analog += a
        encoded += e
        actual += r
    return MetricsReport.from_samples(component, analog, encoded, actual, neurons, [seed], time.perf_counter() - t0)


def combine(reports: Sequence[MetricsReport]) -> MetricsReport:
    """Pool several reports of the same component and neuron count."""
    if not reports:
        raise ValueError("nothing to combine")
    total = sum(r.total_bits for r in reports)
    mae = sum(r.mae * r.total_bits for r in reports) / total
    errors = sum(r.bit_errors for r in reports)
    return MetricsReport(
        reports[0].component,
        mae,
        accuracy_from_mae(mae),
        errors / total,
        errors,
        total,
        reports[0].neurons_per_ensemble,
        sum(r.n_trials for r in reports),
        [s for r in reports for s in r.seeds],
        sum(r.wall_time_s for r in reports),
    )


def bit_error_rate(
    component: str,
    neurons: int,
    trials: int,
    seed: int = 0,
    width: int = 6,
    cfg: GateConfig | None = None,
    inputs_per_trial: int = 1,
) -> MetricsReport:
    """Pooled report over ``trials`` independently seeded builds; see ``.bit_error_rate``."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    return combine(
        [measure(component, neurons, derive_seed(seed, t), inputs_per_trial, width, cfg) for t in range(trials)]
    )


@dataclass
class SweepResult:
    component: str
    neuron_counts: list[int]
    reports: list[MetricsReport]
    rows: list[MetricsReport]

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.neuron_counts, self.neuron_counts[1:])):
            raise ValueError("neuron_counts must be strictly increasing")

    def accuracy(self) -> dict[int, float]:
        """Mean over seeds of per-seed accuracy, per neuron count."""
        out = {}
        for n in self.neuron_counts:
            out[n] = float(np.mean([r.accuracy for r in self.rows if r.neurons_per_ensemble == n]))
        return out

    def knee(self, tolerance: float = 1.0) -> int:
        """Smallest count whose accuracy is within ``tolerance`` points of the best."""
        acc = self.accuracy()
        best = max(acc.values())
        return min(n for n, a in acc.items() if a >= best - tolerance)


def sweep_neurons(
    component: str,
    counts: Iterable[int],
    trials_per_count: int = 5,
    master_seed: int = 0,
    width: int = 6,
    cfg: GateConfig | None = None,
    inputs_per_trial: int = 4,
    progress: Callable[[MetricsReport], None] | None = None,
) -> SweepResult:
    counts = list(counts)
    if not counts:
        raise ValueError("counts must be non-empty")
    if component not in COMPONENTS:
        raise ValueError(f"unknown component {component!r}; expected one of {COMPONENTS}")
    counts = sorted(counts)
    rows = []
    for n in counts:
        for t in range(trials_per_count):
            r = measure(component, n, derive_seed(master_seed, n, t), inputs_per_trial, width, cfg)
            rows.append(r)
            if progress:
                progress(r)
    reports = [combine([r for r in rows if r.neurons_per_ensemble == n]) for n in counts]
    return SweepResult(component, counts, reports, rows)


def write_csv(rows: Iterable[MetricsReport], path) -> None:
    rows = sorted(rows, key=lambda r: (r.neurons_per_ensemble, r.seeds[0]))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(
                [
                    r.component,
                    r.neurons_per_ensemble,
                    r.seeds[0],
                    f"{r.mae:.6f}",
                    f"{r.accuracy:.4f}",
                    f"{r.mee:.6f}",
                    r.bit_errors,
                    r.total_bits,
                    f"{r.wall_time_s:.3f}",
                ]
            )
