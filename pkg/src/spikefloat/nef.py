"""Minimal Neural Engineering Framework: LIF tuning, ensembles, decoders, simulation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from spikefloat import _kernels


class DecoderSolveError(RuntimeError):
    pass


class CycleError(ValueError):
    pass


@dataclass(frozen=True)
class LifParameters:
    tau_rc: float = 0.02
    tau_ref: float = 0.002
    v_threshold: float = 1.0
    dt: float = 0.001

    def __post_init__(self):
        if not self.tau_rc > 0:
            raise ValueError("tau_rc must be positive")
        if self.tau_ref < 0:
            raise ValueError("tau_ref must be non-negative")
        if not 0 < self.dt < self.tau_rc:
            raise ValueError("dt must satisfy 0 < dt < tau_rc")
        if self.v_threshold != 1.0:
            raise ValueError("only the normalised threshold v_threshold=1 is supported")


@dataclass(frozen=True)
class SimConfig:
    dt: float = 0.001
    probe_interval: float = 0.010
    settle_time: float = 0.200
    readout_window: float = 0.050
    synapse_tau: float = 0.005
    master_seed: int = 0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.probe_interval < self.dt:
            raise ValueError("probe_interval must be >= dt")
        if not self.settle_time >= self.readout_window > 0:
            raise ValueError("need settle_time >= readout_window > 0")
        if self.synapse_tau <= 0:
            raise ValueError("synapse_tau must be positive")

    @property
    def n_steps(self) -> int:
        return int(round(self.settle_time / self.dt))

    @property
    def probe_every(self) -> int:
        return max(1, int(round(self.probe_interval / self.dt)))


def lif_rate(J, params: LifParameters = LifParameters()):
    """Steady-state LIF firing rate (Hz) for normalised drive ``J``.

    Works elementwise on arrays; returns 0 wherever ``J <= 1``.
    """
    J = np.asarray(J, dtype=np.float64)
    out = np.zeros_like(J)
    m = J > 1.0
    out[m] = 1.0 / (params.tau_ref - params.tau_rc * np.log1p(-1.0 / J[m]))
    return out if out.ndim else float(out)


def _inverse_rate(rate, params: LifParameters):
    # drive J at which lif_rate(J) == rate
    return 1.0 / -np.expm1((params.tau_ref - 1.0 / np.asarray(rate, dtype=np.float64)) / params.tau_rc)


@dataclass(frozen=True, eq=False)
class Ensemble:
    n_neurons: int
    dimensions: int
    radius: float
    encoders: np.ndarray
    gains: np.ndarray
    biases: np.ndarray
    lif: LifParameters
    seed: int
    max_rates: np.ndarray = field(repr=False)
    intercepts: np.ndarray = field(repr=False)

    def same_as(self, other: "Ensemble") -> bool:
        return (
            self.n_neurons == other.n_neurons
            and self.dimensions == other.dimensions
            and self.radius == other.radius
            and np.array_equal(self.encoders, other.encoders)
            and np.array_equal(self.gains, other.gains)
            and np.array_equal(self.biases, other.biases)
        )

    @property
    def scaled_encoders(self) -> np.ndarray:
        return self.encoders * (self.gains / self.radius)[:, None]


def build_ensemble(
    n_neurons: int,
    dimensions: int = 1,
    radius: float = 1.0,
    lif: LifParameters = LifParameters(),
    seed: int = 0,
    rate_range: tuple[float, float] = (200.0, 400.0),
    intercept_range: tuple[float, float] = (-1.0, 1.0),
) -> Ensemble:
    """Sample encoders, max rates and intercepts, then solve gains and biases.

    Neuron ``i`` is at threshold when ``e_i . x / radius`` equals its intercept
    and fires at its max rate when that projection is 1.
    """
    if n_neurons < 1 or dimensions < 1:
        raise ValueError("n_neurons and dimensions must be >= 1")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    lo_r, hi_r = rate_range
    lo_c, hi_c = intercept_range
    if not (0 < lo_r < hi_r) or not (lo_c < hi_c) or hi_c > 1:
        raise ValueError("rate_range and intercept_range must be non-degenerate")
    if lo_r > 0 and 1.0 / hi_r <= lif.tau_ref:
        raise ValueError("max rate exceeds the refractory limit")

    rng = np.random.default_rng(seed)
    enc = rng.standard_normal((n_neurons, dimensions))
    enc /= np.linalg.norm(enc, axis=1, keepdims=True)
    max_rates = rng.uniform(lo_r, hi_r, n_neurons)
    intercepts = rng.uniform(lo_c, hi_c, n_neurons)

    j_max = _inverse_rate(max_rates, lif)
    gains = (j_max - 1.0) / (1.0 - intercepts)
    biases = 1.0 - gains * intercepts
    return Ensemble(n_neurons, dimensions, float(radius), enc, gains, biases, lif, seed, max_rates, intercepts)


def neuron_activities(ens: Ensemble, x) -> np.ndarray:
    """Rates for one point (shape (d,)) or a batch of points (shape (m, d))."""
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim <= 1
    pts = np.atleast_2d(x.reshape(1, -1) if single else x)
    if pts.shape[1] != ens.dimensions:
        raise ValueError(f"expected {ens.dimensions}-D input, got {pts.shape[1]}-D")
    J = pts @ ens.scaled_encoders.T + ens.biases
    rates = lif_rate(J, ens.lif)
    return rates[0] if single else rates


def eval_grid(radius: float, dimensions: int = 1, n_points: int = 500, interval=None) -> np.ndarray:
    """Uniform grid over the represented interval, tensorised for 2-D."""
    lo, hi = interval if interval is not None else (-radius, radius)
    if dimensions == 1:
        return np.linspace(lo, hi, n_points)[:, None]
    if dimensions == 2:
        side = int(math.ceil(math.sqrt(n_points)))
        g = np.linspace(lo, hi, side)
        a, b = np.meshgrid(g, g, indexing="ij")
        return np.column_stack([a.ravel(), b.ravel()])
    raise ValueError("eval grids are only tensorised up to 2-D")


def solve_decoders(ens: Ensemble, eval_points, targets, regularization: float = 0.1) -> np.ndarray:
    """Ridge least-squares decoders from activities at ``eval_points`` to ``targets``.

    The Gram matrix is averaged over eval points and gets
    ``(regularization * max activity)**2`` added to its diagonal.
    """
    eval_points = np.asarray(eval_points, dtype=np.float64)
    if eval_points.ndim == 1:
        eval_points = eval_points[:, None]
    targets = np.asarray(targets, dtype=np.float64)
    if targets.ndim == 1:
        targets = targets[:, None]
    m = eval_points.shape[0]
    if m < 1:
        raise ValueError("need at least one eval point")
    if targets.shape[0] != m:
        raise ValueError("targets and eval_points differ in length")

    A = neuron_activities(ens, eval_points)
    sigma = regularization * A.max()
    gram = A.T @ A / m + sigma**2 * np.eye(ens.n_neurons)
    upsilon = A.T @ targets / m
    try:
        dec = np.linalg.solve(gram, upsilon)
    except np.linalg.LinAlgError as exc:
        raise DecoderSolveError(str(exc)) from exc
    if not np.all(np.isfinite(dec)):
        raise DecoderSolveError("non-finite decoders")
    return dec


def regularized_loss(ens: Ensemble, eval_points, targets, decoders, regularization: float = 0.1) -> float:
    """The objective minimised by :func:`solve_decoders`."""
    eval_points = np.asarray(eval_points, dtype=np.float64).reshape(len(eval_points), -1)
    targets = np.asarray(targets, dtype=np.float64).reshape(len(eval_points), -1)
    A = neuron_activities(ens, eval_points)
    sigma = regularization * A.max()
    resid = targets - A @ decoders
    return float((resid**2).sum() / len(eval_points) + sigma**2 * (decoders**2).sum())


@dataclass(frozen=True, eq=False)
class DecodedConnection:
    source: Ensemble
    decoders: np.ndarray
    synapse_tau: float = 0.005
    target_function: str = "identity"
    target: Ensemble | None = None

    def __post_init__(self):
        if self.decoders.ndim != 2 or self.decoders.shape[0] != self.source.n_neurons:
            raise ValueError(
                f"decoder shape {self.decoders.shape} does not match {self.source.n_neurons} source neurons"
            )

    @property
    def size_out(self) -> int:
        return self.decoders.shape[1]


def connect(
    source: Ensemble,
    function: Callable[[np.ndarray], np.ndarray] | None = None,
    *,
    target: Ensemble | None = None,
    eval_points=None,
    regularization: float = 0.1,
    synapse_tau: float = 0.005,
    label: str | None = None,
) -> DecodedConnection:
    """Solve decoders for ``function`` (identity by default) and wrap them."""
    if eval_points is None:
        eval_points = eval_grid(source.radius, source.dimensions)
    eval_points = np.asarray(eval_points, dtype=np.float64).reshape(-1, source.dimensions)
    if function is None:
        targets = eval_points
        label = label or "identity"
    else:
        targets = np.asarray([np.atleast_1d(function(p)) for p in eval_points], dtype=np.float64)
        label = label or getattr(function, "__name__", "function")
    dec = solve_decoders(source, eval_points, targets, regularization)
    return DecodedConnection(source, dec, synapse_tau, label, target)


@dataclass
class Probe:
    connection: DecodedConnection
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    samples: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))


@dataclass(eq=False)
class Network:
    """Feedforward graph of ensembles, decoded connections and constant inputs."""

    ensembles: list[Ensemble] = field(default_factory=list)
    connections: list[DecodedConnection] = field(default_factory=list)
    inputs: list[tuple[np.ndarray, Ensemble]] = field(default_factory=list)

    def add(self, ens: Ensemble) -> Ensemble:
        self.ensembles.append(ens)
        return ens

    def stim(self, value, ens: Ensemble) -> None:
        self.inputs.append((np.atleast_1d(np.asarray(value, dtype=np.float64)), ens))

    def link(self, conn: DecodedConnection) -> DecodedConnection:
        self.connections.append(conn)
        return conn

    def topo_order(self) -> list[Ensemble]:
        ids = {id(e): e for e in self.ensembles}
        for c in self.connections:
            ids.setdefault(id(c.source), c.source)
            if c.target is not None:
                ids.setdefault(id(c.target), c.target)
        indeg = {k: 0 for k in ids}
        for c in self.connections:
            if c.target is not None:
                indeg[id(c.target)] += 1
        ready = [k for k in ids if indeg[k] == 0]
        order = []
        while ready:
            k = ready.pop(0)
            order.append(ids[k])
            for c in self.connections:
                if c.target is not None and id(c.source) == k:
                    indeg[id(c.target)] -= 1
                    if indeg[id(c.target)] == 0:
                        ready.append(id(c.target))
        if len(order) != len(ids):
            raise CycleError("network contains a cycle; only feedforward graphs are supported")
        return order


def _lowpass_step_response(value: np.ndarray, n_steps: int, dt: float, tau: float) -> np.ndarray:
    decay = math.exp(-dt / tau)
    k = np.arange(1, n_steps + 1)
    return (1.0 - decay**k)[:, None] * value[None, :]


def _lowpass(series: np.ndarray, dt: float, tau: float) -> np.ndarray:
    decay = math.exp(-dt / tau)
    out = np.empty_like(series)
    acc = np.zeros(series.shape[1])
    for t in range(series.shape[0]):
        acc = decay * acc + (1.0 - decay) * series[t]
        out[t] = acc
    return out


def initial_voltages(n: int, seed) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.0, 1.0, n)


def simulate_ensemble(
    ens: Ensemble,
    x_series: np.ndarray,
    decoders: np.ndarray,
    sim: SimConfig,
    v0: np.ndarray,
    synapse_tau: float | None = None,
):
    """Spiking run of one ensemble under a given input time series."""
    return _kernels.lif_simulate(
        x_series,
        ens.scaled_encoders,
        ens.biases,
        v0,
        sim.dt,
        ens.lif.tau_rc,
        ens.lif.tau_ref,
        sim.synapse_tau if synapse_tau is None else synapse_tau,
        decoders,
    )


def run_network(net: Network, sim: SimConfig, mode: str = "spiking", seed: int | None = None) -> list[Probe]:
    """Run a feedforward network; returns one probe per connection.

    Ensembles are simulated in topological order over the full settle time,
    each consuming the complete decoded output series of its upstream
    connections, which is exact for acyclic graphs.  In ``rate`` mode every
    probe holds the noise-free steady-state value at every sample time.
    """
    order = net.topo_order()
    seed = sim.master_seed if seed is None else seed
    n_steps = sim.n_steps
    every = sim.probe_every
    probe_idx = np.arange(every - 1, n_steps, every)
    times = (probe_idx + 1) * sim.dt

    incoming: dict[int, list[DecodedConnection]] = {}
    for c in net.connections:
        if c.target is not None:
            incoming.setdefault(id(c.target), []).append(c)
    outgoing: dict[int, list[DecodedConnection]] = {}
    for c in net.connections:
        outgoing.setdefault(id(c.source), []).append(c)

    series: dict[int, np.ndarray] = {}
    for pos, ens in enumerate(order):
        if mode == "rate":
            x = np.zeros(ens.dimensions)
            for value, tgt in net.inputs:
                if tgt is ens:
                    x = x + value
            for c in incoming.get(id(ens), []):
                x = x + series[id(c)]
            a = neuron_activities(ens, x)
            for c in outgoing.get(id(ens), []):
                series[id(c)] = a @ c.decoders
            continue

        x = np.zeros((n_steps, ens.dimensions))
        for value, tgt in net.inputs:
            if tgt is ens:
                x += _lowpass_step_response(value, n_steps, sim.dt, sim.synapse_tau)
        for c in incoming.get(id(ens), []):
            x += series[id(c)]
        conns = outgoing.get(id(ens), [])
        if not conns:
            continue
        v0 = initial_voltages(ens.n_neurons, np.random.SeedSequence([seed, pos]))
        # one raw spike-decoded pass per distinct synapse, filtered per connection
        dec = np.hstack([c.decoders for c in conns])
        raw_tau = conns[0].synapse_tau
        out, _ = simulate_ensemble(ens, x, dec, sim, v0, synapse_tau=raw_tau)
        col = 0
        for c in conns:
            block = out[:, col : col + c.size_out]
            if c.synapse_tau != raw_tau:
                block, _ = simulate_ensemble(ens, x, c.decoders, sim, v0, synapse_tau=c.synapse_tau)
            series[id(c)] = block
            col += c.size_out

    probes = []
    for c in net.connections:
        s = series.get(id(c))
        if s is None:
            continue
        if mode == "rate":
            samples = np.tile(s, (len(times), 1))
        else:
            samples = s[probe_idx]
        probes.append(Probe(c, times.copy(), samples))
    return probes


def readout(probe: Probe, sim: SimConfig) -> np.ndarray:
    """Mean decoded value over the final ``readout_window`` of the probe."""
    if len(probe.times) == 0:
        raise ValueError("probe has no samples")
    end = probe.times[-1]
    if end + 1e-12 < sim.settle_time:
        raise ValueError("probe does not span settle_time")
    mask = probe.times > end - sim.readout_window + 1e-12
    if not mask.any():
        raise ValueError("no samples inside the readout window")
    return probe.samples[mask].mean(axis=0)
