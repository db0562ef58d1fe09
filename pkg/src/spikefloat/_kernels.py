"""Hot loop of the spiking simulator.

Two implementations of the same LIF + lowpass-synapse kernel live here: a
numba ``@njit`` version and a vectorised pure-numpy version.  Set
``SPIKEFLOAT_DISABLE_NUMBA=1`` (or run without numba installed) to select the
numpy path.  Both perform the same floating-point operations in the same
order, so their outputs agree to within libm rounding differences.
"""

from __future__ import annotations

import math
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("SPIKEFLOAT_DISABLE_NUMBA", "") not in ("1", "true", "yes")


def lif_simulate_numpy(x, enc, bias, v0, dt, tau_rc, tau_ref, tau_syn, decoders):
    """Simulate an LIF population driven by ``x`` and decode its filtered spikes.

    ``x`` is (steps, d) represented input, ``enc`` is (n, d) encoders already
    scaled by gain / radius, ``decoders`` is (n, k).  Returns the (steps, k)
    synapse-filtered decoded output and the (n,) per-neuron spike counts.
    """
    steps = x.shape[0]
    n = enc.shape[0]
    k = decoders.shape[1]
    v = v0.astype(np.float64).copy()
    ref = np.zeros(n)
    counts = np.zeros(n, dtype=np.int64)
    out = np.empty((steps, k))
    filt = np.zeros(k)
    decay = math.exp(-dt / tau_syn)
    drive = x @ enc.T + bias
    for t in range(steps):
        J = drive[t]
        ref -= dt
        delta = np.minimum(np.maximum(dt - ref, 0.0), dt)
        v -= (J - v) * np.expm1(-delta / tau_rc)
        spiked = v > 1.0
        raw = np.zeros(k)
        if spiked.any():
            idx = np.flatnonzero(spiked)
            tspike = dt + tau_rc * np.log1p(-(v[idx] - 1.0) / (J[idx] - 1.0))
            ref[idx] = tau_ref + tspike
            v[idx] = 0.0
            counts[idx] += 1
            raw = decoders[idx].sum(axis=0) / dt
        v[v < 0.0] = 0.0
        filt = decay * filt + (1.0 - decay) * raw
        out[t] = filt
    return out, counts


if HAVE_NUMBA:

    @njit(cache=True)
    def lif_simulate_numba(x, enc, bias, v0, dt, tau_rc, tau_ref, tau_syn, decoders):
        steps, d = x.shape
        n = enc.shape[0]
        k = decoders.shape[1]
        v = v0.astype(np.float64).copy()
        ref = np.zeros(n)
        counts = np.zeros(n, dtype=np.int64)
        out = np.empty((steps, k))
        filt = np.zeros(k)
        raw = np.zeros(k)
        decay = math.exp(-dt / tau_syn)
        for t in range(steps):
            raw[:] = 0.0
            for i in range(n):
                J = bias[i]
                for j in range(d):
                    J += x[t, j] * enc[i, j]
                ref[i] -= dt
                delta = min(max(dt - ref[i], 0.0), dt)
                v[i] -= (J - v[i]) * math.expm1(-delta / tau_rc)
                if v[i] > 1.0:
                    tspike = dt + tau_rc * math.log1p(-(v[i] - 1.0) / (J - 1.0))
                    ref[i] = tau_ref + tspike
                    v[i] = 0.0
                    counts[i] += 1
                    for c in range(k):
                        raw[c] += decoders[i, c]
                elif v[i] < 0.0:
                    v[i] = 0.0
            for c in range(k):
                filt[c] = decay * filt[c] + (1.0 - decay) * (raw[c] / dt)
                out[t, c] = filt[c]
        return out, counts

else:  # pragma: no cover
    lif_simulate_numba = None


def lif_simulate(x, enc, bias, v0, dt, tau_rc, tau_ref, tau_syn, decoders):
    x = np.ascontiguousarray(x, dtype=np.float64)
    enc = np.ascontiguousarray(enc, dtype=np.float64)
    bias = np.ascontiguousarray(bias, dtype=np.float64)
    v0 = np.ascontiguousarray(v0, dtype=np.float64)
    decoders = np.ascontiguousarray(decoders, dtype=np.float64)
    fn = lif_simulate_numba if USE_NUMBA else lif_simulate_numpy
    return fn(x, enc, bias, v0, float(dt), float(tau_rc), float(tau_ref), float(tau_syn), decoders)
