"""Compare the numba and pure-numpy LIF kernels.

    python benchmarks/bench_kernels.py [--repeats 5]

Times one gate-sized run (200 steps) at several population sizes, checks that
the two kernels agree, and prints a table of median wall times.
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from spikefloat import _kernels
from spikefloat.nef import LifParameters, SimConfig, build_ensemble, eval_grid, solve_decoders


def _case(n: int):
    sim, lif = SimConfig(), LifParameters()
    ens = build_ensemble(n, 1, 3.0, lif, seed=n)
    pts = eval_grid(3.0)
    dec = solve_decoders(ens, pts, np.column_stack([pts[:, 0], (pts[:, 0] >= 1.5).astype(float)]))
    x = np.full((sim.n_steps, 1), 2.0)
    v0 = np.random.default_rng(n).uniform(0, 1, n)
    return (x, ens.scaled_encoders, ens.biases, v0, sim.dt, lif.tau_rc, lif.tau_ref, sim.synapse_tau, dec)


def _median_time(fn, args, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--sizes", default="100,300,600,1200")
    args = ap.parse_args(argv)
    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed")

    # first call compiles (or loads the on-disk cache)
    t0 = time.perf_counter()
    _kernels.lif_simulate_numba(*_case(10))
    print(f"numba warm-up {time.perf_counter() - t0:.2f}s")

    print(f"{'neurons':>8} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8} {'max |diff|':>11}")
    for n in (int(s) for s in args.sizes.split(",")):
        case = _case(n)
        out_np, cnt_np = _kernels.lif_simulate_numpy(*case)
        out_nb, cnt_nb = _kernels.lif_simulate_numba(*case)
        diff = float(np.max(np.abs(out_np - out_nb)))
        assert np.array_equal(cnt_np, cnt_nb), "spike counts differ between kernels"
        t_np = _median_time(_kernels.lif_simulate_numpy, case, args.repeats)
        t_nb = _median_time(_kernels.lif_simulate_numba, case, args.repeats)
        print(f"{n:>8} {t_np * 1e3:>10.2f} {t_nb * 1e3:>10.2f} {t_np / t_nb:>7.1f}x {diff:>11.2e}")


if __name__ == "__main__":
    main()
