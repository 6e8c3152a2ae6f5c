"""Compare the compiled and pure-numpy kernel backends.

Times the two hot paths on a realistic working point:

* mean-field relaxation of a 50-seed batch
* spectral density rows on an adaptive frequency grid

Run as ``python3 benchmarks/bench_kernels.py``.  Each backend gets a
warmup call first so the compiled path is timed after JIT compilation,
and parity between backends is checked on the timed outputs.
"""

import argparse
import time

import numpy as np

from dcesim import _kernels
from dcesim import (build_drift, classify_and_solve, frequency_grid,
                    mean_fields, noise_matrix, relax_mean_field_batch)
from dcesim.sweep import figure_base


def _seed_batch(eff, count, rng):
    pts = classify_and_solve(eff)
    seeds = np.empty((count, 3), dtype=np.complex128)
    for k in range(count):
        p = pts[k % len(pts)]
        a2, b = mean_fields(p.z, eff)
        center = np.array([(p.z - 1.0) / 2.0, a2, b], dtype=np.complex128)
        jitter = 0.05 * (rng.uniform(-1, 1, 3) + 1j * rng.uniform(-1, 1, 3))
        seeds[k] = center * (1.0 + jitter)
        seeds[k, 0] = abs(seeds[k, 0].real)
    return seeds


def _time(fn, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seeds", type=int, default=50)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    eff = figure_base()
    rng = np.random.default_rng(7)
    seeds = _seed_batch(eff, args.seeds, rng)
    bp = classify_and_solve(eff)[2]
    A = build_drift(bp, eff)
    d4 = np.ascontiguousarray(np.diag(noise_matrix(eff)))
    grid = frequency_grid(A)
    for _ in range(3):
        grid = np.unique(np.concatenate([grid, 0.5 * (grid[1:] + grid[:-1])]))

    results = {}
    for backend in ("numba", "numpy"):
        try:
            _kernels.set_backend(backend)
        except Exception as exc:
            print(f"{backend:>6}: unavailable ({exc})")
            continue

        def relax():
            return relax_mean_field_batch(eff, seeds)

        def rows():
            return _kernels.spectrum_rows(A, d4, grid)

        relax()  # warmup: compiles on the numba path
        rows()
        t_relax, out_relax = _time(relax, args.repeats)
        t_rows, out_rows = _time(rows, args.repeats)
        results[backend] = (t_relax, t_rows, out_relax, out_rows)
        print(f"{backend:>6}: relax {args.seeds} seeds {t_relax * 1e3:9.2f} ms"
              f"   spectrum {len(grid)} freqs {t_rows * 1e3:9.2f} ms")

    if len(results) == 2:
        nb, np_ = results["numba"], results["numpy"]
        print(f"speedup: relax x{np_[0] / nb[0]:.1f}, spectrum x{np_[1] / nb[1]:.1f}")
        states_gap = np.abs(nb[2][0] - np_[2][0]).max() / max(1.0, np.abs(np_[2][0]).max())
        rows_gap = np.abs(nb[3] - np_[3]).max() / np.abs(np_[3]).max()
        print(f"parity:  relax states {states_gap:.2e}, spectrum rows {rows_gap:.2e}")
        assert (nb[2][1] == np_[2][1]).all(), "convergence flags differ"
        assert states_gap < 1e-9 and rows_gap < 1e-9, "backend outputs diverged"
    _kernels.set_backend("auto")


if __name__ == "__main__":
    main()
