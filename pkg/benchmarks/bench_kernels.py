#!/usr/bin/env python3
"""Time the compiled statevector kernels against the numpy fallback.

Runs each kernel on random states of increasing width and reports the best
wall time per call for both backends plus the speedup.  Works (with a note)
when the extension is not built.
"""

import argparse
import time

import numpy as np

from qramprep import _kernels_py

try:
    from qramprep import _kernels
except ImportError:
    _kernels = None


def random_state(rng, qubits):
    amps = rng.standard_normal(1 << qubits) + 1j * rng.standard_normal(1 << qubits)
    return np.ascontiguousarray(amps / np.linalg.norm(amps))


def cases(rng, qubits):
    """(name, args-after-amps) for every kernel at this width."""
    m = qubits
    key_shifts = np.asarray([m - 3], dtype=np.int64)
    key_widths = np.asarray([3], dtype=np.int64)
    words = rng.integers(16, size=8).astype(np.int64)
    flags = rng.integers(2, size=8).astype(np.int64)
    p = 0.37
    return [
        ("rotation_pairs", (1 << (m - 1), 1 << (m - 1), 1,
                            float(np.sqrt(p)), float(np.sqrt(1 - p)))),
        ("xor_word_load", (key_shifts, key_widths, words, 0)),
        ("phase_flip", (1 << (m // 2),)),
        ("bit_flip", (1 << (m - 1), 1 << (m - 1), 1)),
        ("key_phase_flip", (key_shifts, key_widths, flags)),
    ]


def best_time(impl, name, amps, args, repeats):
    fn = getattr(impl, name)
    best = float("inf")
    for _ in range(repeats):
        work = amps.copy()
        t0 = time.perf_counter()
        fn(work, *args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--qubits", type=int, nargs="+", default=[12, 16, 20])
    ap.add_argument("--repeats", type=int, default=7)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    if _kernels is None:
        print("compiled extension not built; timing the fallback only")
    header = f"{'qubits':>6}  {'kernel':<16}{'pure (ms)':>10}"
    if _kernels is not None:
        header += f"{'compiled (ms)':>15}{'speedup':>9}"
    print(header)
    for m in args.qubits:
        amps = random_state(rng, m)
        for name, extra in cases(rng, m):
            t_py = best_time(_kernels_py, name, amps, extra, args.repeats)
            line = f"{m:>6}  {name:<16}{t_py * 1e3:>10.3f}"
            if _kernels is not None:
                t_c = best_time(_kernels, name, amps, extra, args.repeats)
                line += f"{t_c * 1e3:>15.3f}{t_py / t_c:>9.2f}"
            print(line)


if __name__ == "__main__":
    main()
