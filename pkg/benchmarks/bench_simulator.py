"""Wall-clock comparison of the numba and numpy chain backends.

    python3 benchmarks/bench_simulator.py [--N 20000] [--n 200] [--t 2.0] [--repeat 3]

Both backends consume the same counter-based random stream, so their endpoints
agree up to last-place differences between the two math libraries; the script
reports the largest absolute gap.
"""
import argparse
import time

import numpy as np

from levy_ergodicity import Drift, KernelSpec, LevyTypeModel, SimConfig, simulate_chain
from levy_ergodicity._accel import HAVE_NUMBA

MODELS = {
    "stable a=1.5": KernelSpec(alpha=1.5),
    "tempered a=1.5 theta=2": KernelSpec(family="tempered", alpha=1.5, theta=2.0),
    "state-dependent": KernelSpec(alpha=1.3, alpha_amp=0.4, c_amp=0.5),
}


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - start)
    return min(times), out


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--N", type=int, default=20_000, help="replicas")
    parser.add_argument("--n", type=int, default=200, help="steps per unit time")
    parser.add_argument("--t", type=float, default=2.0, help="horizon")
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    if HAVE_NUMBA:
        # compile outside the timed region
        simulate_chain(LevyTypeModel(kernel=KernelSpec()), SimConfig(n=10, t=0.1, N=4, backend="numba"))
    print(f"N={args.N} n={args.n} t={args.t} best of {args.repeat}")
    print(f"{'model':<26}" + "".join(f"{b:>12}" for b in backends) + ("     speedup    max |diff|" if HAVE_NUMBA else ""))
    for name, kernel in MODELS.items():
        model = LevyTypeModel(drift=Drift(A=1.0, kappa=1.0), kernel=kernel)
        row, ends = [], {}
        for b in backends:
            cfg = SimConfig(n=args.n, t=args.t, N=args.N, seed=1, x0=3.0, backend=b)
            secs, sample = best_of(lambda: simulate_chain(model, cfg), args.repeat)
            row.append(secs)
            ends[b] = sample.endpoints
        line = f"{name:<26}" + "".join(f"{s:>11.3f}s" for s in row)
        if HAVE_NUMBA:
            gap = float(np.max(np.abs(ends["numpy"] - ends["numba"])))
            line += f"{row[0] / row[1]:>11.1f}x  {gap:>12.2e}"
        print(line)


if __name__ == "__main__":
    main()
