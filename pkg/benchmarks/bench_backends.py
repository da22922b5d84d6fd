"""Time the numba kernels against the pure-numpy fallback.

    python3 benchmarks/bench_backends.py [--repeat 3] [--horizon 1000000]

Each kernel is called once per backend before timing so numba compilation is
excluded. Reports the best of ``--repeat`` runs and checks both backends agree.
"""

import argparse
import time

import numpy as np

from mprsampling import Budget, MprChannel, SamplingPolicy, Scenario, SimConfig, SourceParams, kernels, simulate, solve_grid
from mprsampling.optimizer import triangle_grid
from mprsampling.access import update_prob_matrices


def best_of(fn, repeat):
    fn()
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--resolution", type=int, default=101)
    ap.add_argument("--horizon", type=int, default=1_000_000)
    args = ap.parse_args()

    s = Scenario(
        SourceParams(0.8, 0.6, weight=0.5),
        SourceParams(0.3, 0.2, weight=0.5),
        MprChannel(0.9, 0.85, 0.6, 0.55),
        Budget(0.5, 0.5),
    )
    A = triangle_grid(0.5, args.resolution)
    m1, m2 = update_prob_matrices(s.channel)
    pols = (SamplingPolicy.from_rates(0.3, 0.2), SamplingPolicy.from_rates(0.1, 0.4))
    cases = {
        f"grid_argmin {len(A)}x{len(A)}": lambda: kernels.grid_argmin(A, A, m1, m2, s.kernel_params()),
        f"solve_grid res={args.resolution}": lambda: solve_grid(s, args.resolution).objective_value,
        f"simulate {args.horizon:.0e} slots": lambda: simulate(SimConfig(s, pols, args.horizon, seed=1)),
    }
    backends = [b for b in kernels.BACKENDS if b != "numba" or kernels.HAVE_NUMBA]
    print(f"{'case':32s}" + "".join(f"{b:>12s}" for b in backends) + "   speedup  agree")
    for name, fn in cases.items():
        res = {}
        for b in backends:
            with kernels.use_backend(b):
                res[b] = best_of(fn, args.repeat)
        t = [res[b][0] for b in backends]
        outs = [res[b][1] for b in backends]
        if isinstance(outs[0], tuple):
            agree = outs[0][:2] == outs[-1][:2] and np.isclose(outs[0][2], outs[-1][2], rtol=1e-12)
        else:
            agree = outs[0] == outs[-1] or np.isclose(outs[0], outs[-1], rtol=1e-12)
        speed = t[-1] / t[0] if len(t) > 1 else 1.0
        print(f"{name:32s}" + "".join(f"{x:11.4f}s" for x in t) + f"   {speed:6.1f}x  {bool(agree)}")


if __name__ == "__main__":
    main()
