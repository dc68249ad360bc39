"""Time the compiled integration kernel against the numpy fallback.

    python benchmarks/bench_kernel.py [--nodes 1000] [--steps 600] [--repeat 3]

Inputs mimic a Monte-Carlo batch: each node has one two-device read stack
and one single-device path, with per-node Vt scatter.
"""

import argparse
import time

import numpy as np

from xsram import _kernel_py
from xsram.devicemodel import CHAIN_BISECT, DeviceParams

try:
    from xsram import _kernel as _kernel_c
except ImportError:
    _kernel_c = None


def make_batch(n, seed=0):
    p = DeviceParams()
    rng = np.random.default_rng(seed)
    shape = (n, 2)
    vt = p.vt_n0 + rng.normal(0.0, 0.03, shape)
    return dict(
        v0=np.full(n, p.vdd),
        rail=np.zeros(shape),
        ndev=np.tile(np.array([2, 1], dtype=np.int64), (n, 1)),
        g_n=np.full(shape, p.vdd),
        vt_n=vt,
        w_n=np.ones(shape),
        g_f=np.full(shape, p.vdd) * rng.integers(0, 2, shape),
        vt_f=p.vt_n0 + rng.normal(0.0, 0.03, shape),
        w_f=np.full(shape, 2.0),
    ), p


def run(mod, batch, p, steps):
    return mod.integrate(
        batch["v0"], batch["rail"], batch["ndev"], batch["g_n"], batch["vt_n"], batch["w_n"],
        batch["g_f"], batch["vt_f"], batch["w_f"], steps, p.dt, p.c_bl, p.k_n,
        p.alpha, p.derate(), 0.0, p.vdd, p.vdd / 4, CHAIN_BISECT, False)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=1000)
    ap.add_argument("--steps", type=int, default=600)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    batch, p = make_batch(args.nodes)
    t_py, (v_py, _, _) = best_of(lambda: run(_kernel_py, batch, p, args.steps), args.repeat)
    print(f"numpy   : {t_py * 1e3:9.1f} ms  ({args.nodes} nodes x {args.steps} steps)")
    if _kernel_c is None:
        print("cython  : not built (pip install -e . --no-build-isolation)")
        return
    t_c, (v_c, _, _) = best_of(lambda: run(_kernel_c, batch, p, args.steps), args.repeat)
    print(f"cython  : {t_c * 1e3:9.1f} ms  speedup {t_py / t_c:.1f}x")
    print(f"max |dv|: {np.max(np.abs(v_py - v_c)):.3e} V")


if __name__ == "__main__":
    main()
