"""Compare the numba and numpy kernels for partition refinement and reachability.

Usage: python benchmarks/bench_refine.py [--sizes 1000 10000 100000] [--cycle-sizes 500 2000] [--repeat 3]

Two graph families: random labelled graphs (fixed seed), where refinement is
shallow, and a single cycle with one distinguished state, where it takes n
rounds. Both kernels run on identical inputs and their results are checked for
equality before timings are reported. The first numba call is timed
separately as the compilation cost.
"""

import argparse
import time

import numpy as np

from pairwise_nf import _jit


def random_graph(n, degree, labels, rng):
    m = n * degree
    src = rng.integers(0, n, m)
    dst = rng.integers(0, n, m)
    lab = rng.integers(1, labels + 1, m)
    block0 = rng.integers(0, 4, n)
    return src, lab, dst, block0


def cycle_graph(n):
    src = np.arange(n, dtype=np.int64)
    dst = (src + 1) % n
    lab = np.ones(n, dtype=np.int64)
    block0 = np.zeros(n, dtype=np.int64)
    block0[0] = 1
    return src, lab, dst, block0


def best_of(f, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = f()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[1000, 10000, 100000])
    ap.add_argument("--cycle-sizes", type=int, nargs="*", default=[500, 2000])
    ap.add_argument("--degree", type=int, default=3)
    ap.add_argument("--labels", type=int, default=3)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)

    if not _jit.HAVE_NUMBA:
        print("numba unavailable (or disabled); only the numpy kernels will run")

    warm = random_graph(50, 2, 2, rng)
    t0 = time.perf_counter()
    _jit.refine(50, *warm, use_jit=True)
    _jit.reachable(50, warm[0], warm[2], [0], use_jit=True)
    print(f"numba first-call cost: {time.perf_counter() - t0:.3f} s", flush=True)

    print(f"{'kernel':<18}{'n':>9}{'edges':>10}{'numba s':>11}{'numpy s':>11}{'speedup':>9}", flush=True)
    cases = [("random", n, random_graph(n, args.degree, args.labels, rng)) for n in args.sizes]
    cases += [("cycle", n, cycle_graph(n)) for n in args.cycle_sizes]
    for family, n, (src, lab, dst, block0) in cases:
        t_nb, a = best_of(lambda: _jit.refine(n, src, lab, dst, block0, use_jit=True), args.repeat)
        t_np, b = best_of(lambda: _jit.refine(n, src, lab, dst, block0, use_jit=False), args.repeat)
        assert (a == b).all(), "refine kernels disagree"
        row("refine/" + family, n, len(src), t_nb, t_np)
        seeds = [0]
        t_nb, a = best_of(lambda: _jit.reachable(n, src, dst, seeds, use_jit=True), args.repeat)
        t_np, b = best_of(lambda: _jit.reachable(n, src, dst, seeds, use_jit=False), args.repeat)
        assert (a == b).all(), "reachability kernels disagree"
        row("reachable/" + family, n, len(src), t_nb, t_np)


def row(name, n, m, t_nb, t_np):
    print(f"{name:<18}{n:>9}{m:>10}{t_nb:>11.4f}{t_np:>11.4f}{t_np / max(t_nb, 1e-9):>9.1f}", flush=True)

if __name__ == "__main__":
    main()
