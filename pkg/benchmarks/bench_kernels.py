"""Time each hot kernel in its numba and numpy flavour.

    python3 benchmarks/bench_kernels.py [--quick] [--repeat 3]

Both flavours run in the same process through the ``force=`` switch, so the
numba column includes nothing but warm calls (one untimed call compiles or
loads the cache first).  Results are checked for equality before timing is
reported.
"""

import argparse
import time

import numpy as np

from budgreed import _accel, kernels
from budgreed.bound import pair_arrays
from budgreed.exact import query_count_instance, random_instance


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return out, best


def cases(quick):
    N = 200 if quick else 1000
    jr, jr2 = pair_arrays(N)
    yield f"m_grid_final delta=1/{N} ({len(jr)} pairs)", \
        lambda f: kernels.m_grid_final(jr, jr2, N, 10**9, 427, 1000, force=f)[0]

    n = 16 if quick else 20
    inst = random_instance("modular", n, 0, "heavy-one")
    w = np.array(inst.oracle.weights)
    yield f"brute_force_modular n={n}", \
        lambda f: kernels.brute_force_modular(inst.costs, w, inst.budget, f)[0]

    cov = random_instance("coverage", n, 0, "heavy-one")
    o = cov.oracle
    masks = np.array(o.masks, dtype=np.uint64)
    tables = np.array(o._chunks)
    yield f"brute_force_coverage n={n}", \
        lambda f: kernels.brute_force_coverage(cov.costs, masks, tables, cov.budget, f)[0]

    m = 100 if quick else 200
    q = query_count_instance(m)
    qw, qc = np.array(q.oracle.weights), np.array(q.costs)
    yield f"kguess_query_count k=2 n={m}", \
        lambda f: kernels.kguess_query_count(qw, qc, q.budget, 2, f)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--quick", action="store_true", help="smaller sizes")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not _accel.HAVE_NUMBA:
        raise SystemExit("numba is unavailable (or BUDGREED_DISABLE_NUMBA is set); nothing to compare")

    print(f"{'kernel':<44}{'numba':>10}{'numpy':>10}{'speedup':>9}")
    for name, run in cases(args.quick):
        run("numba")  # compile / load cache
        a, t_nb = best_of(lambda: run("numba"), args.repeat)
        b, t_np = best_of(lambda: run("numpy"), args.repeat)
        same = np.array_equal(np.asarray(a), np.asarray(b))
        flag = "" if same else "  MISMATCH"
        print(f"{name:<44}{t_nb:>9.3f}s{t_np:>9.3f}s{t_np / t_nb:>8.1f}x{flag}")


if __name__ == "__main__":
    main()
