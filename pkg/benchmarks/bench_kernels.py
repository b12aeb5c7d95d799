"""Time the numeric kernels under numba and under the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--csv out.csv]

Both paths run in one process by toggling ``_accel.USE_NUMBA``; the numba
path is warmed up once so compilation is not counted. Results are checked
for agreement before timing.
"""

import argparse
import csv
import sys
import time

import numpy as np

from zext import _accel, kernels


def labelling_case(rng):
    n, L = 11, 3
    fixed = np.full(n, -1)
    fixed[:3] = [0, 1, 2]
    free = np.arange(3, n)
    eu = rng.integers(0, n, 30)
    ev = rng.integers(0, n, 30)
    d = np.array([[0, 1, 2], [1, 0, 1], [2, 1, 0]])
    return lambda: kernels.best_labelling(fixed, free, L, d, eu, ev, None, 6)


def separation_case(rng):
    n = 14
    edges = [(i, i + 1) for i in range(n - 1)]
    edges += [tuple(rng.choice(n, 2, replace=False)) for _ in range(10)]
    eu, ev = zip(*edges)
    return lambda: kernels.best_separation(n, eu, ev, 3, 3)


def rank_case(rng):
    a = rng.integers(0, kernels.DEFAULT_PRIME, size=(60, 80))
    return lambda: kernels.rank_mod(a)


def nullspace_case(rng):
    a = rng.integers(0, kernels.DEFAULT_PRIME, size=(40, 70))
    return lambda: kernels.nullspace_mod(a)


def wedge_case(rng):
    cols = rng.integers(0, kernels.DEFAULT_PRIME, size=(12, 4))
    return lambda: kernels.wedge_vector(cols)


def greedy_case(rng):
    v = rng.integers(0, 5, size=(300, 40))
    return lambda: kernels.greedy_independent(v)


CASES = {
    "best_labelling": labelling_case,
    "best_separation": separation_case,
    "rank_mod": rank_case,
    "nullspace_mod": nullspace_case,
    "wedge_vector": wedge_case,
    "greedy_independent": greedy_case,
}


def _same(a, b) -> bool:
    if isinstance(a, tuple):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    return np.array_equal(np.asarray(a), np.asarray(b))


def time_call(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best * 1000


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--csv")
    args = ap.parse_args(argv)
    if not _accel.HAVE_NUMBA:
        print("numba is not installed; only the numpy path can run", file=sys.stderr)
    rows = []
    old = _accel.USE_NUMBA
    try:
        for name, make in CASES.items():
            fn = make(np.random.default_rng(args.seed))
            res, ms = {}, {}
            for mode in ("numba", "numpy") if _accel.HAVE_NUMBA else ("numpy",):
                _accel.USE_NUMBA = mode == "numba"
                res[mode] = fn()  # warm-up, and the answer to compare
                ms[mode] = time_call(fn, args.repeat)
            agree = len(res) < 2 or _same(res["numba"], res["numpy"])
            nb, npy = ms.get("numba"), ms["numpy"]
            rows.append({"kernel": name, "numba_ms": "" if nb is None else f"{nb:.3f}",
                         "numpy_ms": f"{npy:.3f}",
                         "speedup": "" if nb is None else f"{npy / nb:.1f}", "agree": agree})
    finally:
        _accel.USE_NUMBA = old
    w = max(len(r["kernel"]) for r in rows)
    print(f"{'kernel':{w}}  {'numba ms':>10}  {'numpy ms':>10}  {'speedup':>8}  agree")
    for r in rows:
        print(f"{r['kernel']:{w}}  {r['numba_ms']:>10}  {r['numpy_ms']:>10}  {r['speedup']:>8}  {r['agree']}")
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            out = csv.DictWriter(fh, fieldnames=list(rows[0]))
            out.writeheader()
            out.writerows(rows)
    return 0 if all(r["agree"] for r in rows) else 1


if __name__ == "__main__":
    sys.exit(main())
