"""Compare the compiled kernels with the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--site connections] [--degree 3]

Times the batched composition, pushforward and associativity sweeps on the
full hom tables of a cube category and checks both backends agree.
"""

import argparse
import time

import numpy as np

from cubecat import _pure
from cubecat.cube import CubeCategory
from cubecat.site import get_site

try:
    from cubecat import _kernels
except ImportError:
    _kernels = None


def _time(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def workloads(cat, D):
    keys = {(a, b): np.asarray(cat.keys(a, b), dtype=np.uint64) for a in range(D + 1) for b in range(D + 1)}
    comp = {(a, b, c): cat.comp(a, b, c) for a in range(D + 1) for b in range(D + 1) for c in range(D + 1)}

    def compose_all(k):
        return lambda: [k.compose_all(keys[(b, c)], keys[(a, b)]) for a in range(D + 1) for b in range(D + 1) for c in range(D + 1)]

    def push_all(k):
        return lambda: [k.push_all(keys[(a, b)], a) for a in range(D + 1) for b in range(D + 1)]

    def assoc(k):
        def run():
            out = []
            for a in range(D + 1):
                for b in range(D + 1):
                    for c in range(D + 1):
                        for d in range(D + 1):
                            out.append(k.assoc_failures(comp[(a, b, c)], comp[(b, c, d)], comp[(a, c, d)], comp[(a, b, d)])[:2])
            return out

        return run

    def uf(k):
        rng = np.random.default_rng(0)
        n = 200_000
        a = rng.integers(0, n, n, dtype=np.int64)
        b = rng.integers(0, n, n, dtype=np.int64)
        return lambda: k.uf_labels(n, a, b)

    return {"compose_all": compose_all, "push_all": push_all, "assoc_failures": assoc, "uf_labels": uf}


def _same(x, y):
    if isinstance(x, list):
        return len(x) == len(y) and all(_same(a, b) for a, b in zip(x, y))
    return np.array_equal(np.asarray(x), np.asarray(y))


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--site", default="connections")
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    site = get_site(args.site)
    cat = CubeCategory(site)
    print(f"site {site.name}, degree <= {args.degree}")
    if _kernels is None:
        print("compiled kernels not built; only the fallback is available")
    print(f"{'kernel':<16}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for name, make in workloads(cat, args.degree).items():
        tp, rp = _time(make(_pure), args.repeat)
        if _kernels is None:
            print(f"{name:<16}{tp:>12.4f}{'-':>12}{'-':>10}")
            continue
        tc, rc = _time(make(_kernels), args.repeat)
        assert _same(rp, rc), f"backends disagree on {name}"
        print(f"{name:<16}{tp:>12.4f}{tc:>12.4f}{tp / tc:>10.1f}x")


if __name__ == "__main__":
    main()
