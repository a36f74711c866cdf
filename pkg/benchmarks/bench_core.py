"""Compiled core versus the numpy fallback on norm-table sized inputs.

    python3 benchmarks/bench_core.py [--degree 400] [--nodes 240] [--points 48] [--repeat 3]

Prints one row per kernel with the best-of-``repeat`` wall time of each
backend, the speedup, and the largest absolute difference of the outputs.
"""

import argparse
import time

import numpy as np

from crlab.kernels import ReinhardtProfile, _pycore
from crlab.kernels.norms import RayQuadrature

try:
    from crlab.kernels import _core
except ImportError:  # pragma: no cover
    _core = None


def best_of(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--degree", type=int, default=400)
    ap.add_argument("--nodes", type=int, default=240)
    ap.add_argument("--points", type=int, default=48)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _core is None:
        raise SystemExit("compiled core not built; run `pip install -e . --no-build-isolation` first")

    rays = RayQuadrature(ReinhardtProfile.ball(), args.nodes)
    K = args.degree
    C = np.ascontiguousarray(rays.log_domain_weights(K))
    lognorms = _core.log_moments(rays.lu, rays.lv, C)
    rng = np.random.default_rng(0)
    s = rng.uniform(0.05, 0.95, args.points)
    u = rng.uniform(0, 1, args.points)
    lr1, lr2 = np.log(s * u), np.log(s * (1 - u))

    cases = [
        ("log_moments", lambda m: m.log_moments(rays.lu, rays.lv, C)),
        ("diagonal_log_sums", lambda m: m.diagonal_log_sums(lr1, lr2, lognorms, K)),
    ]
    print(f"degree {K}, nodes {args.nodes}, points {args.points}, best of {args.repeat}")
    print(f"{'kernel':<20}{'cython s':>12}{'numpy s':>12}{'speedup':>10}{'max |diff|':>14}")
    for name, fn in cases:
        tc, oc = best_of(lambda: fn(_core), args.repeat)
        tp, op = best_of(lambda: fn(_pycore), args.repeat)
        finite = np.isfinite(oc) & np.isfinite(op)
        diff = float(np.max(np.abs(oc[finite] - op[finite]))) if finite.any() else 0.0
        print(f"{name:<20}{tc:>12.4f}{tp:>12.4f}{tp / tc:>10.1f}{diff:>14.2e}")


if __name__ == "__main__":
    main()
