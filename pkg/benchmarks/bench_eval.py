"""Benchmark: compiled evaluation kernel vs the pure-Python fallback.

Three representative workloads drive the float64 tape interpreter, which is
the hot loop behind identity testing, pointwise classification, Einstein
residuals, and trajectory integration:

  * polynomial  -- a dense degree-12 polynomial evaluated on a point batch
  * chain-rhs   -- the flat chain pair right-hand side (integration kernel)
  * ricci-load  -- second derivatives of a coframe metric component

Run:  python benchmarks/bench_eval.py [--points 200000]
"""

import argparse
import time

import numpy as np

from pathgeom.constructions import catalog
from pathgeom.expr import (BACKEND, compile_tape, differentiate, node_count,
                           variables)
from pathgeom.expr.tape import _eval_f64_py


def _workloads():
    x, y = variables("x y")
    poly = ((x + y + 1) ** 6) * ((x - y + 2) ** 6) + (x * y + 3) ** 4

    flat = catalog("flat_chain_pair")
    chain_rhs = flat.rhs2

    cm = catalog("fubini_study_coframe")
    g = cm.metric_components()
    chart = cm.chart
    ricci_load = differentiate(differentiate(g[0][1], chart[0]), chart[2])

    return [
        ("polynomial", poly, ("x", "y"), (0.5, 2.0)),
        ("chain-rhs", chain_rhs, flat.chart, (1.0, 3.0)),
        ("ricci-load", ricci_load, chart, (2.0, 4.0)),
    ]


def _bench(tape, points, compiled: bool):
    if compiled:
        start = time.perf_counter()
        out = tape.eval_f64_many(points)
        return time.perf_counter() - start, out
    start = time.perf_counter()
    out = np.array([_eval_f64_py(tape, row) for row in points])
    return time.perf_counter() - start, out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=200_000)
    args = ap.parse_args()

    print(f"active backend: {BACKEND}")
    if BACKEND != "compiled":
        print("compiled kernel unavailable; timing the fallback against itself")
    rng = np.random.default_rng(0)
    header = f"{'workload':<12} {'nodes':>6} {'points':>8} " \
             f"{'compiled':>10} {'python':>10} {'speedup':>8}"
    print(header)
    print("-" * len(header))
    for name, expr, chart, (lo, hi) in _workloads():
        tape = compile_tape(expr, chart)
        pts = rng.uniform(lo, hi, size=(args.points, len(chart)))
        # keep pure-Python runtime reasonable
        py_pts = pts[: max(1000, args.points // 100)]
        t_comp, a = _bench(tape, pts, compiled=True)
        t_py_part, b = _bench(tape, py_pts, compiled=False)
        t_py = t_py_part * (len(pts) / len(py_pts))
        assert np.allclose(a[: len(py_pts)], b, rtol=0, atol=0), \
            "backends disagree"
        rate = args.points / t_comp
        print(f"{name:<12} {node_count(expr):>6} {args.points:>8} "
              f"{t_comp:>9.3f}s {t_py:>9.3f}s {t_py / t_comp:>7.1f}x"
              f"   ({rate / 1e6:.1f}M evals/s)")


if __name__ == "__main__":
    main()
