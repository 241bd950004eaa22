"""Time the hot kernels and a short pipeline run with numba on and off.

Each mode runs in a fresh interpreter because the JIT switch is read at import.

    python3 benchmarks/bench_kernels.py            # both modes, side by side
    python3 benchmarks/bench_kernels.py --child    # one mode, JSON to stdout
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _best_of(fn, repeat=5, number=1):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn()
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def child(n_stream):
    from msana import kernels, using_jit
    from msana.drift import ADWIN
    from msana.runner import run_experiment
    from msana.config import from_dict

    rng = np.random.default_rng(0)
    out = {"jit": using_jit()}

    bits = (rng.random(20000) < 0.1).astype(float)

    def adwin_run():
        a = ADWIN()
        for b in bits:
            a.update(b)

    adwin_run()  # compile
    out["adwin_update_us"] = _best_of(adwin_run, 3) / len(bits) * 1e6

    X = rng.random((500, 20))
    q = rng.random(20)
    kernels.knn_query(X, 500, q, 5)
    out["knn_query_us"] = _best_of(lambda: kernels.knn_query(X, 500, q, 5), 5, 2000) * 1e6

    c, d = 2, 20
    weight = rng.random(c) * 100 + 1
    mean = rng.random((c, d))
    m2 = rng.random((c, d)) * 10
    lo, hi = np.zeros(d), np.ones(d)
    feats = np.arange(d, dtype=np.int64)
    kernels.best_splits(weight, mean, m2, lo, hi, feats, 10)
    out["best_splits_us"] = _best_of(
        lambda: kernels.best_splits(weight, mean, m2, lo, hi, feats, 10), 5, 500) * 1e6
    x = rng.random(d)
    kernels.gaussian_update(weight, mean, m2, lo, hi, x, 1, 1.0)
    out["gaussian_update_us"] = _best_of(
        lambda: kernels.gaussian_update(weight, mean, m2, lo, hi, x, 1, 1.0), 5, 5000) * 1e6

    cfg = from_dict({"stream": {"n_pre": n_stream // 2, "n_post": n_stream // 2}})
    t0 = time.perf_counter()
    res, _ = run_experiment(cfg, "msana")
    out["pipeline_s"] = time.perf_counter() - t0
    out["pipeline_mean_latency_ms"] = res["timing"]["mean_latency_ms"]
    out["pipeline_accuracy"] = res["metrics"]["accuracy"]
    json.dump(out, sys.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--child", action="store_true")
    ap.add_argument("--n", type=int, default=4000, help="pipeline stream length")
    args = ap.parse_args()
    if args.child:
        child(args.n)
        return
    rows = {}
    for label, flag in (("numba", "0"), ("numpy", "1")):
        env = dict(os.environ, MSANA_DISABLE_JIT=flag)
        proc = subprocess.run([sys.executable, __file__, "--child", "--n", str(args.n)],
                              env=env, capture_output=True, text=True, check=True)
        rows[label] = json.loads(proc.stdout.strip().splitlines()[-1])
    keys = [k for k in rows["numba"] if k != "jit"]
    print(f"{'metric':28s} {'numba':>12s} {'numpy':>12s} {'speedup':>8s}")
    for k in keys:
        a, b = rows["numba"][k], rows["numpy"][k]
        ratio = f"{b / a:8.2f}" if k != "pipeline_accuracy" and a > 0 else "        "
        print(f"{k:28s} {a:12.4f} {b:12.4f} {ratio}")


if __name__ == "__main__":
    main()
