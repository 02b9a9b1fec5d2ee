"""Compare the jitted and pure-numpy dual-solver paths.

Run:  python3 benchmarks/bench_smo.py
Set PSC_DISABLE_NUMBA=1 to confirm the fallback selection at the API level.
"""

import time

import numpy as np

from psc import _accel
from psc.classifier import Hyperparams, fit_psc
from psc.dataset import class_stats, simulate_hdlss
from psc.qp import BoxQP, _smo_loop_jit, _smo_numpy
from psc.scatter import build_factor
from psc.smw import build_operator, gram, lambda_cap


def make_problem(n_pos, n_neg, d, seed):
    data = simulate_hdlss(d, n_pos, n_neg, seed=seed)
    stats = class_stats(data)
    factor = build_factor(data, stats)
    op = build_operator(factor, 0.5 * lambda_cap(factor))
    g = gram(op, data)
    y = data.labels.astype(float)
    caps = np.where(y > 0, 1.0, stats.n1 / stats.n2)
    return data, BoxQP(g, y, caps)


def best_of(fn, repeats=7):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    print(f"numba available: {_accel.HAVE_NUMBA}; "
          f"jit enabled now: {_accel.jit_enabled()}")
    configs = [(50, 10, 200), (100, 10, 800), (400, 40, 2000)]
    print(f"{'n':>5} {'d':>6} {'jit (ms)':>10} {'numpy (ms)':>11} {'speedup':>8}")
    for n_pos, n_neg, d in configs:
        data, p = make_problem(n_pos, n_neg, d, seed=d)
        args = (p.G, p.y, p.upper, 1e-6, 10_000_000)
        a_jit = _smo_loop_jit(*args)[0] if _accel.HAVE_NUMBA else None
        a_np = _smo_numpy(*args)[0]
        if a_jit is not None:
            assert np.array_equal(a_jit, a_np), "paths diverged"
        t_np = best_of(lambda: _smo_numpy(*args))
        if _accel.HAVE_NUMBA:
            t_jit = best_of(lambda: _smo_loop_jit(*args))
            print(f"{data.n:>5} {d:>6} {t_jit * 1e3:>10.3f} {t_np * 1e3:>11.3f} "
                  f"{t_np / t_jit:>7.1f}x")
        else:
            print(f"{data.n:>5} {d:>6} {'n/a':>10} {t_np * 1e3:>11.3f} {'':>8}")

    data = simulate_hdlss(800, 100, 10, seed=0)
    hp = Hyperparams(gamma=0.5, c0=1.0)
    fit_psc(data, hp)  # warm-up / compile
    t_fit = best_of(lambda: fit_psc(data, hp))
    print(f"\nfull fit at n=110, d=800: {t_fit * 1e3:.1f} ms")


if __name__ == "__main__":
    main()
