"""Compare the compiled and pure-Python recursion kernels.

Usage::

    python benchmarks/bench_kernels.py [--steps 200000] [--repeat 3]

Each kernel runs on the same model and inputs under both backends; the
table reports the best wall time, the speed-up and the largest relative
difference of the results.
"""

import argparse
import math
import time

from jacedge._backend import get_backend
from jacedge.coefficients import power_law_model


def _best(fn, repeat):
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _rel(a, b):
    a, b = float(a), float(b)
    return abs(a - b) / max(abs(a), abs(b), 1e-300)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    n = args.steps
    model = power_law_model(a=[(0.25, 0.5)], b=[(0.1, 1.5)])
    pm = model.packed
    x = 1.99

    cases = {
        "forward": (lambda k: k.forward(pm, x, 1, 0.0, 1.0, 0, n, False), lambda r: r[1] * 2.0 ** r[2]),
        "m_downward": (lambda k: k.m_downward(pm, x, 0.0, n, -0.5, 0.8), lambda r: math.log(r[1]) + r[2]),
        "gamma_sum": (lambda k: k.gamma_sum(pm, 2.0 - x, 1, n), lambda r: r),
        "backward": (lambda k: k.backward(pm, 2.0, n, 1.0, 0.99, 0, 1, 10), lambda r: math.log(abs(r[0][0])) + int(r[1][0]) * math.log(2.0)),
    }
    compiled, python = get_backend("compiled"), get_backend("python")
    print(f"{'kernel':<12}{'compiled [s]':>14}{'python [s]':>12}{'speed-up':>10}{'rel diff':>11}")
    for name, (call, key) in cases.items():
        tc, rc = _best(lambda: call(compiled), args.repeat)
        tp, rp = _best(lambda: call(python), args.repeat)
        print(f"{name:<12}{tc:>14.4f}{tp:>12.4f}{tp / tc:>10.1f}{_rel(key(rc), key(rp)):>11.1e}")


if __name__ == "__main__":
    main()
