"""Turning point, hyperbolic-region exponents and the edge band.

For ``x`` just below the edge ``x = 2`` the recursion is hyperbolic for
``n <= N(x)`` and oscillatory beyond.  This module computes ``N(x)``, the
local growth exponents ``gamma_n(x) = arccosh((x - b_n)/(2 a_n))``, their
sum ``g(x)`` and the band half-width ``h(x)`` that controls ``log f``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DomainError, NoTurningPointError, UnsupportedModelError


def stable_arccosh1p(w):
    """``arccosh(1 + w)`` for ``w >= 0`` without cancellation near 0."""
    if w < 0:
        raise DomainError(f"arccosh argument 1 + {w} is below 1")
    return math.log1p(w + math.sqrt(w * (w + 2.0)))


def gamma_from_coeffs(a, b, x):
    """``arccosh((x - b)/(2a))`` for a single pair of coefficients."""
    return stable_arccosh1p((x - b - 2.0 * a) / (2.0 * a))


def _threshold(model, n):
    a, b = model.coeffs(n)
    return b + 2.0 * a


def turning_point(model, x):
    """Largest ``n`` with ``b_n + 2 a_n <= x``.

    Parameters
    ----------
    model : CoefficientModel
    x : float
        Energy in ``[b_N0 + 2 a_N0, 2)``.

    Raises
    ------
    UnsupportedModelError
        For eventually constant models (the set is empty or unbounded).
    NoTurningPointError
        If ``x`` is below the threshold at ``N0``.
    """
    if model.is_eventually_constant:
        raise UnsupportedModelError("eventually constant model has no turning point")
    if not x < 2.0:
        raise DomainError("turning point is infinite for x >= 2")
    n0 = model.n0
    if _threshold(model, n0) > x:
        raise NoTurningPointError(
            f"x={x} is below the threshold {_threshold(model, n0)} at N0={n0}"
        )
    lo = max(n0, model.max_override + 1)
    if _threshold(model, lo) > x:
        for n in range(lo - 1, n0 - 1, -1):
            if _threshold(model, n) <= x:
                return n
    hi = 2 * lo
    while _threshold(model, hi) <= x:
        lo, hi = hi, 2 * hi
        if hi > 1 << 62:
            raise DomainError("turning point exceeds the representable index range")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _threshold(model, mid) <= x:
            lo = mid
        else:
            hi = mid
    return lo


def oscillation_start(model, x):
    """First index past the hyperbolic region (``N(x) + 1``)."""
    if model.is_eventually_constant:
        return 1
    try:
        return turning_point(model, x) + 1
    except NoTurningPointError:
        return model.n0


def _w(model, x, n):
    a, _ = model.coeffs(n)
    ea, eb = model.defects(n)
    return (2.0 * ea + eb - (2.0 - x)) / (2.0 * a)


def gamma_n(model, x, n):
    """``gamma_n(x)`` for ``N0 <= n <= N(x)``.

    Raises
    ------
    DomainError
        If ``n`` is outside the hyperbolic region.
    """
    if n < model.n0 or _threshold(model, n) > x:
        raise DomainError(f"gamma_n(x) is undefined at n={n} for x={x}")
    return stable_arccosh1p(max(_w(model, x, n), 0.0))


def big_gamma(model, n):
    """``Gamma_n = gamma_n(2)``."""
    return stable_arccosh1p(max(_w(model, 2.0, n), 0.0))


def gamma_array(model, x, lo, hi):
    """Vectorised ``gamma_n(x)`` on ``[lo, hi]``, clamped at 0 outside the region."""
    a, _, ea, eb = model.arrays(lo, hi)
    w = np.maximum((2.0 * ea + eb - (2.0 - x)) / (2.0 * a), 0.0)
    return np.log1p(w + np.sqrt(w * (w + 2.0)))


def big_gamma_array(model, lo, hi):
    """Vectorised ``Gamma_n`` on ``[lo, hi]``."""
    return gamma_array(model, 2.0, lo, hi)


def kappa_n(model, x, n):
    """``arccos((x - b_n)/(2 a_n))`` for an index in the oscillatory region."""
    a, _ = model.coeffs(n)
    ea, eb = model.defects(n)
    w = ((2.0 - x) - 2.0 * ea - eb) / (2.0 * a)
    if not 0.0 <= w <= 2.0:
        raise DomainError(f"n={n} is not in the oscillatory region for x={x}")
    return 2.0 * math.asin(math.sqrt(w / 2.0))


def kappa_array(model, x, lo, hi):
    a, _, ea, eb = model.arrays(lo, hi)
    w = ((2.0 - x) - 2.0 * ea - eb) / (2.0 * a)
    if np.any((w < 0) | (w > 2)):
        raise DomainError("index range leaves the oscillatory region")
    return 2.0 * np.arcsin(np.sqrt(w / 2.0))


@dataclass
class EdgeData:
    """Hyperbolic-region summary at one energy.

    Attributes
    ----------
    x, delta : float
        Energy and its distance ``2 - x`` to the edge.
    N : int
        Turning point ``N(x)``.
    g : float
        ``sum_{n=N0}^{N} gamma_n(x)`` (compensated).
    h : float
        ``log(N / ((a_{N+2} - a_{N+1}) + (b_{N+2} - b_{N+1})) * delta**0.5)``.
    kappa_next : float
        ``kappa_{N+2}(x)``.
    kappa_inf : float
        ``arccos(x/2)``, the limiting phase of the free recursion.
    gammas : ndarray or None
        Individual ``gamma_n`` when requested.
    """

    x: float
    delta: float
    N: int
    g: float
    h: float
    kappa_next: float
    kappa_inf: float
    gammas: np.ndarray | None = None


def edge_data(model, x, keep_gammas=False):
    """Compute :class:`EdgeData` for ``x`` in the hyperbolic range."""
    N = turning_point(model, x)
    delta = 2.0 - x
    g = kernels.gamma_sum(model.packed, delta, model.n0, N)
    inc = model.increment(N + 1)
    if not inc > 0:
        raise DomainError(f"coefficient increment at n={N + 1} is not positive")
    h = math.log(N) - math.log(inc) + 0.5 * math.log(delta)
    kap = kappa_n(model, x, N + 2)
    gam = gamma_array(model, x, model.n0, N) if keep_gammas else None
    return EdgeData(x=x, delta=delta, N=N, g=g, h=h, kappa_next=kap, kappa_inf=math.acos(x / 2.0), gammas=gam)


def band_prediction(model, x):
    """Centre ``-2g`` and half-width ``2h`` of the band for ``log f(x)``."""
    ed = edge_data(model, x)
    return -2.0 * ed.g, 2.0 * ed.h


def _q_one(t):
    # 1/(sin t cos t) - 1/t = (u - sin u)/(t sin u), u = 2t
    u = 2.0 * t
    if u < 0.5:
        u2 = u * u
        num = u * u2 * (1 / 6 - u2 * (1 / 120 - u2 * (1 / 5040 - u2 * (1 / 362880 - u2 / 39916800))))
    else:
        num = u - math.sin(u)
    return num / (t * math.sin(u))


def q_sup(y, samples=10_000):
    """``sup_{0 < t <= y} (1/(sin t cos t) - 1/t)`` for ``0 < y < pi/2``.

    Dense sampling followed by golden-section refinement around the best
    sample.
    """
    if not 0 < y < math.pi / 2:
        raise DomainError("q_sup needs 0 < y < pi/2")
    ts = [y * (k + 1) / samples for k in range(samples)]
    vals = [_q_one(t) for t in ts]
    k = max(range(samples), key=vals.__getitem__)
    best = vals[k]
    if k == samples - 1:
        return best
    lo, hi = ts[max(k - 1, 0)], ts[k + 1]
    phi = (math.sqrt(5.0) - 1.0) / 2.0
    c, d = hi - phi * (hi - lo), lo + phi * (hi - lo)
    fc, fd = _q_one(c), _q_one(d)
    for _ in range(80):
        if fc > fd:
            hi, d, fd = d, c, fc
            c = hi - phi * (hi - lo)
            fc = _q_one(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + phi * (hi - lo)
            fd = _q_one(d)
    return max(best, fc, fd)


def write_edge_csv(model, xs, path):
    """Write ``x, N, g, h, kappa_next`` rows for each energy in ``xs``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "N", "g", "h", "kappa_next"])
        for x in xs:
            ed = edge_data(model, x)
            w.writerow([repr(x), ed.N, repr(ed.g), repr(ed.h), repr(ed.kappa_next)])
