"""Scaled three-term recursions and the subordinate solution at the edge.

Solutions of ``a_{n-1} u_{n-1} + b_n u_n + a_n u_{n+1} = x u_n`` are
carried as a pair of mantissas with a shared binary exponent, so that
growth or decay by thousands of orders of magnitude stays representable.
The convention ``a_0 = 1`` is used; it only ever multiplies ``u_0``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .coefficients import monotonicity_certificate
from .edge import big_gamma, big_gamma_array, gamma_array, kappa_array, oscillation_start, turning_point
from .errors import DegenerateSolutionError, NumericResolutionError, PreconditionError

LN2 = math.log(2.0)
_MAX_BACKWARD = 1 << 26


@dataclass(frozen=True)
class ScaledSolution:
    """State ``(u_{n-1}, u_n) = (u_prev, u_curr) * exp(log_scale)`` at ``n = index``."""

    u_curr: float
    u_prev: float
    log_scale: float
    index: int

    def kernel_state(self):
        """Split into mantissas and an integer binary exponent."""
        e2 = round(self.log_scale / LN2)
        r = self.log_scale - e2 * LN2
        f = math.exp(r) if r else 1.0
        return self.u_prev * f, self.u_curr * f, int(e2)

    @classmethod
    def from_kernel(cls, m_prev, m_curr, e2, index):
        return cls(u_curr=float(m_curr), u_prev=float(m_prev), log_scale=float(e2) * LN2, index=int(index))

    def log_abs(self):
        """``log |u_n|`` (``-inf`` when ``u_n = 0``)."""
        if self.u_curr == 0:
            return -math.inf
        return math.log(abs(self.u_curr)) + self.log_scale


@dataclass
class Trajectory:
    """Stored states ``(u_{n-1}, u_n) = (m_prev, m_curr) * 2**e2`` for each ``n`` in ``index``."""

    index: np.ndarray
    m_prev: np.ndarray
    m_curr: np.ndarray
    e2: np.ndarray

    @property
    def log_scale(self):
        return self.e2 * LN2

    def log_abs(self):
        """``log |u_n|`` for every stored index."""
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.m_curr)) + self.log_scale

    def state(self, i):
        return ScaledSolution.from_kernel(self.m_prev[i], self.m_curr[i], self.e2[i], self.index[i])

    def to_csv(self, path):
        """Write ``n, mantissa, log_scale`` rows."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "mantissa", "log_scale"])
            for n, m, ls in zip(self.index, self.m_curr, self.log_scale):
                w.writerow([int(n), repr(float(m)), repr(float(ls))])


@dataclass(frozen=True)
class SignedLog:
    """Real number ``sign * exp(log_abs)``."""

    sign: float
    log_abs: float

    @property
    def value(self):
        if self.sign == 0:
            return 0.0
        if self.log_abs > 709:
            return self.sign * math.inf
        return self.sign * math.exp(self.log_abs)


def step(sol, model, x):
    """One forward step of the recursion with renormalisation."""
    n = sol.index
    a, b = model.coeffs(n)
    a_prev = model.coeffs(n - 1)[0] if n >= 2 else 1.0
    nxt = ((x - b) * sol.u_curr - a_prev * sol.u_prev) / a
    p, c = sol.u_curr, nxt
    big = max(abs(p), abs(c))
    if big == 0:
        raise DegenerateSolutionError("both entries of the solution vanish")
    ls = sol.log_scale
    if big > 2.0 or big < 0.5:
        _, ex = math.frexp(big)
        p, c = math.ldexp(p, -ex), math.ldexp(c, -ex)
        ls += ex * LN2
    return ScaledSolution(u_curr=c, u_prev=p, log_scale=ls, index=n + 1)


def solve(model, x, start, n_end, materialize=False):
    """Advance a :class:`ScaledSolution` to ``n_end``.

    Returns the final state, or a :class:`Trajectory` covering
    ``start.index .. n_end`` when ``materialize`` is set.
    """
    mp, mc, e2 = start.kernel_state()
    try:
        out = kernels.forward(model.packed, float(x), int(start.index), mp, mc, e2, int(n_end), bool(materialize))
    except ArithmeticError as exc:
        raise DegenerateSolutionError(str(exc)) from exc
    if materialize:
        _, _, _, sp, sc, se = out
        return Trajectory(np.arange(start.index, n_end + 1), sp, sc, se)
    return ScaledSolution.from_kernel(out[0], out[1], out[2], n_end)


def dirichlet(model, x, n_max, materialize=False):
    """Solution with ``u_0 = 0, u_1 = 1``, i.e. ``u_n = p_{n-1}(x)``.

    The returned state (or trajectory) ends at index ``n_max``.
    """
    start = ScaledSolution(u_curr=1.0, u_prev=0.0, log_scale=0.0, index=1)
    return solve(model, x, start, n_max, materialize)


def transfer_matrix(model, x, n):
    """``A_n`` with ``(u_{n+1}, a_n u_n) = A_n (u_n, a_{n-1} u_{n-1})``."""
    a, b = model.coeffs(n)
    return np.array([[(x - b) / a, -1.0 / a], [a, 0.0]])


def wronskian(u, v, model):
    """``a_{n-1} (u_n v_{n-1} - u_{n-1} v_n)`` for two states at the same index.

    Returned as a :class:`SignedLog` so that widely separated scales do not
    overflow.
    """
    if u.index != v.index:
        raise ValueError("solutions must be at the same index")
    n = u.index
    a_prev = model.coeffs(n - 1)[0] if n >= 2 else 1.0
    core = u.u_curr * v.u_prev - u.u_prev * v.u_curr
    if core == 0:
        return SignedLog(0.0, -math.inf)
    return SignedLog(math.copysign(1.0, core), math.log(abs(core) * a_prev) + u.log_scale + v.log_scale)


def wronskian_trace(tu, tv, model):
    """Vectorised Wronskian along two trajectories with equal indices.

    Returns ``(sign, log_abs)`` arrays.
    """
    lo, hi = int(tu.index[0]), int(tu.index[-1])
    a_prev = model.arrays(max(lo - 1, 0), hi - 1)[0]
    if lo - 1 < 1:
        a_prev = a_prev.copy()
        a_prev[0] = 1.0
    core = tu.m_curr * tv.m_prev - tu.m_prev * tv.m_curr
    with np.errstate(divide="ignore"):
        la = np.log(np.abs(core) * a_prev) + (tu.e2 + tv.e2) * LN2
    return np.sign(core), la


def wronskian_drift(model, x, u0, v0, n_max):
    """Largest ``|W_n / W_start - 1|`` over ``start <= n <= n_max``.

    Each rounding error perturbs ``W`` by about ``eps |u| |v|``, so the
    attainable drift grows like ``eps exp(2 g(x))`` once both solutions
    pass through a long hyperbolic region.
    """
    tu = solve(model, x, u0, n_max, materialize=True)
    tv = solve(model, x, v0, n_max, materialize=True)
    s, la = wronskian_trace(tu, tv, model)
    if s[0] == 0:
        raise DegenerateSolutionError("solutions are linearly dependent")
    with np.errstate(over="ignore"):
        rel = s * s[0] * np.exp(la - la[0]) - 1.0
    return float(np.max(np.abs(rel)))


# -- subordinate solution at x = 2 -----------------------------------------


@dataclass
class SubordinateCertificate:
    """Decaying solution ``v`` at ``x = 2`` and its two-sided bound.

    Attributes
    ----------
    n : ndarray
        Indices ``N0 .. horizon``.
    log_v, v : ndarray
        ``log v_n`` and ``v_n`` normalised by ``v_{N0} = 1`` (``v`` may
        underflow to zero; ``log_v`` does not).
    gamma_caps : ndarray
        ``Gamma_n`` on the same indices.
    c_lower, c_upper : float
        The constants ``C1`` and ``C2`` of the bound
        ``C1/n exp(-sum Gamma) <= v_n <= C2 n exp(-sum Gamma)``.
    holds : bool
        Whether the bound holds at every index.
    wronskian : float
        ``W = a_{N0-1} v_{N0-1}`` against the solution started at ``N0``.
    backward_M : int
        Start index of the converged backward run.
    slope : float
        ``v_{N0+1} / v_{N0}`` from the backward run.
    bisection_slope : float
        Midpoint of the final bisection bracket for the same quantity.
    agreement : float
        Largest relative gap between the two routes on ``window``.
    window : tuple of int or None
        Indices where the bisection bracket resolves ``v``; ``None`` (with
        ``agreement`` nan) when it resolves fewer than three indices.
    """

    n: np.ndarray
    log_v: np.ndarray
    v: np.ndarray
    gamma_caps: np.ndarray
    c_lower: float
    c_upper: float
    holds: bool
    wronskian: float
    backward_M: int
    slope: float
    bisection_slope: float
    agreement: float
    window: tuple
    lower_ok: bool = True
    upper_ok: bool = True
    monotone_ok: bool = True
    details: dict = field(default_factory=dict)


def _backward_logv(model, M, n_lo, n_hi, start):
    pm = model.packed
    if start == "decaying":
        nxt = math.exp(-big_gamma(model, M))
    elif start == "zero":
        nxt = 0.0
    else:
        raise ValueError(f"unknown backward start {start!r}")
    sm, se = kernels.backward(pm, 2.0, int(M), 1.0, nxt, 0, int(n_lo), int(n_hi))
    if np.any(sm <= 0):
        raise NumericResolutionError("backward solution is not positive on the window")
    return np.log(sm) + se * LN2


def decaying_solution(model, horizon, tol=1e-10, start="decaying", m_cap=_MAX_BACKWARD):
    """Backward recursion for ``v`` at ``x = 2`` on ``[N0 - 1, horizon + 1]``.

    The start index ``M`` is doubled until ``log v`` changes by at most
    ``tol`` on the whole window.  Returns ``(log_v, M)`` with ``log_v``
    normalised so that ``v_{N0} = 1``.
    """
    n0 = model.n0
    lo, hi = n0 - 1, horizon + 1
    M = 4 * hi
    prev = None
    while True:
        lv = _backward_logv(model, M, lo, hi, start)
        lv = lv - lv[1]
        if prev is not None and np.max(np.abs(lv - prev)) <= tol:
            return lv, M
        prev = lv
        M *= 2
        if M > m_cap:
            raise NumericResolutionError(
                f"backward recursion did not stabilise to {tol} before M={m_cap}"
            )


def _bisect_slope(model, horizon, extend=8):
    """Bracket ``v_{N0+1}/v_{N0}``; returns ``(lo, hi, decided)``.

    A slope whose forward run neither turns negative nor starts growing
    before the horizon is retried with a longer run; if it stays
    undecided the bracket is returned as it stands.
    """
    pm = model.packed
    n0 = model.n0
    lo, hi = 0.0, 1.0
    for _ in range(2000):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return lo, hi, True
        cls, _ = kernels.shoot_classify(pm, 2.0, n0, mid, horizon + 1)
        if cls == 0:
            cls, _ = kernels.shoot_classify(pm, 2.0, n0, mid, extend * (horizon + 1))
            if cls == 0:
                return lo, hi, False
        if cls < 0:
            lo = mid
        else:
            hi = mid
    return lo, hi, True


def subordinate_at_edge(model, horizon=10**5, tol=1e-10, start="decaying", window_tol=1e-9):
    """Construct and certify the decaying solution at ``x = 2``.

    Two routes are used: backward recursion from a large index, and
    bisection on the slope ``v_{N0+1}/v_{N0}`` keeping the forward
    solution positive and non-increasing.  The bisection bracket only
    resolves ``v`` on a short window next to ``N0``; the routes are
    compared there.

    Raises
    ------
    PreconditionError
        If ``a_n <= 1``, ``b_n <= 0`` or monotonicity is violated on ``[N0, horizon]``.
    NumericResolutionError
        If either route fails to resolve.
    """
    n0 = model.n0
    mono = monotonicity_certificate(model, horizon + 1)
    if not mono.ok:
        raise PreconditionError(f"{mono.condition} fails at n={mono.first_violation}")

    lv_full, M = decaying_solution(model, horizon, tol=tol, start=start)
    n = np.arange(n0, horizon + 1)
    lv = lv_full[1:-1]
    a_w = model.coeffs(n0 - 1)[0] if n0 >= 2 else 1.0
    W = a_w * math.exp(lv_full[0])

    gam = big_gamma_array(model, n0, horizon)
    sg = np.cumsum(gam)
    a_arr = model.arrays(n0 - 1, horizon)[0]
    if n0 - 1 == 0:
        a_arr = a_arr.copy()
        a_arr[0] = 1.0
    c1 = float(np.min(W / a_arr[1:] * n / (n - n0 + 2)))
    c2 = float(np.max(W * np.cumsum(1.0 / a_arr)[1:] / n))
    logn = np.log(n)
    slack = 1e-9 * (1.0 + np.abs(lv))
    lower_ok = bool(np.all(lv >= math.log(c1) - logn - sg - slack))
    upper_ok = bool(np.all(lv <= math.log(c2) + logn - sg + slack))
    monotone_ok = bool(np.all(np.diff(lv_full) <= 1e-12))

    t_lo, t_hi, decided = _bisect_slope(model, horizon)
    span = 256
    end = min(n0 + span, horizon + 1)
    pm = model.packed
    _, _, _, _, c_lo, e_lo = kernels.forward(pm, 2.0, n0 + 1, 1.0, t_lo, 0, end, True)
    _, _, _, _, c_hi, e_hi = kernels.forward(pm, 2.0, n0 + 1, 1.0, t_hi, 0, end, True)
    with np.errstate(over="ignore", invalid="ignore"):
        u_lo = np.concatenate(([1.0], c_lo * np.exp2(e_lo)))
        u_hi = np.concatenate(([1.0], c_hi * np.exp2(e_hi)))
        good = (u_lo > 0) & (u_hi - u_lo <= window_tol * u_lo)
    k = int(np.argmin(good)) if not np.all(good) else good.size
    details = {"bisection_decided": decided, "bracket": (t_lo, t_hi)}
    if k >= 3:
        mid = 0.5 * (u_lo[:k] + u_hi[:k])
        v_back = np.exp(lv[:k])
        agreement = float(np.max(np.abs(v_back - mid) / v_back))
        window = (n0, n0 + k - 1)
    else:
        # bracket too wide to resolve v (algebraic rather than exponential decay)
        agreement = math.nan
        window = None
        details["bisection"] = "unresolved"

    with np.errstate(under="ignore"):
        v = np.exp(lv)
    return SubordinateCertificate(
        n=n,
        log_v=lv,
        v=v,
        gamma_caps=gam,
        c_lower=c1,
        c_upper=c2,
        holds=lower_ok and upper_ok,
        wronskian=W,
        backward_M=int(M),
        slope=float(math.exp(lv[1] - lv[0])),
        bisection_slope=0.5 * (t_lo + t_hi),
        agreement=agreement,
        window=window,
        lower_ok=lower_ok,
        upper_ok=upper_ok,
        monotone_ok=monotone_ok,
        details=details,
    )


@dataclass
class SubordinacyCheck:
    """Outcome of the test that ``p_{n-1}(2)`` is not subordinate.

    ``status`` is ``"not-subordinate"``, ``"subordinate"`` or
    ``"inconclusive"``; ``not_subordinate`` is the matching boolean, or
    ``None`` when inconclusive.
    """

    status: str
    not_subordinate: bool | None
    n: np.ndarray
    log_ratio: np.ndarray
    slope: float
    reason: str


def dirichlet_subordinacy_check(model, horizon=10**5, tol_sub=1e-6):
    """Check numerically that ``p_{n-1}(2)/n`` does not tend to zero.

    Any solution of the edge recursion other than a multiple of the
    decaying one grows at least linearly.  On the last decade of indices
    the Dirichlet solution is classified by the minimum of ``p/n`` and the
    log-log slope of ``|p|``.
    """
    lo = max(2, horizon // 10)
    state = dirichlet(model, 2.0, lo)
    tr = solve(model, 2.0, state, horizon, materialize=True)
    n = tr.index.astype(np.float64)
    signs = np.sign(tr.m_curr)
    lr = tr.log_abs() - np.log(n)
    slope = float(np.polyfit(np.log(n), tr.log_abs(), 1)[0])
    if np.any(signs != signs[0]) or signs[0] == 0:
        return SubordinacyCheck("inconclusive", None, tr.index, lr, slope, "sign change on the last decade")
    if np.min(lr) <= math.log(tol_sub):
        return SubordinacyCheck("subordinate", False, tr.index, lr, slope, f"p/n falls below {tol_sub}")
    if slope >= 0.9:
        return SubordinacyCheck("not-subordinate", True, tr.index, lr, slope, "p grows at least linearly")
    if slope <= 0.1:
        return SubordinacyCheck("subordinate", False, tr.index, lr, slope, "p stays bounded")
    return SubordinacyCheck("inconclusive", None, tr.index, lr, slope, "growth rate between bounded and linear")


# -- diagnostics in the two regions ----------------------------------------


@dataclass
class PhiDiagnostics:
    """Normalised hyperbolic-region solution ``Phi_n`` and ``phi_n``.

    ``Phi`` covers ``N0 .. N + 1`` and ``phi`` covers ``N0 .. N``.
    """

    N: int
    n0: int
    Phi: np.ndarray
    phi: np.ndarray
    checks: dict

    @property
    def ok(self):
        return all(self.checks.values())


def phi_diagnostics(model, x, slack=1e-12):
    """Run the ``Phi`` recursion across the hyperbolic region and check its bounds."""
    N = turning_point(model, x)
    n0 = model.n0
    gam = gamma_array(model, x, n0, N)
    a = model.arrays(max(n0 - 1, 0), N)[0]
    if n0 - 1 == 0:
        a = a.copy()
        a[0] = 1.0
    ratio = np.ascontiguousarray(a[:-1] / a[1:])
    Phi, phi = kernels.phi_recursion(np.ascontiguousarray(gam), ratio)
    idx = np.arange(n0, N + 2)
    checks = {
        "Phi_nondecreasing": bool(np.all(np.diff(Phi) >= -slack * Phi[:-1])),
        "phi_le_1": bool(np.all(phi <= 1 + slack)),
        "phi_nonincreasing": bool(np.all(np.diff(phi) <= slack)),
        "Phi_step_le_1": bool(np.all(np.diff(Phi) <= 1 + slack * Phi[1:])),
        "Phi_ge_1": bool(np.all(Phi >= 1 - slack)),
        "Phi_le_count": bool(np.all(Phi <= (idx - n0 + 1) * (1 + slack))),
    }
    return PhiDiagnostics(N=N, n0=n0, Phi=Phi, phi=phi, checks=checks)


@dataclass
class OscillatoryDiagnostics:
    """Quantities ``Y_n = u_{n+1} - exp(-i kappa_n) u_n`` past the turning point."""

    n: np.ndarray
    kappa: np.ndarray
    log_abs_Y: np.ndarray
    sandwich_ok: bool
    amplitude_ok: bool
    ratio_ok: bool

    @property
    def ok(self):
        return self.sandwich_ok and self.amplitude_ok and self.ratio_ok


def oscillatory_diagnostics(model, x, traj, slack=1e-12):
    """Check the amplitude bounds along a stored trajectory.

    Uses indices ``n > N(x)`` with ``n + 1`` inside ``traj``.
    """
    start = max(oscillation_start(model, x), int(traj.index[0]))
    last = int(traj.index[-1]) - 1
    if last < start:
        raise ValueError("trajectory does not reach the oscillatory region")
    i0 = start + 1 - int(traj.index[0])
    p = traj.m_prev[i0:]
    c = traj.m_curr[i0:]
    e2 = traj.e2[i0:]
    if np.any((p == 0) & (c == 0)):
        raise DegenerateSolutionError("zero solution")
    kap = kappa_array(model, x, start, last)
    sk, ck = np.sin(kap), np.cos(kap)
    y2 = (c - ck * p) ** 2 + (sk * p) ** 2
    norm2 = p * p + c * c
    sandwich = bool(np.all(0.5 * y2 <= norm2 * (1 + slack)) and np.all(norm2 <= 2 * y2 / sk**2 * (1 + slack)))
    amplitude = bool(np.all(np.abs(p) <= np.sqrt(y2) / sk * (1 + slack)))
    log_y = 0.5 * np.log(y2) + e2 * LN2
    ratio = np.exp(np.diff(log_y))
    bound = np.diff(kap) / (sk[:-1] * ck[:-1])
    ratio_ok = bool(np.all(np.abs(ratio - 1.0) <= bound + slack))
    return OscillatoryDiagnostics(
        n=np.arange(start, last + 1), kappa=kap, log_abs_Y=log_y,
        sandwich_ok=sandwich, amplitude_ok=amplitude, ratio_ok=ratio_ok,
    )
