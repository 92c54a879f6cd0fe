"""Spectral density from the Weyl function.

The density of the spectral measure is ``f(x) = Im m(x + i0) / pi``, with
``m`` obtained from the continued-fraction recursion

    m^(n) = 1 / (b_{n+1} - z - a_{n+1}^2 m^(n+1))

run downward from a tail closure at ``n_max``.  Near the edge ``f`` is
astronomically small, so the imaginary part is carried in log space and
``log f`` is the primary output.
"""

from __future__ import annotations

import cmath
import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._backend import kernels
from .edge import turning_point
from .errors import DomainError, JacEdgeError, NoTurningPointError, PoleProximityError, PreconditionError
from .recurrence import dirichlet

_N_CAP = 1 << 34


def free_m(z):
    """Weyl function of the free model, ``(-z + sqrt(z^2 - 4))/2``.

    The branch has ``Im m > 0`` for ``Im z > 0``; for real ``z`` the
    boundary value from the upper half-plane is returned.
    """
    z = complex(z)
    if z.imag == 0 and -2 < z.real < 2:
        return complex(-z.real / 2, math.sqrt(4 - z.real * z.real) / 2)
    if z.imag == 0:
        x = z.real
        return complex((-x + math.copysign(math.sqrt(x * x - 4), x)) / 2, 0.0)
    s = cmath.sqrt(z - 2) * cmath.sqrt(z + 2)
    return (-z + s) / 2


def local_m(z, a, b):
    """Fixed point of ``m = 1/(b - z - a^2 m)`` on the Herglotz branch."""
    return free_m((complex(z) - b) / a) / a


@dataclass(frozen=True)
class DensityControls:
    """Numerical controls for the Weyl-function recursion.

    Parameters
    ----------
    n_max : int, optional
        Starting depth.  Default ``max(2 N(x) + 4, 1024)``.
    eta : float
        Imaginary part of the spectral parameter; 0 evaluates the
        boundary value.
    tol_rel : float
        Convergence threshold on ``|Delta log f|`` between two successive
        depths (equivalently the relative change of ``f``).
    max_doublings : int
    closure : {"adiabatic", "frozen", "free"}
        Tail closure at depth ``n_max``.  ``"frozen"`` is the fixed point of
        the coefficients at ``n_max + 1``; ``"adiabatic"`` adds the
        first-order correction for the slow drift of that fixed point;
        ``"free"`` is the free Weyl function.
    closure_eta : float
        Imaginary shift applied only inside the tail closure.
    """

    n_max: int | None = None
    eta: float = 0.0
    tol_rel: float = 1e-6
    max_doublings: int = 5
    closure: str = "adiabatic"
    closure_eta: float = 0.0


@dataclass
class DensityResult:
    x: float
    f: float
    logf: float
    converged: bool
    n_max_used: int
    history: list = field(default_factory=list)


def tail_closure(model, z, n_max, closure="adiabatic"):
    """Approximation of ``m^(n_max)(z)`` used to start the recursion."""
    if closure == "free":
        return free_m(z)
    a1, b1 = model.coeffs(n_max + 1)
    s1 = local_m(z, a1, b1)
    if closure == "frozen":
        return s1
    if closure != "adiabatic":
        raise ValueError(f"unknown closure {closure!r}")
    # m^(n) = s_{n+1} + c_n with c = rho (s_{n+2} - s_{n+1} + c), rho = a^2 s^2
    a2, b2 = model.coeffs(n_max + 2)
    s2 = local_m(z, a2, b2)
    rho = a1 * a1 * s1 * s1
    if abs(1 - rho) < 1e-3:
        return s1
    return s1 + rho * (s2 - s1) / (1 - rho)


def m_function(model, z, n_max, closure="adiabatic", closure_eta=0.0):
    """``m(z)`` from a recursion of depth ``n_max``.

    Returns ``(Re m, log Im m)``.

    Raises
    ------
    PoleProximityError
        If the recursion passes too close to a pole.
    DomainError
        If the closure has no positive imaginary part (real ``z`` outside
        the local band at the closure depth).
    """
    z = complex(z)
    tail = tail_closure(model, z + 1j * closure_eta, n_max, closure)
    if not tail.imag > 0:
        raise DomainError(f"closure at depth {n_max} is outside the local band")
    try:
        R, I, L = kernels.m_downward(model.packed, z.real, z.imag, int(n_max), tail.real, tail.imag)
    except ZeroDivisionError as exc:
        raise PoleProximityError(f"recursion hit a pole at n={exc.args[0]}") from exc
    return R, math.log(I) + L


def _in_band(model, x, n):
    a, b = model.coeffs(n + 1)
    return abs(x - b) < 2 * a


def default_depth(model, x):
    """Initial recursion depth ``max(2 N(x) + 4, 1024)``."""
    n = 1024
    if not model.is_eventually_constant and 0 <= x < 2:
        try:
            n = max(n, 2 * turning_point(model, x) + 4)
        except JacEdgeError:
            pass
    return n


def density(model, x, ctrl=None):
    """Spectral density ``f(x)`` with depth doubling until self-consistent.

    Returns a :class:`DensityResult`; ``converged`` is False when
    ``max_doublings`` was exhausted (the last iterate is still reported).
    """
    ctrl = ctrl or DensityControls()
    if not -2 < x < 2 and ctrl.eta == 0:
        raise DomainError("x must lie in (-2, 2)")
    n = ctrl.n_max if ctrl.n_max else default_depth(model, x)
    if ctrl.n_max and not model.is_eventually_constant and 0 <= x < 2:
        try:
            n = max(n, turning_point(model, x) + 2)
        except JacEdgeError:
            pass
    while ctrl.closure != "free" and ctrl.closure_eta == 0 and not _in_band(model, x, n):
        n *= 2
        if n > _N_CAP:
            raise DomainError("x is never inside the local band")
    z = complex(x, ctrl.eta)
    history = []
    prev = None
    converged = False
    for _ in range(ctrl.max_doublings + 1):
        _, logim = m_function(model, z, n, ctrl.closure, ctrl.closure_eta)
        logf = logim - math.log(math.pi)
        history.append((n, logf))
        if prev is not None and abs(logf - prev) <= ctrl.tol_rel:
            converged = True
            break
        prev = logf
        n *= 2
    n_used, logf = history[-1]
    f = math.exp(logf) if logf > -745 else 0.0
    return DensityResult(x=x, f=f, logf=logf, converged=converged, n_max_used=n_used, history=history)


@dataclass
class DensityCurve:
    """``f`` on a grid of distances ``delta = 2 - x`` to the edge."""

    deltas: np.ndarray
    x: np.ndarray
    f: np.ndarray
    logf: np.ndarray
    converged: np.ndarray
    n_max_used: np.ndarray
    controls: DensityControls

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["delta", "x", "f", "logf", "converged", "n_max_used"])
            for row in zip(self.deltas, self.x, self.f, self.logf, self.converged, self.n_max_used):
                d, x, f, lf, c, nm = row
                w.writerow([repr(float(d)), repr(float(x)), repr(float(f)), repr(float(lf)), int(c), int(nm)])


def _density_at(args):
    model, x, ctrl = args
    return density(model, x, ctrl)


def density_curve(model, deltas, ctrl=None, workers=1):
    """Evaluate :func:`density` at ``x = 2 - delta`` for each ``delta``.

    ``workers > 1`` distributes grid points over processes; the output
    order always matches ``deltas``.
    """
    ctrl = ctrl or DensityControls()
    deltas = np.asarray(deltas, dtype=np.float64)
    xs = 2.0 - deltas
    jobs = [(model, float(x), ctrl) for x in xs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_density_at, jobs))
    else:
        results = [_density_at(j) for j in jobs]
    return DensityCurve(
        deltas=deltas,
        x=xs,
        f=np.array([r.f for r in results]),
        logf=np.array([r.logf for r in results]),
        converged=np.array([r.converged for r in results]),
        n_max_used=np.array([r.n_max_used for r in results]),
        controls=ctrl,
    )


@dataclass
class SupEstimate:
    """Extremes of ``log(p_{n-1}^2 + p_n^2)`` past the turning point.

    ``estimate`` is the midpoint of the two, a proxy for ``-log f``;
    ``growing`` flags a supremum still rising over the second half of the
    horizon (the estimate is then inconclusive).
    """

    log_sup: float
    log_inf: float
    estimate: float
    growing: bool
    n_from: int
    horizon: int


def sup_solution_estimate(model, x, horizon=None):
    """Estimate ``-log f(x)`` from the size of the Dirichlet solution.

    Raises
    ------
    PreconditionError
        If ``x`` lies below the threshold of the hyperbolic region.
    """
    if model.is_eventually_constant:
        N = 0
    else:
        try:
            N = turning_point(model, x)
        except NoTurningPointError as exc:
            raise PreconditionError(str(exc)) from exc
    n_from = N + 2
    horizon = horizon or max(4 * n_from, 4096)
    state = dirichlet(model, x, n_from)
    mp, mc, e2 = state.kernel_state()
    mid = (n_from + horizon) // 2
    mx, mn, mx1, _ = kernels.forward_extrema(model.packed, x, n_from, mp, mc, e2, n_from, mid, horizon)
    return SupEstimate(
        log_sup=mx, log_inf=mn, estimate=0.5 * (mx + mn),
        growing=(mx - mx1) > 0.5, n_from=n_from, horizon=horizon,
    )

