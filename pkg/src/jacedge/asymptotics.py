"""Closed-form edge expansions and their special-function ingredients.

All expansions describe ``log f ~ -sum_i Q_i var^(-kappa_i) + O(log var)``
for a small variable ``var`` (the distance ``delta = 2 - x`` to the edge,
or an angle for measures on the unit circle).  The leading term depends
only on the tail class; pure power laws get longer ladders.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
import heapq

import mpmath
import numpy as np

from .coefficients import CoefficientModel, VerblunskyModel, szego_sieve_map, tail_class
from .density import DensityControls, density_curve
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    GenerationError,
    ModelValidityError,
    RegimeError,
)
from .recurrence import dirichlet_subordinacy_check

VARIABLES = ("delta", "sin-half-theta", "abs-theta")
_EPS_EXP = 1e-12


@dataclass(frozen=True)
class ExpansionSeries:
    """Terms ``(Q_i, kappa_i)`` of ``log f ~ -sum Q_i var^(-kappa_i)``.

    Parameters
    ----------
    terms : tuple of (float, float)
        Coefficients and exponents, exponents strictly decreasing and
        positive.  May be empty (no algebraic blow-up).
    variable : {"delta", "sin-half-theta", "abs-theta"}
    error_order : str
        Order of the remainder; always ``"log"`` here.
    label : str
        Free-form provenance tag (e.g. the variant of a formula).
    """

    terms: tuple = ()
    variable: str = "delta"
    error_order: str = "log"
    label: str = ""

    def __post_init__(self):
        terms = tuple((float(q), float(k)) for q, k in self.terms)
        object.__setattr__(self, "terms", terms)
        if self.variable not in VARIABLES:
            raise ConfigError(f"unknown series variable {self.variable!r}")
        ks = [k for _, k in terms]
        if any(k <= 0 for k in ks) or any(b >= a for a, b in zip(ks, ks[1:])):
            raise ValueError("exponents must be positive and strictly decreasing")

    def evaluate(self, var):
        """``sum Q_i var^(-kappa_i)`` (the negative of the predicted ``log f``)."""
        var = np.asarray(var, dtype=np.float64)
        out = np.zeros_like(var)
        for q, k in self.terms:
            out = out + q * var ** (-k)
        return out

    def without_leading(self):
        return ExpansionSeries(self.terms[1:], self.variable, self.error_order, self.label + " (leading dropped)")

    def with_leading(self, q):
        """Copy with the leading coefficient replaced by ``q``."""
        if not self.terms:
            raise ValueError("series has no leading term")
        terms = ((q, self.terms[0][1]),) + self.terms[1:]
        return ExpansionSeries(terms, self.variable, self.error_order, self.label)

    def to_dict(self):
        return {
            "variable": self.variable,
            "terms": [{"Q": q, "kappa": k} for q, k in self.terms],
            "error_order": self.error_order,
            "label": self.label,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            terms=tuple((t["Q"], t["kappa"]) for t in d.get("terms", [])),
            variable=d.get("variable", "delta"),
            error_order=d.get("error_order", "log"),
            label=d.get("label", ""),
        )

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2)


# -- special functions ------------------------------------------------------


def log_gamma(t):
    """``log Gamma(t)`` for ``t > 0`` (platform ``lgamma``)."""
    if not t > 0:
        raise DomainError(f"log_gamma needs t > 0, got {t}")
    return math.lgamma(t)


def _binom_half(k):
    """Exact ``binom(-1/2, k)``."""
    out = Fraction(1)
    for j in range(k):
        out = out * (Fraction(-1, 2) - j) / (j + 1)
    return out


def _poly_mul(p, q, deg):
    out = [Fraction(0)] * (deg + 1)
    for i, a in enumerate(p[: deg + 1]):
        if a:
            for j, b in enumerate(q[: deg + 1 - i]):
                out[i + j] += a * b
    return out


def _arccosh_core(kmax):
    # arccosh(1 + w) = sqrt(2w) * sum_k s_k w^k, obtained by integrating
    # d/dw arccosh(1 + w) = (2w)^(-1/2) (1 + w/2)^(-1/2) term by term
    return [_binom_half(k) / (2**k * (2 * k + 1)) for k in range(kmax + 1)]


@dataclass(frozen=True)
class SeriesCoeffs:
    """Coefficients of ``sum_l coeff_l z^(l + 1/2)``.

    ``exact`` holds rationals; the float ``values`` equal ``exact`` times
    ``sqrt(2)`` for kind ``"H"`` and ``exact`` itself otherwise.
    """

    kind: str
    values: tuple
    l_max: int
    exact: tuple = field(default=(), repr=False)


def _reference(kind, z):
    z = mpmath.mpf(z)
    if kind == "F":
        return mpmath.acosh(1 + z / 2)
    if kind == "H":
        return mpmath.acosh(1 / (1 - z))
    r = mpmath.sqrt(z)
    return mpmath.log((1 + r) / (1 - r)) / 2


def series_coeffs(kind, l_max, validate=True):
    """Generate the coefficients of ``F``, ``H`` or ``G`` up to ``l_max``.

    ``F(z) = arccosh(1 + z/2)``, ``H(z) = arccosh(1/(1 - z))`` and
    ``G(z) = (1/2) log((1 + sqrt z)/(1 - sqrt z))``, each expanded as
    ``sum_l coeff_l z^(l + 1/2)``.  The expansions are built by exact
    power-series composition and validated pointwise against a
    high-precision evaluation of the closed forms.
    """
    if kind not in ("F", "H", "G"):
        raise ValueError(f"unknown series kind {kind!r}")
    if not 0 <= l_max <= 12:
        raise DomainError("l_max must lie in [0, 12]")
    K = l_max + 1  # one extra term for the validation bound
    if kind == "G":
        exact = [Fraction(1, 2 * l + 1) for l in range(K + 1)]
    elif kind == "F":
        exact = [s / 2**l for l, s in enumerate(_arccosh_core(K))]
    else:
        s = _arccosh_core(K)
        w = [Fraction(0)] + [Fraction(1)] * K  # z/(1 - z)
        comp = [Fraction(0)] * (K + 1)
        for sk in reversed(s):
            comp = _poly_mul(comp, w, K)
            comp[0] += sk
        pref = [_binom_half(j) * (-1) ** j for j in range(K + 1)]  # (1 - z)^(-1/2)
        exact = _poly_mul(comp, pref, K)
    # remainders reach z^(l_max + 3/2) with z = 1e-4; keep 30 digits below that
    with mpmath.workdps(40 + 4 * (l_max + 2)):
        scale = mpmath.sqrt(2) if kind == "H" else mpmath.mpf(1)
        if validate:
            for z in ("1e-3", "1e-4"):
                zz = mpmath.mpf(z)
                ref = _reference(kind, zz)
                partial = mpmath.mpf(0)
                for L in range(l_max + 1):
                    partial += scale * mpmath.mpf(exact[L].numerator) / exact[L].denominator * zz ** (L + 0.5)
                    nxt = abs(scale * mpmath.mpf(exact[L + 1].numerator) / exact[L + 1].denominator)
                    if abs(ref - partial) > 2 * nxt * zz ** (L + 1.5):
                        raise GenerationError(f"{kind} series fails validation at z={z}, L={L}")
        values = tuple(
            float(scale * mpmath.mpf(e.numerator) / e.denominator) for e in exact[: l_max + 1]
        )
    return SeriesCoeffs(kind=kind, values=values, l_max=l_max, exact=tuple(exact[: l_max + 1]))


# -- Gauss-Kronrod quadrature ------------------------------------------------

_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate((-_XK[:-1], _XK[::-1]))
_WKFULL = np.concatenate((_WK[:-1], _WK[::-1]))
_WGFULL = np.zeros(15)
_WGFULL[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate((_WG, _WG[-2::-1]))


def _gk15(f, a, b):
    c, h = 0.5 * (a + b), 0.5 * (b - a)
    y = f(c + h * _NODES)
    k = h * np.dot(_WKFULL, y)
    g = h * np.dot(_WGFULL, y)
    return k, abs(k - g)


def adaptive_quad(f, a, b, rtol=1e-13, atol=1e-16, max_intervals=4000):
    """Globally adaptive 7/15-point Gauss-Kronrod integration of a vectorised ``f``."""
    k, e = _gk15(f, a, b)
    heap = [(-e, a, b, k)]
    total, err = k, e
    while err > max(atol, rtol * abs(total)) and len(heap) < max_intervals:
        e0, lo, hi, k0 = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        k1, e1 = _gk15(f, lo, mid)
        k2, e2 = _gk15(f, mid, hi)
        total += k1 + k2 - k0
        err += e1 + e2 + e0
        heapq.heappush(heap, (-e1, lo, mid, k1))
        heapq.heappush(heap, (-e2, mid, hi, k2))
    total = sum(item[3] for item in heap)
    err = sum(-item[0] for item in heap)
    return total, err


def _log_expm1(y):
    return y + np.log(-np.expm1(-y))


def beta_lambda(beta, l, extra_exponents=()):
    return (l + 0.5) * beta + sum(g - beta for g in extra_exponents)


def beta_integral_quadrature(beta, l, extra_exponents=()):
    """Quadrature route for :func:`beta_integral`.

    With ``x = exp(-s)`` and ``s = t^2`` the integrand is smooth at
    ``t = 0`` and decays like ``exp(-(1 - lambda) t^2)``; the range is
    cut where the tail bound drops below ``1e-17``.
    """
    lam = beta_lambda(beta, l, extra_exponents)
    if not lam < 1:
        raise DivergenceError(f"integral diverges: lambda = {lam} >= 1")
    pref = math.prod(g / beta for g in extra_exponents) if extra_exponents else 1.0
    S = (math.log(pref / (1 - lam)) + 40.0) / (1 - lam)
    T = math.sqrt(max(S, 1.0))

    def integrand(t):
        s = t * t
        out = np.zeros_like(t)
        pos = s > 0
        sp = s[pos]
        lb = _log_expm1(beta * sp)
        lg = (l + 0.5) * lb - sp
        for g in extra_exponents:
            lg = lg + _log_expm1(g * sp) - lb
        out[pos] = 2.0 * t[pos] * np.exp(lg)
        return out

    val, _ = adaptive_quad(integrand, 0.0, T)
    return val


def beta_integral(beta, l, extra_exponents=()):
    """``int_0^1 (x^-beta - 1)^(l+1/2) prod_j (x^-g_j - 1)/(x^-beta - 1) dx``.

    Without extra exponents the closed Beta-function form is used;
    otherwise adaptive quadrature.

    Raises
    ------
    DivergenceError
        If ``lambda = (l + 1/2) beta + sum_j (g_j - beta) >= 1``.
    """
    if not beta > 0 or l < 0 or any(not g > beta for g in extra_exponents):
        raise DomainError("need beta > 0, l >= 0 and every extra exponent above beta")
    lam = beta_lambda(beta, l, extra_exponents)
    if not lam < 1:
        raise DivergenceError(f"integral diverges: lambda = {lam} >= 1")
    if extra_exponents:
        return beta_integral_quadrature(beta, l, tuple(extra_exponents))
    ib = 1.0 / beta
    return math.exp(log_gamma(ib - l - 0.5) + log_gamma(l + 1.5) - log_gamma(ib + 1)) / beta


def power_difference_ratio(t, beta, gamma, N):
    """``(t^-gamma - N^-gamma)/(t^-beta - N^-beta)`` for ``0 < t < N``."""
    return (t ** (-gamma) - N ** (-gamma)) / (t ** (-beta) - N ** (-beta))


# -- expansions -------------------------------------------------------------


def _count_positive(start, step):
    n = 0
    while start - step * n > _EPS_EXP:
        n += 1
    return n


def thm3_leading(tail):
    """Leading term ``Q1 delta^(-kappa1)`` from the tail class alone.

    ``Q1 = C1^(1/beta) Gamma(1/beta - 1/2) sqrt(pi) / Gamma(1/beta)`` and
    ``kappa1 = 1/beta - 1/2``.

    Raises
    ------
    RegimeError
        For ``beta >= 2`` (then ``log f = O(log delta)``).
    """
    beta, c1 = tail.beta, tail.C1
    if not 0 < beta < 2:
        raise RegimeError(f"no algebraic leading term for beta = {beta}")
    ib = 1.0 / beta
    q = math.exp(ib * math.log(c1) + log_gamma(ib - 0.5) - log_gamma(ib)) * math.sqrt(math.pi)
    return ExpansionSeries(((q, ib - 0.5),), "delta", label="leading")


def thm4_series(C, tau, variant="corrected"):
    """Full ladder for ``a_n = 1 - C n^-tau``, ``b_n = 0``.

    ``T_n`` multiplies ``delta^-(1/tau - 1/2 - n)`` for every ``n`` with a
    positive exponent.  ``variant="printed"`` omits the ``1/sqrt(pi)`` in
    the inner sum; the default ``"corrected"`` includes it, which makes
    ``T_0`` agree with :func:`thm3_leading`.
    """
    if not 0 < tau < 2:
        raise RegimeError("tau must lie in (0, 2)")
    if not C > 0:
        raise RegimeError("C must be positive")
    if variant not in ("corrected", "printed"):
        raise ConfigError(f"unknown variant {variant!r}")
    it = 1.0 / tau
    L = _count_positive(it - 0.5, 1.0)
    norm = math.sqrt(math.pi) if variant == "corrected" else 1.0
    inner = []
    acc = 0.0
    for m in range(L):
        acc += math.exp(log_gamma(m + 0.5) - m * math.log(2) - math.lgamma(m + 1)) / norm
        inner.append(acc)
    terms = []
    for n in range(L):
        s = sum(inner[l] * math.exp(log_gamma(it - l - 0.5) - math.lgamma(n - l + 1)) for l in range(n + 1))
        pref = math.exp((it - n) * math.log(2) + it * math.log(C) + log_gamma(n + 0.5) - log_gamma(it))
        terms.append((pref * s, it - 0.5 - n))
    return ExpansionSeries(tuple(terms), "delta", label=f"pure-a ladder ({variant})")


def thm5_leading(D1, tau1):
    """Leading term in ``|theta|`` for Verblunsky coefficients ``~ -D1 n^-tau1``.

    ``P1 = 2^(1/tau1 - 1) D1^(1/tau1) Gamma(1/(2 tau1) - 1/2) sqrt(pi) / Gamma(1/(2 tau1))``
    with exponent ``1/tau1 - 1``.
    """
    if not 0 < tau1 < 1:
        raise RegimeError("no algebraic leading term unless 0 < tau1 < 1")
    it = 1.0 / tau1
    h = 0.5 * it
    p = math.exp((it - 1) * math.log(2) + it * math.log(D1) + log_gamma(h - 0.5) - log_gamma(h)) * math.sqrt(math.pi)
    return ExpansionSeries(((p, it - 1.0),), "abs-theta", label="leading (circle)")


def thm6_series(D, tau, n0=None):
    """Full ladder in ``|sin(theta/2)|`` for ``alpha_n = -D (n + n0)^-tau``.

    ``P_n = D^(1/tau) Gamma(n + 1/2)/Gamma(1/(2 tau)) sum_{l<=n} Gamma(1/(2 tau) - l - 1/2)/(n - l)!``
    multiplies ``|sin(theta/2)|^-(1/tau - 1 - 2n)``.
    """
    if not 0 < tau < 1:
        raise RegimeError("tau must lie in (0, 1)")
    if not D > 0 or (n0 is not None and not D < n0**tau):
        raise RegimeError("need 0 < D < n0^tau")
    it = 1.0 / tau
    h = 0.5 * it
    L = _count_positive(it - 1.0, 2.0)
    terms = []
    for n in range(L):
        s = sum(math.exp(log_gamma(h - l - 0.5) - math.lgamma(n - l + 1)) for l in range(n + 1))
        pref = math.exp(it * math.log(D) + log_gamma(n + 0.5) - log_gamma(h))
        terms.append((pref * s, it - 1.0 - 2 * n))
    return ExpansionSeries(tuple(terms), "sin-half-theta", label="pure circle ladder")


def invert_turning_leading(tail, s):
    """Leading inversion ``N^s ~ C1^(s/beta) delta^(-s/beta)``; returns ``(coeff, exponent)``."""
    if not math.isfinite(tail.beta):
        raise RegimeError("tail class has no finite decay exponent")
    return tail.C1 ** (s / tail.beta), s / tail.beta


def predict_series(target, variant="corrected"):
    """Most detailed available expansion for a model.

    Pure ``a_n = 1 - C n^-tau`` models get the full ladder, pure Verblunsky
    models the circle ladder, everything else the leading term.
    """
    if isinstance(target, VerblunskyModel):
        if target.is_pure:
            t = target.terms[0]
            return thm6_series(t.coeff, t.exponent, target.shift)
        t = target.terms[0]
        return thm5_leading(t.coeff, t.exponent)
    if (
        target.sieve_source is None
        and len(target.a_terms) == 1
        and not target.b_terms
        and not target.overrides
    ):
        t = target.a_terms[0]
        return thm4_series(t.coeff, t.exponent, variant)
    return thm3_leading(tail_class(target))


# -- unit circle --------------------------------------------------------------


def opuc_transform(logf_at, theta):
    """``log w(theta) = log(2 pi |sin(theta/2)|) + log f(2 cos(theta/2))``.

    ``logf_at`` maps ``x`` to ``log f(x)`` for the Jacobi model of the
    even measure.
    """
    th = math.remainder(theta, 2 * math.pi)
    if th == 0:
        raise DomainError("theta must not be a multiple of 2 pi")
    half = 0.5 * abs(th)
    return math.log(2 * math.pi * math.sin(half)) + logf_at(2.0 * math.cos(half))


@dataclass
class MassPointCheck:
    """Partial sums ``S_n = sum_{k<=n} phi_k(1)^2`` in log form."""

    diverges: bool
    n: np.ndarray
    log_partial_sums: np.ndarray
    slope: float


def mass_point_check(vmodel, horizon=10**5, threshold=100.0):
    """Check that ``phi_n(1)`` is not square summable (no mass at ``z = 1``).

    ``log phi_n(1) = (1/2) sum_{j<n} log((1 - alpha_j)/(1 + alpha_j))``.
    Divergence is declared when ``S_horizon`` exceeds ``threshold`` and
    ``log S_n`` grows at least like ``(1/2) log n`` over the last decade.
    """
    al = vmodel.alpha_array(0, horizon - 1)
    if np.any(np.abs(al) >= 1):
        raise ModelValidityError("|alpha_n| >= 1", n=int(np.argmax(np.abs(al) >= 1)))
    incr = 0.5 * (np.log1p(-al) - np.log1p(al))
    logphi = np.concatenate(([0.0], np.cumsum(incr)))
    logS = np.logaddexp.accumulate(2.0 * logphi)
    n = np.arange(logS.size)
    tail = n >= max(1, logS.size // 10)
    slope = float(np.polyfit(np.log(n[tail]), logS[tail], 1)[0])
    diverges = bool(logS[-1] > math.log(threshold) and slope >= 0.5)
    return MassPointCheck(diverges=diverges, n=n, log_partial_sums=logS, slope=slope)


# -- verification ---------------------------------------------------------------


@dataclass
class VerificationReport:
    """Result of checking an expansion against the density oracle."""

    verdict: str
    slope: float
    slope_ci: tuple
    control_slope: float | None
    points_used: int
    variable: str
    label: str
    grid: np.ndarray
    log_density: np.ndarray
    residuals: np.ndarray
    converged: np.ndarray
    subordinacy: str
    reasons: list

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "slope": self.slope,
            "slope_ci": list(self.slope_ci),
            "control_slope": self.control_slope,
            "points_used": self.points_used,
            "variable": self.variable,
            "variant": self.label,
            "subordinacy": self.subordinacy,
            "reasons": self.reasons,
            "grid": [float(v) for v in self.grid],
            "log_density": [float(v) for v in self.log_density],
            "residuals": [float(v) for v in self.residuals],
            "converged": [bool(v) for v in self.converged],
        }


def _fit_slope(xv, yv):
    coef, cov = np.polyfit(xv, yv, 1, cov=True) if xv.size > 2 else (np.polyfit(xv, yv, 1), None)
    se = math.sqrt(cov[0, 0]) if cov is not None else math.nan
    return float(coef[0]), se


def verify_expansion(target, series, grid, ctrl=None, workers=1, subordinacy_horizon=10**5):
    """Residual slope test of an expansion against the density oracle.

    Parameters
    ----------
    target : CoefficientModel or VerblunskyModel
    series : ExpansionSeries
    grid : array_like
        Values of ``delta`` for delta-series, of ``|theta|`` otherwise.

    Notes
    -----
    The residual ``r = log f + sum Q_i var^-kappa_i`` (``log w`` for circle
    series) should only grow logarithmically.  PASS requires the fitted
    slope of ``log|r|`` against ``log var`` to lie in ``[-0.15, 0.15]`` and,
    as a negative control, the residual without the leading term to have
    slope at most ``-max(kappa_1 - 0.1, 0.3)``.  For an empty series only
    the absence of algebraic growth (slope above ``-0.3``) is required.
    """
    grid = np.asarray(grid, dtype=np.float64)
    reasons = []
    if series.variable == "delta":
        if isinstance(target, VerblunskyModel):
            raise ConfigError("a delta-series needs a Jacobi model")
        model = target
        deltas = grid
        var = grid
    else:
        if isinstance(target, VerblunskyModel):
            model = szego_sieve_map(target)
        elif isinstance(target, CoefficientModel) and target.sieve_source is not None:
            model = target
        else:
            raise ConfigError("an angle series needs a Verblunsky model")
        half = 0.5 * np.abs(grid)
        deltas = 4.0 * np.sin(0.5 * half) ** 2  # 2 - 2cos(theta/2), without cancellation
        var = np.sin(half) if series.variable == "sin-half-theta" else np.abs(grid)

    sub = dirichlet_subordinacy_check(model, horizon=subordinacy_horizon)
    curve = density_curve(model, deltas, ctrl or DensityControls(), workers=workers)
    y = curve.logf.copy()
    if series.variable != "delta":
        y = y + np.log(2 * math.pi * np.sin(half))
    r = y + series.evaluate(var)
    ok = curve.converged & np.isfinite(r) & (r != 0)
    used = int(np.sum(ok))

    def report(verdict, slope=math.nan, se=math.nan, control=None):
        ci = (slope - 1.96 * se, slope + 1.96 * se)
        return VerificationReport(
            verdict=verdict, slope=slope, slope_ci=ci, control_slope=control,
            points_used=used, variable=series.variable, label=series.label,
            grid=grid, log_density=y, residuals=r, converged=curve.converged,
            subordinacy=sub.status, reasons=reasons,
        )

    if sub.status != "not-subordinate":
        reasons.append(f"Dirichlet solution at the edge is {sub.status}: {sub.reason}")
        return report("INCONCLUSIVE")
    if used < 8:
        reasons.append(f"only {used} converged grid points")
        return report("INCONCLUSIVE")
    lv = np.log(var[ok])
    slope, se = _fit_slope(lv, np.log(np.abs(r[ok])))
    if not series.terms:
        passed = slope > -0.3
        if not passed:
            reasons.append(f"residual grows algebraically (slope {slope:.3f})")
        return report("PASS" if passed else "FAIL", slope, se)
    q1, k1 = series.terms[0]
    r0 = r - q1 * var ** (-k1)
    control, _ = _fit_slope(lv, np.log(np.abs(r0[ok])))
    in_band = abs(slope) <= 0.15
    control_ok = control <= -max(k1 - 0.1, 0.3)
    if not in_band:
        reasons.append(f"residual slope {slope:.3f} outside [-0.15, 0.15]")
    if not control_ok:
        reasons.append(f"negative control slope {control:.3f} above {-max(k1 - 0.1, 0.3):.3f}")
    return report("PASS" if in_band and control_ok else "FAIL", slope, se, control)
