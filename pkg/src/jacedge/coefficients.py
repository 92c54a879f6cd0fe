"""Coefficient models for half-line Jacobi matrices.

Two families are supported:

* power-law models ``a_n = 1 - sum_j c_j n^(-tau_j)`` and
  ``b_n = -sum_k d_k n^(-sigma_k)`` with optional finite overrides;
* Jacobi models obtained from Verblunsky coefficients
  ``alpha_n = -sum_i D_i (n + n0)^(-tau_i)`` through the Szego map
  restricted to even measures, ``a_n^2 = (1 - alpha_{n-2})(1 + alpha_{n-1})``
  with ``alpha_{-1} = -1`` and ``b_n = 0``.

Both expose exact defects ``1 - a_n`` and ``-b_n`` so that quantities near
the spectral edge ``x = 2`` can be formed without cancellation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import ConfigError, DomainError, ModelValidityError, RegimeError

_CHUNK = 1 << 20


@dataclass(frozen=True)
class PowerLawTerm:
    """One term ``coeff * n^(-exponent)`` of a power-law expansion."""

    coeff: float
    exponent: float

    def __post_init__(self):
        if not (math.isfinite(self.coeff) and math.isfinite(self.exponent)):
            raise ModelValidityError("power-law term must be finite")
        if self.exponent <= 0:
            raise ModelValidityError(f"exponent must be positive, got {self.exponent}")


def _check_terms(terms, label):
    terms = tuple(t if isinstance(t, PowerLawTerm) else PowerLawTerm(*t) for t in terms)
    for prev, nxt in zip(terms, terms[1:]):
        if not nxt.exponent > prev.exponent:
            raise ModelValidityError(f"{label} exponents must be strictly increasing")
    if terms and terms[0].coeff <= 0:
        raise ModelValidityError(f"leading {label} coefficient must be positive")
    return terms


def _npow(n, t):
    """``n ** -t`` with the same fast paths as the compiled kernels."""
    if t == 0.5:
        return 1.0 / np.sqrt(n)
    if t == 1.0:
        return 1.0 / n
    if t == 2.0:
        return 1.0 / (n * n)
    if t == 1.5:
        return 1.0 / (n * np.sqrt(n))
    return n ** (-t)


def _scalar_npow(n, t):
    if t == 0.5:
        return 1.0 / math.sqrt(n)
    if t == 1.0:
        return 1.0 / n
    if t == 2.0:
        return 1.0 / (n * n)
    if t == 1.5:
        return 1.0 / (n * math.sqrt(n))
    return n ** (-t)


def _pad(values):
    arr = np.asarray(list(values) + [0.0], dtype=np.float64)
    return np.ascontiguousarray(arr)


@dataclass(frozen=True)
class VerblunskyModel:
    """Verblunsky coefficients ``alpha_n = -sum_i D_i (n + shift)^(-tau_i)``.

    Parameters
    ----------
    terms : tuple of PowerLawTerm
        ``(D_i, tau_i)`` pairs with strictly increasing exponents.  An empty
        tuple gives ``alpha = 0`` (the free case).
    shift : float
        The shift ``n0``.  Must be positive when ``terms`` is non-empty.
    """

    terms: tuple = ()
    shift: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "terms", _check_terms(self.terms, "Verblunsky"))
        if self.terms and not self.shift > 0:
            raise ModelValidityError("shift must be positive for a non-zero model", n=0)
        if not self.terms:
            return
        # |alpha_n| < 1 has to hold for every n >= 0
        n = 0
        while True:
            bound = sum(abs(t.coeff) * _scalar_npow(n + self.shift, t.exponent) for t in self.terms)
            if bound < 1:
                break
            if abs(self.alpha(n)) >= 1:
                raise ModelValidityError(f"|alpha_{n}| >= 1", n=n)
            n += 1
            if n > 10**6:
                raise ModelValidityError("Verblunsky terms decay too slowly to check")

    @classmethod
    def pure(cls, D, n0, tau):
        """The pure model ``alpha_n = -D / (n + n0)^tau``."""
        if not 0 < D < n0**tau:
            raise ModelValidityError("pure model needs 0 < D < n0^tau", n=0)
        return cls(terms=(PowerLawTerm(D, tau),), shift=float(n0))

    @property
    def is_pure(self):
        return len(self.terms) == 1

    def alpha(self, n):
        """Return ``alpha_n``; ``alpha_{-1} = -1`` by convention."""
        if n == -1:
            return -1.0
        if n < -1:
            raise DomainError(f"alpha_n undefined for n={n}")
        return -sum(t.coeff * _scalar_npow(n + self.shift, t.exponent) for t in self.terms)

    def alpha_array(self, lo, hi):
        """Vectorised ``alpha_n`` for ``lo <= n <= hi`` (``lo >= -1``)."""
        n = np.arange(lo, hi + 1, dtype=np.float64)
        out = np.zeros_like(n)
        with np.errstate(divide="ignore", invalid="ignore"):
            for t in self.terms:
                out -= t.coeff * _npow(n + self.shift, t.exponent)
        out[n == -1] = -1.0
        return out

    def to_dict(self):
        return {
            "kind": "verblunsky",
            "terms": [{"D": t.coeff, "tau": t.exponent} for t in self.terms],
            "n0": self.shift,
        }


@dataclass(frozen=True)
class CoefficientModel:
    """Jacobi coefficients ``(a_n, b_n)``, ``n >= 1``.

    Parameters
    ----------
    a_terms : tuple of PowerLawTerm
        Terms of ``1 - a_n``; empty for ``a_n = 1``.
    b_terms : tuple of PowerLawTerm
        Terms of ``-b_n``; empty for ``b_n = 0``.
    n0_monotone : int
        Index from which the tail is asserted monotone.
    overrides : mapping of int to (float, float)
        Explicit ``(a_n, b_n)`` values at finitely many indices.
    sieve_source : VerblunskyModel, optional
        When given, ``a_n`` and ``b_n`` come from the Szego map applied to
        these Verblunsky coefficients and the term lists must be empty.
    """

    a_terms: tuple = ()
    b_terms: tuple = ()
    n0_monotone: int = 1
    overrides: Mapping[int, tuple] | tuple = field(default_factory=tuple)
    sieve_source: VerblunskyModel | None = None

    def __post_init__(self):
        object.__setattr__(self, "a_terms", _check_terms(self.a_terms, "a"))
        object.__setattr__(self, "b_terms", _check_terms(self.b_terms, "b"))
        ov = self.overrides
        items = ov.items() if isinstance(ov, Mapping) else ((k, v) for k, v in ov)
        clean = []
        for k, v in items:
            k = int(k)
            a, b = (float(v[0]), float(v[1]))
            if k < 1:
                raise ModelValidityError(f"override index must be >= 1, got {k}", n=k)
            if not (a > 0 and math.isfinite(a) and math.isfinite(b)):
                raise ModelValidityError(f"a_{k} must be positive and finite", n=k)
            clean.append((k, (a, b)))
        object.__setattr__(self, "overrides", tuple(sorted(clean)))
        if int(self.n0_monotone) < 1:
            raise ModelValidityError("n0_monotone must be >= 1")
        object.__setattr__(self, "n0_monotone", int(self.n0_monotone))
        if self.sieve_source is not None and (self.a_terms or self.b_terms):
            raise ModelValidityError("sieved models cannot carry power-law terms")
        self._check_positive()

    def _check_positive(self):
        # a_n > 0 must hold wherever the tail terms could push it to zero
        if self.sieve_source is not None:
            return
        n = 1
        ovd = self.override_dict
        while True:
            bound = sum(abs(t.coeff) * _scalar_npow(n, t.exponent) for t in self.a_terms)
            if bound < 1:
                break
            if n not in ovd and not 1.0 - self._ea_scalar(n) > 0:
                raise ModelValidityError(f"a_{n} <= 0", n=n)
            n += 1
            if n > 10**6:
                raise ModelValidityError("a-terms decay too slowly to check positivity")

    # -- evaluation ---------------------------------------------------

    @cached_property
    def override_dict(self):
        return dict(self.overrides)

    @property
    def max_override(self):
        return self.overrides[-1][0] if self.overrides else 0

    @property
    def is_eventually_constant(self):
        if self.sieve_source is not None:
            return not self.sieve_source.terms
        return not self.a_terms and not self.b_terms

    @property
    def n0(self):
        return self.n0_monotone

    def _ea_scalar(self, n):
        return sum(t.coeff * _scalar_npow(n, t.exponent) for t in self.a_terms)

    def _eb_scalar(self, n):
        return sum(t.coeff * _scalar_npow(n, t.exponent) for t in self.b_terms)

    def defects(self, n):
        """Return ``(1 - a_n, -b_n)`` computed without cancellation.

        ``n = 0`` returns the convention ``a_0 = 1, b_0 = 0``.
        """
        if n <= 0:
            return 0.0, 0.0
        ov = self.override_dict.get(n)
        if ov is not None:
            return 1.0 - ov[0], -ov[1]
        if self.sieve_source is not None:
            s = self.sieve_source
            al2, al1 = s.alpha(n - 2), s.alpha(n - 1)
            a = math.sqrt((1.0 - al2) * (1.0 + al1))
            return (al2 - al1 + al2 * al1) / (1.0 + a), 0.0
        return self._ea_scalar(n), self._eb_scalar(n)

    def coeffs(self, n):
        """Return ``(a_n, b_n)``; see :func:`eval_jacobi`."""
        ov = self.override_dict.get(n)
        if ov is not None:
            return ov
        if self.sieve_source is not None and n >= 1:
            s = self.sieve_source
            return math.sqrt((1.0 - s.alpha(n - 2)) * (1.0 + s.alpha(n - 1))), 0.0
        ea, eb = self.defects(n)
        return 1.0 - ea, -eb

    def arrays(self, lo, hi):
        """Vectorised ``(a, b, 1 - a, -b)`` for ``lo <= n <= hi``."""
        if lo < 0 or hi < lo:
            raise DomainError(f"bad index range [{lo}, {hi}]")
        n = np.arange(lo, hi + 1, dtype=np.float64)
        if self.sieve_source is not None:
            al = self.sieve_source.alpha_array(lo - 2, hi - 1)
            al2, al1 = al[:-1], al[1:]
            a = np.sqrt((1.0 - al2) * (1.0 + al1))
            ea = (al2 - al1 + al2 * al1) / (1.0 + a)
            eb = np.zeros_like(n)
        else:
            ea = np.zeros_like(n)
            eb = np.zeros_like(n)
            with np.errstate(divide="ignore", invalid="ignore"):
                for t in self.a_terms:
                    ea += t.coeff * _npow(n, t.exponent)
                for t in self.b_terms:
                    eb += t.coeff * _npow(n, t.exponent)
            a = 1.0 - ea
        for k, (ak, bk) in self.overrides:
            if lo <= k <= hi:
                a[k - lo] = ak
                ea[k - lo] = 1.0 - ak
                eb[k - lo] = -bk
        if lo == 0:
            a[0], ea[0], eb[0] = 1.0, 0.0, 0.0
        return a, -eb, ea, eb

    def increment(self, n):
        """``(a_{n+1} - a_n) + (b_{n+1} - b_n)`` without cancellation."""
        ovd = self.override_dict
        if self.sieve_source is None and n >= 1 and n not in ovd and n + 1 not in ovd:
            r = math.log1p(1.0 / n)
            tot = 0.0
            for t in self.a_terms + self.b_terms:
                tot += -t.coeff * _scalar_npow(n, t.exponent) * math.expm1(-t.exponent * r)
            return tot
        ea0, eb0 = self.defects(n)
        ea1, eb1 = self.defects(n + 1)
        return (ea0 - ea1) + (eb0 - eb1)

    @cached_property
    def packed(self):
        """Flat tuple consumed by the kernel backends."""
        kind = 1 if self.sieve_source is not None else 0
        nov = self.max_override
        ova = np.zeros(nov + 1)
        ovb = np.zeros(nov + 1)
        ovm = np.zeros(nov + 1, dtype=np.uint8)
        for k, (ak, bk) in self.overrides:
            ova[k], ovb[k], ovm[k] = ak, bk, 1
        vs = self.sieve_source
        vterms = vs.terms if vs is not None else ()
        return (
            kind,
            len(self.a_terms), _pad(t.coeff for t in self.a_terms), _pad(t.exponent for t in self.a_terms),
            len(self.b_terms), _pad(t.coeff for t in self.b_terms), _pad(t.exponent for t in self.b_terms),
            len(vterms), _pad(t.coeff for t in vterms), _pad(t.exponent for t in vterms),
            float(vs.shift) if vs is not None else 0.0,
            nov, ova, ovb, ovm,
        )

    def to_dict(self):
        if self.sieve_source is not None:
            d = self.sieve_source.to_dict()
            d["n0_monotone"] = self.n0_monotone
            return d
        return {
            "kind": "jacobi",
            "a_terms": [{"c": t.coeff, "tau": t.exponent} for t in self.a_terms],
            "b_terms": [{"d": t.coeff, "sigma": t.exponent} for t in self.b_terms],
            "n0": self.n0_monotone,
            "overrides": {str(k): [a, b] for k, (a, b) in self.overrides},
        }


@dataclass(frozen=True)
class TailClass:
    """Leading edge behaviour ``2 - 2a_n - b_n ~ C1 n^(-beta)``.

    ``case`` is one of ``"a"`` (tau1 < sigma1), ``"balanced"``, ``"b"``
    or ``"constant"`` (then ``beta`` is infinite and ``C1`` is nan).
    """

    beta: float
    C1: float
    case: str


@dataclass(frozen=True)
class MonotonicityReport:
    ok: bool
    first_violation: int | None
    condition: str | None
    horizon: int


# -- constructors ---------------------------------------------------------


def free_model():
    """``a_n = 1``, ``b_n = 0``."""
    return CoefficientModel()


def chebyshev_model():
    """Free model with ``a_1 = sqrt(2)`` (Chebyshev polynomials of the first kind)."""
    return CoefficientModel(overrides={1: (math.sqrt(2.0), 0.0)})


def power_law_model(a=(), b=(), n0=1, overrides=None):
    """Build a model from ``(coeff, exponent)`` pairs for ``1 - a_n`` and ``-b_n``."""
    return CoefficientModel(
        a_terms=tuple(PowerLawTerm(*t) for t in a),
        b_terms=tuple(PowerLawTerm(*t) for t in b),
        n0_monotone=n0,
        overrides=overrides or {},
    )


def eval_jacobi(model, n):
    """Return ``(a_n, b_n)`` for ``n >= 1``.

    Raises
    ------
    ModelValidityError
        If ``a_n <= 0``.
    """
    if n < 1:
        raise DomainError(f"coefficients are indexed from 1, got n={n}")
    a, b = model.coeffs(n)
    if not a > 0:
        raise ModelValidityError(f"a_{n} = {a} is not positive", n=n)
    return a, b


def tail_class(model):
    """Classify the decay of ``2 - 2a_n - b_n``."""
    if model.sieve_source is not None:
        if not model.sieve_source.terms:
            return TailClass(math.inf, math.nan, "constant")
        return szego_map_tail(model.sieve_source)
    if model.is_eventually_constant:
        return TailClass(math.inf, math.nan, "constant")
    ta = model.a_terms[0].exponent if model.a_terms else math.inf
    sb = model.b_terms[0].exponent if model.b_terms else math.inf
    if ta < sb:
        return TailClass(ta, 2.0 * model.a_terms[0].coeff, "a")
    if ta > sb:
        return TailClass(sb, model.b_terms[0].coeff, "b")
    return TailClass(ta, 2.0 * model.a_terms[0].coeff + model.b_terms[0].coeff, "balanced")


def eval_verblunsky(vmodel, n):
    """Return ``alpha_n``, checking ``|alpha_n| < 1`` for ``n >= 0``."""
    al = vmodel.alpha(n)
    if n >= 0 and not abs(al) < 1:
        raise ModelValidityError(f"|alpha_{n}| >= 1", n=n)
    return al


def szego_map_tail(vmodel):
    """Tail class of the Jacobi model produced by the Szego map.

    The defect ``1 - a_n`` behaves like ``D1^2/2 n^(-2 tau1)`` as long as
    this beats the ``n^(-1 - tau1)`` term from consecutive differences,
    i.e. for ``tau1 < 1``.
    """
    if not vmodel.terms:
        return TailClass(math.inf, math.nan, "constant")
    lead = vmodel.terms[0]
    if lead.exponent >= 1:
        raise RegimeError("Szego-mapped tail is only classified for tau1 < 1")
    return TailClass(2.0 * lead.exponent, lead.coeff**2, "a")


def szego_sieve_map(vmodel, n_max=None, n0_monotone=None, scan=10**5):
    """Jacobi model of the even measure with Verblunsky coefficients ``vmodel``.

    Parameters
    ----------
    vmodel : VerblunskyModel
    n_max : int, optional
        When given, ``(a_n, b_n)`` for ``1 <= n <= n_max`` are also stored as
        explicit overrides.  Evaluation beyond ``n_max`` always uses the map.
    n0_monotone : int, optional
        Monotonicity start.  By default the smallest index after the last
        violation found on ``[1, scan]``.
    """
    base = CoefficientModel(sieve_source=vmodel)
    if n0_monotone is None:
        n0_monotone = 1
        a, b, ea, eb = base.arrays(1, scan)
        bad = (ea[:-1] < ea[1:]) | (eb[:-1] < eb[1:]) | (ea[:-1] < 0) | (eb[:-1] < 0)
        idx = np.nonzero(bad)[0]
        if idx.size:
            n0_monotone = int(idx[-1]) + 2
    overrides = {}
    if n_max is not None:
        a, b, _, _ = base.arrays(1, n_max)
        overrides = {k + 1: (float(a[k]), float(b[k])) for k in range(n_max)}
    return CoefficientModel(n0_monotone=n0_monotone, overrides=overrides, sieve_source=vmodel)


def monotonicity_certificate(model, horizon):
    """Check ``a_n <= a_{n+1} <= 1`` and ``b_n <= b_{n+1} <= 0`` on ``[N0, horizon]``.

    Comparisons use the defects ``1 - a_n`` and ``-b_n``.
    """
    lo = model.n0_monotone
    start = lo
    while start <= horizon:
        stop = min(horizon + 1, start + _CHUNK)
        _, _, ea, eb = model.arrays(start, stop)
        m = stop - start
        checks = (
            ("a_n <= 1", ea[:m] < 0),
            ("b_n <= 0", eb[:m] < 0),
            ("a_n <= a_{n+1}", (ea[:m] < ea[1:]) & (np.arange(start, stop) < horizon)),
            ("b_n <= b_{n+1}", (eb[:m] < eb[1:]) & (np.arange(start, stop) < horizon)),
        )
        first = None
        for label, mask in checks:
            idx = np.nonzero(mask)[0]
            if idx.size and (first is None or idx[0] + start < first[0]):
                first = (int(idx[0]) + start, label)
        if first is not None:
            return MonotonicityReport(False, first[0], first[1], horizon)
        start = stop
    return MonotonicityReport(True, None, None, horizon)


# -- JSON -----------------------------------------------------------------


def _terms_from(items, ckeys, tkeys):
    out = []
    for item in items:
        if isinstance(item, Mapping):
            c = next((item[k] for k in ckeys if k in item), None)
            t = next((item[k] for k in tkeys if k in item), None)
            if c is None or t is None:
                raise ConfigError(f"bad term {item!r}")
            out.append(PowerLawTerm(float(c), float(t)))
        else:
            out.append(PowerLawTerm(float(item[0]), float(item[1])))
    return tuple(out)


def model_from_dict(d):
    """Build a :class:`CoefficientModel` or :class:`VerblunskyModel` from JSON data."""
    if not isinstance(d, Mapping):
        raise ConfigError("model description must be a JSON object")
    kind = d.get("kind")
    if kind == "verblunsky" or (kind is None and ("terms" in d or "D" in d)):
        if "terms" in d:
            terms = _terms_from(d["terms"], ("D", "c"), ("tau",))
        else:
            terms = (PowerLawTerm(float(d["D"]), float(d["tau"])),)
        shift = float(d.get("n0", d.get("shift", 1.0)))
        if len(terms) == 1 and "terms" not in d:
            return VerblunskyModel.pure(terms[0].coeff, shift, terms[0].exponent)
        return VerblunskyModel(terms=terms, shift=shift)
    unknown = set(d) - {"kind", "a_terms", "b_terms", "n0", "overrides"}
    if unknown:
        raise ConfigError(f"unknown model keys: {sorted(unknown)}")
    return CoefficientModel(
        a_terms=_terms_from(d.get("a_terms", []), ("c",), ("tau",)),
        b_terms=_terms_from(d.get("b_terms", []), ("d", "c"), ("sigma", "tau")),
        n0_monotone=int(d.get("n0", 1)),
        overrides={int(k): tuple(v) for k, v in d.get("overrides", {}).items()},
    )


def load_model(path):
    """Read a model from a JSON file."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read model {path}: {exc}") from exc
    return model_from_dict(data)


def save_model(model, path):
    Path(path).write_text(json.dumps(model.to_dict(), indent=2))
