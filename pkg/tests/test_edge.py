import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jacedge.coefficients import power_law_model
from jacedge.edge import (
    band_prediction,
    big_gamma,
    big_gamma_array,
    edge_data,
    gamma_array,
    gamma_from_coeffs,
    gamma_n,
    kappa_n,
    q_sup,
    stable_arccosh1p,
    turning_point,
    write_edge_csv,
)
from jacedge.errors import DomainError, NoTurningPointError, UnsupportedModelError


def test_turning_point_closed_form(inv_model):
    assert turning_point(inv_model, 1.9) == 20
    assert turning_point(inv_model, 1.95) == 40


def test_turning_point_boundary():
    m = power_law_model(a=[(0.25, 0.5)], n0=7)
    a7, b7 = m.coeffs(7)
    assert turning_point(m, b7 + 2 * a7) == 7


@given(st.floats(0.05, 0.5), st.floats(0.3, 1.8), st.floats(1e-5, 0.3))
def test_turning_point_is_maximal(c, tau, delta):
    m = power_law_model(a=[(c, tau)])
    x = 2 - delta
    try:
        N = turning_point(m, x)
    except NoTurningPointError:
        return
    assert sum(m.coeffs(N)) + m.coeffs(N)[0] <= x
    aN1, bN1 = m.coeffs(N + 1)
    assert bN1 + 2 * aN1 > x


def test_turning_point_errors(free, sqrt_model):
    with pytest.raises(UnsupportedModelError):
        turning_point(free, 1.9)
    with pytest.raises(UnsupportedModelError):
        turning_point(power_law_model(overrides={1: (0.5, 0.0)}), 1.9)
    with pytest.raises(NoTurningPointError):
        turning_point(sqrt_model, 1.0)


def test_gamma_values():
    assert gamma_from_coeffs(0.5, 0.0, 2.0) == pytest.approx(math.log(2 + math.sqrt(3)), rel=1e-15)
    assert stable_arccosh1p(0.0) == 0.0
    w = 1e-12
    assert stable_arccosh1p(w) == pytest.approx(math.sqrt(2 * w) * (1 - w / 12), rel=1e-6)
    assert big_gamma(power_law_model(a=[(0.125, 1.0)]), 1) == pytest.approx(math.acosh(8 / 7), rel=1e-14)
    with pytest.raises(DomainError):
        stable_arccosh1p(-1e-3)


def test_gamma_n_domain(inv_model):
    assert gamma_n(inv_model, 1.9, 20) >= 0
    with pytest.raises(DomainError):
        gamma_n(inv_model, 1.9, 21)


def test_big_gamma_asymptotics(free):
    assert np.all(big_gamma_array(free, 1, 100) == 0)
    C, tau = 0.3, 0.6
    m = power_law_model(a=[(C, tau)])
    n = 10**7
    assert big_gamma(m, n) / (math.sqrt(2 * C) * n ** (-tau / 2)) == pytest.approx(1, rel=1e-3)


def test_edge_data_h(inv_model):
    ed = edge_data(inv_model, 1.9)
    assert ed.N == 20
    assert ed.h == pytest.approx(math.log(20 * 462 * math.sqrt(0.1)), rel=1e-12)
    assert 0 < ed.kappa_next < math.pi / 2
    assert ed.kappa_inf == pytest.approx(math.acos(0.95))


def test_g_matches_naive(sqrt_model):
    x = 1.999
    ed = edge_data(sqrt_model, x, keep_gammas=True)
    naive = 0.0
    for n in range(sqrt_model.n0, ed.N + 1):
        a, b = sqrt_model.coeffs(n)
        naive += math.acosh((x - b) / (2 * a))
    assert ed.g == pytest.approx(math.fsum(ed.gammas), rel=1e-12)
    assert ed.g == pytest.approx(naive, rel=1e-8)


def test_gamma_monotone_and_lemma(sqrt_model):
    for x in (1.9, 1.99, 1.999):
        N = turning_point(sqrt_model, x)
        g = gamma_array(sqrt_model, x, 1, N)
        a = sqrt_model.arrays(1, N)[0]
        assert np.all(np.diff(g) <= 1e-12)
        lo, hi = a * np.exp(-g), a * np.exp(g)
        assert np.all(lo[:-1] <= lo[1:] * (1 + 1e-12))
        assert np.all(hi[:-1] * (1 + 1e-12) >= hi[1:])
    assert np.all(gamma_array(sqrt_model, 1.99, 1, 50) <= gamma_array(sqrt_model, 1.995, 1, 50))


def test_kappa_bound(sqrt_model):
    for d in np.logspace(-4, -1, 7):
        x = 2 - d
        N = turning_point(sqrt_model, x)
        a1, b1 = sqrt_model.coeffs(N + 1)
        a2, b2 = sqrt_model.coeffs(N + 2)
        rhs = (b2 - b1 + 2 * a2 - 2 * a1) / sqrt_model.coeffs(sqrt_model.n0)[0]
        assert kappa_n(sqrt_model, x, N + 2) ** 2 >= rhs * (1 - 1e-9)


@pytest.mark.parametrize("a,b", [([(0.25, 0.5)], []), ([], [(0.5, 1.0)]), ([(0.2, 1.5)], [])])
def test_scaling_laws(a, b):
    m = power_law_model(a=a, b=b)
    from jacedge.coefficients import tail_class

    beta = tail_class(m).beta
    r1, r2, r3 = [], [], []
    for d in np.logspace(-4, -1, 10):
        ed = edge_data(m, 2 - d)
        r1.append(ed.N * d ** (1 / beta))
        r2.append(m.increment(ed.N + 1) * d ** (-1 - 1 / beta))
        r3.append(math.exp(ed.h) * d ** (0.5 + 2 / beta))
    for r in (r1, r2, r3):
        assert max(r) / min(r) < 10


def test_band(sqrt_model):
    centres = []
    for d in np.logspace(-4, -1, 10):
        c, w = band_prediction(sqrt_model, 2 - d)
        assert w > 0 and math.isfinite(c)
        assert w / abs(math.log(d)) < 20
        centres.append(c)
    assert np.all(np.diff(centres) > 0)  # centre decreases as x moves up to 2


def test_q_sup():
    assert q_sup(0.01) == pytest.approx(0.0066667, abs=1e-5)
    assert q_sup(0.1) == pytest.approx(2 / 30, abs=1e-3)
    assert math.isfinite(q_sup(1.5))
    with pytest.raises(DomainError):
        q_sup(math.pi / 2)


def test_edge_csv(tmp_path, inv_model):
    p = tmp_path / "edge.csv"
    write_edge_csv(inv_model, [1.9, 1.95], p)
    lines = p.read_text().splitlines()
    assert lines[0] == "x,N,g,h,kappa_next"
    assert lines[1].split(",")[1] == "20"
