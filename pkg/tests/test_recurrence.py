import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from jacedge.coefficients import power_law_model
from jacedge.edge import edge_data
from jacedge.errors import DegenerateSolutionError, JacEdgeError, PreconditionError
from jacedge.recurrence import (
    ScaledSolution,
    dirichlet,
    dirichlet_subordinacy_check,
    oscillatory_diagnostics,
    phi_diagnostics,
    solve,
    step,
    subordinate_at_edge,
    transfer_matrix,
    wronskian,
    wronskian_drift,
)


def _values(traj):
    return traj.m_curr * np.exp2(traj.e2)


def test_step_free(free):
    s = ScaledSolution(u_curr=2.0, u_prev=1.0, log_scale=0.0, index=2)
    s3 = step(s, free, 2.0)
    assert math.exp(s3.log_scale) * s3.u_curr == pytest.approx(3.0)
    s = ScaledSolution(u_curr=0.0, u_prev=1.0, log_scale=0.0, index=2)
    s3 = step(s, free, 0.0)
    assert math.exp(s3.log_scale) * s3.u_curr == pytest.approx(-1.0)


def test_step_renormalises(free):
    s = ScaledSolution(u_curr=1.0, u_prev=0.0, log_scale=0.0, index=1)
    for _ in range(50):
        s = step(s, free, 2.0)
        assert 0.5 <= max(abs(s.u_curr), abs(s.u_prev)) <= 2.0
    assert s.log_abs() == pytest.approx(math.log(51))


def test_step_degenerate(free):
    with pytest.raises(DegenerateSolutionError):
        step(ScaledSolution(0.0, 0.0, 0.0, 3), free, 1.0)


def test_dirichlet_free_edge(free):
    tr = dirichlet(free, 2.0, 200, materialize=True)
    assert np.allclose(_values(tr), tr.index, rtol=1e-14)


def test_dirichlet_free_centre(free):
    tr = dirichlet(free, 0.0, 12, materialize=True)
    assert np.allclose(_values(tr), [1, 0, -1, 0] * 3, atol=1e-15)


def test_dirichlet_chebyshev(cheb):
    tr = dirichlet(cheb, 2.0, 1000, materialize=True)
    v = _values(tr)
    assert v[0] == 1.0
    assert np.allclose(v[1:], math.sqrt(2.0), rtol=1e-12)


def test_wronskian_examples(free):
    u = dirichlet(free, 2.0, 50)
    v = solve(free, 2.0, ScaledSolution(1.0, 1.0, 0.0, 1), 50)
    w = wronskian(u, v, free)
    assert w.value == pytest.approx(1.0, rel=1e-14)
    assert wronskian(u, u, free).value == 0.0
    a = solve(free, 0.0, ScaledSolution(0.0, 1.0, 0.0, 1), 1000)
    b = solve(free, 0.0, ScaledSolution(1.0, 0.0, 0.0, 1), 1000)
    assert wronskian(a, b, free).value == pytest.approx(-1.0, rel=1e-13)


@given(st.floats(0.05, 0.25), st.floats(0.3, 1.8), st.floats(-1.9, 1.5))
def test_wronskian_constancy_bulk(c, tau, x):
    # no hyperbolic region: the Wronskian is conserved to rounding level
    m = power_law_model(a=[(c, tau)])
    d = wronskian_drift(m, x, ScaledSolution(1.0, 0.0, 0.0, 1), ScaledSolution(0.3, 1.0, 0.0, 1), 20_000)
    assert d <= 1e-10


@given(st.floats(0.05, 0.45), st.floats(0.5, 1.8), st.floats(1.5, 1.999))
def test_wronskian_drift_conditioning(c, tau, x):
    m = power_law_model(a=[(c, tau)])
    try:
        g = edge_data(m, x).g
    except JacEdgeError:
        g = 0.0
    d = wronskian_drift(m, x, ScaledSolution(1.0, 0.0, 0.0, 1), ScaledSolution(0.3, 1.0, 0.0, 1), 20_000)
    bound = 1e-12 + 1e4 * 2.2e-16 * math.exp(2 * g) / math.sin(math.acos(x / 2)) ** 2
    assert d <= bound


@given(st.floats(0.05, 0.45), st.floats(0.3, 1.8), st.floats(-2.0, 2.0), st.integers(1, 10**6))
def test_transfer_determinant(c, tau, x, n):
    m = power_law_model(a=[(c, tau)], b=[(0.2, tau + 0.5)])
    assert abs(np.linalg.det(transfer_matrix(m, x, n)) - 1) <= 1e-14


def test_subordinate_free(free):
    cert = subordinate_at_edge(free, horizon=2000)
    assert np.allclose(cert.v, 1.0, rtol=1e-9)
    assert np.all(cert.gamma_caps == 0)
    assert cert.holds and cert.c_lower <= 1 <= cert.c_upper


def test_subordinate_sqrt(sqrt_model):
    cert = subordinate_at_edge(sqrt_model, horizon=10**5)
    assert cert.holds and cert.monotone_ok
    assert cert.agreement <= 1e-8
    sg = np.cumsum(cert.gamma_caps)
    # log v is -sum Gamma up to O(log n)
    assert np.max(np.abs(cert.log_v + sg)[100:] / np.log(cert.n[100:])) < 3


def test_subordinate_eventual_monotone():
    m = power_law_model(a=[(0.25, 0.5)], n0=2, overrides={1: (0.75, 0.3)})
    cert = subordinate_at_edge(m, horizon=10**4)
    assert cert.holds


def test_subordinate_precondition():
    m = power_law_model(a=[(0.25, 0.5)], overrides={5: (1.5, 0.0)})
    with pytest.raises(PreconditionError):
        subordinate_at_edge(m, horizon=1000)


def test_subordinacy_check(free, cheb, sqrt_model):
    assert dirichlet_subordinacy_check(free, 10**4).status == "not-subordinate"
    r = dirichlet_subordinacy_check(cheb, 10**4)
    assert r.status == "subordinate" and r.not_subordinate is False
    r = dirichlet_subordinacy_check(sqrt_model, 10**5)
    assert r.not_subordinate is True and r.log_ratio.size > 0


def test_phi_free_limit():
    from jacedge._backend import kernels

    L = 50
    Phi, phi = kernels.phi_recursion(np.zeros(L), np.ones(L))
    assert np.allclose(Phi, np.arange(1, L + 2))


@pytest.mark.parametrize("x", [1.5, 1.9, 1.99])
def test_phi_bounds(inv_model, sqrt_model, x):
    for m in (inv_model, sqrt_model):
        d = phi_diagnostics(m, x)
        assert d.ok, d.checks
        assert d.Phi[0] == 1.0 and d.phi[0] == 1.0


def test_phi_inv_range(inv_model):
    d = phi_diagnostics(inv_model, 1.9)
    assert d.N == 20 and d.Phi.size == 20 - d.n0 + 2


def test_oscillatory_free():
    from jacedge.coefficients import free_model

    m = free_model()
    tr = solve(m, 1.0, ScaledSolution(1.0, 0.5, 0.0, 1), 200, materialize=True)
    d = oscillatory_diagnostics(m, 1.0, tr)
    assert np.ptp(d.log_abs_Y) < 1e-12
    assert d.ok


def test_oscillatory_inv(inv_model):
    tr = dirichlet(inv_model, 1.9, 10**4, materialize=True)
    d = oscillatory_diagnostics(inv_model, 1.9, tr)
    assert d.sandwich_ok and d.amplitude_ok and d.ratio_ok
    assert d.n[0] == 21


def test_trajectory_csv(tmp_path, free):
    tr = dirichlet(free, 2.0, 10, materialize=True)
    p = tmp_path / "t.csv"
    tr.to_csv(p)
    rows = p.read_text().splitlines()
    assert rows[0] == "n,mantissa,log_scale" and len(rows) == 11
