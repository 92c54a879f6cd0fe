"""Pure-Python versions of the hot loops in ``_ckernels``.

Same signatures and return layouts as the compiled module.  They are
selected automatically when the extension is not built and are used by
the benchmark and the cross-backend tests.
"""

import math

import numpy as np

_LN2 = math.log(2.0)


def _npow(n, t):
    if t == 0.5:
        return 1.0 / math.sqrt(n)
    if t == 1.0:
        return 1.0 / n
    if t == 2.0:
        return 1.0 / (n * n)
    if t == 1.5:
        return 1.0 / (n * math.sqrt(n))
    return n ** (-t)


def _make_coef(pm):
    (kind, na, ac, at, nb, bc, bt, nv, vc, vt, vshift, nov, ova, ovb, ovm) = pm
    ac = [float(v) for v in ac[:na]]
    at = [float(v) for v in at[:na]]
    bc = [float(v) for v in bc[:nb]]
    bt = [float(v) for v in bt[:nb]]
    vc = [float(v) for v in vc[:nv]]
    vt = [float(v) for v in vt[:nv]]
    ova = [float(v) for v in ova]
    ovb = [float(v) for v in ovb]
    ovm = [bool(v) for v in ovm]
    a_terms = list(zip(ac, at))
    b_terms = list(zip(bc, bt))
    v_terms = list(zip(vc, vt))

    def alpha(k):
        if k < 0:
            return -1.0
        s = 0.0
        for c, t in v_terms:
            s += c * _npow(k + vshift, t)
        return -s

    def coef(n):
        if n <= 0:
            return 1.0, 0.0, 0.0, 0.0
        if n <= nov and ovm[n]:
            a = ova[n]
            b = ovb[n]
            return a, b, 1.0 - a, -b
        if kind == 0:
            ea = 0.0
            for c, t in a_terms:
                ea += c * _npow(n, t)
            eb = 0.0
            for c, t in b_terms:
                eb += c * _npow(n, t)
            return 1.0 - ea, -eb, ea, eb
        al2 = alpha(n - 2)
        al1 = alpha(n - 1)
        a = math.sqrt((1.0 - al2) * (1.0 + al1))
        ea = (al2 - al1 + al2 * al1) / (1.0 + a)
        return a, 0.0, ea, 0.0

    return coef


def _renorm(p, q, e2):
    big = max(abs(p), abs(q))
    if big == 0.0:
        raise ArithmeticError("degenerate solution: both entries vanish")
    _, ex = math.frexp(big)
    return math.ldexp(p, -ex), math.ldexp(q, -ex), e2 + ex


def coefficients(pm, n):
    """Return ``(a, b, 1 - a, -b)`` at index ``n``."""
    return _make_coef(pm)(n)


def forward(pm, x, n, m_prev, m_curr, e2, n_end, store):
    """Advance ``(u_{n-1}, u_n) * 2**e2`` to index ``n_end``."""
    if n_end < n:
        raise ValueError("n_end must be >= n")
    coef = _make_coef(pm)
    a_prev = coef(n - 1)[0]
    m_prev, m_curr, e2 = _renorm(m_prev, m_curr, e2)
    if store:
        length = n_end - n + 1
        sp = np.empty(length)
        sc = np.empty(length)
        se = np.empty(length, dtype=np.int64)
        sp[0], sc[0], se[0] = m_prev, m_curr, e2
    j = 1
    for k in range(n, n_end):
        a, b, _, _ = coef(k)
        nxt = ((x - b) * m_curr - a_prev * m_prev) / a
        m_prev, m_curr = m_curr, nxt
        a_prev = a
        big = max(abs(m_prev), abs(m_curr))
        if big > 2.0 or big < 0.5:
            m_prev, m_curr, e2 = _renorm(m_prev, m_curr, e2)
        if store:
            sp[j], sc[j], se[j] = m_prev, m_curr, e2
            j += 1
    if store:
        return m_prev, m_curr, e2, sp, sc, se
    return m_prev, m_curr, e2


def backward(pm, x, M, m_here, m_next, e2, n_stop, n_keep):
    """Run the recursion downward from the state ``(u_M, u_{M+1})``."""
    if n_keep > M or n_stop > n_keep:
        raise ValueError("need n_stop <= n_keep <= M")
    coef = _make_coef(pm)
    length = n_keep - n_stop + 1
    sm = np.empty(length)
    se = np.empty(length, dtype=np.int64)
    m_here, m_next, e2 = _renorm(m_here, m_next, e2)
    if M <= n_keep:
        sm[M - n_stop], se[M - n_stop] = m_here, e2
    a, b, _, _ = coef(M)
    for k in range(M, n_stop, -1):
        a_low, b_low, _, _ = coef(k - 1)
        prev = ((x - b) * m_here - a * m_next) / a_low
        m_next, m_here = m_here, prev
        big = max(abs(m_here), abs(m_next))
        if big > 2.0 or big < 0.5:
            m_here, m_next, e2 = _renorm(m_here, m_next, e2)
        if k - 1 <= n_keep:
            sm[k - 1 - n_stop], se[k - 1 - n_stop] = m_here, e2
        a, b = a_low, b_low
    return sm, se


def forward_extrema(pm, x, n, m_prev, m_curr, e2, n_from, n_mid, n_end):
    """Track extremes of ``log(u_{k-1}**2 + u_k**2)`` along a forward run."""
    coef = _make_coef(pm)
    a_prev = coef(n - 1)[0]
    mx = mx1 = -1e308
    mn = mn1 = 1e308
    for k in range(n, n_end + 1):
        if k >= n_from:
            val = math.log(m_prev * m_prev + m_curr * m_curr) + 2.0 * _LN2 * e2
            mx = max(mx, val)
            mn = min(mn, val)
            if k <= n_mid:
                mx1 = max(mx1, val)
                mn1 = min(mn1, val)
        if k == n_end:
            break
        a, b, _, _ = coef(k)
        nxt = ((x - b) * m_curr - a_prev * m_prev) / a
        m_prev, m_curr = m_curr, nxt
        a_prev = a
        big = max(abs(m_prev), abs(m_curr))
        if big > 2.0 or big < 0.5:
            m_prev, m_curr, e2 = _renorm(m_prev, m_curr, e2)
    return mx, mn, mx1, mn1


def shoot_classify(pm, x, n0, t, n_end):
    """Classify the initial slope ``t`` for ``u_{n0} = 1, u_{n0+1} = t``."""
    if t <= 0.0:
        return -1, n0 + 1
    if t > 1.0:
        return 1, n0
    coef = _make_coef(pm)
    a_prev = coef(n0)[0]
    u0, u1 = 1.0, t
    for k in range(n0 + 1, n_end):
        a, b, _, _ = coef(k)
        nxt = ((x - b) * u1 - a_prev * u0) / a
        a_prev = a
        if nxt <= 0.0:
            return -1, k + 1
        if nxt > u1:
            return 1, k
        u0, u1 = u1, nxt
    return 0, n_end


def m_downward(pm, x, eta, n_max, tail_re, tail_im):
    """Continued-fraction recursion for the Weyl function at ``x + i eta``."""
    coef = _make_coef(pm)
    R, I = tail_re, tail_im
    if I <= 0.0:
        raise ArithmeticError("tail closure must have positive imaginary part")
    L = 0.0
    comp = 0.0
    scale = 1.0
    linear = eta > 0.0
    for k in range(n_max, 0, -1):
        a, b, _, _ = coef(k)
        a2 = a * a
        pr = b - x - a2 * R
        pi = eta + a2 * I if linear else a2 * I * scale
        den = pr * pr + pi * pi
        if den < 1e-300:
            raise ZeroDivisionError(k)
        R = pr / den
        if linear:
            I = pi / den
        else:
            I = I * (a2 / den)
            if I < 1e-150 or I > 1e150:
                lg = math.log(I)
                t = L + lg
                if abs(L) >= abs(lg):
                    comp += (L - t) + lg
                else:
                    comp += (lg - t) + L
                L = t
                I = 1.0
                scale = math.exp(L + comp)
    return R, I, L + comp


def gamma_sum(pm, delta, n_lo, n_hi):
    """Compensated sum of ``arccosh((x - b_n)/(2 a_n))`` with ``x = 2 - delta``."""
    coef = _make_coef(pm)
    s = 0.0
    c = 0.0
    for n in range(n_lo, n_hi + 1):
        a, _, ea, eb = coef(n)
        w = (2.0 * ea + eb - delta) / (2.0 * a)
        if w <= 0.0:
            continue
        g = math.log1p(w + math.sqrt(w * (w + 2.0)))
        t = s + g
        if abs(s) >= abs(g):
            c += (s - t) + g
        else:
            c += (g - t) + s
        s = t
    return s + c


def phi_recursion(gam, ratio):
    """Iterate the normalised hyperbolic-region recursion."""
    L = len(gam)
    Phi = np.empty(L + 1)
    phi = np.empty(L)
    p_prev, p_curr, g_prev = 0.0, 1.0, 0.0
    Phi[0] = 1.0
    for i in range(L):
        g = float(gam[i])
        cross = float(ratio[i]) * math.exp(-g - g_prev) * p_prev
        phi[i] = p_curr - cross
        p_prev, p_curr = p_curr, p_curr + math.exp(-2.0 * g) * p_curr - cross
        Phi[i + 1] = p_curr
        g_prev = g
    return Phi, phi
