# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops for the Jacobi recursions.

Every function takes a packed coefficient model (see
``CoefficientModel.packed``) and mirrors the pure-Python versions in
``_pykernels`` exactly, including argument order and return layout.
"""

from libc.math cimport sqrt, pow, log, log1p, exp, frexp, ldexp, fabs
import numpy as np

cdef double INV_SQRT_TINY = 1e-300


cdef struct Model:
    int kind
    int na
    int nb
    int nv
    const double* ac
    const double* at
    const double* bc
    const double* bt
    const double* vc
    const double* vt
    double vshift
    long nov
    const double* ova
    const double* ovb
    const unsigned char* ovm


cdef inline double _npow(double n, double t):
    # n^(-t) with fast paths for the common exponents
    if t == 0.5:
        return 1.0 / sqrt(n)
    elif t == 1.0:
        return 1.0 / n
    elif t == 2.0:
        return 1.0 / (n * n)
    elif t == 1.5:
        return 1.0 / (n * sqrt(n))
    return pow(n, -t)


cdef inline double _alpha(const Model* m, long k):
    cdef double s = 0.0
    cdef int i
    if k < 0:
        return -1.0
    for i in range(m.nv):
        s += m.vc[i] * _npow(<double>k + m.vshift, m.vt[i])
    return -s


cdef inline void _coef(const Model* m, long n, double* a, double* b,
                       double* ea, double* eb):
    cdef double s, p, al2, al1, one_minus_p
    cdef int i
    if n <= 0:
        a[0] = 1.0
        b[0] = 0.0
        ea[0] = 0.0
        eb[0] = 0.0
        return
    if n <= m.nov and m.ovm[n]:
        a[0] = m.ova[n]
        b[0] = m.ovb[n]
        ea[0] = 1.0 - a[0]
        eb[0] = -b[0]
        return
    if m.kind == 0:
        s = 0.0
        for i in range(m.na):
            s += m.ac[i] * _npow(<double>n, m.at[i])
        ea[0] = s
        a[0] = 1.0 - s
        s = 0.0
        for i in range(m.nb):
            s += m.bc[i] * _npow(<double>n, m.bt[i])
        eb[0] = s
        b[0] = -s
    else:
        al2 = _alpha(m, n - 2)
        al1 = _alpha(m, n - 1)
        p = (1.0 - al2) * (1.0 + al1)
        a[0] = sqrt(p)
        one_minus_p = al2 - al1 + al2 * al1
        ea[0] = one_minus_p / (1.0 + a[0])
        b[0] = 0.0
        eb[0] = 0.0


cdef class _Holder:
    # keeps the memoryviews alive while the raw pointers are in use
    cdef const double[::1] ac, at, bc, bt, vc, vt, ova, ovb
    cdef const unsigned char[::1] ovm
    cdef Model m

    def __init__(self, tuple pm):
        (kind, na, ac, at, nb, bc, bt, nv, vc, vt, vshift,
         nov, ova, ovb, ovm) = pm
        self.ac = ac
        self.at = at
        self.bc = bc
        self.bt = bt
        self.vc = vc
        self.vt = vt
        self.ova = ova
        self.ovb = ovb
        self.ovm = ovm
        self.m.kind = kind
        self.m.na = na
        self.m.nb = nb
        self.m.nv = nv
        self.m.ac = &self.ac[0]
        self.m.at = &self.at[0]
        self.m.bc = &self.bc[0]
        self.m.bt = &self.bt[0]
        self.m.vc = &self.vc[0]
        self.m.vt = &self.vt[0]
        self.m.vshift = vshift
        self.m.nov = nov
        self.m.ova = &self.ova[0]
        self.m.ovb = &self.ovb[0]
        self.m.ovm = &self.ovm[0]


def coefficients(tuple pm, long n):
    """Return ``(a, b, 1 - a, -b)`` at index ``n``."""
    cdef _Holder h = _Holder(pm)
    cdef double a, b, ea, eb
    _coef(&h.m, n, &a, &b, &ea, &eb)
    return a, b, ea, eb


def forward(tuple pm, double x, long n, double m_prev, double m_curr,
            long e2, long n_end, bint store):
    """Advance ``(u_{n-1}, u_n) * 2**e2`` to index ``n_end``.

    Returns ``(m_prev, m_curr, e2)`` and, when ``store`` is set, three
    arrays holding the state at every index from ``n`` to ``n_end``.
    """
    cdef _Holder h = _Holder(pm)
    cdef double a, b, ea, eb, a_prev, nxt, big
    cdef int ex
    cdef long k, j
    cdef long length = n_end - n + 1
    cdef double[::1] sp, sc
    cdef long long[::1] se
    if length < 1:
        raise ValueError("n_end must be >= n")
    _coef(&h.m, n - 1, &a_prev, &b, &ea, &eb)
    big = fabs(m_prev) if fabs(m_prev) > fabs(m_curr) else fabs(m_curr)
    if big == 0.0:
        raise ArithmeticError("degenerate solution: both entries vanish")
    frexp(big, &ex)
    m_prev = ldexp(m_prev, -ex)
    m_curr = ldexp(m_curr, -ex)
    e2 += ex
    if store:
        sp = np.empty(length, dtype=np.float64)
        sc = np.empty(length, dtype=np.float64)
        se = np.empty(length, dtype=np.int64)
        sp[0] = m_prev
        sc[0] = m_curr
        se[0] = e2
    j = 1
    for k in range(n, n_end):
        _coef(&h.m, k, &a, &b, &ea, &eb)
        nxt = ((x - b) * m_curr - a_prev * m_prev) / a
        m_prev = m_curr
        m_curr = nxt
        a_prev = a
        big = fabs(m_prev) if fabs(m_prev) > fabs(m_curr) else fabs(m_curr)
        if big > 2.0 or big < 0.5:
            if big == 0.0:
                raise ArithmeticError("degenerate solution: both entries vanish")
            frexp(big, &ex)
            m_prev = ldexp(m_prev, -ex)
            m_curr = ldexp(m_curr, -ex)
            e2 += ex
        if store:
            sp[j] = m_prev
            sc[j] = m_curr
            se[j] = e2
            j += 1
    if store:
        return m_prev, m_curr, e2, np.asarray(sp), np.asarray(sc), np.asarray(se)
    return m_prev, m_curr, e2


def backward(tuple pm, double x, long M, double m_here, double m_next,
             long e2, long n_stop, long n_keep):
    """Run the recursion downward from the state ``(u_M, u_{M+1})``.

    Returns mantissas and binary exponents of ``u_k`` for
    ``n_stop <= k <= n_keep``.
    """
    cdef _Holder h = _Holder(pm)
    cdef double a, b, ea, eb, a_low, b_low, prev, big
    cdef int ex
    cdef long k
    cdef long length = n_keep - n_stop + 1
    cdef double[::1] sm
    cdef long long[::1] se
    if n_keep > M or n_stop > n_keep:
        raise ValueError("need n_stop <= n_keep <= M")
    sm = np.empty(length, dtype=np.float64)
    se = np.empty(length, dtype=np.int64)
    big = fabs(m_here) if fabs(m_here) > fabs(m_next) else fabs(m_next)
    if big == 0.0:
        raise ArithmeticError("degenerate solution: both entries vanish")
    frexp(big, &ex)
    m_here = ldexp(m_here, -ex)
    m_next = ldexp(m_next, -ex)
    e2 += ex
    if M <= n_keep:
        sm[M - n_stop] = m_here
        se[M - n_stop] = e2
    _coef(&h.m, M, &a, &b, &ea, &eb)
    for k in range(M, n_stop, -1):
        _coef(&h.m, k - 1, &a_low, &b_low, &ea, &eb)
        prev = ((x - b) * m_here - a * m_next) / a_low
        m_next = m_here
        m_here = prev
        big = fabs(m_here) if fabs(m_here) > fabs(m_next) else fabs(m_next)
        if big > 2.0 or big < 0.5:
            if big == 0.0:
                raise ArithmeticError("degenerate solution: both entries vanish")
            frexp(big, &ex)
            m_here = ldexp(m_here, -ex)
            m_next = ldexp(m_next, -ex)
            e2 += ex
        if k - 1 <= n_keep:
            sm[k - 1 - n_stop] = m_here
            se[k - 1 - n_stop] = e2
        a = a_low
        b = b_low
    return np.asarray(sm), np.asarray(se)


def forward_extrema(tuple pm, double x, long n, double m_prev, double m_curr,
                    long e2, long n_from, long n_mid, long n_end):
    """Track extremes of ``log(u_{k-1}**2 + u_k**2)`` along a forward run.

    Returns ``(max_all, min_all, max_first, min_first)`` where the first
    pair covers ``[n_from, n_end]`` and the second ``[n_from, n_mid]``.
    """
    cdef _Holder h = _Holder(pm)
    cdef double a, b, ea, eb, a_prev, nxt, big, val
    cdef double LN2 = 0.6931471805599453
    cdef double mx = -1e308, mn = 1e308, mx1 = -1e308, mn1 = 1e308
    cdef int ex
    cdef long k
    _coef(&h.m, n - 1, &a_prev, &b, &ea, &eb)
    for k in range(n, n_end + 1):
        if k >= n_from:
            val = log(m_prev * m_prev + m_curr * m_curr) + 2.0 * LN2 * e2
            if val > mx:
                mx = val
            if val < mn:
                mn = val
            if k <= n_mid:
                if val > mx1:
                    mx1 = val
                if val < mn1:
                    mn1 = val
        if k == n_end:
            break
        _coef(&h.m, k, &a, &b, &ea, &eb)
        nxt = ((x - b) * m_curr - a_prev * m_prev) / a
        m_prev = m_curr
        m_curr = nxt
        a_prev = a
        big = fabs(m_prev) if fabs(m_prev) > fabs(m_curr) else fabs(m_curr)
        if big > 2.0 or big < 0.5:
            if big == 0.0:
                raise ArithmeticError("degenerate solution: both entries vanish")
            frexp(big, &ex)
            m_prev = ldexp(m_prev, -ex)
            m_curr = ldexp(m_curr, -ex)
            e2 += ex
    return mx, mn, mx1, mn1


def shoot_classify(tuple pm, double x, long n0, double t, long n_end):
    """Classify the initial slope ``t`` for ``u_{n0} = 1, u_{n0+1} = t``.

    Returns ``(-1, k)`` if ``u_k <= 0`` occurs, ``(+1, k)`` if the
    solution starts increasing while positive, and ``(0, n_end)`` if
    neither happens before ``n_end``.
    """
    cdef _Holder h = _Holder(pm)
    cdef double a, b, ea, eb, a_prev, u0 = 1.0, u1 = t, nxt
    cdef long k
    if t <= 0.0:
        return -1, n0 + 1
    if t > 1.0:
        return 1, n0
    _coef(&h.m, n0, &a_prev, &b, &ea, &eb)
    for k in range(n0 + 1, n_end):
        _coef(&h.m, k, &a, &b, &ea, &eb)
        nxt = ((x - b) * u1 - a_prev * u0) / a
        a_prev = a
        if nxt <= 0.0:
            return -1, k + 1
        if nxt > u1:
            return 1, k
        u0 = u1
        u1 = nxt
    return 0, n_end


def m_downward(tuple pm, double x, double eta, long n_max,
               double tail_re, double tail_im):
    """Continued-fraction recursion for the Weyl function at ``x + i eta``.

    Starting from ``m^(n_max) = tail``, applies
    ``m^(k-1) = 1/(b_k - z - a_k^2 m^(k))`` down to ``k = 1``.
    Returns ``(Re m, mant, log_acc)`` with ``Im m = mant * exp(log_acc)``.
    For ``eta == 0`` the imaginary part is carried in log space.
    """
    cdef _Holder h = _Holder(pm)
    cdef double a, b, ea, eb, a2, pr, pi, den
    cdef double R = tail_re, I = tail_im, L = 0.0, comp = 0.0, scale = 1.0
    cdef double t, y, lg
    cdef long k
    cdef bint linear = eta > 0.0
    if I <= 0.0:
        raise ArithmeticError("tail closure must have positive imaginary part")
    for k in range(n_max, 0, -1):
        _coef(&h.m, k, &a, &b, &ea, &eb)
        a2 = a * a
        pr = b - x - a2 * R
        if linear:
            pi = eta + a2 * I
        else:
            pi = a2 * I * scale
        den = pr * pr + pi * pi
        if den < INV_SQRT_TINY:
            raise ZeroDivisionError(k)
        R = pr / den
        if linear:
            I = pi / den
        else:
            I = I * (a2 / den)
            if I < 1e-150 or I > 1e150:
                # Neumaier-compensated log accumulator
                lg = log(I)
                t = L + lg
                if fabs(L) >= fabs(lg):
                    comp += (L - t) + lg
                else:
                    comp += (lg - t) + L
                L = t
                I = 1.0
                scale = exp(L + comp)
    return R, I, L + comp


def gamma_sum(tuple pm, double delta, long n_lo, long n_hi):
    """Compensated sum of ``arccosh((x - b_n)/(2 a_n))`` with ``x = 2 - delta``."""
    cdef _Holder h = _Holder(pm)
    cdef double a, b, ea, eb, w, g, s = 0.0, c = 0.0, t
    cdef long n
    for n in range(n_lo, n_hi + 1):
        _coef(&h.m, n, &a, &b, &ea, &eb)
        w = (2.0 * ea + eb - delta) / (2.0 * a)
        if w <= 0.0:
            continue
        g = log1p(w + sqrt(w * (w + 2.0)))
        t = s + g
        if fabs(s) >= fabs(g):
            c += (s - t) + g
        else:
            c += (g - t) + s
        s = t
    return s + c


def phi_recursion(const double[::1] gam, const double[::1] ratio):
    """Iterate the normalised hyperbolic-region recursion.

    ``gam[i]`` and ``ratio[i]`` hold ``gamma_n`` and ``a_{n-1}/a_n`` for
    ``n = N0 + i``.  Returns ``(Phi, phi)``; ``Phi`` has one extra
    trailing entry (index ``N + 1``).
    """
    cdef long L = gam.shape[0]
    cdef double[::1] Phi = np.empty(L + 1, dtype=np.float64)
    cdef double[::1] phi = np.empty(L, dtype=np.float64)
    cdef double p_prev = 0.0, p_curr = 1.0, g_prev = 0.0, cross
    cdef long i
    Phi[0] = 1.0
    for i in range(L):
        cross = ratio[i] * exp(-gam[i] - g_prev) * p_prev
        phi[i] = p_curr - cross
        p_prev, p_curr = p_curr, p_curr + exp(-2.0 * gam[i]) * p_curr - cross
        Phi[i + 1] = p_curr
        g_prev = gam[i]
    return np.asarray(Phi), np.asarray(phi)
