# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled propagation kernel: C twin of qcloak._kernel_py.

Same contract and numerics as the pure-Python module; see its docstring.
"""

from libc.math cimport (INFINITY, M_PI, ceil, copysign, cos, exp, expm1,
                        fabs, hypot, log, sin, sqrt)
from libc.stdlib cimport free, malloc

from ._kernel_py import KernelResult

cdef double _PHASE_CAP = 2.0
cdef double _POWER_RATIO_CAP = 1.25
cdef double _EPS_ORIGIN = 1e-6
cdef double _NORM_CEIL = 1e250
cdef double _NORM_SHIFT = 100.0 * 2.302585092994045684
cdef double _RENORM = 1e250

cdef double[8] G8N
cdef double[8] G8W
G8N[0] = -0.9602898564975363; G8N[1] = -0.7966664774136267
G8N[2] = -0.5255324099163290; G8N[3] = -0.1834346424956498
G8N[4] = 0.1834346424956498;  G8N[5] = 0.5255324099163290
G8N[6] = 0.7966664774136267;  G8N[7] = 0.9602898564975363
G8W[0] = 0.1012285362903763;  G8W[1] = 0.2223810344533745
G8W[2] = 0.3137066458778873;  G8W[3] = 0.3626837833783620
G8W[4] = 0.3626837833783620;  G8W[5] = 0.3137066458778873
G8W[6] = 0.2223810344533745;  G8W[7] = 0.1012285362903763


cdef void jy_pair(int l, double x, double* out) nogil:
    """out = (j_{l-1}, j_l, y_{l-1}, y_l)."""
    cdef double sx = sin(x), cx = cos(x)
    cdef double j0 = sx / x, y0 = -cx / x
    cdef double j1, y1, jm, j, ym, y, fm, f, fp, target, target_m, scale
    cdef int n, n_start
    if l == 0:
        out[0] = cx / x; out[1] = j0; out[2] = sx / x; out[3] = y0
        return
    j1 = sx / (x * x) - cx / x
    y1 = -cx / (x * x) - sx / x
    ym = y0; y = y1
    for n in range(1, l):
        fm = (2 * n + 1) / x * y - ym
        ym = y; y = fm
    if l == 1:
        ym = y0; y = y1
    out[2] = ym; out[3] = y

    if x >= l + 1:
        jm = j0; j = j1
        for n in range(1, l):
            fm = (2 * n + 1) / x * j - jm
            jm = j; j = fm
        if l == 1:
            jm = j0; j = j1
        out[0] = jm; out[1] = j
        return

    n_start = l + 18 + <int>(2.0 * sqrt(<double>l))
    fp = 0.0
    f = 1e-40
    target = 0.0
    target_m = 0.0
    for n in range(n_start, 0, -1):
        fm = (2 * n + 1) / x * f - fp
        fp = f; f = fm
        if n - 1 == l:
            target = f
        if n == l:
            target_m = f
        if fabs(f) > _RENORM:
            f /= _RENORM; fp /= _RENORM
            target /= _RENORM; target_m /= _RENORM
    scale = j0 / f
    out[0] = target_m * scale
    out[1] = target * scale


cdef double khat_closed(int n, double x) nogil:
    cdef double term = 1.0, acc = 1.0
    cdef int m
    for m in range(n):
        term *= (n - m) * (n + m + 1) / (2.0 * x * (m + 1))
        acc += term
    return M_PI / (2.0 * x) * acc


cdef double ihat_closed(int n, double x) nogil:
    cdef double term_p = 1.0, term_q = 1.0, p = 1.0, q = 1.0, c, sign
    cdef int m
    for m in range(n):
        c = (n - m) * (n + m + 1) / (2.0 * x * (m + 1))
        term_p *= -c
        term_q *= c
        p += term_p
        q += term_q
    sign = 1.0 if (n + 1) % 2 == 0 else -1.0
    return (p + sign * exp(-2.0 * x) * q) / (2.0 * x)


cdef void ik_pair_scaled(int l, double x, double* out) nogil:
    """out = (ihat_{l-1}, ihat_l, khat_{l-1}, khat_l)."""
    cdef double i0 = -expm1(-2.0 * x) / (2.0 * x)
    cdef double im1 = (1.0 + exp(-2.0 * x)) / (2.0 * x)
    cdef double k0 = M_PI / (2.0 * x)
    cdef double top, fp, f, fm, target, target_m, scale
    cdef int n, n_start
    if l == 0:
        out[0] = im1; out[1] = i0; out[2] = k0; out[3] = k0
        return
    out[2] = khat_closed(l - 1, x)
    out[3] = khat_closed(l, x)
    if x >= l * (l + 1.0):
        out[0] = ihat_closed(l - 1, x)
        out[1] = ihat_closed(l, x)
        return
    top = x if x > l else <double>l
    n_start = <int>top + 20 + <int>(2.0 * sqrt(top))
    fp = 0.0
    f = 1e-40
    target = 0.0
    target_m = 0.0
    for n in range(n_start, 0, -1):
        fm = (2 * n + 1) / x * f + fp
        fp = f; f = fm
        if n - 1 == l:
            target = f
        if n == l:
            target_m = f
        if fabs(f) > _RENORM:
            f /= _RENORM; fp /= _RENORM
            target /= _RENORM; target_m /= _RENORM
    scale = i0 / f
    out[0] = target_m * scale
    out[1] = target * scale


cdef struct Local:
    int kind          # 0 power, 1 oscillatory, -1 evanescent
    int l
    double k
    double a
    double A
    double B


cdef void local_init(Local* loc, int l, double k2, double a, double va,
                     double dva, bint power) nogil:
    cdef double k, kap, x, F, Fp, G, Gp, det
    cdef double[4] b
    loc.l = l
    loc.a = a
    if power:
        loc.kind = 0
        loc.k = 0.0
        loc.A = (a * dva + l * va) / (2 * l + 1)
        loc.B = ((l + 1) * va - a * dva) / (2 * l + 1)
    elif k2 > 0.0:
        loc.kind = 1
        k = sqrt(k2)
        loc.k = k
        x = k * a
        jy_pair(l, x, b)
        F = x * b[1]
        Fp = x * b[0] - l * b[1]
        G = -x * b[3]
        Gp = -(x * b[2] - l * b[3])
        loc.A = (dva * G - va * k * Gp) / k
        loc.B = (va * k * Fp - F * dva) / k
    else:
        loc.kind = -1
        kap = sqrt(-k2)
        loc.k = kap
        x = kap * a
        ik_pair_scaled(l, x, b)
        F = x * b[1]
        Fp = x * b[0] - l * b[1]
        G = x * b[3]
        Gp = -x * b[2] - l * b[3]
        det = kap * (F * Gp - Fp * G)
        loc.A = (va * kap * Gp - dva * G) / det
        loc.B = (dva * F - va * kap * Fp) / det


cdef void local_eval(Local* loc, double rho, double* v, double* dv) nogil:
    cdef int l = loc.l
    cdef double t, tp, tm, x, F, Fp, G, Gp, d, ep, em
    cdef double[4] b
    if loc.kind == 0:
        t = rho / loc.a
        tp = t ** (l + 1)
        tm = t ** (-l)
        v[0] = loc.A * tp + loc.B * tm
        dv[0] = ((l + 1) * loc.A * tp / t - l * loc.B * tm / t) / loc.a
        return
    x = loc.k * rho
    if loc.kind == 1:
        jy_pair(l, x, b)
        F = x * b[1]
        Fp = x * b[0] - l * b[1]
        G = -x * b[3]
        Gp = -(x * b[2] - l * b[3])
        v[0] = loc.A * F + loc.B * G
        dv[0] = loc.k * (loc.A * Fp + loc.B * Gp)
        return
    ik_pair_scaled(l, x, b)
    d = x - loc.k * loc.a
    ep = exp(d)
    em = exp(-d)
    F = x * b[1] * ep
    Fp = (x * b[0] - l * b[1]) * ep
    G = x * b[3] * em
    Gp = (-x * b[2] - l * b[3]) * em
    v[0] = loc.A * F + loc.B * G
    dv[0] = loc.k * (loc.A * Fp + loc.B * Gp)


cdef double panel(Local* loc, double lo, double hi) nogil:
    cdef double mid = 0.5 * (lo + hi)
    cdef double half = 0.5 * (hi - lo)
    cdef double acc = 0.0
    cdef double v, dv
    cdef int i
    for i in range(8):
        local_eval(loc, mid + half * G8N[i], &v, &dv)
        acc += G8W[i] * v * v
    return acc * half


cdef inline bint use_power(double k2, double a, double b) nogil:
    return fabs(k2) * b * (b - a) < 1e-14


cdef inline int substeps(double a, double b, double k2, bint power) nogil:
    cdef int n
    if power:
        n = <int>ceil(log(b / a) / log(_POWER_RATIO_CAP))
    else:
        n = <int>ceil(sqrt(fabs(k2)) * (b - a) / _PHASE_CAP)
    return n if n > 1 else 1


def propagate(int l, r, k2, w, double r_core=1.0, bint want_norms=True,
              sample_r=None):
    """See qcloak._kernel_py.propagate; identical contract."""
    cdef int n_shell = len(k2)
    cdef int n_samp = len(sample_r) if sample_r is not None else 0
    cdef double* rb = <double*>malloc((n_shell + 1) * sizeof(double))
    cdef double* k2b = <double*>malloc(n_shell * sizeof(double))
    cdef double* wb = <double*>malloc(n_shell * sizeof(double))
    cdef double* gamb = <double*>malloc(n_shell * sizeof(double))
    cdef double* sampr = <double*>malloc(n_samp * sizeof(double)) if n_samp else NULL
    cdef double* sampv = <double*>malloc(n_samp * sizeof(double)) if n_samp else NULL
    cdef double* sampl = <double*>malloc(n_samp * sizeof(double)) if n_samp else NULL
    cdef int i
    for i in range(n_shell + 1):
        rb[i] = r[i]
    for i in range(n_shell):
        k2b[i] = k2[i]
        wb[i] = w[i]
    for i in range(n_samp):
        sampr[i] = sample_r[i]

    cdef double r_eps = _EPS_ORIGIN
    if 0.5 * rb[1] < r_eps:
        r_eps = 0.5 * rb[1]
    cdef double h = hypot(r_eps, l + 1.0)
    cdef double p = r_eps / h
    cdef double q = (l + 1.0) / h
    cdef double lam = 0.0
    cdef double i_core = 0.0, i_total = 0.0, i_logoff = 0.0
    cdef bint overflow = False
    cdef int si = 0
    cdef int ish, isub, nsub
    cdef bint power
    cdef double a, b, sa, sb, m, dlam, f, add_core, add_total, scale, ratio
    cdef double sa_s, scratch
    cdef Local loc

    with nogil:
        for ish in range(n_shell):
            a = rb[ish] if ish > 0 else r_eps
            b = rb[ish + 1]
            if ish > 0 and wb[ish] != wb[ish - 1]:
                q = (wb[ish - 1] / wb[ish]) * (q - p / a) + p / a
                m = hypot(p, q)
                p /= m
                q /= m
                lam += log(m)
                if want_norms:
                    f = 1.0 / (m * m)
                    i_core *= f
                    i_total *= f
            power = use_power(k2b[ish], a, b)
            nsub = substeps(a, b, k2b[ish], power)
            ratio = b / a
            for isub in range(nsub):
                if power:
                    sa = a * ratio ** (<double>isub / nsub)
                    sb = a * ratio ** (<double>(isub + 1) / nsub)
                else:
                    sa = a + (b - a) * isub / nsub
                    sb = a + (b - a) * (isub + 1) / nsub
                local_init(&loc, l, k2b[ish], sa, p, q, power)
                if want_norms:
                    add_core = 0.0
                    add_total = 0.0
                    if sa < r_core < sb:
                        add_core = panel(&loc, sa, r_core)
                        add_total = add_core + panel(&loc, r_core, sb)
                    elif sb <= r_core:
                        add_core = panel(&loc, sa, sb)
                        add_total = add_core
                    else:
                        add_total = panel(&loc, sa, sb)
                    scale = exp(-i_logoff) if i_logoff != 0.0 else 1.0
                    i_core += add_core * scale
                    i_total += add_total * scale
                while si < n_samp and sampr[si] <= sb + 1e-15:
                    sa_s = sampr[si]
                    if sa_s < r_eps:
                        sa_s = r_eps
                    local_eval(&loc, sa_s, &sampv[si], &scratch)
                    sampl[si] = lam
                    si += 1
                local_eval(&loc, sb, &p, &q)
                m = hypot(p, q)
                p /= m
                q /= m
                dlam = log(m)
                lam += dlam
                if want_norms:
                    f = exp(-2.0 * dlam)
                    i_core *= f
                    i_total *= f
                    if i_total > _NORM_CEIL:
                        i_core *= exp(-_NORM_SHIFT)
                        i_total *= exp(-_NORM_SHIFT)
                        i_logoff += _NORM_SHIFT
                        overflow = True
            gamb[ish] = q / p if p != 0.0 else copysign(INFINITY, q)

    gam_v = [gamb[i] for i in range(n_shell)]
    out = None
    if sample_r is not None:
        out = []
        for i in range(n_samp):
            d = sampl[i] - lam
            if d > 700.0:
                d = 700.0
            out.append(sampv[i] * exp(d))
    res = KernelResult(p, q, gam_v, i_core, i_total, i_logoff, out, overflow)
    free(rb); free(k2b); free(wb); free(gamb)
    if n_samp:
        free(sampr); free(sampv); free(sampl)
    return res


def shell_transfer(int l, double a, double b, double k2):
    """2x2 transfer of (v, v') across a uniform shell; det = 1 invariant."""
    cdef double p, q, sa, sb
    cdef bint power = use_power(k2, a, b)
    cdef int nsub = substeps(a, b, k2, power)
    cdef int isub, col
    cdef Local loc
    cols = []
    for col in range(2):
        p = 1.0 if col == 0 else 0.0
        q = 0.0 if col == 0 else 1.0
        for isub in range(nsub):
            if power:
                sa = a * (b / a) ** (<double>isub / nsub)
                sb = a * (b / a) ** (<double>(isub + 1) / nsub)
            else:
                sa = a + (b - a) * isub / nsub
                sb = a + (b - a) * (isub + 1) / nsub
            local_init(&loc, l, k2, sa, p, q, power)
            local_eval(&loc, sb, &p, &q)
        cols.append((p, q))
    return [[cols[0][0], cols[1][0]], [cols[0][1], cols[1][1]]]
