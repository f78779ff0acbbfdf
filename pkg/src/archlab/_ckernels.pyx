# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled convolution kernel.

Same contract and algorithm as ``_pykernels``: P(z1 + z2 <= tau) for the
coded family via

    f*F(tau) = F(tau/2)^2 + 2 * int_{tau/2}^{tau} f(x) F(tau - x) dx

with adaptive Simpson on the right-hand integral.  All evaluation happens
on C doubles with the GIL released.
"""

from libc.math cimport exp, expm1, fabs, nextafter, pow

BACKEND = "cython"

WEIBULL = 1
EXPONENTIAL = 2
UNIFORM = 3


cdef inline double _pdf(int family, double p1, double p2, double x) noexcept nogil:
    cdef double ux
    if family == 1:  # Weibull(k=p1, u=p2)
        if x <= 0.0:
            return 0.0
        ux = p2 * x
        return p1 * p2 * pow(ux, p1 - 1.0) * exp(-pow(ux, p1))
    elif family == 2:  # Exponential(u=p1)
        if x < 0.0:
            return 0.0
        return p1 * exp(-p1 * x)
    else:  # Uniform(v=p1)
        if x < 0.0 or x >= p1:
            return 0.0
        return 1.0 / p1


cdef inline double _cdf(int family, double p1, double p2, double x) noexcept nogil:
    if x <= 0.0:
        return 0.0
    if family == 1:
        return -expm1(-pow(p2 * x, p1))
    elif family == 2:
        return -expm1(-p1 * x)
    else:
        if x < p1:
            return x / p1
        return 1.0


cdef inline double _g(int family, double p1, double p2, double tau, double x,
                      int mode) noexcept nogil:
    # mode 0: direct integrand f(x) F(tau - x)
    # mode 1: Weibull k < 1 tail, substituted s = (u (tau - x))^k so the
    #         integrand vanishes like s^(1/k) instead of kinking at tau
    cdef double y
    if mode == 0:
        return _pdf(family, p1, p2, x) * _cdf(family, p1, p2, tau - x)
    if x <= 0.0:
        return 0.0
    y = pow(x, 1.0 / p1) / p2
    return (_pdf(family, p1, p2, tau - y) * (-expm1(-x))
            * pow(x, (1.0 - p1) / p1) / (p2 * p1))


cdef inline double _simpson(double fa, double fm, double fb, double a, double b) noexcept nogil:
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


cdef double _adapt(int family, double p1, double p2, double tau, int mode,
                   double a, double fa, double m, double fm, double b, double fb,
                   double whole, double tol, int depth, int* ok) noexcept nogil:
    cdef double lm = 0.5 * (a + m)
    cdef double rm = 0.5 * (m + b)
    cdef double flm = _g(family, p1, p2, tau, lm, mode)
    cdef double frm = _g(family, p1, p2, tau, rm, mode)
    cdef double left = _simpson(fa, flm, fm, a, m)
    cdef double right = _simpson(fm, frm, fb, m, b)
    cdef double delta = left + right - whole
    if fabs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    if depth <= 0:
        ok[0] = 0
        return left + right + delta / 15.0
    return (_adapt(family, p1, p2, tau, mode, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1, ok)
            + _adapt(family, p1, p2, tau, mode, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1, ok))


cdef double _integrate(int family, double p1, double p2, double tau, int mode,
                       double a, double b, double tol, int max_depth, int* ok) noexcept nogil:
    if b <= a:
        return 0.0
    cdef double m = 0.5 * (a + b)
    # one-sided limits at segment ends (they sit on breakpoints)
    cdef double fa = _g(family, p1, p2, tau, nextafter(a, b), mode)
    cdef double fm = _g(family, p1, p2, tau, m, mode)
    cdef double fb = _g(family, p1, p2, tau, nextafter(b, a), mode)
    cdef double whole = _simpson(fa, fm, fb, a, b)
    return _adapt(family, p1, p2, tau, mode, a, fa, m, fm, b, fb, whole, tol, max_depth, ok)


def conv_cdf(int family, double p1, double p2, double tau,
             double abs_tol, int max_depth):
    """Return (P(z1 + z2 <= tau), converged) for the coded family."""
    if family not in (1, 2, 3):
        raise ValueError(f"unknown family code {family}")
    if tau <= 0.0:
        return 0.0, True

    cdef double half = 0.5 * tau
    cdef double cuts[4]
    cdef int ncuts = 0
    cdef double total = 0.0
    cdef double span = tau - half
    cdef double seg_tol, val, conv, f_half, f_tau, b, s_hi
    cdef int ok = 1
    cdef int i, j

    if family == 1 and p1 < 1.0:
        with nogil:
            s_hi = pow(p2 * half, p1)
            total = _integrate(family, p1, p2, tau, 1, 0.0, s_hi,
                               0.5 * abs_tol, max_depth, &ok)
            f_half = _cdf(family, p1, p2, half)
            f_tau = _cdf(family, p1, p2, tau)
            conv = f_half * f_half + 2.0 * total
            if conv < 0.0:
                conv = 0.0
            if conv > f_tau:
                conv = f_tau
        return conv, ok != 0

    cuts[ncuts] = half; ncuts += 1
    if family == 3:
        if half < p1 < tau:
            cuts[ncuts] = p1; ncuts += 1
        b = tau - p1
        if half < b < tau and b != p1:
            cuts[ncuts] = b; ncuts += 1
    cuts[ncuts] = tau; ncuts += 1
    # insertion sort of at most 4 points
    for i in range(1, ncuts):
        b = cuts[i]
        j = i
        while j > 0 and cuts[j - 1] > b:
            cuts[j] = cuts[j - 1]
            j -= 1
        cuts[j] = b

    with nogil:
        for i in range(ncuts - 1):
            seg_tol = 0.5 * abs_tol * (cuts[i + 1] - cuts[i]) / span
            val = _integrate(family, p1, p2, tau, 0, cuts[i], cuts[i + 1],
                             seg_tol, max_depth, &ok)
            total += val
        f_half = _cdf(family, p1, p2, half)
        f_tau = _cdf(family, p1, p2, tau)
        conv = f_half * f_half + 2.0 * total
        if conv < 0.0:
            conv = 0.0
        if conv > f_tau:
            conv = f_tau
    return conv, ok != 0
