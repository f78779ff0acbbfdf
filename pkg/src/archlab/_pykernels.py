"""Pure-Python convolution kernel (fallback for the C extension).

Implements P(z1 + z2 <= tau) for iid draws from one of the built-in
families, via the singularity-free split

    f*F(tau) = F(tau/2)^2 + 2 * int_{tau/2}^{tau} f(x) F(tau - x) dx,

which keeps every density evaluation at x >= tau/2 > 0 (the Weibull density
with k < 1 diverges at the origin).  The integral uses adaptive Simpson
with Richardson extrapolation, split at integrand kinks.

Family codes: 1 = Weibull(p1=k, p2=u), 2 = Exponential(p1=u),
3 = Uniform(p1=v).  Must stay drop-in compatible with ``_ckernels``.
"""

from __future__ import annotations

import math

BACKEND = "pure-python"

WEIBULL = 1
EXPONENTIAL = 2
UNIFORM = 3


def _pdf(family: int, p1: float, p2: float, x: float) -> float:
    if family == WEIBULL:
        if x <= 0.0:
            return 0.0
        ux = p2 * x
        return p1 * p2 * ux ** (p1 - 1.0) * math.exp(-(ux ** p1))
    if family == EXPONENTIAL:
        return p1 * math.exp(-p1 * x) if x >= 0.0 else 0.0
    if family == UNIFORM:
        return 1.0 / p1 if 0.0 <= x < p1 else 0.0
    raise ValueError(f"unknown family code {family}")


def _cdf(family: int, p1: float, p2: float, x: float) -> float:
    if x <= 0.0:
        return 0.0
    if family == WEIBULL:
        return -math.expm1(-((p2 * x) ** p1))
    if family == EXPONENTIAL:
        return -math.expm1(-p1 * x)
    if family == UNIFORM:
        return x / p1 if x < p1 else 1.0
    raise ValueError(f"unknown family code {family}")


def _simpson(fa: float, fm: float, fb: float, a: float, b: float) -> float:
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adapt(g, a, fa, m, fm, b, fb, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = g(lm)
    frm = g(rm)
    left = _simpson(fa, flm, fm, a, m)
    right = _simpson(fm, frm, fb, m, b)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0, True
    if depth <= 0:
        return left + right + delta / 15.0, False
    lv, lok = _adapt(g, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1)
    rv, rok = _adapt(g, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1)
    return lv + rv, lok and rok


def _integrate(g, a: float, b: float, tol: float, max_depth: int):
    if b <= a:
        return 0.0, True
    # endpoints are evaluated one ULP inside: segment ends sit on jump
    # points of piecewise integrands, and Simpson needs the one-sided limit
    fa = g(math.nextafter(a, b))
    fm = g(0.5 * (a + b))
    fb = g(math.nextafter(b, a))
    whole = _simpson(fa, fm, fb, a, b)
    return _adapt(g, a, fa, 0.5 * (a + b), fm, b, fb, whole, tol, max_depth)


def conv_cdf(family: int, p1: float, p2: float, tau: float,
             abs_tol: float, max_depth: int) -> tuple[float, bool]:
    """Return (P(z1 + z2 <= tau), converged) for the coded family."""
    if tau <= 0.0:
        return 0.0, True
    half = 0.5 * tau

    if family == WEIBULL and p1 < 1.0:
        # With k < 1 the CDF has a vertical tangent at 0, so the direct
        # integrand behaves like (tau - x)^k at x = tau and starves the
        # Simpson refinement.  Substituting s = (u (tau - x))^k gives
        #   int_0^{(u tau/2)^k} f(tau - s^(1/k)/u) (1 - e^-s)
        #                       s^((1-k)/k) / (u k) ds
        # whose integrand vanishes like s^(1/k) at 0.
        inv_k = 1.0 / p1
        jac_exp = (1.0 - p1) / p1

        def g_sub(s: float) -> float:
            if s <= 0.0:
                return 0.0
            y = s ** inv_k / p2
            return (_pdf(family, p1, p2, tau - y)
                    * (-math.expm1(-s)) * s ** jac_exp / (p2 * p1))

        s_hi = (p2 * half) ** p1
        total, ok = _integrate(g_sub, 0.0, s_hi, 0.5 * abs_tol, max_depth)
    else:
        def g(x: float) -> float:
            return _pdf(family, p1, p2, x) * _cdf(family, p1, p2, tau - x)

        cuts = [half, tau]
        if family == UNIFORM:
            for b in (p1, tau - p1):
                if half < b < tau:
                    cuts.append(b)
        cuts = sorted(set(cuts))

        total = 0.0
        ok = True
        span = tau - half
        for a, b in zip(cuts[:-1], cuts[1:]):
            seg_tol = 0.5 * abs_tol * (b - a) / span
            val, seg_ok = _integrate(g, a, b, seg_tol, max_depth)
            total += val
            ok = ok and seg_ok

    f_half = _cdf(family, p1, p2, half)
    f_tau = _cdf(family, p1, p2, tau)
    conv = f_half * f_half + 2.0 * total
    # mathematical constraint: 0 <= f*F(tau) <= F(tau)
    conv = min(max(conv, 0.0), f_tau)
    return conv, ok
