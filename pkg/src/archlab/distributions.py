"""Nonnegative processing-time distributions.

A processing-time distribution lives on ``[0, upper)`` (``upper`` may be
infinite) and exposes five functionals tied together by

    S(t) = 1 - F(t),      h(t) = f(t) / S(t),      H(t) = -ln S(t),

with ``f`` the density and ``F`` the distribution function.  Three
parametric families are built in:

* ``Weibull(k, u)``  --  f(t) = k u (u t)^(k-1) exp[-(u t)^k]
* ``Exponential(u)`` --  Weibull with k = 1
* ``Uniform(v)``     --  constant density 1/v on [0, v)

User-defined distributions subclass :class:`ProcessingTimeDistribution` and
supply only ``pdf`` and ``cdf``; survival, hazard, cumulative hazard and
quantile are then derived numerically.

All instances are immutable and every functional is pure, so values can be
shared freely across threads.
"""

from __future__ import annotations

import math
import re
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from .errors import DistSpecError, DomainError, ExhaustedSurvivalError

#: Survival floor below which hazard-type functionals refuse to evaluate
#: instead of overflowing (the uniform hazard 1/(v - t) diverges at t -> v).
EPS_SURVIVAL = 1e-300


def _prepare(t, name: str = "t"):
    """Coerce to float array, rejecting non-finite entries."""
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {t!r}")
    return arr, arr.ndim == 0


def _ret(arr, scalar: bool):
    return float(arr) if scalar else arr


class ProcessingTimeDistribution(ABC):
    """A distribution on [0, upper) exposing f, F, S, h and H.

    Subclasses must implement :meth:`pdf` and :meth:`cdf`; everything else
    has a numerical default that subclasses may override with closed forms.
    """

    #: Upper end of the support; ``inf`` unless the subclass overrides it.
    support_upper: float = math.inf

    #: A characteristic time used to size numerical tolerances.
    typical_scale: float = 1.0

    @abstractmethod
    def pdf(self, t):
        """Density f(t); zero outside the support."""

    @abstractmethod
    def cdf(self, t):
        """Distribution function F(t), in [0, 1]."""

    def survival(self, t):
        """S(t) = 1 - F(t)."""
        t_arr, scalar = _prepare(t)
        return _ret(1.0 - np.asarray(self.cdf(t_arr)), scalar)

    def hazard(self, t):
        """h(t) = f(t) / S(t); raises once survival is exhausted."""
        t_arr, scalar = _prepare(t)
        if np.any(t_arr < 0.0):
            raise DomainError(f"hazard undefined before the support: t={t!r}")
        s = np.asarray(self.survival(t_arr))
        if np.any(s <= EPS_SURVIVAL):
            raise ExhaustedSurvivalError(
                f"hazard undefined: exhausted survival at t={t!r}")
        return _ret(np.asarray(self.pdf(t_arr)) / s, scalar)

    def cum_hazard(self, t):
        """H(t) = -ln S(t)."""
        t_arr, scalar = _prepare(t)
        if np.any(t_arr < 0.0):
            raise DomainError(
                f"cumulative hazard undefined before the support: t={t!r}")
        s = np.asarray(self.survival(t_arr))
        if np.any(s <= EPS_SURVIVAL):
            raise ExhaustedSurvivalError(
                f"cumulative hazard undefined: exhausted survival at t={t!r}")
        return _ret(-np.log(s), scalar)

    def quantile(self, q):
        """Smallest t with F(t) >= q, for 0 <= q < 1.

        Default implementation: bisection on an expanding bracket, absolute
        tolerance ``1e-10 * typical_scale``; safe because F is monotone.
        """
        q_arr, scalar = _prepare(q, "q")
        if np.any((q_arr < 0.0) | (q_arr >= 1.0)):
            raise DomainError(f"quantile level must be in [0, 1), got {q!r}")
        out = np.empty_like(q_arr)
        for idx, qi in np.ndenumerate(q_arr):
            out[idx] = self._quantile_scalar(float(qi))
        return _ret(out, scalar)

    def _quantile_scalar(self, q: float) -> float:
        if q <= 0.0:
            return 0.0
        lo, hi = 0.0, self.typical_scale
        for _ in range(2000):
            if float(self.cdf(hi)) >= q:
                break
            lo, hi = hi, hi * 2.0
        else:
            raise DomainError(f"quantile bracket did not close for q={q}")
        tol = 1e-10 * self.typical_scale
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if float(self.cdf(mid)) >= q:
                hi = mid
            else:
                lo = mid
        return 0.5 * (lo + hi)

    def breakpoints(self) -> tuple[float, ...]:
        """Interior points where f or F is not smooth (quadrature splits here)."""
        return ()


@dataclass(frozen=True)
class Weibull(ProcessingTimeDistribution):
    """Weibull with shape ``k`` and rate ``u``: F(t) = 1 - exp[-(u t)^k].

    The cumulative hazard is implemented as ``(u t)^k``; the equivalent
    factored form ``u (u t)^(k-1) t`` is algebraically identical.
    """

    k: float
    u: float

    def __post_init__(self):
        if not (self.k > 0 and math.isfinite(self.k)):
            raise DomainError(f"Weibull shape k must be positive, got {self.k}")
        if not (self.u > 0 and math.isfinite(self.u)):
            raise DomainError(f"Weibull rate u must be positive, got {self.u}")

    @property
    def typical_scale(self) -> float:
        return 1.0 / self.u

    def pdf(self, t):
        t_arr, scalar = _prepare(t)
        x = self.u * t_arr
        out = np.zeros_like(x)
        pos = x > 0
        with np.errstate(over="ignore", under="ignore"):
            out[pos] = (self.k * self.u * x[pos] ** (self.k - 1.0)
                        * np.exp(-x[pos] ** self.k))
        at_zero = (t_arr == 0.0)
        if np.any(at_zero):
            if self.k < 1.0:
                out[at_zero] = math.inf  # density diverges at the origin
            elif self.k == 1.0:
                out[at_zero] = self.u
        return _ret(out, scalar)

    def cdf(self, t):
        t_arr, scalar = _prepare(t)
        x = np.clip(self.u * t_arr, 0.0, None)
        with np.errstate(over="ignore"):
            out = -np.expm1(-x ** self.k)
        return _ret(out, scalar)

    def survival(self, t):
        t_arr, scalar = _prepare(t)
        x = np.clip(self.u * t_arr, 0.0, None)
        with np.errstate(over="ignore"):
            out = np.exp(-x ** self.k)
        return _ret(out, scalar)

    def hazard(self, t):
        """Closed form u k (u t)^(k-1); monotone in t with sign of (k - 1)."""
        t_arr, scalar = _prepare(t)
        if np.any(t_arr < 0.0):
            raise DomainError(f"hazard undefined before the support: t={t!r}")
        if self.k < 1.0 and np.any(t_arr == 0.0):
            raise DomainError("Weibull hazard diverges at t=0 for k < 1")
        x = self.u * t_arr
        out = np.zeros_like(x)
        pos = x > 0
        out[pos] = self.u * self.k * x[pos] ** (self.k - 1.0)
        if self.k == 1.0:
            out[~pos] = self.u
        return _ret(out, scalar)

    def cum_hazard(self, t):
        t_arr, scalar = _prepare(t)
        if np.any(t_arr < 0.0):
            raise DomainError(
                f"cumulative hazard undefined before the support: t={t!r}")
        with np.errstate(over="ignore"):
            out = (self.u * t_arr) ** self.k
        return _ret(out, scalar)

    def quantile(self, q):
        q_arr, scalar = _prepare(q, "q")
        if np.any((q_arr < 0.0) | (q_arr >= 1.0)):
            raise DomainError(f"quantile level must be in [0, 1), got {q!r}")
        out = (-np.log1p(-q_arr)) ** (1.0 / self.k) / self.u
        return _ret(out, scalar)

    def spec_string(self) -> str:
        return f"weibull:k={self.k!r},u={self.u!r}"


@dataclass(frozen=True)
class Exponential(ProcessingTimeDistribution):
    """Exponential with rate ``u``; constant hazard and linear H(t) = u t."""

    u: float

    def __post_init__(self):
        if not (self.u > 0 and math.isfinite(self.u)):
            raise DomainError(f"Exponential rate u must be positive, got {self.u}")

    @property
    def typical_scale(self) -> float:
        return 1.0 / self.u

    def pdf(self, t):
        t_arr, scalar = _prepare(t)
        out = np.where(t_arr >= 0.0, self.u * np.exp(-self.u * np.clip(t_arr, 0.0, None)), 0.0)
        return _ret(out, scalar)

    def cdf(self, t):
        t_arr, scalar = _prepare(t)
        out = -np.expm1(-self.u * np.clip(t_arr, 0.0, None))
        return _ret(out, scalar)

    def survival(self, t):
        t_arr, scalar = _prepare(t)
        return _ret(np.exp(-self.u * np.clip(t_arr, 0.0, None)), scalar)

    def hazard(self, t):
        t_arr, scalar = _prepare(t)
        if np.any(t_arr < 0.0):
            raise DomainError(f"hazard undefined before the support: t={t!r}")
        return _ret(np.full_like(t_arr, self.u), scalar)

    def cum_hazard(self, t):
        t_arr, scalar = _prepare(t)
        if np.any(t_arr < 0.0):
            raise DomainError(
                f"cumulative hazard undefined before the support: t={t!r}")
        return _ret(self.u * t_arr, scalar)

    def quantile(self, q):
        q_arr, scalar = _prepare(q, "q")
        if np.any((q_arr < 0.0) | (q_arr >= 1.0)):
            raise DomainError(f"quantile level must be in [0, 1), got {q!r}")
        return _ret(-np.log1p(-q_arr) / self.u, scalar)

    def spec_string(self) -> str:
        return f"exp:u={self.u!r}"


@dataclass(frozen=True)
class Uniform(ProcessingTimeDistribution):
    """Uniform on [0, v): hazard 1/(v - t) diverges at the upper endpoint."""

    v: float

    def __post_init__(self):
        if not (self.v > 0 and math.isfinite(self.v)):
            raise DomainError(f"Uniform upper bound v must be positive, got {self.v}")

    @property
    def support_upper(self) -> float:
        return self.v

    @property
    def typical_scale(self) -> float:
        return self.v

    def pdf(self, t):
        t_arr, scalar = _prepare(t)
        out = np.where((t_arr >= 0.0) & (t_arr < self.v), 1.0 / self.v, 0.0)
        return _ret(out, scalar)

    def cdf(self, t):
        t_arr, scalar = _prepare(t)
        return _ret(np.clip(t_arr / self.v, 0.0, 1.0), scalar)

    def survival(self, t):
        t_arr, scalar = _prepare(t)
        return _ret(1.0 - np.clip(t_arr / self.v, 0.0, 1.0), scalar)

    def hazard(self, t):
        t_arr, scalar = _prepare(t)
        if np.any(t_arr < 0.0):
            raise DomainError(f"hazard undefined before the support: t={t!r}")
        s = 1.0 - np.clip(t_arr / self.v, 0.0, 1.0)
        if np.any(s <= EPS_SURVIVAL):
            raise ExhaustedSurvivalError(
                f"hazard undefined: exhausted survival at t={t!r} (v={self.v})")
        return _ret(1.0 / (self.v - t_arr), scalar)

    def cum_hazard(self, t):
        """-ln(v - t) + ln v, valid for t < v only."""
        t_arr, scalar = _prepare(t)
        if np.any(t_arr < 0.0):
            raise DomainError(
                f"cumulative hazard undefined before the support: t={t!r}")
        if np.any(t_arr >= self.v):
            raise DomainError(
                f"cumulative hazard undefined at t={t!r}: support ends at v={self.v}")
        return _ret(-np.log1p(-t_arr / self.v), scalar)

    def quantile(self, q):
        q_arr, scalar = _prepare(q, "q")
        if np.any((q_arr < 0.0) | (q_arr >= 1.0)):
            raise DomainError(f"quantile level must be in [0, 1), got {q!r}")
        return _ret(q_arr * self.v, scalar)

    def breakpoints(self) -> tuple[float, ...]:
        return (self.v,)

    def spec_string(self) -> str:
        return f"uniform:v={self.v!r}"


# --------------------------------------------------------------------------
# Spec-string grammar:  weibull:k=<float>,u=<float> | exp:u=<float>
#                       | uniform:v=<float>
# --------------------------------------------------------------------------

_FAMILY_PARAMS = {"weibull": ("k", "u"), "exp": ("u",), "uniform": ("v",)}
_TOKEN_RE = re.compile(r"^([A-Za-z_]\w*)=(.+)$")


def parse_spec(text: str) -> ProcessingTimeDistribution:
    """Parse a distribution spec string.

    >>> parse_spec("weibull:k=2,u=1")
    Weibull(k=2.0, u=1.0)

    Raises :class:`DistSpecError` naming the offending token on any
    malformed input.
    """
    if not isinstance(text, str) or ":" not in text:
        raise DistSpecError(
            f"distribution spec {text!r} must look like 'family:param=value,...'")
    family, _, rest = text.partition(":")
    family = family.strip().lower()
    if family not in _FAMILY_PARAMS:
        raise DistSpecError(
            f"unknown distribution family {family!r} "
            f"(expected one of {sorted(_FAMILY_PARAMS)})")
    wanted = _FAMILY_PARAMS[family]
    values: dict[str, float] = {}
    for token in rest.split(","):
        token = token.strip()
        m = _TOKEN_RE.match(token)
        if m is None:
            raise DistSpecError(f"malformed parameter token {token!r} in {text!r}")
        name, raw = m.group(1), m.group(2)
        if name not in wanted:
            raise DistSpecError(
                f"unexpected parameter {name!r} for family {family!r} "
                f"(expected {list(wanted)})")
        if name in values:
            raise DistSpecError(f"duplicate parameter {name!r} in {text!r}")
        try:
            values[name] = float(raw)
        except ValueError:
            raise DistSpecError(
                f"invalid float {raw!r} in token {token!r}") from None
    missing = [p for p in wanted if p not in values]
    if missing:
        raise DistSpecError(f"missing parameter(s) {missing} for family {family!r}")
    if family == "weibull":
        return Weibull(k=values["k"], u=values["u"])
    if family == "exp":
        return Exponential(u=values["u"])
    return Uniform(v=values["v"])
