"""Total-completion-time dependence for standard two-process serial models.

Two iid stage durations are executed one after the other; process ``a`` is
scheduled first with probability ``p``.  Writing ``F`` for the stage CDF
and ``conv = f*F`` for the CDF of the stage sum, the completion-time
marginals are

    P(T_total_a <= tau) = p F(tau) + (1 - p) conv(tau)
    P(T_total_b <= tau) = (1 - p) F(tau) + p conv(tau)

and the dependence functional studied here is

    D(tau) = P(T_total_b <= tau | T_total_a <= tau) - P(T_total_b <= tau),

which factors as R * {1 - F - p(1-p) [sqrt(conv) - F/sqrt(conv)]^2} with
R = conv / marginal_a.  Both routes are computed and cross-checked on
every call.  At p = 1/2 the bracketed factor reduces to

    expression3(F, conv) = 1 - F - (1/4) [sqrt(conv) - F/sqrt(conv)]^2,

whose sign equals the sign of D.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.special import gamma as _gamma

from .distributions import (Exponential, ProcessingTimeDistribution, Uniform,
                            Weibull)
from .errors import (ConditioningError, ConsistencyError, DomainError,
                     OrderingViolationError)
from .numerics import (DEFAULT_QUADRATURE, QuadratureConfig, classify_sign,
                       convolve_cdf, write_rows_csv)

#: Two algebraically identical routes to the dependence difference must
#: agree at least this well; they share all inputs, so only floating-point
#: rounding separates them.
ROUTE_AGREEMENT_TOL = 1e-9

#: conv below this floor is treated as fully underflowed and the factored
#: route (which divides by conv) is skipped.
_CONV_FLOOR = 1e-300


@dataclass(frozen=True)
class SerialTwoModel:
    """Two iid stages; process ``a`` runs first with probability ``p``."""

    dist: ProcessingTimeDistribution
    p: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise DomainError(f"order probability p must be in [0, 1], got {self.p}")


def _components(model: SerialTwoModel, tau: float,
                cfg: QuadratureConfig) -> tuple[float, float, float, float]:
    if not math.isfinite(tau):
        raise DomainError(f"tau must be finite, got {tau}")
    if tau < 0:
        raise DomainError(f"tau must be nonnegative, got {tau}")
    f_val = float(model.dist.cdf(tau))
    conv = convolve_cdf(model.dist, tau, cfg)
    p = model.p
    marginal_a = p * f_val + (1.0 - p) * conv
    marginal_b = (1.0 - p) * f_val + p * conv
    return f_val, conv, marginal_a, marginal_b


def marginal_completion_cdf(model: SerialTwoModel, which: str, tau: float,
                            cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """CDF of the total completion time of process 'a' or 'b'."""
    if which not in ("a", "b"):
        raise DomainError(f"which must be 'a' or 'b', got {which!r}")
    _, _, marginal_a, marginal_b = _components(model, tau, cfg)
    return marginal_a if which == "a" else marginal_b


def dependence_difference(model: SerialTwoModel, tau: float,
                          cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Conditional-minus-marginal completion probability at ``tau``.

    Computed as conv/marginal_a - marginal_b and cross-checked against the
    factored form; a :class:`ConsistencyError` means the two algebraically
    equal routes diverged, which would indicate a numerical defect.
    """
    f_val, conv, marginal_a, marginal_b = _components(model, tau, cfg)
    if marginal_a <= 0.0:
        raise ConditioningError(
            f"conditioning on null event: P(completion of a by tau={tau}) = 0")
    quotient = conv / marginal_a - marginal_b
    if conv > _CONV_FLOOR:
        r = conv / marginal_a
        pq = model.p * (1.0 - model.p)
        root = math.sqrt(conv)
        factored = r * (1.0 - f_val - pq * (root - f_val / root) ** 2)
        if abs(quotient - factored) > ROUTE_AGREEMENT_TOL:
            raise ConsistencyError(
                f"dependence routes disagree at tau={tau}: "
                f"quotient={quotient!r}, factored={factored!r}")
    return quotient


def expression3(f_val: float, conv_val: float) -> float:
    """The p = 1/2 sign kernel: 1 - F - (1/4)[sqrt(conv) - F/sqrt(conv)]^2.

    Requires 0 < conv <= F <= 1 (the convolution of two nonnegative
    summands can never exceed the single-summand CDF).
    """
    for name, val in (("F", f_val), ("conv", conv_val)):
        if not math.isfinite(val):
            raise DomainError(f"{name} must be finite, got {val}")
    if conv_val <= 0.0:
        raise DomainError(f"conv must be positive, got {conv_val}")
    if f_val > 1.0:
        raise DomainError(f"F must be at most 1, got {f_val}")
    if conv_val > f_val:
        raise OrderingViolationError(
            f"ordering violated: conv={conv_val} exceeds F={f_val}")
    root = math.sqrt(conv_val)
    return 1.0 - f_val - 0.25 * (root - f_val / root) ** 2


@dataclass(frozen=True)
class DependencePoint:
    """One profile row; ``r_prime`` is 1/marginal_a (the exponential
    closed-form tests target it directly)."""

    tau: float
    f: float
    conv: float
    marginal_a: float
    marginal_b: float
    r: float
    r_prime: float
    difference: float
    sign: str


@dataclass
class DependenceProfile:
    model: SerialTwoModel
    points: list[DependencePoint]

    def signs(self) -> list[str]:
        return [pt.sign for pt in self.points]

    def to_csv(self, out) -> None:
        write_rows_csv(
            out,
            ["tau", "F", "conv", "marginal_a", "marginal_b", "R",
             "difference", "sign"],
            ([pt.tau, pt.f, pt.conv, pt.marginal_a, pt.marginal_b, pt.r,
              pt.difference, pt.sign] for pt in self.points))


def dependence_profile(model: SerialTwoModel, taus: Sequence[float] | np.ndarray,
                       cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> DependenceProfile:
    """Evaluate the dependence difference on a tau grid.

    Signs are classified with the global zero tolerance, so e.g. the
    uniform family beyond twice its support classifies as exactly zero.
    """
    points = []
    for tau in np.asarray(taus, dtype=float):
        tau = float(tau)
        f_val, conv, marginal_a, marginal_b = _components(model, tau, cfg)
        if marginal_a <= 0.0:
            raise ConditioningError(
                f"conditioning on null event in profile at tau={tau}")
        diff = dependence_difference(model, tau, cfg)
        points.append(DependencePoint(
            tau=tau, f=f_val, conv=conv,
            marginal_a=marginal_a, marginal_b=marginal_b,
            r=conv / marginal_a, r_prime=1.0 / marginal_a,
            difference=diff, sign=classify_sign(diff)))
    return DependenceProfile(model=model, points=points)


@dataclass(frozen=True)
class FixedOrderCovariance:
    cov_estimate: float
    var_t1_estimate: float
    analytic_var: float | None
    n_trials: int


def analytic_stage_variance(dist: ProcessingTimeDistribution) -> float | None:
    """Var(z) in closed form for the built-in families, else None."""
    if isinstance(dist, Exponential):
        return 1.0 / dist.u ** 2
    if isinstance(dist, Uniform):
        return dist.v ** 2 / 12.0
    if isinstance(dist, Weibull):
        g1 = _gamma(1.0 + 1.0 / dist.k)
        g2 = _gamma(1.0 + 2.0 / dist.k)
        return (g2 - g1 * g1) / dist.u ** 2
    return None


def fixed_order_covariance(dist: ProcessingTimeDistribution, n_trials: int,
                           seed: int) -> FixedOrderCovariance:
    """Monte Carlo check that Cov(first total, second total) = Var(stage 1)
    when the processing order is fixed (a always first).

    Both estimates come from the same draws: with totals (z_a, z_a + z_b)
    the sample covariance estimates Var(z_a) + Cov(z_a, z_b), and the
    independent draws make the cross term vanish in expectation.
    """
    from . import mc

    if n_trials < 2:
        raise DomainError(f"n_trials must be >= 2, got {n_trials}")
    draws = mc.sample_iid(dist, n_trials, 2, seed)
    total_a = draws[:, 0]
    total_b = draws[:, 0] + draws[:, 1]
    cov = float(np.cov(total_a, total_b, ddof=1)[0, 1])
    var_t1 = float(np.var(total_a, ddof=1))
    return FixedOrderCovariance(cov_estimate=cov, var_t1_estimate=var_t1,
                                analytic_var=analytic_stage_variance(dist),
                                n_trials=n_trials)
