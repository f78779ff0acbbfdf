"""Intercompletion-time behavior of standard two-process parallel models.

Both channels draw iid processing times; totals are the raw draws, stages
are order statistics.  Conditional on the slower channel still running at
the first completion ``T_a``, the second-stage survival is

    P(stage 2 lasts beyond t) = S(T_a + t) / S(T_a),

to be compared with the first-stage survival S(t)^2.  The comparison is
governed by the hazard ratio alpha(t, T_a + t) = h(T_a + t)/h(t): with
H the cumulative hazard, the gap

    gap = S(t)^2 - S(T_a + t)/S(T_a) = exp(-2 H(t)) - exp(-(H(T_a+t) - H(T_a)))

has the same sign as

    expr4 = -2 H(t) + H(T_a + t) - H(T_a) = int_0^t [alpha(s, T_a+s) - 2] h(s) ds.

Because the sign condition is an integral over s in [0, t], a single-point
alpha can misclassify; records therefore carry the extrema of alpha over
the integration range alongside the displayed alpha at (t, T_a), and flag
cells where the single-point reading contradicts the actual sign.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import ProcessingTimeDistribution, EPS_SURVIVAL
from .errors import ConditioningError, DomainError, GridEvalError
from .numerics import GridSpec, classify_sign, write_rows_csv


@dataclass(frozen=True)
class ParallelTwoModel:
    """Two channels racing with iid processing times."""

    dist: ProcessingTimeDistribution


def parallel_dependence_difference(model: ParallelTwoModel, tau: float) -> float:
    """Conditional-minus-marginal completion difference; identically zero.

    The value is computed as the evaluated quotient minus the marginal
    (not short-circuited to 0) so callers can confirm the cancellation
    numerically.
    """
    if not math.isfinite(tau):
        raise DomainError(f"tau must be finite, got {tau}")
    if tau < 0:
        raise DomainError(f"tau must be nonnegative, got {tau}")
    f_val = float(model.dist.cdf(tau))
    if f_val <= 0.0:
        raise ConditioningError(
            f"conditioning on null event: P(completion by tau={tau}) = 0")
    joint = f_val * f_val
    return joint / f_val - f_val


def conditional_ict_survival(model: ParallelTwoModel, t_a: float, t: float) -> float:
    """S(T_a + t) / S(T_a): second-stage survival given stage 1 ended at T_a.

    Returns 0 (not an error) when T_a + t reaches the end of a bounded
    support while S(T_a) is still positive: the probability is genuinely
    zero there.
    """
    if not (math.isfinite(t_a) and math.isfinite(t)):
        raise DomainError(f"T_a and t must be finite, got T_a={t_a}, t={t}")
    if t < 0 or t_a < 0:
        raise DomainError(f"T_a and t must be nonnegative, got T_a={t_a}, t={t}")
    s_a = float(model.dist.survival(t_a))
    if s_a <= EPS_SURVIVAL:
        raise ConditioningError(
            f"stage-1 condition has no survival mass at T_a={t_a}")
    if t_a + t >= model.dist.support_upper:
        return 0.0
    return float(model.dist.survival(t_a + t)) / s_a


def ict_survival_trend(model: ParallelTwoModel, t_a: float, t: float,
                       tol: float = 1e-9) -> str:
    """Sign of d/dT_a of the conditional second-stage survival.

    The derivative carries the sign of h(T_a) - h(T_a + t), so a
    non-increasing hazard makes the trend never negative.
    """
    h_a = float(model.dist.hazard(t_a))
    h_b = float(model.dist.hazard(t_a + t))
    return classify_sign(h_a - h_b, tol * (1.0 + abs(h_a) + abs(h_b)))


def hazard_ratio_alpha(model: ParallelTwoModel, t: float, t_a: float) -> float:
    """alpha(t, T_a + t) = h(T_a + t) / h(t)."""
    h_t = float(model.dist.hazard(t))
    if h_t <= 0.0:
        raise DomainError(f"hazard ratio undefined: h(t)={h_t} at t={t}")
    h_shift = float(model.dist.hazard(t_a + t))
    return h_shift / h_t


@dataclass(frozen=True)
class StageGap:
    gap: float
    expr4: float


def stage_survival_gap(model: ParallelTwoModel, t: float, t_a: float) -> StageGap:
    """First-stage survival S(t)^2 minus second-stage conditional survival.

    ``gap = exp(-2 H(t)) - exp(-(H(T_a+t) - H(T_a)))``; ``expr4`` is the
    cumulative-hazard combination carrying the same sign.  When T_a + t
    reaches a bounded support end (with t and T_a themselves inside), the
    second-stage survival is exactly zero: gap = S(t)^2 and expr4 = +inf.
    """
    if not (math.isfinite(t) and math.isfinite(t_a)):
        raise DomainError(f"t and T_a must be finite, got t={t}, T_a={t_a}")
    if t < 0 or t_a < 0:
        raise DomainError(f"t and T_a must be nonnegative, got t={t}, T_a={t_a}")
    h_t = float(model.dist.cum_hazard(t))
    h_a = float(model.dist.cum_hazard(t_a))
    if t_a + t >= model.dist.support_upper:
        return StageGap(gap=math.exp(-2.0 * h_t), expr4=math.inf)
    h_at = float(model.dist.cum_hazard(t_a + t))
    expr4 = -2.0 * h_t + h_at - h_a
    gap = math.exp(-2.0 * h_t) - math.exp(-(h_at - h_a))
    return StageGap(gap=gap, expr4=expr4)


def alpha_extrema(model: ParallelTwoModel, t: float, t_a: float,
                  samples: int = 65) -> tuple[float, float]:
    """Extrema of alpha(s, T_a + s) over s in (0, t].

    Sampled on a geometric grid reaching down to t * 1e-9; for every
    built-in family alpha is monotone in s, so the sampled extrema bracket
    the true ones up to the s -> 0 endpoint limit.
    """
    if t <= 0:
        return (math.nan, math.nan)
    s = np.geomspace(t * 1e-9, t, samples)
    upper = model.dist.support_upper
    if math.isfinite(upper):
        s = s[(s < upper) & (t_a + s < upper)]
    if s.size == 0:
        return (math.nan, math.nan)
    try:
        h_s = np.asarray(model.dist.hazard(s), dtype=float)
        h_shift = np.asarray(model.dist.hazard(t_a + s), dtype=float)
    except DomainError:
        return (math.nan, math.nan)
    valid = h_s > 0.0
    if not np.any(valid):
        return (math.nan, math.nan)
    ratios = h_shift[valid] / h_s[valid]
    return (float(np.min(ratios)), float(np.max(ratios)))


@dataclass(frozen=True)
class StageSurvivalRecord:
    t: float
    ta: float
    alpha: float
    alpha_min: float
    alpha_max: float
    expr4: float
    gap: float
    sign: str
    pointwise_disagrees: bool


@dataclass
class StageSurvivalGrid:
    model: ParallelTwoModel
    records: list[StageSurvivalRecord]

    def signs(self) -> list[str]:
        return [r.sign for r in self.records]

    def to_csv(self, out) -> None:
        write_rows_csv(
            out,
            ["t", "Ta", "alpha", "expr4", "gap", "sign"],
            ([r.t, r.ta, r.alpha, r.expr4, r.gap, r.sign]
             for r in self.records))


def stage_survival_grid(model: ParallelTwoModel, t_values, ta_values,
                        alpha_samples: int = 33) -> StageSurvivalGrid:
    """Evaluate the stage-survival gap over the (t, T_a) product grid.

    The stored ``sign`` is classified from expr4, which stays well scaled
    where the doubly exponentiated gap underflows; the two quantities
    carry the same sign by construction.
    """
    records = []
    for t in np.asarray(t_values, dtype=float):
        t = float(t)
        for ta in np.asarray(ta_values, dtype=float):
            ta = float(ta)
            try:
                res = stage_survival_gap(model, t, ta)
            except DomainError as exc:
                raise GridEvalError(
                    f"grid cell (t={t!r}, Ta={ta!r}) failed: {exc}",
                    point=(t, ta)) from exc
            try:
                alpha = hazard_ratio_alpha(model, t, ta)
            except DomainError:
                alpha = math.nan
            a_min, a_max = alpha_extrema(model, t, ta, alpha_samples)
            sign = classify_sign(res.expr4) if math.isfinite(res.expr4) \
                else ("positive" if res.expr4 > 0 else "negative")
            disagrees = (math.isfinite(alpha)
                         and ((alpha >= 2.0 and sign == "negative")
                              or (alpha < 2.0 and sign == "positive")))
            records.append(StageSurvivalRecord(
                t=t, ta=ta, alpha=alpha, alpha_min=a_min, alpha_max=a_max,
                expr4=res.expr4, gap=res.gap, sign=sign,
                pointwise_disagrees=disagrees))
    return StageSurvivalGrid(model=model, records=records)


@dataclass(frozen=True)
class TrendClassification:
    trend: str  # second_stage_slower | second_stage_faster | mixed
    positive_witness: tuple[float, float, float] | None
    negative_witness: tuple[float, float, float] | None
    n_positive: int
    n_negative: int
    n_zero: int


def classify_stage_trend(model: ParallelTwoModel,
                         region: GridSpec) -> TrendClassification:
    """Classify the gap's sign pattern over a region.

    ``second_stage_slower`` means the gap is negative wherever it is
    resolvable (second-stage survival exceeds the first-stage survival, so
    stage 2 takes longer); ``second_stage_faster`` is the reverse; mixed
    regions report one witness point of each sign.  Cells with t = 0 are
    degenerate (the gap is identically zero for every model) and count as
    zero cells.
    """
    if len(region.axes) != 2:
        raise DomainError("classify_stage_trend needs a (t, T_a) region")
    pos_w = neg_w = None
    n_pos = n_neg = n_zero = 0
    for t, ta in region.points():
        try:
            res = stage_survival_gap(model, t, ta)
        except DomainError as exc:
            raise GridEvalError(
                f"grid cell (t={t!r}, Ta={ta!r}) failed: {exc}",
                point=(t, ta)) from exc
        sign = classify_sign(res.expr4) if math.isfinite(res.expr4) \
            else ("positive" if res.expr4 > 0 else "negative")
        if sign == "positive":
            n_pos += 1
            if pos_w is None:
                pos_w = (t, ta, res.gap)
        elif sign == "negative":
            n_neg += 1
            if neg_w is None:
                neg_w = (t, ta, res.gap)
        else:
            n_zero += 1
    if n_pos and n_neg:
        trend = "mixed"
    elif n_neg:
        trend = "second_stage_slower"
    elif n_pos:
        trend = "second_stage_faster"
    else:
        raise DomainError("region produced no resolvable sign information")
    return TrendClassification(trend=trend, positive_witness=pos_w,
                               negative_witness=neg_w, n_positive=n_pos,
                               n_negative=n_neg, n_zero=n_zero)
