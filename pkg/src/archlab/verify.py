"""Self-verification suites behind the CLI ``verify`` command.

Each check computes a measured quantity, compares it with an analytic or
statistical bound, and reports pass/fail plus the measurement.  Checks are
grouped into three suites (analysis, mc, recall); ``all`` runs them all.
Everything is seeded, so results are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import stats

from . import mc, recall
from .distributions import Exponential, Uniform, Weibull
from .numerics import convolve_cdf
from .parallel import (ParallelTwoModel, alpha_extrema, conditional_ict_survival,
                       parallel_dependence_difference, stage_survival_gap)
from .serial import (SerialTwoModel, _components, dependence_difference,
                     marginal_completion_cdf)
from .numerics import DEFAULT_QUADRATURE

_VERIFY_SEED = 0x5EED_2024


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    passed: bool
    detail: str


def _random_dist(rng: np.random.Generator):
    fam = rng.integers(0, 3)
    if fam == 0:
        return Weibull(k=float(rng.uniform(0.2, 4.0)), u=float(rng.uniform(0.3, 5.0)))
    if fam == 1:
        return Exponential(u=float(rng.uniform(0.3, 5.0)))
    return Uniform(v=float(rng.uniform(0.3, 5.0)))


# ---------------------------------------------------------------- analysis

def _check_route_agreement() -> CheckResult:
    rng = np.random.default_rng(_VERIFY_SEED)
    worst = 0.0
    for _ in range(500):
        dist = _random_dist(rng)
        p = float(rng.uniform(0.0, 1.0))
        tau = float(dist.quantile(float(rng.uniform(0.05, 0.99))))
        f_val, conv, ma, mb = _components(SerialTwoModel(dist, p), tau,
                                          DEFAULT_QUADRATURE)
        if ma <= 0.0 or conv <= 0.0:
            continue
        quotient = conv / ma - mb
        root = math.sqrt(conv)
        factored = (conv / ma) * (1.0 - f_val
                                  - p * (1.0 - p) * (root - f_val / root) ** 2)
        worst = max(worst, abs(quotient - factored))
    return CheckResult("analysis", "quotient_vs_factored_agreement",
                       worst <= 1e-9, f"max |route gap| = {worst:.3e} (tol 1e-9)")


def _check_fixed_order_nonnegative() -> CheckResult:
    rng = np.random.default_rng(_VERIFY_SEED + 1)
    worst_neg = 0.0
    worst_gap = 0.0
    for _ in range(200):
        dist = _random_dist(rng)
        p = float(rng.integers(0, 2))
        tau = float(dist.quantile(float(rng.uniform(0.05, 0.999))))
        model = SerialTwoModel(dist, p)
        diff = dependence_difference(model, tau)
        f_val, conv, ma, _ = _components(model, tau, DEFAULT_QUADRATURE)
        worst_neg = min(worst_neg, diff)
        if ma > 0:
            worst_gap = max(worst_gap, abs(diff - (conv / ma) * (1.0 - f_val)))
    ok = worst_neg >= -1e-9 and worst_gap <= 1e-9
    return CheckResult("analysis", "single_order_nonnegative",
                       ok, f"min diff = {worst_neg:.3e}, "
                           f"max |diff - R(1-F)| = {worst_gap:.3e}")


def _check_conv_closed_forms() -> CheckResult:
    worst = 0.0
    exp_dist = Exponential(1.3)
    for tau in np.linspace(0.01, 6.0, 100):
        closed = convolve_cdf(exp_dist, float(tau))
        numeric = convolve_cdf(exp_dist, float(tau), force_numeric=True)
        worst = max(worst, abs(closed - numeric))
    uni = Uniform(2.0)
    for tau in np.linspace(0.01, 5.0, 100):
        closed = convolve_cdf(uni, float(tau))
        numeric = convolve_cdf(uni, float(tau), force_numeric=True)
        worst = max(worst, abs(closed - numeric))
    return CheckResult("analysis", "convolution_closed_forms",
                       worst <= 1e-7, f"max |closed - numeric| = {worst:.3e} (tol 1e-7)")


def _check_conv_bounds() -> CheckResult:
    rng = np.random.default_rng(_VERIFY_SEED + 2)
    ok = True
    detail = ""
    for _ in range(30):
        dist = _random_dist(rng)
        taus = np.linspace(0.0, float(dist.quantile(0.995)), 40)
        convs = [convolve_cdf(dist, float(t)) for t in taus]
        cdfs = [float(dist.cdf(float(t))) for t in taus]
        if np.any(np.diff(convs) < -1e-12):
            ok, detail = False, f"conv not monotone for {dist!r}"
            break
        if any(c > f + 1e-12 for c, f in zip(convs, cdfs)):
            ok, detail = False, f"conv exceeds F for {dist!r}"
            break
    return CheckResult("analysis", "convolution_ordering",
                       ok, detail or "monotone and conv <= F on 30 models")


def _check_parallel_zero() -> CheckResult:
    rng = np.random.default_rng(_VERIFY_SEED + 3)
    worst = 0.0
    for _ in range(500):
        dist = _random_dist(rng)
        tau = float(dist.quantile(float(rng.uniform(0.01, 0.999))))
        if float(dist.cdf(tau)) <= 0.0:
            continue
        worst = max(worst, abs(parallel_dependence_difference(
            ParallelTwoModel(dist), tau)))
    return CheckResult("analysis", "parallel_difference_zero",
                       worst <= 1e-12, f"max |difference| = {worst:.3e} (tol 1e-12)")


def _sign_of(x: float, tol: float = 1e-9) -> int:
    if x > tol:
        return 1
    if x < -tol:
        return -1
    return 0


def _check_gap_sign_consistency() -> CheckResult:
    contradictions = 0
    points = 0
    for model, t_hi in ((ParallelTwoModel(Weibull(2.0, 1.0)), 10.0),
                        (ParallelTwoModel(Weibull(4.0, 1.0)), 10.0),
                        (ParallelTwoModel(Uniform(2.0)), 1.0)):
        for t in np.linspace(0.0, t_hi, 40):
            for ta in np.linspace(0.0, t_hi, 40):
                res = stage_survival_gap(model, float(t), float(ta))
                sg, se = _sign_of(res.gap), _sign_of(
                    res.expr4 if math.isfinite(res.expr4) else 1.0)
                points += 1
                if sg * se < 0 or (sg != se and sg != 0 and se != 0):
                    contradictions += 1
    return CheckResult("analysis", "gap_expr4_sign_consistency",
                       contradictions == 0,
                       f"{contradictions} contradictions over {points} points")


def _check_hazard_ratio_threshold() -> CheckResult:
    violations = 0
    checked = 0
    for model, t_hi in ((ParallelTwoModel(Weibull(2.0, 1.0)), 6.0),
                        (ParallelTwoModel(Weibull(0.5, 1.0)), 6.0),
                        (ParallelTwoModel(Exponential(1.0)), 6.0),
                        (ParallelTwoModel(Uniform(2.0)), 0.95)):
        for t in np.linspace(0.05, t_hi, 15):
            for ta in np.linspace(0.0, t_hi, 15):
                a_min, a_max = alpha_extrema(model, float(t), float(ta))
                if not math.isfinite(a_min):
                    continue
                res = stage_survival_gap(model, float(t), float(ta))
                checked += 1
                if a_min >= 2.0 and res.gap < -1e-9:
                    violations += 1
                if a_max < 2.0 and res.gap >= 1e-9:
                    violations += 1
    return CheckResult("analysis", "stage_gap_hazard_ratio_threshold",
                       violations == 0,
                       f"{violations} violations over {checked} classified points")


def _check_conditional_survival_monotone() -> CheckResult:
    worst = 0.0
    for k in (0.3, 0.5, 0.8):
        model = ParallelTwoModel(Weibull(k, 1.0))
        for t in (0.3, 1.0, 2.5):
            ta_grid = np.linspace(0.0, 4.0, 50)
            vals = [conditional_ict_survival(model, float(ta), t) for ta in ta_grid]
            worst = min(worst, float(np.min(np.diff(vals))))
    model = ParallelTwoModel(Exponential(1.3))
    vals = [conditional_ict_survival(model, float(ta), 0.7)
            for ta in np.linspace(0.0, 5.0, 50)]
    spread = float(np.ptp(vals))
    ok = worst >= -1e-12 and spread <= 1e-12
    return CheckResult("analysis", "conditional_survival_monotone_in_Ta",
                       ok, f"min increment = {worst:.3e}, "
                           f"memoryless spread = {spread:.3e}")


def _check_uniform_regimes() -> CheckResult:
    model = SerialTwoModel(Uniform(1.0), 0.5)
    half = dependence_difference(model, 0.5)
    five_sixth = dependence_difference(model, 5.0 / 6.0)
    mid = [dependence_difference(model, float(t))
           for t in np.linspace(1.0, 1.999, 25)]
    beyond = [abs(dependence_difference(model, float(t)))
              for t in (2.0, 2.5, 3.0)]
    ok = (abs(half - 0.0875) < 1e-9 and five_sixth < 0
          and max(mid) <= 1e-9 and max(beyond) <= 1e-9)
    return CheckResult("analysis", "uniform_three_regimes",
                       ok, f"diff(v/2)={half:.6f}, diff(5v/6)={five_sixth:.6f}, "
                           f"max mid={max(mid):.2e}, max beyond={max(beyond):.2e}")


# ---------------------------------------------------------------- mc

def _check_theorem1_fraction() -> CheckResult:
    res = mc.run_theorem1_mc(1_000_000, mc.DEFAULT_SEED)
    ok = abs(res.fraction_positive - 0.62) <= 0.01
    return CheckResult("mc", "order_constrained_sign_fraction",
                       ok, f"fraction = {res.fraction_positive:.5f} "
                           f"(target 0.62 +- 0.01, stderr {res.stderr:.5f})")


def _check_theorem1_stability() -> CheckResult:
    runs = [mc.run_theorem1_mc(1_000_000, s) for s in (11, 23, 37, 41, 53)]
    worst = 0.0
    ok = True
    for i in range(len(runs)):
        for j in range(i + 1, len(runs)):
            gap = abs(runs[i].fraction_positive - runs[j].fraction_positive)
            bound = 4.0 * math.hypot(runs[i].stderr, runs[j].stderr)
            worst = max(worst, gap / bound)
            ok = ok and gap <= bound
    return CheckResult("mc", "sign_fraction_seed_stability",
                       ok, f"max pairwise gap = {worst:.2f} x its 4-sigma bound")


def _check_determinism() -> CheckResult:
    a = mc.run_theorem1_mc(200_000, 99)
    b = mc.run_theorem1_mc(200_000, 99)
    tr1 = mc.simulate_serial(SerialTwoModel(Exponential(1.0), 0.3), 150_000, 7)
    tr2 = mc.simulate_serial(SerialTwoModel(Exponential(1.0), 0.3), 150_000, 7)
    same = (a == b and np.array_equal(tr1.total_a, tr2.total_a)
            and np.array_equal(tr1.total_b, tr2.total_b)
            and np.array_equal(tr1.order_b_first, tr2.order_b_first))
    return CheckResult("mc", "bitwise_determinism", same,
                       "identical seeds reproduce identical outputs" if same
                       else "outputs differ between identical runs")


def _check_serial_marginals() -> CheckResult:
    worst = 0.0
    for dist in (Weibull(1.7, 2.0), Exponential(1.0), Uniform(2.0)):
        model = SerialTwoModel(dist, 0.35)
        trials = mc.simulate_serial(model, 1_000_000, 1234)
        for q in np.linspace(0.08, 0.95, 10):
            tau = float(dist.quantile(float(q))) * 1.5
            analytic = marginal_completion_cdf(model, "a", tau)
            emp = float(np.mean(trials.total_a <= tau))
            sigma = math.sqrt(max(analytic * (1 - analytic), 1e-12) / len(trials))
            worst = max(worst, abs(emp - analytic) / (3.0 * sigma))
    return CheckResult("mc", "serial_marginal_matches_analytic",
                       worst <= 1.0, f"max |emp - analytic| = {worst:.2f} x its "
                                     "3-sigma bound over 3 families x 10 points")


def _check_parallel_cov() -> CheckResult:
    trials = mc.simulate_parallel(ParallelTwoModel(Exponential(1.0)), 1_000_000, 77)
    cov = float(np.cov(trials.total_a, trials.total_b, ddof=1)[0, 1])
    # independent exponentials: Var(cov_hat) ~ Var(a) Var(b) / n
    sigma = 1.0 / math.sqrt(len(trials))
    ok = abs(cov) <= 3.0 * sigma
    return CheckResult("mc", "parallel_total_covariance_zero",
                       ok, f"cov = {cov:.2e} (3 sigma = {3 * sigma:.2e})")


def _check_fixed_order_covariance() -> CheckResult:
    from .serial import fixed_order_covariance
    worst = 0.0
    for dist in (Weibull(1.4, 1.5), Exponential(1.0), Uniform(1.0)):
        res = fixed_order_covariance(dist, 1_000_000, 4242)
        sigma = res.var_t1_estimate / math.sqrt(res.n_trials)
        worst = max(worst, abs(res.cov_estimate - res.var_t1_estimate) / (3 * sigma))
    return CheckResult("mc", "fixed_order_cov_equals_stage_variance",
                       worst <= 1.0,
                       f"max |cov - var| = {worst:.2f} x its 3-sigma bound")


def _check_conv_mc_oracle() -> CheckResult:
    worst = 0.0
    for dist in (Weibull(0.7, 1.0), Exponential(2.0), Uniform(1.5)):
        draws = mc.sample_iid(dist, 1_000_000, 2, 55)
        sums = draws[:, 0] + draws[:, 1]
        for q in np.linspace(0.1, 0.9, 10):
            tau = 2.0 * float(dist.quantile(float(q)))
            analytic = convolve_cdf(dist, tau)
            emp = float(np.mean(sums <= tau))
            sigma = math.sqrt(max(analytic * (1 - analytic), 1e-12) / len(sums))
            worst = max(worst, abs(emp - analytic) / (3.0 * sigma))
    return CheckResult("mc", "convolution_matches_simulation",
                       worst <= 1.0, f"max |emp - conv| = {worst:.2f} x its "
                                     "3-sigma bound")


# ---------------------------------------------------------------- recall

def _check_perm_sum() -> CheckResult:
    from itertools import permutations
    rng = np.random.default_rng(_VERIFY_SEED + 9)
    worst = 0.0
    for n in range(1, 7):
        rates = tuple(float(r) for r in rng.uniform(0.2, 3.0, n))
        model = recall.RecallModel(rates)
        total = sum(recall.vu_order_probability(model, p)
                    for p in permutations(range(n)))
        worst = max(worst, abs(total - 1.0))
    return CheckResult("recall", "order_probabilities_normalize",
                       worst <= 1e-12, f"max |sum - 1| = {worst:.3e}")


def _check_equivalence() -> CheckResult:
    from itertools import permutations
    rng = np.random.default_rng(_VERIFY_SEED + 10)
    min_p = 1.0
    for n in (2, 3, 4):
        rates = tuple(float(r) for r in rng.uniform(0.5, 2.5, n))
        model = recall.RecallModel(rates)
        a = recall.sample_vu_serial(model, 100_000, 2024)
        b = recall.sample_parallel_expo(model, 100_000, 4048)
        perms = list(permutations(range(n)))
        index = {p: i for i, p in enumerate(perms)}
        counts = np.zeros((2, len(perms)))
        for row, trials in enumerate((a, b)):
            keys = [tuple(o) for o in trials.orders]
            for key in keys:
                counts[row, index[key]] += 1
        _, p_chi2, _, _ = stats.chi2_contingency(counts)
        min_p = min(min_p, float(p_chi2))
        for j in range(n):
            ks = stats.ks_2samp(a.icts[:, j], b.icts[:, j])
            min_p = min(min_p, float(ks.pvalue))
    return CheckResult("recall", "serial_parallel_equivalence",
                       min_p >= 0.001, f"min p-value = {min_p:.4f} "
                                       "(chi2 on orders, KS per stage; level 0.001)")


def _check_equal_rate_reduction() -> CheckResult:
    worst = 0.0
    u = 1.3
    for n in (2, 3, 5):
        model = recall.RecallModel((u,) * n)
        rng = np.random.default_rng(_VERIFY_SEED + n)
        for _ in range(20):
            icts = rng.uniform(0.01, 2.0, n)
            order = tuple(rng.permutation(n))
            got = recall.vu_ict_density(model, order, icts)
            expected = 1.0
            for j, t in enumerate(icts, start=1):
                rate = (n - j + 1) * u
                expected *= rate * math.exp(-rate * t)
            worst = max(worst, abs(got - expected) / max(expected, 1e-300))
    return CheckResult("recall", "equal_rate_density_reduction",
                       worst <= 1e-12, f"max rel err = {worst:.3e}")


def _check_stage_means() -> CheckResult:
    n, u = 5, 0.8
    model = recall.RecallModel((u,) * n)
    trials = recall.sample_vu_serial(model, 200_000, 31415)
    worst = 0.0
    for j in range(1, n + 1):
        observed = float(trials.icts[:, j - 1].mean())
        expected = recall.rw_mean_ict(n, u, j, "mcgill")
        sigma = expected / math.sqrt(len(trials))  # exponential: sd = mean
        worst = max(worst, abs(observed - expected) / (3 * sigma))
    return CheckResult("recall", "stage_means_match_remaining_rate",
                       worst <= 1.0, f"max |mean gap| = {worst:.2f} x its "
                                     "3-sigma bound (mcgill convention)")


def _check_mle() -> CheckResult:
    dist = Weibull(0.7, 2.0)
    data = mc.sample_iid(dist, 10_000, 1, 321)[:, 0]
    fit = recall.weibull_mle(data)
    ok = fit.converged and 0.68 <= fit.k_hat <= 0.72 and 1.96 <= fit.u_hat <= 2.04
    # gradient check in log-parameters against the local curvature scale
    h = 1e-4
    def ll(lk, lu):
        return recall.loglik_weibull(data, math.exp(lk), math.exp(lu))
    lk, lu = math.log(fit.k_hat), math.log(fit.u_hat)
    gk = (ll(lk + h, lu) - ll(lk - h, lu)) / (2 * h)
    gu = (ll(lk, lu + h) - ll(lk, lu - h)) / (2 * h)
    hkk = (ll(lk + h, lu) - 2 * ll(lk, lu) + ll(lk - h, lu)) / h ** 2
    huu = (ll(lk, lu + h) - 2 * ll(lk, lu) + ll(lk, lu - h)) / h ** 2
    rel = max(abs(gk) / abs(hkk), abs(gu) / abs(huu))
    ok = ok and rel < 1e-4
    return CheckResult("recall", "weibull_mle_recovery",
                       ok, f"k_hat={fit.k_hat:.4f}, u_hat={fit.u_hat:.4f}, "
                           f"gradient/curvature = {rel:.2e}")


_SUITES: dict[str, list[Callable[[], CheckResult]]] = {
    "analysis": [_check_route_agreement, _check_fixed_order_nonnegative,
                 _check_conv_closed_forms, _check_conv_bounds,
                 _check_parallel_zero, _check_gap_sign_consistency,
                 _check_hazard_ratio_threshold, _check_conditional_survival_monotone,
                 _check_uniform_regimes],
    "mc": [_check_theorem1_fraction, _check_theorem1_stability,
           _check_determinism, _check_serial_marginals, _check_parallel_cov,
           _check_fixed_order_covariance, _check_conv_mc_oracle],
    "recall": [_check_perm_sum, _check_equivalence, _check_equal_rate_reduction,
               _check_stage_means, _check_mle],
}


def run_suite(name: str) -> list[CheckResult]:
    """Run one suite ('analysis', 'mc', 'recall') or 'all'."""
    if name == "all":
        names = ["analysis", "mc", "recall"]
    elif name in _SUITES:
        names = [name]
    else:
        raise ValueError(f"unknown suite {name!r} "
                         f"(expected all, {', '.join(_SUITES)})")
    results = []
    for suite in names:
        for check in _SUITES[suite]:
            results.append(check())
    return results
