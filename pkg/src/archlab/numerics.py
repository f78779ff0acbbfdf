"""Quadrature, the f*F convolution, and grid evaluation utilities.

The convolution of two iid processing times,

    f*F(tau) = P(z1 + z2 <= tau) = int_0^tau f(x) F(tau - x) dx,

is computed in the equivalent split form
``F(tau/2)^2 + 2 int_{tau/2}^tau f(x) F(tau - x) dx`` so that densities are
never evaluated near the origin (where the Weibull density with k < 1
diverges).  Closed forms are used for the exponential and uniform families
unless the numerical path is explicitly requested for cross-checking.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import kernels
from .distributions import Exponential, ProcessingTimeDistribution, Uniform
from .errors import DomainError, GridEvalError, QuadratureConvergenceError

#: Absolute tolerance under which a computed difference counts as zero when
#: classifying signs; matches the achievable resolution of the default
#: quadrature tolerance.
SIGN_TOL = 1e-9


def classify_sign(x: float, tol: float = SIGN_TOL) -> str:
    """Classify ``x`` as 'negative', 'zero' or 'positive' under ``tol``."""
    if math.isnan(x):
        raise DomainError("cannot classify the sign of nan")
    if x > tol:
        return "positive"
    if x < -tol:
        return "negative"
    return "zero"


def fmt17(x: float) -> str:
    """17-significant-digit decimal form; round-trips float64 exactly."""
    return format(float(x), ".17g")


@dataclass(frozen=True)
class QuadratureConfig:
    """Adaptive-Simpson settings.

    ``breakpoints`` are abscissae at which the integrand may kink or jump;
    the integration interval is split there before any refinement.
    """

    abs_tol: float = 1e-8
    max_depth: int = 40
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        if not (self.abs_tol > 0):
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if self.max_depth < 1:
            raise DomainError(f"max_depth must be >= 1, got {self.max_depth}")
        object.__setattr__(self, "breakpoints",
                           tuple(sorted(float(b) for b in self.breakpoints)))


DEFAULT_QUADRATURE = QuadratureConfig()


def _simpson(fa, fm, fb, a, b):
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb)


def _adapt(fn, a, fa, m, fm, b, fb, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = fn(lm)
    frm = fn(rm)
    left = _simpson(fa, flm, fm, a, m)
    right = _simpson(fm, frm, fb, m, b)
    delta = left + right - whole
    if abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0, True
    if depth <= 0:
        return left + right + delta / 15.0, False
    lv, lok = _adapt(fn, a, fa, lm, flm, m, fm, left, 0.5 * tol, depth - 1)
    rv, rok = _adapt(fn, m, fm, rm, frm, b, fb, right, 0.5 * tol, depth - 1)
    return lv + rv, lok and rok


def integrate(fn: Callable[[float], float], a: float, b: float,
              cfg: QuadratureConfig = DEFAULT_QUADRATURE) -> float:
    """Adaptive-Simpson integral of ``fn`` over [a, b].

    The interval is split at every configured breakpoint strictly inside
    (a, b); each segment receives a tolerance share proportional to its
    length.  Raises :class:`QuadratureConvergenceError` (carrying the best
    estimate) if the depth limit is hit before the tolerance is met.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError(f"integration bounds must be finite, got [{a}, {b}]")
    if b < a:
        raise DomainError(f"integration bounds out of order: [{a}, {b}]")
    if b == a:
        return 0.0
    cuts = [a] + [p for p in cfg.breakpoints if a < p < b] + [b]
    total = 0.0
    ok = True
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        seg_tol = cfg.abs_tol * (hi - lo) / (b - a)
        m = 0.5 * (lo + hi)
        # segment ends sit on breakpoints: take one-sided limits there
        flo = fn(math.nextafter(lo, hi))
        fm = fn(m)
        fhi = fn(math.nextafter(hi, lo))
        whole = _simpson(flo, fm, fhi, lo, hi)
        val, seg_ok = _adapt(fn, lo, flo, m, fm, hi, fhi, whole, seg_tol, cfg.max_depth)
        total += val
        ok = ok and seg_ok
    if not ok:
        raise QuadratureConvergenceError(
            f"adaptive Simpson hit depth {cfg.max_depth} before reaching "
            f"abs_tol={cfg.abs_tol} on [{a}, {b}]", best_estimate=total)
    return total


def convolve_cdf(dist: ProcessingTimeDistribution, tau: float,
                 cfg: QuadratureConfig = DEFAULT_QUADRATURE,
                 force_numeric: bool = False) -> float:
    """P(z1 + z2 <= tau) for two iid draws from ``dist``.

    Exponential and uniform inputs use their closed forms:

    * exponential: 1 - e^(-u tau) - u tau e^(-u tau)
    * uniform: tau^2/(2 v^2) on [0, v); 2 tau/v - tau^2/(2 v^2) - 1 on
      [v, 2 v); 1 beyond

    ``force_numeric=True`` routes them through the quadrature path instead
    (retained for cross-checking).  The Weibull family has no closed form
    and always integrates numerically, as do custom distributions.
    """
    if not math.isfinite(tau):
        raise DomainError(f"tau must be finite, got {tau}")
    if tau < 0:
        raise DomainError(f"tau must be nonnegative, got {tau}")
    if tau == 0.0:
        return 0.0

    if not force_numeric:
        if isinstance(dist, Exponential):
            ut = dist.u * tau
            return -math.expm1(-ut) - ut * math.exp(-ut)
        if isinstance(dist, Uniform):
            v = dist.v
            if tau < v:
                return tau * tau / (2.0 * v * v)
            if tau < 2.0 * v:
                return 2.0 * tau / v - tau * tau / (2.0 * v * v) - 1.0
            return 1.0

    coded = kernels.family_code(dist)
    if coded is not None:
        code, p1, p2 = coded
        val, converged = kernels.conv_cdf(code, p1, p2, tau,
                                          cfg.abs_tol, cfg.max_depth)
        if not converged:
            raise QuadratureConvergenceError(
                f"convolution quadrature did not converge at tau={tau} "
                f"for {dist!r}", best_estimate=val)
        return val

    # custom distribution: same split, generic callables
    half = 0.5 * tau
    inner_breaks = set()
    for b in dist.breakpoints():
        for p in (b, tau - b):
            if half < p < tau:
                inner_breaks.add(float(p))
    inner_cfg = QuadratureConfig(abs_tol=0.5 * cfg.abs_tol,
                                 max_depth=cfg.max_depth,
                                 breakpoints=tuple(inner_breaks))
    def integrand(x: float) -> float:
        return float(dist.pdf(x)) * float(dist.cdf(tau - x))

    integral = integrate(integrand, half, tau, inner_cfg)
    f_half = float(dist.cdf(half))
    conv = f_half * f_half + 2.0 * integral
    return min(max(conv, 0.0), float(dist.cdf(tau)))


# --------------------------------------------------------------------------
# Grids
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Axis:
    """A linearly spaced axis descriptor."""

    name: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if not (self.lo < self.hi):
            raise DomainError(f"axis {self.name!r}: need lo < hi, "
                              f"got [{self.lo}, {self.hi}]")
        if self.steps < 2:
            raise DomainError(f"axis {self.name!r}: need steps >= 2, got {self.steps}")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, self.steps)


@dataclass(frozen=True)
class GridSpec:
    """One or two axes evaluated over their cartesian product."""

    axes: tuple[Axis, ...]

    def __post_init__(self):
        if not 1 <= len(self.axes) <= 2:
            raise DomainError(f"GridSpec supports 1 or 2 axes, got {len(self.axes)}")

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(ax.steps for ax in self.axes)

    def points(self) -> list[tuple[float, ...]]:
        """Row-major points: first axis varies slowest."""
        vals = [ax.values() for ax in self.axes]
        if len(vals) == 1:
            return [(float(x),) for x in vals[0]]
        return [(float(x), float(y)) for x in vals[0] for y in vals[1]]


@dataclass
class GridResult:
    """Values over a grid; serializes to CSV with 17-digit floats."""

    grid: GridSpec
    values: np.ndarray = field(repr=False)

    def to_csv(self, out) -> None:
        """Write ``axis1[,axis2],value`` rows in row-major order."""
        close = False
        if isinstance(out, (str, bytes)):
            out = open(out, "w", newline="")
            close = True
        try:
            headers = [f"axis{i + 1}" for i in range(len(self.grid.axes))]
            out.write(",".join(headers + ["value"]) + "\n")
            flat = self.values.reshape(-1)
            for point, val in zip(self.grid.points(), flat):
                cols = [fmt17(c) for c in point] + [fmt17(val)]
                out.write(",".join(cols) + "\n")
        finally:
            if close:
                out.close()

    def to_csv_string(self) -> str:
        buf = io.StringIO()
        self.to_csv(buf)
        return buf.getvalue()


def grid_eval(fn: Callable[..., float], grid: GridSpec,
              workers: int | None = None) -> GridResult:
    """Evaluate ``fn`` at every grid point.

    Cells may be evaluated concurrently (``workers`` is a hint), but the
    result is always assembled in cell-index order, so the output is
    deterministic regardless of worker count.  The first failing cell (in
    index order) is reported with its coordinates.
    """
    points = grid.points()
    values = np.empty(len(points), dtype=float)
    errors: dict[int, BaseException] = {}

    def run(idx: int) -> None:
        try:
            values[idx] = fn(*points[idx])
        except BaseException as exc:  # noqa: BLE001 - reported with coordinates
            errors[idx] = exc

    if workers is None or workers <= 1:
        for idx in range(len(points)):
            run(idx)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, range(len(points))))

    if errors:
        idx = min(errors)
        exc = errors[idx]
        names = ", ".join(f"{ax.name}={c!r}" for ax, c in zip(grid.axes, points[idx]))
        raise GridEvalError(f"grid cell ({names}) failed: {exc}",
                            point=points[idx]) from exc
    return GridResult(grid=grid, values=values.reshape(grid.shape))


def write_rows_csv(out, header: Sequence[str], rows: Iterable[Sequence]) -> None:
    """Write rows of floats/strings with 17-digit float formatting."""
    close = False
    if isinstance(out, (str, bytes)):
        out = open(out, "w", newline="")
        close = True
    try:
        out.write(",".join(header) + "\n")
        for row in rows:
            cols = [c if isinstance(c, str) else fmt17(c) for c in row]
            out.write(",".join(cols) + "\n")
    finally:
        if close:
            out.close()
