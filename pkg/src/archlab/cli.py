"""Command line front end.

Subcommands: ``figure``, ``theorem1``, ``dependence``, ``stage-survival``,
``simulate``, ``fit``, ``verify``.  All numeric output is written with 17
significant digits, so files re-parse to the exact same doubles; with the
same flags and seed every command is byte-identical between runs.

Exit codes: 0 success, 1 usage error, 2 domain or convergence error,
3 verification failure.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import sys
from typing import Sequence

import numpy as np

from . import mc, recall, verify
from .distributions import (ProcessingTimeDistribution, Uniform,
                            Weibull, parse_spec)
from .errors import ArchlabError, DistSpecError, UsageError
from .numerics import Axis, GridSpec, convolve_cdf, fmt17, grid_eval
from .parallel import ParallelTwoModel, stage_survival_gap, stage_survival_grid
from .serial import SerialTwoModel, dependence_profile, expression3

_FIG_DEFAULT_K = {"fig4": 0.5, "fig5": 0.2, "fig6": 2.0}


def _json_17g(obj) -> str:
    """JSON with floats rendered at 17 significant digits."""
    if isinstance(obj, dict):
        items = (f"{json.dumps(k)}: {_json_17g(v)}" for k, v in obj.items())
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(_json_17g(v) for v in obj) + "]"
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return json.dumps(obj)
    if isinstance(obj, float):
        if math.isfinite(obj):
            return fmt17(obj)
        return json.dumps(obj)  # Infinity / -Infinity / NaN, as json does
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _write_text(out_path: str | None, text: str) -> None:
    if out_path is None or out_path == "-":
        sys.stdout.write(text)
    else:
        with open(out_path, "w", newline="") as fh:
            fh.write(text)


def _parse_dist(spec: str) -> ProcessingTimeDistribution:
    try:
        return parse_spec(spec)
    except DistSpecError as exc:
        raise UsageError(f"--dist: {exc}") from exc


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        raise UsageError(f"{self.prog}: {message}")


def _build_parser() -> _Parser:
    parser = _Parser(prog="archlab",
                     description="Dependence analysis for two-process "
                                 "serial/parallel processing-time models")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    fig = sub.add_parser("figure", help="emit a named data grid")
    fig.add_argument("id", choices=["fig4", "fig5", "fig6", "fig7"])
    fig.add_argument("--k", type=float, default=None,
                     help="Weibull shape override (fig4/5/6)")
    fig.add_argument("--u", type=float, default=1.0,
                     help="Weibull rate (fig6; default 1)")
    fig.add_argument("--v", type=float, default=2.0,
                     help="uniform upper bound (fig7; default 2)")
    fig.add_argument("--steps", type=int, default=100)
    fig.add_argument("--workers", type=int, default=1)
    fig.add_argument("--out", default=None)
    fig.add_argument("--format", choices=["csv", "json"], default="csv")

    th = sub.add_parser("theorem1", help="order-constrained sign Monte Carlo")
    th.add_argument("--n", type=int, default=1_000_000)
    th.add_argument("--seed", type=int, default=mc.DEFAULT_SEED)
    th.add_argument("--out", default=None)
    th.add_argument("--format", choices=["csv", "json"], default="json")

    dep = sub.add_parser("dependence", help="serial dependence profile over tau")
    dep.add_argument("--dist", required=True, help="e.g. weibull:k=2,u=1")
    dep.add_argument("--p", type=float, default=0.5)
    dep.add_argument("--tau-min", type=float, default=0.0,
                     help="0 starts at the first positive grid point")
    dep.add_argument("--tau-max", type=float, default=None,
                     help="default: quantile 0.999 of the stage sum scale")
    dep.add_argument("--steps", type=int, default=100)
    dep.add_argument("--out", default=None)
    dep.add_argument("--format", choices=["csv", "json"], default="csv")

    st = sub.add_parser("stage-survival", help="parallel stage-survival grid")
    st.add_argument("--dist", required=True)
    st.add_argument("--t-min", type=float, default=0.0)
    st.add_argument("--t-max", type=float, default=None)
    st.add_argument("--ta-min", type=float, default=0.0)
    st.add_argument("--ta-max", type=float, default=None)
    st.add_argument("--steps", type=int, default=100)
    st.add_argument("--out", default=None)
    st.add_argument("--format", choices=["csv", "json"], default="csv")

    sim = sub.add_parser("simulate", help="trial traces for a model")
    sim.add_argument("arch", choices=["serial", "parallel",
                                      "recall-serial", "recall-parallel"])
    sim.add_argument("--dist", default=None)
    sim.add_argument("--p", type=float, default=0.5)
    sim.add_argument("--rates", default=None,
                     help="comma-separated rates for recall models")
    sim.add_argument("--n", type=int, default=10_000)
    sim.add_argument("--seed", type=int, default=mc.DEFAULT_SEED)
    sim.add_argument("--out", default=None)
    sim.add_argument("--format", choices=["csv", "json"], default="csv")

    fit = sub.add_parser("fit", help="Weibull MLE on a column of times")
    fit.add_argument("--input", required=True,
                     help="CSV with header 'time', one positive time per row")
    fit.add_argument("--out", default=None)
    fit.add_argument("--format", choices=["csv", "json"], default="json")

    ver = sub.add_parser("verify", help="run the verification suites")
    ver.add_argument("--suite", choices=["all", "analysis", "mc", "recall"],
                     default="all")
    ver.add_argument("--out", default=None)
    return parser


def _tau_grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if steps < 2:
        raise UsageError("--steps must be >= 2")
    if not hi > lo:
        raise UsageError(f"--tau-max ({hi}) must exceed --tau-min ({lo})")
    if lo == 0.0:
        return np.linspace(lo, hi, steps + 1)[1:]
    return np.linspace(lo, hi, steps)


def _cmd_figure(args) -> int:
    steps = args.steps
    if steps < 2:
        raise UsageError("--steps must be >= 2")
    if args.id in ("fig4", "fig5"):
        k = args.k if args.k is not None else _FIG_DEFAULT_K[args.id]
        grid = GridSpec(axes=(Axis("u", 0.5, 10.0, steps),
                              Axis("tau", 0.01, 5.0, steps)))

        def cell(u: float, tau: float) -> float:
            dist = Weibull(k, u)
            return expression3(float(dist.cdf(tau)), convolve_cdf(dist, tau))

        result = grid_eval(cell, grid, workers=args.workers)
    else:
        if args.id == "fig6":
            k = args.k if args.k is not None else _FIG_DEFAULT_K["fig6"]
            model = ParallelTwoModel(parse_spec(f"weibull:k={k!r},u={args.u!r}"))
            lo, hi = 0.0, 10.0
        else:
            model = ParallelTwoModel(parse_spec(f"uniform:v={args.v!r}"))
            lo, hi = 0.0, 1.0
            if isinstance(model.dist, Uniform) and hi >= model.dist.v:
                raise ArchlabError(
                    f"axis t: grid end {hi} is outside the support "
                    f"[0, {model.dist.v}) of {model.dist.spec_string()}")
        grid = GridSpec(axes=(Axis("t", lo, hi, steps),
                              Axis("Ta", lo, hi, steps)))

        def cell(t: float, ta: float) -> float:
            return stage_survival_gap(model, t, ta).expr4

        result = grid_eval(cell, grid, workers=args.workers)

    if args.format == "csv":
        _write_text(args.out, result.to_csv_string())
    else:
        rows = [{"axis1": float(pt[0]), "axis2": float(pt[1]), "value": float(v)}
                for pt, v in zip(grid.points(), result.values.reshape(-1))]
        _write_text(args.out, _json_17g({"figure": args.id, "rows": rows}) + "\n")
    return 0


def _cmd_theorem1(args) -> int:
    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    res = mc.run_theorem1_mc(args.n, args.seed)
    payload = res.to_json_dict()
    if args.format == "csv":
        buf = io.StringIO()
        buf.write(",".join(payload.keys()) + "\n")
        buf.write(",".join(fmt17(v) if isinstance(v, float) else str(v)
                           for v in payload.values()) + "\n")
        _write_text(args.out, buf.getvalue())
    else:
        _write_text(args.out, _json_17g(payload) + "\n")
    return 0


def _cmd_dependence(args) -> int:
    dist = _parse_dist(args.dist)
    model = SerialTwoModel(dist, args.p)
    tau_max = args.tau_max
    if tau_max is None:
        tau_max = 2.0 * float(dist.quantile(0.999))
    taus = _tau_grid(args.tau_min, tau_max, args.steps)
    profile = dependence_profile(model, taus)
    if args.format == "csv":
        buf = io.StringIO()
        profile.to_csv(buf)
        _write_text(args.out, buf.getvalue())
    else:
        rows = [{"tau": pt.tau, "F": pt.f, "conv": pt.conv,
                 "marginal_a": pt.marginal_a, "marginal_b": pt.marginal_b,
                 "R": pt.r, "difference": pt.difference, "sign": pt.sign}
                for pt in profile.points]
        _write_text(args.out, _json_17g({"rows": rows}) + "\n")
    return 0


def _cmd_stage_survival(args) -> int:
    dist = _parse_dist(args.dist)
    model = ParallelTwoModel(dist)
    upper = dist.support_upper
    t_max = args.t_max if args.t_max is not None else (
        0.45 * upper if np.isfinite(upper) else 3.0 * dist.typical_scale)
    ta_max = args.ta_max if args.ta_max is not None else t_max
    for name, hi in (("t", t_max), ("Ta", ta_max)):
        if hi >= upper:
            raise ArchlabError(f"axis {name}: grid end {hi} is outside the "
                               f"support [0, {upper}) of {args.dist}")
    t_vals = np.linspace(args.t_min, t_max, args.steps)
    ta_vals = np.linspace(args.ta_min, ta_max, args.steps)
    grid = stage_survival_grid(model, t_vals, ta_vals)
    if args.format == "csv":
        buf = io.StringIO()
        grid.to_csv(buf)
        _write_text(args.out, buf.getvalue())
    else:
        rows = [{"t": r.t, "Ta": r.ta, "alpha": r.alpha, "expr4": r.expr4,
                 "gap": r.gap, "sign": r.sign} for r in grid.records]
        _write_text(args.out, _json_17g({"rows": rows}) + "\n")
    return 0


def _parse_rates(raw: str | None) -> tuple[float, ...]:
    if not raw:
        raise UsageError("--rates is required for recall architectures")
    try:
        return tuple(float(tok) for tok in raw.split(","))
    except ValueError:
        raise UsageError(f"--rates: could not parse {raw!r} as "
                         "comma-separated floats") from None


def _cmd_simulate(args) -> int:
    if args.n < 1:
        raise UsageError(f"--n must be >= 1, got {args.n}")
    if args.arch in ("serial", "parallel"):
        if args.dist is None:
            raise UsageError(f"--dist is required for --arch {args.arch}")
        dist = _parse_dist(args.dist)
        if args.arch == "serial":
            trials = mc.simulate_serial(SerialTwoModel(dist, args.p),
                                        args.n, args.seed)
        else:
            trials = mc.simulate_parallel(ParallelTwoModel(dist),
                                          args.n, args.seed)
        if args.format == "csv":
            buf = io.StringIO()
            trials.to_csv(buf)
            _write_text(args.out, buf.getvalue())
        else:
            rows = [{"trial": i,
                     "order": "b_first" if trials.order_b_first[i] else "a_first",
                     "t1": float(trials.t1[i]), "t2": float(trials.t2[i]),
                     "total_a": float(trials.total_a[i]),
                     "total_b": float(trials.total_b[i])}
                    for i in range(len(trials))]
            _write_text(args.out, _json_17g({"rows": rows}) + "\n")
        return 0

    model = recall.RecallModel(_parse_rates(args.rates))
    sampler = (recall.sample_vu_serial if args.arch == "recall-serial"
               else recall.sample_parallel_expo)
    trials = sampler(model, args.n, args.seed)
    if args.format == "csv":
        buf = io.StringIO()
        trials.to_csv(buf)
        _write_text(args.out, buf.getvalue())
    else:
        totals = trials.totals()
        rows = [{"trial": i, "position": j + 1,
                 "item": int(trials.orders[i, j]),
                 "ict": float(trials.icts[i, j]),
                 "cumulative_time": float(totals[i, j])}
                for i in range(len(trials)) for j in range(trials.n_items)]
        _write_text(args.out, _json_17g({"rows": rows}) + "\n")
    return 0


def _read_times(path: str) -> np.ndarray:
    try:
        fh = open(path, "r")
    except OSError as exc:
        raise UsageError(f"--input: {exc}") from exc
    times = []
    with fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if lineno == 1:
                if text != "time":
                    raise ArchlabError(
                        f"line 1: expected header 'time', got {text!r}")
                continue
            if not text:
                continue
            try:
                value = float(text)
            except ValueError:
                raise ArchlabError(
                    f"line {lineno}: could not parse {text!r} as a time") from None
            if not value > 0:
                raise ArchlabError(
                    f"line {lineno}: times must be positive, got {text!r}")
            times.append(value)
    return np.asarray(times, dtype=float)


def _cmd_fit(args) -> int:
    data = _read_times(args.input)
    fit = recall.weibull_mle(data)
    payload = fit.to_json_dict(n=int(data.size), seed=None)
    if args.format == "csv":
        buf = io.StringIO()
        buf.write(",".join(payload.keys()) + "\n")
        buf.write(",".join(fmt17(v) if isinstance(v, float) else json.dumps(v)
                           for v in payload.values()) + "\n")
        _write_text(args.out, buf.getvalue())
    else:
        _write_text(args.out, _json_17g(payload) + "\n")
    return 0


def _cmd_verify(args) -> int:
    results = verify.run_suite(args.suite)
    lines = []
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        lines.append(f"{status} {res.suite}/{res.name}: {res.detail}")
    n_fail = sum(not r.passed for r in results)
    lines.append(f"{len(results) - n_fail}/{len(results)} checks passed")
    text = "\n".join(lines) + "\n"
    sys.stdout.write(text)
    if args.out:
        _write_text(args.out, text)
    return 0 if n_fail == 0 else 3


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("archlab: a subcommand is required "
                             "(figure, theorem1, dependence, stage-survival, "
                             "simulate, fit, verify)")
        handler = {
            "figure": _cmd_figure,
            "theorem1": _cmd_theorem1,
            "dependence": _cmd_dependence,
            "stage-survival": _cmd_stage_survival,
            "simulate": _cmd_simulate,
            "fit": _cmd_fit,
            "verify": _cmd_verify,
        }[args.command]
        return handler(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    except ArchlabError as exc:
        print(f"archlab: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
