"""Command-line front end: ``mems-pullin <command> [options]``.

Exit codes: 0 success, 1 usage error, 2 computation failure, 3 partial
sweep failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Optional, Sequence

import numpy as np

from . import __version__, _backend
from . import io as fio
from .dynamics import (
    DEFAULT_OPTIONS,
    BudgetExhausted,
    IntegrationOptions,
    Touchdown,
    classify_trajectory,
    conservative_orbit,
    integrate,
    outcome_to_dict,
    residence_profile,
)
from .manifold import trace_stable_manifold
from .model import DomainError, Params, PhaseState, force, potential
from .pullin import BracketError, Method, alpha_star, sweep_curve
from .steady import LAMBDA_STAR, EquilibriumKind, equilibria, stability

EXIT_OK, EXIT_USAGE, EXIT_FAIL, EXIT_PARTIAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (endpoints inclusive within half a step) or a
    comma-separated list; the result must be strictly increasing."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"grid {text!r} must be start:stop:step")
        start, stop, step = (float(p) for p in parts)
        if not step > 0 or stop < start:
            raise UsageError(f"grid {text!r} needs step > 0 and stop >= start")
        n = int(math.floor((stop - start) / step + 0.5))
        vals = [start + i * step for i in range(n + 1)]
    else:
        vals = [float(p) for p in text.split(",") if p.strip()]
    if not vals:
        raise UsageError("empty grid")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise UsageError(f"grid {text!r} is not strictly increasing")
    # snap float noise from the step arithmetic to 12 significant digits
    return [float(f"{v:.12g}") for v in vals]


def _positive(name: str, v: Optional[float]) -> float:
    if v is None or not v > 0 or not math.isfinite(v):
        raise UsageError(f"--{name} must be a positive number")
    return v


def _nonneg(name: str, v: Optional[float]) -> float:
    if v is None or not v >= 0 or not math.isfinite(v):
        raise UsageError(f"--{name} must be a nonnegative number")
    return v


def _options(args) -> IntegrationOptions:
    kw = {}
    if getattr(args, "t_max", None) is not None:
        kw["t_max"] = _positive("t-max", args.t_max)
    if getattr(args, "rtol", None) is not None:
        kw["rtol"] = _positive("rtol", args.rtol)
    if getattr(args, "atol", None) is not None:
        kw["atol"] = _positive("atol", args.atol)
    return replace(DEFAULT_OPTIONS, **kw)


class Report:
    """Accumulates the effective configuration and the output payload."""

    def __init__(self, args):
        self.command = args.command
        self.fmt = args.format
        self.out = args.out
        self.config: dict = {"command": args.command, "format": args.format, "out": args.out}
        self.failures: list = []
        self.t0 = time.perf_counter()

    def stats(self) -> dict:
        return {
            "wall_time": time.perf_counter() - self.t0,
            "version": __version__,
            "backend": _backend.BACKEND,
            "failures": self.failures,
        }

    def emit(self, text: str) -> None:
        if self.out:
            with open(self.out, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)

    def emit_json(self, results) -> None:
        self.emit(fio.to_json(self.config, results, self.stats()))

    def emit_table(self, table: fio.Table) -> None:
        self.emit(fio.write_table(table))


# -- commands ---------------------------------------------------------------

def cmd_equilibria(args, rep: Report) -> int:
    lam = _positive("lambda", args.vlambda)
    alpha = _nonneg("alpha", args.alpha if args.alpha is not None else 0.0)
    rep.config.update({"lambda": lam, "alpha": alpha})
    eq = equilibria(lam)
    res = {"lambda": lam, "kind": eq.kind.value, "points": []}
    pts = [] if not eq.exists else ([eq.x1] if eq.kind is EquilibriumKind.DEGENERATE else [eq.x1, eq.x2])
    for x in pts:
        r = stability(x, Params(lam, alpha))
        res["points"].append({
            "x": x, "label": r.label.value, "stiffness": r.stiffness,
            "mu_plus": [r.mu_plus.real, r.mu_plus.imag],
            "mu_minus": [r.mu_minus.real, r.mu_minus.imag],
        })
    if rep.fmt == "json":
        rep.emit_json(res)
        return EXIT_OK
    lines = [f"# config: {json.dumps(rep.config, sort_keys=True)}"]
    if eq.kind is EquilibriumKind.NONE:
        lines.append(f"no stationary solutions (lambda > 4/27 = {fio.fmt(LAMBDA_STAR)})")
    elif eq.kind is EquilibriumKind.DEGENERATE:
        p = res["points"][0]
        lines.append(f"degenerate stationary solution at x = -1/3 ({p['label']})")
    else:
        lines.append(f"{'name':<4} {'x':>22} {'label':<16} {'mu_plus':>30} {'mu_minus':>30}")
        for name, p in zip(("x1", "x2"), res["points"]):
            mp = complex(*p["mu_plus"])
            mm = complex(*p["mu_minus"])
            lines.append(f"{name:<4} {fio.fmt(p['x']):>22} {p['label']:<16} {mp:>30.12g} {mm:>30.12g}")
    rep.emit("\n".join(lines) + "\n")
    return EXIT_OK


def _trajectory_output(rep: Report, traj) -> None:
    if rep.fmt == "json":
        rep.emit_json(fio.trajectory_json(traj))
    else:
        rep.emit_table(fio.trajectory_table(traj, rep.config))


def cmd_simulate(args, rep: Report) -> int:
    lam = _positive("lambda", args.vlambda)
    alpha = _nonneg("alpha", args.alpha if args.alpha is not None else 0.0)
    x0, y0 = args.x0, args.y0
    if not x0 > -1.0:
        raise UsageError("--x0 must exceed -1")
    opts = _options(args) if args.t_max is not None else replace(_options(args), t_max=100.0)
    rep.config.update({"lambda": lam, "alpha": alpha, "x0": x0, "y0": y0, "options": opts.to_dict()})
    traj = integrate(Params(lam, alpha), PhaseState(0.0, x0, y0), opts)
    _trajectory_output(rep, traj)
    return EXIT_FAIL if isinstance(traj.outcome, BudgetExhausted) and traj.outcome.reason != "t_max reached without a verdict" else EXIT_OK


def cmd_classify(args, rep: Report) -> int:
    lam = _positive("lambda", args.vlambda)
    alpha = _nonneg("alpha", args.alpha if args.alpha is not None else 0.0)
    opts = _options(args)
    rep.config.update({"lambda": lam, "alpha": alpha, "options": opts.to_dict()})
    traj = classify_trajectory(Params(lam, alpha), opts)
    if rep.fmt == "json":
        rep.emit_json(fio.trajectory_json(traj))
    else:
        rep.emit_table(fio.trajectory_table(traj, rep.config))
    return EXIT_FAIL if isinstance(traj.outcome, BudgetExhausted) else EXIT_OK


def cmd_manifold(args, rep: Report) -> int:
    lam = _positive("lambda", args.vlambda)
    alpha = _nonneg("alpha", args.alpha if args.alpha is not None else 0.0)
    rep.config.update({"lambda": lam, "alpha": alpha, "u_max": args.u_max})
    try:
        tr = trace_stable_manifold(Params(lam, alpha), args.u_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if rep.fmt == "json":
        rep.emit_json(tr.as_dict())
    else:
        rep.emit_table(fio.manifold_table(tr, rep.config))
    return EXIT_OK


def cmd_pullin(args, rep: Report) -> int:
    methods = [Method.TRAJECTORY, Method.MANIFOLD] if args.method == "both" else [Method(args.method)]
    opts = _options(args)
    tols = {m.value: (m.default_tol if args.tol is None else args.tol) for m in methods}
    rep.config.update({"method": args.method, "tol": tols, "jobs": args.jobs, "options": opts.to_dict()})
    if args.vlambda is not None:
        # critical damping at a fixed load
        lam = _positive("lambda", args.vlambda)
        rep.config["lambda"] = lam
        pts = []
        try:
            for m in methods:
                pts.append(alpha_star(lam, m, args.tol, opts))
        except (BracketError, ValueError) as exc:
            rep.failures.append({"lambda": lam, "error": str(exc)})
            if isinstance(exc, ValueError) and not isinstance(exc, BracketError):
                raise UsageError(str(exc)) from exc
        results = {"thresholds": [p.as_dict() for p in pts]}
        if rep.fmt == "json":
            rep.emit_json(results)
        else:
            rows = [(p.lam, p.alpha_star, p.half_width, p.method.value) for p in pts]
            rep.emit_table(fio.make_table(["lambda", "alpha_star", "half_width", "method"], rows,
                                          header=[f"config: {json.dumps(rep.config, sort_keys=True)}"]))
        return EXIT_FAIL if rep.failures else EXIT_OK

    if args.alpha_grid is not None:
        grid = parse_grid(args.alpha_grid)
    elif args.alpha is not None:
        grid = [_nonneg("alpha", args.alpha)]
    else:
        raise UsageError("pullin needs --alpha, --alpha-grid or --lambda")
    if any(a < 0 for a in grid):
        raise UsageError("damping values must be nonnegative")
    rep.config["alpha_grid"] = grid
    curves = [sweep_curve(grid, args.tol, m, opts, jobs=args.jobs) for m in methods]
    n_fail = 0
    for c in curves:
        for p in c.failures:
            rep.failures.append({"alpha": p.alpha, "method": p.method.value, "error": p.error})
        n_fail += len(c.failures)
    if rep.fmt == "json":
        rep.emit_json({"curves": [c.as_dict() for c in curves]})
    else:
        rows, footer = [], []
        for c in curves:
            rows += [(p.alpha, p.lambda_d, p.half_width, p.method.value) for p in c.points]
            footer += [f"failure: {json.dumps({'alpha': p.alpha, 'error': p.error})}" for p in c.failures]
        if len(curves) == 2:
            diffs = [abs(a.lambda_d - b.lambda_d) for a, b in zip(*[c.points for c in curves])]
            footer.append("method_agreement: " + json.dumps({"max_abs_diff": max(diffs)}))
        rep.emit_table(fio.make_table(["alpha", "lambda_d", "half_width", "method"], rows,
                                      header=[f"config: {json.dumps(rep.config, sort_keys=True)}"],
                                      footer=footer))
    total = sum(len(c.points) for c in curves)
    if n_fail == 0:
        return EXIT_OK
    return EXIT_FAIL if n_fail == total else EXIT_PARTIAL


def _classify_point(args):
    lam, alpha, opts = args
    try:
        out = classify_trajectory(Params(lam, alpha), replace(opts, t_eval=())).outcome
        return outcome_to_dict(out)
    except (ValueError, RuntimeError) as exc:
        return {"kind": "error", "error": str(exc)}


def cmd_sweep(args, rep: Report) -> int:
    if args.lambda_grid is None and args.vlambda is None:
        raise UsageError("sweep needs --lambda-grid or --lambda")
    lams = parse_grid(args.lambda_grid) if args.lambda_grid else [_positive("lambda", args.vlambda)]
    alphas = parse_grid(args.alpha_grid) if args.alpha_grid else [_nonneg("alpha", args.alpha or 0.0)]
    if any(l <= 0 for l in lams) or any(a < 0 for a in alphas):
        raise UsageError("grid values out of range")
    opts = _options(args)
    rep.config.update({"lambda_grid": lams, "alpha_grid": alphas, "jobs": args.jobs, "options": opts.to_dict()})
    tasks = [(l, a, opts) for a in alphas for l in lams]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            outs = list(pool.map(_classify_point, tasks, chunksize=max(1, len(tasks) // (4 * args.jobs))))
    else:
        outs = [_classify_point(t) for t in tasks]
    rows = []
    for (l, a, _), o in zip(tasks, outs):
        rows.append((l, a, o["kind"], o.get("t_td")))
        if o["kind"] in ("error", BudgetExhausted.name):
            rep.failures.append({"lambda": l, "alpha": a, **o})
    if rep.fmt == "json":
        rep.emit_json({"points": [{"lambda": l, "alpha": a, "outcome": o} for (l, a, _), o in zip(tasks, outs)]})
    else:
        rep.emit_table(fio.make_table(["lambda", "alpha", "outcome", "t_td"], rows,
                                      header=[f"config: {json.dumps(rep.config, sort_keys=True)}"]))
    if not rep.failures:
        return EXIT_OK
    return EXIT_FAIL if len(rep.failures) == len(tasks) else EXIT_PARTIAL


def phase_portrait_series(lam: float, alpha: float, seeds: Sequence[float], t_max: float) -> dict:
    """Labelled point series for a phase portrait at ``(lam, alpha)``."""
    series: dict[str, np.ndarray] = {}
    opts = replace(DEFAULT_OPTIONS, t_max=t_max, rtol=1e-9, atol=1e-11)
    eq = equilibria(lam)
    if eq.exists:
        pts = [eq.x1] if eq.kind is EquilibriumKind.DEGENERATE else [eq.x1, eq.x2]
        series["equilibria"] = np.array([[x, 0.0] for x in pts])
    if eq.kind is EquilibriumKind.PAIR:
        tr = trace_stable_manifold(Params(lam, alpha))
        # back to the original frame: x = u + x1, y = -Phi
        series["stable_manifold"] = np.column_stack([tr.u_samples + eq.x1, -tr.phi_samples])
        if alpha > 0.0:
            xs = np.linspace(eq.x1, eq.x2, 101)
            series["nullcline"] = np.column_stack([xs, [-force(x, lam) / alpha for x in xs]])
        else:
            # keep x = 0 on the grid so the loop through the origin is sampled there
            xs = np.union1d(np.linspace(eq.x1, 1.0, 801), [0.0])
            series["homoclinic"] = conservative_orbit(lam, potential(eq.x1, lam), xs)
    for i, x0 in enumerate([0.0] + [s for s in seeds if s != 0.0]):
        traj = integrate(Params(lam, alpha), PhaseState(0.0, x0, 0.0), opts)
        name = "orbit_origin" if i == 0 else f"orbit_{i}"
        series[name] = np.column_stack([traj.x, traj.y])
    return series


def cmd_phase_portrait(args, rep: Report) -> int:
    lam = _positive("lambda", args.vlambda)
    alpha = _nonneg("alpha", args.alpha if args.alpha is not None else 0.0)
    seeds = parse_grid(args.seed_grid) if args.seed_grid else []
    if any(s <= -1.0 for s in seeds):
        raise UsageError("seed positions must exceed -1")
    t_max = _positive("t-max", args.t_max) if args.t_max is not None else 50.0
    rep.config.update({"lambda": lam, "alpha": alpha, "seed_grid": seeds, "t_max": t_max})
    series = phase_portrait_series(lam, alpha, seeds, t_max)
    if rep.fmt == "json":
        rep.emit_json({"series": {k: v for k, v in series.items()}})
    else:
        rows = [(name, i, p[0], p[1]) for name, pts in series.items() for i, p in enumerate(pts)]
        rep.emit_table(fio.make_table(["series", "index", "x", "y"], rows,
                                      header=[f"config: {json.dumps(rep.config, sort_keys=True)}"]))
    return EXIT_OK


def cmd_residence(args, rep: Report) -> int:
    lam = _positive("lambda", args.vlambda)
    alpha = _nonneg("alpha", args.alpha if args.alpha is not None else 0.0)
    radius = _positive("radius", args.radius)
    opts = _options(args)
    rep.config.update({"lambda": lam, "alpha": alpha, "radius": radius, "options": opts.to_dict()})
    try:
        prof = residence_profile(Params(lam, alpha), radius, opts)
    except ValueError as exc:
        rep.failures.append(str(exc))
        if rep.fmt == "json":
            rep.emit_json({"error": str(exc)})
        else:
            sys.stderr.write(f"residence profile undefined: {exc}\n")
        return EXIT_FAIL
    if rep.fmt == "json":
        rep.emit_json(prof.as_dict())
    else:
        d = prof.as_dict()
        rep.emit_table(fio.make_table(list(d), [list(d.values())],
                                      header=[f"config: {json.dumps(rep.config, sort_keys=True)}"]))
    return EXIT_OK


COMMANDS = {
    "equilibria": cmd_equilibria,
    "simulate": cmd_simulate,
    "classify": cmd_classify,
    "manifold": cmd_manifold,
    "pullin": cmd_pullin,
    "sweep": cmd_sweep,
    "phase-portrait": cmd_phase_portrait,
    "residence": cmd_residence,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mems-pullin", description="Pull-in thresholds of the damped MEMS mass-spring model.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, fmt_default="csv"):
        sp.add_argument("--lambda", dest="vlambda", type=float, help="load (voltage squared)")
        sp.add_argument("--alpha", type=float, help="damping (inverse quality factor)")
        sp.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        sp.add_argument("--out", help="output path (default: stdout)")

    def integ(sp):
        sp.add_argument("--t-max", dest="t_max", type=float)
        sp.add_argument("--rtol", type=float)
        sp.add_argument("--atol", type=float)

    sp = sub.add_parser("equilibria", help="stationary solutions and their stability")
    common(sp, fmt_default="text")
    sp.set_defaults(format="text")
    sp._option_string_actions["--format"].choices = ("text", "json")

    sp = sub.add_parser("simulate", help="integrate one orbit")
    common(sp)
    integ(sp)
    sp.add_argument("--x0", type=float, default=0.0)
    sp.add_argument("--y0", type=float, default=0.0)

    sp = sub.add_parser("classify", help="regime of the orbit released from rest")
    common(sp)
    integ(sp)

    sp = sub.add_parser("manifold", help="trace the saddle's separatrix branch")
    common(sp)
    sp.add_argument("--u-max", dest="u_max", type=float)

    sp = sub.add_parser("pullin", help="dynamic pull-in value(s) or critical damping")
    common(sp)
    integ(sp)
    sp.add_argument("--alpha-grid", dest="alpha_grid")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--method", choices=("manifold", "trajectory", "both"), default="trajectory")
    sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("sweep", help="classify a (lambda, alpha) grid")
    common(sp)
    integ(sp)
    sp.add_argument("--lambda-grid", dest="lambda_grid")
    sp.add_argument("--alpha-grid", dest="alpha_grid")
    sp.add_argument("--jobs", type=int, default=1)

    sp = sub.add_parser("phase-portrait", help="equilibria, separatrix, nullcline and orbits")
    common(sp)
    sp.add_argument("--t-max", dest="t_max", type=float)
    sp.add_argument("--seed-grid", dest="seed_grid", help="initial positions at rest, grid syntax")

    sp = sub.add_parser("residence", help="approach / dwell / collapse times of a touchdown orbit")
    common(sp)
    integ(sp)
    sp.add_argument("--radius", type=float, default=0.05)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "jobs", 1) is not None and getattr(args, "jobs", 1) < 1:
        parser.error("--jobs must be at least 1")
    if getattr(args, "tol", None) is not None and not args.tol > 0:
        parser.error("--tol must be positive")
    rep = Report(args)
    try:
        return COMMANDS[args.command](args, rep)
    except (UsageError, DomainError) as exc:
        sys.stderr.write(f"mems-pullin {args.command}: error: {exc}\n")
        return EXIT_USAGE
    except (BracketError, RuntimeError) as exc:
        sys.stderr.write(f"mems-pullin {args.command}: computation failed: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
