"""Command-line workbench.

Every subcommand writes its artifacts under ``--out`` and prints a JSON run
summary on stdout.  With ``--check`` the command also runs its built-in
self-checks and exits with status 1 if any fails.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .compact_set import (
    CompactSet,
    cantor_prefractal,
    format_literal,
    hausdorff,
    minkowski_sum,
    parse_literal,
    parse_number,
    scale,
)
from .config import EXAMPLE_CONFIG, check_config, load_config, parse_config
from .dimension import (
    box_count,
    box_count_segments,
    cantor_cloud,
    distance_set_star,
    expected_cantor_dimension,
    graph_box_count,
    graph_segments,
)
from .errors import ConfigError, SetFractalError
from .fractal import chaos_game, ecdf_uniform_distance, fixed_point
from .metric_comb import brute_combination, fold_metric_sum, metric_combination, metric_sum
from .output import band_svg, loglog_svg, scatter_svg, svf_rows, write_json, write_table
from .svf import GridSVF, bernstein_metric, weierstrass_grid, weierstrass_tail_bound, w_table_sets

DEFAULT_SEED = 20240601


class _Run:
    """Collects artifacts and check outcomes for one command."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.out)
        self.summary: dict = {"command": args.command}
        self.checks: dict[str, bool] = {}
        self.files: list[str] = []

    def table(self, name: str, header, rows) -> None:
        p = write_table(self.out / f"{name}.csv", header, rows, self.args.format)
        self.files.append(p.name)

    def svg(self, fn, name: str, *a, **kw) -> None:
        self.files.append(fn(self.out / f"{name}.svg", *a, **kw).name)

    def check(self, name: str, ok: bool) -> None:
        self.checks[name] = bool(ok)

    def finish(self) -> int:
        if self.args.check:
            self.summary["checks"] = self.checks
        self.summary["files"] = self.files + ["summary.json"]
        write_json(self.out / "summary.json", self.summary)
        print(json.dumps(self.summary, sort_keys=True, default=str))
        return 1 if self.args.check and not all(self.checks.values()) else 0


def _weights(text: str) -> list[float]:
    return [parse_number(t) for t in text.split(",") if t.strip()]


# --- commands ------------------------------------------------------------------


def cmd_metric_sum(args) -> int:
    sets = [parse_literal(s) for s in args.sets]
    lams = _weights(args.weights) if args.weights else [1.0] * len(sets)
    if len(lams) != len(sets):
        raise SetFractalError(f"{len(lams)} weights for {len(sets)} sets")
    result = metric_combination(lams, sets)
    print(format_literal(result))
    if args.oracle or args.check:
        if all(s.is_finite for s in sets):
            ok = brute_combination(lams, sets) == result
            print(f"oracle: {'agree' if ok else 'DISAGREE'}", file=sys.stderr)
            if args.check and not ok:
                return 1
        else:
            print("oracle: skipped (sets are not finite)", file=sys.stderr)
    return 0


def _band(run: _Run, name: str, xs, values, title: str) -> None:
    header, rows = svf_rows(xs, values)
    run.table(name, header, rows)
    run.svg(band_svg, name, xs, values, title)


def _weierstrass(run: _Run, res: int, a_lo: float, a_hi: float, terms: int, samples: int) -> None:
    xs = np.linspace(0.0, 1.0, res)
    W = weierstrass_grid(xs, a_lo, a_hi, terms, samples)
    _band(run, "weierstrass", xs, W.values, f"W(x), a in [{a_lo}, {a_hi}]")
    run.summary["weierstrass"] = {
        "res": res,
        "a_range": [a_lo, a_hi],
        "terms": terms,
        "a_samples": samples,
        "tail_bound": weierstrass_tail_bound(a_hi, terms),
    }
    if run.args.check:
        w0 = W.values[0]
        lo_ok = abs(w0.min - 1 / (1 - a_lo)) < 1e-9
        hi_ok = abs(w0.max - (1 - a_hi**terms) / (1 - a_hi)) < 1e-9
        run.check("W(0) endpoints match the geometric series", lo_ok and hi_ok)


def cmd_weierstrass(args) -> int:
    run = _Run(args)
    _weierstrass(run, args.res, args.a_lo, args.a_hi, args.terms, args.samples)
    return run.finish()


def _bernstein(run: _Run, samples: list[CompactSet], points: int) -> None:
    k = len(samples) - 1
    xs = np.linspace(0.0, 1.0, points)
    vals = [bernstein_metric(samples, k, float(x)) for x in xs]
    _band(run, "bernstein", xs, vals, f"metric Bernstein polynomial, k={k}")
    run.summary["bernstein"] = {"k": k, "points": points, "samples": [str(s) for s in samples]}
    if run.args.check:
        run.check("endpoint x=0 reproduces first sample", vals[0] == samples[0])
        run.check("endpoint x=1 reproduces last sample", vals[-1] == samples[-1])


def cmd_bernstein(args) -> int:
    run = _Run(args)
    samples = [parse_literal(s) for s in args.samples] if args.samples else w_table_sets()
    _bernstein(run, samples, args.points)
    return run.finish()


def _config(args):
    if args.config is None:
        return parse_config(EXAMPLE_CONFIG)
    return load_config(args.config)


def cmd_interpolate(args) -> int:
    run = _Run(args)
    cfg = _config(args)
    ifs = check_config(cfg)
    f, rep = fixed_point(ifs, cfg.tol, cfg.max_iter, cfg.min_mesh)
    _band(run, "interpolant", f.xs, f.values, "fractal interpolant")
    node_err = max(hausdorff(f(x), Y) for x, Y in zip(ifs.partition.points, ifs.data))
    cert = ifs.certificate
    run.summary["report"] = rep.as_dict()
    run.summary["node_error"] = node_err
    run.summary["certificate"] = {
        "max_ratio": cert.max_ratio,
        "contraction_ok": cert.contraction_ok,
        "holder_value": cert.holder_value,
        "holder_ok": cert.holder_ok,
        "bv_value": cert.bv_value,
        "bv_ok": cert.bv_ok,
    }
    if args.check:
        run.check("node interpolation error < 1e-9", node_err < 1e-9)
        run.check("residual <= 2 tol", rep.final_residual <= 2 * cfg.tol)
    return run.finish()


def cmd_chaos(args) -> int:
    run = _Run(args)
    cfg = _config(args)
    ifs = check_config(cfg)
    n = args.n if args.n is not None else cfg.chaos_n
    burn = args.burn if args.burn is not None else cfg.chaos_burn
    orbit = chaos_game(ifs, cfg.p, n, args.seed, burn)
    rows = zip(orbit.xs.tolist(), orbit.lo.tolist(), orbit.hi.tolist(), orbit.branches.tolist())
    run.table("chaos", ["x", "lo", "hi", "branch"], rows)
    run.svg(
        scatter_svg,
        "chaos",
        np.r_[orbit.xs, orbit.xs],
        np.r_[orbit.lo, orbit.hi],
        "chaos game: value endpoints",
    )
    a, b = ifs.domain
    ks = ecdf_uniform_distance(orbit.xs, a, b)
    run.summary["chaos"] = {"n": n, "burn": burn, "seed": args.seed, "ecdf_uniform_sup": ks}
    if args.check and cfg.p is None:
        run.check("x-marginal within 0.02 of uniform", ks < 0.02)
    return run.finish()


PRESETS = ("segment", "cantor10", "square", "weierstrass")


def _preset_report(name: str):
    if name == "segment":
        x = np.linspace(0.0, 1.0, 100_000)
        return box_count(np.column_stack([x, np.zeros_like(x)])), 1.0, 0.05
    if name == "cantor10":
        return box_count(cantor_cloud(10)), expected_cantor_dimension(), 0.05
    if name == "square":
        f = GridSVF((0.0, 1.0), (CompactSet.interval(0, 1), CompactSet.interval(0, 1)))
        return box_count_segments(*graph_segments(f, 4097)), 2.0, 0.05
    xs = np.linspace(0.0, 1.0, 65537)
    w = weierstrass_grid(xs, 0.5, 0.5, 30, 1)
    return graph_box_count(w, 65537), 2.0 - expected_cantor_dimension(), 0.08


def cmd_boxdim(args) -> int:
    run = _Run(args)
    if args.input:
        pts = np.loadtxt(args.input, delimiter=",", skiprows=1, ndmin=2)
        rep, expected, tol = box_count(pts), None, None
        label = Path(args.input).name
    else:
        rep, expected, tol = _preset_report(args.preset)
        label = args.preset
    run.table("boxdim", ["delta", "count"], zip(rep.deltas, rep.counts))
    run.svg(loglog_svg, "boxdim", rep.deltas, rep.counts, rep.slope, f"box counting: {label}")
    run.summary["boxdim"] = {
        "source": label,
        "slope": rep.slope,
        "r2": rep.r2,
        "window": list(rep.window),
        "flagged": rep.flagged,
        "expected": expected,
    }
    if args.check and expected is not None:
        run.check(f"slope within {tol} of {expected:.4f}", abs(rep.slope - expected) <= tol)
    return run.finish()


def _distset_target(name: str, args):
    if name == "constant":
        return GridSVF((0.0, 1.0), (CompactSet.interval(0, 1), CompactSet.interval(0, 1)))
    if name == "weierstrass":
        return weierstrass_grid(np.linspace(0.0, 1.0, 4097))
    cfg = _config(args)
    f, _ = fixed_point(check_config(cfg), cfg.tol, cfg.max_iter, cfg.min_mesh)
    return f


def cmd_distset(args) -> int:
    run = _Run(args)
    f = _distset_target(args.preset, args)
    levels = [2**k for k in range(6, 13) if 2**k <= args.probes] or [args.probes]
    rows, gaps = [], []
    for p in levels:
        s = distance_set_star(f, p)
        rows.append((p, s.max_gap, s.hull[0], s.hull[1], len(s.values)))
        gaps.append(s.max_gap)
    run.table("distset", ["probes", "max_gap", "hull_lo", "hull_hi", "distinct"], rows)
    run.summary["distset"] = {"target": args.preset, "levels": levels, "max_gaps": gaps}
    if args.values:
        run.table("distset_values", ["distance"], ((v,) for v in s.values.tolist()))
    if args.check:
        run.check("max_gap decreases", all(b < a for a, b in zip(gaps, gaps[1:])))
        run.check("max_gap < 4/probes * hull", gaps[-1] < 4.0 / levels[-1] * s.hull_length)
    return run.finish()


def _example_table():
    P = CompactSet.points
    A, B, C = P([1, 2]), P([7, 8, 9]), P([-1, -10])
    AB = metric_sum(1, A, 1, B)
    C1 = cantor_prefractal(1)
    rows = [
        ("A", A, A),
        ("B", B, B),
        ("C", C, C),
        ("A (+) B", AB, P([8, 9, 10, 11])),
        ("B (+) C", metric_sum(1, B, 1, C), P([6, -3, 7, 8])),
        ("A (+) B (+) C", metric_combination([1, 1, 1], [A, B, C]), P([-2, -1, 7, 8, 9, 10])),
        ("(A (+) B) (+) C", fold_metric_sum([1, 1, 1], [A, B, C]), P([-2, 7, 8, 9, 10])),
        ("A (+) (B (+) C)", metric_sum(1, A, 1, metric_sum(1, B, 1, C)), P([-2, 8, 9, 10])),
        ("(A (+) B) (+) (-B)", metric_sum(1, AB, -1, B), P([0, 1, 2])),
        ("A (+) B (+) (-B)", metric_combination([1, 1, -1], [A, B, B]), A),
        ("C1 (+) C1", metric_sum(1, C1, 1, C1), scale(2, C1)),
        ("C1 + C1 (Minkowski)", minkowski_sum(C1, C1), CompactSet.interval(0, 2)),
    ]
    return rows


def cmd_demo(args) -> int:
    run = _Run(args)
    which = args.which
    if which in ("table", "all"):
        rows = _example_table()
        run.table("examples_table", ["expression", "result", "expected"], [(n, str(r), str(e)) for n, r, e in rows])
        run.summary["examples"] = {n: str(r) for n, r, _ in rows}
        if args.check:
            for n, r, e in rows:
                run.check(f"table: {n}", r == e)
    if which in ("weierstrass", "all"):
        _weierstrass(run, 1025, 0.01, 0.5, 30, 513)
    if which in ("bernstein", "all"):
        _bernstein(run, w_table_sets(), 201)
    return run.finish()


# --- parser ----------------------------------------------------------------------


GLOBAL_DEFAULTS = {"out": "out", "seed": DEFAULT_SEED, "check": False, "format": "csv"}


def build_parser() -> argparse.ArgumentParser:
    # global flags are accepted before or after the subcommand; defaults are
    # filled in after parsing so a subparser never overwrites an earlier value
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--out", help="output directory (default: out)")
    common.add_argument("--seed", type=int, help=f"random seed (default: {DEFAULT_SEED})")
    common.add_argument("--check", action="store_true", help="run self-checks; exit 1 on failure")
    common.add_argument("--format", choices=("csv", "json-lines"), help="table format (default: csv)")

    p = argparse.ArgumentParser(prog="setfractal", description=__doc__.splitlines()[0], parents=[common])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("metric-sum", parents=[common], help="metric linear combination of set literals")
    s.add_argument("-w", "--weights", help="comma-separated weights (default: all 1)")
    s.add_argument("--oracle", action="store_true", help="cross-check finite sets by chain enumeration")
    s.add_argument("sets", nargs="+", help="set literals such as '[0,1] u {2,3}'")
    s.set_defaults(func=cmd_metric_sum)

    s = sub.add_parser("bernstein", parents=[common], help="metric Bernstein polynomial band")
    s.add_argument("--samples", nargs="+", help="set literals at j/k (default: the W table)")
    s.add_argument("--points", type=int, default=101, help="number of x points")
    s.set_defaults(func=cmd_bernstein)

    s = sub.add_parser("weierstrass", parents=[common], help="Weierstrass set-valued band")
    s.add_argument("--res", type=int, default=1025)
    s.add_argument("--a-lo", type=float, default=0.01)
    s.add_argument("--a-hi", type=float, default=0.5)
    s.add_argument("--terms", type=int, default=30)
    s.add_argument("--samples", type=int, default=513)
    s.set_defaults(func=cmd_weierstrass)

    for name, fn, text in (
        ("interpolate", cmd_interpolate, "fractal interpolant by fixed-point iteration"),
        ("chaos", cmd_chaos, "chaos-game orbit of the IFS"),
    ):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("config", nargs="?", help="IFS config file (default: built-in example)")
        if name == "chaos":
            s.add_argument("--n", type=int, help="orbit length (default: from config)")
            s.add_argument("--burn", type=int, help="burn-in (default: from config)")
        s.set_defaults(func=fn)

    s = sub.add_parser("boxdim", parents=[common], help="box-counting dimension")
    g = s.add_mutually_exclusive_group()
    g.add_argument("--preset", choices=PRESETS, default="cantor10")
    g.add_argument("--input", help="CSV of points with a header row")
    s.set_defaults(func=cmd_boxdim)

    s = sub.add_parser("distset", parents=[common], help="distance set of a set-valued graph")
    s.add_argument("--preset", choices=("constant", "weierstrass", "fif"), default="constant")
    s.add_argument("--config", help="IFS config for the fif preset")
    s.add_argument("--probes", type=int, default=1024)
    s.add_argument("--values", action="store_true", help="also write the sorted distances")
    s.set_defaults(func=cmd_distset)

    s = sub.add_parser("demo", parents=[common], help="regenerate the worked examples and figures")
    s.add_argument("which", nargs="?", choices=("all", "table", "weierstrass", "bernstein"), default="all")
    s.set_defaults(func=cmd_demo)

    sub.add_parser("example-config", parents=[common], help="print a sample IFS config").set_defaults(
        func=lambda a: print(EXAMPLE_CONFIG, end="") or 0
    )
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for key, value in GLOBAL_DEFAULTS.items():
        if not hasattr(args, key):
            setattr(args, key, value)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SetFractalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
