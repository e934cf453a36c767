"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a one-line summary of what it measured; the conftest
prints a pass/fail line per criterion at the end of the run.
"""
import math
import random
import time

import numpy as np
import pytest

from setfractal import cli
from setfractal.compact_set import (
    CompactSet,
    cantor_prefractal,
    diameter,
    hausdorff,
    minkowski_sum,
    normalize,
    scale,
)
from setfractal.dimension import (
    box_count,
    cantor_cloud,
    distance_set_star,
    graph_box_count,
    graph_star_box_count,
    lipschitz_sum_experiment,
)
from setfractal.fractal import (
    attractor_gap,
    build_ifs,
    chaos_game,
    ecdf_uniform_distance,
    fixed_point,
    self_referential_residual,
)
from setfractal.metric_comb import (
    fold_metric_sum,
    metric_combination,
    metric_pairs,
    metric_sum,
)
from setfractal.svf import GridSVF, PartitionSpec, bernstein_metric, pl_eval, w_table_sets, weierstrass_grid

from conftest import classical_fif, oracle_combination, oracle_pairs

P = CompactSet.points
I = CompactSet.interval
PART = PartitionSpec.uniform(0, 1, 4)
FIF_DATA = [I(0, 1), I(0.5, 1.2), I(-0.3, 0.6), I(0.2, 1), I(0, 1)]


def checks_report(record_property, checks: dict, extra: str = ""):
    failed = [k for k, ok in checks.items() if not ok]
    detail = f"{len(checks) - len(failed)}/{len(checks)} checks" + (f"; {extra}" if extra else "")
    if failed:
        detail += "; failed: " + ", ".join(failed)
    record_property("detail", detail)
    assert not failed, detail


def random_union(rng, max_intervals=5):
    pairs = []
    for _ in range(rng.randint(1, max_intervals)):
        lo = rng.uniform(-10, 10)
        pairs.append((lo, lo + (0.0 if rng.random() < 0.2 else rng.uniform(0, 3))))
    return normalize(pairs)


# --- 1 ---------------------------------------------------------------------------


def test_criterion_01_finite_exactness(record_property):
    A, B, C = P([1, 2]), P([7, 8, 9]), P([-1, -10])
    AB = metric_sum(1, A, 1, B)
    cases = {
        "pairs(A,B)": (lambda: metric_pairs(A, B).point_pairs(), oracle_pairs([1.0, 2.0], [7.0, 8.0, 9.0])),
        "A+B": (lambda: metric_sum(1, A, 1, B), P([8, 9, 10, 11])),
        "B+C": (lambda: metric_sum(1, B, 1, C), P([6, -3, 7, 8])),
        "A+B+C": (lambda: metric_combination([1, 1, 1], [A, B, C]), P([-2, -1, 7, 8, 9, 10])),
        "(A+B)+C": (lambda: metric_sum(1, AB, 1, C), P([-2, 7, 8, 9, 10])),
        "A+(B+C)": (lambda: metric_sum(1, A, 1, metric_sum(1, B, 1, C)), P([-2, 8, 9, 10])),
        "(A+B)+(-B)": (lambda: metric_sum(1, AB, -1, B), P([0, 1, 2])),
        "A+B+(-B)": (lambda: metric_combination([1, 1, -1], [A, B, B]), A),
    }
    checks, worst = {}, 0.0
    for name, (fn, expected) in cases.items():
        fn()
        t0 = time.perf_counter()
        got = fn()
        dt = time.perf_counter() - t0
        worst = max(worst, dt)
        checks[f"{name} exact"] = got == expected
        checks[f"{name} < 1 ms"] = dt < 1e-3
    checks_report(record_property, checks, f"slowest {worst * 1e3:.3f} ms")


# --- 2 ---------------------------------------------------------------------------


def test_criterion_02_cantor_facts(record_property):
    checks = {f"h(C{k},[0,1])=1/6": hausdorff(cantor_prefractal(k), I(0, 1)) == 1 / 6 for k in range(1, 11)}
    C1 = cantor_prefractal(1)
    checks["C1(+)C1 = 2C1"] = metric_sum(1, C1, 1, C1) == scale(2, C1)
    checks["C1+C1 = [0,2]"] = minkowski_sum(C1, C1) == I(0, 2)
    checks_report(record_property, checks)


# --- 3 ---------------------------------------------------------------------------


def test_criterion_03_hausdorff_identities(record_property):
    rng = random.Random(20240601)
    t0 = time.perf_counter()
    bad = {"equal_sets": 0, "lemma_equality": 0, "subadditivity": 0, "scaling": 0}
    n = 1000
    for _ in range(n):
        A, B, C, D = (random_union(rng) for _ in range(4))
        lams = [rng.uniform(-2, 2) for _ in range(rng.randint(2, 5))]
        lhs = metric_combination(lams, [A] * len(lams))
        if hausdorff(lhs, scale(math.fsum(lams), A)) > 0 and lhs != scale(sum(lams), A):
            bad["equal_sets"] += 1
        ab, ac = metric_sum(1, A, 1, B), metric_sum(1, A, 1, C)
        if abs(hausdorff(ab, ac) - hausdorff(B, C)) > 1e-9:
            bad["lemma_equality"] += 1
        if hausdorff(ab, metric_sum(1, C, 1, D)) > hausdorff(A, C) + hausdorff(B, D) + 1e-12:
            bad["subadditivity"] += 1
        al, be = rng.uniform(-3, 3), rng.uniform(-3, 3)
        if hausdorff(scale(al, A), scale(be, A)) > diameter(A) * abs(al - be) + 1e-12:
            bad["scaling"] += 1
    dt = time.perf_counter() - t0
    checks = {f"{k} ({v}/{n} violations)": v == 0 for k, v in bad.items()}
    checks["runtime < 30 s"] = dt < 30
    checks_report(record_property, checks, f"{dt:.1f} s")


# --- 4 ---------------------------------------------------------------------------


def test_criterion_04_oracle_equivalence(record_property):
    rng = random.Random(4)
    mismatch_brute = 0
    for _ in range(500):
        m = rng.randint(2, 5)
        pts = [sorted(rng.sample(range(-12, 13), rng.randint(1, 6))) for _ in range(m)]
        lams = [rng.choice([-2, -1.5, -1, -0.5, 0.25, 0.5, 1, 2, 3]) for _ in range(m)]
        expected = P(oracle_combination(lams, [[float(x) for x in p] for p in pts]))
        if metric_combination(lams, [P(p) for p in pts]) != expected:
            mismatch_brute += 1
    worst = 0.0
    for _ in range(500):
        m = rng.randint(2, 7)
        sets = []
        for _ in range(m):
            lo = rng.uniform(-10, 10)
            sets.append(I(lo, lo + rng.uniform(0, 4)))
        lams = [rng.uniform(0, 2) for _ in range(m)]
        worst = max(worst, hausdorff(metric_combination(lams, sets), fold_metric_sum(lams, sets)))
    checks = {
        f"chain DP = enumeration ({mismatch_brute}/500 mismatches)": mismatch_brute == 0,
        "chain DP = binary fold within 1e-12": worst <= 1e-12,
    }
    checks_report(record_property, checks, f"max fold gap {worst:.2e}")


# --- 5 ---------------------------------------------------------------------------


def printed_closed_form(x):
    c0 = (1 - x) ** 4 + x**4
    c1 = 4 * x * (1 - x) ** 3 + 4 * x**3 * (1 - x)
    c2 = x**2 * (1 - x) ** 2
    pieces = [
        (c0 * 1.0101 - c1 * 0.00097261 - 6.0606 * c2, c0 * 2 - c1 * 0.00097261 - 6.0606 * c2),
        (c0 * 1.0101 - c1 * 0.0067179 - 6.0606 * c2, c0 * 1.0101 - c1 * 0.00097261 - 6.0606 * c2),
        (c0 * 1.0101 - c1 * 0.0067179 - 11.7192 * c2, c0 * 1.0101 - c1 * 0.0067179 - 6.0606 * c2),
    ]
    final = (c0 * 1.0101 - c1 * 0.0067179 - 11.7192 * c2, c0 * 2 - c1 * 0.00097261 - 6.0606 * c2)
    return pieces, final


def test_criterion_05_bernstein_example(record_property):
    W = w_table_sets()
    worst = 0.0
    union_ok = True
    for x in np.linspace(0, 1, 101):
        pieces, (lo, hi) = printed_closed_form(float(x))
        union_ok &= normalize(pieces) == normalize([(lo, hi)]) or hausdorff(normalize(pieces), I(lo, hi)) < 1e-12
        got = bernstein_metric(W, 4, float(x))
        worst = max(worst, abs(got.min - lo), abs(got.max - hi), 0.0 if got.is_interval else math.inf)
    checks = {
        "101 points within 1e-6": worst <= 1e-6,
        "printed pieces form one interval": union_ok,
        "x=0 gives W(0)": bernstein_metric(W, 4, 0.0) == W[0],
        "x=1 gives W(1)": bernstein_metric(W, 4, 1.0) == W[-1],
    }
    checks_report(record_property, checks, f"max endpoint error {worst:.2e}")


# --- 6 ---------------------------------------------------------------------------


def test_criterion_06_fractal_interpolation(record_property):
    t0 = time.perf_counter()
    ifs = build_ifs(PART, FIF_DATA, [0.3] * 4)
    f, rep = fixed_point(ifs, tol=1e-8)
    node_err = max(hausdorff(pl_eval(f, x), Y) for x, Y in zip(PART.points, FIF_DATA))
    residual = self_referential_residual(ifs, f)
    mesh = float(np.min(np.diff(f.xs)))
    gap = attractor_gap(ifs, f)
    dt = time.perf_counter() - t0

    ys = [0.0, 0.8, -0.4, 0.3, 1.0]
    single = build_ifs(PART, [CompactSet.point(y) for y in ys], [0.3] * 4)
    g, _ = fixed_point(single, tol=1e-12)
    depth = round(math.log(len(g.xs) - 1, 4))
    _, v = classical_fif(ys, 0.3, depth)
    lo, hi = g.interval_arrays()
    oracle_err = float(max(np.max(np.abs(lo - v)), np.max(np.abs(hi - v))))

    checks = {
        f"converged in {rep.iterations} <= 25 iterations": rep.iterations <= 25 and rep.successive_dC[-1] < 1e-8,
        "node error < 1e-9": node_err < 1e-9,
        "residual <= 2e-8": residual <= 2e-8,
        f"attractor gap {gap:.2e} <= 2 x mesh {mesh:.2e}": gap <= 2 * mesh,
        "runtime < 10 s": dt < 10,
        "singleton data = classical FIF within 1e-6": oracle_err < 1e-6,
    }
    checks_report(record_property, checks, f"{dt:.2f} s, residual {residual:.1e}, oracle {oracle_err:.1e}")


# --- 7 ---------------------------------------------------------------------------


def test_criterion_07_invariant_measure(record_property):
    ifs = build_ifs(PART, FIF_DATA, [0.3] * 4)
    p = [abs(a) for a, _ in ifs.affine]
    t0 = time.perf_counter()
    orbit = chaos_game(ifs, p=p, n=10**6, seed=20240601, burn=100)
    dt = time.perf_counter() - t0
    again = chaos_game(ifs, p=p, n=10**6, seed=20240601, burn=100)
    dist = ecdf_uniform_distance(orbit.xs, 0.0, 1.0)
    checks = {
        "ECDF sup distance <= 0.02": dist <= 0.02,
        "deterministic under seed": np.array_equal(orbit.xs, again.xs)
        and np.array_equal(orbit.lo, again.lo)
        and np.array_equal(orbit.hi, again.hi),
        "runtime < 30 s": dt < 30,
    }
    checks_report(record_property, checks, f"sup distance {dist:.5f}, {dt:.2f} s")


# --- 8 ---------------------------------------------------------------------------


def random_fif(seed):
    rng = np.random.default_rng(seed)
    centres = rng.uniform(-1, 1, 5)
    widths = rng.uniform(0.5, 1.0, 5)
    data = [I(c, c + w) for c, w in zip(centres, widths)]
    alpha = rng.uniform(0.35, 0.5, 4) * rng.choice([-1, 1], 4)
    f, _ = fixed_point(build_ifs(PART, data, list(alpha)), min_mesh=1e-4)
    return f


def random_lipschitz_band(seed, nodes=17):
    rng = np.random.default_rng(1000 + seed)
    xs = np.linspace(0, 1, nodes)
    lo = np.cumsum(rng.uniform(-1, 1, nodes)) / nodes * 2
    hi = lo + 0.2 + 0.1 * np.sin(2 * np.pi * xs * rng.uniform(0.5, 2))
    return GridSVF.from_intervals(xs, lo, hi)


def test_criterion_08_dimension_estimators(record_property):
    x = np.linspace(0, 1, 200_001)
    seg = box_count(np.column_stack([x, np.zeros_like(x)])).slope
    cantor = box_count(cantor_cloud(10), [3.0**-k for k in range(2, 9)]).slope
    g = np.linspace(0, 1, 2049)
    X, Y = np.meshgrid(g, g)
    square = box_count(np.column_stack([X.ravel(), Y.ravel()])).slope
    lip = [graph_star_box_count(random_lipschitz_band(s)).slope for s in range(3)]
    diffs = []
    for s in range(5):
        rep = lipschitz_sum_experiment(random_lipschitz_band(s), random_fif(s), res=4096)
        diffs.append(abs(rep.slope_fg - rep.slope_g))
    checks = {
        f"segment {seg:.3f}": abs(seg - 1.0) <= 0.05,
        f"Cantor {cantor:.3f}": abs(cantor - 0.631) <= 0.05,
        f"square {square:.3f}": abs(square - 2.0) <= 0.05,
        "Lipschitz interval graphs " + "/".join(f"{v:.3f}" for v in lip): all(abs(v - 1.0) <= 0.05 for v in lip),
        "Lipschitz sum |diff| < 0.12 over 5 seeds": max(diffs) < 0.12,
    }
    checks_report(record_property, checks, "sum diffs " + "/".join(f"{d:.3f}" for d in diffs))


# --- 9 ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def distance_targets():
    grid = np.linspace(0, 1, 4097)
    fif, _ = fixed_point(build_ifs(PART, FIF_DATA, [0.3] * 4))
    return {
        "constant": GridSVF((0.0, 1.0), (I(0, 1), I(0, 1))),
        "weierstrass": weierstrass_grid(grid),
        "fif": fif,
    }


def test_criterion_09_distance_sets(record_property, distance_targets):
    probes = [64, 128, 256, 512, 1024, 2048, 4096]
    checks, notes = {}, []
    for name, f in distance_targets.items():
        samples = [distance_set_star(f, m) for m in probes]
        gaps = [s.max_gap for s in samples]
        bound = 4 / probes[-1] * samples[-1].hull_length
        checks[f"{name} monotone"] = all(b < a for a, b in zip(gaps, gaps[1:]))
        checks[f"{name} final gap < 4/probes x hull"] = gaps[-1] < bound
        notes.append(f"{name} {gaps[-1]:.2e}<{bound:.2e}")
    checks_report(record_property, checks, ", ".join(notes))


# --- 10 --------------------------------------------------------------------------


def test_criterion_10_cli_reproducibility(record_property, tmp_path, capsys):
    def tree(d):
        return {p.name: p.read_bytes() for p in sorted(d.iterdir())}

    for d in ("a", "b"):
        assert cli.main(["demo", "--out", str(tmp_path / d), "--check"]) == 0
        assert cli.main(["chaos", "--n", "20000", "--seed", "11", "--out", str(tmp_path / f"chaos_{d}")]) == 0
    capsys.readouterr()
    a = tree(tmp_path / "a")
    table = a.get("examples_table.csv", b"").decode()
    checks = {
        "demo writes two SVG figures": sum(n.endswith(".svg") for n in a) >= 2,
        "demo writes the example table": "(A (+) B) (+) C" in table and "C1 + C1 (Minkowski)" in table,
        "demo rerun byte-identical": a == tree(tmp_path / "b"),
        "seeded chaos rerun byte-identical": tree(tmp_path / "chaos_a") == tree(tmp_path / "chaos_b"),
    }
    checks_report(record_property, checks, f"{len(a)} files")
