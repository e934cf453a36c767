"""Box-counting dimension estimates and distance-set sampling for set-valued graphs.

Two graph models are used.  The planar graph ``G(f) = {(x, y) : y in f(x)}``
is handled as a family of vertical segments so box counts are exact for
bands.  For interval-valued ``f`` the graph in ``I × 𝒦(ℝ)`` with metric
``|x - x'| + 𝔥`` is embedded in ℝ³ as the curve ``(x, lo(x), hi(x))``; the
embedding is bi-Lipschitz because ``𝔥`` of two intervals is
``max(|Δlo|, |Δhi|)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .compact_set import CompactSet, cantor_prefractal, hausdorff
from .errors import ConvexityRequiredError, DegenerateInputError
from .metric_comb import metric_pairs, metric_sum
from .svf import GridSVF, lipschitz_constant, pl_eval, pl_eval_intervals

DEFAULT_DELTAS = tuple(2.0**-k for k in range(4, 12))
R2_FLAG = 0.98
MAX_PAIRS = 10**7


@dataclass(frozen=True)
class BoxCountReport:
    deltas: tuple[float, ...]
    counts: tuple[int, ...]
    slope: float
    r2: float
    window: tuple[float, float]

    @property
    def flagged(self) -> bool:
        return self.r2 < R2_FLAG


def _fit(deltas: Sequence[float], counts: Sequence[int]) -> BoxCountReport:
    d = np.asarray(deltas, float)
    c = np.asarray(counts, float)
    X, Y = np.log(1.0 / d), np.log(c)
    slope, icpt = np.polyfit(X, Y, 1)
    resid = Y - (slope * X + icpt)
    ss = float(np.sum((Y - Y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    return BoxCountReport(
        deltas=tuple(float(v) for v in d),
        counts=tuple(int(v) for v in counts),
        slope=float(slope),
        r2=r2,
        window=(float(d.min()), float(d.max())),
    )


def _check_deltas(deltas) -> np.ndarray:
    d = np.asarray(DEFAULT_DELTAS if deltas is None else deltas, float)
    if len(d) < 2 or np.any(d <= 0) or np.any(np.diff(d) >= 0):
        raise ValueError("deltas must be positive, strictly decreasing and at least two")
    return d


def box_count(points, deltas: Sequence[float] | None = None) -> BoxCountReport:
    """Occupied-cell counts of a point cloud in ℝ^d and the log-log slope.

    The grid is anchored at the minimum corner of the bounding box.
    """
    P = np.asarray(points, float)
    if P.ndim == 1:
        P = P[:, None]
    d = _check_deltas(deltas)
    if len(P) < 2 or np.all(np.ptp(P, axis=0) == 0):
        raise DegenerateInputError("need at least two distinct points")
    rel = P - P.min(axis=0)
    counts = []
    for delta in d:
        cells = np.floor(rel / delta).astype(np.int64)
        flat = np.ravel_multi_index(cells.T, tuple(cells.max(axis=0) + 1))
        counts.append(len(np.unique(flat)))
    return _fit(d, counts)


def box_count_segments(x, ylo, yhi, deltas: Sequence[float] | None = None) -> BoxCountReport:
    """Exact box counts of a union of vertical segments ``{x_i} × [ylo_i, yhi_i]``."""
    x, ylo, yhi = (np.asarray(v, float) for v in (x, ylo, yhi))
    d = _check_deltas(deltas)
    if len(x) < 2 or (np.ptp(x) == 0 and np.ptp(np.concatenate([ylo, yhi])) == 0):
        raise DegenerateInputError("need at least two distinct points")
    x0, y0 = x.min(), ylo.min()
    counts = []
    for delta in d:
        col = np.floor((x - x0) / delta).astype(np.int64)
        r0 = np.floor((ylo - y0) / delta).astype(np.int64)
        r1 = np.floor((yhi - y0) / delta).astype(np.int64)
        order = np.lexsort((r0, col))
        col, r0, r1 = col[order], r0[order], r1[order]
        # merge overlapping row ranges inside each column
        new_col = np.r_[True, col[1:] != col[:-1]]
        run_max = np.empty_like(r1)
        total = 0
        start = np.flatnonzero(new_col)
        ends = np.r_[start[1:], len(col)]
        for s, e in zip(start, ends):
            run_max[s:e] = np.maximum.accumulate(r1[s:e])
            prev = np.r_[r0[s] - 1, run_max[s : e - 1]]
            lo = np.maximum(r0[s:e], prev + 1)
            total += int(np.sum(np.maximum(r1[s:e] - lo + 1, 0)))
        counts.append(total)
    return _fit(d, counts)


# --- graph samples ---------------------------------------------------------------


def _probes(f: GridSVF, res: int) -> np.ndarray:
    if res < 2:
        raise ValueError("res must be at least 2")
    a, b = f.domain
    return np.linspace(a, b, res)


def _values(f: GridSVF, xs: np.ndarray) -> list[CompactSet]:
    return [pl_eval(f, float(x)) for x in xs]


def graph_segments(f: GridSVF, res: int, connect: bool = True):
    """Planar graph at ``res`` probes as vertical segments ``(x, ylo, yhi)``.

    With ``connect`` each probe also carries the vertical ranges joining its
    metric pairs to the next probe, so a continuous graph has no holes
    between samples.
    """
    xs = _probes(f, res)
    if f.is_interval_valued:
        lo, hi = pl_eval_intervals(f.xs, *f.interval_arrays(), xs)
        X, L, H = [xs], [lo], [hi]
        if connect:
            for u, v in ((lo, lo), (hi, hi)):
                X.append(xs[:-1])
                L.append(np.minimum(u[:-1], v[1:]))
                H.append(np.maximum(u[:-1], v[1:]))
        return np.concatenate(X), np.concatenate(L), np.concatenate(H)
    vals = _values(f, xs)
    X, L, H = [], [], []
    for x, V in zip(xs, vals):
        for lo, hi in V.intervals:
            X.append(x)
            L.append(lo)
            H.append(hi)
    if connect:
        for x, U, V in zip(xs, vals, vals[1:]):
            for s in metric_pairs(U, V).segments:
                for a, b in ((s.a_lo, s.b_lo), (s.a_hi, s.b_hi)):
                    X.append(x)
                    L.append(min(a, b))
                    H.append(max(a, b))
    return np.array(X), np.array(L), np.array(H)


def graph_points(f: GridSVF, res: int, connect: bool = False, pitch: float | None = None) -> np.ndarray:
    """Point cloud of the planar graph: value endpoints plus interior fill at ``pitch``.

    The default pitch is the probe spacing.
    """
    x, lo, hi = graph_segments(f, res, connect=connect)
    a, b = f.domain
    step = (b - a) / (res - 1) if pitch is None else pitch
    n = np.floor((hi - lo) / step).astype(np.int64) + 1
    rep_x = np.repeat(x, n)
    offs = np.arange(n.sum()) - np.repeat(np.cumsum(n) - n, n)
    ys = np.repeat(lo, n) + offs * step
    pts = np.column_stack([np.r_[rep_x, x], np.r_[ys, hi]])
    return np.unique(pts, axis=0)


def graph_box_count(f: GridSVF, res: int = 4096, deltas=None, connect: bool = True) -> BoxCountReport:
    """Box-count slope of the planar graph ``G(f)``."""
    return box_count_segments(*graph_segments(f, res, connect=connect), deltas)


def graph_star_points(f: GridSVF, res: int, step: float | None = None) -> np.ndarray:
    """Curve ``(x, lo(x), hi(x))`` representing the graph of an interval-valued ``f`` in ``I × 𝒦(ℝ)``.

    Consecutive probes are joined by straight chords sampled no coarser than ``step``.
    """
    if not f.is_interval_valued:
        raise ConvexityRequiredError("the ℝ³ embedding needs interval values")
    xs = _probes(f, res)
    lo, hi = pl_eval_intervals(f.xs, *f.interval_arrays(), xs)
    P = np.column_stack([xs, lo, hi])
    if step is None:
        return P
    jump = np.max(np.abs(np.diff(P, axis=0)), axis=1)
    k = np.maximum(np.ceil(jump / step).astype(np.int64), 1)
    t = np.concatenate([np.arange(m) / m for m in k])
    base = np.repeat(P[:-1], k, axis=0)
    dirs = np.repeat(np.diff(P, axis=0), k, axis=0)
    return np.vstack([base + t[:, None] * dirs, P[-1:]])


# chords are sampled this many times finer than the smallest box so that
# cells clipped near their corners are still hit
CHORD_REFINE = 16


def graph_star_box_count(f: GridSVF, res: int = 4096, deltas=None) -> BoxCountReport:
    d = _check_deltas(deltas)
    return box_count(graph_star_points(f, res, step=float(d.min()) / CHORD_REFINE), d)


# --- distance and difference sets ----------------------------------------------


@dataclass(frozen=True)
class DistanceSetSample:
    values: np.ndarray
    max_gap: float
    hull: tuple[float, float]

    @property
    def hull_length(self) -> float:
        return self.hull[1] - self.hull[0]


def _sample(values: np.ndarray) -> DistanceSetSample:
    v = np.unique(values)
    gap = float(np.max(np.diff(v))) if len(v) > 1 else 0.0
    return DistanceSetSample(values=v, max_gap=gap, hull=(float(v[0]), float(v[-1])))


def _stride_subsample(m: int, max_pairs: int) -> np.ndarray:
    """Evenly spaced indices keeping the number of unordered pairs within ``max_pairs``."""
    keep = m
    while keep * (keep - 1) // 2 > max_pairs:
        keep = int(keep * 0.95)
    return np.unique(np.linspace(0, m - 1, keep).round().astype(np.int64))


def _pairwise(P: np.ndarray, metric, block: int = 512) -> np.ndarray:
    """Upper-triangle values of ``metric(P[i], P[j])`` for ``i < j``, plus a single 0."""
    out = [np.zeros(1)]
    m = len(P)
    for s in range(0, m, block):
        rows = P[s : s + block]
        D = metric(rows[:, None, :], P[None, :, :])
        i = np.arange(s, s + len(rows))[:, None]
        j = np.arange(m)[None, :]
        out.append(D[j > i])
    return np.concatenate(out)


def distance_set_star(f: GridSVF, probes: int, max_pairs: int = MAX_PAIRS) -> DistanceSetSample:
    """Sampled ``{|x - x'| + 𝔥(f(x), f(x'))}`` over ``probes`` equally spaced points."""
    xs = _probes(f, probes)
    xs = xs[_stride_subsample(len(xs), max_pairs)]
    if f.is_interval_valued:
        lo, hi = pl_eval_intervals(f.xs, *f.interval_arrays(), xs)
        P = np.column_stack([xs, lo, hi])

        def metric(A, B):
            return np.abs(A[..., 0] - B[..., 0]) + np.maximum(
                np.abs(A[..., 1] - B[..., 1]), np.abs(A[..., 2] - B[..., 2])
            )

        return _sample(_pairwise(P, metric))
    vals = _values(f, xs)
    out = [0.0]
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            out.append(abs(xs[i] - xs[j]) + hausdorff(vals[i], vals[j]))
    return _sample(np.array(out))


def _taxicab(A, B):
    return np.abs(A[..., 0] - B[..., 0]) + np.abs(A[..., 1] - B[..., 1])


def distance_set_plain(f: GridSVF, probes: int, max_pairs: int = MAX_PAIRS) -> DistanceSetSample:
    """Sampled taxicab distances between planar graph points."""
    P = graph_points(f, probes)
    P = P[_stride_subsample(len(P), max_pairs)]
    return _sample(_pairwise(P, _taxicab))


def difference_set(f: GridSVF, probes: int, max_pairs: int = MAX_PAIRS) -> np.ndarray:
    """Sampled ``{(x - x', y - y')}`` over planar graph points, closed under negation."""
    P = graph_points(f, probes)
    P = P[_stride_subsample(len(P), max_pairs // 2)]
    out = []
    for s in range(0, len(P), 512):
        D = P[s : s + 512, None, :] - P[None, :, :]
        out.append(D.reshape(-1, 2))
    return np.unique(np.vstack(out), axis=0)


# --- Lipschitz-sum experiment ------------------------------------------------------


@dataclass(frozen=True)
class LipschitzSumReport:
    slope_g: float
    slope_fg: float
    star_slope_g: float | None
    star_slope_fg: float | None
    lipschitz_f: float
    max_step_jump: float
    distance_gap_fg: float

    def __iter__(self):
        return iter((self.slope_g, self.slope_fg))


def pointwise_sum(f: GridSVF, g: GridSVF) -> GridSVF:
    """``h(x) = f(x) ⊕ g(x)`` on the merged grid."""
    xs = sorted(set(f.xs) | set(g.xs))
    return GridSVF(tuple(xs), tuple(metric_sum(1.0, pl_eval(f, x), 1.0, pl_eval(g, x)) for x in xs))


def lipschitz_sum_experiment(
    f_lip: GridSVF,
    g: GridSVF,
    res: int = 4096,
    deltas: Sequence[float] | None = None,
    distance_probes: int = 512,
) -> LipschitzSumReport:
    """Compare graph dimensions of ``g`` and ``f_lip ⊕ g``.

    Reports planar box-count slopes, the ℝ³ slopes when both are interval
    valued, the Lipschitz constant of ``f_lip`` on its grid, the largest
    ``𝔥`` step of ``h`` between adjacent nodes (a discontinuity indicator)
    and the largest gap of ``Δ(G*(h))``.
    """
    h = pointwise_sum(f_lip, g)
    slope_g = graph_box_count(g, res, deltas).slope
    slope_h = graph_box_count(h, res, deltas).slope
    star_g = star_h = None
    if g.is_interval_valued and h.is_interval_valued:
        star_g = graph_star_box_count(g, res, deltas).slope
        star_h = graph_star_box_count(h, res, deltas).slope
    jump = max(hausdorff(u, v) for u, v in zip(h.values, h.values[1:]))
    gap = distance_set_star(h, distance_probes).max_gap
    return LipschitzSumReport(
        slope_g=slope_g,
        slope_fg=slope_h,
        star_slope_g=star_g,
        star_slope_fg=star_h,
        lipschitz_f=lipschitz_constant(f_lip),
        max_step_jump=jump,
        distance_gap_fg=gap,
    )


def cantor_cloud(level: int) -> np.ndarray:
    """Endpoints of the level-``level`` Cantor prefractal on the x-axis."""
    C = cantor_prefractal(level)
    pts = np.array([p for iv in C.intervals for p in iv])
    return np.column_stack([pts, np.zeros_like(pts)])


def expected_cantor_dimension() -> float:
    return math.log(2) / math.log(3)
