"""Set-valued functions on a compact interval.

A :class:`GridSVF` stores compact sets at the nodes of a grid and is
evaluated between nodes by the metric piecewise-linear rule
``t*f(x_i) ⊕ (1-t)*f(x_{i+1})``.  The sup-type metrics below are maxima over
explicit finite probes, so they are lower bounds for the analytic sups.
"""
from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .compact_set import CompactSet, hausdorff, normalize
from .errors import BadExponentError, DomainError, EmptySetError
from .metric_comb import metric_combination, metric_sum

DOMAIN_SLACK = 1e-12


@dataclass(frozen=True)
class PartitionSpec:
    """Strictly increasing partition ``x_0 < x_1 < ... < x_l`` of a domain."""

    points: tuple[float, ...]

    def __post_init__(self):
        pts = tuple(float(p) for p in self.points)
        if len(pts) < 2:
            raise DomainError("a partition needs at least two points")
        if any(b <= a for a, b in zip(pts, pts[1:])):
            raise DomainError("partition points must be strictly increasing")
        object.__setattr__(self, "points", pts)

    @classmethod
    def uniform(cls, a: float, b: float, n: int) -> PartitionSpec:
        return cls(tuple(np.linspace(a, b, n + 1)))

    @property
    def domain(self) -> tuple[float, float]:
        return self.points[0], self.points[-1]

    def refine(self) -> PartitionSpec:
        """Insert every cell midpoint."""
        pts = list(self.points)
        mids = [0.5 * (a + b) for a, b in zip(pts, pts[1:])]
        return PartitionSpec(tuple(sorted(pts + mids)))


@dataclass(frozen=True)
class GridSVF:
    """Compact-set values on a strictly increasing grid."""

    xs: tuple[float, ...]
    values: tuple[CompactSet, ...]

    def __post_init__(self):
        xs = tuple(float(x) for x in self.xs)
        values = tuple(self.values)
        if len(xs) < 2 or len(xs) != len(values):
            raise DomainError("a GridSVF needs at least two nodes and one value per node")
        if any(b <= a for a, b in zip(xs, xs[1:])):
            raise DomainError("grid nodes must be strictly increasing")
        object.__setattr__(self, "xs", xs)
        object.__setattr__(self, "values", values)

    @classmethod
    def from_function(cls, fn: Callable[[float], CompactSet], xs: Sequence[float]) -> GridSVF:
        return cls(tuple(xs), tuple(fn(float(x)) for x in xs))

    @classmethod
    def from_intervals(cls, xs, lo, hi) -> GridSVF:
        lo, hi = np.asarray(lo, float), np.asarray(hi, float)
        return cls(tuple(xs), tuple(normalize([(u, v)]) for u, v in zip(lo.tolist(), hi.tolist())))

    @property
    def domain(self) -> tuple[float, float]:
        return self.xs[0], self.xs[-1]

    @property
    def is_interval_valued(self) -> bool:
        return all(v.is_interval for v in self.values)

    def interval_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Lower and upper endpoints of every value; raises unless all values are intervals."""
        if not self.is_interval_valued:
            raise ValueError("not every value is a single interval")
        lo = np.array([v.min for v in self.values])
        hi = np.array([v.max for v in self.values])
        return lo, hi

    def __call__(self, x: float) -> CompactSet:
        return pl_eval(self, x)


def _locate(xs: Sequence[float], x: float) -> tuple[int, bool]:
    a, b = xs[0], xs[-1]
    if not (a - DOMAIN_SLACK <= x <= b + DOMAIN_SLACK):
        raise DomainError(f"x={x} outside [{a}, {b}]")
    i = bisect_right(xs, x) - 1
    if i < 0:
        return 0, True
    if i >= len(xs) - 1:
        return len(xs) - 1, True
    return i, xs[i] == x


def pl_eval(f: GridSVF, x: float) -> CompactSet:
    """Metric piecewise-linear value at ``x``; the left node carries weight ``(x_{i+1}-x)/h``."""
    i, at_node = _locate(f.xs, x)
    if at_node:
        return f.values[i]
    x0, x1 = f.xs[i], f.xs[i + 1]
    t = (x1 - x) / (x1 - x0)
    return metric_sum(t, f.values[i], 1.0 - t, f.values[i + 1])


def pl_eval_intervals(xs, lo, hi, x) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised :func:`pl_eval` for interval data: positive weights give endpoint interpolation."""
    return np.interp(x, xs, lo), np.interp(x, xs, hi)


def resample(f: GridSVF, xs: Sequence[float]) -> GridSVF:
    return GridSVF(tuple(xs), tuple(pl_eval(f, x) for x in xs))


def probe_points(xs: Sequence[float], probe: int) -> list[float]:
    """Nodes plus ``probe`` equally spaced interior points per cell."""
    if probe < 0:
        raise ValueError("probe must be non-negative")
    out = []
    for a, b in zip(xs, xs[1:]):
        out.append(a)
        out.extend(a + (b - a) * k / (probe + 1) for k in range(1, probe + 1))
    out.append(xs[-1])
    return out


def _check_same_domain(f: GridSVF, g: GridSVF):
    if f.domain != g.domain:
        raise DomainError(f"domains differ: {f.domain} vs {g.domain}")


def merged_nodes(f: GridSVF, g: GridSVF) -> list[float]:
    return sorted(set(f.xs) | set(g.xs))


def d_C(f: GridSVF, g: GridSVF, probe: int = 4) -> float:
    """``max_x 𝔥(f(x), g(x))`` over the merged grid plus ``probe`` points per cell."""
    _check_same_domain(f, g)
    xs = probe_points(merged_nodes(f, g), probe)
    if f.is_interval_valued and g.is_interval_valued:
        flo, fhi = pl_eval_intervals(f.xs, *f.interval_arrays(), xs)
        glo, ghi = pl_eval_intervals(g.xs, *g.interval_arrays(), xs)
        return float(np.max(np.maximum(np.abs(flo - glo), np.abs(fhi - ghi))))
    return max(hausdorff(pl_eval(f, x), pl_eval(g, x)) for x in xs)


def _partition_points(chi: PartitionSpec | Sequence[float]) -> tuple[float, ...]:
    return chi.points if isinstance(chi, PartitionSpec) else PartitionSpec(tuple(chi)).points


def total_variation(f: GridSVF, chi: PartitionSpec | Sequence[float]) -> float:
    """``Σ 𝔥(f(x_i), f(x_{i-1}))`` over the given partition."""
    vals = [pl_eval(f, x) for x in _partition_points(chi)]
    return math.fsum(hausdorff(u, v) for u, v in zip(vals, vals[1:]))


def cross_variation(f: GridSVF, g: GridSVF, chi: PartitionSpec | Sequence[float]) -> float:
    """``Σ 𝔥(f(x_i) ⊕ g(x_{i-1}), g(x_i) ⊕ f(x_{i-1}))`` over the given partition."""
    pts = _partition_points(chi)
    fv = [pl_eval(f, x) for x in pts]
    gv = [pl_eval(g, x) for x in pts]
    return math.fsum(
        hausdorff(metric_sum(1.0, fv[i], 1.0, gv[i - 1]), metric_sum(1.0, gv[i], 1.0, fv[i - 1]))
        for i in range(1, len(pts))
    )


def d_BV(f: GridSVF, g: GridSVF, chi: PartitionSpec | Sequence[float], probe: int = 4) -> float:
    """``d_C(f, g)`` plus the cross-⊕ variation over ``chi``."""
    _check_same_domain(f, g)
    return d_C(f, g, probe) + cross_variation(f, g, chi)


def _pair_nodes(xs: list[float], max_nodes: int) -> list[float]:
    if len(xs) <= max_nodes:
        return xs
    idx = np.unique(np.linspace(0, len(xs) - 1, max_nodes).round().astype(int))
    return [xs[i] for i in idx]


def holder_quotient(
    f: GridSVF, sigma: float, g: GridSVF | None = None, max_nodes: int = 400
) -> float:
    """Largest Hölder quotient over pairs of grid nodes.

    Without ``g`` this is ``𝔥(f(x), f(y)) / |x-y|^σ``; with ``g`` it is
    ``𝔥(f(x) ⊕ g(y), g(x) ⊕ f(y)) / |x-y|^σ``.  Grids larger than
    ``max_nodes`` are thinned with an even stride.
    """
    if not (0.0 < sigma <= 1.0):
        raise BadExponentError(f"Hölder exponent must lie in (0, 1], got {sigma}")
    if g is None:
        xs = _pair_nodes(list(f.xs), max_nodes)
        vals = [pl_eval(f, x) for x in xs]
        best = 0.0
        for i in range(len(xs)):
            for j in range(i + 1, len(xs)):
                q = hausdorff(vals[i], vals[j]) / (xs[j] - xs[i]) ** sigma
                best = max(best, q)
        return best
    _check_same_domain(f, g)
    xs = _pair_nodes(merged_nodes(f, g), max_nodes)
    fv = [pl_eval(f, x) for x in xs]
    gv = [pl_eval(g, x) for x in xs]
    best = 0.0
    for i in range(len(xs)):
        for j in range(i + 1, len(xs)):
            num = hausdorff(metric_sum(1.0, fv[i], 1.0, gv[j]), metric_sum(1.0, gv[i], 1.0, fv[j]))
            best = max(best, num / (xs[j] - xs[i]) ** sigma)
    return best


def d_holder(f: GridSVF, g: GridSVF, sigma: float, probe: int = 4, max_nodes: int = 400) -> float:
    return d_C(f, g, probe) + holder_quotient(f, sigma, g, max_nodes)


# --- Bernstein ---------------------------------------------------------------


def bernstein_weights(k: int, x: float) -> list[float]:
    return [math.comb(k, j) * x**j * (1.0 - x) ** (k - j) for j in range(k + 1)]


def _merge_equal(weights: Sequence[float], sets: Sequence[CompactSet]):
    """Coefficient-merge equal sample sets.

    Adjacent equal sets always collapse exactly, because ``Λ(A, A)`` is the
    diagonal.  When every sample is a single interval and no weight is
    negative the combination is order-free, so equal sets are grouped
    globally.
    """
    if all(s.is_interval for s in sets) and all(w >= 0 for w in weights):
        order: list[CompactSet] = []
        acc: dict[CompactSet, float] = {}
        for w, s in zip(weights, sets):
            if s not in acc:
                order.append(s)
                acc[s] = 0.0
            acc[s] += w
        return [acc[s] for s in order], order
    out_w: list[float] = []
    out_s: list[CompactSet] = []
    for w, s in zip(weights, sets):
        if out_s and out_s[-1] == s:
            out_w[-1] += w
        else:
            out_w.append(w)
            out_s.append(s)
    return out_w, out_s


def bernstein_metric(
    samples: Sequence[CompactSet], k: int, x: float, merge: bool = True
) -> CompactSet:
    """Metric Bernstein polynomial ``⊕_j C(k,j) x^j (1-x)^(k-j) f(j/k)``.

    Zero weights keep their pairing constraint; the endpoint values are
    still reproduced exactly since every point of a set starts some chain.
    """
    if len(samples) != k + 1:
        raise ValueError(f"need k+1={k + 1} samples, got {len(samples)}")
    if not (0.0 <= x <= 1.0):
        raise DomainError(f"x={x} outside [0, 1]")
    if x == 0.0:
        return samples[0]
    if x == 1.0:
        return samples[-1]
    w, s = bernstein_weights(k, x), list(samples)
    if merge:
        w, s = _merge_equal(w, s)
    return metric_combination(w, s)


def classical_bernstein(ys: Sequence[float], x: float) -> float:
    k = len(ys) - 1
    return math.fsum(w * y for w, y in zip(bernstein_weights(k, x), ys))


# --- extension and metric polynomials ----------------------------------------


def extend(f: GridSVF, X: CompactSet, interval: tuple[float, float]) -> GridSVF:
    """Extend ``f`` from ``X`` to ``interval``.

    Values on ``X`` are kept; across each gap of ``X`` the result is the
    metric-linear interpolant of the gap's endpoint values; beyond the ends
    of ``X`` it is constant.
    """
    if X is None or len(X) == 0:
        raise EmptySetError("cannot extend from an empty set")
    a, b = float(interval[0]), float(interval[1])
    if X.min < a or X.max > b:
        raise DomainError("X must lie inside the target interval")
    nodes = set(X.point_values() if X.is_finite else [])
    for lo, hi in X.intervals:
        nodes.add(lo)
        nodes.add(hi)
        nodes.update(x for x in f.xs if lo <= x <= hi)
    xs = sorted(nodes)
    vals = [pl_eval(f, x) for x in xs]
    if xs[0] > a:
        xs.insert(0, a)
        vals.insert(0, vals[0])
    if xs[-1] < b:
        xs.append(b)
        vals.append(vals[-1])
    if len(xs) == 1:
        xs, vals = [a, b], [vals[0], vals[0]]
    return GridSVF(tuple(xs), tuple(vals))


def metric_polynomial(coeffs: Sequence[CompactSet], x: float) -> CompactSet:
    """``A_0 ⊕ A_1 x ⊕ ... ⊕ A_n x^n``."""
    return metric_combination([x**j for j in range(len(coeffs))], list(coeffs))


def metric_polynomial_svf(coeffs: Sequence[CompactSet], xs: Sequence[float]) -> GridSVF:
    return GridSVF.from_function(lambda x: metric_polynomial(coeffs, x), xs)


def lipschitz_constant(f: GridSVF) -> float:
    """Largest ``𝔥(f(x_i), f(x_{i+1})) / (x_{i+1} - x_i)`` over adjacent nodes."""
    return max(
        hausdorff(u, v) / (b - a) for a, b, u, v in zip(f.xs, f.xs[1:], f.values, f.values[1:])
    )


# --- Weierstrass band ---------------------------------------------------------

W_A_LO = 0.01
W_A_HI = 0.5
W_TERMS = 30
W_SAMPLES = 513


def weierstrass_series(a, x: float, K: int = W_TERMS) -> np.ndarray:
    """Truncated ``Σ_{k<K} a^k cos(2π 3^k x)``, vectorised over ``a``."""
    a = np.asarray(a, float)
    k = np.arange(K)
    phase = np.mod(3.0**k * x, 1.0)
    return np.power.outer(a, k) @ np.cos(2.0 * np.pi * phase)


def weierstrass_tail_bound(a_hi: float = W_A_HI, K: int = W_TERMS) -> float:
    return a_hi**K / (1.0 - a_hi)


def _refine_extreme(x: float, grid: np.ndarray, vals: np.ndarray, K: int, sign: float) -> float:
    i = int(np.argmin(sign * vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, len(grid) - 1)]
    best = sign * vals[i]
    if hi > lo:
        res = minimize_scalar(
            lambda a: sign * float(weierstrass_series([a], x, K)[0]),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = min(best, float(res.fun))
    return sign * best


def weierstrass_svf(
    x: float,
    a_lo: float = W_A_LO,
    a_hi: float = W_A_HI,
    K: int = W_TERMS,
    M: int = W_SAMPLES,
    refine: bool = True,
) -> CompactSet:
    """``W(x) = {w_a(x) : a_lo <= a <= a_hi}`` with ``w_a`` truncated to ``K`` terms.

    ``a ↦ w_a(x)`` is continuous, so ``W(x)`` is an interval; its endpoints
    come from ``M`` equally spaced ``a`` samples, polished by a bounded
    scalar search around the best sample when ``refine`` is set.
    """
    if not (0.0 < a_lo <= a_hi < 1.0):
        raise DomainError("need 0 < a_lo <= a_hi < 1")
    if M < 2 and a_lo != a_hi:
        raise ValueError("need at least two a-samples")
    grid = np.linspace(a_lo, a_hi, M)
    vals = weierstrass_series(grid, x, K)
    lo, hi = float(vals.min()), float(vals.max())
    if refine:
        lo = _refine_extreme(x, grid, vals, K, 1.0)
        hi = _refine_extreme(x, grid, vals, K, -1.0)
    return normalize([(lo, hi)])


def weierstrass_grid(
    xs: Sequence[float],
    a_lo: float = W_A_LO,
    a_hi: float = W_A_HI,
    K: int = W_TERMS,
    M: int = W_SAMPLES,
) -> GridSVF:
    """Sampled-hull Weierstrass band on a grid, without the scalar polish."""
    grid = np.linspace(a_lo, a_hi, M)
    powers = np.power.outer(grid, np.arange(K))
    phase = np.mod(np.multiply.outer(np.asarray(xs, float), 3.0 ** np.arange(K)), 1.0)
    table = np.cos(2.0 * np.pi * phase) @ powers.T
    return GridSVF.from_intervals(xs, table.min(axis=1), table.max(axis=1))


# published four-digit samples of W at x = 0, 1/4, 1/2, 3/4, 1; fixed input data
W_TABLE = (
    (1.0101, 2.0),
    (-0.0067179, -0.00097261),
    (-1.9532, -1.0101),
    (-0.0067179, -0.00097261),
    (1.0101, 2.0),
)


def w_table_sets() -> list[CompactSet]:
    return [normalize([iv]) for iv in W_TABLE]
