"""Set-valued fractal interpolation through an iterated function system.

Each branch ``n`` maps ``(x, Y)`` to ``(L_n(x), Q_n(Y) ⊕ S_n(x))`` where
``L_n`` is the affine map of ``[x_0, x_N]`` onto ``[x_{n-1}, x_n]``, ``Q_n``
is a contraction on compact sets and ``S_n`` is an interval-valued function
chosen so the branches glue at the partition nodes.  The fractal interpolant
is the fixed point of the Read-Bajraktarević operator
``(R g)(L_n(x)) = Q_n(g(x)) ⊕ S_n(x)``.
"""
from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from .compact_set import CompactSet, hausdorff, normalize, scale
from .errors import (
    BadWeightsError,
    ConvexityRequiredError,
    GlueError,
    IllPosedEndpointError,
    NoConvergenceError,
    NotContractiveError,
)
from .metric_comb import metric_sum
from .svf import GridSVF, PartitionSpec, pl_eval

ENDPOINT_TOL = 1e-9
WIDTH_SLACK = 1e-12
DEFAULT_MIN_MESH = 1e-4


class ContractionOperator(Protocol):
    """Set map ``Y ↦ Q(Y)`` with Lipschitz ratio ``ratio`` and x-modulus ``q``."""

    ratio: float
    q: float

    def apply(self, Y: CompactSet) -> CompactSet: ...

    def apply_bounds(self, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]: ...


@dataclass(frozen=True)
class ScalarScale:
    """``Q(Y) = alpha * Y``."""

    alpha: float
    q: float = 0.0

    @property
    def ratio(self) -> float:
        return abs(self.alpha)

    def apply(self, Y: CompactSet) -> CompactSet:
        return scale(self.alpha, Y)

    def apply_bounds(self, lo, hi):
        a = self.alpha
        return (a * lo, a * hi) if a >= 0 else (a * hi, a * lo)

    def describe(self) -> str:
        return f"scale by {self.alpha}"


@dataclass(frozen=True)
class CenterRadiusScale:
    """Interval map scaling the midpoint by ``alpha`` and the half-width by ``|beta|``.

    In the Hausdorff metric intervals behave like ``|Δcentre| + |Δradius|``,
    so the ratio is ``max(|alpha|, |beta|)``; the map commutes with
    Minkowski sums of intervals.
    """

    alpha: float
    beta: float
    q: float = 0.0

    @property
    def ratio(self) -> float:
        return max(abs(self.alpha), abs(self.beta))

    def apply(self, Y: CompactSet) -> CompactSet:
        if not Y.is_interval:
            raise ConvexityRequiredError("centre-radius scaling needs a single interval")
        lo, hi = self.apply_bounds(np.array([Y.min]), np.array([Y.max]))
        return normalize([(float(lo[0]), float(hi[0]))])

    def apply_bounds(self, lo, hi):
        c = self.alpha * 0.5 * (lo + hi)
        r = abs(self.beta) * 0.5 * (hi - lo)
        return c - r, c + r

    def describe(self) -> str:
        return f"centre x{self.alpha}, radius x{abs(self.beta)}"


@dataclass(frozen=True)
class Certificate:
    """Contraction certificates for an IFS.

    ``contraction_ok`` is the fixed-point hypothesis ``max ratio < 1``.
    ``holder_value`` and ``bv_value`` are the stronger sufficient conditions
    for Hölder and bounded-variation regularity (ok when below 1).
    """

    max_ratio: float
    max_q: float
    sigma: float
    contraction_ok: bool
    holder_value: float
    holder_ok: bool
    bv_value: float
    bv_ok: bool
    description: str

    @property
    def margin(self) -> float:
        return 1.0 - self.max_ratio


@dataclass(frozen=True)
class IfsSpec:
    partition: PartitionSpec
    data: tuple[CompactSet, ...]
    q_ops: tuple
    s_funcs: tuple[GridSVF, ...]
    affine: tuple[tuple[float, float], ...]
    certificate: Certificate

    @property
    def n_branches(self) -> int:
        return len(self.q_ops)

    @property
    def domain(self) -> tuple[float, float]:
        return self.partition.domain

    def L(self, n: int, x):
        """Affine branch map, exact at both ends of the domain (``n`` is 0-based)."""
        x0, xN = self.domain
        p = self.partition.points
        s = (np.asarray(x, float) - x0) / (xN - x0)
        return p[n] * (1.0 - s) + p[n + 1] * s

    def L_inv(self, n: int, y):
        x0, xN = self.domain
        p = self.partition.points
        s = (np.asarray(y, float) - p[n]) / (p[n + 1] - p[n])
        return x0 * (1.0 - s) + xN * s

    def S(self, n: int, x: float) -> CompactSet:
        return pl_eval(self.s_funcs[n], x)

    def S_bounds(self, n: int, x) -> tuple[np.ndarray, np.ndarray]:
        f = self.s_funcs[n]
        (l0, h0), (l1, h1) = f.values[0].intervals[0], f.values[1].intervals[0]
        x0, xN = self.domain
        s = (np.asarray(x, float) - x0) / (xN - x0)
        return l0 + (l1 - l0) * s, h0 + (h1 - h0) * s

    def omega(self, n: int, x: float, Y: CompactSet) -> CompactSet:
        """``Q_n(Y) ⊕ S_n(x)``."""
        return metric_sum(1.0, self.q_ops[n].apply(Y), 1.0, self.S(n, x))

    def branch_of(self, y: float) -> int:
        """Branch whose image contains ``y``; shared nodes go to the left branch."""
        p = self.partition.points
        return min(max(bisect_left(p, y) - 1, 0), len(p) - 2)


def _as_operator(op) -> ContractionOperator:
    if isinstance(op, (int, float)):
        return ScalarScale(float(op))
    return op


def _difference(Y: CompactSet, Z: CompactSet, what: str) -> CompactSet:
    """Interval ``S`` with ``Z + S = Y``; exists only when ``Y`` is at least as wide as ``Z``."""
    wy, wz = Y.max - Y.min, Z.max - Z.min
    if wy < wz - WIDTH_SLACK:
        raise IllPosedEndpointError(
            f"{what}: target width {wy:.6g} is below the contracted width {wz:.6g}; "
            "no interval S_n satisfies the end-point condition"
        )
    lo, hi = Y.min - Z.min, Y.max - Z.max
    return normalize([(lo, max(lo, hi))])


def certificate_for(partition: PartitionSpec, q_ops: Sequence, sigma: float = 1.0) -> Certificate:
    p = partition.points
    N = len(p) - 1
    x0, xN = partition.domain
    a = [(p[i + 1] - p[i]) / (xN - x0) for i in range(N)]
    max_ratio = max(op.ratio for op in q_ops)
    max_q = max(op.q for op in q_ops)
    amin_s = min(abs(v) for v in a) ** sigma
    holder = (1.0 + N / amin_s) * max_ratio + N * max_q / amin_s
    bv = (N + 1) * max_ratio + max_q * N * (xN - x0) / min(abs(v) for v in a)
    return Certificate(
        max_ratio=max_ratio,
        max_q=max_q,
        sigma=sigma,
        contraction_ok=max_ratio < 1.0,
        holder_value=holder,
        holder_ok=holder < 1.0,
        bv_value=bv,
        bv_ok=bv < 1.0,
        description="; ".join(getattr(op, "describe", lambda: repr(op))() for op in q_ops),
    )


def build_ifs(
    partition: PartitionSpec | Sequence[float],
    data: Sequence[CompactSet],
    alpha: Sequence,
    sigma: float = 1.0,
) -> IfsSpec:
    """Assemble the IFS for interval data.

    ``alpha`` holds one entry per branch: a number (scalar scaling) or an
    operator object.  ``S_n`` is the linear interval function whose end
    values solve ``Q_n(Y_0) + S_n(x_0) = Y_{n-1}`` and
    ``Q_n(Y_N) + S_n(x_N) = Y_n``.
    """
    if not isinstance(partition, PartitionSpec):
        partition = PartitionSpec(tuple(partition))
    data = tuple(data)
    ops = tuple(_as_operator(op) for op in alpha)
    N = len(partition.points) - 1
    if len(data) != N + 1:
        raise ValueError(f"need {N + 1} data sets for {N} branches, got {len(data)}")
    if len(ops) != N:
        raise ValueError(f"need {N} contraction factors, got {len(ops)}")
    for i, op in enumerate(ops):
        if op.ratio >= 1.0:
            raise NotContractiveError(f"branch {i + 1}: contraction ratio {op.ratio} is not below 1")
    for i, Y in enumerate(data):
        if not Y.is_interval:
            raise ConvexityRequiredError(f"data value {i} is not a single interval: {Y}")
    x0, xN = partition.domain
    s_funcs, affine = [], []
    for n, op in enumerate(ops):
        start = _difference(data[n], op.apply(data[0]), f"branch {n + 1} at x_0")
        end = _difference(data[n + 1], op.apply(data[-1]), f"branch {n + 1} at x_N")
        s_funcs.append(GridSVF((x0, xN), (start, end)))
        p = partition.points
        a_n = (p[n + 1] - p[n]) / (xN - x0)
        b_n = (p[n + 1] * x0 - p[n] * xN) / (xN - x0)
        affine.append((a_n, b_n))
    ifs = IfsSpec(
        partition=partition,
        data=data,
        q_ops=ops,
        s_funcs=tuple(s_funcs),
        affine=tuple(affine),
        certificate=certificate_for(partition, ops, sigma),
    )
    for n in range(N):
        e0 = hausdorff(ifs.omega(n, x0, data[0]), data[n])
        e1 = hausdorff(ifs.omega(n, xN, data[-1]), data[n + 1])
        if max(e0, e1) > ENDPOINT_TOL:
            raise IllPosedEndpointError(f"branch {n + 1}: end-point mismatch {max(e0, e1):.3g}")
    return ifs


def validate_certificate(ifs: IfsSpec, sigma: float = 1.0) -> tuple[bool, Certificate]:
    """Recompute the certificates at Hölder exponent ``sigma``.

    The flag is the Hölder-regularity condition; the fixed-point condition
    is ``certificate.contraction_ok``.
    """
    cert = certificate_for(ifs.partition, ifs.q_ops, sigma)
    return cert.holder_ok, cert


# --- grids -----------------------------------------------------------------


def data_interpolant(ifs: IfsSpec) -> GridSVF:
    return GridSVF(ifs.partition.points, ifs.data)


def refine_grid(ifs: IfsSpec, xs: Sequence[float]) -> np.ndarray:
    """``∪_n L_n(xs)`` as a sorted array."""
    xs = np.asarray(xs, float)
    parts = [ifs.L(n, xs) for n in range(ifs.n_branches)]
    return np.unique(np.concatenate(parts))


def capped_grid(ifs: IfsSpec, min_mesh: float = DEFAULT_MIN_MESH) -> np.ndarray:
    """Deepest iterate of :func:`refine_grid` from the partition whose mesh stays ``>= min_mesh``.

    Every ``L_n``-preimage of a node of this grid is again a node.
    """
    xs = np.asarray(ifs.partition.points, float)
    while True:
        nxt = refine_grid(ifs, xs)
        if np.min(np.diff(nxt)) < min_mesh:
            return xs
        xs = nxt


def rb_apply(ifs: IfsSpec, g: GridSVF, grid: Sequence[float] | None = None) -> GridSVF:
    """One Read-Bajraktarević step.

    Without ``grid`` the output lives on ``∪_n L_n(g.xs)``; with ``grid`` the
    output is evaluated at those nodes through ``L_n^{-1}`` and ``pl_eval``.
    """
    N = ifs.n_branches
    if grid is None:
        xs, vals = [], []
        for n in range(N):
            ys = ifs.L(n, np.asarray(g.xs))
            for k, (x, Y) in enumerate(zip(g.xs, g.values)):
                V = ifs.omega(n, x, Y)
                if n > 0 and k == 0:
                    gap = hausdorff(V, vals[-1])
                    if gap > ENDPOINT_TOL:
                        raise GlueError(f"branches {n} and {n + 1} disagree by {gap:.3g}")
                    continue
                xs.append(float(ys[k]))
                vals.append(V)
        return GridSVF(tuple(xs), tuple(vals))
    out = []
    for y in grid:
        n = ifs.branch_of(y)
        x = float(ifs.L_inv(n, y))
        out.append(ifs.omega(n, x, pl_eval(g, x)))
    return GridSVF(tuple(grid), tuple(out))


class _IntervalKernel:
    """Vectorised RB operator for interval-valued functions on a fixed grid."""

    def __init__(self, ifs: IfsSpec, grid: np.ndarray):
        self.grid = grid
        p = ifs.partition.points
        branch = np.clip(np.searchsorted(p, grid, side="left") - 1, 0, ifs.n_branches - 1)
        self.groups = []
        for n in range(ifs.n_branches):
            idx = np.nonzero(branch == n)[0]
            x = ifs.L_inv(n, grid[idx])
            s_lo, s_hi = ifs.S_bounds(n, x)
            self.groups.append((idx, x, s_lo, s_hi, ifs.q_ops[n]))

    def __call__(self, lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        new_lo, new_hi = np.empty_like(lo), np.empty_like(hi)
        for idx, x, s_lo, s_hi, op in self.groups:
            glo, ghi = np.interp(x, self.grid, lo), np.interp(x, self.grid, hi)
            qlo, qhi = op.apply_bounds(glo, ghi)
            new_lo[idx], new_hi[idx] = qlo + s_lo, qhi + s_hi
        return new_lo, new_hi


@dataclass
class ConvergenceReport:
    iterations: int
    successive_dC: list[float] = field(default_factory=list)
    final_residual: float = math.nan
    certificate_ok: bool = False
    grid_size: int = 0
    mesh: float = math.nan

    def as_dict(self) -> dict:
        return {
            "iterations": self.iterations,
            "successive_dC": list(self.successive_dC),
            "final_residual": self.final_residual,
            "certificate_ok": self.certificate_ok,
            "grid_size": self.grid_size,
            "mesh": self.mesh,
        }


def fixed_point(
    ifs: IfsSpec,
    tol: float = 1e-8,
    max_iter: int = 200,
    min_mesh: float = DEFAULT_MIN_MESH,
) -> tuple[GridSVF, ConvergenceReport]:
    """Iterate the RB operator from the data interpolant until successive ``d_C`` drops below ``tol``.

    Iteration runs on :func:`capped_grid`, which is closed under the
    preimages ``L_n^{-1}``, so no off-grid interpolation enters the values.
    """
    cert = ifs.certificate
    if not cert.contraction_ok:
        raise NotContractiveError(f"max contraction ratio {cert.max_ratio} is not below 1")
    grid = capped_grid(ifs, min_mesh)
    start = data_interpolant(ifs)
    lo = np.interp(grid, start.xs, [Y.min for Y in ifs.data])
    hi = np.interp(grid, start.xs, [Y.max for Y in ifs.data])
    kernel = _IntervalKernel(ifs, grid)
    report = ConvergenceReport(
        iterations=0, certificate_ok=cert.contraction_ok, grid_size=len(grid), mesh=float(np.min(np.diff(grid)))
    )
    for it in range(1, max_iter + 1):
        nlo, nhi = kernel(lo, hi)
        d = float(np.max(np.maximum(np.abs(nlo - lo), np.abs(nhi - hi))))
        lo, hi = nlo, nhi
        report.iterations = it
        report.successive_dC.append(d)
        if d < tol:
            break
    else:
        f = GridSVF.from_intervals(grid, lo, hi)
        report.final_residual = self_referential_residual(ifs, f)
        raise NoConvergenceError(f"no convergence after {max_iter} iterations", report)
    f = GridSVF.from_intervals(grid, lo, np.maximum(lo, hi))
    report.final_residual = self_referential_residual(ifs, f)
    return f, report


def self_referential_residual(
    ifs: IfsSpec, f: GridSVF, probes: Sequence[float] | None = None
) -> float:
    """``max 𝔥(f(L_n(x)), Q_n(f(x)) ⊕ S_n(x))`` over probes and branches.

    The default probes are the nodes ``x`` whose images ``L_n(x)`` are again
    nodes, so no interpolation error enters.
    """
    xs = np.asarray(f.xs)
    if probes is None:
        probes = xs
        node_set = set(f.xs)
        pairs = [
            (n, float(x), float(y))
            for n in range(ifs.n_branches)
            for x, y in zip(xs, ifs.L(n, xs))
            if float(y) in node_set
        ]
    else:
        pairs = [(n, float(x), float(ifs.L(n, x))) for n in range(ifs.n_branches) for x in probes]
    if f.is_interval_valued:
        lo, hi = f.interval_arrays()
        worst = 0.0
        for n in range(ifs.n_branches):
            sel = [(x, y) for m, x, y in pairs if m == n]
            if not sel:
                continue
            x = np.array([s[0] for s in sel])
            y = np.array([s[1] for s in sel])
            qlo, qhi = ifs.q_ops[n].apply_bounds(np.interp(x, xs, lo), np.interp(x, xs, hi))
            slo, shi = ifs.S_bounds(n, x)
            dev = np.maximum(np.abs(np.interp(y, xs, lo) - qlo - slo), np.abs(np.interp(y, xs, hi) - qhi - shi))
            worst = max(worst, float(dev.max()))
        return worst
    return max(hausdorff(pl_eval(f, y), ifs.omega(n, x, pl_eval(f, x))) for n, x, y in pairs)


def evaluate_point(ifs: IfsSpec, x: float, depth: int = 40) -> CompactSet:
    """Fixed-point value at ``x`` by unrolling the self-referential equation ``depth`` times.

    The recursion bottoms out at the data interpolant; the error is at most
    ``max_ratio**depth`` times the distance between that start and the fixed point.
    """
    path = []
    for _ in range(depth):
        n = ifs.branch_of(x)
        px = float(ifs.L_inv(n, x))
        path.append((n, px))
        x = px
    Y = pl_eval(data_interpolant(ifs), x)
    for n, px in reversed(path):
        Y = ifs.omega(n, px, Y)
    return Y


def attractor_gap(ifs: IfsSpec, f: GridSVF, window: int = 16) -> float:
    """Two-sided Hausdorff gap between the graph ``G = {(x, f(x))}`` on the grid and ``∪_n W_n(G)``.

    Points of ``I × 𝒦(ℝ)`` are compared with ``|x - x'| + 𝔥(Y, Y')``;
    nearest neighbours are searched within ``window`` grid cells.
    """
    xs = np.asarray(f.xs)
    lo, hi = f.interval_arrays()
    img_x, img_lo, img_hi = [], [], []
    for n in range(ifs.n_branches):
        qlo, qhi = ifs.q_ops[n].apply_bounds(lo, hi)
        slo, shi = ifs.S_bounds(n, xs)
        img_x.append(ifs.L(n, xs))
        img_lo.append(qlo + slo)
        img_hi.append(qhi + shi)
    img_x, img_lo, img_hi = map(np.concatenate, (img_x, img_lo, img_hi))
    order = np.argsort(img_x, kind="stable")
    img_x, img_lo, img_hi = img_x[order], img_lo[order], img_hi[order]

    def directed(ax, alo, ahi, bx, blo, bhi):
        pos = np.searchsorted(bx, ax)
        best = np.full(len(ax), np.inf)
        for off in range(-window, window + 1):
            j = np.clip(pos + off, 0, len(bx) - 1)
            d = np.abs(ax - bx[j]) + np.maximum(np.abs(alo - blo[j]), np.abs(ahi - bhi[j]))
            best = np.minimum(best, d)
        return float(best.max())

    return max(
        directed(xs, lo, hi, img_x, img_lo, img_hi),
        directed(img_x, img_lo, img_hi, xs, lo, hi),
    )


# --- chaos game ----------------------------------------------------------------


@dataclass(frozen=True)
class ChaosOrbit:
    """Orbit samples ``(x_t, Y_t)`` with interval values stored as endpoint arrays."""

    xs: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    branches: np.ndarray

    def __len__(self) -> int:
        return len(self.xs)

    def __getitem__(self, t: int) -> tuple[float, CompactSet]:
        return float(self.xs[t]), normalize([(float(self.lo[t]), float(self.hi[t]))])


def chaos_game(
    ifs: IfsSpec,
    p: Sequence[float] | None = None,
    n: int = 10_000,
    seed: int = 0,
    burn: int = 100,
) -> ChaosOrbit:
    """Random orbit of ``W_k(x, Y) = (L_k(x), Q_k(Y) ⊕ S_k(x))`` from ``(x_0, Y_0)``.

    Branch ``k`` is drawn with probability ``p[k]``; ``p`` defaults to the
    branch length ratios.  The first ``burn`` states are discarded.
    """
    N = ifs.n_branches
    if p is None:
        p = [a for a, _ in ifs.affine]
    p = np.asarray(p, float)
    if len(p) != N or np.any(p < 0) or not np.isclose(p.sum(), 1.0, atol=1e-12):
        raise BadWeightsError(f"p must be a probability vector of length {N}")
    if n < 1 or burn < 0:
        raise ValueError("need n >= 1 and burn >= 0")
    rng = np.random.default_rng(seed)
    ks = rng.choice(N, size=n + burn, p=p / p.sum())
    x0, xN = ifs.domain
    pts = ifs.partition.points
    ops = ifs.q_ops
    s_tab = []
    for k in range(N):
        (l0, h0), (l1, h1) = ifs.s_funcs[k].values[0].intervals[0], ifs.s_funcs[k].values[1].intervals[0]
        s_tab.append((pts[k], pts[k + 1], l0, l1 - l0, h0, h1 - h0))
    span = xN - x0
    x, lo, hi = x0, ifs.data[0].min, ifs.data[0].max
    out_x = np.empty(n)
    out_lo = np.empty(n)
    out_hi = np.empty(n)
    for t, k in enumerate(ks.tolist()):
        left, right, l0, dl, h0, dh = s_tab[k]
        s = (x - x0) / span
        qlo, qhi = ops[k].apply_bounds(lo, hi)
        lo, hi = qlo + l0 + dl * s, qhi + h0 + dh * s
        x = left * (1.0 - s) + right * s
        if t >= burn:
            out_x[t - burn], out_lo[t - burn], out_hi[t - burn] = x, lo, hi
    return ChaosOrbit(out_x, out_lo, out_hi, ks[burn:])


def ecdf_uniform_distance(xs: np.ndarray, a: float, b: float) -> float:
    """Kolmogorov sup distance between the empirical CDF of ``xs`` and the uniform law on ``[a, b]``."""
    u = np.sort((np.asarray(xs) - a) / (b - a))
    m = len(u)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - u), np.max(u - (i - 1) / m)))
