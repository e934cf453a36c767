"""Metric pairs, metric chains and metric linear combinations of compact sets.

``Λ(A, B)`` is the set of pairs ``(a, b)`` where ``a`` is a nearest point of
``A`` to ``b`` *or* ``b`` is a nearest point of ``B`` to ``a``.  For finite
unions of intervals it is a finite union of segments in the ``(a, b)``
plane: diagonal pieces ``a = b``, vertical pieces ``a = c`` and horizontal
pieces ``b = c``.  The metric combination ``⊕ λ_j A_j`` is the set of
weighted sums along chains whose consecutive coordinates are metric pairs.
It is *not* an iterated binary sum; :func:`metric_combination` runs a
dynamic program over the segment graphs link by link.
"""
from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from typing import Sequence

from .compact_set import CompactSet, normalize, scale
from .errors import FiniteOnlyError, TooLargeError

DIAGONAL = "diagonal"
VERTICAL = "vertical"
HORIZONTAL = "horizontal"

A_TO_B = "b in nearest(B, a)"
B_TO_A = "a in nearest(A, b)"

MAX_CHAINS = 10**6


@dataclass(frozen=True)
class Segment:
    """One straight piece of ``Λ(A, B)``.

    ``a_lo..a_hi`` and ``b_lo..b_hi`` are the coordinate ranges.  Diagonal
    segments have equal ranges, vertical ones a fixed ``a`` and horizontal
    ones a fixed ``b``.
    """

    kind: str
    a_lo: float
    a_hi: float
    b_lo: float
    b_hi: float
    source: str

    def image(self, lam: float, mu: float) -> tuple[float, float]:
        """Range of ``lam*a + mu*b`` over the segment."""
        if self.kind == DIAGONAL:
            s = lam + mu
            u, v = s * self.a_lo, s * self.a_hi
        elif self.kind == HORIZONTAL:
            c = mu * self.b_lo
            u, v = lam * self.a_lo + c, lam * self.a_hi + c
        else:
            c = lam * self.a_lo
            u, v = c + mu * self.b_lo, c + mu * self.b_hi
        return (u, v) if u <= v else (v, u)

    @property
    def is_point(self) -> bool:
        return self.a_lo == self.a_hi and self.b_lo == self.b_hi


@dataclass(frozen=True)
class PairGraph:
    segments: tuple[Segment, ...]

    def point_pairs(self) -> set[tuple[float, float]]:
        """The pairs of a finite ``Λ(A, B)``; raises if any segment has length."""
        out = set()
        for s in self.segments:
            if not s.is_point:
                raise FiniteOnlyError("pair graph contains a segment of positive length")
            out.add((s.a_lo, s.b_lo))
        return out

    def contains(self, a: float, b: float, tol: float = 0.0) -> bool:
        for s in self.segments:
            if s.a_lo - tol <= a <= s.a_hi + tol and s.b_lo - tol <= b <= s.b_hi + tol:
                if s.kind != DIAGONAL or abs(a - b) <= tol:
                    return True
        return False


def _partition(B: CompactSet) -> list[tuple[float, float, float | None]]:
    """Nearest-point partition of the line induced by ``B``.

    Each piece is ``(x_lo, x_hi, c)``: ``c is None`` marks an identity piece
    (the nearest point of x is x itself), otherwise every x in the closed
    piece has ``c`` as a nearest point.  Gap midpoints belong to both
    neighbouring halves, which is how ties produce both pairs.
    """
    iv = B.intervals
    pieces: list[tuple[float, float, float | None]] = [(-math.inf, iv[0][0], iv[0][0])]
    for i, (lo, hi) in enumerate(iv):
        pieces.append((lo, hi, None))
        if i + 1 < len(iv):
            nxt = iv[i + 1][0]
            mid = 0.5 * (hi + nxt)
            pieces.append((hi, mid, hi))
            pieces.append((mid, nxt, nxt))
    pieces.append((iv[-1][1], math.inf, iv[-1][1]))
    return pieces


def _sweep(A: CompactSet, B: CompactSet, flip: bool) -> list[Segment]:
    """Segments pairing every point of A with its nearest points in B.

    With ``flip`` the roles are swapped on output so that the first coordinate
    always belongs to the left operand of :func:`metric_pairs`.
    """
    pieces = _partition(B)
    piece_hi = [p[1] for p in pieces]
    out = []
    source = B_TO_A if flip else A_TO_B
    for p, q in A.intervals:
        k = bisect_left(piece_hi, p)
        while k < len(pieces) and pieces[k][0] <= q:
            x_lo, x_hi, c = pieces[k]
            lo, hi = max(p, x_lo), min(q, x_hi)
            k += 1
            if lo > hi:
                continue
            if c is None:
                out.append(Segment(DIAGONAL, lo, hi, lo, hi, source))
            elif flip:
                out.append(Segment(VERTICAL, c, c, lo, hi, source))
            else:
                out.append(Segment(HORIZONTAL, lo, hi, c, c, source))
    return out


def _key(s: Segment):
    if s.is_point:
        return (s.a_lo, s.a_hi, s.b_lo, s.b_hi)
    return (s.a_lo, s.a_hi, s.b_lo, s.b_hi, s.kind)


def metric_pairs(A: CompactSet, B: CompactSet) -> PairGraph:
    """Exact segment decomposition of ``Λ(A, B)``."""
    seen = set()
    segs = []
    for s in _sweep(A, B, flip=False) + _sweep(B, A, flip=True):
        if s.is_point and s.a_lo == s.b_lo and s.kind != DIAGONAL:
            s = Segment(DIAGONAL, s.a_lo, s.a_hi, s.b_lo, s.b_hi, s.source)
        k = _key(s)
        if k not in seen:
            seen.add(k)
            segs.append(s)
    # a point pair already on a diagonal segment is redundant; keeping it
    # would route chains through a differently rounded branch
    diag = sorted((s.a_lo, s.a_hi) for s in segs if s.kind == DIAGONAL and not s.is_point)
    if diag:
        starts = [d[0] for d in diag]

        def covered(s: Segment) -> bool:
            if not s.is_point or s.a_lo != s.b_lo:
                return False
            i = bisect_right(starts, s.a_lo) - 1
            return i >= 0 and diag[i][1] >= s.a_lo

        segs = [s for s in segs if not covered(s)]
    return PairGraph(tuple(segs))


def metric_sum(lam: float, A: CompactSet, mu: float, B: CompactSet) -> CompactSet:
    """``lam*A ⊕ mu*B``: the set ``{lam*a + mu*b : (a, b) in Λ(A, B)}``."""
    return normalize([s.image(lam, mu) for s in metric_pairs(A, B).segments])


# --- n-ary combination ------------------------------------------------------


class _LinkIndex:
    """Segments of one link, bucketed by source so a-ranges are monotone within a bucket."""

    def __init__(self, graph: PairGraph):
        self.buckets = []
        for source in (A_TO_B, B_TO_A):
            segs = sorted(
                (s for s in graph.segments if s.source == source),
                key=lambda s: (s.a_lo, s.a_hi),
            )
            self.buckets.append((segs, [s.a_lo for s in segs], [s.a_hi for s in segs]))

    def overlapping(self, t_lo: float, t_hi: float):
        for segs, a_los, a_his in self.buckets:
            start = bisect_left(a_his, t_lo)
            stop = bisect_right(a_los, t_hi)
            for i in range(start, stop):
                s = segs[i]
                if s.a_hi >= t_lo and s.a_lo <= t_hi:
                    yield s


def _merge_states(states):
    """Exact merging of chain states ``(t_lo, t_hi, p, q_lo, q_hi)``.

    Two states are fused only when their reachable partial-sum regions union
    to a region of the same form: equal carrier with overlapping offsets, or
    equal offset with overlapping carriers.
    """
    states = set(states)
    for pass_ in range(2):
        groups: dict = {}
        for st in states:
            t_lo, t_hi, p, q_lo, q_hi = st
            if pass_ == 0:
                groups.setdefault((p, t_lo, t_hi), []).append((q_lo, q_hi))
            else:
                groups.setdefault((p, q_lo, q_hi), []).append((t_lo, t_hi))
        merged = set()
        for key, ranges in groups.items():
            ranges.sort()
            cur = list(ranges[0])
            runs = []
            for lo, hi in ranges[1:]:
                if lo <= cur[1]:
                    cur[1] = max(cur[1], hi)
                else:
                    runs.append(cur)
                    cur = [lo, hi]
            runs.append(cur)
            for lo, hi in runs:
                if pass_ == 0:
                    p, t_lo, t_hi = key
                    merged.add((t_lo, t_hi, p, lo, hi))
                else:
                    p, q_lo, q_hi = key
                    merged.add((lo, hi, p, q_lo, q_hi))
        states = merged
    return states


def _hull_image(coef: float, lo: float, hi: float) -> tuple[float, float]:
    u, v = coef * lo, coef * hi
    return (u, v) if u <= v else (v, u)


def metric_combination(lams: Sequence[float], sets: Sequence[CompactSet]) -> CompactSet:
    """``⊕_j lams[j] * sets[j]`` computed exactly by chain dynamic programming.

    A state ``(t_lo, t_hi, p, q_lo, q_hi)`` stands for the partial sums
    ``p*t + q`` with the current chain coordinate ``t`` in ``[t_lo, t_hi]``
    and ``q`` in ``[q_lo, q_hi]``.  Diagonal segments keep ``t`` free and add
    the link weight to ``p``; horizontal and vertical segments bind ``t``,
    fold its contribution into the offset and restart the carrier from the
    next coordinate's range.
    """
    lams = [float(x) for x in lams]
    if len(lams) != len(sets) or not sets:
        raise ValueError("need as many weights as sets, and at least one of each")
    if len(sets) == 1:
        return scale(lams[0], sets[0])
    if len(sets) == 2:
        return metric_sum(lams[0], sets[0], lams[1], sets[1])
    states = _merge_states((lo, hi, 0.0, 0.0, 0.0) for lo, hi in sets[0].intervals)
    for j in range(len(sets) - 1):
        link = _LinkIndex(metric_pairs(sets[j], sets[j + 1]))
        lam = lams[j]
        nxt = []
        for t_lo, t_hi, p, q_lo, q_hi in states:
            coef = p + lam
            for s in link.overlapping(t_lo, t_hi):
                if s.kind == DIAGONAL:
                    nxt.append((max(t_lo, s.a_lo), min(t_hi, s.a_hi), coef, q_lo, q_hi))
                elif s.kind == HORIZONTAL:
                    u, v = _hull_image(coef, max(t_lo, s.a_lo), min(t_hi, s.a_hi))
                    nxt.append((s.b_lo, s.b_lo, 0.0, q_lo + u, q_hi + v))
                else:
                    c = coef * s.a_lo
                    nxt.append((s.b_lo, s.b_hi, 0.0, q_lo + c, q_hi + c))
        states = _merge_states(nxt)
    last = lams[-1]
    pieces = []
    for t_lo, t_hi, p, q_lo, q_hi in states:
        u, v = _hull_image(p + last, t_lo, t_hi)
        pieces.append((q_lo + u, q_hi + v))
    return normalize(pieces)


def fold_metric_sum(lams: Sequence[float], sets: Sequence[CompactSet]) -> CompactSet:
    """Left fold ``((lams[0]A_0 ⊕ lams[1]A_1) ⊕ lams[2]A_2) ⊕ ...`` of binary sums.

    Equal to :func:`metric_combination` for single intervals with
    non-negative weights; for general sets the two differ.
    """
    acc = scale(lams[0], sets[0])
    for lam, A in zip(lams[1:], sets[1:]):
        acc = metric_sum(1.0, acc, lam, A)
    return acc


# --- brute-force chain enumeration (oracle) ---------------------------------


def _finite_points(A: CompactSet) -> list[float]:
    if not A.is_finite:
        raise FiniteOnlyError(f"metric chains need finite point sets, got {A}")
    return A.point_values()


def brute_pairs(A: CompactSet, B: CompactSet) -> set[tuple[float, float]]:
    """``Λ(A, B)`` for finite sets straight from the definition."""
    xs, ys = _finite_points(A), _finite_points(B)
    out = set()
    for a in xs:
        d = min(abs(a - b) for b in ys)
        out.update((a, b) for b in ys if abs(a - b) == d)
    for b in ys:
        d = min(abs(a - b) for a in xs)
        out.update((a, b) for a in xs if abs(a - b) == d)
    return out


def metric_chains(sets: Sequence[CompactSet], max_chains: int = MAX_CHAINS) -> list[tuple[float, ...]]:
    """Every metric chain through a list of finite sets, sorted and de-duplicated."""
    pts = [_finite_points(A) for A in sets]
    if math.prod(len(p) for p in pts) > max_chains:
        raise TooLargeError("product of set sizes exceeds the enumeration limit")
    if len(sets) == 1:
        return [(a,) for a in pts[0]]
    links = []
    for A, B in zip(sets, sets[1:]):
        succ: dict[float, list[float]] = {}
        for a, b in brute_pairs(A, B):
            succ.setdefault(a, []).append(b)
        links.append(succ)
    chains = [(a,) for a in pts[0]]
    for succ in links:
        chains = [c + (b,) for c in chains for b in succ.get(c[-1], ())]
    return sorted(set(chains))


def chain_sums(chains, lams: Sequence[float]) -> CompactSet:
    return CompactSet.points({sum(l * a for l, a in zip(lams, c)) for c in chains})


def brute_combination(lams: Sequence[float], sets: Sequence[CompactSet]) -> CompactSet:
    """Oracle for :func:`metric_combination` on finite sets."""
    return chain_sums(metric_chains(sets), lams)


def product_size(sets: Sequence[CompactSet]) -> int:
    return math.prod(len(A) for A in sets)
