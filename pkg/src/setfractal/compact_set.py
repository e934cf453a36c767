"""Compact subsets of the real line as canonical finite unions of closed intervals.

A :class:`CompactSet` is an immutable, sorted tuple of disjoint ``(lo, hi)``
pairs; points are degenerate intervals ``(p, p)``.  Everything else in the
package builds on the exact geometry implemented here: point-to-set
distance, nearest points, the Hausdorff distance, scaling, Minkowski sums
and middle-thirds Cantor prefractals.
"""
from __future__ import annotations

import math
import re
from bisect import bisect_right
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySetError, InvalidEndpointError, LevelOverflowError, LiteralParseError

EPS_MERGE = 1e-12
MAX_CANTOR_LEVEL = 20

# below this size the pure-python paths beat numpy's call overhead
_SMALL = 48


@dataclass(frozen=True)
class CompactSet:
    """Canonical finite union of disjoint closed intervals.

    Build instances with :func:`normalize` (or the ``point``/``interval``/
    ``points`` helpers); the constructor trusts its argument to already be
    canonical.  Equality is equality of the interval tuples.
    """

    intervals: tuple[tuple[float, float], ...]

    @classmethod
    def point(cls, p: float) -> CompactSet:
        return normalize([(p, p)])

    @classmethod
    def interval(cls, lo: float, hi: float) -> CompactSet:
        return normalize([(lo, hi)])

    @classmethod
    def points(cls, ps: Iterable[float]) -> CompactSet:
        return normalize([(p, p) for p in ps])

    def __len__(self) -> int:
        return len(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __contains__(self, a: float) -> bool:
        i = bisect_right(self.lo_list, a) - 1
        return i >= 0 and a <= self.intervals[i][1]

    def __str__(self) -> str:
        return format_literal(self)

    @cached_property
    def lo_list(self) -> list[float]:
        return [lo for lo, _ in self.intervals]

    @cached_property
    def los(self) -> np.ndarray:
        return np.fromiter((lo for lo, _ in self.intervals), float, len(self.intervals))

    @cached_property
    def his(self) -> np.ndarray:
        return np.fromiter((hi for _, hi in self.intervals), float, len(self.intervals))

    @property
    def min(self) -> float:
        return self.intervals[0][0]

    @property
    def max(self) -> float:
        return self.intervals[-1][1]

    @property
    def is_interval(self) -> bool:
        return len(self.intervals) == 1

    @property
    def is_finite(self) -> bool:
        """True when every component is a single point."""
        return all(lo == hi for lo, hi in self.intervals)

    def point_values(self) -> list[float]:
        return [lo for lo, _ in self.intervals]

    def gaps(self) -> list[tuple[float, float]]:
        iv = self.intervals
        return [(iv[i][1], iv[i + 1][0]) for i in range(len(iv) - 1)]

    def contains_array(self, xs: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.los, xs, side="right") - 1
        safe = np.clip(idx, 0, None)
        return (idx >= 0) & (xs <= self.his[safe])


@dataclass(frozen=True)
class NearestResult:
    points: tuple[float, ...]
    distance: float


def _clean(x) -> float:
    x = float(x)
    if not math.isfinite(x):
        raise InvalidEndpointError(f"non-finite endpoint {x!r}")
    return x + 0.0  # folds -0.0 into 0.0


def normalize(raw: Iterable[Sequence[float]], eps: float = EPS_MERGE) -> CompactSet:
    """Fuse a list of ``(lo, hi)`` pairs into a canonical :class:`CompactSet`.

    Inputs may overlap, touch or come unsorted.  Neighbouring intervals whose
    gap is at most ``eps`` are merged.
    """
    pairs = [(_clean(lo), _clean(hi)) for lo, hi in raw]
    if not pairs:
        raise EmptySetError("a compact set needs at least one interval")
    for lo, hi in pairs:
        if lo > hi:
            raise InvalidEndpointError(f"interval ({lo}, {hi}) has lo > hi")
    if len(pairs) > _SMALL:
        arr = np.asarray(pairs, dtype=float)
        return _normalize_arrays(arr[:, 0], arr[:, 1], eps)
    pairs.sort()
    out = [list(pairs[0])]
    for lo, hi in pairs[1:]:
        last = out[-1]
        if lo - last[1] <= eps:
            if hi > last[1]:
                last[1] = hi
        else:
            out.append([lo, hi])
    return CompactSet(tuple((lo, hi) for lo, hi in out))


def _normalize_arrays(los: np.ndarray, his: np.ndarray, eps: float = EPS_MERGE) -> CompactSet:
    """Vectorised merge for large inputs; arrays must be finite with los <= his."""
    order = np.lexsort((his, los))
    los = los[order]
    his = np.maximum.accumulate(his[order])
    starts = np.ones(len(los), dtype=bool)
    starts[1:] = los[1:] - his[:-1] > eps
    first = np.flatnonzero(starts)
    last = np.append(first[1:] - 1, len(los) - 1)
    out_lo = los[first] + 0.0
    out_hi = his[last] + 0.0
    return CompactSet(tuple(zip(out_lo.tolist(), out_hi.tolist())))


def from_arrays(los, his, eps: float = EPS_MERGE) -> CompactSet:
    los = np.asarray(los, dtype=float)
    his = np.asarray(his, dtype=float)
    if los.size == 0:
        raise EmptySetError("a compact set needs at least one interval")
    if not (np.all(np.isfinite(los)) and np.all(np.isfinite(his))):
        raise InvalidEndpointError("non-finite endpoint")
    if np.any(los > his):
        raise InvalidEndpointError("interval with lo > hi")
    return _normalize_arrays(los, his, eps)


def _gap_distance(a: float, left: float | None, right: float | None) -> float:
    if left is None:
        return right - a
    if right is None:
        return a - left
    if a == 0.5 * (left + right):
        # half the gap length is the exactly-rounded tie value
        return 0.5 * (right - left)
    return min(a - left, right - a)


def dist_point(a: float, B: CompactSet) -> float:
    """``min_{b in B} |a - b|``; zero exactly when ``a`` lies in ``B``."""
    iv = B.intervals
    i = bisect_right(B.lo_list, a) - 1
    if i >= 0 and a <= iv[i][1]:
        return 0.0
    left = iv[i][1] if i >= 0 else None
    right = iv[i + 1][0] if i + 1 < len(iv) else None
    return _gap_distance(a, left, right)


def nearest_points(B: CompactSet, a: float) -> NearestResult:
    """All nearest points of ``B`` to ``a``; two points only at an exact gap midpoint."""
    iv = B.intervals
    i = bisect_right(B.lo_list, a) - 1
    if i >= 0 and a <= iv[i][1]:
        return NearestResult((a,), 0.0)
    left = iv[i][1] if i >= 0 else None
    right = iv[i + 1][0] if i + 1 < len(iv) else None
    d = _gap_distance(a, left, right)
    if left is None:
        return NearestResult((right,), d)
    if right is None:
        return NearestResult((left,), d)
    if a == 0.5 * (left + right):
        return NearestResult((left, right), d)
    return NearestResult((left,) if a - left < right - a else (right,), d)


def dist_array(xs: np.ndarray, B: CompactSet) -> np.ndarray:
    """Vectorised :func:`dist_point` over an array of query points."""
    xs = np.asarray(xs, dtype=float)
    los, his = B.los, B.his
    n = len(los)
    idx = np.searchsorted(los, xs, side="right") - 1
    has_left = idx >= 0
    has_right = idx + 1 < n
    li = np.clip(idx, 0, n - 1)
    ri = np.clip(idx + 1, 0, n - 1)
    left = his[li]
    right = los[ri]
    inside = has_left & (xs <= left)
    dl = np.where(has_left, xs - left, np.inf)
    dr = np.where(has_right, right - xs, np.inf)
    d = np.minimum(dl, dr)
    tie = has_left & has_right & (xs == 0.5 * (left + right))
    d = np.where(tie, 0.5 * (right - left), d)
    return np.where(inside, 0.0, d)


def _directed_small(A: CompactSet, B: CompactSet) -> float:
    best = 0.0
    for lo, hi in A.intervals:
        best = max(best, dist_point(lo, B), dist_point(hi, B))
    for left, right in B.gaps():
        mid = 0.5 * (left + right)
        if mid in A:
            best = max(best, 0.5 * (right - left))
    return best


def _directed(A: CompactSet, B: CompactSet) -> float:
    """``max_{a in A} D(a, B)`` evaluated exactly.

    ``D(., B)`` is piecewise linear with peaks at B's gap midpoints, so its
    maximum over A is attained at an endpoint of A or at a gap midpoint of B
    that lies in A.
    """
    if len(A) + len(B) <= _SMALL:
        return _directed_small(A, B)
    best = max(float(dist_array(A.los, B).max()), float(dist_array(A.his, B).max()))
    if len(B) > 1:
        left, right = B.his[:-1], B.los[1:]
        mids = 0.5 * (left + right)
        hit = A.contains_array(mids)
        if hit.any():
            best = max(best, float((0.5 * (right - left))[hit].max()))
    return best


def hausdorff(A: CompactSet, B: CompactSet) -> float:
    """Exact Hausdorff distance between two canonical sets."""
    if A == B:
        return 0.0
    return max(_directed(A, B), _directed(B, A))


def scale(lam: float, A: CompactSet) -> CompactSet:
    """The image ``lam * A``; a negative factor reverses the interval order."""
    lam = float(lam)
    if lam == 0.0:
        return CompactSet(((0.0, 0.0),))
    if lam > 0:
        pairs = [(lam * lo, lam * hi) for lo, hi in A.intervals]
    else:
        pairs = [(lam * hi, lam * lo) for lo, hi in reversed(A.intervals)]
    return normalize(pairs)


def translate(A: CompactSet, t: float) -> CompactSet:
    return normalize([(lo + t, hi + t) for lo, hi in A.intervals])


def minkowski_sum(A: CompactSet, B: CompactSet) -> CompactSet:
    """``{a + b : a in A, b in B}`` as the union of pairwise interval sums."""
    los = np.add.outer(A.los, B.los).ravel()
    his = np.add.outer(A.his, B.his).ravel()
    return _normalize_arrays(los, his)


def diameter(A: CompactSet) -> float:
    return A.max - A.min


def cantor_prefractal(k: int, max_level: int = MAX_CANTOR_LEVEL) -> CompactSet:
    """Level-``k`` middle-thirds Cantor approximant: ``2**k`` intervals of length ``3**-k``.

    Endpoints are computed as ``m / 3**k`` from exact integers so that shared
    gaps across levels are bit-identical.
    """
    k = int(k)
    if k < 0:
        raise ValueError("level must be non-negative")
    if k > max_level:
        raise LevelOverflowError(f"level {k} exceeds the configured maximum {max_level}")
    ms = np.zeros(1, dtype=np.int64)
    for _ in range(k):
        ms = np.concatenate([3 * ms, 3 * ms + 2])
    ms.sort()
    denom = float(3**k)
    los = ms.astype(float) / denom
    his = (ms + 1).astype(float) / denom
    return CompactSet(tuple(zip(los.tolist(), his.tolist())))


def cantor_error_bound(k: int) -> float:
    """Bound on the Hausdorff distance from the level-k prefractal to the Cantor set."""
    return 3.0**-k


# --- textual literals -------------------------------------------------------

_NUM = r"[-+]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][-+]?\d+)?(?:/\d+)?"
_TOKEN = re.compile(
    rf"\s*(?:(?P<iv>\[\s*(?P<lo>{_NUM})\s*,\s*(?P<hi>{_NUM})\s*\])"
    rf"|(?P<pts>\{{\s*{_NUM}(?:\s*,\s*{_NUM})*\s*\}})"
    rf"|(?P<bare>{_NUM}))\s*"
)
_SEP = re.compile(r"\s*(?:u|U|∪)\s*")


def parse_number(text: str) -> float:
    """Finite decimal or simple fraction such as ``1/3``."""
    text = text.strip()
    try:
        x = float(Fraction(text)) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise LiteralParseError(f"bad number {text!r}") from exc
    if not math.isfinite(x):
        raise LiteralParseError(f"number must be finite, got {text!r}")
    return x


def parse_literal(text: str) -> CompactSet:
    """Parse ``[lo,hi] u [lo,hi] u {p1,p2}`` into a canonical set.

    Numbers may be written as decimals or simple fractions such as ``1/3``.
    """
    pos = 0
    pairs: list[tuple[float, float]] = []
    text = text.strip()
    if not text:
        raise LiteralParseError("empty set literal")
    while True:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise LiteralParseError(f"cannot parse set literal at column {pos}: {text!r}")
        if m.group("iv"):
            lo, hi = parse_number(m.group("lo")), parse_number(m.group("hi"))
            if lo > hi:
                raise LiteralParseError(f"interval [{m.group('lo')},{m.group('hi')}] has lo > hi")
            pairs.append((lo, hi))
        elif m.group("pts"):
            body = m.group("pts").strip()[1:-1]
            for item in body.split(","):
                p = parse_number(item)
                pairs.append((p, p))
        else:
            p = parse_number(m.group("bare"))
            pairs.append((p, p))
        pos = m.end()
        if pos >= len(text):
            break
        s = _SEP.match(text, pos)
        if not s or s.end() == pos:
            raise LiteralParseError(f"expected 'u' at column {pos}: {text!r}")
        pos = s.end()
    try:
        return normalize(pairs)
    except InvalidEndpointError as exc:
        raise LiteralParseError(str(exc)) from exc


def format_number(x: float) -> str:
    if x == int(x) and abs(x) < 2**53:
        return str(int(x))
    return repr(float(x))


def format_literal(A: CompactSet) -> str:
    parts = []
    for lo, hi in A.intervals:
        if lo == hi:
            parts.append("{" + format_number(lo) + "}")
        else:
            parts.append(f"[{format_number(lo)},{format_number(hi)}]")
    return " u ".join(parts)
