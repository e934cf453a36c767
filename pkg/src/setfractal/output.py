"""Deterministic table and SVG writers.

Numbers are written with ``repr`` so reruns produce byte-identical files.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .compact_set import CompactSet


def _num(v):
    if isinstance(v, (np.floating, float)):
        return repr(float(v))
    if isinstance(v, (np.integer, int)):
        return str(int(v))
    return str(v)


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence], fmt: str = "csv") -> Path:
    """Write rows as CSV or JSON lines; returns the path actually written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "json-lines":
        path = path.with_suffix(".jsonl")
        with path.open("w", newline="\n") as fh:
            for row in rows:
                rec = {}
                for k, v in zip(header, row):
                    rec[k] = float(v) if isinstance(v, (np.floating, float)) else v
                    if isinstance(v, (np.integer,)):
                        rec[k] = int(v)
                fh.write(json.dumps(rec, sort_keys=False) + "\n")
        return path
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_num(v) for v in row])
    return path


def svf_rows(xs: Sequence[float], values: Sequence[CompactSet]):
    """Rows ``x, lo_1, hi_1, lo_2, hi_2, ...`` with a variable number of intervals."""
    width = max(len(V) for V in values)
    header = ["x"] + [f"{k}_{i + 1}" for i in range(width) for k in ("lo", "hi")]
    rows = []
    for x, V in zip(xs, values):
        row = [float(x)]
        for lo, hi in V.intervals:
            row += [lo, hi]
        rows.append(row + [""] * (len(header) - len(row)))
    return header, rows


def read_svf_csv(path: Path):
    """Inverse of :func:`svf_rows` written as CSV."""
    from .compact_set import normalize

    xs, vals = [], []
    with Path(path).open() as fh:
        r = csv.reader(fh)
        next(r)
        for row in r:
            nums = [float(c) for c in row if c != ""]
            xs.append(nums[0])
            vals.append(normalize(list(zip(nums[1::2], nums[2::2]))))
    return xs, vals


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
    return path


def _json_default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, CompactSet):
        return str(o)
    raise TypeError(f"cannot serialise {type(o).__name__}")


# --- SVG -------------------------------------------------------------------------

W, H, PAD = 640, 400, 48


class _Frame:
    def __init__(self, xlim, ylim):
        (self.x0, self.x1), (self.y0, self.y1) = xlim, ylim
        if self.x1 == self.x0:
            self.x1 = self.x0 + 1.0
        if self.y1 == self.y0:
            self.y1 = self.y0 + 1.0

    def px(self, x):
        return PAD + (x - self.x0) / (self.x1 - self.x0) * (W - 2 * PAD)

    def py(self, y):
        return H - PAD - (y - self.y0) / (self.y1 - self.y0) * (H - 2 * PAD)


def _f(v: float) -> str:
    return f"{v:.2f}"


def _axes(fr: _Frame, title: str, xlabel: str, ylabel: str) -> list[str]:
    out = [
        f'<rect x="{PAD}" y="{PAD}" width="{W - 2 * PAD}" height="{H - 2 * PAD}" fill="none" stroke="#444"/>',
        f'<text x="{W / 2}" y="{PAD / 2}" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{W / 2}" y="{H - 10}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="14" y="{H / 2}" text-anchor="middle" font-size="12" transform="rotate(-90 14 {H / 2})">{ylabel}</text>',
    ]
    for v, anchor in ((fr.x0, "start"), (fr.x1, "end")):
        out.append(f'<text x="{_f(fr.px(v))}" y="{H - PAD + 14}" text-anchor="{anchor}" font-size="10">{v:.4g}</text>')
    for v in (fr.y0, fr.y1):
        out.append(f'<text x="{PAD - 4}" y="{_f(fr.py(v))}" text-anchor="end" font-size="10">{v:.4g}</text>')
    return out


def _wrap(body: list[str]) -> str:
    head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">'
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>"]) + "\n"


def _limits(vals: np.ndarray) -> tuple[float, float]:
    lo, hi = float(np.min(vals)), float(np.max(vals))
    pad = 0.05 * (hi - lo) if hi > lo else 0.5
    return lo - pad, hi + pad


def band_svg(path: Path, xs, values: Sequence[CompactSet], title: str, ylabel: str = "y") -> Path:
    """Set-valued graph drawn as one vertical stroke per interval per x-probe."""
    ys = np.array([e for V in values for iv in V.intervals for e in iv])
    fr = _Frame((float(xs[0]), float(xs[-1])), _limits(ys))
    body = _axes(fr, title, "x", ylabel)
    strokes = []
    for x, V in zip(xs, values):
        X = _f(fr.px(x))
        for lo, hi in V.intervals:
            y0, y1 = fr.py(lo), fr.py(hi)
            if abs(y0 - y1) < 0.5:
                y0 += 0.25
                y1 -= 0.25
            strokes.append(f"M{X} {_f(y0)}V{_f(y1)}")
    body.append(f'<path d="{"".join(strokes)}" stroke="#1f5fa8" stroke-width="1" fill="none"/>')
    return _write(path, body)


def scatter_svg(path: Path, xs, ys, title: str, max_points: int = 20000) -> Path:
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    if len(xs) > max_points:
        idx = np.linspace(0, len(xs) - 1, max_points).round().astype(int)
        xs, ys = xs[idx], ys[idx]
    fr = _Frame(_limits(xs), _limits(ys))
    body = _axes(fr, title, "x", "y")
    dots = "".join(f"M{_f(fr.px(x))} {_f(fr.py(y))}h0.8" for x, y in zip(xs, ys))
    body.append(f'<path d="{dots}" stroke="#a8321f" stroke-width="1" fill="none"/>')
    return _write(path, body)


def loglog_svg(path: Path, deltas, counts, slope: float, title: str) -> Path:
    X = np.log2(1.0 / np.asarray(deltas, float))
    Y = np.log2(np.asarray(counts, float))
    fr = _Frame(_limits(X), _limits(Y))
    body = _axes(fr, title, "log2(1/delta)", "log2 N")
    icpt = float(np.mean(Y - slope * X))
    x0, x1 = float(X.min()), float(X.max())
    body.append(
        f'<line x1="{_f(fr.px(x0))}" y1="{_f(fr.py(slope * x0 + icpt))}" '
        f'x2="{_f(fr.px(x1))}" y2="{_f(fr.py(slope * x1 + icpt))}" stroke="#888" stroke-dasharray="4 3"/>'
    )
    for x, y in zip(X, Y):
        body.append(f'<circle cx="{_f(fr.px(x))}" cy="{_f(fr.py(y))}" r="3" fill="#1f5fa8"/>')
    if math.isfinite(slope):
        body.append(f'<text x="{W - PAD - 4}" y="{PAD + 16}" text-anchor="end" font-size="12">slope {slope:.4f}</text>')
    return _write(path, body)


def _write(path: Path, body: list[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(_wrap(body))
    return path
