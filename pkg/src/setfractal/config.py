"""IFS configuration files.

A config is a YAML mapping whose first line is the version header
``# setfractal-ifs v1``::

    # setfractal-ifs v1
    partition: [0, 0.25, 0.5, 0.75, 1]
    data: ["[0,1]", "[0.5,1.2]", "[-0.3,0.6]", "[0.2,1]", "[0,1]"]
    alpha: [0.3, 0.3, 0.3, 0.3]
    p: [0.25, 0.25, 0.25, 0.25]     # optional, defaults to branch lengths
    tol: 1e-8                       # optional
    max_iter: 200                   # optional
    min_mesh: 1e-4                  # optional
    chaos: {n: 100000, burn: 100}   # optional

An ``alpha`` entry is a number (scale the set) or a mapping
``{centre: c, radius: r}`` (scale midpoint and half-width separately).
Numbers may be written as fractions such as ``1/3``.  Errors carry the line
number of the offending entry.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import yaml

from .compact_set import CompactSet, parse_number, parse_literal
from .errors import ConfigError, LiteralParseError, SetFractalError
from .fractal import CenterRadiusScale, IfsSpec, ScalarScale, build_ifs

HEADER = "# setfractal-ifs v1"
KNOWN = {"partition", "data", "alpha", "p", "tol", "max_iter", "min_mesh", "chaos", "sigma"}
REQUIRED = ("partition", "data", "alpha")


@dataclass(frozen=True)
class IfsConfig:
    partition: tuple[float, ...]
    data: tuple[CompactSet, ...]
    alpha: tuple
    p: tuple[float, ...] | None = None
    tol: float = 1e-8
    max_iter: int = 200
    min_mesh: float = 1e-4
    chaos_n: int = 100_000
    chaos_burn: int = 100
    sigma: float = 1.0

    def build(self) -> IfsSpec:
        return build_ifs(self.partition, self.data, self.alpha, self.sigma)


def _line(node) -> int:
    return node.start_mark.line + 1


def _number(node, what: str) -> float:
    if not isinstance(node, yaml.ScalarNode):
        raise ConfigError(f"{what} must be a number", _line(node))
    try:
        return parse_number(node.value)
    except (LiteralParseError, ValueError):
        raise ConfigError(f"{what}: cannot read {node.value!r} as a number", _line(node)) from None


def _numbers(node, what: str) -> tuple[float, ...]:
    if not isinstance(node, yaml.SequenceNode):
        raise ConfigError(f"{what} must be a list", _line(node))
    return tuple(_number(n, f"{what}[{i}]") for i, n in enumerate(node.value))


def _alpha(node) -> tuple:
    if not isinstance(node, yaml.SequenceNode):
        raise ConfigError("alpha must be a list", _line(node))
    out = []
    for i, n in enumerate(node.value):
        if isinstance(n, yaml.MappingNode):
            fields = {k.value: v for k, v in n.value}
            if set(fields) != {"centre", "radius"}:
                raise ConfigError(f"alpha[{i}] mapping needs exactly 'centre' and 'radius'", _line(n))
            out.append(
                CenterRadiusScale(
                    _number(fields["centre"], f"alpha[{i}].centre"),
                    _number(fields["radius"], f"alpha[{i}].radius"),
                )
            )
        else:
            out.append(ScalarScale(_number(n, f"alpha[{i}]")))
        if out[-1].ratio >= 1.0:
            raise ConfigError(f"alpha[{i}]: contraction ratio {out[-1].ratio} is not below 1", _line(n))
    return tuple(out)


def _data(node) -> tuple[CompactSet, ...]:
    if not isinstance(node, yaml.SequenceNode):
        raise ConfigError("data must be a list of set literals", _line(node))
    out = []
    for i, n in enumerate(node.value):
        if not isinstance(n, yaml.ScalarNode):
            raise ConfigError(f"data[{i}] must be a set literal string", _line(n))
        try:
            out.append(parse_literal(n.value))
        except SetFractalError as exc:
            raise ConfigError(f"data[{i}]: {exc}", _line(n)) from None
    return tuple(out)


def parse_config(text: str) -> IfsConfig:
    first = text.splitlines()[0].strip() if text.strip() else ""
    if first != HEADER:
        raise ConfigError(f"first line must be the version header {HEADER!r}", 1)
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ConfigError(f"YAML syntax: {exc.problem}", line) from None
    if not isinstance(root, yaml.MappingNode):
        raise ConfigError("config must be a mapping", _line(root) if root is not None else 1)
    fields = {}
    for k, v in root.value:
        if k.value not in KNOWN:
            raise ConfigError(f"unknown key {k.value!r}", _line(k))
        if k.value in fields:
            raise ConfigError(f"duplicate key {k.value!r}", _line(k))
        fields[k.value] = v
    for key in REQUIRED:
        if key not in fields:
            raise ConfigError(f"missing required key {key!r}")
    kw = dict(
        partition=_numbers(fields["partition"], "partition"),
        data=_data(fields["data"]),
        alpha=_alpha(fields["alpha"]),
    )
    if "p" in fields:
        kw["p"] = _numbers(fields["p"], "p")
    for key in ("tol", "min_mesh", "sigma"):
        if key in fields:
            kw[key] = _number(fields[key], key)
    if "max_iter" in fields:
        kw["max_iter"] = int(_number(fields["max_iter"], "max_iter"))
    if "chaos" in fields:
        node = fields["chaos"]
        if not isinstance(node, yaml.MappingNode):
            raise ConfigError("chaos must be a mapping", _line(node))
        for k, v in node.value:
            if k.value == "n":
                kw["chaos_n"] = int(_number(v, "chaos.n"))
            elif k.value == "burn":
                kw["chaos_burn"] = int(_number(v, "chaos.burn"))
            else:
                raise ConfigError(f"unknown key chaos.{k.value}", _line(k))
    return IfsConfig(**kw)


def load_config(path: str | Path) -> IfsConfig:
    return parse_config(Path(path).read_text())


def check_config(cfg: IfsConfig) -> IfsSpec:
    """Build the IFS, reporting construction errors as config errors."""
    try:
        return cfg.build()
    except SetFractalError as exc:
        raise ConfigError(str(exc)) from None


EXAMPLE_CONFIG = f"""{HEADER}
partition: [0, 0.25, 0.5, 0.75, 1]
data: ["[0,1]", "[0.5,1.2]", "[-0.3,0.6]", "[0.2,1]", "[0,1]"]
alpha: [0.3, 0.3, 0.3, 0.3]
tol: 1e-8
chaos: {{n: 100000, burn: 100}}
"""
