"""Set-valued fractal interpolation built on metric linear combinations of compact sets."""

from .compact_set import (
    CompactSet,
    cantor_prefractal,
    dist_point,
    hausdorff,
    minkowski_sum,
    nearest_points,
    normalize,
    parse_literal,
    scale,
)
from .metric_comb import metric_chains, metric_combination, metric_pairs, metric_sum

__version__ = "0.1.0"
