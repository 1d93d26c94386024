"""Conformal-type metrics on Euclidean domains.

Pointwise metrics (Apollonian, j, j') live in :mod:`.metrics`, path metrics
(quasihyperbolic, inner length, inner diameter, Apollonian inner) in
:mod:`.paths`, and constant estimation in :mod:`.analysis`.
"""
from .domain import (
    BoundaryAtlas, Domain, DomainError, OutsideDomainError, load_domain, make_domain,
    sphere_inversion,
)
from .metrics import MetricValue, apollonian, j_metric, j_prime, log_density_ratio
from .paths import (
    GridError, GridGraph, Polyline, build_grid, d_length, inner_diameter, path_diameter,
    shortest_path,
)

__version__ = "0.1.0"
