"""Pointwise metrics: Apollonian, j, j' and the log-density lower bound."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import BoundaryAtlas, DomainError, OutsideDomainError, as_points

#: absolute allowance for floating point round-off in certified upper ends
ROUNDOFF = 1e-12

PSEUDOMETRIC = "pseudometric: complement lies in a hyperplane, alpha is not a metric here"


@dataclass(frozen=True)
class MetricValue:
    """A metric value with a bracket ``lower <= value <= upper``."""

    value: float
    lower: float
    upper: float
    exact: bool = False
    warning: str | None = None

    @property
    def width(self):
        return self.upper - self.lower

    @classmethod
    def exactly(cls, v, warning=None):
        return cls(v, v, v, True, warning)

    def as_dict(self):
        out = {"value": self.value, "lower": self.lower, "upper": self.upper}
        if self.exact:
            out["exact"] = True
        if self.warning:
            out["warning"] = self.warning
        return out


def _pair(D, x, y):
    if np.ndim(x) != 1 or np.ndim(y) != 1 or np.size(x) != np.size(y):
        raise DomainError("x and y must be single points of equal dimension")
    X, _ = as_points([x, y], D.n)
    if not np.all(D.contains(X)):
        raise OutsideDomainError("point outside domain")
    d = D.boundary_distance(X)
    return X[0], X[1], float(d[0]), float(d[1])


def _log_ratio(A, x, y):
    """log(|a - x| / |a - y|) for every row ``a`` of ``A``."""
    ax = A - x
    ay = A - y
    return 0.5 * np.log(np.einsum("ij,ij->i", ax, ax) / np.einsum("ij,ij->i", ay, ay)), ax, ay


def one_point_sups(x, y, atlas, dx, dy):
    """Both single-point suprema and their certified upper bounds.

    Returns ``(s_xy, s_yx, u_xy, u_yx)`` where ``s_xy`` is the sampled
    ``sup_a log(|a-x|/|a-y|)`` and ``u_xy`` bounds it over the whole boundary.
    """
    f, ax, ay = _log_ratio(atlas.points, x, y)
    g = atlas.radii
    rx = np.maximum(np.sqrt(np.einsum("ij,ij->i", ax, ax)) - g, dx)
    ry = np.maximum(np.sqrt(np.einsum("ij,ij->i", ay, ay)) - g, dy)
    slack = g * (1.0 / rx + 1.0 / ry)
    # on a cell, |a-x|/|a-y| <= 1 + |x-y|/|a-y|; tighter than the slack far away
    gap = float(np.linalg.norm(x - y))
    s1, s2 = float(f.max()), float((-f).max())
    u1 = float(np.minimum(f + slack, np.log1p(gap / ry)).max())
    u2 = float(np.minimum(slack - f, np.log1p(gap / rx)).max())
    if atlas.includes_infinity:
        # the point at infinity contributes log 1 = 0
        s1, s2 = max(s1, 0.0), max(s2, 0.0)
        if math.isfinite(atlas.window_radius):
            c = atlas.window_center
            reach = atlas.window_radius - max(np.linalg.norm(x - c), np.linalg.norm(y - c))
            tail = np.linalg.norm(x - y) / reach if reach > 0 else math.inf
        else:
            tail = 0.0
        u1, u2 = max(u1, tail, s1), max(u2, tail, s2)
    return s1, s2, u1, u2


def apollonian(D, x, y, atlas: BoundaryAtlas) -> MetricValue:
    """Apollonian distance ``alpha_D(x, y)`` over the atlas.

    The double supremum splits into two independent one-point suprema.  The
    value is the sampled supremum (a lower bound); ``upper`` adds the
    covering-radius Lipschitz slack of each atlas cell, plus the truncation
    tail for unbounded domains.
    """
    if len(atlas) == 0 and not atlas.includes_infinity:
        raise DomainError("empty boundary atlas")
    x, y, dx, dy = _pair(D, x, y)
    warning = None if D.apollonian else PSEUDOMETRIC
    if np.array_equal(x, y):
        return MetricValue(0.0, 0.0, 0.0, True, warning)
    s1, s2, u1, u2 = one_point_sups(x, y, atlas, dx, dy)
    value = max(s1 + s2, 0.0)
    return MetricValue(value, value, max(u1 + u2, value) + ROUNDOFF, False, warning)


def j_metric(D, x, y) -> MetricValue:
    x, y, dx, dy = _pair(D, x, y)
    return MetricValue.exactly(math.log1p(float(np.linalg.norm(x - y)) / min(dx, dy)))


def j_prime(D, x, y, rho: MetricValue) -> MetricValue:
    """``log(1 + rho_D(x, y) / min(d_D(x), d_D(y)))`` with the bracket of ``rho``."""
    x, y, dx, dy = _pair(D, x, y)
    m = min(dx, dy)
    return MetricValue(math.log1p(rho.value / m), math.log1p(rho.lower / m),
                       math.log1p(rho.upper / m), rho.exact)


def log_density_ratio(D, x, y) -> float:
    x, y, dx, dy = _pair(D, x, y)
    return abs(math.log(dx / dy))
