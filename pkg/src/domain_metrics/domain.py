"""Euclidean domains with exact distance-to-boundary oracles.

Every domain is an open set ``D`` in R^n.  Points are numpy arrays of shape
``(n,)``; the vectorised helpers also accept stacks of shape ``(N, n)``.

The built-in kinds are::

    ball               B(center, radius), any n >= 2
    half_space         {x : <x, normal> > offset}, any n >= 2
    convex_polygon     interior of a convex polygon (n = 2)
    slit_disk          disk minus a closed segment (n = 2)
    tangent_disk_cusp  disk minus an internally tangent closed disk (n = 2)
    punctured_disk     disk minus one point; radius = inf gives R^2 minus a point

Boundary distances are analytic.  Boundary *samples* exist only to
approximate the supremum in the Apollonian metric.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

KINDS = (
    "ball",
    "half_space",
    "convex_polygon",
    "slit_disk",
    "tangent_disk_cusp",
    "punctured_disk",
)

#: truncation window for unbounded domains, in units of the domain scale
TRUNCATION = 1.0e6


class DomainError(ValueError):
    """Invalid domain description or a point that violates a precondition."""


class OutsideDomainError(DomainError):
    pass


def as_points(x, n=None):
    """Return ``(array of shape (N, n), was_single)``."""
    a = np.asarray(x, dtype=float)
    single = a.ndim == 1
    a = np.atleast_2d(a)
    if a.ndim != 2:
        raise DomainError(f"expected points of shape (n,) or (N, n), got {a.shape}")
    if n is not None and a.shape[1] != n:
        raise DomainError(f"dimension mismatch: point has {a.shape[1]} coordinates, domain has n={n}")
    if not np.all(np.isfinite(a)):
        raise DomainError("point coordinates must be finite")
    return a, single


def _norm(v):
    return np.sqrt(np.einsum("...i,...i->...", v, v))


def segment_distance(X, p, q):
    """Distance from each row of ``X`` to the closed segment [p, q]."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    e = q - p
    ee = float(e @ e)
    if ee == 0.0:
        return _norm(X - p)
    t = np.clip((X - p) @ e / ee, 0.0, 1.0)
    return _norm(X - (p + t[:, None] * e))


def _segments_point_distance(U, V, p):
    """Distance from the point ``p`` to each segment [U_i, V_i]."""
    e = V - U
    ee = np.einsum("ij,ij->i", e, e)
    w = p - U
    with np.errstate(invalid="ignore", divide="ignore"):
        t = np.where(ee > 0, np.einsum("ij,ij->i", w, e) / ee, 0.0)
    t = np.clip(t, 0.0, 1.0)
    return _norm(U + t[:, None] * e - p)


def _cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def segments_hit_segment(U, V, p, q):
    """True where the closed segment [U_i, V_i] meets the closed segment [p, q]."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    o1 = _cross2(q - p, U - p)
    o2 = _cross2(q - p, V - p)
    o3 = _cross2(V - U, p - U)
    o4 = _cross2(V - U, q - U)
    proper = (o1 * o2 < 0) & (o3 * o4 < 0)
    touch = np.minimum.reduce([
        segment_distance(U, p, q),
        segment_distance(V, p, q),
        _segments_point_distance(U, V, p),
        _segments_point_distance(U, V, q),
    ])
    return proper | (touch == 0.0)


def sphere_inversion(x, center, radius):
    """Inversion in the sphere S(center, radius).

    Works on a single point or a stack of points.
    """
    if radius <= 0:
        raise DomainError("inversion radius must be positive")
    X, single = as_points(x)
    c = np.asarray(center, float)
    v = X - c
    r2 = np.einsum("ij,ij->i", v, v)
    if np.any(r2 == 0.0):
        raise DomainError("inversion pole: point coincides with the inversion center")
    out = c + (radius * radius / r2)[:, None] * v
    return out[0] if single else out


# ---------------------------------------------------------------------------
# boundary pieces (n = 2)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _Arc:
    center: tuple
    radius: float
    start: float  # angle of arc-length 0
    sweep: float  # signed total angle

    @property
    def length(self):
        return abs(self.sweep) * self.radius

    def at(self, s):
        th = self.start + np.sign(self.sweep) * s / self.radius
        c = np.asarray(self.center)
        return c + self.radius * np.stack([np.cos(th), np.sin(th)], axis=-1)


@dataclass(frozen=True)
class _Segment:
    p: tuple
    q: tuple

    @property
    def length(self):
        return float(math.dist(self.p, self.q))

    def at(self, s):
        p = np.asarray(self.p)
        e = (np.asarray(self.q) - p) / self.length
        return p + s[:, None] * e


def _uniform_cells(length, spacing):
    k = max(1, math.ceil(length / spacing - 1e-9))
    edges = np.linspace(0.0, length, k + 1)
    return edges


def _apportion(m, weights):
    """Split ``m`` into integer parts proportional to ``weights`` (each >= 1)."""
    raw = m * np.asarray(weights, float) / np.sum(weights)
    k = np.maximum(np.floor(raw).astype(int), 1)
    short = m - k.sum()
    if short > 0:
        k[np.argsort(-(raw - np.floor(raw)), kind="stable")[:short]] += 1
    return k


def _graded_cells(length, spacing, kappa, depth):
    """Cell edges on [0, length] refined toward s = 0.

    The cell width is about ``kappa * s**2`` (never below ``kappa * depth**2``
    and never above ``spacing``), which keeps a fixed number of samples per
    local boundary distance in a quadratic cusp.
    """
    g_tip = kappa * depth * depth
    if g_tip >= spacing:
        return _uniform_cells(length, spacing)
    s_join = min(math.sqrt(spacing / kappa), length)
    head = np.linspace(0.0, depth, max(1, math.ceil(depth / g_tip)) + 1)
    u = np.arange(1.0 / depth, 1.0 / s_join, -kappa)
    mid = 1.0 / u[1:]
    parts = [head, mid]
    if s_join < length:
        parts.append(s_join + _uniform_cells(length - s_join, spacing))
    else:
        parts.append(np.array([length]))
    edges = np.unique(np.concatenate(parts))
    return edges[(edges >= 0) & (edges <= length)]


def _sample_piece(piece, edges):
    mids = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * np.diff(edges)
    return piece.at(mids), half


# ---------------------------------------------------------------------------
# directions on spheres (n >= 3)
# ---------------------------------------------------------------------------

def _sphere_directions(dim, count, seed=0):
    """Quasi-uniform unit vectors in R^dim and an estimated covering radius."""
    if dim == 1:
        return np.array([[1.0], [-1.0]]), 0.0
    if dim == 2:
        th = 2 * np.pi * (np.arange(count) + 0.5) / count
        return np.stack([np.cos(th), np.sin(th)], axis=1), math.pi / count
    if dim == 3:
        i = np.arange(count) + 0.5
        z = 1 - 2 * i / count
        phi = np.pi * (1 + 5**0.5) * i
        r = np.sqrt(1 - z * z)
        dirs = np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=1)
    else:
        dirs = np.random.default_rng(seed).standard_normal((count, dim))
        dirs /= _norm(dirs)[:, None]
    # empirical covering radius, padded
    probe = np.random.default_rng(seed + 1).standard_normal((20000, dim))
    probe /= _norm(probe)[:, None]
    dist, _ = cKDTree(dirs).query(probe)
    return dirs, 1.25 * float(dist.max())


# ---------------------------------------------------------------------------
# atlas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BoundaryAtlas:
    """Finite sample of the boundary used to approximate Apollonian suprema.

    ``radii[k]`` is a covering radius: every boundary point inside the
    sampled window lies within ``radii[k]`` of some sample ``k``.  For
    unbounded domains ``includes_infinity`` is set and boundary points outside
    the ball ``B(window_center, window_radius)`` are not sampled at all.
    """

    points: np.ndarray
    radii: np.ndarray
    includes_infinity: bool = False
    window_center: np.ndarray | None = None
    window_radius: float = math.inf

    def __len__(self):
        return len(self.points)

    @property
    def spacing(self):
        return 2.0 * float(self.radii.max()) if len(self.radii) else 0.0

    def subsample(self, size):
        """Every k-th sample, with covering radii widened accordingly."""
        if len(self) <= size:
            return self
        step = math.ceil(len(self) / size)
        pts = self.points[::step]
        tree = cKDTree(pts)
        # each original sample is within dist of some kept sample
        dist, idx = tree.query(self.points)
        rad = np.zeros(len(pts))
        np.maximum.at(rad, idx, dist + self.radii)
        return BoundaryAtlas(pts, rad, self.includes_infinity, self.window_center, self.window_radius)


# ---------------------------------------------------------------------------
# domains
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False, repr=False)
class Domain:
    """Base class; use :func:`make_domain` to construct."""

    n: int
    bounded: bool = field(init=False, default=True)
    apollonian: bool = field(init=False, default=True)

    kind = "abstract"

    # -- oracles to override -------------------------------------------------
    def _inside(self, X):
        raise NotImplementedError

    def boundary_distance(self, x):
        """Unsigned distance to the boundary, valid for any point of R^n."""
        raise NotImplementedError

    def _segments_inside(self, U, V):
        # convex domains
        return self._inside(U) & self._inside(V)

    def _pieces(self):
        raise NotImplementedError

    @property
    def scale(self):
        """Characteristic length of the domain."""
        return 1.0

    def bounding_box(self):
        raise NotImplementedError

    def sample_box(self):
        """Box used for uniform interior sampling."""
        return self.bounding_box()

    def feature_size(self, x):
        """Local width of the domain, ``inf`` where it is not a bottleneck."""
        X, single = as_points(x, self.n)
        out = np.full(len(X), np.inf)
        return out[0] if single else out

    def to_dict(self):
        raise NotImplementedError

    # -- public API ----------------------------------------------------------
    def contains(self, x):
        X, single = as_points(x, self.n)
        out = self._inside(X)
        return bool(out[0]) if single else out

    def dist_to_boundary(self, x):
        """Exact ``d_D(x)``; raises if any point is outside ``D``."""
        X, single = as_points(x, self.n)
        if not np.all(self._inside(X)):
            raise OutsideDomainError("point outside domain")
        d = self.boundary_distance(X)
        return float(d[0]) if single else d

    def segments_inside(self, U, V):
        """True where the closed segment [U_i, V_i] lies in ``D``."""
        U, _ = as_points(U, self.n)
        V, _ = as_points(V, self.n)
        return self._segments_inside(U, V)

    def boundary_samples(self, m=10_000):
        if m < 1:
            raise DomainError("boundary_samples needs m >= 1")
        pieces = self._pieces()
        lengths = np.array([p.length for p, _ in pieces])
        spacing = lengths.sum() / m
        counts = _apportion(m, lengths)
        pts, rad = [], []
        for (piece, grading), k in zip(pieces, counts):
            if grading is None:
                edges = np.linspace(0.0, piece.length, k + 1)
            else:
                edges = _graded_cells(piece.length, spacing, *grading)
            p, r = _sample_piece(piece, edges)
            pts.append(p)
            rad.append(r)
        return BoundaryAtlas(self._off_interior(np.concatenate(pts)), np.concatenate(rad))

    def _off_interior(self, P):
        """Move samples that rounding left inside ``D`` by a few ulps onto the complement."""
        bad = np.flatnonzero(self._inside(P))
        for i in bad:
            p = P[i]
            for k in range(1, 65):
                step = k * np.spacing(np.maximum(np.abs(p), 1.0))
                cand = [p + sgn * step * e for e in np.eye(self.n) for sgn in (1.0, -1.0)]
                out = [c for c in cand if not self._inside(c[None])[0]]
                if out:
                    P[i] = out[0]
                    break
        return P

    def sample_interior(self, rng, count, box=None):
        """Uniform points of ``D`` inside ``box`` or :meth:`sample_box` (rejection)."""
        lo, hi = self.sample_box() if box is None else (np.asarray(b, float) for b in box)
        out = []
        need = count
        while need > 0:
            X = rng.uniform(lo, hi, size=(max(64, 2 * need), self.n))
            X = X[self._inside(X)]
            out.append(X[:need])
            need -= len(out[-1])
        return np.concatenate(out)

    def __repr__(self):
        return f"{type(self).__name__}({json.dumps(self.to_dict())})"


def _vec(v, name, n=None):
    a = np.asarray(v, dtype=float).reshape(-1)
    if not np.all(np.isfinite(a)):
        raise DomainError(f"{name} must be finite")
    if n is not None and len(a) != n:
        raise DomainError(f"{name} must have {n} coordinates")
    return a


def _positive(v, name):
    v = float(v)
    if not v > 0:
        raise DomainError(f"{name} must be positive")
    return v


@dataclass(frozen=True, eq=False, repr=False)
class Ball(Domain):
    center: np.ndarray = None
    radius: float = 1.0
    kind = "ball"

    def _inside(self, X):
        return _norm(X - self.center) < self.radius

    def boundary_distance(self, x):
        X, _ = as_points(x, self.n)
        return np.abs(self.radius - _norm(X - self.center))

    @property
    def scale(self):
        return self.radius

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def _pieces(self):
        return [(_Arc(tuple(self.center), self.radius, 0.0, 2 * math.pi), None)]

    def boundary_samples(self, m=10_000):
        if self.n == 2:
            return super().boundary_samples(m)
        if m < 1:
            raise DomainError("boundary_samples needs m >= 1")
        dirs, cover = _sphere_directions(self.n, m)
        return BoundaryAtlas(self.center + self.radius * dirs, np.full(m, self.radius * cover))

    def to_dict(self):
        return {"kind": self.kind, "n": self.n, "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False, repr=False)
class HalfSpace(Domain):
    normal: np.ndarray = None
    offset: float = 0.0
    length_scale: float = 1.0
    kind = "half_space"

    def __post_init__(self):
        object.__setattr__(self, "bounded", False)

    @property
    def scale(self):
        return self.length_scale

    @property
    def foot(self):
        """Point of the boundary hyperplane closest to the origin."""
        return self.offset * self.normal

    def tangent_frame(self):
        """Orthonormal basis of the boundary hyperplane, shape (n-1, n)."""
        q, _ = np.linalg.qr(np.column_stack([self.normal, np.eye(self.n)]))
        return q[:, 1:self.n].T

    def _inside(self, X):
        return X @ self.normal > self.offset

    def boundary_distance(self, x):
        X, _ = as_points(x, self.n)
        return np.abs(X @ self.normal - self.offset)

    def bounding_box(self):
        raise DomainError("half_space is unbounded; pass an explicit window")

    def sample_box(self):
        # box in the local frame, mapped to a bounding box; rejection keeps the half
        s = self.length_scale
        T = self.tangent_frame()
        corners = []
        for signs in np.ndindex(*([2] * (self.n - 1))):
            t = sum((4 * sgn - 2) * s * T[i] for i, sgn in enumerate(signs))
            for h in (0.0, 4.0 * s):
                corners.append(self.foot + t + h * self.normal)
        corners = np.array(corners)
        return corners.min(axis=0), corners.max(axis=0)

    def sample_interior(self, rng, count, box=None):
        if box is not None:
            return super().sample_interior(rng, count, box)
        s = self.length_scale
        T = self.tangent_frame()
        u = rng.uniform(-2 * s, 2 * s, size=(count, self.n - 1))
        h = rng.uniform(0.0, 4 * s, size=count)
        h = np.where(h == 0.0, 4 * s, h)
        return self.foot + u @ T + h[:, None] * self.normal

    def boundary_samples(self, m=10_000):
        if m < 1:
            raise DomainError("boundary_samples needs m >= 1")
        # t = S sinh(u) with uniform u: spacing ~ S du near the foot point and
        # proportional to |t| far away, so every cell stays small relative to
        # its distance from the sampling box
        S = 0.1 * self.length_scale
        R = TRUNCATION * self.length_scale
        u_max = math.asinh(R / S)
        T = self.tangent_frame()
        if self.n == 2:
            k = m
            du = 2 * u_max / k
            u = -u_max + (np.arange(k) + 0.5) * du
            t = S * np.sinh(u)
            rad = S * np.sinh(np.abs(u) + du / 2) - np.abs(t)
            pts = self.foot + t[:, None] * T[0]
        else:
            rings = max(2, int(round(math.sqrt(m))))
            per = max(4, m // rings)
            dirs, cover = _sphere_directions(self.n - 1, per)
            du = u_max / rings
            u = (np.arange(rings) + 0.5) * du
            t = S * np.sinh(u)
            dr = S * np.sinh(u + du / 2) - t
            pts, rad = [self.foot[None, :]], [np.array([S * math.sinh(du / 2)])]
            for ti, dri in zip(t, dr):
                pts.append(self.foot + ti * (dirs @ T))
                rad.append(np.full(len(dirs), math.hypot(dri, (ti + dri) * cover)))
            pts = np.concatenate(pts)
            rad = np.concatenate(rad)
        return BoundaryAtlas(pts, rad, True, self.foot.copy(), R)

    def to_dict(self):
        return {"kind": self.kind, "n": self.n, "normal": self.normal.tolist(),
                "offset": self.offset, "scale": self.length_scale}


@dataclass(frozen=True, eq=False, repr=False)
class ConvexPolygon(Domain):
    vertices: np.ndarray = None  # counter-clockwise
    kind = "convex_polygon"

    def _edges(self):
        V = self.vertices
        return V, np.roll(V, -1, axis=0)

    def _inside(self, X):
        P, Q = self._edges()
        c = _cross2((Q - P)[None, :, :], X[:, None, :] - P[None, :, :])
        return np.all(c > 0, axis=1)

    def boundary_distance(self, x):
        X, _ = as_points(x, self.n)
        P, Q = self._edges()
        E = Q - P
        R = X[:, None, :] - P[None]
        t = np.clip(np.einsum("kij,ij->ki", R, E) / np.einsum("ij,ij->i", E, E), 0.0, 1.0)
        return _norm(R - t[..., None] * E[None]).min(axis=1)

    @property
    def scale(self):
        V = self.vertices
        return 0.5 * float(np.max(_norm(V[:, None] - V[None])))

    def bounding_box(self):
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def _pieces(self):
        P, Q = self._edges()
        return [(_Segment(tuple(p), tuple(q)), None) for p, q in zip(P, Q)]

    def to_dict(self):
        return {"kind": self.kind, "n": 2, "vertices": self.vertices.tolist()}


@dataclass(frozen=True, eq=False, repr=False)
class SlitDisk(Domain):
    center: np.ndarray = None
    radius: float = 1.0
    slit: np.ndarray = None  # shape (2, 2)
    kind = "slit_disk"

    def _inside(self, X):
        return (_norm(X - self.center) < self.radius) & (segment_distance(X, *self.slit) > 0)

    def boundary_distance(self, x):
        X, _ = as_points(x, self.n)
        return np.minimum(np.abs(self.radius - _norm(X - self.center)), segment_distance(X, *self.slit))

    def _segments_inside(self, U, V):
        ok = (_norm(U - self.center) < self.radius) & (_norm(V - self.center) < self.radius)
        return ok & ~segments_hit_segment(U, V, *self.slit)

    @property
    def scale(self):
        return self.radius

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def _pieces(self):
        p, q = self.slit
        # the slit is boundary from both sides
        seg = _Segment(tuple(p), tuple(q))
        return [(_Arc(tuple(self.center), self.radius, 0.0, 2 * math.pi), None), (seg, None), (seg, None)]

    def straddle_normal(self):
        p, q = self.slit
        e = (q - p) / np.linalg.norm(q - p)
        return np.array([-e[1], e[0]])

    def to_dict(self):
        return {"kind": self.kind, "n": 2, "center": self.center.tolist(), "radius": self.radius,
                "slit": self.slit.tolist()}


@dataclass(frozen=True, eq=False, repr=False)
class TangentDiskCusp(Domain):
    """Disk ``B(center, radius)`` minus the closed disk of radius ``inner_radius``
    internally tangent at ``center + radius * direction``.

    Near the tangency point the domain consists of two horns whose width
    decays quadratically.  ``depth`` is the smallest tip distance the boundary
    sampler and graded grids are asked to resolve.
    """

    center: np.ndarray = None
    radius: float = 1.0
    inner_radius: float = 0.5
    direction: np.ndarray = None
    depth: float = 1e-3
    kind = "tangent_disk_cusp"

    @property
    def inner_center(self):
        return self.center + (self.radius - self.inner_radius) * self.direction

    @property
    def tip(self):
        return self.center + self.radius * self.direction

    @property
    def cusp_coefficient(self):
        """``a`` with ``d_D ~ a s^2`` on the horn midline at tip distance ``s``."""
        return 0.25 * (1.0 / self.inner_radius - 1.0 / self.radius)

    def _inside(self, X):
        return (_norm(X - self.center) < self.radius) & (_norm(X - self.inner_center) > self.inner_radius)

    def boundary_distance(self, x):
        X, _ = as_points(x, self.n)
        return np.minimum(np.abs(self.radius - _norm(X - self.center)),
                          np.abs(_norm(X - self.inner_center) - self.inner_radius))

    def _segments_inside(self, U, V):
        ok = (_norm(U - self.center) < self.radius) & (_norm(V - self.center) < self.radius)
        return ok & (_segments_point_distance(U, V, self.inner_center) > self.inner_radius)

    def feature_size(self, x):
        """Crescent width at the angular position of ``x`` seen from ``center``.

        Infinite closer to the tip than ``depth / 2`` so refinement stops there.
        """
        X, single = as_points(x, self.n)
        v = X - self.center
        nv = _norm(v)
        u = np.where(nv[:, None] > 0, v / np.maximum(nv, 1e-300)[:, None], -self.direction)
        a = self.center + self.radius * u
        w = _norm(a - self.inner_center) - self.inner_radius
        cosang = np.clip(u @ self.direction, -1.0, 1.0)
        s = self.radius * np.arccos(cosang)
        w = np.where(s < 0.5 * self.depth, np.inf, np.maximum(w, 0.0))
        return float(w[0]) if single else w

    @property
    def scale(self):
        return self.radius

    def bounding_box(self):
        return self.center - self.radius, self.center + self.radius

    def _pieces(self):
        th = math.atan2(self.direction[1], self.direction[0])
        out = []
        for c, r in ((self.center, self.radius), (self.inner_center, self.inner_radius)):
            kappa = 0.5 * self.cusp_coefficient
            for sweep in (math.pi, -math.pi):
                out.append((_Arc(tuple(c), r, th, sweep), (kappa, self.depth)))
        return out

    def horn_point(self, s, side=1):
        """Midpoint of the horn cross-section at arc distance ``s`` from the tip."""
        th = math.atan2(self.direction[1], self.direction[0]) + side * s / self.radius
        a = self.center + self.radius * np.array([math.cos(th), math.sin(th)])
        v = a - self.inner_center
        b = self.inner_center + self.inner_radius * v / np.linalg.norm(v)
        return 0.5 * (a + b)

    def body_point(self):
        """Midpoint of the widest cross-section, opposite the tip."""
        a = self.center - self.radius * self.direction
        b = self.inner_center - self.inner_radius * self.direction
        return 0.5 * (a + b)

    def to_dict(self):
        return {"kind": self.kind, "n": 2, "center": self.center.tolist(), "radius": self.radius,
                "inner_radius": self.inner_radius, "direction": self.direction.tolist(),
                "depth": self.depth}


@dataclass(frozen=True, eq=False, repr=False)
class PuncturedDisk(Domain):
    """Disk minus one point; ``radius = inf`` is the punctured plane."""

    center: np.ndarray = None
    radius: float = 1.0
    puncture: np.ndarray = None
    kind = "punctured_disk"

    def __post_init__(self):
        if math.isinf(self.radius):
            object.__setattr__(self, "bounded", False)
            # complement is a single point, which lies in a hyperplane
            object.__setattr__(self, "apollonian", False)

    @property
    def inner_metric_degenerate(self):
        # complement {p} sits in an (n-2)-plane when n = 2
        return not self.bounded

    def _inside(self, X):
        ok = np.any(X != self.puncture, axis=1)
        if self.bounded:
            ok &= _norm(X - self.center) < self.radius
        return ok

    def boundary_distance(self, x):
        X, _ = as_points(x, self.n)
        d = _norm(X - self.puncture)
        if self.bounded:
            d = np.minimum(d, np.abs(self.radius - _norm(X - self.center)))
        return d

    def _segments_inside(self, U, V):
        ok = _segments_point_distance(U, V, self.puncture) > 0
        if self.bounded:
            ok &= (_norm(U - self.center) < self.radius) & (_norm(V - self.center) < self.radius)
        return ok

    @property
    def scale(self):
        return self.radius if self.bounded else 1.0

    def bounding_box(self):
        if not self.bounded:
            raise DomainError("punctured plane is unbounded; pass an explicit window")
        return self.center - self.radius, self.center + self.radius

    def sample_box(self):
        if self.bounded:
            return self.bounding_box()
        return self.puncture - 2.0, self.puncture + 2.0

    def boundary_samples(self, m=10_000):
        if m < 1:
            raise DomainError("boundary_samples needs m >= 1")
        if not self.bounded:
            return BoundaryAtlas(self.puncture[None, :].copy(), np.zeros(1), True,
                                 self.puncture.copy(), math.inf)
        atlas = Ball(2, center=self.center, radius=self.radius).boundary_samples(m - 1)
        return BoundaryAtlas(np.vstack([atlas.points, self.puncture]), np.append(atlas.radii, 0.0))

    def to_dict(self):
        return {"kind": self.kind, "n": 2, "center": self.center.tolist(),
                "radius": self.radius if self.bounded else "inf", "puncture": self.puncture.tolist()}


# ---------------------------------------------------------------------------
# construction
# ---------------------------------------------------------------------------

def _convex_ccw(V):
    if V.ndim != 2 or V.shape[1] != 2 or len(V) < 3:
        raise DomainError("polygon needs at least 3 vertices in the plane")
    e = np.roll(V, -1, axis=0) - V
    if np.any(_norm(e) == 0):
        raise DomainError("polygon has repeated vertices")
    turn = _cross2(e, np.roll(e, -1, axis=0))
    if not (np.all(turn > 0) or np.all(turn < 0)):
        raise DomainError("polygon not convex")
    if turn[0] < 0:
        V = V[::-1].copy()
        e = np.roll(V, -1, axis=0) - V
    ang = np.arctan2(_cross2(e, np.roll(e, -1, axis=0)), np.einsum("ij,ij->i", e, np.roll(e, -1, axis=0)))
    if not math.isclose(ang.sum(), 2 * math.pi, rel_tol=1e-9):
        raise DomainError("polygon not convex (self-intersecting)")
    return V


def make_domain(spec=None, **kwargs):
    """Build a domain from a dict such as ``{"kind": "ball", "n": 2, "radius": 1}``.

    Keyword arguments are merged into ``spec``.  Missing parameters take the
    defaults of the unit examples (unit disk, upper half-plane, the unit disk
    slit along [0, 1) x {0}, ...).
    """
    spec = dict(spec or {}, **kwargs)
    kind = spec.pop("kind", None)
    if kind not in KINDS:
        raise DomainError(f"unknown domain kind {kind!r}; expected one of {', '.join(KINDS)}")
    n = int(spec.pop("n", 2))
    if n < 2:
        raise DomainError("dimension n must be at least 2")
    if kind not in ("ball", "half_space") and n != 2:
        raise DomainError(f"{kind} is only defined for n = 2")

    if kind == "ball":
        c = _vec(spec.pop("center", np.zeros(n)), "center", n)
        d = Ball(n, center=c, radius=_positive(spec.pop("radius", 1.0), "radius"))
    elif kind == "half_space":
        nu = _vec(spec.pop("normal", np.eye(n)[-1]), "normal", n)
        if np.linalg.norm(nu) == 0:
            raise DomainError("normal must be nonzero")
        length = np.linalg.norm(nu)
        off = float(spec.pop("offset", 0.0)) / length
        d = HalfSpace(n, normal=nu / length, offset=off,
                      length_scale=_positive(spec.pop("scale", 1.0), "scale"))
    elif kind == "convex_polygon":
        V = np.asarray(spec.pop("vertices", [[-1, -1], [1, -1], [1, 1], [-1, 1]]), float)
        d = ConvexPolygon(2, vertices=_convex_ccw(V))
    elif kind == "slit_disk":
        c = _vec(spec.pop("center", [0.0, 0.0]), "center", 2)
        R = _positive(spec.pop("radius", 1.0), "radius")
        S = np.asarray(spec.pop("slit", [[0.0, 0.0], [1.0, 0.0]]), float)
        if S.shape != (2, 2) or np.allclose(S[0], S[1]):
            raise DomainError("slit must be two distinct points")
        r = _norm(S - c)
        if np.any(r > R * (1 + 1e-12)) or np.all(r >= R):
            raise DomainError("slit must lie inside the disk")
        d = SlitDisk(2, center=c, radius=R, slit=S)
    elif kind == "tangent_disk_cusp":
        c = _vec(spec.pop("center", [0.0, 0.0]), "center", 2)
        R = _positive(spec.pop("radius", 1.0), "radius")
        r = _positive(spec.pop("inner_radius", 0.5 * R), "inner_radius")
        if r >= R:
            raise DomainError("inner_radius must be smaller than radius")
        u = _vec(spec.pop("direction", [1.0, 0.0]), "direction", 2)
        if np.linalg.norm(u) == 0:
            raise DomainError("direction must be nonzero")
        depth = _positive(spec.pop("depth", 1e-3 * R), "depth")
        d = TangentDiskCusp(2, center=c, radius=R, inner_radius=r,
                            direction=u / np.linalg.norm(u), depth=depth)
    else:
        c = _vec(spec.pop("center", [0.0, 0.0]), "center", 2)
        R = spec.pop("radius", 1.0)
        R = math.inf if R in ("inf", None) else _positive(R, "radius")
        p = _vec(spec.pop("puncture", c), "puncture", 2)
        if np.isfinite(R) and np.linalg.norm(p - c) >= R:
            raise DomainError("puncture must lie inside the disk")
        d = PuncturedDisk(2, center=c, radius=R, puncture=p)
    if spec:
        raise DomainError(f"unexpected parameters for {kind}: {', '.join(sorted(spec))}")
    return d


def load_domain(path):
    """Read a JSON domain spec file."""
    try:
        spec = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DomainError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(spec, dict):
        raise DomainError(f"{path}: domain spec must be a JSON object")
    return make_domain(spec)
