"""Path metrics on grid graphs.

A :class:`GridGraph` discretises a domain by lattice nodes joined by short
straight edges that are certified to lie in the domain.  Shortest paths in
the graph give the quasihyperbolic metric ``k_D``, the inner length metric
``lambda_D`` and the Apollonian inner metric ``alpha~_D``; a threshold search
on lens-shaped subgraphs brackets the inner diameter metric ``rho_D``.

Grids are uniform by default.  Passing ``h_min`` grades the lattice by
quadtree refinement wherever the domain's :meth:`feature_size` is small, which
is how cusps are followed far below the base spacing.
"""
from __future__ import annotations

import csv
import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra
from scipy.spatial import ConvexHull, QhullError, cKDTree

from .domain import BoundaryAtlas, DomainError, OutsideDomainError, as_points
from .metrics import MetricValue, apollonian, j_metric, one_point_sups

WEIGHT_KINDS = ("euclidean", "quasihyperbolic", "apollonian")

#: refined cells are about this fraction of the local feature size
REFINE_FRACTION = 0.25


class GridError(RuntimeError):
    """Numerical failure: coarse grid, disconnection or size guard."""


# ---------------------------------------------------------------------------
# polylines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Polyline:
    vertices: np.ndarray

    def __post_init__(self):
        v = np.atleast_2d(np.asarray(self.vertices, dtype=float))
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return len(self.vertices)

    @property
    def segment_lengths(self):
        return np.linalg.norm(np.diff(self.vertices, axis=0), axis=1)

    @property
    def length(self):
        return float(self.segment_lengths.sum())

    def arclength(self):
        """Cumulative Euclidean length at each vertex."""
        return np.concatenate([[0.0], np.cumsum(self.segment_lengths)])

    def validate(self, D):
        if not np.all(D.contains(self.vertices)):
            raise OutsideDomainError("polyline vertex outside domain")
        if len(self) > 1 and np.any(self.segment_lengths == 0):
            raise DomainError("polyline has repeated consecutive vertices")
        V = self.vertices
        if len(self) > 1 and not np.all(D.segments_inside(V[:-1], V[1:])):
            raise OutsideDomainError("polyline segment leaves the domain")
        return self

    def reversed(self):
        return Polyline(self.vertices[::-1].copy())

    def to_csv(self, path):
        n = self.vertices.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{i}" for i in range(n)])
            for v in self.vertices:
                w.writerow([repr(float(c)) for c in v])

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        return cls(np.array(rows[1:], dtype=float))


def path_diameter(gamma) -> float:
    V = gamma.vertices if isinstance(gamma, Polyline) else np.atleast_2d(gamma)
    if len(V) < 2:
        return 0.0
    if len(V) > 400:
        try:
            V = V[ConvexHull(V).vertices]
        except QhullError:  # degenerate (collinear) input
            lo, hi = np.argmin(V[:, 0]), np.argmax(V[:, 0])
            V = V[np.unique(np.concatenate([[lo, hi], np.argmin(V, 0), np.argmax(V, 0)]))]
    best = 0.0
    for i in range(0, len(V), 512):
        blk = V[i:i + 512]
        d2 = np.einsum("ijk,ijk->ij", blk[:, None] - V[None], blk[:, None] - V[None])
        best = max(best, float(d2.max()))
    return math.sqrt(best)


def _extreme_points(P):
    """Points of ``P`` that include every farthest point from any query."""
    if len(P) <= P.shape[1] + 1:
        return P
    try:
        return P[ConvexHull(P).vertices]
    except QhullError:
        # flat input: extremes along a fan of directions cover it exactly
        c = P - P.mean(0)
        _, _, Vt = np.linalg.svd(c, full_matrices=False)
        proj = c @ Vt.T
        idx = np.unique(np.concatenate([np.argmin(proj, 0), np.argmax(proj, 0)]))
        return P[idx]


def prefix_diameters(V, block=256):
    """``diam(V[:k+1])`` for every ``k``.

    Blockwise: the farthest earlier point from ``V[k]`` is either in the
    current block or a hull vertex of everything before it.
    """
    V = np.atleast_2d(V)
    out = np.zeros(len(V))
    hull = V[:0]
    cur = 0.0
    for s in range(0, len(V), block):
        B = V[s:s + block]
        far = np.zeros(len(B))
        if len(hull):
            far = np.sqrt(np.max(np.sum((B[:, None] - hull[None]) ** 2, axis=2), axis=1))
        D = np.sqrt(np.sum((B[:, None] - B[None]) ** 2, axis=2))
        D = np.where(np.tri(len(B), dtype=bool), D, 0.0)
        far = np.maximum(far, D.max(axis=1))
        out[s:s + len(B)] = np.maximum.accumulate(np.maximum(far, cur))
        cur = out[s + len(B) - 1]
        hull = _extreme_points(np.vstack([hull, B]))
    return out


def shortcut(D, gamma, window=256):
    """Greedy string pulling: replace runs of vertices by straight segments in ``D``.

    The diameter never increases, since every new point lies in the convex
    hull of the old vertices.
    """
    V = gamma.vertices
    if len(V) <= 2:
        return gamma
    keep = [0]
    i = 0
    while i < len(V) - 1:
        hi = min(len(V), i + 1 + window)
        cand = np.arange(i + 1, hi)
        ok = D.segments_inside(np.repeat(V[i][None], len(cand), 0), V[cand])
        j = int(cand[np.nonzero(ok)[0].max()]) if ok.any() else i + 1
        keep.append(j)
        i = j
    return Polyline(V[keep])


# ---------------------------------------------------------------------------
# quasihyperbolic segment integrals
# ---------------------------------------------------------------------------

def qh_segments(D, U, V, dU=None, dV=None, max_sub=16):
    """``int_[u,v] |dz| / d_D(z)`` by composite Simpson, per segment.

    The number of panels grows with ``|u - v| / min(d(u), d(v))`` up to
    ``max_sub``; segments are assumed to lie in ``D``.
    """
    U = np.atleast_2d(U)
    V = np.atleast_2d(V)
    if dU is None:
        dU = D.boundary_distance(U)
    if dV is None:
        dV = D.boundary_distance(V)
    L = np.linalg.norm(V - U, axis=1)
    panels = np.clip(np.ceil(2.0 * L / np.minimum(dU, dV)), 1, max_sub).astype(int)
    out = np.empty(len(U))
    for p in np.unique(panels):
        sel = np.nonzero(panels == p)[0]
        t = np.linspace(0.0, 1.0, 2 * p + 1)
        w = np.ones(2 * p + 1)
        w[1:-1:2] = 4.0
        w[2:-1:2] = 2.0
        w /= 6.0 * p
        for c in range(0, len(sel), max(1, 200_000 // (2 * p + 1))):
            s = sel[c:c + max(1, 200_000 // (2 * p + 1))]
            P = U[s, None, :] + t[None, :, None] * (V[s] - U[s])[:, None, :]
            d = D.boundary_distance(P.reshape(-1, P.shape[-1])).reshape(len(s), -1)
            d[:, 0] = dU[s]
            d[:, -1] = dV[s]
            out[s] = L[s] * ((1.0 / d) @ w)
    return out


def qh_segment(D, u, v):
    """Adaptive quadrature of ``|dz| / d_D(z)`` over one segment in ``D``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    L = float(np.linalg.norm(v - u))
    if L == 0.0:
        return 0.0
    # the tolerances sit near double precision; roundoff notices are expected
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(lambda t: 1.0 / D.boundary_distance(u + t * (v - u))[0], 0.0, 1.0,
                      limit=200, epsabs=1e-14, epsrel=1e-12)
    return L * val


# ---------------------------------------------------------------------------
# Apollonian edge weights
# ---------------------------------------------------------------------------

class _AtlasPyramid:
    """Voxel-thinned copies of an atlas at halving resolutions.

    Level ``l`` keeps one atlas point per cube of side ``spacings[l]``.  A
    small uniform subsample (``globe``) is kept for far-field safety.
    """

    def __init__(self, atlas: BoundaryAtlas, globe_size=64):
        self.atlas = atlas
        P = atlas.points
        self.globe = atlas.subsample(min(globe_size, len(atlas))).points if len(atlas) else P
        self.spacings, self.levels = [], []
        if len(P) == 0:
            return
        s = float(np.max(P.max(0) - P.min(0))) or 1.0
        finest = max(float(atlas.radii.min()), 1e-300)
        lo = P.min(0)
        while True:
            keys = np.floor((P - lo) / s).astype(np.int64)
            span = keys.max(0) + 1
            if np.prod(span.astype(float)) < 2**62:
                flat = np.ravel_multi_index(keys.T, span)
                _, idx = np.unique(flat, return_index=True)
            else:
                _, idx = np.unique(keys, axis=0, return_index=True)
            pts = P[np.sort(idx)]
            self.spacings.append(s)
            self.levels.append((pts, cKDTree(pts)))
            if len(idx) == len(P) or s < finest or len(self.levels) > 80:
                break
            s /= 2.0

    def level_for(self, d, resolve):
        sp = np.asarray(self.spacings)
        # first level whose spacing is below d / resolve
        lvl = np.searchsorted(-sp, -(d / resolve), side="left")
        return np.minimum(lvl, len(sp) - 1)


def _edge_sups(A, U, V, owner):
    """Both one-point sups of ``log(|a-u|/|a-v|)`` grouped by edge.

    ``A[k]`` is a candidate boundary point for edge ``owner[k]`` (sorted).
    """
    au = A - U[owner]
    av = A - V[owner]
    f = 0.5 * np.log(np.einsum("ij,ij->i", au, au) / np.einsum("ij,ij->i", av, av))
    starts = np.flatnonzero(np.r_[True, owner[1:] != owner[:-1]])
    return np.maximum.reduceat(f, starts), np.maximum.reduceat(-f, starts), owner[starts]


def _flatten(lists):
    counts = np.fromiter((len(x) for x in lists), np.intp, len(lists))
    flat = np.fromiter(itertools.chain.from_iterable(lists), np.intp, int(counts.sum()))
    return flat, counts


def alpha_segments(U, V, dmin, pyramid: _AtlasPyramid, anchor=None, near_factor=4.0,
                   resolve=4.0):
    """Apollonian distance for many short segments ``[U_i, V_i]``.

    For a segment at distance ``d`` from the boundary only atlas points
    within ``near_factor * d`` can realise the supremum (farther points
    contribute at most about ``|u - v| / (near_factor * d)``), and there a
    spacing of ``d / resolve`` suffices.  Each segment therefore looks at a
    bounded number of points from the matching pyramid level, plus a small
    global subsample.  ``anchor = (P, d, reach, owner)`` lets segments share
    the candidate list of a common anchor point ``P[owner[i]]``.
    """
    m = len(U)
    s1 = np.zeros(m) if pyramid.atlas.includes_infinity else np.full(m, -np.inf)
    s2 = s1.copy()

    def absorb(A, e, owner):
        a, b, o = _edge_sups(A, U[e], V[e], owner)
        s1[e[o]] = np.maximum(s1[e[o]], a)
        s2[e[o]] = np.maximum(s2[e[o]], b)

    Gp = pyramid.globe
    if len(Gp):
        for c in range(0, m, 50_000):
            e = np.arange(c, min(m, c + 50_000))
            absorb(np.tile(Gp, (len(e), 1)), e, np.repeat(np.arange(len(e)), len(Gp)))
    if not pyramid.levels:
        return np.maximum(s1 + s2, 0.0)
    if anchor is None:
        seglen = np.linalg.norm(V - U, axis=1)
        P, dA, reach, owner = 0.5 * (U + V), dmin, seglen, np.arange(m)
    else:
        P, dA, reach, owner = anchor
    lvl = pyramid.level_for(dA, resolve)
    order = np.argsort(owner, kind="stable")
    for L in np.unique(lvl):
        pts, tree = pyramid.levels[L]
        anchors = np.nonzero(lvl == L)[0]
        for c in range(0, len(anchors), 20_000):
            ak = anchors[c:c + 20_000]
            lists = tree.query_ball_point(P[ak], near_factor * dA[ak] + reach[ak])
            flat, counts = _flatten(lists)
            if not counts.any():
                continue
            starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
            # segments owned by these anchors
            lo = np.searchsorted(owner[order], ak, side="left")
            hi = np.searchsorted(owner[order], ak, side="right")
            nseg = hi - lo
            e = order[np.repeat(lo, nseg) + _ranges(nseg)]
            k = np.repeat(np.arange(len(ak)), nseg)
            keep = counts[k] > 0
            e, k = e[keep], k[keep]
            for c2 in range(0, len(e), max(1, 4_000_000 // max(1, int(counts.max())))):
                ee = e[c2:c2 + 4_000_000 // max(1, int(counts.max()))]
                kk = k[c2:c2 + len(ee)]
                cnt = counts[kk]
                cand = flat[np.repeat(starts[kk], cnt) + _ranges(cnt)]
                absorb(pts[cand], ee, np.repeat(np.arange(len(ee)), cnt))
    return np.maximum(s1 + s2, 0.0)


def _ranges(counts):
    """Concatenation of ``arange(c)`` for every ``c`` in ``counts``."""
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, np.intp)
    ends = np.cumsum(counts)
    return np.arange(total) - np.repeat(ends - counts, counts)


# ---------------------------------------------------------------------------
# grid graph
# ---------------------------------------------------------------------------

def stencil_radius(stencil, n):
    """Neighbour radius in cell units: 1 gives the 8/26-neighbour stencil."""
    if stencil == 1:
        return math.sqrt(n)
    return math.sqrt(stencil**2 + (n - 1) * (stencil - 1) ** 2)


@dataclass(eq=False)
class GridGraph:
    domain: object
    h: float
    nodes: np.ndarray
    sizes: np.ndarray
    dist: np.ndarray
    edges: np.ndarray  # (E, 2), i < j
    lengths: np.ndarray
    stencil: int = 1
    window: tuple = None
    _weights: dict = field(default_factory=dict, repr=False)
    _tree: object = field(default=None, repr=False)

    def __repr__(self):
        return (f"GridGraph(h={self.h:g}, nodes={len(self)}, edges={self.n_edges}, "
                f"stencil={self.stencil}, domain={self.domain.kind})")

    def __len__(self):
        return len(self.nodes)

    @property
    def n_edges(self):
        return len(self.edges)

    @property
    def tree(self):
        if self._tree is None:
            self._tree = cKDTree(self.nodes)
        return self._tree

    @property
    def reach(self):
        return stencil_radius(self.stencil, self.nodes.shape[1])

    def weights(self, kind, atlas=None):
        """Per-edge weights for ``kind``, cached."""
        if kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {kind!r}")
        key = kind if kind != "apollonian" else (kind, id(atlas))
        if key in self._weights:
            return self._weights[key][0]
        U = self.nodes[self.edges[:, 0]]
        V = self.nodes[self.edges[:, 1]]
        dU = self.dist[self.edges[:, 0]]
        dV = self.dist[self.edges[:, 1]]
        if kind == "euclidean":
            w = self.lengths
        elif kind == "quasihyperbolic":
            w = qh_segments(self.domain, U, V, dU, dV)
        else:
            if atlas is None:
                raise ValueError("apollonian weights need a boundary atlas")
            i, j = self.edges.T
            own = np.where(dU <= dV, i, j)
            reach = np.full(len(self), self.reach) * self.sizes * (1 + 1e-9)
            w = alpha_segments(U, V, np.minimum(dU, dV), self.pyramid(atlas),
                               anchor=(self.nodes, self.dist, reach, own))
        # keep a reference to the atlas so its id stays unique
        self._weights[key] = (w, atlas)
        return w

    def pyramid(self, atlas):
        key = ("pyramid", id(atlas))
        if key not in self._weights:
            self._weights[key] = (_AtlasPyramid(atlas), atlas)
        return self._weights[key][0]


def default_window(D, points=(), pad=0.0):
    """Bounding box of a bounded domain; for unbounded ones a box around ``points``."""
    if D.bounded:
        lo, hi = D.bounding_box()
        return np.asarray(lo, float) - pad, np.asarray(hi, float) + pad
    P = np.atleast_2d(np.asarray(points, float)) if len(points) else None
    lo, hi = D.sample_box()
    if P is not None and len(P):
        lo = np.minimum(lo, P.min(0))
        hi = np.maximum(hi, P.max(0))
    span = float(np.max(hi - lo))
    return lo - 0.5 * span, hi + 0.5 * span


def _lattice(lo, hi, h, max_nodes):
    ranges = [np.arange(math.ceil(a / h), math.floor(b / h) + 1) for a, b in zip(lo, hi)]
    total = math.prod(len(r) for r in ranges)
    if total > 4 * max_nodes:
        raise GridError(f"build_grid: memory guard exceeded ({total} lattice points > cap)")
    if total == 0:
        raise GridError("build_grid: grid too coarse (window holds no lattice point)")
    mesh = np.meshgrid(*ranges, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1) * h


def _graded_cells(D, lo, hi, h, h_min, refine_window, max_nodes):
    n = len(lo)
    C = _lattice(lo - h, hi + h, h, max_nodes)
    sig = h
    leaves, leaf_size = [], []
    offsets = (np.array(list(np.ndindex(*([2] * n)))) - 0.5) * 0.5
    corners = np.vstack([np.zeros(n), 2.0 * offsets])
    while len(C):
        inside = D.contains(C)
        bd = D.boundary_distance(C)
        half_diag = 0.5 * sig * math.sqrt(n)
        alive = inside | (bd <= half_diag)
        # smallest feature over the centre and corners of each cell
        probe = (C[:, None, :] + sig * corners[None]).reshape(-1, n)
        feat = D.feature_size(probe).reshape(len(C), -1).min(axis=1)
        target = np.clip(REFINE_FRACTION * feat, h_min, h)
        if refine_window is not None:
            rl, rh = refine_window
            inwin = np.all((C >= rl) & (C <= rh), axis=1)
            target = np.where(inwin, target, h)
        split = alive & (sig > target * (1 + 1e-9)) & (sig / 2 >= h_min * (1 - 1e-9))
        keep = alive & ~split & inside & (bd > sig / 2)
        keep &= np.all((C >= lo) & (C <= hi), axis=1)
        leaves.append(C[keep])
        leaf_size.append(np.full(int(keep.sum()), sig))
        if sum(len(x) for x in leaves) > max_nodes:
            raise GridError("build_grid: memory guard exceeded (node count cap)")
        C = (C[split][:, None, :] + sig * offsets[None]).reshape(-1, n)
        sig /= 2
    return np.concatenate(leaves), np.concatenate(leaf_size)


def build_grid(D, h, window=None, *, h_min=None, refine_window=None, stencil=1,
               max_nodes=10_000_000) -> GridGraph:
    """Lattice graph of ``D`` with spacing ``h``.

    Nodes are lattice points ``x`` with ``d_D(x) > h/2``; edges join nodes at
    most ``stencil_radius * h`` apart whose connecting segment lies in ``D``
    (checked exactly against the boundary, so no edge tunnels through a slit).
    With ``h_min`` the lattice is refined down to ``h_min`` where the domain
    reports a small feature size.
    """
    if not h > 0:
        raise DomainError("grid spacing h must be positive")
    if window is None:
        window = default_window(D)
    lo, hi = (np.asarray(w, float) for w in window)
    if lo.shape != (D.n,) or hi.shape != (D.n,):
        raise DomainError("window corners must have the domain dimension")
    if h_min is None:
        X = _lattice(lo, hi, h, max_nodes)
        X = X[D.contains(X)]
        d = D.boundary_distance(X)
        X = X[d > h / 2]
        S = np.full(len(X), float(h))
    else:
        X, S = _graded_cells(D, lo, hi, float(h), float(h_min), refine_window, max_nodes)
    if len(X) == 0:
        raise GridError(f"build_grid: grid too coarse (no node with d_D > h/2 at h={h})")
    if len(X) > max_nodes:
        raise GridError(f"build_grid: memory guard exceeded ({len(X)} nodes > {max_nodes})")
    d = D.boundary_distance(X)
    r_s = stencil_radius(stencil, D.n) * (1 + 1e-9)
    tree = cKDTree(X)
    pairs = []
    for s in np.unique(S)[::-1]:
        a = np.nonzero(S == s)[0]
        b = np.nonzero(S <= s)[0]
        ta = cKDTree(X[a])
        tb = tree if len(b) == len(X) else cKDTree(X[b])
        M = ta.sparse_distance_matrix(tb, r_s * s, output_type="ndarray")
        i, j = a[M["i"]], b[M["j"]]
        sel = i != j
        pairs.append(np.stack([i[sel], j[sel]], axis=1))
    E = np.concatenate(pairs) if pairs else np.zeros((0, 2), int)
    E = np.unique(np.sort(E, axis=1), axis=0)
    ok = D.segments_inside(X[E[:, 0]], X[E[:, 1]])
    E = E[ok]
    lengths = np.linalg.norm(X[E[:, 1]] - X[E[:, 0]], axis=1)
    G = GridGraph(D, float(h), X, S, d, E, lengths, stencil, (lo, hi))
    G._tree = tree
    return G


# ---------------------------------------------------------------------------
# queries
# ---------------------------------------------------------------------------

def _attach(G, q, grow=4):
    """Indices of graph nodes joined to the free point ``q`` by a segment in D."""
    D = G.domain
    _, k = G.tree.query(q)
    r = G.reach * G.sizes[k] * 1.5
    for _ in range(grow):
        cand = np.asarray(G.tree.query_ball_point(q, r), int)
        if len(cand):
            ok = D.segments_inside(np.repeat(q[None], len(cand), 0), G.nodes[cand])
            if ok.any():
                return cand[ok]
        r *= 2
    return np.zeros(0, int)


@dataclass
class _Query:
    """A grid graph augmented with two free query points (indices N, N+1)."""

    G: GridGraph
    x: np.ndarray
    y: np.ndarray
    edges: np.ndarray
    lengths: np.ndarray

    @property
    def points(self):
        return np.vstack([self.G.nodes, self.x, self.y])

    @property
    def ix(self):
        return len(self.G)

    @property
    def iy(self):
        return len(self.G) + 1


def _query(G, x, y):
    key = ("query", x.tobytes(), y.tobytes())
    hit = G._weights.get("last_query")
    if hit is not None and hit[0] == key:
        return hit[1]
    Q = _build_query(G, x, y)
    G._weights["last_query"] = (key, Q)
    return Q


def _build_query(G, x, y):
    D = G.domain
    N = len(G)
    extra = []
    for idx, q in ((N, x), (N + 1, y)):
        nb = _attach(G, q)
        if len(nb) == 0:
            raise GridError("shortest_path: points not connected at this resolution "
                            f"(no grid node visible from {q.tolist()})")
        extra.append(np.stack([np.full(len(nb), idx), nb], axis=1))
    if D.segments_inside(x[None], y[None])[0] and \
            np.linalg.norm(x - y) <= G.reach * 1.5 * G.sizes[G.tree.query(x)[1]]:
        extra.append(np.array([[N, N + 1]]))
    E_new = np.concatenate(extra)
    P = np.vstack([G.nodes, x, y])
    L_new = np.linalg.norm(P[E_new[:, 1]] - P[E_new[:, 0]], axis=1)
    return _Query(G, x, y, E_new, L_new)


QUERY_PANELS = 256


def _query_weights(Q, kind, atlas):
    G = Q.G
    D = G.domain
    base = G.weights(kind, atlas)
    P = Q.points
    U, V = P[Q.edges[:, 0]], P[Q.edges[:, 1]]
    if kind == "euclidean":
        extra = Q.lengths
    elif kind == "quasihyperbolic":
        dU, dV = D.boundary_distance(U), D.boundary_distance(V)
        extra = qh_segments(D, U, V, dU, dV, max_sub=QUERY_PANELS)
        # attachments much longer than the local distance get adaptive quadrature
        steep = np.nonzero(2.0 * Q.lengths > QUERY_PANELS * np.minimum(dU, dV))[0]
        for i in steep:
            extra[i] = qh_segment(D, U[i], V[i])
    else:
        # same near-field rule as the grid edges
        dmin = np.minimum(D.boundary_distance(U), D.boundary_distance(V))
        extra = alpha_segments(U, V, dmin, G.pyramid(atlas))
    return base, extra


def _base_csr(G, base):
    """Symmetric CSR of the grid weights with one empty row reserved for ``x``."""
    key = ("csr", id(base))
    hit = G._weights.get(key)
    if hit is not None and hit[0] is base:
        return hit[1]
    N = len(G)
    E = G.edges
    data = np.maximum(np.concatenate([base, base]), 1e-300)
    M = coo_matrix((data, (np.r_[E[:, 0], E[:, 1]], np.r_[E[:, 1], E[:, 0]])),
                   shape=(N + 1, N + 1)).tocsr()
    M.sort_indices()
    G._weights[key] = (base, M)
    return M


def _solve(Q, base, extra, edge_mask=None, limit=np.inf):
    G = Q.G
    N = len(G) + 2
    if edge_mask is not None:
        E, base = G.edges[edge_mask], base[edge_mask]
        rows = np.concatenate([E[:, 0], Q.edges[:, 0]])
        cols = np.concatenate([E[:, 1], Q.edges[:, 1]])
        # zero weights would be dropped by the sparse format
        data = np.maximum(np.concatenate([base, extra]), 1e-300)
        M = coo_matrix((data, (rows, cols)), shape=(N, N)).tocsr()
        return dijkstra(M, directed=False, indices=Q.ix, return_predecessors=True, limit=limit)
    # x gets its own row in the cached matrix; y is finished off its attachment edges
    B = _base_csr(G, base)
    qe = Q.edges
    from_x = (qe[:, 0] == Q.ix) & (qe[:, 1] < Q.ix)
    to_y = (qe[:, 0] == Q.iy) & (qe[:, 1] < Q.ix)
    direct = (qe[:, 0] == Q.ix) & (qe[:, 1] == Q.iy)
    order = np.argsort(qe[from_x, 1], kind="stable")
    indices = np.concatenate([B.indices, qe[from_x, 1][order]]).astype(B.indices.dtype)
    data = np.concatenate([B.data, np.maximum(extra[from_x][order], 1e-300)])
    indptr = B.indptr.copy()
    indptr[-1] = len(indices)
    M = csr_matrix((data, indices, indptr), shape=B.shape)
    d, p = dijkstra(M, directed=True, indices=Q.ix, return_predecessors=True, limit=limit)
    cand = d[qe[to_y, 1]] + extra[to_y]
    src = qe[to_y, 1]
    if direct.any():
        cand = np.r_[cand, extra[direct]]
        src = np.r_[src, Q.ix]
    best = int(np.argmin(cand)) if len(cand) else -1
    dy = float(cand[best]) if best >= 0 else np.inf
    py = int(src[best]) if np.isfinite(dy) else -9999
    return np.r_[d, dy], np.r_[p, py]


def _trace(pred, src, dst):
    path = [dst]
    while path[-1] != src:
        p = pred[path[-1]]
        if p < 0:
            raise GridError("shortest_path: points not connected at this resolution")
        path.append(p)
    return path[::-1]


def shortest_path(G, D, x, y, w="quasihyperbolic", atlas=None, limit=None, straight=True):
    """Weighted graph geodesic between ``x`` and ``y``.

    Returns ``(MetricValue, Polyline)``.  ``value`` is the graph distance,
    which over-approximates the infimum over all paths; ``lower`` is the
    pointwise minorant (|x-y| for length, j for k, alpha for alpha~).
    ``limit`` is an optional guess of an upper bound that prunes the search.
    When the segment ``[x, y]`` lies in ``D`` it is also a candidate path,
    unless ``straight`` is false (grid-only estimate).
    """
    if w not in WEIGHT_KINDS:
        raise ValueError(f"unknown weight kind {w!r}")
    if D is not G.domain:
        raise DomainError("grid was built for a different domain")
    X, _ = as_points([x, y], D.n)
    if not np.all(D.contains(X)):
        raise OutsideDomainError("point outside domain")
    x, y = X
    if w == "apollonian" and atlas is None:
        raise ValueError("apollonian shortest paths need a boundary atlas")
    if np.array_equal(x, y):
        return MetricValue(0.0, 0.0, 0.0, True), Polyline(x[None])
    visible = bool(D.segments_inside(x[None], y[None])[0])
    seg = math.inf
    if visible and w == "euclidean" and straight:
        # the segment is the shortest path
        gap = float(np.linalg.norm(x - y))
        return MetricValue.exactly(gap), Polyline(np.stack([x, y]))
    if visible and w == "quasihyperbolic" and straight:
        seg = qh_segment(D, x, y)
    Q = _query(G, x, y)
    base, extra = _query_weights(Q, w, atlas)
    # a known upper bound prunes the search; rerun in full if it was too tight
    bound = min(seg, limit if limit is not None else math.inf) * (1 + 1e-9)
    dist, pred = _solve(Q, base, extra, limit=bound)
    if not np.isfinite(dist[Q.iy]) and np.isfinite(bound) and not np.isfinite(seg):
        dist, pred = _solve(Q, base, extra)
    if np.isfinite(dist[Q.iy]):
        path = Polyline(Q.points[_trace(pred, Q.ix, Q.iy)])
        value = float(dist[Q.iy])
    elif np.isfinite(seg):
        path, value = None, math.inf
    else:
        raise GridError("shortest_path: points not connected at this resolution")
    if w == "euclidean":
        lower = float(np.linalg.norm(x - y))
        if straight:
            path = shortcut(D, path)
            value = path.length
    elif w == "quasihyperbolic":
        lower = j_metric(D, x, y).value
        if seg <= value:
            value, path = seg, Polyline(np.stack([x, y]))
    else:
        lower = apollonian(D, x, y, atlas).lower
    return MetricValue(value, min(lower, value), value), path


def d_length(D, gamma, w="euclidean", atlas=None) -> float:
    """Sum of ``w``-distances between consecutive vertices of ``gamma``."""
    gamma = gamma if isinstance(gamma, Polyline) else Polyline(gamma)
    gamma.validate(D)
    if len(gamma) < 2:
        return 0.0
    U, V = gamma.vertices[:-1], gamma.vertices[1:]
    if w == "euclidean":
        return gamma.length
    if w == "quasihyperbolic":
        if not np.all(D.segments_inside(U, V)):
            raise OutsideDomainError("polyline segment leaves the domain")
        return float(sum(qh_segment(D, u, v) for u, v in zip(U, V)))
    if w == "apollonian":
        if atlas is None:
            raise ValueError("apollonian d-length needs a boundary atlas")
        return float(sum(apollonian(D, u, v, atlas).value for u, v in zip(U, V)))
    raise ValueError(f"unknown weight kind {w!r}")


def inner_diameter(D, x, y, G, tol=None):
    """Bracket the inner diameter ``rho_D(x, y)``.

    Any arc of diameter ``t`` from ``x`` to ``y`` lies in the lens
    ``B(x, t) & B(y, t)``, and a path in that lens has diameter at most ``2t``.
    Bisection on ``t`` finds the smallest lens in which the graph still
    connects the points; its witness path, straightened, gives the upper
    end.  Returns ``(MetricValue, Polyline)``.
    """
    X, _ = as_points([x, y], D.n)
    if not np.all(D.contains(X)):
        raise OutsideDomainError("point outside domain")
    x, y = X
    gap = float(np.linalg.norm(x - y))
    if gap == 0.0:
        return MetricValue(0.0, 0.0, 0.0, True), Polyline(x[None])
    if D.segments_inside(x[None], y[None])[0]:
        return MetricValue(gap, gap, gap, True), Polyline(X)
    h = G.h
    if tol is None:
        tol = 0.25 * h
    Q = _query(G, x, y)
    P = Q.points
    f = np.maximum(np.linalg.norm(P - x, axis=1), np.linalg.norm(P - y, axis=1))
    all_edges = np.vstack([G.edges, Q.edges])
    thr = np.maximum(f[all_edges[:, 0]], f[all_edges[:, 1]])
    nb = G.n_edges
    N = len(P)

    def connected(t):
        keep = thr <= t
        E = all_edges[keep]
        M = coo_matrix((np.ones(len(E)), (E[:, 0], E[:, 1])), shape=(N, N))
        _, lab = connected_components(M, directed=False)
        return lab[Q.ix] == lab[Q.iy]

    base = G.lengths
    dist, pred = _solve(Q, base, Q.lengths)
    if not np.isfinite(dist[Q.iy]):
        raise GridError("inner_diameter: points not connected at this resolution")
    first = Polyline(P[_trace(pred, Q.ix, Q.iy)])
    lo, hi = gap, float(f[_trace(pred, Q.ix, Q.iy)].max())
    if connected(lo):
        hi = lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if connected(mid):
            hi = mid
        else:
            lo = mid
    dist, pred = _solve(Q, base, Q.lengths, edge_mask=thr[:nb] <= hi)
    extra_ok = thr[nb:] <= hi
    if not extra_ok.all():
        # recompute with attachment edges restricted as well
        Q2 = _Query(G, x, y, Q.edges[extra_ok], Q.lengths[extra_ok])
        dist, pred = _solve(Q2, base, Q2.lengths, edge_mask=thr[:nb] <= hi)
    lens_path = Polyline(P[_trace(pred, Q.ix, Q.iy)])
    witnesses = [shortcut(D, lens_path), shortcut(D, first)]
    diams = [path_diameter(p) for p in witnesses]
    k = int(np.argmin(diams))
    upper = max(diams[k], gap)
    slack = math.sqrt(D.n) * h
    lower = min(max(gap, lo - slack), upper)
    return MetricValue(upper, lower, upper), witnesses[k]
