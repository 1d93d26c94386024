"""Domain constants, inequality checks and the dyadic chain diagnostic.

Every constant is estimated as a supremum of a ratio over a finite pair
sample, with quasihyperbolic geodesic witnesses as the candidate arcs.  The
estimates are therefore lower bounds on the best constants for the sample
and arc family used; a value above :data:`UNBOUNDED` is reported as "no finite
constant at this resolution".
"""
from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .domain import DomainError, OutsideDomainError, SlitDisk, TangentDiskCusp, as_points
from .metrics import MetricValue, PSEUDOMETRIC, apollonian, j_metric, j_prime, log_density_ratio
from .paths import (
    Polyline, inner_diameter, path_diameter, prefix_diameters, shortest_path,
)

UNBOUNDED = 1.0e3
NO_FINITE = "no finite constant at this resolution"
SKIPPED = "pseudometric: skipped"
POLICIES = ("uniform", "boundary", "adversarial")
CONSTANTS = ("c", "c_uniform", "c1", "c2", "c3", "nu2", "john", "K", "L", "mu3", "mu5")
ALPHA_CONSTANTS = ("c2", "K", "L", "mu3", "mu5")


def worker_count():
    """Thread cap from ``DOMAIN_METRICS_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("DOMAIN_METRICS_THREADS", "1")))
    except ValueError:
        return 1


def _map(fn, items):
    k = worker_count()
    if k == 1 or len(items) < 2:
        return [fn(it) for it in items]
    # results come back in input order whatever the scheduling
    with ThreadPoolExecutor(k) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# pair samples
# ---------------------------------------------------------------------------

@dataclass
class PairSample:
    pairs: np.ndarray  # (N, 2, n)
    policy: str = "uniform"

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=float).reshape(len(self.pairs), 2, -1)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __add__(self, other):
        pol = self.policy if self.policy == other.policy else f"{self.policy}+{other.policy}"
        return PairSample(np.concatenate([self.pairs, other.pairs]), pol)

    def validate(self, D):
        if len(self) and not np.all(D.contains(self.pairs.reshape(-1, self.pairs.shape[-1]))):
            raise OutsideDomainError("pair sample has a point outside the domain")
        return self


def uniform_pairs(D, count, rng, box=None):
    """Independent uniform points in ``D`` (in ``box`` for unbounded domains)."""
    P = D.sample_interior(rng, 2 * count, box=box)
    return PairSample(P.reshape(count, 2, D.n), "uniform")


def boundary_pairs(D, count, rng, box=None):
    """Pairs biased toward the boundary: candidates kept with weight ~ 1/d."""
    P = D.sample_interior(rng, 8 * count, box=box)
    w = 1.0 / D.boundary_distance(P)
    idx = rng.choice(len(P), size=2 * count, replace=False, p=w / w.sum())
    return PairSample(P[idx].reshape(count, 2, D.n), "boundary")


def adversarial_pairs(D, count=None, depth=None):
    """Pair sequences exhibiting the worst behaviour of a domain.

    Slit disk: points straddling the middle of the slit at heights
    ``eps = 1e-1 .. 1e-3``.  Cusp: a body point against horn points at tip
    distances ``1e-1 .. depth``.  Other kinds: the domain's reference point
    against points approaching the boundary.
    """
    if isinstance(D, SlitDisk):
        k = count or 5
        p, q = D.slit
        mid = 0.5 * (p + q)
        nu = D.straddle_normal()
        eps = np.geomspace(1e-1, 1e-3, k) * D.scale
        pairs = [(mid + e * nu, mid - e * nu) for e in eps]
    elif isinstance(D, TangentDiskCusp):
        depth = D.depth if depth is None else depth
        k = count or int(round(2 * math.log10(0.1 / depth))) + 1
        z1 = D.body_point()
        pairs = [(z1, D.horn_point(s)) for s in np.geomspace(0.1 * D.radius, depth, k)]
    else:
        k = count or 6
        lo, hi = D.sample_box()
        x = 0.5 * (lo + hi)
        if not D.contains(x):
            x = D.sample_interior(np.random.default_rng(0), 1)[0]
        # walk toward a boundary point along the first axis
        e = np.zeros(D.n)
        e[0] = 1.0
        t_max = _exit_time(D, x, e)
        t = t_max * (1.0 - np.geomspace(0.5, 1e-3, k))
        pairs = [(x, x + ti * e) for ti in t]
    return PairSample(np.array(pairs), "adversarial")


def _exit_time(D, x, e, t_hi=None):
    t_lo = 0.0
    t_hi = t_hi or 1e6 * D.scale
    if D.contains(x + t_hi * e):
        return t_hi
    for _ in range(200):
        mid = 0.5 * (t_lo + t_hi)
        if D.contains(x + mid * e) and D.segments_inside(x[None], (x + mid * e)[None])[0]:
            t_lo = mid
        else:
            t_hi = mid
    return t_lo


def make_sample(D, policy, count, seed=42, box=None):
    rng = np.random.default_rng(seed)
    if policy == "uniform":
        return uniform_pairs(D, count, rng, box)
    if policy == "boundary":
        return boundary_pairs(D, count, rng, box)
    if policy == "adversarial":
        return adversarial_pairs(D)
    raise ValueError(f"unknown pair policy {policy!r}; expected one of {POLICIES}")


# ---------------------------------------------------------------------------
# per-pair evaluation
# ---------------------------------------------------------------------------

@dataclass
class PairEval:
    x: np.ndarray
    y: np.ndarray
    j: MetricValue
    ldr: float
    alpha: MetricValue | None = None
    k: MetricValue | None = None
    lam: MetricValue | None = None
    alphatilde: MetricValue | None = None
    rho: MetricValue | None = None
    jprime: MetricValue | None = None
    k_path: Polyline | None = None
    rho_path: Polyline | None = None

    @property
    def gap(self):
        return float(np.linalg.norm(self.x - self.y))

    def row(self):
        def c(p):
            return ";".join(repr(float(v)) for v in p)

        def g(m, attr="value"):
            return "" if m is None else repr(float(getattr(m, attr)))

        return {"x": c(self.x), "y": c(self.y), "j": g(self.j),
                "jprime_lo": g(self.jprime, "lower"), "jprime_hi": g(self.jprime, "upper"),
                "alpha_lo": g(self.alpha, "lower"), "alpha_hi": g(self.alpha, "upper"),
                "k": g(self.k), "alphatilde": g(self.alphatilde), "lambda": g(self.lam),
                "rho_lo": g(self.rho, "lower"), "rho_hi": g(self.rho, "upper")}


CSV_COLUMNS = ("x", "y", "j", "jprime_lo", "jprime_hi", "alpha_lo", "alpha_hi", "k",
               "alphatilde", "lambda", "rho_lo", "rho_hi")


def evaluate_pair(D, G, atlas, x, y, alphatilde=True) -> PairEval:
    """All seven metrics for one pair, with brackets and witness paths."""
    X, _ = as_points([x, y], D.n)
    x, y = X
    ev = PairEval(x, y, j_metric(D, x, y), log_density_ratio(D, x, y))
    ev.alpha = apollonian(D, x, y, atlas)
    ev.k, ev.k_path = shortest_path(G, D, x, y, "quasihyperbolic")
    ev.lam, _ = shortest_path(G, D, x, y, "euclidean")
    if alphatilde:
        ev.alphatilde, _ = shortest_path(G, D, x, y, "apollonian", atlas,
                                         limit=2.5 * ev.k.value + 1.0)
    ev.rho, ev.rho_path = inner_diameter(D, x, y, G)
    ev.jprime = j_prime(D, x, y, ev.rho)
    return ev


def evaluate_sample(D, G, atlas, sample, alphatilde=True):
    return _map(lambda p: evaluate_pair(D, G, atlas, p[0], p[1], alphatilde), list(sample))


def pairs_csv(evals) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    w.writeheader()
    for ev in evals:
        w.writerow(ev.row())
    return buf.getvalue()


# ---------------------------------------------------------------------------
# arc ratios
# ---------------------------------------------------------------------------

def cigar_ratios(D, gamma: Polyline):
    """Length cigar, diameter cigar and the vertex where each peaks.

    ``max_w min(l(g[z1,w]), l(g[z2,w])) / d(w)`` and the same with diameters,
    over interior vertices ``w`` of the polyline.
    """
    V = gamma.vertices
    if len(V) < 3:
        return 0.0, 0.0
    d = D.boundary_distance(V[1:-1])
    s = gamma.arclength()
    lmin = np.minimum(s, s[-1] - s)[1:-1]
    fwd = prefix_diameters(V)
    bwd = prefix_diameters(V[::-1])[::-1]
    dmin = np.minimum(fwd, bwd)[1:-1]
    return float(np.max(lmin / d)), float(np.max(dmin / d))


@dataclass
class ConstantEntry:
    name: str
    estimate: float
    lower: float
    upper: float
    witness: tuple | None
    sample_size: int
    note: str | None = None

    @property
    def finite(self):
        return self.note is None

    def as_dict(self):
        out = {"name": self.name, "estimate": self.estimate, "lower": self.lower,
               "upper": self.upper, "sample_size": self.sample_size,
               "witness": None if self.witness is None else [list(map(float, p)) for p in self.witness]}
        if self.note:
            out["note"] = self.note
        return out


class _Sup:
    """Running supremum of a ratio with bracket and witness."""

    def __init__(self, name):
        self.name = name
        self.est, self.lo, self.hi = 1.0, 1.0, 1.0
        self.witness = None
        self.count = 0

    def add(self, value, lower, upper, pair):
        self.count += 1
        if not np.isfinite(value):
            return
        if value > self.est or self.witness is None and value >= self.est:
            self.est, self.witness = float(value), pair
        self.lo = max(self.lo, float(lower))
        self.hi = max(self.hi, float(upper))

    def entry(self, threshold=UNBOUNDED):
        # constants are at least 1; the estimate never drops below the floor
        note = NO_FINITE if self.est > threshold else None
        hi = max(self.hi, self.est)
        lo = min(self.lo, self.est)
        w = None if self.witness is None else (self.witness[0].copy(), self.witness[1].copy())
        return ConstantEntry(self.name, self.est, lo, hi, w, self.count, note)


def _ratio(num, den):
    """value, lower and upper of ``num / den`` from two MetricValues."""
    v = num.value / den.value if den.value > 0 else math.inf
    lo = num.lower / den.upper if den.upper > 0 else math.inf
    hi = num.upper / den.lower if den.lower > 0 else math.inf
    return v, min(lo, v), max(hi, v)


def _usable(ev, h, policy):
    if ev.gap == 0.0:
        return False
    # adversarial pairs are close in space but far apart inside D by design
    return policy == "adversarial" or ev.gap > 10.0 * h


def _resolved(D, atlas, ev, policy):
    """True when the atlas cell nearest each point is no wider than its distance to the boundary.

    Closer than that, the sampled alpha undershoots by a resolution artefact.
    """
    if policy == "adversarial" or len(atlas) == 0:
        return True
    P = np.stack([ev.x, ev.y])
    d = D.boundary_distance(P)
    i = np.argmin(np.linalg.norm(atlas.points[None] - P[:, None], axis=2), axis=1)
    return bool(np.all(d >= 2.0 * atlas.radii[i]))


@dataclass
class ConstantsReport:
    domain: dict
    policy: str
    sample_size: int
    h: float
    atlas_size: int
    entries: dict = field(default_factory=dict)
    inequalities: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    semantics: str = ("estimates are suprema over the sample with quasihyperbolic geodesics "
                      "as candidate arcs, hence lower bounds on the best constants")

    def __getitem__(self, name):
        return self.entries[name]

    def as_dict(self):
        return {"domain": self.domain, "policy": self.policy, "sample_size": self.sample_size,
                "h": self.h, "atlas_size": self.atlas_size, "semantics": self.semantics,
                "constants": {k: v.as_dict() for k, v in self.entries.items()},
                "inequalities": self.inequalities, "warnings": self.warnings}

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2)


def uniformity_constants(D, G, sample, evals=None, atlas=None):
    """Entries ``c`` (inner uniform), ``c_uniform`` and ``john``."""
    if evals is None:
        if atlas is None:
            atlas = D.boundary_samples(2000)
        evals = evaluate_sample(D, G, atlas, sample, alphatilde=False)
    sup_c, sup_u, sup_j = _Sup("c"), _Sup("c_uniform"), _Sup("john")
    for ev in evals:
        if not _usable(ev, G.h, sample.policy):
            continue
        lc, dc = cigar_ratios(D, ev.k_path)
        ell = ev.k_path.length
        pair = (ev.x, ev.y)
        turn_inner = ell / ev.lam.value
        turn_u = ell / ev.gap
        sup_c.add(max(lc, turn_inner), max(lc, ell / ev.lam.upper), max(lc, ell / ev.lam.lower), pair)
        sup_u.add(max(lc, turn_u), max(lc, turn_u), max(lc, turn_u), pair)
        sup_j.add(dc, dc, dc, pair)
    return {s.name: s.entry() for s in (sup_c, sup_u, sup_j)}


def diameter_uniformity(D, G, sample, evals=None, atlas=None):
    """Entries ``nu2`` (diameter cigar) and ``c3`` (diameter cigar and diam/rho)."""
    if evals is None:
        if atlas is None:
            atlas = D.boundary_samples(2000)
        evals = evaluate_sample(D, G, atlas, sample, alphatilde=False)
    sup_n, sup_c3 = _Sup("nu2"), _Sup("c3")
    for ev in evals:
        if not _usable(ev, G.h, sample.policy):
            continue
        _, dc = cigar_ratios(D, ev.k_path)
        diam = path_diameter(ev.k_path)
        pair = (ev.x, ev.y)
        sup_n.add(dc, dc, dc, pair)
        v = diam / ev.rho.value
        sup_c3.add(max(dc, v), max(dc, diam / ev.rho.upper), max(dc, diam / ev.rho.lower), pair)
    return {"nu2": sup_n.entry(), "c3": sup_c3.entry()}


def ratio_constants(D, G, atlas, sample, evals=None):
    """Entries ``c1`` = k/j', ``c2`` = alpha~/j', ``L`` = j/alpha, ``K`` = k/alpha, ``mu5`` = j'/alpha."""
    if evals is None:
        evals = evaluate_sample(D, G, atlas, sample, alphatilde=D.apollonian)
    sups = {n: _Sup(n) for n in ("c1", "c2", "L", "K", "mu5")}
    for ev in evals:
        if not _usable(ev, G.h, sample.policy):
            continue
        pair = (ev.x, ev.y)
        kv = MetricValue(ev.k.value, ev.k.lower, ev.k.value)
        sups["c1"].add(*_ratio(kv, ev.jprime), pair)
        if not D.apollonian:
            continue
        if ev.alphatilde is not None:
            sups["c2"].add(*_ratio(ev.alphatilde, ev.jprime), pair)
        # ratios over alpha need alpha resolved by the atlas at both points
        if not _resolved(D, atlas, ev, sample.policy):
            continue
        sups["L"].add(*_ratio(ev.j, ev.alpha), pair)
        sups["K"].add(*_ratio(kv, ev.alpha), pair)
        sups["mu5"].add(*_ratio(ev.jprime, ev.alpha), pair)
    out = {n: s.entry() for n, s in sups.items()}
    if not D.apollonian:
        for n in ("c2", "L", "K", "mu5"):
            out[n] = ConstantEntry(n, math.nan, math.nan, math.nan, None, 0, SKIPPED)
    return out


def quasi_isotropy(D, atlas, x, r, directions=64) -> float:
    """``max / min`` of ``alpha(x, x + r w)`` over unit directions ``w``."""
    x = np.asarray(x, dtype=float)
    d = D.dist_to_boundary(x)
    if not r < d:
        raise DomainError(f"quasi_isotropy: radius {r} must be below d_D(x) = {d}")
    if directions < 16:
        raise DomainError("quasi_isotropy needs at least 16 directions")
    if D.n == 2:
        t = 2 * math.pi * np.arange(directions) / directions
        W = np.stack([np.cos(t), np.sin(t)], axis=1)
    else:
        from .domain import _sphere_directions
        W, _ = _sphere_directions(D.n, directions)
    vals = np.array([apollonian(D, x, x + r * w, atlas).value for w in W])
    return float(vals.max() / vals.min())


def quasi_isotropy_table(D, atlas, x, directions=64, levels=6):
    """Ratios at ``r = d_D(x) / 2^s``; radii below 10 atlas spacings are skipped."""
    d = D.dist_to_boundary(x)
    floor = 10.0 * _local_spacing(atlas, x, d)
    table = {}
    for s in range(1, levels + 1):
        r = d / 2**s
        table[s] = None if r < floor else quasi_isotropy(D, atlas, x, r, directions)
    return table


def _local_spacing(atlas, x, d):
    near = np.linalg.norm(atlas.points - x, axis=1) <= 4.0 * d
    rad = atlas.radii[near] if near.any() else atlas.radii
    return float(2.0 * np.median(rad))


def isotropy_constant(D, atlas, sample, directions=32):
    """Entry ``mu3``: the largest finite-radius isotropy ratio over sample points."""
    s = _Sup("mu3")
    if not D.apollonian:
        return ConstantEntry("mu3", math.nan, math.nan, math.nan, None, 0, SKIPPED)
    pts = sample.pairs[:, 0]
    for x in pts[: min(len(pts), 50)]:
        table = quasi_isotropy_table(D, atlas, x, directions, levels=3)
        vals = [v for v in table.values() if v is not None]
        if vals:
            v = max(vals)
            s.add(v, v, v, (x, x))
    return s.entry()


def estimate_constants(D, G, atlas, sample, evals=None, inequalities=True) -> ConstantsReport:
    """Joint report over one sample: every constant plus the inequality counts."""
    if evals is None:
        evals = evaluate_sample(D, G, atlas, sample, alphatilde=D.apollonian)
    rep = ConstantsReport(D.to_dict(), sample.policy, len(sample), G.h, len(atlas))
    rep.entries.update(uniformity_constants(D, G, sample, evals))
    rep.entries.update(diameter_uniformity(D, G, sample, evals))
    rep.entries.update(ratio_constants(D, G, atlas, sample, evals))
    rep.entries["mu3"] = isotropy_constant(D, atlas, sample)
    if not D.apollonian:
        rep.warnings.append(PSEUDOMETRIC)
    if inequalities:
        rep.inequalities = verify_inequalities(D, G, atlas, sample, evals).summary()
    return rep


# ---------------------------------------------------------------------------
# inequality suite
# ---------------------------------------------------------------------------

INEQUALITIES = (
    ("logd_le_alpha", True),      # |log d(x)/d(y)| <= alpha
    ("alpha_le_2j", True),        # alpha <= 2 j
    ("j_le_jprime", False),       # j <= j'
    ("jprime_le_k", False),       # j' <= k
    ("alphatilde_le_2k", True),   # alpha~ <= 2 k, with alpha~ from its lower end
    ("alphatilde_value_le_2k", True),  # same with the graph value of alpha~
)
EPS = 1e-12


@dataclass
class Check:
    name: str
    checked: int = 0
    failures: list = field(default_factory=list)
    worst_margin: float = math.inf
    worst_pair: tuple | None = None
    skipped: bool = False

    def add(self, lhs, rhs, pair, tol=EPS):
        self.checked += 1
        margin = rhs + tol - lhs
        if margin < self.worst_margin:
            self.worst_margin, self.worst_pair = float(margin), pair
        if margin < 0:
            self.failures.append({"x": pair[0].tolist(), "y": pair[1].tolist(),
                                  "lhs": float(lhs), "rhs": float(rhs), "margin": float(margin)})

    def as_dict(self):
        out = {"checked": self.checked, "failures": len(self.failures),
               "worst_margin": None if self.checked == 0 else self.worst_margin}
        if self.worst_pair is not None:
            out["worst_pair"] = [p.tolist() for p in self.worst_pair]
        if self.skipped:
            out["skipped"] = PSEUDOMETRIC
        if self.failures:
            out["failed_pairs"] = self.failures[:20]
        return out


@dataclass
class VerificationReport:
    domain: dict
    checks: dict
    sample_size: int
    warnings: list = field(default_factory=list)

    @property
    def n_failures(self):
        return sum(len(c.failures) for c in self.checks.values())

    @property
    def passed(self):
        return self.n_failures == 0

    def summary(self):
        return {k: c.as_dict() for k, c in self.checks.items()}

    def as_dict(self):
        return {"domain": self.domain, "sample_size": self.sample_size, "passed": self.passed,
                "failures": self.n_failures, "checks": self.summary(), "warnings": self.warnings}

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2)


def verify_inequalities(D, G, atlas, sample, evals=None) -> VerificationReport:
    """Check the pointwise and path inequalities on every pair; failures are data."""
    if evals is None:
        evals = evaluate_sample(D, G, atlas, sample, alphatilde=D.apollonian)
    checks = {name: Check(name) for name, _ in INEQUALITIES}
    warnings = []
    if not D.apollonian:
        warnings.append(PSEUDOMETRIC)
        for name, uses_alpha in INEQUALITIES:
            checks[name].skipped = uses_alpha
    # grid anisotropy allowance for comparing two graph values
    aniso = 0.08
    for ev in evals:
        pair = (ev.x, ev.y)
        if D.apollonian:
            checks["logd_le_alpha"].add(ev.ldr, ev.alpha.upper, pair)
            checks["alpha_le_2j"].add(ev.alpha.lower, 2.0 * ev.j.value, pair)
            if ev.alphatilde is not None:
                checks["alphatilde_le_2k"].add(ev.alphatilde.lower, 2.0 * ev.k.value, pair)
                checks["alphatilde_value_le_2k"].add(
                    ev.alphatilde.value, 2.0 * ev.k.value, pair, tol=aniso * ev.k.value + EPS)
        checks["j_le_jprime"].add(ev.j.value, ev.jprime.upper, pair)
        checks["jprime_le_k"].add(ev.jprime.lower, ev.k.value, pair)
    return VerificationReport(D.to_dict(), checks, len(evals), warnings)


# ---------------------------------------------------------------------------
# dyadic chain
# ---------------------------------------------------------------------------

@dataclass
class DyadicChain:
    z0: np.ndarray
    x_chain: np.ndarray
    y_chain: np.ndarray
    x_index: np.ndarray  # segment index each chain point lies on
    y_index: np.ndarray
    m: int
    s: int

    def as_dict(self):
        return {"z0": self.z0.tolist(), "m": self.m, "s": self.s,
                "x_chain": self.x_chain.tolist(), "y_chain": self.y_chain.tolist()}


def _chain(D, V, stop):
    """Doubling points along ``V[:stop+1]`` starting from ``V[0]``."""
    d = D.boundary_distance(V[: stop + 1])
    d1 = d[0]
    dmax = d.max()
    m = int(math.floor(math.log2(dmax * (1 + 1e-12) / d1) + 1e-15)) if dmax > d1 else 0
    while m > 0 and d1 * 2.0**m > dmax * (1 + 1e-12):
        m -= 1
    pts, seg = [V[0].copy()], [0]
    k = 0
    for i in range(1, m + 1):
        target = d1 * 2.0**i
        while k < stop and d[k + 1] < target:
            k += 1
        if k >= stop:
            # target only reached up to rounding at the last vertex
            pts.append(V[stop].copy())
            seg.append(stop)
            continue
        a, b = V[k], V[k + 1]
        if d[k] >= target:
            pts.append(a.copy())
            seg.append(k)
            continue
        lo, hi = 0.0, 1.0
        for _ in range(100):
            mid = 0.5 * (lo + hi)
            if D.boundary_distance(a + mid * (b - a))[0] < target:
                lo = mid
            else:
                hi = mid
            if hi - lo < 1e-15:
                break
        pts.append(a + hi * (b - a))
        seg.append(k)
    return np.array(pts), np.array(seg), m


def dyadic_chain(D, gamma) -> DyadicChain:
    """Points where ``d_D`` first reaches ``2^i d_D(start)`` on the way to the
    first vertex ``z0`` of maximal ``d_D``, from both ends of ``gamma``."""
    gamma = gamma if isinstance(gamma, Polyline) else Polyline(gamma)
    gamma.validate(D)
    V = gamma.vertices
    d = D.boundary_distance(V)
    i0 = int(np.argmax(d))
    xc, xs, m = _chain(D, V, i0)
    Vr = V[::-1]
    yc, ys, s = _chain(D, Vr, len(V) - 1 - i0)
    return DyadicChain(V[i0].copy(), xc, yc, xs, len(V) - 2 - ys, m, s)


def _subpath(V, p, kp, q, kq):
    """Vertices of the polyline between point ``p`` on segment ``kp`` and ``q`` on ``kq``."""
    inner = V[kp + 1: kq + 1]
    out = np.vstack([p[None], inner, q[None]])
    keep = np.r_[True, np.any(np.diff(out, axis=0) != 0, axis=1)]
    return out[keep]


@dataclass
class LinkReport:
    side: str
    index: int
    diam_over_rho: float
    rho_over_d: float
    d_over_dmin: float


@dataclass
class ChainReport:
    chain: DyadicChain
    links: list

    @property
    def b1(self):
        return max((l.diam_over_rho for l in self.links), default=0.0)

    @property
    def b2(self):
        return max((l.rho_over_d for l in self.links), default=0.0)

    @property
    def b3(self):
        return max((l.d_over_dmin for l in self.links), default=0.0)

    @property
    def finite(self):
        return all(math.isfinite(v) for v in (self.b1, self.b2, self.b3))

    def as_dict(self):
        return {"chain": self.chain.as_dict(), "b1": self.b1, "b2": self.b2, "b3": self.b3,
                "links": [vars(l) for l in self.links]}

    def to_json(self):
        return json.dumps(self.as_dict(), indent=2)


def chain_diagnostics(D, G, atlas, gamma) -> ChainReport:
    """Per-link ratios ``diam/rho``, ``rho/d(x_i)`` and ``d(x_i)/min d`` along the chain."""
    gamma = gamma if isinstance(gamma, Polyline) else Polyline(gamma)
    ch = dyadic_chain(D, gamma)
    V = gamma.vertices
    links = []
    for side, pts, seg in (("x", ch.x_chain, ch.x_index), ("y", ch.y_chain, ch.y_index)):
        for i in range(len(pts) - 1):
            p, q = pts[i], pts[i + 1]
            if side == "x":
                sub = _subpath(V, p, seg[i], q, seg[i + 1])
            else:
                sub = _subpath(V, q, seg[i + 1], p, seg[i])
            rho, _ = inner_diameter(D, p, q, G)
            dp = D.dist_to_boundary(p)
            dmin = float(D.boundary_distance(sub).min())
            links.append(LinkReport(side, i, path_diameter(sub) / rho.lower,
                                    rho.upper / dp, dp / dmin))
    return ChainReport(ch, links)


# ---------------------------------------------------------------------------
# grid defaults
# ---------------------------------------------------------------------------

def default_grid(D, h=None, window=None, stencil=1, points=()):
    """Grid suited to the domain: uniform, or graded toward the cusp tip."""
    from .paths import REFINE_FRACTION, build_grid, default_window

    h = 0.01 * D.scale if h is None else h
    if window is None:
        window = default_window(D, points)
    if isinstance(D, TangentDiskCusp):
        s = np.geomspace(0.5 * D.depth, 0.25 * D.radius, 64)
        H = np.array([D.horn_point(t, side) for t in s for side in (1, -1)])
        pad = 2.0 * h
        h_min = REFINE_FRACTION * D.feature_size(D.horn_point(D.depth))
        return build_grid(D, h, window, h_min=h_min, stencil=stencil,
                          refine_window=(H.min(0) - pad, H.max(0) + pad))
    return build_grid(D, h, window, stencil=stencil)
