import math

import numpy as np
import pytest

from domain_metrics import (
    GridError, Polyline, build_grid, d_length, inner_diameter, path_diameter, shortest_path,
)
from domain_metrics.paths import prefix_diameters, qh_segment, shortcut

from oracles import lattice_dijkstra, qh_radial_disk


@pytest.fixture(scope="module")
def disk_grid(domains):
    return build_grid(domains["disk"], 0.02)


@pytest.fixture(scope="module")
def slit_grid(domains):
    return build_grid(domains["slit"], 0.01)


def test_disk_node_count(domains):
    G = build_grid(domains["disk"], 0.01)
    # area / h^2
    assert abs(len(G) - math.pi / 1e-4) < 0.05 * math.pi / 1e-4
    assert np.all(G.dist > 0.005)


def test_grid_too_coarse(domains):
    with pytest.raises(GridError, match="grid too coarse"):
        build_grid(domains["disk"], 3.0)


def test_memory_guard(domains):
    with pytest.raises(GridError, match="memory guard"):
        build_grid(domains["disk"], 1e-3, max_nodes=1000)


def test_no_edge_crosses_slit(domains, slit_grid):
    G = slit_grid
    U, V = G.nodes[G.edges[:, 0]], G.nodes[G.edges[:, 1]]
    for t in (0.25, 0.5, 0.75):
        assert np.all(domains["slit"].contains(U + t * (V - U)))
    # independent crossing test against the segment [0, 1] x {0}
    flip = np.sign(U[:, 1]) * np.sign(V[:, 1]) < 0
    t = U[flip, 1] / (U[flip, 1] - V[flip, 1])
    xc = U[flip, 0] + t * (V[flip, 0] - U[flip, 0])
    assert not np.any((xc >= 0) & (xc <= 1))


def test_k_disk_radial(domains, disk_grid):
    v, path = shortest_path(disk_grid, domains["disk"], [0, 0], [0.5, 0], "quasihyperbolic")
    assert abs(v.value - qh_radial_disk(0.5)) < 0.02
    assert v.lower <= v.value
    assert np.allclose(path.vertices[0], [0, 0]) and np.allclose(path.vertices[-1], [0.5, 0])


def test_k_off_axis_grid_only(domains, disk_grid):
    # the grid estimate alone stays within the 8-neighbour anisotropy of the radial integral
    x, y = np.array([0.013, 0.007]), np.array([0.013 + 0.5 * math.cos(0.4), 0.007 + 0.5 * math.sin(0.4)])
    v, _ = shortest_path(disk_grid, domains["disk"], x, y, "quasihyperbolic", straight=False)
    seg = qh_segment(domains["disk"], x, y)
    assert seg <= v.value <= seg * 1.09


def test_euclidean_convex_exact(domains):
    P = domains["square"]
    G = build_grid(P, 0.02)
    rng = np.random.default_rng(3)
    X = P.sample_interior(rng, 20)
    for x, y in zip(X[::2], X[1::2]):
        v, path = shortest_path(G, P, x, y, "euclidean")
        assert abs(v.value - np.linalg.norm(x - y)) <= 2 * 0.02
        assert len(path) == 2


def test_grid_distance_matches_octile_and_heap_dijkstra(domains):
    P = domains["square"]
    h = 0.25
    G = build_grid(P, h)
    x, y = np.array([0.25, 0.25]), np.array([1.75, 0.75])
    v, _ = shortest_path(G, P, x, y, "euclidean", straight=False)
    dx, dy = 1.5, 0.5
    octile = max(dx, dy) + (math.sqrt(2) - 1) * min(dx, dy)
    assert v.value == pytest.approx(octile, abs=1e-12)
    nodes = G.nodes
    src = int(np.argmin(np.linalg.norm(nodes - x, axis=1)))
    dst = int(np.argmin(np.linalg.norm(nodes - y, axis=1)))
    ref = lattice_dijkstra(
        nodes, lambda i, j: np.linalg.norm(nodes[i] - nodes[j]) <= math.sqrt(2) * h * 1.000001,
        lambda i, j: float(np.linalg.norm(nodes[i] - nodes[j])), src, dst)
    assert v.value == pytest.approx(ref, abs=1e-12)


def test_alphatilde_disk(domains):
    D = domains["disk"]
    G = build_grid(D, 0.005)
    A = D.boundary_samples(2000)
    v, _ = shortest_path(G, D, [0, 0], [0.5, 0], "apollonian", A)
    assert abs(v.value - math.log(3)) < 0.03


def test_disconnected_points(domains):
    S = domains["slit"]
    G = build_grid(S, 0.02, ([0.2, -0.5], [0.8, 0.5]))
    with pytest.raises(GridError, match="points not connected"):
        shortest_path(G, S, [0.5, 0.1], [0.5, -0.1], "euclidean")


def test_slit_lambda_goes_around(domains, slit_grid):
    v, path = shortest_path(slit_grid, domains["slit"], [0.5, 0.1], [0.5, -0.1], "euclidean")
    # around the tip: two segments of length sqrt(0.26)
    assert 2 * math.sqrt(0.26) - 1e-9 <= v.value <= 2 * math.sqrt(0.26) + 0.02
    assert np.all(domains["slit"].segments_inside(path.vertices[:-1], path.vertices[1:]))


def test_d_length(domains, atlases):
    D, H = domains["disk"], domains["halfplane"]
    gamma = Polyline([[0, 0], [0.3, 0.4]])
    assert d_length(D, gamma, "euclidean") == pytest.approx(0.5)
    V = np.c_[np.zeros(1001), np.linspace(1, math.e, 1001)]
    assert abs(d_length(H, Polyline(V), "quasihyperbolic") - 1) < 1e-4
    A = atlases["disk"]
    coarse = Polyline([[0, 0], [0.3, 0.3], [0.6, 0.0]])
    fine = Polyline([[0, 0], [0.15, 0.15], [0.3, 0.3], [0.45, 0.15], [0.6, 0.0]])
    gap = 2 * max(apollonian_width(D, coarse, A), apollonian_width(D, fine, A))
    assert d_length(D, fine, "apollonian", A) >= d_length(D, coarse, "apollonian", A) - gap


def apollonian_width(D, gamma, A):
    from domain_metrics import apollonian
    V = gamma.vertices
    return sum(apollonian(D, u, v, A).width for u, v in zip(V[:-1], V[1:]))


def test_d_length_outside(domains):
    from domain_metrics import OutsideDomainError
    with pytest.raises(OutsideDomainError):
        d_length(domains["disk"], Polyline([[0, 0], [2, 0]]), "euclidean")


def test_inner_diameter_convex(domains, disk_grid):
    x, y = [0.5, 0.1], [-0.2, -0.3]
    r, w = inner_diameter(domains["disk"], x, y, disk_grid)
    gap = math.dist(x, y)
    assert r.exact and r.value == pytest.approx(gap)
    assert r.upper - r.lower <= 2 * 0.02
    r0, _ = inner_diameter(domains["disk"], x, x, disk_grid)
    assert r0.value == 0.0


def test_inner_diameter_slit(domains, slit_grid):
    r, w = inner_diameter(domains["slit"], [0.5, 0.1], [0.5, -0.1], slit_grid)
    assert abs(r.value - math.sqrt(0.26)) < 0.02
    assert r.lower <= math.sqrt(0.26) <= r.upper
    assert r.upper <= 2 * r.lower + 4 * slit_grid.h
    assert path_diameter(w) == pytest.approx(r.upper)
    assert abs(path_diameter(w) - 0.51) < 0.02


def test_path_diameter_examples():
    assert path_diameter(Polyline([[1, 2]])) == 0.0
    assert path_diameter(Polyline([[0, 0], [3, 4]])) == 5.0
    rng = np.random.default_rng(0)
    V = rng.normal(size=(900, 2))
    ref = max(np.linalg.norm(V[i] - V, axis=1).max() for i in range(len(V)))
    assert path_diameter(Polyline(V)) == pytest.approx(ref, abs=1e-12)


def test_prefix_diameters_brute():
    rng = np.random.default_rng(1)
    V = np.cumsum(rng.normal(size=(600, 2)), axis=0)
    ref = [0.0] + [np.max(np.linalg.norm(V[:k + 1, None] - V[None, :k + 1], axis=2)) for k in range(1, 600)]
    assert np.allclose(prefix_diameters(V), ref, atol=1e-12)
    L = np.c_[np.arange(300.0), np.zeros(300)]
    assert np.allclose(prefix_diameters(L), np.arange(300.0))


def test_shortcut_never_increases_diameter(domains, slit_grid):
    S = domains["slit"]
    v, path = shortest_path(slit_grid, S, [0.5, 0.1], [0.5, -0.1], "quasihyperbolic")
    p2 = shortcut(S, path)
    assert path_diameter(p2) <= path_diameter(path) + 1e-12
    assert np.all(S.segments_inside(p2.vertices[:-1], p2.vertices[1:]))


def test_polyline_csv(tmp_path):
    p = Polyline([[0.1, 0.2], [0.3, 0.4], [1 / 3, 2 / 3]])
    f = tmp_path / "g.csv"
    p.to_csv(f)
    assert f.read_text().splitlines()[0] == "x0,x1"
    q = Polyline.from_csv(f)
    assert np.array_equal(p.vertices, q.vertices)


def test_weights_cached(domains, disk_grid):
    w1 = disk_grid.weights("quasihyperbolic")
    assert disk_grid.weights("quasihyperbolic") is w1
    with pytest.raises(ValueError):
        disk_grid.weights("taxicab")


def test_graded_cusp_grid(domains):
    C = domains["cusp"]
    from domain_metrics.analysis import default_grid
    G = default_grid(C, 0.02)
    assert G.sizes.min() < 1e-6 < G.sizes.max()
    z = C.horn_point(2e-3)
    v, path = shortest_path(G, C, C.body_point(), z, "quasihyperbolic")
    # the horn integral grows like 1 / (a s) with a = 1/4
    assert 4 / 2e-3 * 0.8 < v.value < 4 / 2e-3 * 1.5
    assert np.all(C.contains(path.vertices))
