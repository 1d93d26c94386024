import json
import math

import numpy as np
import pytest

from domain_metrics import DomainError, OutsideDomainError, load_domain, make_domain, sphere_inversion
from domain_metrics.domain import HalfSpace

from oracles import brute_dist, circle, segment


def test_unit_disk_construction(domains):
    D = domains["disk"]
    assert D.n == 2 and D.bounded and D.apollonian
    assert D.contains([0, 0]) and not D.contains([1, 0])
    assert D.dist_to_boundary([0, 0]) == 1.0


def test_upper_half_plane(domains):
    H = domains["halfplane"]
    assert not H.bounded and H.apollonian
    assert not H.contains([5, -1])
    assert H.dist_to_boundary([3, 0.25]) == 0.25


def test_polygon_not_convex():
    with pytest.raises(DomainError, match="polygon not convex"):
        make_domain({"kind": "convex_polygon", "n": 2,
                     "vertices": [[0, 0], [2, 0], [0.5, 0.5], [0, 2]]})


@pytest.mark.parametrize("spec, msg", [
    ({"kind": "ball", "n": 2, "radius": -1}, "radius"),
    ({"kind": "teapot", "n": 2}, "kind"),
    ({"kind": "slit_disk", "n": 2, "slit": [[0, 0], [2, 0]]}, "slit"),
    ({"kind": "ball", "n": 1}, "n"),
])
def test_bad_specs_name_the_constraint(spec, msg):
    with pytest.raises(DomainError, match=msg):
        make_domain(spec)


def test_slit_distance_matches_brute_force(domains):
    # frozen from the oracle: dense circle + slit sampling gives 0.1000000001
    B = np.vstack([circle((0, 0), 1, 20_000), segment((0, 0), (1, 0), 20_000)])
    assert abs(brute_dist((0.5, 0.1), B) - 0.1) < 1e-6
    assert domains["slit"].dist_to_boundary([0.5, 0.1]) == pytest.approx(0.1, abs=1e-15)


def test_dist_outside_raises(domains):
    with pytest.raises(OutsideDomainError, match="point outside domain"):
        domains["disk"].dist_to_boundary([2, 0])


def test_dimension_mismatch(domains):
    with pytest.raises(DomainError):
        domains["disk"].contains([0, 0, 0])


def test_disk_samples_on_circle(domains):
    A = domains["disk"].boundary_samples(4)
    assert len(A) == 4
    assert np.allclose(np.linalg.norm(A.points, axis=1), 1.0, atol=1e-15)


def test_half_plane_samples_flag_infinity(domains):
    A = domains["halfplane"].boundary_samples(100)
    assert len(A) == 100 and A.includes_infinity
    assert np.all(A.points[:, 1] == 0.0)


def test_slit_samples_cover_both_sides(domains):
    D = domains["slit"]
    A = D.boundary_samples(1000)
    on_slit = np.abs(A.points[:, 1]) < 1e-15
    on_slit &= (A.points[:, 0] > 0) & (A.points[:, 0] < 1)
    on_circle = np.abs(np.linalg.norm(A.points, axis=1) - 1) < 1e-12
    assert on_slit.sum() > 0 and on_circle.sum() > 0
    assert np.all(on_slit | on_circle)
    # both sides: every slit sample appears twice
    xs = np.sort(A.points[on_slit, 0])
    assert np.all(xs[::2] == xs[1::2])
    # every sample within 1e-12 of the boundary, via perturbed interior points
    assert np.all(D.boundary_distance(A.points) < 1e-12)
    for nu in ([0, 1], [0, -1]):
        P = A.points[on_slit] + 1e-6 * np.array(nu)
        assert np.allclose(D.boundary_distance(P), 1e-6, rtol=1e-6)


def test_cusp_atlas_graded(domains):
    D = domains["cusp"]
    A = D.boundary_samples(2000)
    # the tip region is sampled far more densely than the uniform spacing
    near = np.linalg.norm(A.points - D.tip, axis=1) < 0.01
    assert A.radii[near].min() < 1e-6
    assert np.all(D.boundary_distance(A.points) < 1e-12)


def test_sphere_inversion_examples():
    assert np.allclose(sphere_inversion([2, 0], [0, 0], 1), [0.5, 0])
    x = np.array([math.cos(0.3), math.sin(0.3)])
    assert np.allclose(sphere_inversion(x, [0, 0], 1), x, atol=1e-15)
    z = np.array([0.3, -1.7])
    back = sphere_inversion(sphere_inversion(z, [1, 2], 1.5), [1, 2], 1.5)
    assert np.allclose(back, z, atol=1e-12)
    with pytest.raises(DomainError, match="inversion pole"):
        sphere_inversion([1, 2], [1, 2], 1.0)


def test_json_round_trip(tmp_path, domains):
    for name in ("disk", "square", "slit", "cusp", "halfplane"):
        D = domains[name]
        p = tmp_path / f"{name}.json"
        p.write_text(json.dumps(D.to_dict()))
        E = load_domain(p)
        assert type(E) is type(D)
        assert E.to_dict() == D.to_dict()


def test_punctured_flags(domains):
    P, Q = domains["punctured"], domains["plane"]
    assert P.apollonian and P.bounded
    assert not Q.apollonian and not Q.bounded
    assert Q.inner_metric_degenerate
    assert not P.contains([0, 0])


def test_half_space_3d():
    H = make_domain({"kind": "half_space", "n": 3, "normal": [0, 0, 1], "offset": 0})
    assert isinstance(H, HalfSpace)
    assert H.dist_to_boundary([1, 2, 0.5]) == 0.5
    A = H.boundary_samples(400)
    assert A.includes_infinity and np.all(A.points[:, 2] == 0)


def test_scale_and_box(domains):
    assert domains["disk"].scale == 1.0
    lo, hi = domains["square"].bounding_box()
    assert np.allclose(lo, [0, 0]) and np.allclose(hi, [2, 1])
