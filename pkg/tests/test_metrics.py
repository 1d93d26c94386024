import math

import numpy as np
import pytest

from domain_metrics import (
    DomainError, MetricValue, OutsideDomainError, apollonian, j_metric, j_prime,
    log_density_ratio, make_domain,
)
from domain_metrics.domain import BoundaryAtlas
from domain_metrics.metrics import PSEUDOMETRIC

from oracles import brute_alpha, circle, hyperbolic_disk, hyperbolic_halfplane

# frozen from oracles.brute_alpha over 4000 circle points (all pairs)
DISK_ALPHA_BRUTE = 1.0986116032793263


def test_disk_alpha_log3(domains, atlases):
    v = apollonian(domains["disk"], [0, 0], [0.5, 0], atlases["disk"])
    assert abs(v.value - math.log(3)) < 1e-3
    assert abs(v.value - DISK_ALPHA_BRUTE) < 1e-3
    assert v.lower <= math.log(3) <= v.upper
    assert v.lower <= v.value <= v.upper


def test_separable_sup_equals_pair_sup():
    # the one-point decomposition reproduces the literal double supremum
    D = make_domain({"kind": "ball", "n": 2})
    B = circle((0, 0), 1, 500)
    A = BoundaryAtlas(B, np.full(len(B), math.pi / 500))
    for x, y in [((0.1, 0.2), (-0.4, 0.3)), ((0.8, 0.0), (0.0, -0.7))]:
        assert apollonian(D, x, y, A).value == pytest.approx(brute_alpha(x, y, B), abs=1e-12)


def test_alpha_identity(domains, atlases):
    for name in ("disk", "slit", "halfplane"):
        v = apollonian(domains[name], [0.5, 0.5], [0.5, 0.5], atlases[name])
        assert v.value == 0.0 and v.exact


def test_half_plane_alpha_uses_infinity(domains, atlases):
    v = apollonian(domains["halfplane"], [0, 1], [0, 2], atlases["halfplane"])
    assert abs(v.value - math.log(2)) < 1e-3
    assert v.lower <= math.log(2) <= v.upper


@pytest.mark.parametrize("x, y", [((0.3, 0.1), (-0.2, 0.6)), ((0.0, 0.95), (0.1, -0.5))])
def test_disk_alpha_is_hyperbolic(domains, atlases, x, y):
    v = apollonian(domains["disk"], x, y, atlases["disk"])
    assert v.lower - 1e-9 <= hyperbolic_disk(x, y) <= v.upper + 1e-9


@pytest.mark.parametrize("x, y", [((0.0, 0.5), (1.0, 2.0)), ((-1.5, 0.1), (1.2, 3.0))])
def test_half_plane_alpha_is_hyperbolic(domains, atlases, x, y):
    v = apollonian(domains["halfplane"], x, y, atlases["halfplane"])
    assert v.lower - 1e-9 <= hyperbolic_halfplane(x, y) <= v.upper + 1e-9
    assert v.width < 0.01


def test_alpha_errors(domains, atlases):
    with pytest.raises(OutsideDomainError):
        apollonian(domains["disk"], [0, 0], [1.5, 0], atlases["disk"])
    empty = BoundaryAtlas(np.zeros((0, 2)), np.zeros(0))
    with pytest.raises(DomainError, match="empty"):
        apollonian(domains["disk"], [0, 0], [0.5, 0], empty)


def test_pseudometric_warning(domains, atlases):
    v = apollonian(domains["plane"], [1, 0], [2, 0], atlases["plane"])
    assert v.warning == PSEUDOMETRIC
    assert apollonian(domains["punctured"], [0.2, 0], [0.5, 0], atlases["punctured"]).warning is None


def test_j_metric_examples(domains):
    D = domains["disk"]
    assert j_metric(D, [0, 0], [0.5, 0]).value == pytest.approx(math.log(2), abs=1e-15)
    assert j_metric(D, [0, 0], [0.5, 0]).exact
    assert j_metric(D, [0.1, 0.1], [0.1, 0.1]).value == 0.0
    H = domains["halfplane"]
    # d = 1 at both points and |x - y| = 1
    assert j_metric(H, [0, 1], [1, 1]).value == pytest.approx(math.log(2), abs=1e-15)


def test_j_prime_convex_equals_j(domains):
    D = domains["disk"]
    rho = MetricValue.exactly(0.5)
    assert j_prime(D, [0, 0], [0.5, 0], rho).value == j_metric(D, [0, 0], [0.5, 0]).value
    assert j_prime(D, [0, 0], [0, 0], MetricValue.exactly(0.0)).value == 0.0


def test_j_prime_bracket_follows_rho(domains):
    rho = MetricValue(0.51, 0.505, 0.52)
    v = j_prime(domains["slit"], [0.5, 0.1], [0.5, -0.1], rho)
    assert v.lower == pytest.approx(math.log1p(5.05))
    assert v.upper == pytest.approx(math.log1p(5.2))
    assert v.lower <= v.value <= v.upper


def test_log_density_ratio_examples(domains):
    assert log_density_ratio(domains["disk"], [0.3, 0], [-0.3, 0]) == 0.0
    assert log_density_ratio(domains["halfplane"], [0, 1], [4, 2]) == pytest.approx(math.log(2))
    assert log_density_ratio(domains["disk"], [0, 0], [0.9, 0]) == pytest.approx(math.log(10))


def test_bad_point_shapes(domains, atlases):
    with pytest.raises(DomainError):
        j_metric(domains["disk"], [0, 0], [0.5, 0, 0])
    with pytest.raises(DomainError):
        apollonian(domains["disk"], [[0, 0]], [0.5, 0], atlases["disk"])


def test_three_dimensional_ball():
    B = make_domain({"kind": "ball", "n": 3})
    A = B.boundary_samples(20_000)
    v = apollonian(B, [0, 0, 0], [0, 0, 0.5], A)
    assert v.lower <= math.log(3) + 1e-9 and math.log(3) <= v.upper + 1e-9
    assert abs(v.value - math.log(3)) < 5e-3
