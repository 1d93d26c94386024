import math

import numpy as np
import pytest

from domain_metrics import DomainError, OutsideDomainError, Polyline, build_grid, shortest_path
from domain_metrics.analysis import (
    CSV_COLUMNS, NO_FINITE, SKIPPED, PairSample, adversarial_pairs, chain_diagnostics,
    default_grid, dyadic_chain, estimate_constants, evaluate_sample, make_sample, pairs_csv,
    quasi_isotropy, quasi_isotropy_table, ratio_constants, uniformity_constants,
    verify_inequalities, worker_count,
)


@pytest.fixture(scope="module")
def square_run(domains, atlases):
    P = domains["square"]
    G = build_grid(P, 0.04)
    S = make_sample(P, "uniform", 40, seed=7)
    return P, G, atlases["square"], S, evaluate_sample(P, G, atlases["square"], S)


@pytest.fixture(scope="module")
def slit_adversarial(domains, atlases):
    D = domains["slit"]
    G = build_grid(D, 0.01)
    S = adversarial_pairs(D)
    return D, G, atlases["slit"], S, evaluate_sample(D, G, atlases["slit"], S)


def test_chain_doubles_along_vertical_ray(domains, atlases):
    H = domains["halfplane"]
    V = np.c_[np.zeros(50), np.linspace(0.1, 12.8, 50)]
    ch = dyadic_chain(H, Polyline(V))
    assert ch.m == 7 and ch.s == 0
    assert np.allclose(ch.x_chain[:, 1], 0.1 * 2.0 ** np.arange(8), rtol=1e-12)
    G = build_grid(H, 0.5, ([-1, 0], [1, 14]))
    rep = chain_diagnostics(H, G, atlases["halfplane"], Polyline(V))
    assert rep.b1 == pytest.approx(1.0) and rep.b2 == pytest.approx(1.0)
    assert rep.b3 == pytest.approx(1.0) and rep.finite


def test_chain_trivial_when_distance_never_doubles(domains):
    ch = dyadic_chain(domains["disk"], Polyline([[0, 0], [0.3, 0]]))
    assert ch.m == 0 and ch.s == 0
    assert np.allclose(ch.z0, [0, 0])


def test_chain_rejects_path_leaving_domain(domains):
    with pytest.raises(OutsideDomainError):
        dyadic_chain(domains["slit"], Polyline([[0.5, 0.1], [0.5, -0.1]]))


def test_quasi_isotropy_disk_centre(domains, atlases):
    assert quasi_isotropy(domains["disk"], atlases["disk"], [0, 0], 0.5) == pytest.approx(1.0, abs=1e-5)


def test_quasi_isotropy_half_plane_small_radius(domains, atlases):
    v = quasi_isotropy(domains["halfplane"], atlases["halfplane"], [0, 1], 1 / 64)
    assert 1.0 <= v < 1.03


def test_quasi_isotropy_slit_is_anisotropic(domains, atlases):
    assert quasi_isotropy(domains["slit"], atlases["slit"], [0.5, 0.05], 0.025) > 1.2


def test_quasi_isotropy_bad_arguments(domains, atlases):
    with pytest.raises(DomainError, match="radius"):
        quasi_isotropy(domains["disk"], atlases["disk"], [0, 0], 1.0)
    with pytest.raises(DomainError, match="16 directions"):
        quasi_isotropy(domains["disk"], atlases["disk"], [0, 0], 0.5, directions=8)


def test_quasi_isotropy_table_skips_unresolved(domains):
    D = domains["disk"]
    table = quasi_isotropy_table(D, D.boundary_samples(200), [0, 0], levels=8)
    assert table[1] is not None and table[8] is None


def test_constants_at_least_one(square_run):
    P, G, A, S, evals = square_run
    rep = estimate_constants(P, G, A, S, evals)
    for name, e in rep.entries.items():
        assert e.estimate >= 1.0, name
        assert e.lower <= e.estimate <= e.upper
        assert e.finite
    # diameter cigar <= length cigar <= Euclidean-turning version
    assert rep["john"].estimate <= rep["c"].estimate <= rep["c_uniform"].estimate
    assert rep["nu2"].estimate == rep["john"].estimate
    assert rep.inequalities["alpha_le_2j"]["failures"] == 0


def test_witness_reproduces_estimate(square_run):
    P, G, A, S, evals = square_run
    e = ratio_constants(P, G, A, S, evals)["K"]
    x, y = e.witness
    ev = evaluate_sample(P, G, A, PairSample([[x, y]]))[0]
    assert ev.k.value / ev.alpha.value == pytest.approx(e.estimate, rel=1e-12)


def test_estimates_grow_with_sample(square_run):
    P, G, A, S, evals = square_run
    half = PairSample(S.pairs[:20])
    small = ratio_constants(P, G, A, half, evals[:20])
    full = ratio_constants(P, G, A, S, evals)
    for name in small:
        assert small[name].estimate <= full[name].estimate


def test_slit_adversarial_constants(slit_adversarial):
    D, G, A, S, evals = slit_adversarial
    u = uniformity_constants(D, G, S, evals)
    r = ratio_constants(D, G, A, S, evals)
    # the inner constant stays bounded while the Euclidean one does not
    assert u["c"].finite and u["c"].estimate < 10
    assert u["c_uniform"].estimate > 1e3 and u["c_uniform"].note == NO_FINITE
    assert 1 < r["c1"].estimate < 10
    rho = [ev.rho.value for ev in evals]
    assert np.all(np.abs(np.array(rho) - rho[0]) < 0.05)


def test_cusp_ratios_grow_toward_tip(domains):
    C = domains["cusp"]
    G = default_grid(C, 0.02)
    A = C.boundary_samples(4000)
    S = adversarial_pairs(C, count=3)
    evals = evaluate_sample(C, G, A, S)
    ratios = [ev.k.value / ev.jprime.value for ev in evals]
    assert ratios[0] < ratios[1] < ratios[2]
    assert ratios[2] > 20


def test_pseudometric_skips_alpha(domains, atlases):
    Q = domains["plane"]
    G = build_grid(Q, 0.1, ([-2, -2], [2, 2]))
    S = make_sample(Q, "uniform", 6, seed=1, box=([-1.5, -1.5], [1.5, 1.5]))
    A = atlases["plane"]
    rep = verify_inequalities(Q, G, A, S)
    assert rep.checks["alpha_le_2j"].skipped and rep.checks["alpha_le_2j"].checked == 0
    assert rep.checks["j_le_jprime"].checked == 6
    assert rep.passed and rep.warnings
    c = estimate_constants(Q, G, A, S, inequalities=False)
    assert c["K"].note == SKIPPED and c["mu3"].note == SKIPPED
    assert c["c1"].finite


def test_pairs_csv_columns(square_run):
    *_, evals = square_run
    lines = pairs_csv(evals[:3]).splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) == 4


def test_sample_policies(domains):
    D = domains["disk"]
    for policy in ("uniform", "boundary"):
        S = make_sample(D, policy, 30)
        assert len(S) == 30 and S.policy == policy
        S.validate(D)
    assert np.array_equal(make_sample(D, "uniform", 5).pairs, make_sample(D, "uniform", 5).pairs)
    with pytest.raises(ValueError, match="policy"):
        make_sample(D, "random-walk", 5)
    with pytest.raises(OutsideDomainError):
        PairSample([[[0, 0], [2, 0]]]).validate(D)


def test_boundary_policy_is_closer_to_boundary(domains):
    D = domains["disk"]
    u = D.boundary_distance(make_sample(D, "uniform", 500).pairs.reshape(-1, 2))
    b = D.boundary_distance(make_sample(D, "boundary", 500).pairs.reshape(-1, 2))
    assert np.median(b) < np.median(u)


def test_adversarial_slit_straddles(domains):
    S = adversarial_pairs(domains["slit"])
    assert len(S) == 5
    assert np.all(S.pairs[:, 0, 1] > 0) and np.all(S.pairs[:, 1, 1] < 0)
    assert np.allclose(S.pairs[:, 0, 1], np.geomspace(1e-1, 1e-3, 5))


def test_worker_count(monkeypatch):
    monkeypatch.setenv("DOMAIN_METRICS_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("DOMAIN_METRICS_THREADS", "1")
    assert worker_count() == 1


def test_evaluation_deterministic_across_threads(monkeypatch, domains, atlases):
    D = domains["disk"]
    G = build_grid(D, 0.05)
    S = make_sample(D, "uniform", 6, seed=3)
    monkeypatch.setenv("DOMAIN_METRICS_THREADS", "1")
    a = pairs_csv(evaluate_sample(D, G, atlases["disk"], S))
    monkeypatch.setenv("DOMAIN_METRICS_THREADS", "4")
    b = pairs_csv(evaluate_sample(D, G, atlases["disk"], S))
    assert a == b


def test_k_path_joins_pair(square_run):
    P, G, A, S, evals = square_run
    ev = evals[0]
    v, p = shortest_path(G, P, ev.x, ev.y, "quasihyperbolic")
    assert v.value == ev.k.value
    assert np.allclose(ev.k_path.vertices[0], ev.x) and np.allclose(ev.k_path.vertices[-1], ev.y)


def test_alpha_ratios_need_resolved_points(domains, atlases):
    from domain_metrics.analysis import _resolved
    H, A = domains["halfplane"], atlases["halfplane"]
    G = build_grid(H, 0.1, ([-3, 0], [1, 4]))
    far, near = PairSample([[[-1.8, 0.5], [-0.3, 3.1]]]), PairSample([[[-1.8, 0.002], [-0.3, 3.1]]])
    ev_far, ev_near = evaluate_sample(H, G, A, far)[0], evaluate_sample(H, G, A, near)[0]
    assert _resolved(H, A, ev_far, "uniform")
    assert not _resolved(H, A, ev_near, "uniform")
    assert _resolved(H, A, ev_near, "adversarial")
    r = ratio_constants(H, G, A, near, [ev_near])
    assert r["K"].sample_size == 0 and r["c1"].sample_size == 1
