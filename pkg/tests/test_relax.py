"""Relaxation builders: hierarchy properties, scaling, objectives."""

import numpy as np
import pytest

from tmoment.flatatoms import find_flat_truncation
from tmoment.moments import Polynomial, Tms, moment_matrix, tms_from_atoms
from tmoment.monomials import basis, monomial_count
from tmoment.refmeasures import ball_uniform_moments, default_reference, gaussian_moments
from tmoment.relax import (build_feasibility, build_flat_search,
                           build_flat_search_rn, build_lambda, build_shift_rn,
                           eta_star_direct, gram_polynomial, objective_ones,
                           objective_seeded, objective_trace, rescale_set,
                           rescale_tms, unscale_tms)
from tmoment.sdp import SdpOptions, solve
from tmoment.semialg import SemialgebraicSet, ball_set, box_set


def _disk_instance(seed, d=2, noise=0.0):
    """Random atomic moments on the unit disk, optionally perturbed."""
    rng = np.random.Generator(np.random.Philox(key=[300, seed]))
    r = int(rng.integers(2, 5))
    ang = rng.uniform(0, 2 * np.pi, size=r)
    rad = rng.uniform(0, 0.9, size=r) ** 0.5
    pts = np.stack([rad * np.cos(ang), rad * np.sin(ang)], axis=1)
    w = rng.uniform(0.2, 1.0, size=r)
    y = tms_from_atoms(2, d, pts, w)
    if noise:
        vals = y.values.copy()
        vals[1:] += noise * rng.normal(size=len(vals) - 1)
        y = Tms(2, d, vals)
    return y


def _solve_lambda(y, xi, K, k, mode="quadratic_module"):
    rel = build_lambda(y, xi, K, k, mode=mode)
    sol = solve(rel.problem)
    assert sol.status == "optimal", sol.message
    lam, _ = rel.decode(sol)
    return lam


# -- hierarchy properties ------------------------------------------------------


@pytest.mark.parametrize("seed", range(10))
def test_lambda_monotone_in_k(seed):
    # deeper relaxations only add constraints, so the shift can only shrink
    K = ball_set(2, 1.0)
    xi = ball_uniform_moments(2, 2)
    y = _disk_instance(seed, noise=0.0 if seed < 5 else 0.05)
    lams = [_solve_lambda(y, xi, K, k) for k in (1, 2, 3)]
    for a, b in zip(lams, lams[1:]):
        assert b <= a + 1e-6, f"seed {seed}: {lams}"


@pytest.mark.parametrize("seed", range(5))
def test_quadratic_module_dominates_preordering(seed):
    # the preordering adds localizing blocks for generator products, so its
    # optimum can only be smaller; boxes give two generators and one product
    K = box_set(2)
    xi, _ = default_reference(K, 2)
    rng = np.random.Generator(np.random.Philox(key=[301, seed]))
    pts = rng.uniform(-0.9, 0.9, size=(3, 2))
    y = tms_from_atoms(2, 2, pts, rng.uniform(0.2, 1.0, size=3))
    for k in (2, 3):
        lam_qm = _solve_lambda(y, xi, K, k, mode="quadratic_module")
        lam_pre = _solve_lambda(y, xi, K, k, mode="preordering")
        assert lam_qm >= lam_pre - 1e-6, f"seed {seed} k={k}: {lam_qm} < {lam_pre}"


@pytest.mark.parametrize("seed", range(5))
def test_eta_star_direct_matches_sdp(seed):
    # at k = d/2 the SDP has no free tail, so both routes solve the same
    # generalized eigenvalue problem
    rng = np.random.Generator(np.random.Philox(key=[302, seed]))
    pts = rng.normal(size=(4, 2))
    y = tms_from_atoms(2, 4, pts, rng.uniform(0.2, 1.0, size=4))
    xi = gaussian_moments(2, 4)
    eta = eta_star_direct(y, xi)
    rel = build_shift_rn(y, xi, k=2)
    sol = solve(rel.problem)
    assert sol.status == "optimal"
    assert abs(sol.objective - eta) <= 1e-6 * (1.0 + abs(eta))


def test_lambda_invariant_under_rescaling():
    K = ball_set(2, 5.0)
    xi = ball_uniform_moments(2, 2)
    y = _disk_instance(3)
    lam = _solve_lambda(y, xi, K, 2)
    R = 5.0
    lam_scaled = _solve_lambda(rescale_tms(y, R), rescale_tms(xi, R),
                               rescale_set(K, R), 2)
    assert abs(lam - lam_scaled) <= 1e-6 * (1.0 + abs(lam))


# -- flat search and the norm bound ---------------------------------------------


@pytest.mark.parametrize("objective_kind", ["ones", "trace", "seeded0", "seeded1"])
def test_flat_search_solutions_obey_norm_bound(objective_kind):
    # every w feasible for the compact-set search with enclosing radius
    # R < 1 satisfies ||w||_2 <= y_0 / (1 - R^2); check the optimizers
    R_target = 0.9
    K0 = ball_set(2, 2.0)
    rng = np.random.Generator(np.random.Philox(key=[303, 0]))
    pts = rng.uniform(-1.2, 1.2, size=(3, 2))
    y0 = tms_from_atoms(2, 2, pts, rng.uniform(0.2, 1.0, size=3))
    scale = K0.radius / R_target
    K = rescale_set(K0, scale)
    y = rescale_tms(y0, scale)
    assert K.radius == pytest.approx(R_target)
    for k in (2, 3):
        if objective_kind == "ones":
            c = objective_ones(2, k)
        elif objective_kind == "trace":
            c = objective_trace(2, k)
        else:
            c = objective_seeded(2, k, seed=int(objective_kind[-1]))
        rel = build_flat_search(y, K, k, c)
        sol = solve(rel.problem)
        if sol.status != "optimal":
            continue
        _, w = rel.decode(sol)
        bound = y.values[0] / (1.0 - R_target**2)
        assert np.linalg.norm(w.values) <= bound * (1.0 + 1e-8), \
            f"{objective_kind} k={k}: {np.linalg.norm(w.values)} > {bound}"


def test_flat_search_recovers_planted_measure():
    K = ball_set(2, 1.0)
    pts = np.array([[0.5, 0.0], [-0.3, 0.4], [0.0, -0.6]])
    w = np.array([0.5, 0.3, 0.2])
    y = tms_from_atoms(2, 2, pts, w)
    rel = build_flat_search(y, K, 3, objective_seeded(2, 3, seed=5))
    sol = solve(rel.problem)
    assert sol.status == "optimal"
    _, wfull = rel.decode(sol)
    assert find_flat_truncation(wfull, 2, d_g=1, K=K) is not None


def test_flat_search_rn_objective_is_trace_form():
    rng = np.random.Generator(np.random.Philox(key=[304, 0]))
    pts = rng.normal(size=(3, 2))
    y = tms_from_atoms(2, 2, pts, rng.uniform(0.2, 1.0, size=3))
    k = 2
    C = np.eye(monomial_count(2, k))
    rel = build_flat_search_rn(y, k, C)
    w = tms_from_atoms(2, 2 * k, pts, np.ones(3))
    assert rel.objective_value(w) == pytest.approx(
        float(np.trace(moment_matrix(w, k).entries)))


# -- encode / decode -------------------------------------------------------------


def test_decode_pins_data_and_encode_inverts():
    K = ball_set(2, 1.0)
    xi = ball_uniform_moments(2, 2)
    y = _disk_instance(7)
    rel = build_lambda(y, xi, K, 2)
    rng = np.random.Generator(np.random.Philox(key=[305, 0]))
    x = rng.normal(size=rel.problem.num_vars)
    lam, w = rel.decode(x)
    np.testing.assert_allclose(
        w.values[: monomial_count(2, 2)],
        y.values - lam * xi.values, atol=1e-14)
    np.testing.assert_allclose(rel.encode(lam, w), x, atol=1e-14)


def test_decode_rejects_ray_only_solutions():
    K = ball_set(1, 1.0)
    y = Tms(n=1, d=2, values=np.array([1.0, 0.0, 2.0]))   # y_2 > y_0: off K
    rel = build_feasibility(y, K, 2)
    sol = solve(rel.problem)
    assert sol.status == "primal_infeasible"
    with pytest.raises(ValueError):
        rel.decode(sol)


# -- objectives and grams ---------------------------------------------------------


def test_objective_trace_counts_even_monomials():
    c = objective_trace(2, 2)
    w = _disk_instance(9, d=4)
    assert float(c @ w.values) == pytest.approx(
        float(np.trace(moment_matrix(w, 2).entries)))


def test_objective_seeded_extends_across_orders():
    small = objective_seeded(2, 2, seed=11)
    large = objective_seeded(2, 3, seed=11)
    np.testing.assert_array_equal(large[: len(small)], small)


def test_gram_polynomial_matches_quadratic_form():
    rng = np.random.Generator(np.random.Philox(key=[306, 0]))
    order, n = 2, 2
    b = basis(n, order)
    G = rng.normal(size=(len(b), len(b)))
    G = 0.5 * (G + G.T)
    sigma = gram_polynomial(G, n, order)
    pts = rng.uniform(-2, 2, size=(5, n))
    V = b.evaluate(pts)
    expect = np.einsum("pi,ij,pj->p", V, G, V)
    np.testing.assert_allclose(sigma(pts), expect, rtol=1e-12, atol=1e-12)


def test_rescale_round_trip():
    y = _disk_instance(12, d=4)
    back = unscale_tms(rescale_tms(y, 3.7), 3.7)
    np.testing.assert_allclose(back.values, y.values, rtol=1e-14)


# -- builder guards ----------------------------------------------------------------


def test_builder_guards():
    K = ball_set(2, 1.0)
    y = _disk_instance(0, d=4)
    xi = ball_uniform_moments(2, 4)
    with pytest.raises(ValueError):
        build_lambda(y, xi, K, 1)              # 2k < d
    with pytest.raises(ValueError):
        build_lambda(y, xi, K, 2, mode="nope")
    with pytest.raises(ValueError):
        build_flat_search(y, SemialgebraicSet(n=2, generators=K.generators), 3,
                          objective_ones(2, 3))   # no radius
    with pytest.raises(ValueError):
        build_flat_search_rn(y, 2, -np.eye(monomial_count(2, 2)))  # not psd
    atom_xi = tms_from_atoms(2, 4, np.zeros((1, 2)), np.ones(1))
    with pytest.raises(ValueError):
        build_shift_rn(y, atom_xi, 2)          # singular reference
