"""Interior-point engine against hand-built problems with known optima."""

import numpy as np
import pytest

from tmoment.sdp import (SdpOptions, SdpProblem, check_infeasibility_ray,
                         check_unbounded_ray, kkt_residuals, solve)

from sdp_cases import INFEASIBLE_CASES, OPTIMAL_CASES, UNBOUNDED_CASE

OPT_TOL = 1e-7


@pytest.mark.parametrize("name", sorted(OPTIMAL_CASES))
def test_known_optimum(name):
    prob, opt, argmax = OPTIMAL_CASES[name]
    sol = solve(prob)
    assert sol.status == "optimal", f"{name}: {sol.status} ({sol.message})"
    assert abs(sol.objective - opt) <= OPT_TOL * (1.0 + abs(opt)), \
        f"{name}: got {sol.objective!r}, want {opt!r}"
    if argmax is not None:
        assert np.max(np.abs(sol.x - np.asarray(argmax))) <= 1e-6, \
            f"{name}: argmax {sol.x} vs {argmax}"


@pytest.mark.parametrize("name", sorted(OPTIMAL_CASES))
def test_kkt_residuals_at_optimum(name):
    prob, _, _ = OPTIMAL_CASES[name]
    sol = solve(prob)
    res = kkt_residuals(prob, sol.x, sol.dual_matrices)
    assert res["primal"] <= 1e-7
    assert res["dual"] <= 1e-6
    assert res["gap"] <= 1e-6


@pytest.mark.parametrize("name", sorted(INFEASIBLE_CASES))
def test_infeasible_certified(name):
    prob = INFEASIBLE_CASES[name]
    sol = solve(prob)
    assert sol.status == "primal_infeasible", f"{name}: {sol.status}"
    assert sol.ray_matrices is not None
    score = check_infeasibility_ray(prob, sol.ray_matrices)
    # normalize by the magnitude the ray certifies with
    scale = abs(score["const_value"])
    assert score["const_value"] < 0.0
    assert score["lin_violation"] <= 1e-7 * (1.0 + scale)
    assert score["psd_violation"] <= 1e-8 * (1.0 + scale)


def test_unbounded_certified():
    sol = solve(UNBOUNDED_CASE)
    assert sol.status == "dual_infeasible"
    assert sol.ray_x is not None
    score = check_unbounded_ray(UNBOUNDED_CASE, sol.ray_x)
    assert score["objective_gain"] > 0.0
    assert score["lambda_min"] >= -1e-8 * (1.0 + score["objective_gain"])


def test_case_count_meets_contract():
    # the engine suite promises twenty bounded problems with known optima
    assert len(OPTIMAL_CASES) >= 20
    assert len(INFEASIBLE_CASES) >= 2


# -- text format --------------------------------------------------------------


def test_dump_load_round_trip():
    for name, (prob, _, _) in sorted(OPTIMAL_CASES.items()):
        text = prob.dumps()
        back = SdpProblem.loads(text)
        assert back.num_vars == prob.num_vars
        assert np.array_equal(back.objective, prob.objective)
        assert len(back.blocks) == len(prob.blocks)
        for b0, b1 in zip(prob.blocks, back.blocks):
            assert b0.size == b1.size
            assert np.array_equal(b0.dense(prob.num_vars), b1.dense(prob.num_vars))
        assert back.dumps() == text


def test_loads_rejects_other_formats():
    with pytest.raises(ValueError):
        SdpProblem.loads("SDPA sparse\n1\n")


def test_duplicate_entries_accumulate():
    prob = SdpProblem(num_vars=1, objective=[1.0])
    blk = prob.new_block(1)
    blk.add(-1, 0, 0, 1.0)
    blk.add(-1, 0, 0, 1.0)
    blk.add(0, 0, 0, -1.0)
    sol = solve(prob)       # x <= 2
    assert abs(sol.objective - 2.0) <= 1e-7


# -- differential check against an independent solver -------------------------


def _random_problem(rng, nvars, sizes):
    """Bounded random LMI: F_i random symmetric, F_0 = I, plus a trust region."""
    prob = SdpProblem(num_vars=nvars, objective=rng.normal(size=nvars))
    for size in sizes:
        blk = prob.new_block(size)
        for i in range(size):
            blk.add(-1, i, i, 1.0)
        for v in range(nvars):
            A = rng.normal(size=(size, size))
            A = 0.5 * (A + A.T)
            for i in range(size):
                for j in range(i, size):
                    blk.add(v, i, j, float(A[i, j]))
    # |x_v| <= 10 keeps every instance bounded
    for v in range(nvars):
        for sign in (1.0, -1.0):
            blk = prob.new_block(1)
            blk.add(-1, 0, 0, 10.0)
            blk.add(v, 0, 0, sign)
    return prob


def _cvxopt_optimum(prob):
    cvxopt = pytest.importorskip("cvxopt")
    import cvxopt.solvers
    N = prob.num_vars
    # cvxopt solves min c.x with G x + s = h, s in PSD cones:
    # s = h - G x = F_0 + sum x_i F_i needs h = vec F_0, G columns = -vec F_i
    Gs, hs = [], []
    for blk in prob.blocks:
        T = blk.dense(N)
        G = np.stack([-T[v].reshape(-1) for v in range(N)], axis=1)
        Gs.append(cvxopt.matrix(G))
        hs.append(cvxopt.matrix(T[N].astype(float).reshape(blk.size, blk.size)))
    c = cvxopt.matrix(-prob.objective)      # maximize
    opts = {"show_progress": False, "abstol": 1e-9, "reltol": 1e-9, "feastol": 1e-9}
    sol = cvxopt.solvers.sdp(c, Gs=Gs, hs=hs, options=opts)
    if sol["status"] != "optimal":
        pytest.skip(f"reference solver returned {sol['status']}")
    return -sol["primal objective"]


@pytest.mark.parametrize("seed", range(8))
def test_differential_random_instances(seed):
    rng = np.random.Generator(np.random.Philox(key=[777, seed]))
    nvars = int(rng.integers(1, 4))
    sizes = [int(rng.integers(2, 5)) for _ in range(int(rng.integers(1, 3)))]
    prob = _random_problem(rng, nvars, sizes)
    sol = solve(prob, SdpOptions(tol_gap=1e-9, tol_feas=1e-9))
    assert sol.status == "optimal", sol.message
    ref = _cvxopt_optimum(prob)
    assert abs(sol.objective - ref) <= 1e-6 * (1.0 + abs(ref)), \
        f"seed {seed}: {sol.objective!r} vs reference {ref!r}"
