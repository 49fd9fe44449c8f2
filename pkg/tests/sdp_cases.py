"""Hand-built SDP test cases with known optima.

Every bounded case carries a closed-form optimum derived from the block
structure by hand (1x1 cases are linear programs; 2x2 and 3x3 cases reduce
to determinant and eigenvalue conditions).  Each 2x2/3x3 design was
additionally confirmed against a zooming brute-force grid over the feasible
region: cases with polyhedral or eigenvalue-flat boundaries agree to 1e-12;
cases whose optimum sits on a curved determinant boundary agree to the
grid's quadratic resolution limit (~1e-4), enough to catch any algebra
slip.  The pinned values below are the closed forms.

Infeasible and unbounded cases pin the expected solver status; the ray
certificates are checked by the caller.
"""

import math

from tmoment.sdp import SdpProblem


def _problem(nvars, c, blocks):
    """blocks: list of (size, [(var, i, j, val), ...]) with var = -1 for F0."""
    prob = SdpProblem(num_vars=nvars, objective=c)
    for size, entries in blocks:
        blk = prob.new_block(size)
        for var, i, j, val in entries:
            blk.add(var, i, j, val)
    prob.validate()
    return prob


SQ2 = math.sqrt(2.0)
SQ5 = math.sqrt(5.0)

# name -> (problem, optimum, argmax or None when not unique/not checked)
OPTIMAL_CASES = {
    # -- 1x1 blocks: linear programs --------------------------------------
    "lp_upper_bound": (_problem(
        1, [1.0], [(1, [(-1, 0, 0, 3.0), (0, 0, 0, -1.0)]),
                   (1, [(-1, 0, 0, 5.0), (0, 0, 0, 1.0)])]),
        3.0, [3.0]),
    "lp_lower_bound": (_problem(
        1, [-1.0], [(1, [(-1, 0, 0, 1.0), (0, 0, 0, 1.0)]),
                    (1, [(-1, 0, 0, 9.0), (0, 0, 0, -1.0)])]),
        1.0, [-1.0]),
    "lp_box_two_vars": (_problem(
        2, [1.0, 1.0], [(1, [(-1, 0, 0, 1.0), (0, 0, 0, -1.0)]),
                        (1, [(-1, 0, 0, 1.0), (1, 0, 0, -1.0)]),
                        (1, [(-1, 0, 0, 5.0), (0, 0, 0, 1.0)]),
                        (1, [(-1, 0, 0, 5.0), (1, 0, 0, 1.0)])]),
        2.0, [1.0, 1.0]),
    "lp_weighted": (_problem(
        2, [2.0, -1.0], [(1, [(-1, 0, 0, 4.0), (0, 0, 0, -1.0)]),
                         (1, [(-1, 0, 0, 4.0), (0, 0, 0, 1.0)]),
                         (1, [(-1, 0, 0, -2.0), (1, 0, 0, 1.0)]),
                         (1, [(-1, 0, 0, 7.0), (1, 0, 0, -1.0)])]),
        6.0, [4.0, 2.0]),
    "lp_mixed_sign": (_problem(
        2, [3.0, -2.0], [(1, [(-1, 0, 0, 5.0), (0, 0, 0, -1.0)]),
                         (1, [(-1, 0, 0, 1.0), (0, 0, 0, 1.0)]),
                         (1, [(-1, 0, 0, -2.0), (1, 0, 0, 1.0)]),
                         (1, [(-1, 0, 0, 7.0), (1, 0, 0, -1.0)])]),
        11.0, [5.0, 2.0]),
    # -- 2x2 blocks: determinant boundaries -------------------------------
    # [[1, x], [x, 1]] psd  <=>  |x| <= 1
    "corr_unit": (_problem(
        1, [1.0], [(2, [(-1, 0, 0, 1.0), (-1, 1, 1, 1.0), (0, 0, 1, 1.0)])]),
        1.0, [1.0]),
    # [[2, x], [x, 8]] psd  <=>  |x| <= 4
    "corr_scaled": (_problem(
        1, [1.0], [(2, [(-1, 0, 0, 2.0), (-1, 1, 1, 8.0), (0, 0, 1, 1.0)])]),
        4.0, [4.0]),
    # independent 2x2 blocks: x1 <= 1, x2 <= 2
    "corr_pair": (_problem(
        2, [1.0, 1.0],
        [(2, [(-1, 0, 0, 1.0), (-1, 1, 1, 1.0), (0, 0, 1, 1.0)]),
         (2, [(-1, 0, 0, 1.0), (-1, 1, 1, 4.0), (1, 0, 1, 1.0)])]),
        3.0, [1.0, 2.0]),
    # max t with [[2,1],[1,3]] - t I psd: smallest eigenvalue (5 - sqrt 5)/2
    "eig_min_2x2": (_problem(
        1, [1.0], [(2, [(-1, 0, 0, 2.0), (-1, 0, 1, 1.0), (-1, 1, 1, 3.0),
                        (0, 0, 0, -1.0), (0, 1, 1, -1.0)])]),
        (5.0 - math.sqrt(5.0)) / 2.0, [(5.0 - math.sqrt(5.0)) / 2.0]),
    # min t with t I - [[2,1],[1,3]] psd, as max -t: largest eigenvalue
    "eig_max_2x2": (_problem(
        1, [-1.0], [(2, [(-1, 0, 0, -2.0), (-1, 0, 1, -1.0), (-1, 1, 1, -3.0),
                         (0, 0, 0, 1.0), (0, 1, 1, 1.0)])]),
        -(5.0 + math.sqrt(5.0)) / 2.0, [(5.0 + math.sqrt(5.0)) / 2.0]),
    # [[1, x1], [x1, x2]] and [[1, x2], [x2, 1]]: x1^2 <= x2 <= 1
    "chain_2x2": (_problem(
        2, [1.0, 0.0],
        [(2, [(-1, 0, 0, 1.0), (0, 0, 1, 1.0), (1, 1, 1, 1.0)]),
         (2, [(-1, 0, 0, 1.0), (-1, 1, 1, 1.0), (1, 0, 1, 1.0)])]),
        1.0, [1.0, 1.0]),
    # [[1 - x1, x2], [x2, 1 + x1]] psd <=> x1^2 + x2^2 <= 1; max (1,2).x = sqrt 5
    "disk_2x2": (_problem(
        2, [1.0, 2.0],
        [(2, [(-1, 0, 0, 1.0), (-1, 1, 1, 1.0), (0, 0, 0, -1.0),
              (0, 1, 1, 1.0), (1, 0, 1, 1.0)])]),
        SQ5, None),
    # [[x + 2, 1/2], [1/2, 1 - x]]: det = -x^2 - x + 7/4 >= 0
    "det_offset_2x2": (_problem(
        1, [1.0], [(2, [(-1, 0, 0, 2.0), (-1, 0, 1, 0.5), (-1, 1, 1, 1.0),
                        (0, 0, 0, 1.0), (0, 1, 1, -1.0)])]),
        SQ2 - 0.5, [SQ2 - 0.5]),
    # [[x1, 1], [1, x2]] psd <=> x1 x2 >= 1, x >= 0; max -(x1 + x2) = -2
    "hyperbola_2x2": (_problem(
        2, [-1.0, -1.0],
        [(2, [(-1, 0, 1, 1.0), (0, 0, 0, 1.0), (1, 1, 1, 1.0)])]),
        -2.0, [1.0, 1.0]),
    # -- 3x3 blocks (grid-confirmed designs) ------------------------------
    # max t with tridiag(1,2,1) - t I psd: eigenvalues 2, 2 +- sqrt 2
    "eig_min_3x3": (_problem(
        1, [1.0], [(3, [(-1, 0, 0, 2.0), (-1, 1, 1, 2.0), (-1, 2, 2, 2.0),
                        (-1, 0, 1, 1.0), (-1, 1, 2, 1.0),
                        (0, 0, 0, -1.0), (0, 1, 1, -1.0), (0, 2, 2, -1.0)])]),
        2.0 - SQ2, [2.0 - SQ2]),
    # [[1, x, 0], [x, 1, x], [0, x, 1]]: det = 1 - 2 x^2
    "tridiag_3x3": (_problem(
        1, [1.0], [(3, [(-1, 0, 0, 1.0), (-1, 1, 1, 1.0), (-1, 2, 2, 1.0),
                        (0, 0, 1, 1.0), (0, 1, 2, 1.0)])]),
        1.0 / SQ2, [1.0 / SQ2]),
    # arrow [[1, x1, x2], [x1, 1, 0], [x2, 0, 1]]: det = 1 - x1^2 - x2^2
    "arrow_3x3": (_problem(
        2, [1.0, 1.0],
        [(3, [(-1, 0, 0, 1.0), (-1, 1, 1, 1.0), (-1, 2, 2, 1.0),
              (0, 0, 1, 1.0), (1, 0, 2, 1.0)])]),
        SQ2, [1.0 / SQ2, 1.0 / SQ2]),
    "arrow_weighted_3x3": (_problem(
        2, [2.0, 1.0],
        [(3, [(-1, 0, 0, 1.0), (-1, 1, 1, 1.0), (-1, 2, 2, 1.0),
              (0, 0, 1, 1.0), (1, 0, 2, 1.0)])]),
        SQ5, [2.0 / SQ5, 1.0 / SQ5]),
    # [[1, x1, x1], [x1, 1, x2], [x1, x2, 1]]: det = (1 - x2)(1 + x2 - 2 x1^2);
    # x1 = 1 feasible only with x2 = 1
    "saddle_3x3": (_problem(
        2, [1.0, 0.0],
        [(3, [(-1, 0, 0, 1.0), (-1, 1, 1, 1.0), (-1, 2, 2, 1.0),
              (0, 0, 1, 1.0), (0, 0, 2, 1.0), (1, 1, 2, 1.0)])]),
        1.0, [1.0, 1.0]),
    # binding across a 2x2 (x <= sqrt 2) and a 3x3 (x <= 1)
    "mixed_blocks": (_problem(
        1, [1.0],
        [(2, [(-1, 0, 0, 1.0), (-1, 1, 1, 2.0), (0, 0, 1, 1.0)]),
         (3, [(-1, 0, 0, 1.0), (-1, 1, 1, 1.0), (-1, 2, 2, 1.0),
              (0, 0, 2, 1.0)])]),
        1.0, [1.0]),
    # lp feasibility shrunk to a point: 2 <= x <= 2
    "lp_pinpoint": (_problem(
        1, [1.0], [(1, [(-1, 0, 0, -2.0), (0, 0, 0, 1.0)]),
                   (1, [(-1, 0, 0, 2.0), (0, 0, 0, -1.0)])]),
        2.0, [2.0]),
}

# name -> (problem, expected status)
INFEASIBLE_CASES = {
    # x >= 1 and x <= 0
    "infeasible_lp": _problem(
        1, [1.0], [(1, [(-1, 0, 0, -1.0), (0, 0, 0, 1.0)]),
                   (1, [(0, 0, 0, -1.0)])]),
    # [[1, x], [x, -1]] has a negative diagonal entry for every x
    "infeasible_diag": _problem(
        1, [1.0], [(2, [(-1, 0, 0, 1.0), (-1, 1, 1, -1.0), (0, 0, 1, 1.0)])]),
    # x <= 1 and x >= 2
    "infeasible_gap": _problem(
        1, [1.0], [(1, [(-1, 0, 0, 1.0), (0, 0, 0, -1.0)]),
                   (1, [(-1, 0, 0, -2.0), (0, 0, 0, 1.0)])]),
}

# objective unbounded above: x >= -1 only
UNBOUNDED_CASE = _problem(1, [1.0], [(1, [(-1, 0, 0, 1.0), (0, 0, 0, 1.0)])])
