"""Truncated moment problems over semialgebraic sets, decided by SDP.

Given finitely many moments y = (y_a)_{|a| <= d} and a set
K = {x : g_1(x) >= 0, ..., g_m(x) >= 0}, decide whether y admits a
representing measure on K.  Positive answers come with an explicit finitely
atomic measure recovered from a flat moment-matrix extension; negative
answers come with a polynomial certificate p, nonnegative on K via an
explicit weighted sum-of-squares decomposition, with <p, y> < 0.

Entry points: `check_membership` (decide, with certificates either way),
`find_measure` (search for an atomic measure directly), and the `tmoment`
command-line tool over JSON instance files.
"""

from .flatatoms import AtomicMeasure, extract_atoms, find_flat_truncation, verify_measure
from .moments import Polynomial, Tms, localizing_matrix, moment_matrix, riesz, shift
from .monomials import MonomialBasis, basis, monomial_count
from .pipeline import (
    FlatSearchResult,
    MembershipVerdict,
    NonexistenceCertificate,
    PipelineOptions,
    check_membership,
    extract_certificate,
    find_measure,
    random_benchmark,
)
from .refmeasures import ReferenceSpec, default_reference
from .relax import build_feasibility, build_flat_search, build_lambda, eta_star_direct
from .semialg import SemialgebraicSet, ball_set, box_set

__all__ = [
    "AtomicMeasure",
    "FlatSearchResult",
    "MembershipVerdict",
    "MonomialBasis",
    "NonexistenceCertificate",
    "PipelineOptions",
    "Polynomial",
    "ReferenceSpec",
    "SemialgebraicSet",
    "Tms",
    "ball_set",
    "basis",
    "box_set",
    "build_feasibility",
    "build_flat_search",
    "build_lambda",
    "check_membership",
    "default_reference",
    "eta_star_direct",
    "extract_atoms",
    "extract_certificate",
    "find_flat_truncation",
    "find_measure",
    "localizing_matrix",
    "moment_matrix",
    "monomial_count",
    "random_benchmark",
    "riesz",
    "shift",
    "verify_measure",
]

__version__ = "0.1.0"
