"""Moment relaxations: LMI encodings of the membership and extension problems.

Every problem here shares one variable layout over a tms w of degree 2k:
entries w_a with |a| <= d are pinned to the data (w|_d = y, or y - lambda*xi
when the shift multiplier lambda is a variable), and the remaining entries
are free scalars.  Constraints are localizing-matrix LMIs

    M_{k - ceil(deg g/2)}(g * w)  psd

over a generator family (quadratic module or preordering).  Pinning makes
the equality constraints exact by construction and keeps the SDPs small.

Five kinds:

  lambda          maximize lambda s.t. family LMIs, w|_d = y - lambda*xi
  feasibility     zero objective     s.t. family LMIs, w|_d = y
  shift_rn        maximize eta  s.t. M_k(w) psd, w|_d = y - eta*xi
  flat_search     minimize c.w  s.t. family LMIs + ball LMI, w|_d = y
  flat_search_rn  minimize C . M_k(w)  s.t. M_k(w) psd, w|_d = y

The decoder maps an SDP solution back to (lambda, w).  Coordinate rescaling
x -> x / R (applied by the pipeline when a radius is known) has helpers at
the bottom; the multiplier values lambda/eta are invariant under it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .monomials import basis, degree_count, monomial_count
from .moments import Polynomial, Tms, half_degree, moment_matrix
from .semialg import FamilyMember, GeneratorFamily, SemialgebraicSet
from .sdp import SdpProblem, SdpSolution

#: family label of the auxiliary ball block rho = R^2 - |x|^2 in flat_search
BALL_LABEL = ("ball",)

#: family label of the constant-one block in the R^n problems
UNIT_LABEL = ()

MODES = {
    "qm": "qm",
    "quadratic_module": "qm",
    "pre": "pre",
    "preordering": "pre",
}


def normalize_mode(mode: str) -> str:
    try:
        return MODES[mode]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}; want quadratic_module or preordering") from None


@dataclass
class Relaxation:
    """An LMI-encoded moment problem plus everything needed to decode it.

    Free variable layout: [lambda]? then w_a for |a| in (d, 2k] in graded
    order.  `members` and `block_orders` align index-for-index with
    `problem.blocks`, so dual matrices can be read back as Gram matrices of
    sum-of-squares multipliers per family member.
    """

    kind: str
    k: int
    y: Tms
    xi: Tms | None
    members: tuple[FamilyMember, ...]
    block_orders: tuple[int, ...]
    problem: SdpProblem
    has_lambda: bool
    mode: str | None = None
    c_full: np.ndarray | None = None

    @property
    def n(self) -> int:
        return self.y.n

    @property
    def d(self) -> int:
        return self.y.d

    @property
    def num_pinned(self) -> int:
        return monomial_count(self.n, self.d)

    @property
    def free_offset(self) -> int:
        return 1 if self.has_lambda else 0

    def decode(self, sol) -> tuple[float | None, Tms]:
        """Solution vector -> (lambda or None, w of degree 2k)."""
        if isinstance(sol, SdpSolution) and sol.x is None:
            raise ValueError(f"solution carries no point to decode (status {sol.status!r})")
        x = np.asarray(sol.x if isinstance(sol, SdpSolution) else sol, dtype=float)
        if x.shape != (self.problem.num_vars,):
            raise ValueError(f"solution has {x.shape} entries, problem has {self.problem.num_vars}")
        lam = float(x[0]) if self.has_lambda else None
        vals = np.empty(monomial_count(self.n, 2 * self.k))
        npin = self.num_pinned
        vals[:npin] = self.y.values
        if self.has_lambda:
            vals[:npin] -= lam * self.xi.values[:npin]
        vals[npin:] = x[self.free_offset:]
        return lam, Tms(self.n, 2 * self.k, vals)

    def encode(self, lam: float | None, w: Tms) -> np.ndarray:
        """Inverse of decode; the pinned prefix of w is dropped, not checked."""
        if w.n != self.n or w.d != 2 * self.k:
            raise ValueError("w has the wrong shape for this relaxation")
        head = [] if not self.has_lambda else [0.0 if lam is None else float(lam)]
        return np.concatenate([head, w.values[self.num_pinned:]])

    def objective_value(self, w: Tms) -> float | None:
        """c . w for the minimization kinds; None for the others."""
        if self.c_full is None:
            return None
        return float(np.dot(self.c_full, w.values))


# -- shared LMI emission ----------------------------------------------------


def _validate_orders(members, k):
    orders = []
    for mem in members:
        t = k - mem.half_deg
        if t < 0:
            raise ValueError(
                f"order k={k} too small for family member {mem.label} "
                f"of degree {mem.poly.degree}"
            )
        orders.append(t)
    return tuple(orders)


def _emit(problem: SdpProblem, members, orders, y: Tms, xi: Tms | None, has_lambda: bool):
    """Append one localizing-matrix LMI per family member.

    Entry (i, j) of block nu reads sum_g (g_nu)_g w_{b_i + b_j + g}; pinned
    w entries contribute to F_0 (and to lambda's coefficient matrix when
    present), free entries to their variable's coefficient matrix.
    """
    n, d, = y.n, y.d
    k = max(orders[i] + members[i].half_deg for i in range(len(members)))
    b2k = basis(n, 2 * k)
    npin = monomial_count(n, d)
    off = 1 if has_lambda else 0
    for mem, t in zip(members, orders):
        bt = basis(n, t)
        blk = problem.new_block(len(bt))
        terms = [(np.asarray(g, dtype=np.int64), c) for g, c in mem.poly.terms.items()]
        for i in range(len(bt)):
            for j in range(i, len(bt)):
                s = bt.exponents[i] + bt.exponents[j]
                for gexp, gc in terms:
                    idx = b2k.index_of(s + gexp)
                    if idx < npin:
                        blk.add(-1, i, j, gc * y.values[idx])
                        if has_lambda:
                            blk.add(0, i, j, -gc * xi.values[idx])
                    else:
                        blk.add(off + idx - npin, i, j, gc)


def _check_pair(y: Tms, xi: Tms | None, k: int):
    if 2 * k < y.d:
        raise ValueError(f"need 2k >= d, got k={k} for degree-{y.d} data")
    if xi is not None:
        if xi.n != y.n:
            raise ValueError("reference tms has wrong variable count")
        if xi.d < y.d:
            raise ValueError(f"reference tms degree {xi.d} < data degree {y.d}")


def _num_free(n: int, d: int, k: int) -> int:
    return monomial_count(n, 2 * k) - monomial_count(n, d)


def _unit_member(n: int) -> FamilyMember:
    return FamilyMember(label=UNIT_LABEL, poly=Polynomial.constant(n, 1.0), half_deg=0)


# -- problem builders --------------------------------------------------------


def build_lambda(y: Tms, xi: Tms, K: SemialgebraicSet, k: int,
                 mode: str = "quadratic_module") -> Relaxation:
    """maximize lambda  s.t.  w|_d = y - lambda*xi  and the family LMIs of K."""
    _check_pair(y, xi, k)
    if K.n != y.n:
        raise ValueError("set and data dimension mismatch")
    mode = normalize_mode(mode)
    fam = K.family(mode)
    orders = _validate_orders(fam.members, k)
    nfree = _num_free(y.n, y.d, k)
    c = np.zeros(1 + nfree)
    c[0] = 1.0
    problem = SdpProblem(num_vars=1 + nfree, objective=c)
    _emit(problem, fam.members, orders, y, xi, has_lambda=True)
    return Relaxation(kind="lambda", k=k, y=y, xi=xi, members=fam.members,
                      block_orders=orders, problem=problem, has_lambda=True, mode=mode)


def build_feasibility(y: Tms, K: SemialgebraicSet, k: int,
                      mode: str = "quadratic_module") -> Relaxation:
    """find w  s.t.  w|_d = y  and the family LMIs of K (zero objective)."""
    _check_pair(y, None, k)
    if K.n != y.n:
        raise ValueError("set and data dimension mismatch")
    mode = normalize_mode(mode)
    fam = K.family(mode)
    orders = _validate_orders(fam.members, k)
    nfree = _num_free(y.n, y.d, k)
    problem = SdpProblem(num_vars=nfree, objective=np.zeros(nfree))
    _emit(problem, fam.members, orders, y, None, has_lambda=False)
    return Relaxation(kind="feasibility", k=k, y=y, xi=None, members=fam.members,
                      block_orders=orders, problem=problem, has_lambda=False, mode=mode)


def _require_pd_reference(xi: Tms, d: int) -> None:
    d0 = d // 2
    M = moment_matrix(xi, d0).entries
    w = sla.eigvalsh(M)
    if w[0] <= 1e-12 * max(1.0, w[-1]):
        raise ValueError(
            f"reference moment matrix of order {d0} is numerically singular "
            f"(min eigenvalue {w[0]:.3e}); the shift problem needs it positive definite"
        )


def build_shift_rn(y: Tms, xi: Tms, k: int) -> Relaxation:
    """maximize eta  s.t.  w|_d = y - eta*xi  and  M_k(w) psd  (K = R^n)."""
    _check_pair(y, xi, k)
    _require_pd_reference(xi, y.d)
    members = (_unit_member(y.n),)
    orders = _validate_orders(members, k)
    nfree = _num_free(y.n, y.d, k)
    c = np.zeros(1 + nfree)
    c[0] = 1.0
    problem = SdpProblem(num_vars=1 + nfree, objective=c)
    _emit(problem, members, orders, y, xi, has_lambda=True)
    return Relaxation(kind="shift_rn", k=k, y=y, xi=xi, members=members,
                      block_orders=orders, problem=problem, has_lambda=True)


def eta_star_direct(y: Tms, xi: Tms) -> float:
    """Largest eta with M_{d0}(y) - eta*M_{d0}(xi) psd, by eigendecomposition.

    Equals the optimum of the shift problem at every order k; the SDP route
    and this direct route cross-check each other to 1e-6.
    """
    _check_pair(y, xi, (y.d + 1) // 2)
    _require_pd_reference(xi, y.d)
    d0 = y.d // 2
    My = moment_matrix(y, d0).entries
    Mxi = moment_matrix(xi, d0).entries
    return float(sla.eigh(My, Mxi, eigvals_only=True)[0])


def ball_polynomial(n: int, radius: float) -> Polynomial:
    """rho = radius^2 - sum_i x_i^2."""
    p = Polynomial.constant(n, radius * radius)
    for i in range(n):
        p = p - Polynomial.variable(n, i) * Polynomial.variable(n, i)
    return p


def build_flat_search(y: Tms, K: SemialgebraicSet, k: int, c: np.ndarray) -> Relaxation:
    """minimize c . w  s.t.  w|_d = y, family LMIs of K, ball LMI of radius R.

    The ball block M_{k-1}(rho * w) with rho = R^2 - |x|^2 bounds the feasible
    set (every feasible w has ||w||_2 <= y_0/(1-R^2) when R < 1), which is
    what makes generic-objective minimizers land on flat extensions.
    """
    _check_pair(y, None, k)
    if K.n != y.n:
        raise ValueError("set and data dimension mismatch")
    if K.radius is None:
        raise ValueError("flat search over a compact set needs K.radius")
    c = np.asarray(c, dtype=float)
    want = monomial_count(y.n, 2 * k)
    if c.shape != (want,):
        raise ValueError(f"objective vector needs length {want}, got {c.shape}")
    fam = K.quadratic_module_family()
    rho = ball_polynomial(y.n, K.radius)
    members = fam.members + (FamilyMember(label=BALL_LABEL, poly=rho, half_deg=1),)
    orders = _validate_orders(members, k)
    npin = monomial_count(y.n, y.d)
    problem = SdpProblem(num_vars=want - npin, objective=-c[npin:])
    _emit(problem, members, orders, y, None, has_lambda=False)
    return Relaxation(kind="flat_search", k=k, y=y, xi=None, members=members,
                      block_orders=orders, problem=problem, has_lambda=False,
                      mode="qm", c_full=c)


def build_flat_search_rn(y: Tms, k: int, C: np.ndarray) -> Relaxation:
    """minimize C . M_k(w)  s.t.  w|_d = y, M_k(w) psd  (K = R^n, C psd)."""
    _check_pair(y, None, k)
    C = np.asarray(C, dtype=float)
    nk = monomial_count(y.n, k)
    if C.shape != (nk, nk):
        raise ValueError(f"objective matrix needs shape ({nk}, {nk}), got {C.shape}")
    if np.max(np.abs(C - C.T)) > 1e-12 * max(1.0, np.max(np.abs(C))):
        raise ValueError("objective matrix must be symmetric")
    if sla.eigvalsh(C)[0] < -1e-10:
        raise ValueError("objective matrix must be psd (min eigenvalue < -1e-10)")
    bk = basis(y.n, k)
    b2k = basis(y.n, 2 * k)
    c = np.zeros(monomial_count(y.n, 2 * k))
    for i in range(nk):
        for j in range(nk):
            c[b2k.index_of(bk.exponents[i] + bk.exponents[j])] += C[i, j]
    members = (_unit_member(y.n),)
    orders = _validate_orders(members, k)
    npin = monomial_count(y.n, y.d)
    problem = SdpProblem(num_vars=len(c) - npin, objective=-c[npin:])
    _emit(problem, members, orders, y, None, has_lambda=False)
    return Relaxation(kind="flat_search_rn", k=k, y=y, xi=None, members=members,
                      block_orders=orders, problem=problem, has_lambda=False, c_full=c)


# -- objective vectors for flat search ---------------------------------------


def objective_ones(n: int, k: int) -> np.ndarray:
    """All-ones c: minimizes the plain sum of the entries of w."""
    return np.ones(monomial_count(n, 2 * k))


def objective_trace(n: int, k: int) -> np.ndarray:
    """c with c.w = trace M_k(w): indicator of the all-even exponents."""
    b = basis(n, 2 * k)
    c = np.zeros(len(b))
    for i in range(len(b)):
        if not np.any(b.exponents[i] % 2):
            c[i] = 1.0
    return c


def trace_matrix(n: int, k: int) -> np.ndarray:
    """Identity objective matrix for the R^n flat search (trace objective)."""
    return np.eye(monomial_count(n, k))


def ones_matrix(n: int, k: int) -> np.ndarray:
    """Rank-one all-ones psd objective matrix, C . M_k(w) = sum of all entries."""
    nk = monomial_count(n, k)
    return np.ones((nk, nk))


def objective_seeded(n: int, k: int, seed: int) -> np.ndarray:
    """Generic random c, drawn degreewise so larger k extends smaller k.

    Degree-t coefficients come from their own Philox stream keyed (seed, t);
    re-running with a larger k reproduces every earlier coefficient, which
    keeps the search objectives consistent as the hierarchy deepens.
    """
    parts = []
    for t in range(2 * k + 1):
        rng = np.random.Generator(np.random.Philox(key=[seed, t]))
        parts.append(rng.standard_normal(degree_count(n, t)))
    return np.concatenate(parts)


def seeded_matrix(n: int, k: int, seed: int) -> np.ndarray:
    """Random psd objective matrix L L^T for the R^n flat search."""
    nk = monomial_count(n, k)
    rng = np.random.Generator(np.random.Philox(key=[seed, 2 * k + 1]))
    L = rng.standard_normal((nk, nk)) / np.sqrt(nk)
    return L @ L.T


# -- coordinate rescaling x -> x / R ------------------------------------------


def _degree_weights(n: int, d: int, R: float) -> np.ndarray:
    b = basis(n, d)
    return R ** b.degrees.astype(float)


def rescale_tms(y: Tms, R: float) -> Tms:
    """Moments of the pushforward under x -> x / R: y'_a = y_a / R^|a|."""
    return Tms(y.n, y.d, y.values / _degree_weights(y.n, y.d, R))


def unscale_tms(w: Tms, R: float) -> Tms:
    """Inverse of rescale_tms."""
    return Tms(w.n, w.d, w.values * _degree_weights(w.n, w.d, R))


def rescale_polynomial(g: Polynomial, R: float) -> Polynomial:
    """g'(x') = g(R x'); nonnegativity on K maps to nonnegativity on K/R."""
    return Polynomial(g.n, {a: c * R ** sum(a) for a, c in g.terms.items()})


def unscale_polynomial(p: Polynomial, R: float) -> Polynomial:
    """p(x) = p'(x / R): inverse substitution, for certificates."""
    return Polynomial(p.n, {a: c / R ** sum(a) for a, c in p.terms.items()})


def rescale_set(K: SemialgebraicSet, R: float) -> SemialgebraicSet:
    """K/R, with the radius and interior witness mapped along."""
    witness = None
    if K.interior_witness is not None:
        center, r = K.interior_witness
        witness = (np.asarray(center, dtype=float) / R, r / R)
    return SemialgebraicSet(
        n=K.n,
        generators=[rescale_polynomial(g, R) for g in K.generators],
        radius=None if K.radius is None else K.radius / R,
        interior_witness=witness,
    )


def unscale_points(points: np.ndarray, R: float) -> np.ndarray:
    """Atoms found in scaled coordinates, mapped back: u = R u'."""
    return np.asarray(points, dtype=float) * R


def unscale_gram(G: np.ndarray, n: int, order: int, R: float) -> np.ndarray:
    """Gram of sigma'(x/R) in the degree-`order` basis: diagonal congruence."""
    D = _degree_weights(n, order, 1.0 / R)
    return G * np.outer(D, D)


def gram_polynomial(G: np.ndarray, n: int, order: int) -> Polynomial:
    """sigma(x) = [x]_order^T G [x]_order as a sparse polynomial."""
    b = basis(n, order)
    G = np.asarray(G, dtype=float)
    terms: dict[tuple[int, ...], float] = {}
    for i in range(len(b)):
        for j in range(len(b)):
            a = tuple(int(v) for v in b.exponents[i] + b.exponents[j])
            terms[a] = terms.get(a, 0.0) + G[i, j]
    return Polynomial(n, terms)
