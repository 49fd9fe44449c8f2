"""Numerical rank, flatness tests, and atom extraction from flat sequences.

A tms w of even degree 2s is *flat* (relative to the generator step d_g)
when rank M_{s-d_g}(w) = rank M_s(w).  A flat w with psd moment and
localizing matrices is the moment sequence of a unique measure carried by
rank-many points; `extract_atoms` recovers those points and weights through
multiplication-matrix eigendecomposition, and `verify_measure` re-checks the
result against the data without reusing any of the machinery that found it.

Ranks are floating-point decisions: singular values below an absolute
threshold (default 1e-6) are treated as zero, with an optional relative
mode.  Every report carries the spectrum it judged.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .monomials import basis
from .moments import Tms, half_degree, localizing_matrix, moment_matrix, tms_from_atoms
from .semialg import SemialgebraicSet

RANK_TOL = 1e-6          # singular values below this count as zero
PIVOT_TOL = 1e-8         # column-echelon pivot acceptance
EIG_CLUSTER_TOL = 1e-7   # eigenvalues closer than this form one cluster
COORD_AGREE_TOL = 1e-6   # clustered eigenvectors must agree on the atom
WEIGHT_TOL = 1e-8        # weights in (-tol, tol] are dropped; below -tol fail
PSD_SLACK = 1e-7         # matrices count as psd down to -PSD_SLACK*(1+|M|)


class ExtractionError(RuntimeError):
    """Atom extraction could not certify its output; carries diagnostics."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class RankReport:
    """Numerical rank decision for one symmetric matrix."""

    label: str
    singular_values: np.ndarray
    rank: int
    threshold: float
    relative: bool = False


def numerical_rank(M: np.ndarray, tau: float = RANK_TOL, label: str = "",
                   relative: bool = False) -> RankReport:
    """Rank of a symmetric matrix: count singular values above the threshold.

    The default threshold is absolute (singular values below tau are zero);
    relative mode uses tau * max(1, sigma_max) instead.
    """
    M = np.asarray(M, dtype=float)
    if M.shape[0] != M.shape[1]:
        raise ValueError("rank report needs a square (symmetric) matrix")
    sv = np.sort(np.abs(np.linalg.eigvalsh(M)))[::-1]
    thresh = tau * max(1.0, sv[0] if len(sv) else 0.0) if relative else tau
    return RankReport(label=label, singular_values=sv,
                      rank=int(np.sum(sv > thresh)), threshold=thresh,
                      relative=relative)


def is_flat(w: Tms, d_g: int, tau: float = RANK_TOL) -> bool:
    """rank M_{s-d_g}(w) == rank M_s(w) for w of even degree 2s."""
    if w.d % 2:
        raise ValueError(f"flatness needs even degree, got {w.d}")
    s = w.d // 2
    if d_g < 1 or s < d_g:
        raise ValueError(f"flatness step d_g={d_g} invalid for order s={s}")
    low = numerical_rank(moment_matrix(w, s - d_g).entries, tau)
    high = numerical_rank(moment_matrix(w, s).entries, tau)
    return low.rank == high.rank


def _psd_ok(M: np.ndarray) -> bool:
    ev = np.linalg.eigvalsh(M)
    return ev[0] >= -PSD_SLACK * (1.0 + abs(ev[-1]))


def find_flat_truncation(w: Tms, d: int, d_g: int,
                         K: SemialgebraicSet | None = None,
                         tau: float = RANK_TOL):
    """First even t >= max(d, 2 d_g) with w|_t flat and all matrices psd.

    Checks, for s = t/2: M_s psd, rank M_{s-d_g} = rank M_s, and (when K is
    given) every localizing matrix M_{s - ceil(deg g/2)}(g * w|_t) psd.
    Returns (t, (low RankReport, high RankReport)) or None.
    """
    start = max(d, 2 * d_g)
    if start % 2:
        start += 1
    for t in range(start, w.d + 1, 2):
        s = t // 2
        wt = w.truncate(t)
        Ms = moment_matrix(wt, s).entries
        if not _psd_ok(Ms):
            continue
        low = numerical_rank(moment_matrix(wt, s - d_g).entries, tau,
                             label=f"M_{s - d_g}")
        high = numerical_rank(Ms, tau, label=f"M_{s}")
        if low.rank != high.rank:
            continue
        if K is not None:
            ok = True
            for g in K.generators:
                if s - half_degree(g) < 0:
                    ok = False
                    break
                if not _psd_ok(localizing_matrix(g, wt, s).entries):
                    ok = False
                    break
            if not ok:
                continue
        return t, (low, high)
    return None


def rank_profile(w: Tms, d_g: int, tau: float = RANK_TOL) -> list[dict]:
    """Rank pairs (M_{s-d_g}, M_s) for every even truncation, for reporting."""
    out = []
    for t in range(2 * d_g, w.d + 1, 2):
        s = t // 2
        wt = w.truncate(t)
        low = numerical_rank(moment_matrix(wt, s - d_g).entries, tau)
        high = numerical_rank(moment_matrix(wt, s).entries, tau)
        out.append({"t": t, "rank_low": low.rank, "rank_high": high.rank})
    return out


@dataclass
class AtomicMeasure:
    """Finitely many weighted points, with the reconstruction residual."""

    points: np.ndarray            # (r, n)
    weights: np.ndarray           # (r,), strictly positive
    residual: float = float("nan")

    def __post_init__(self):
        self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
        self.weights = np.asarray(self.weights, dtype=float)
        if self.points.shape[0] != self.weights.shape[0]:
            raise ValueError("points/weights length mismatch")

    def __len__(self) -> int:
        return int(self.weights.shape[0])

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    def moments(self, d: int) -> Tms:
        n = self.points.shape[1]
        return tms_from_atoms(n, d, self.points, self.weights)

    def to_json(self) -> dict:
        return {
            "points": [[float(v) for v in u] for u in self.points],
            "weights": [float(a) for a in self.weights],
            "residual": float(self.residual),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "AtomicMeasure":
        pts = np.asarray(obj["points"], dtype=float)
        if pts.size == 0:
            pts = pts.reshape(0, obj.get("n", 1))
        return cls(points=pts, weights=np.asarray(obj["weights"], dtype=float),
                   residual=float(obj.get("residual", float("nan"))))


def _column_echelon(V: np.ndarray, pivot_tol: float):
    """Reduced column echelon form with column partial pivoting.

    Scans rows top-down (graded order); at each step picks the remaining
    column with the largest entry in the current row.  Returns the reduced
    matrix and the pivot-row indices.
    """
    E = np.array(V, dtype=float)
    nrows, ncols = E.shape
    pivot_rows: list[int] = []
    col = 0
    for row in range(nrows):
        if col == ncols:
            break
        sub = np.abs(E[row, col:])
        best = int(np.argmax(sub)) + col
        if np.abs(E[row, best]) <= pivot_tol:
            continue
        E[:, [col, best]] = E[:, [best, col]]
        E[:, col] /= E[row, col]
        for c in range(ncols):
            if c != col and E[row, c] != 0.0:
                E[:, c] -= E[row, c] * E[:, col]
        pivot_rows.append(row)
        col += 1
    return E, pivot_rows


def extract_atoms(w: Tms, tau: float = RANK_TOL, d_g: int = 1,
                  seed: int = 2008) -> AtomicMeasure:
    """Recover the unique atomic measure behind a flat tms of degree 2s.

    Procedure: factor M_s(w) = V V^T through its top-rank eigenpairs, reduce
    V to column echelon form to pick a monomial basis B from the pivot rows,
    assemble the multiplication-by-x_i matrices on span(B), and read atom
    coordinates off the joint eigenvectors of a random convex combination
    (fixed seed).  Weights solve the least-squares moment system over
    |alpha| <= s.  The reconstruction residual over degree <= 2s - 2 d_g is
    recorded on the result; callers decide what residual they accept.
    """
    if w.d % 2:
        raise ValueError(f"extraction needs even degree, got {w.d}")
    s = w.d // 2
    n = w.n
    M = moment_matrix(w, s).entries
    report = numerical_rank(M, tau, label=f"M_{s}")
    r = report.rank
    res_deg = max(0, 2 * s - 2 * d_g)
    if r == 0:
        resid = float(np.max(np.abs(w.truncate(res_deg).values))) if res_deg >= 0 else 0.0
        return AtomicMeasure(points=np.zeros((0, n)), weights=np.zeros(0), residual=resid)

    evals, evecs = np.linalg.eigh(M)
    lam = evals[::-1][:r]
    if lam[-1] <= 0:
        raise ExtractionError(
            "moment matrix has nonpositive leading eigenvalues at the chosen rank",
            eigenvalues=evals, rank=r)
    V = evecs[:, ::-1][:, :r] * np.sqrt(lam)

    E, pivot_rows = _column_echelon(V, PIVOT_TOL)
    if len(pivot_rows) < r:
        raise ExtractionError(
            f"echelon degeneracy: found {len(pivot_rows)} pivots for rank {r}",
            pivot_rows=pivot_rows, rank=r, singular_values=report.singular_values)

    bs = basis(n, s)
    pivot_exps = [bs.exponent(i) for i in pivot_rows]
    mult = []
    for i in range(n):
        Ni = np.empty((r, r))
        for j, beta in enumerate(pivot_exps):
            shifted = tuple(b + (1 if t == i else 0) for t, b in enumerate(beta))
            if shifted not in bs:
                raise ExtractionError(
                    "pivot monomial at top degree; the input does not look flat",
                    pivot_exponent=beta, variable=i)
            Ni[:, j] = E[bs.index_of(shifted), :]
        # rows of E express monomials in the pivot basis, so x_i action on
        # the point-evaluation vector b(u) is N_i^T b(u) = u_i b(u)
        mult.append(Ni.T)

    rng = np.random.Generator(np.random.Philox(key=seed))
    coeffs = rng.random(n)
    coeffs /= coeffs.sum()
    N = sum(c * Mi for c, Mi in zip(coeffs, mult))
    eigvals, eigvecs = np.linalg.eig(N)
    if np.max(np.abs(eigvals.imag)) > 1e-6 * (1.0 + np.max(np.abs(eigvals.real))):
        raise ExtractionError("complex eigenvalue residue in the multiplication matrix",
                              eigenvalues=eigvals)

    order = np.argsort(eigvals.real)
    eigvals = eigvals.real[order]
    eigvecs = eigvecs[:, order]

    def read_point(v: np.ndarray) -> np.ndarray:
        vr = v.real
        ell = int(np.argmax(np.abs(vr)))
        pt = np.array([float(np.dot(Mi[ell, :], vr) / vr[ell]) for Mi in mult])
        return pt

    points: list[np.ndarray] = []
    i = 0
    while i < r:
        j = i + 1
        while j < r and eigvals[j] - eigvals[j - 1] < EIG_CLUSTER_TOL:
            j += 1
        cluster_pts = [read_point(eigvecs[:, t]) for t in range(i, j)]
        base = cluster_pts[0]
        for pt in cluster_pts[1:]:
            if np.max(np.abs(pt - base)) > COORD_AGREE_TOL:
                raise ExtractionError(
                    "clustered eigenvalues disagree on the atom coordinates",
                    cluster=cluster_pts, eigenvalues=eigvals[i:j])
        points.append(np.mean(cluster_pts, axis=0))
        i = j

    U = np.vstack(points)
    A = bs.evaluate(U).T                     # (len basis_s, #atoms)
    b = w.truncate(s).values
    weights, *_ = np.linalg.lstsq(A, b, rcond=None)

    if np.any(weights < -WEIGHT_TOL):
        raise ExtractionError("negative atom weight",
                              weights=weights, points=U)
    keep = weights > WEIGHT_TOL
    if not np.all(keep):
        warnings.warn(f"dropping {int(np.sum(~keep))} atoms with negligible weight",
                      stacklevel=2)
        U, weights = U[keep], weights[keep]

    recon = tms_from_atoms(n, res_deg, U, weights)
    resid = float(np.max(np.abs(recon.values - w.truncate(res_deg).values)))
    return AtomicMeasure(points=U, weights=weights, residual=resid)


@dataclass
class VerifyReport:
    """Independent re-check of an atomic measure against data and set."""

    moment_residual: float
    generator_min: float
    tol: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = (self.moment_residual <= self.tol
                       and self.generator_min >= -self.tol)


def verify_measure(y: Tms, mu: AtomicMeasure, K: SemialgebraicSet | None,
                   tol: float = 1e-5) -> VerifyReport:
    """Recompute the moments of mu and the generator values at its atoms.

    Passes iff max_alpha |sum_j a_j u_j^alpha - y_alpha| <= tol over degree
    <= y.d and every generator (and the radius bound, when K carries one) is
    >= -tol at every atom.  Shares nothing with the extraction internals.
    """
    recon = tms_from_atoms(y.n, y.d, mu.points, mu.weights)
    resid = float(np.max(np.abs(recon.values - y.values)))
    gmin = float("inf")
    if K is not None and len(mu):
        for g in K.generators:
            gmin = min(gmin, float(np.min(g(mu.points))))
        if K.radius is not None:
            slack = K.radius**2 - np.einsum("ij,ij->i", mu.points, mu.points)
            gmin = min(gmin, float(np.min(slack)))
    return VerifyReport(moment_residual=resid, generator_min=gmin, tol=tol)
