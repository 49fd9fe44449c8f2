"""Offline re-verification of verdict records, from their JSON form alone.

This module is deliberately self-contained: monomial enumeration, polynomial
expansion, and moment pairing are reimplemented here from scratch (numpy
only), sharing no code with the SDP solver or the relaxation builders.  A
bug in the main decision path therefore cannot silently certify itself; the
records either check out under this independent arithmetic or they fail.

Everything operates on plain dict/list data as found in the serialized
records:

  polynomial      {"terms": [[[a1..an], coeff], ...]}
  certificate     {"p": polynomial, "multipliers": [{"generator": polynomial,
                   "order": t, "gram": [[..]]}], "value": <p,y>,
                   "pairing": <p,xi>, "normalization": "reference"|"ray"}
  measure         {"points": [[..]], "weights": [..]}

Moment vectors are flat lists in graded lexicographic order (within each
total degree, exponent tuples descending), the same convention the rest of
the package uses; the enumeration below is an independent implementation of
that order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: PSD slack for Gram blocks: min eig >= -PSD_TOL * (1 + |max eig|)
PSD_TOL = 1e-8

#: sum-of-squares identity closure: |p - sum sigma*g|_inf <= ID_TOL * (1 + |p|_inf)
ID_TOL = 1e-6

#: a certificate must achieve <p, y> at or below this
VALUE_CUT = -1e-8

#: normalization slack for <p, xi> = 1 (or <p, y> = -1 on the ray route)
NORM_TOL = 1e-6

#: default absolute residual bound for measure verification
MEASURE_TOL = 1e-5


# -- independent graded-lex monomial arithmetic -------------------------------


def _degree_block(n: int, t: int):
    if n == 1:
        yield (t,)
        return
    for a1 in range(t, -1, -1):
        for rest in _degree_block(n - 1, t - a1):
            yield (a1,) + rest


def graded_monomials(n: int, d: int) -> list[tuple[int, ...]]:
    """All exponents of degree <= d, graded, lex-descending within a degree."""
    out: list[tuple[int, ...]] = []
    for t in range(d + 1):
        out.extend(_degree_block(n, t))
    return out


def moment_index(n: int, d: int) -> dict[tuple[int, ...], int]:
    return {a: i for i, a in enumerate(graded_monomials(n, d))}


def _terms_of(poly: dict) -> list[tuple[tuple[int, ...], float]]:
    return [(tuple(int(e) for e in a), float(c)) for a, c in poly["terms"]]


def poly_degree(poly: dict) -> int:
    terms = _terms_of(poly)
    return max((sum(a) for a, _ in terms), default=0)


def eval_terms(terms, points: np.ndarray) -> np.ndarray:
    """Evaluate a sparse term list at rows of `points`."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    out = np.zeros(points.shape[0])
    for a, c in terms:
        out += c * np.prod(points ** np.asarray(a, dtype=float), axis=1)
    return out


def pair_terms(terms, moments: np.ndarray, index: dict) -> float:
    """<p, y> = sum_a coeff_a * y_a; `index` maps exponents to positions."""
    total = 0.0
    for a, c in terms:
        if a not in index:
            raise KeyError(f"certificate touches moment {a} outside the data degree")
        total += c * float(moments[index[a]])
    return total


def expand_gram(gram: np.ndarray, n: int, order: int) -> dict[tuple[int, ...], float]:
    """[x]_order^T G [x]_order as a sparse coefficient map."""
    mons = graded_monomials(n, order)
    gram = np.asarray(gram, dtype=float)
    if gram.shape != (len(mons), len(mons)):
        raise ValueError(
            f"gram has shape {gram.shape}, basis of order {order} has {len(mons)} monomials"
        )
    out: dict[tuple[int, ...], float] = {}
    for i, bi in enumerate(mons):
        for j, bj in enumerate(mons):
            a = tuple(x + z for x, z in zip(bi, bj))
            out[a] = out.get(a, 0.0) + gram[i, j]
    return out


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict[tuple[int, ...], float] = {}
    for a, ca in p.items():
        for b, cb in q.items():
            s = tuple(x + z for x, z in zip(a, b))
            out[s] = out.get(s, 0.0) + ca * cb
    return out


# -- check reports ------------------------------------------------------------


@dataclass
class CheckReport:
    """Outcome of one verification: every sub-check with its measured value."""

    passed: bool
    checks: dict = field(default_factory=dict)
    message: str = ""

    def to_json(self) -> dict:
        return {"passed": bool(self.passed), "checks": self.checks, "message": self.message}


def _fail(checks: dict, message: str) -> CheckReport:
    return CheckReport(passed=False, checks=checks, message=message)


# -- certificate verification --------------------------------------------------


def verify_certificate(cert: dict, n: int, d: int, moments,
                       xi_moments=None) -> CheckReport:
    """Re-check a nonexistence certificate from primitives.

    Establishes, independently of how the record was produced:
      1. every Gram block is symmetric PSD (slack PSD_TOL),
      2. p agrees with sum_nu ([x]^T G_nu [x]) * g_nu coefficientwise
         (residual <= ID_TOL * (1 + |p|_inf), including all degrees > d),
      3. <p, y> <= VALUE_CUT, recomputed here,
      4. the recorded normalization holds: <p, xi> = 1 ("reference") or
         <p, y> = -1 ("ray", with <p, xi> = 0 when xi is supplied).

    Together 1-4 say: any measure supported where every g_nu >= 0 pairs
    nonnegatively with p, yet the data pairs strictly negatively, so no
    such measure matches the data.
    """
    checks: dict = {}
    moments = np.asarray(moments, dtype=float)
    p_terms = _terms_of(cert["p"])
    if not p_terms:
        return _fail(checks, "certificate polynomial is identically zero")
    p_deg = max(sum(a) for a, _ in p_terms)
    checks["p_degree"] = p_deg
    if p_deg > d:
        return _fail(checks, f"certificate polynomial has degree {p_deg} > data degree {d}")
    p_inf = max(abs(c) for _, c in p_terms)
    checks["p_inf"] = p_inf

    # 1. Gram blocks
    expansion: dict[tuple[int, ...], float] = {}
    min_eig_worst = np.inf
    for idx, mult in enumerate(cert["multipliers"]):
        G = np.asarray(mult["gram"], dtype=float)
        if G.size == 0:
            continue
        sym = float(np.max(np.abs(G - G.T)))
        if sym > 1e-10 * (1.0 + float(np.max(np.abs(G)))):
            return _fail(checks, f"gram block {idx} is not symmetric (gap {sym:.3e})")
        eigs = np.linalg.eigvalsh(0.5 * (G + G.T))
        slack = PSD_TOL * (1.0 + abs(float(eigs[-1])))
        min_eig_worst = min(min_eig_worst, float(eigs[0]))
        if eigs[0] < -slack:
            return _fail({**checks, "gram_min_eig": float(eigs[0])},
                         f"gram block {idx} has eigenvalue {eigs[0]:.3e} below -{slack:.3e}")
        sigma = expand_gram(G, n, int(mult["order"]))
        g_terms = {a: c for a, c in _terms_of(mult["generator"])}
        for a, c in _poly_mul(sigma, g_terms).items():
            expansion[a] = expansion.get(a, 0.0) + c
    checks["gram_min_eig"] = None if min_eig_worst is np.inf else min_eig_worst

    # 2. identity p = sum sigma_nu g_nu, all degrees
    resid = dict(expansion)
    for a, c in p_terms:
        resid[a] = resid.get(a, 0.0) - c
    id_resid = max((abs(c) for c in resid.values()), default=0.0)
    checks["identity_residual"] = id_resid
    if id_resid > ID_TOL * (1.0 + p_inf):
        return _fail(checks, f"sum-of-squares identity fails to close (residual {id_resid:.3e})")

    # 3. value against the data
    index = moment_index(n, d)
    if len(moments) != len(index):
        return _fail(checks, f"moment vector has {len(moments)} entries, expected {len(index)}")
    value = pair_terms(p_terms, moments, index)
    checks["value"] = value
    recorded = float(cert.get("value", value))
    if abs(value - recorded) > 1e-8 * (1.0 + abs(recorded)):
        return _fail(checks, f"recorded value {recorded:.6e} disagrees with recomputed {value:.6e}")
    if value > VALUE_CUT:
        return _fail(checks, f"<p, y> = {value:.3e} is not negative enough (cut {VALUE_CUT:.0e})")

    # 4. normalization
    norm = cert.get("normalization", "reference")
    checks["normalization"] = norm
    if norm == "reference":
        if xi_moments is None:
            return _fail(checks, "reference-normalized certificate but no reference moments given")
        xi = np.asarray(xi_moments, dtype=float)[: len(index)]
        pairing = pair_terms(p_terms, xi, index)
        checks["pairing"] = pairing
        if abs(pairing - 1.0) > NORM_TOL:
            return _fail(checks, f"<p, xi> = {pairing:.6e}, expected 1")
    elif norm == "ray":
        if abs(value + 1.0) > NORM_TOL:
            return _fail(checks, f"ray normalization expects <p, y> = -1, got {value:.6e}")
        recorded_pairing = cert.get("pairing")
        if xi_moments is not None and recorded_pairing is not None:
            xi = np.asarray(xi_moments, dtype=float)[: len(index)]
            pairing = pair_terms(p_terms, xi, index)
            checks["pairing"] = pairing
            if abs(pairing - recorded_pairing) > NORM_TOL * (1.0 + abs(recorded_pairing)):
                return _fail(checks, f"recorded <p, xi> = {recorded_pairing:.6e} "
                                     f"disagrees with recomputed {pairing:.6e}")
    else:
        return _fail(checks, f"unknown normalization {norm!r}")

    return CheckReport(passed=True, checks=checks,
                       message=f"certificate verified: <p, y> = {value:.6e}")


# -- measure verification -------------------------------------------------------


def verify_atoms(points, weights, n: int, d: int, moments,
                 lam: float = 0.0, xi_moments=None,
                 generators=None, radius: float | None = None,
                 tol: float = MEASURE_TOL) -> CheckReport:
    """Re-check a MeasureFound record: moments close, weights positive, atoms in K.

    The claimed identity is  sum_j w_j [u_j]_d + lam * xi|_d = y  (lam = 0 when
    no reference shift was involved).  `generators` is a list of polynomial
    dicts; each must be >= -tol at every atom, as must radius^2 - |u|^2 when a
    radius is given.
    """
    checks: dict = {}
    moments = np.asarray(moments, dtype=float)
    points = np.asarray(points, dtype=float).reshape(-1, n) if np.size(points) else np.zeros((0, n))
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if points.shape[0] != weights.shape[0]:
        return _fail(checks, f"{points.shape[0]} atoms but {weights.shape[0]} weights")
    checks["atoms"] = int(points.shape[0])

    if weights.size and float(weights.min()) <= 0.0:
        return _fail({**checks, "min_weight": float(weights.min())},
                     f"nonpositive weight {weights.min():.3e}")
    checks["min_weight"] = float(weights.min()) if weights.size else None

    mons = graded_monomials(n, d)
    if len(moments) != len(mons):
        return _fail(checks, f"moment vector has {len(moments)} entries, expected {len(mons)}")
    recon = np.zeros(len(mons))
    for a_idx, a in enumerate(mons):
        if points.shape[0]:
            recon[a_idx] = float(weights @ np.prod(points ** np.asarray(a, dtype=float), axis=1))
    if lam != 0.0:
        if xi_moments is None:
            return _fail(checks, "record shifts by lam * xi but carries no reference moments")
        recon = recon + lam * np.asarray(xi_moments, dtype=float)[: len(mons)]
    residual = float(np.max(np.abs(recon - moments)))
    checks["moment_residual"] = residual
    if residual > tol:
        return _fail(checks, f"moment residual {residual:.3e} > {tol:.0e}")

    gen_min = np.inf
    if generators:
        for g in generators:
            vals = eval_terms(_terms_of(g), points) if points.shape[0] else np.array([np.inf])
            gen_min = min(gen_min, float(np.min(vals)))
    if radius is not None and points.shape[0]:
        slack = radius * radius - np.sum(points * points, axis=1)
        gen_min = min(gen_min, float(np.min(slack)))
    checks["generator_min"] = None if gen_min is np.inf else gen_min
    if gen_min is not np.inf and gen_min < -tol:
        return _fail(checks, f"an atom violates the set by {gen_min:.3e}")

    return CheckReport(passed=True, checks=checks,
                       message=f"measure verified: residual {residual:.3e}")


# -- verdict dispatch -----------------------------------------------------------


def verify_verdict(verdict: dict, n: int, d: int, moments,
                   generators=None, radius: float | None = None,
                   tol: float = MEASURE_TOL) -> CheckReport:
    """Re-check whichever claim a serialized verdict makes.

    MeasureFound records are checked with verify_atoms (using the reference
    moments embedded in the record when a shift multiplier is present);
    NoMeasure records with verify_certificate.  Inconclusive/Exhausted
    records make no claim, which trivially passes, and Infeasible search
    records pass when they carry a verifiable certificate (or make no
    polynomial claim at all).
    """
    kind = verdict.get("kind")
    if kind == "MeasureFound":
        measure = verdict.get("measure")
        if measure is None:
            return _fail({}, "MeasureFound record without a measure")
        lam = float(verdict.get("lambda") or 0.0)
        ref = verdict.get("reference") or {}
        return verify_atoms(
            measure.get("points", []), measure.get("weights", []),
            n, d, moments, lam=lam, xi_moments=ref.get("moments"),
            generators=generators, radius=radius, tol=tol,
        )
    if kind in ("NoMeasure", "Infeasible"):
        cert = verdict.get("certificate")
        if cert is None:
            if kind == "Infeasible":
                return CheckReport(True, {}, "infeasibility recorded without a polynomial claim")
            return _fail({}, "NoMeasure record without a certificate")
        ref = verdict.get("reference") or {}
        return verify_certificate(cert, n, d, moments, xi_moments=ref.get("moments"))
    if kind in ("Inconclusive", "Exhausted"):
        return CheckReport(True, {}, f"{kind} records make no verifiable claim")
    return _fail({}, f"unknown verdict kind {kind!r}")
