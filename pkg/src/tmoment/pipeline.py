"""End-to-end decision procedures over truncated moment sequences.

Two drivers, both scanning a hierarchy of relaxation orders k:

  check_membership  decide whether y admits a representing measure on K,
                    returning an explicit atomic measure (MeasureFound), a
                    polynomial nonexistence certificate (NoMeasure), or an
                    honest Inconclusive;
  find_measure      search for a finitely atomic representing measure by
                    minimizing a generic objective over extensions of y and
                    watching for a flat truncation.

Every positive claim is re-verified before it is returned: measures through
moment reconstruction and set membership, certificates through the
independent arithmetic in `verify` (which shares no code with the solver).
A claim that fails its re-verification is downgraded to a note and the scan
continues, so the verdicts are sound by construction, not by trust in the
optimizer.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import verify as _verify
from .flatatoms import (
    RANK_TOL,
    AtomicMeasure,
    ExtractionError,
    extract_atoms,
    find_flat_truncation,
    numerical_rank,
    rank_profile,
    verify_measure,
)
from .moments import Polynomial, Tms, moment_matrix, riesz, tms_from_atoms
from .monomials import basis, monomial_count
from .refmeasures import ReferenceSpec, default_reference
from .relax import (
    Relaxation,
    build_feasibility,
    build_flat_search,
    build_flat_search_rn,
    build_lambda,
    build_shift_rn,
    gram_polynomial,
    normalize_mode,
    objective_ones,
    objective_seeded,
    objective_trace,
    ones_matrix,
    rescale_set,
    rescale_tms,
    seeded_matrix,
    trace_matrix,
    unscale_gram,
    unscale_polynomial,
    unscale_tms,
)
from .sdp import SdpOptions, SdpSolution, solve
from .semialg import SemialgebraicSet

SCHEMA_VERSION = "tmoment-verdict/1"

MEASURE_FOUND = "MeasureFound"
NO_MEASURE = "NoMeasure"
INCONCLUSIVE = "Inconclusive"
INFEASIBLE = "Infeasible"
EXHAUSTED = "Exhausted"


@dataclass
class PipelineOptions:
    """Knobs shared by the drivers; the defaults run every shipped example.

    zero_tol_factor   |lambda_k| <= factor * (1 + |y|_inf) counts as zero
    rank_tol          absolute eigenvalue threshold for numerical ranks
    feasibility_tol   gap/feasibility tolerance for zero-objective solves;
                      much tighter than the default because max-rank central
                      points carry sqrt(mu)-size ghost eigenvalues that must
                      sink below rank_tol before flatness is visible
    rescale_cut       membership route rescales x -> x/R only when the data
                      spread max |y_a|^(1/|a|) exceeds this (blind rescaling
                      of well-scaled data pushes high-degree moments to the
                      solver's noise floor and stalls it)
    extraction_seed   seed of the random basis rotation in atom extraction
    measure_tol       absolute residual accepted when re-verifying measures
    """

    sdp: SdpOptions = field(default_factory=SdpOptions)
    zero_tol_factor: float = 1e-6
    rank_tol: float = RANK_TOL
    feasibility_tol: float = 1e-11
    rescale_cut: float = 10.0
    extraction_seed: int = 2008
    measure_tol: float = 1e-5

    def feasibility_sdp(self) -> SdpOptions:
        return replace(self.sdp, tol_gap=self.feasibility_tol, tol_feas=self.feasibility_tol)


# -- polynomial serialization ---------------------------------------------------


def poly_to_json(p: Polynomial) -> dict:
    terms = sorted(p.terms.items(), key=lambda item: (sum(item[0]), tuple(-e for e in item[0])))
    return {"n": p.n, "terms": [[list(map(int, a)), float(c)] for a, c in terms]}


def poly_from_json(obj: dict) -> Polynomial:
    return Polynomial(int(obj["n"]), {tuple(int(e) for e in a): float(c) for a, c in obj["terms"]})


# -- nonexistence certificates ---------------------------------------------------


class CertificateError(RuntimeError):
    """Certificate assembly failed; diagnostics say which invariant broke."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class CertificateBlock:
    """One sum-of-squares multiplier: sigma = [x]_order^T gram [x]_order times g."""

    label: tuple[int, ...]
    generator: Polynomial
    order: int
    gram: np.ndarray

    def to_json(self) -> dict:
        return {
            "label": list(map(int, self.label)) if self.label != ("ball",) else ["ball"],
            "generator": poly_to_json(self.generator),
            "order": int(self.order),
            "gram": np.asarray(self.gram, dtype=float).tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CertificateBlock":
        raw = obj["label"]
        label = ("ball",) if raw == ["ball"] else tuple(int(v) for v in raw)
        return cls(label=label, generator=poly_from_json(obj["generator"]),
                   order=int(obj["order"]), gram=np.asarray(obj["gram"], dtype=float))


@dataclass
class NonexistenceCertificate:
    """p = sum_nu sigma_nu g_nu with <p, y> < 0: no measure on K matches y.

    normalization "reference" fixes <p, xi> = 1 (p came from the dual of an
    optimal shift-multiplier problem, value = lambda_k); "ray" fixes
    <p, y> = -1 (p came from an infeasibility ray, where <p, xi> = 0 if a
    reference was in play at all).
    """

    n: int
    d: int
    k: int
    mode: str | None
    p: Polynomial
    multipliers: tuple[CertificateBlock, ...]
    value: float
    pairing: float | None
    normalization: str
    identity_residual: float

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "d": self.d,
            "k": self.k,
            "mode": self.mode,
            "p": poly_to_json(self.p),
            "multipliers": [b.to_json() for b in self.multipliers],
            "value": float(self.value),
            "pairing": None if self.pairing is None else float(self.pairing),
            "normalization": self.normalization,
            "identity_residual": float(self.identity_residual),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "NonexistenceCertificate":
        return cls(
            n=int(obj["n"]), d=int(obj["d"]), k=int(obj["k"]), mode=obj.get("mode"),
            p=poly_from_json(obj["p"]),
            multipliers=tuple(CertificateBlock.from_json(b) for b in obj["multipliers"]),
            value=float(obj["value"]),
            pairing=None if obj.get("pairing") is None else float(obj["pairing"]),
            normalization=obj["normalization"],
            identity_residual=float(obj["identity_residual"]),
        )


def _assemble_polynomial(relax: Relaxation, mats) -> tuple[Polynomial, float, list[CertificateBlock]]:
    """sum_nu ([x]^T G_nu [x]) g_nu, split into (degree<=d part, tail sup norm, blocks)."""
    blocks = []
    total = Polynomial(relax.n, {})
    for mem, order, G in zip(relax.members, relax.block_orders, mats):
        G = 0.5 * (np.asarray(G, dtype=float) + np.asarray(G, dtype=float).T)
        blocks.append(CertificateBlock(label=mem.label, generator=mem.poly, order=order, gram=G))
        total = total + gram_polynomial(G, relax.n, order) * mem.poly
    head = {a: c for a, c in total.terms.items() if sum(a) <= relax.d}
    tail = max((abs(c) for a, c in total.terms.items() if sum(a) > relax.d), default=0.0)
    return Polynomial(relax.n, head), tail, blocks


def _scaled_certificate(relax: Relaxation, mats, normalization: str) -> NonexistenceCertificate:
    p, tail, blocks = _assemble_polynomial(relax, mats)
    p_inf = max((abs(c) for c in p.terms.values()), default=0.0)
    if p_inf <= 0.0:
        raise CertificateError("assembled certificate polynomial is zero", tail=tail)
    if tail > 1e-6 * (1.0 + p_inf):
        raise CertificateError(
            f"degree-{relax.d} truncation identity does not close (tail {tail:.3e})",
            tail=tail, p_inf=p_inf)

    value = riesz(relax.y, p)
    pairing = riesz(Tms(relax.n, relax.d, relax.xi.values[:monomial_count(relax.n, relax.d)]), p) \
        if relax.xi is not None else None
    if normalization == "reference":
        if pairing is None or pairing <= 1e-8:
            raise CertificateError(f"cannot normalize <p, xi> = 1 from pairing {pairing}")
        scale = pairing
    elif normalization == "ray":
        if value >= -1e-12 * (1.0 + p_inf):
            raise CertificateError(f"ray pairs nonnegatively with the data (<p, y> = {value:.3e})")
        scale = -value
    else:
        raise ValueError(f"unknown normalization {normalization!r}")

    inv = 1.0 / scale
    p = Polynomial(relax.n, {a: c * inv for a, c in p.terms.items()})
    blocks = [replace(b, gram=b.gram * inv) for b in blocks]
    return NonexistenceCertificate(
        n=relax.n, d=relax.d, k=relax.k, mode=relax.mode,
        p=p, multipliers=tuple(blocks),
        value=value * inv,
        pairing=None if pairing is None else pairing * inv,
        normalization=normalization,
        identity_residual=tail * inv,
    )


def extract_certificate(relax: Relaxation, sol: SdpSolution) -> NonexistenceCertificate:
    """Certificate from the dual matrices of an optimal shift-multiplier solve.

    The duals are the Gram matrices of the multipliers sigma_nu; stationarity
    in the free moment variables cancels every coefficient of degree > d, and
    stationarity in lambda pins <p, xi> = 1, so p = sum sigma_nu g_nu is a
    degree-d polynomial with <p, y> = lambda_k < 0.
    """
    if not relax.has_lambda:
        raise CertificateError("relaxation has no shift multiplier; use certificate_from_ray")
    if sol.status != "optimal" or sol.x is None or sol.dual_matrices is None:
        raise CertificateError(f"need an optimal solution with duals, got status {sol.status!r}")
    lam = float(sol.x[0])
    if lam >= 0.0:
        raise CertificateError(f"shift multiplier {lam:.3e} is nonnegative; nothing to certify")
    return _scaled_certificate(relax, sol.dual_matrices, "reference")


def certificate_from_ray(relax: Relaxation, sol: SdpSolution) -> NonexistenceCertificate:
    """Certificate from a primal-infeasibility ray of any of the relaxations.

    The ray X satisfies <F_i, X> = 0 for every variable and <F_0, X> < 0,
    which reads: the tail of sum sigma_nu g_nu cancels, <p, xi> = 0 when a
    reference shift was a variable, and <p, y> < 0.  Normalized to
    <p, y> = -1.
    """
    if sol.ray_matrices is None:
        raise CertificateError(f"solution carries no infeasibility ray (status {sol.status!r})")
    return _scaled_certificate(relax, sol.ray_matrices, "ray")


def _unscale_certificate(cert: NonexistenceCertificate, R: float) -> NonexistenceCertificate:
    """Map a certificate found in x' = x/R coordinates back to the instance scale."""
    if R == 1.0:
        return cert
    blocks = tuple(
        replace(b, generator=unscale_polynomial(b.generator, R),
                gram=unscale_gram(b.gram, cert.n, b.order, R))
        for b in cert.multipliers
    )
    return replace(cert, p=unscale_polynomial(cert.p, R), multipliers=blocks)


# -- verdict records --------------------------------------------------------------


def _reference_record(spec: ReferenceSpec | None, xi: Tms | None, d: int) -> dict | None:
    if xi is None:
        return None
    rec = spec.to_json() if spec is not None else {"kind": "custom"}
    rec["moments"] = [float(v) for v in xi.values[: monomial_count(xi.n, d)]]
    return rec


@dataclass
class MembershipVerdict:
    """Outcome of check_membership; `kind` picks which fields are meaningful.

    MeasureFound: measure, lam, k, t, reference — the data decomposes as
        (atomic measure) + lam * (reference measure), lam >= 0 up to solver
        noise, with t the degree at which the extension went flat.
    NoMeasure: k, mode, certificate.
    Inconclusive: k_max, lam (last seen), trend.
    `history` records every order solved; `preprocessing` the kernel report
    of the data's moment matrix; `notes` anything downgraded along the way.
    """

    kind: str
    mode: str
    k: int | None = None
    lam: float | None = None
    t: int | None = None
    measure: AtomicMeasure | None = None
    certificate: NonexistenceCertificate | None = None
    reference: dict | None = None
    k_max: int | None = None
    trend: str | None = None
    route: str = "lambda"
    history: list = field(default_factory=list)
    preprocessing: dict | None = None
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "verdict": "membership",
            "kind": self.kind,
            "mode": self.mode,
            "k": self.k,
            "lambda": self.lam,
            "t": self.t,
            "measure": None if self.measure is None else self.measure.to_json(),
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "reference": self.reference,
            "k_max": self.k_max,
            "trend": self.trend,
            "route": self.route,
            "history": self.history,
            "preprocessing": self.preprocessing,
            "notes": list(self.notes),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "MembershipVerdict":
        return cls(
            kind=obj["kind"], mode=obj["mode"], k=obj.get("k"), lam=obj.get("lambda"),
            t=obj.get("t"),
            measure=None if obj.get("measure") is None else AtomicMeasure.from_json(obj["measure"]),
            certificate=None if obj.get("certificate") is None
            else NonexistenceCertificate.from_json(obj["certificate"]),
            reference=obj.get("reference"), k_max=obj.get("k_max"), trend=obj.get("trend"),
            route=obj.get("route", "lambda"), history=list(obj.get("history", [])),
            preprocessing=obj.get("preprocessing"), notes=list(obj.get("notes", [])),
        )


@dataclass
class FlatSearchResult:
    """Outcome of find_measure; `kind` is MeasureFound, Infeasible, or Exhausted."""

    kind: str
    k: int | None = None
    t: int | None = None
    measure: AtomicMeasure | None = None
    objective: dict | None = None
    certificate: NonexistenceCertificate | None = None
    ray: dict | None = None
    k_max: int | None = None
    profiles: list = field(default_factory=list)
    history: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "verdict": "flat_search",
            "kind": self.kind,
            "k": self.k,
            "t": self.t,
            "measure": None if self.measure is None else self.measure.to_json(),
            "objective": self.objective,
            "certificate": None if self.certificate is None else self.certificate.to_json(),
            "ray": self.ray,
            "k_max": self.k_max,
            "profiles": self.profiles,
            "history": self.history,
            "notes": list(self.notes),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "FlatSearchResult":
        return cls(
            kind=obj["kind"], k=obj.get("k"), t=obj.get("t"),
            measure=None if obj.get("measure") is None else AtomicMeasure.from_json(obj["measure"]),
            objective=obj.get("objective"),
            certificate=None if obj.get("certificate") is None
            else NonexistenceCertificate.from_json(obj["certificate"]),
            ray=obj.get("ray"), k_max=obj.get("k_max"),
            profiles=list(obj.get("profiles", [])), history=list(obj.get("history", [])),
            notes=list(obj.get("notes", [])),
        )


# -- shared helpers -----------------------------------------------------------------


def moment_scale(y: Tms) -> float:
    """max over |a| > 0 of |y_a|^(1/|a|): the per-degree geometric spread."""
    degs = y.basis.degrees
    mask = degs > 0
    vals = np.abs(y.values[mask])
    if not np.any(vals > 0):
        return 1.0
    with np.errstate(divide="ignore"):
        return float(np.max(vals ** (1.0 / degs[mask])))

def _preprocess(y: Tms, opts: PipelineOptions) -> dict:
    """Rank report of the fully pinned moment matrix M_{floor(d/2)}(y).

    A nontrivial kernel means no positive multiple of a positive-definite
    reference fits under y, so the shift multiplier is capped at zero and the
    scan goes straight to the feasibility formulation.
    """
    dlow = y.d // 2
    rep = numerical_rank(moment_matrix(y, dlow).entries, tau=opts.rank_tol,
                         label=f"M_{dlow}(y)")
    size = monomial_count(y.n, dlow)
    return {
        "order": dlow,
        "size": size,
        "rank": rep.rank,
        "kernel_dim": size - rep.rank,
        "smallest_eigenvalues": [float(v) for v in rep.singular_values[-3:]],
        "route": "feasibility" if rep.rank < size else "lambda",
    }


def _generator_terms(K: SemialgebraicSet | None) -> list[dict] | None:
    if K is None:
        return None
    return [poly_to_json(g) for g in K.generators]


def _try_flat_measure(w: Tms, target: Tms, K: SemialgebraicSet | None, d_g: int,
                      opts: PipelineOptions, notes: list) -> tuple[int, AtomicMeasure] | None:
    """Find a flat truncation of w, extract its measure, verify against target.

    `target` is what the atoms must reproduce through degree d (for the
    shift problems that is y - lam * xi, not y itself).  Failures are
    recorded as notes and None is returned so the caller can keep scanning.
    """
    found = find_flat_truncation(w, target.d, d_g, K, tau=opts.rank_tol)
    if found is None:
        return None
    t, _ = found
    try:
        mu = extract_atoms(w.truncate(t), tau=opts.rank_tol, d_g=d_g,
                           seed=opts.extraction_seed)
    except ExtractionError as exc:
        notes.append(f"flat truncation at t={t} but extraction failed: {exc}")
        return None
    report = verify_measure(target, mu, K, tol=opts.measure_tol)
    if not report.passed:
        notes.append(
            f"extracted measure at t={t} failed verification "
            f"(moment residual {report.moment_residual:.3e}, "
            f"generator min {report.generator_min:.3e})")
        return None
    return t, mu


def _verified_certificate(cert: NonexistenceCertificate, y: Tms, xi: Tms | None,
                          notes: list) -> bool:
    """Run the independent verifier on the serialized record."""
    xi_vals = None if xi is None else xi.values[: monomial_count(y.n, y.d)]
    report = _verify.verify_certificate(cert.to_json(), y.n, y.d, y.values,
                                        xi_moments=xi_vals)
    if not report.passed:
        notes.append(f"certificate failed independent verification: {report.message}")
    return report.passed


# -- membership ---------------------------------------------------------------------


def check_membership(y: Tms, K: SemialgebraicSet,
                     xi: Tms | ReferenceSpec | None = None,
                     mode: str = "quadratic_module",
                     k_max: int | None = None,
                     options: PipelineOptions | None = None) -> MembershipVerdict:
    """Decide whether y admits a representing measure supported in K.

    Scans k = ceil(d/2) .. k_max (default ceil(d/2) + 4), at each order
    maximizing the multiplier lambda with y - lambda * xi required to extend
    to a sequence satisfying K's localizing-matrix constraints:

      * lambda_k < 0 at an optimum: the dual Gram matrices assemble into a
        polynomial nonexistence certificate; verified, then NoMeasure.
      * lambda_k >= 0 and the extension has a flat truncation whose atoms
        verify: y = (atomic measure) + lambda_k * xi, MeasureFound.
      * certified primal infeasibility: ray certificate, NoMeasure.
      * scan ends without a decision: Inconclusive, with the lambda trend.

    When the data's own moment matrix is singular, positive lambda is
    impossible, so those instances skip the multiplier and scan the plain
    feasibility problem instead (solved at the tighter feasibility_tol so
    central-point ghost eigenvalues do not mask flatness).
    """
    opts = options or PipelineOptions()
    mode = normalize_mode(mode)
    if K.n != y.n:
        raise ValueError("set and data dimension mismatch")
    d = y.d
    d0 = (d + 1) // 2
    if k_max is None:
        k_max = d0 + 4

    # reference measure
    if isinstance(xi, Tms):
        xi_tms, ref_spec = xi, None
    elif isinstance(xi, ReferenceSpec):
        xi_tms, ref_spec = xi.moments(K, d), xi
    elif xi is None:
        xi_tms, ref_spec = default_reference(K, d)
    else:
        raise TypeError(f"xi must be a Tms, a ReferenceSpec, or None, not {type(xi)!r}")
    reference = _reference_record(ref_spec, xi_tms, d)

    # data-driven rescale (see module docstring of relax for the map)
    R = moment_scale(y)
    scaled = R > opts.rescale_cut
    if not scaled:
        R = 1.0
    ys = rescale_tms(y, R) if scaled else y
    xis = rescale_tms(xi_tms, R) if scaled else xi_tms
    Ks = rescale_set(K, R) if scaled else K

    pre = _preprocess(ys, opts)
    route = pre["route"]
    zero_tol = opts.zero_tol_factor * (1.0 + float(np.max(np.abs(y.values))))
    fam_dg = 1 if K.is_rn else Ks.family(mode).d_g

    history: list[dict] = []
    notes: list[str] = []
    if scaled:
        notes.append(f"data rescaled by R = {R:.6g} before solving (spread heuristic)")
    if route == "feasibility":
        notes.append(
            "moment matrix of the data is singular "
            f"(kernel dimension {pre['kernel_dim']}); "
            "positive shift multiplier impossible, scanning the feasibility problem")

    def finish_found(k, t, mu, lam):
        # mu comes from _try_flat_measure on the *unscaled* extension, so its
        # atoms are already in natural coordinates
        verdict = MembershipVerdict(
            kind=MEASURE_FOUND, mode=mode, k=k, lam=lam, t=t, measure=mu,
            reference=reference, route=route, history=history,
            preprocessing=pre, notes=notes)
        report = _verify.verify_verdict(verdict.to_json(), y.n, d, y.values,
                                        generators=_generator_terms(K),
                                        radius=K.radius, tol=opts.measure_tol)
        if not report.passed:
            notes.append(f"measure failed final verification: {report.message}")
            return None
        return verdict

    seen_failure = False
    last_lam: float | None = None
    for k in range(d0, k_max + 1):
        if route == "lambda":
            rel = build_shift_rn(ys, xis, k) if K.is_rn else build_lambda(ys, xis, Ks, k, mode)
            sol = solve(rel.problem, opts.sdp)
        else:
            rel = build_feasibility(ys, Ks, k, mode)
            sol = solve(rel.problem, opts.feasibility_sdp())
        entry = {"k": k, "status": sol.status, "iterations": sol.iterations}
        decoded = None
        if sol.x is not None:
            lam, w = rel.decode(sol)
            decoded = (lam, w)
            if lam is not None:
                entry["lambda"] = lam
                last_lam = lam
        history.append(entry)

        if sol.status in ("optimal", "max_iterations") and decoded is not None:
            lam, w = decoded
            lam_eff = 0.0 if lam is None else lam
            if lam_eff < -zero_tol:
                if sol.status == "optimal":
                    try:
                        cert = _unscale_certificate(extract_certificate(rel, sol), R)
                        if _verified_certificate(cert, y, xi_tms, notes):
                            return MembershipVerdict(
                                kind=NO_MEASURE, mode=mode, k=k, lam=lam,
                                certificate=cert, reference=reference, route=route,
                                history=history, preprocessing=pre, notes=notes)
                    except CertificateError as exc:
                        notes.append(f"certificate extraction failed at k={k}: {exc}")
                continue
            w_nat = unscale_tms(w, R) if scaled else w
            target = Tms(y.n, d, y.values - lam_eff * xi_tms.values[: monomial_count(y.n, d)]) \
                if lam is not None else y
            hit = _try_flat_measure(w_nat, target, K, fam_dg, opts, notes)
            if hit is not None:
                verdict = finish_found(k, hit[0], hit[1], lam_eff)
                if verdict is not None:
                    return verdict
        elif sol.status == "primal_infeasible":
            try:
                cert = _unscale_certificate(certificate_from_ray(rel, sol), R)
                if _verified_certificate(cert, y, xi_tms if rel.has_lambda else None, notes):
                    # a feasibility-route ray never involved the reference, so
                    # the verdict does not claim one
                    return MembershipVerdict(
                        kind=NO_MEASURE, mode=mode, k=k, lam=last_lam,
                        certificate=cert,
                        reference=reference if rel.has_lambda else None,
                        route=route, history=history, preprocessing=pre, notes=notes)
            except CertificateError as exc:
                notes.append(f"infeasibility ray at k={k} did not certify: {exc}")
        elif sol.status == "numerical_failure":
            seen_failure = True
            notes.append(f"solver failed numerically at k={k}: {sol.message}")
        else:
            notes.append(f"unexpected solver status {sol.status!r} at k={k}")

    lams = [h["lambda"] for h in history if "lambda" in h]
    if seen_failure and not lams:
        trend = "numerical failures only"
    elif len(lams) >= 3 and abs(lams[-1] - lams[-2]) <= 1e-7 and abs(lams[-2] - lams[-3]) <= 1e-7:
        trend = "lambda stabilized (limit likely attained)"
    elif lams and all(v >= -zero_tol for v in lams):
        trend = "lambda nonnegative, no flat truncation found"
    elif lams:
        trend = "lambda still decreasing"
    else:
        trend = "feasible at every order, no flat truncation found" \
            if route == "feasibility" else "no usable solves"
    if seen_failure and lams:
        trend += "; some orders failed numerically"
    return MembershipVerdict(
        kind=INCONCLUSIVE, mode=mode, lam=last_lam, k_max=k_max, trend=trend,
        reference=reference, route=route, history=history, preprocessing=pre, notes=notes)


# -- flat-extension search -------------------------------------------------------------


def _objective_for(kind_or_vec, rn: bool, n: int, k: int, seed: int):
    """Objective for order k: named family or a user vector/matrix prefix."""
    if isinstance(kind_or_vec, str):
        name = kind_or_vec
        if rn:
            if name == "ones":
                return ones_matrix(n, k)
            if name == "trace":
                return trace_matrix(n, k)
            if name == "seeded":
                return seeded_matrix(n, k, seed)
        else:
            if name == "ones":
                return objective_ones(n, k)
            if name == "trace":
                return objective_trace(n, k)
            if name == "seeded":
                return objective_seeded(n, k, seed)
        raise ValueError(f"unknown objective {name!r}; want seeded, ones, or trace")
    arr = np.asarray(kind_or_vec, dtype=float)
    if rn:
        want = monomial_count(n, k)
        if arr.ndim != 2 or arr.shape[0] < want or arr.shape[1] < want:
            raise ValueError(f"objective matrix must cover order {k} ({want} monomials)")
        return arr[:want, :want]
    want = monomial_count(n, 2 * k)
    if arr.ndim != 1 or arr.shape[0] < want:
        raise ValueError(f"objective vector must cover degree {2 * k} ({want} entries)")
    return arr[:want]


def find_measure(y: Tms, K: SemialgebraicSet | None = None,
                 objective="seeded", seed: int = 0,
                 k_start: int | None = None, k_max: int | None = None,
                 options: PipelineOptions | None = None) -> FlatSearchResult:
    """Search for a finitely atomic representing measure for y.

    For each k = k_start .. k_max (defaults d .. d+3), minimize a generic
    linear objective over extensions w of y subject to K's localizing
    constraints plus the enclosing-ball constraint (or, with K = None /
    K = R^n, minimize <C, M_k(w)> over psd moment matrices).  Generic
    objectives drive the optimizer to extreme points, which are flat for
    some k whenever y has a measure; the first verified flat truncation
    wins.  A certified infeasible relaxation proves no measure exists
    (returned as Infeasible, with the ray's certificate when it assembles);
    running out of orders returns Exhausted with the per-k rank profiles.

    `objective` is "seeded" (reproducible Philox draw, consistent across k),
    "ones", "trace", or an explicit vector (matrix in the R^n variant)
    covering the largest order scanned.
    """
    opts = options or PipelineOptions()
    rn = K is None or K.is_rn
    d = y.d
    if k_start is None:
        k_start = d
    if k_max is None:
        k_max = d + 3
    if k_max < k_start:
        raise ValueError(f"k_max = {k_max} below k_start = {k_start}")

    R = 1.0
    Ks = K
    ys = y
    d_g = 1
    if not rn:
        if K.n != y.n:
            raise ValueError("set and data dimension mismatch")
        if K.radius is None:
            raise ValueError("flat search over a compact set needs K.radius "
                             "(the enclosing-ball block is part of the formulation)")
        d_g = max(K.quadratic_module_family().d_g, 1)
        if K.radius > 1.0:
            R = float(K.radius)
            Ks = rescale_set(K, R)
            ys = rescale_tms(y, R)
        k_floor = max(d_g, (d + 1) // 2)
    else:
        k_floor = (d + 1) // 2
    if k_start < k_floor:
        raise ValueError(f"k_start = {k_start} below the minimum order {k_floor}")

    history: list[dict] = []
    profiles: list[dict] = []
    notes: list[str] = []
    if R != 1.0:
        notes.append(f"set rescaled into the unit ball (R = {R:.6g}) before solving")

    for k in range(k_start, k_max + 1):
        obj = _objective_for(objective, rn, y.n, k, seed)
        rel = build_flat_search_rn(ys, k, obj) if rn else build_flat_search(ys, Ks, k, obj)
        sol = solve(rel.problem, opts.sdp)
        entry = {"k": k, "status": sol.status, "iterations": sol.iterations}
        obj_record = {
            "kind": objective if isinstance(objective, str) else "user",
            "seed": seed if objective == "seeded" else None,
        }
        w_nat = None
        if sol.x is not None:
            _, w = rel.decode(sol)
            entry["objective_value"] = rel.objective_value(w)
            w_nat = unscale_tms(w, R) if R != 1.0 else w
        history.append(entry)
        if w_nat is not None and sol.status in ("optimal", "max_iterations"):
            hit = _try_flat_measure(w_nat, y, K if not rn else None, d_g, opts, notes)
            if hit is not None:
                t, mu = hit
                report = _verify.verify_atoms(
                    mu.points, mu.weights, y.n, d, y.values,
                    generators=_generator_terms(K if not rn else None),
                    radius=K.radius if not rn else None, tol=opts.measure_tol)
                if report.passed:
                    return FlatSearchResult(
                        kind=MEASURE_FOUND, k=k, t=t, measure=mu,
                        objective={**obj_record, "value": entry["objective_value"]},
                        profiles=profiles, history=history, notes=notes)
                notes.append(f"measure at k={k} failed independent verification: "
                             f"{report.message}")
            profiles.append({"k": k, "profile": rank_profile(w_nat, d_g, opts.rank_tol)})
        if sol.status == "primal_infeasible":
            ray_info = {"k": k}
            cert = None
            try:
                cert = _unscale_certificate(certificate_from_ray(rel, sol), R)
                if not _verified_certificate(cert, y, None, notes):
                    cert = None
            except CertificateError as exc:
                notes.append(f"infeasibility ray at k={k} did not certify: {exc}")
            if sol.ray_matrices is not None:
                ray_info["block_norms"] = [float(np.max(np.abs(m))) for m in sol.ray_matrices]
            return FlatSearchResult(
                kind=INFEASIBLE, k=k, certificate=cert, ray=ray_info,
                objective=obj_record, profiles=profiles, history=history, notes=notes)
        if sol.status == "numerical_failure":
            notes.append(f"solver failed numerically at k={k}: {sol.message}")
        if sol.status == "dual_infeasible":
            notes.append(f"objective unbounded below at k={k} (unexpected for psd objectives)")

    return FlatSearchResult(kind=EXHAUSTED, k_max=k_max, profiles=profiles,
                            history=history, notes=notes)


# -- random benchmark -------------------------------------------------------------------


def random_instance(n: int, d: int, kind: str, seed: int, index: int
                    ) -> tuple[Tms, SemialgebraicSet | None]:
    """One seeded benchmark instance: y from C(n+d, d) random weighted atoms.

    kind "box": atoms uniform in [-1, 1]^n, K the box with its enclosing
    radius sqrt(n).  kind "gaussian_rn": standard normal atoms, K = R^n.
    Weights are uniform(0, 1) in both cases.
    """
    from .semialg import box_set

    N = monomial_count(n, d)
    rng = np.random.Generator(np.random.Philox(key=[seed, index]))
    if kind == "box":
        points = rng.uniform(-1.0, 1.0, size=(N, n))
        K = box_set(n)
        K.radius = float(np.sqrt(n))
    elif kind == "gaussian_rn":
        points = rng.standard_normal((N, n))
        K = None
    else:
        raise ValueError(f"unknown benchmark kind {kind!r}; want box or gaussian_rn")
    weights = rng.uniform(0.0, 1.0, size=N)
    return tms_from_atoms(n, d, points, weights), K


def random_benchmark(n: int, d: int, kind: str = "box", instances: int = 20,
                     seed: int = 0, k_max: int | None = None,
                     options: PipelineOptions | None = None) -> list[dict]:
    """Run find_measure over seeded random instances; one summary row each.

    Box instances use the seeded generic objective (its own stream, derived
    from `seed` and the instance index); R^n instances use the trace
    objective.  Rows are ordered by instance id and deterministic under the
    seed, apart from the wall-clock runtime column.
    """
    if k_max is None:
        k_max = d + 3
    rows = []
    for i in range(instances):
        y, K = random_instance(n, d, kind, seed, i)
        objective = "seeded" if kind == "box" else "trace"
        t0 = time.perf_counter()
        result = find_measure(y, K, objective=objective,
                              seed=seed * 1_000_003 + i, k_max=k_max, options=options)
        dt = time.perf_counter() - t0
        rows.append({
            "instance": i,
            "kind": kind,
            "n": n,
            "d": d,
            "success": result.kind == MEASURE_FOUND,
            "k": result.k,
            "atoms": None if result.measure is None else len(result.measure),
            "result": result.kind,
            "runtime_s": round(dt, 3),
        })
    return rows
