"""Interior-point solver for linear matrix inequalities.

Problems are stated in LMI ("user") form over free variables x in R^N:

    maximize    c . x
    subject to  F_0^(b) + sum_i x_i F_i^(b)  psd     for each block b.

Internally this is the dual of the standard conic pair with A_i = -F_i,
C = F_0, b = c, and is solved with a homogeneous self-dual embedding:

    A(X) - b tau         = 0
    C tau - A^T(y) - S   = 0
    b.y - <C,X> - kappa  = 0,      X, S psd,  tau, kappa >= 0,

tracked along XS = mu I, tau kappa = mu with the HKM direction and a
Mehrotra predictor-corrector.  tau -> positive gives an optimal pair; kappa
-> positive gives a ray certifying infeasibility or unboundedness.  All
four outcomes are reported with explicit witnesses; nothing is raised for
numerical trouble (status "numerical_failure" instead).
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla


@dataclass
class SdpBlock:
    """One LMI block in sparse triplet form.

    entries: (var, i, j, val) with var = -1 addressing the constant matrix
    F_0 and var >= 0 addressing F_{var+1}'s coefficient.  Only i <= j is
    stored; values mirror to (j, i).  Repeated triplets accumulate.
    """

    size: int
    vars: list = field(default_factory=list)
    rows: list = field(default_factory=list)
    cols: list = field(default_factory=list)
    vals: list = field(default_factory=list)

    def add(self, var: int, i: int, j: int, val: float):
        if not (0 <= i <= j < self.size):
            raise ValueError(f"entry ({i},{j}) outside upper triangle of size {self.size}")
        if val != 0.0:
            self.vars.append(int(var))
            self.rows.append(int(i))
            self.cols.append(int(j))
            self.vals.append(float(val))

    def dense(self, num_vars: int) -> np.ndarray:
        """Stack (num_vars + 1, s, s): slots 0..N-1 are F_i, slot N is F_0."""
        T = np.zeros((num_vars + 1, self.size, self.size))
        v = np.asarray(self.vars, dtype=np.int64)
        slot = np.where(v < 0, num_vars, v)
        r = np.asarray(self.rows, dtype=np.int64)
        c = np.asarray(self.cols, dtype=np.int64)
        x = np.asarray(self.vals)
        np.add.at(T, (slot, r, c), x)
        off = r != c
        np.add.at(T, (slot[off], c[off], r[off]), x[off])
        return T


@dataclass
class SdpProblem:
    """maximize objective . x  subject to every block's LMI."""

    num_vars: int
    objective: np.ndarray
    blocks: list[SdpBlock] = field(default_factory=list)

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.shape != (self.num_vars,):
            raise ValueError("objective length != num_vars")

    def new_block(self, size: int) -> SdpBlock:
        blk = SdpBlock(size=size)
        self.blocks.append(blk)
        return blk

    def validate(self):
        for b in self.blocks:
            if b.size < 1:
                raise ValueError("empty block")
            if b.vars and (max(b.vars) >= self.num_vars or min(b.vars) < -1):
                raise ValueError("block references unknown variable")

    def lmi_value(self, blk_index: int, x: np.ndarray) -> np.ndarray:
        """Dense F_0 + sum x_i F_i for one block."""
        T = self.blocks[blk_index].dense(self.num_vars)
        return T[self.num_vars] + np.tensordot(np.asarray(x, dtype=float), T[: self.num_vars], axes=1)

    # -- documented sparse text format, for differential testing -----------

    def dumps(self) -> str:
        out = io.StringIO()
        out.write("SDPLMI v1\n")
        out.write(f"nvars {self.num_vars}\n")
        out.write("c " + " ".join(repr(float(v)) for v in self.objective) + "\n")
        out.write(f"blocks {len(self.blocks)}\n")
        for b in self.blocks:
            out.write(f"block size {b.size} entries {len(b.vals)}\n")
            for var, i, j, val in zip(b.vars, b.rows, b.cols, b.vals):
                out.write(f"{var} {i} {j} {val!r}\n")
        return out.getvalue()

    @classmethod
    def loads(cls, text: str) -> "SdpProblem":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if lines[0].strip() != "SDPLMI v1":
            raise ValueError("not an SDPLMI v1 dump")
        assert lines[1].startswith("nvars ")
        nvars = int(lines[1].split()[1])
        assert lines[2].startswith("c ")
        c = np.array([float(t) for t in lines[2].split()[1:]])
        prob = cls(num_vars=nvars, objective=c)
        k = 4
        nblocks = int(lines[3].split()[1])
        for _ in range(nblocks):
            hdr = lines[k].split()
            size, entries = int(hdr[2]), int(hdr[4])
            blk = prob.new_block(size)
            for e in range(entries):
                var, i, j, val = lines[k + 1 + e].split()
                blk.add(int(var), int(i), int(j), float(val))
            k += 1 + entries
        return prob


@dataclass
class SdpOptions:
    tol_gap: float = 1e-8
    tol_feas: float = 1e-8
    tol_ray: float = 1e-8
    max_iter: int = 200
    step_frac: float = 0.98
    verbose: bool = False


@dataclass
class SdpSolution:
    status: str                      # optimal | primal_infeasible | dual_infeasible
                                     # | max_iterations | numerical_failure
    x: np.ndarray | None = None
    objective: float | None = None
    dual_matrices: list | None = None          # X_b / tau at optimum
    ray_matrices: list | None = None           # X ray: <F_i, X> = 0, <F_0, X> < 0
    ray_x: np.ndarray | None = None            # x ray: sum x_i F_i psd, c.x > 0
    iterations: int = 0
    mu: float = float("nan")
    residuals: dict = field(default_factory=dict)
    message: str = ""


def _sym(M: np.ndarray) -> np.ndarray:
    return (M + M.T) / 2.0


def _max_step(chol_l: np.ndarray, D: np.ndarray) -> float:
    """sup {a : M + a D psd} given the Cholesky factor of M."""
    W = sla.solve_triangular(chol_l, D, lower=True)
    W = sla.solve_triangular(chol_l, W.T, lower=True)
    lam = float(np.linalg.eigvalsh(_sym(W)).min())
    if lam >= -1e-14:
        return np.inf
    return -1.0 / lam


def _chol(M: np.ndarray) -> np.ndarray | None:
    try:
        return np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        return None


class _Failure(Exception):
    pass


def solve(problem: SdpProblem, options: SdpOptions | None = None) -> SdpSolution:
    """Run the embedding to one of the five statuses; never raises on numerics."""
    opt = options or SdpOptions()
    problem.validate()
    try:
        return _solve_inner(problem, opt)
    except _Failure as ex:
        return SdpSolution(status="numerical_failure", message=str(ex))
    except (np.linalg.LinAlgError, sla.LinAlgError, FloatingPointError, ValueError) as ex:
        return SdpSolution(status="numerical_failure", message=f"{type(ex).__name__}: {ex}")


def _solve_inner(problem: SdpProblem, opt: SdpOptions) -> SdpSolution:
    N = problem.num_vars
    b = problem.objective.copy()
    T = [blk.dense(N) for blk in problem.blocks]       # slots: 0..N-1 -> F_i, N -> F_0
    # standard-form data: A_i = -F_i, C = F_0
    A = [-Tb[:N] for Tb in T]
    C = [Tb[N].copy() for Tb in T]
    sizes = [blk.size for blk in problem.blocks]
    nbar = sum(sizes)
    if nbar == 0:
        raise _Failure("no blocks")

    normC = np.sqrt(sum(float(np.sum(Cb * Cb)) for Cb in C))
    norm_per_var = np.sqrt(sum((Ab ** 2).sum(axis=(1, 2)) for Ab in A)) if N else np.zeros(0)
    maxA = float(norm_per_var.max()) if N else 1.0
    maxA = max(maxA, 1e-12)
    normb = float(np.linalg.norm(b))
    binf = float(np.max(np.abs(b))) if N else 0.0

    def ext_apply(Ms: list) -> np.ndarray:
        """[-<F_i, M>]_i and <F_0, M> stacked: standard A(M) extended by <C, M>."""
        out = np.zeros(N + 1)
        for Tb, Mb in zip(T, Ms):
            v = Tb.reshape(N + 1, -1) @ Mb.reshape(-1)
            out[:N] -= v[:N]
            out[N] += v[N]
        return out

    def at_y(y: np.ndarray) -> list:
        """A^T(y) per block = -sum y_i F_i."""
        return [-np.tensordot(y, Tb[:N], axes=1) if N else np.zeros((s, s))
                for Tb, s in zip(T, sizes)]

    # starting point: identity scaled to the data
    zeta_d = max(1.0, normC / max(1.0, np.sqrt(nbar)), maxA)
    zeta_p = max(1.0, normb / max(1.0, maxA))
    X = [zeta_p * np.eye(s) for s in sizes]
    S = [zeta_d * np.eye(s) for s in sizes]
    y = np.zeros(N)
    tau, kappa = 1.0, zeta_p * zeta_d
    mu0 = (sum(float(np.tensordot(Xb, Sb)) for Xb, Sb in zip(X, S)) + tau * kappa) / (nbar + 1)

    def try_rays() -> SdpSolution | None:
        # user-primal infeasible: X ray with A(X) ~ 0, <C, X> < 0
        ext = ext_apply(X)
        ax, cx_ = ext[:N], ext[N]
        if cx_ < 0:
            q = (np.linalg.norm(ax) / maxA) / max(-cx_ / max(normC, 1e-12), 1e-300)
            if q <= opt.tol_ray:
                scale = -1.0 / cx_
                return SdpSolution(
                    status="primal_infeasible",
                    ray_matrices=[scale * _sym(Xb) for Xb in X],
                    iterations=it, mu=mu,
                    residuals={"ray_quality": float(q)},
                    message="LMI system certified infeasible by dual ray",
                )
        # user-dual infeasible (unbounded): y ray with sum y_i F_i psd, b.y > 0
        by = float(b @ y) if N else 0.0
        if by > 0 and N:
            viol = 0.0
            for Tb in T:
                Sray = np.tensordot(y, Tb[:N], axes=1)
                lam = float(np.linalg.eigvalsh(_sym(Sray)).min())
                viol = max(viol, max(0.0, -lam))
            q = (viol / maxA) / max(by / max(normb, 1e-12), 1e-300)
            if q <= opt.tol_ray:
                scale = 1.0 / by
                return SdpSolution(
                    status="dual_infeasible",
                    ray_x=scale * y.copy(),
                    iterations=it, mu=mu,
                    residuals={"ray_quality": float(q)},
                    message="objective certified unbounded by improving ray",
                )
        return None

    stall = 0
    it = 0
    mu = mu0
    best = None   # best de-homogenized iterate seen: (merit, x, obj, duals, residuals, mu)
    for it in range(1, opt.max_iter + 1):
        ext = ext_apply(X)
        ax, cx = ext[:N], ext[N]
        aty = at_y(y)
        Rd = [Cb * tau - Ab_y - Sb for Cb, Ab_y, Sb in zip(C, aty, S)]
        rp = b * tau - ax
        by = float(b @ y) if N else 0.0
        rg = by - cx - kappa
        xs = sum(float(np.tensordot(Xb, Sb)) for Xb, Sb in zip(X, S))
        mu = (xs + tau * kappa) / (nbar + 1)
        if not np.isfinite(mu) or tau <= 0 or kappa < 0:
            raise _Failure(f"iterate left the cone at iteration {it} (mu={mu!r}, tau={tau!r})")

        # convergence test on the de-homogenized candidate
        if tau > 1e-300:
            pobj, dobj = cx / tau, by / tau
            pin = max(
                float(np.linalg.norm(Rdb, "fro")) / (tau * (1.0 + float(np.linalg.norm(Cb, "fro"))))
                for Rdb, Cb in zip(Rd, C)
            )
            din = (float(np.max(np.abs(rp))) / (tau * (1.0 + binf))) if N else 0.0
            denom = 1.0 + abs(pobj) + abs(dobj)
            gap_c = xs / (tau * tau) / denom
            gap_o = abs(pobj - dobj) / denom
            if opt.verbose:
                print(f"  it {it:3d}  mu {mu:9.2e}  pin {pin:8.1e}  din {din:8.1e} "
                      f" gap {max(gap_c, gap_o):8.1e}  tau {tau:8.1e}  kappa {kappa:8.1e}")
            merit = max(pin, din, gap_c, gap_o)
            if best is None or merit < best[0]:
                best = (merit, y / tau, dobj,
                        [_sym(Xb) / tau for Xb in X],
                        {"primal": pin, "dual": din, "gap": max(gap_c, gap_o)}, mu)
            if pin <= opt.tol_feas and din <= opt.tol_feas and gap_c <= opt.tol_gap and gap_o <= opt.tol_gap:
                return SdpSolution(
                    status="optimal",
                    x=y / tau,
                    objective=dobj,
                    dual_matrices=[_sym(Xb) / tau for Xb in X],
                    iterations=it, mu=mu,
                    residuals={"primal": pin, "dual": din, "gap": max(gap_c, gap_o)},
                )

        if kappa > tau:
            hit = try_rays()
            if hit is not None:
                return hit

        # factorizations
        cholS, cholX, Sinv = [], [], []
        for Xb, Sb, s in zip(X, S, sizes):
            Ls = _chol(Sb)
            Lx = _chol(Xb)
            if Ls is None or Lx is None:
                if Ls is None:
                    jit = 1e-14 * max(1.0, float(np.trace(Sb)) / s)
                    Ls = _chol(Sb + jit * np.eye(s))
                if Lx is None:
                    jit = 1e-14 * max(1.0, float(np.trace(Xb)) / s)
                    Lx = _chol(Xb + jit * np.eye(s))
                if Ls is None or Lx is None:
                    raise _Failure(f"cone iterate lost definiteness at iteration {it}")
            cholS.append(Ls)
            cholX.append(Lx)
            inv = sla.cho_solve((Ls, True), np.eye(s))
            Sinv.append(_sym(inv))

        # Schur complement over (A_1..A_N, C)
        Mext = np.zeros((N + 1, N + 1))
        G_cache = []
        for Tb, Xb, Sib in zip(T, X, Sinv):
            Astk = np.concatenate([-Tb[:N], Tb[N:]], axis=0)  # A_i then C
            G = Astk @ Sib
            G = np.matmul(Xb[None, :, :], G)                  # X A_j S^{-1}
            G_cache.append((Astk, G))
            Mext += Astk.reshape(N + 1, -1) @ G.transpose(0, 2, 1).reshape(N + 1, -1).T
        Mext = _sym(Mext)
        M = Mext[:N, :N]
        u = Mext[:N, N]
        c_cc = float(Mext[N, N])

        Mfac = None
        base = float(np.trace(M)) / max(N, 1) if N else 1.0
        for jit in (0.0, 1e-14, 1e-12, 1e-10, 1e-8):
            try:
                Mfac = sla.cho_factor(M + jit * max(base, 1e-300) * np.eye(N)) if N else None
                break
            except np.linalg.LinAlgError:
                continue
        if N and Mfac is None:
            raise _Failure(f"Schur complement not positive definite at iteration {it}")

        def msolve(v):
            return sla.cho_solve(Mfac, v) if N else np.zeros(0)

        def P(Ms: list) -> list:
            return [_sym(Xb @ Mb @ Sib) for Xb, Mb, Sib in zip(X, Ms, Sinv)]

        def direction(nu, corr, corr_g, e):
            """One Newton solve of the embedding for target nu, residual factor e."""
            if corr is None:
                Rx = [nu * Sib - Xb for Sib, Xb in zip(Sinv, X)]
            else:
                Rx = [nu * Sib - Xb - _sym(Kb @ Sib)
                      for Sib, Xb, Kb in zip(Sinv, X, corr)]
            arx = ext_apply(Rx)
            prd = P(Rd)
            aprd = ext_apply(prd)
            r1 = e * rp + e * aprd[:N] - arx[:N]
            r2 = -e * rg + arx[N] - e * aprd[N] + (nu - tau * kappa - corr_g) / tau
            q1 = msolve(r1)
            qb = msolve(b)
            qu = msolve(u)
            q2 = qb + qu
            # pivot = b M^-1 b + (c_cc - u M^-1 u) + kappa/tau; first two terms are
            # nonnegative in exact arithmetic, so clamp them against roundoff
            den = (max(0.0, float(b @ qb)) + max(0.0, c_cc - float(u @ qu)) if N else c_cc) \
                + kappa / tau
            if den <= 0 or not np.isfinite(den):
                raise _Failure(f"embedding pivot {den!r} not positive at iteration {it}")
            dtau = (r2 - (float((b - u) @ q1) if N else 0.0)) / den
            dy = q1 + dtau * q2
            dS = [Cb * dtau - Ab_dy + e * Rdb
                  for Cb, Ab_dy, Rdb in zip(C, at_y(dy), Rd)]
            dX = [Rxb - _sym(Xb @ dSb @ Sib)
                  for Rxb, Xb, dSb, Sib in zip(Rx, X, dS, Sinv)]
            dkappa = (nu - tau * kappa - corr_g - kappa * dtau) / tau
            return dy, dtau, dkappa, dX, dS

        def max_alpha(dX, dS, dtau, dkappa):
            a = np.inf
            for Lx, dXb in zip(cholX, dX):
                a = min(a, _max_step(Lx, dXb))
            for Ls, dSb in zip(cholS, dS):
                a = min(a, _max_step(Ls, dSb))
            if dtau < 0:
                a = min(a, -tau / dtau)
            if dkappa < 0:
                a = min(a, -kappa / dkappa)
            return a

        # predictor
        dy_a, dtau_a, dkap_a, dX_a, dS_a = direction(0.0, None, 0.0, 1.0)
        a_aff = min(1.0, max_alpha(dX_a, dS_a, dtau_a, dkap_a))
        xs_aff = sum(
            float(np.tensordot(Xb + a_aff * dXb, Sb + a_aff * dSb))
            for Xb, dXb, Sb, dSb in zip(X, dX_a, S, dS_a)
        )
        mu_aff = (xs_aff + (tau + a_aff * dtau_a) * (kappa + a_aff * dkap_a)) / (nbar + 1)
        sigma = min(0.99, max(1e-10, (max(mu_aff, 0.0) / mu) ** 3))

        # corrector
        corr = [dXb @ dSb for dXb, dSb in zip(dX_a, dS_a)]
        dy, dtau, dkap, dX, dS = direction(sigma * mu, corr, dtau_a * dkap_a, 1.0 - sigma)
        alpha = min(1.0, opt.step_frac * max_alpha(dX, dS, dtau, dkap))
        if not np.isfinite(alpha) or alpha <= 0:
            raise _Failure(f"no usable step at iteration {it}")

        X = [_sym(Xb + alpha * dXb) for Xb, dXb in zip(X, dX)]
        S = [_sym(Sb + alpha * dSb) for Sb, dSb in zip(S, dS)]
        y = y + alpha * dy
        tau += alpha * dtau
        kappa += alpha * dkap
        stall = stall + 1 if alpha < 1e-7 else 0
        if stall >= 3:
            break

    hit = try_rays()
    if hit is not None:
        return hit
    if best is not None:
        merit, xb, objb, dualsb, resb, mub = best
        return SdpSolution(
            status="max_iterations",
            x=xb, objective=objb, dual_matrices=dualsb,
            iterations=it, mu=mub, residuals=resb,
            message="iteration limit (or stalled step) before reaching tolerances",
        )
    return SdpSolution(
        status="max_iterations",
        x=(y / tau if tau > 1e-300 else None),
        objective=(float(b @ y) / tau if (N and tau > 1e-300) else None),
        dual_matrices=[_sym(Xb) / tau for Xb in X] if tau > 1e-300 else None,
        iterations=it,
        mu=mu,
        message="iteration limit (or stalled step) before reaching tolerances",
    )


# -- independent verification helpers ---------------------------------------


def kkt_residuals(problem: SdpProblem, x: np.ndarray, dual_matrices: list | None = None) -> dict:
    """Recompute scaled KKT residuals from the problem data alone.

    primal: worst relative negative eigenvalue of any block at x.
    dual:   worst relative violation of c_i + sum_b <F_i, X_b> = 0.
    gap:    relative mismatch of c.x against sum_b <F_0, X_b>.
    Only "primal" is reported when dual matrices are not supplied.
    """
    x = np.asarray(x, dtype=float)
    out = {}
    worst = 0.0
    for bi, blk in enumerate(problem.blocks):
        T = blk.dense(problem.num_vars)
        F = T[problem.num_vars] + np.tensordot(x, T[: problem.num_vars], axes=1)
        lam = float(np.linalg.eigvalsh(_sym(F)).min())
        scale = 1.0 + float(np.linalg.norm(T[problem.num_vars], "fro"))
        worst = max(worst, max(0.0, -lam) / scale)
    out["primal"] = worst
    if dual_matrices is None:
        return out
    N = problem.num_vars
    lin = np.zeros(N)
    obj_dual = 0.0
    psd_viol = 0.0
    for blk, Xb in zip(problem.blocks, dual_matrices):
        T = blk.dense(N)
        v = T.reshape(N + 1, -1) @ np.asarray(Xb, dtype=float).reshape(-1)
        lin += v[:N]
        obj_dual += float(v[N])
        lam = float(np.linalg.eigvalsh(_sym(np.asarray(Xb))).min())
        psd_viol = max(psd_viol, max(0.0, -lam) / (1.0 + float(np.linalg.norm(Xb, "fro"))))
    cinf = 1.0 + float(np.max(np.abs(problem.objective))) if N else 1.0
    out["dual"] = max(float(np.max(np.abs(problem.objective + lin))) / cinf if N else 0.0,
                      psd_viol)
    cx = float(problem.objective @ x)
    out["gap"] = abs(cx - obj_dual) / (1.0 + abs(cx) + abs(obj_dual))
    return out


def check_infeasibility_ray(problem: SdpProblem, ray_matrices: list) -> dict:
    """Score a claimed infeasibility certificate: X_b psd, <F_i, X> = 0, <F_0, X> < 0."""
    N = problem.num_vars
    lin = np.zeros(N)
    const = 0.0
    psd_viol = 0.0
    for blk, Xb in zip(problem.blocks, ray_matrices):
        T = blk.dense(N)
        v = T.reshape(N + 1, -1) @ np.asarray(Xb, dtype=float).reshape(-1)
        lin += v[:N]
        const += float(v[N])
        lam = float(np.linalg.eigvalsh(_sym(np.asarray(Xb))).min())
        psd_viol = max(psd_viol, max(0.0, -lam))
    return {
        "lin_violation": float(np.max(np.abs(lin))) if N else 0.0,
        "const_value": const,       # must be negative
        "psd_violation": psd_viol,
    }


def check_unbounded_ray(problem: SdpProblem, ray_x: np.ndarray) -> dict:
    """Score a claimed improving ray: sum x_i F_i psd and c.x > 0."""
    ray_x = np.asarray(ray_x, dtype=float)
    lam_min = np.inf
    for blk in problem.blocks:
        T = blk.dense(problem.num_vars)
        Sray = np.tensordot(ray_x, T[: problem.num_vars], axes=1)
        lam_min = min(lam_min, float(np.linalg.eigvalsh(_sym(Sray)).min()))
    return {
        "lambda_min": lam_min,                       # must be >= -tol
        "objective_gain": float(problem.objective @ ray_x),   # must be positive
    }
