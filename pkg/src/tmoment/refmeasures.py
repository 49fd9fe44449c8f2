"""Reference measures: strictly positive measures on K whose truncated
moments seed the hierarchy (the xi in y - lambda*xi).

Analytic closed forms for balls, product Gaussians and boxes; seeded
rejection sampling for anything else.  All return probability measures
(mass 1) as Tms in the shared graded lex order.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb, gamma

import numpy as np

from .monomials import basis
from .moments import Polynomial, Tms
from .semialg import SemialgebraicSet


class SamplingError(RuntimeError):
    """Monte Carlo reference could not hit K often enough."""


def _binomial_shift(y: Tms, center: np.ndarray) -> Tms:
    """Moments of X + c from moments of X: E (X+c)^a = sum binom * c^(a-b) E X^b."""
    c = np.asarray(center, dtype=float)
    if not c.any():
        return y
    b = y.basis
    out = np.zeros_like(y.values)
    for i, a in enumerate(b.exponents):
        acc = 0.0
        # iterate sub-exponents b <= a
        ranges = [range(int(ai) + 1) for ai in a]
        for sub in itertools.product(*ranges):
            w = 1.0
            for ai, bi, ci in zip(a, sub, c):
                w *= comb(int(ai), bi) * ci ** (int(ai) - bi)
            acc += w * y.values[b.index_of(sub)]
        out[i] = acc
    return Tms(y.n, y.d, out)


def ball_uniform_moments(n: int, d: int, center=None, radius: float = 1.0) -> Tms:
    """Uniform probability measure on the ball B(center, radius).

    Centered moments via the sphere-measure product formula: with
    b_i = (a_i + 1)/2 and all a_i even,
        E x^a = 2 prod Gamma(b_i) / (Gamma(sum b_i) (|a| + n)) / vol(B_n),
    zero when any a_i is odd; then scaled by radius^|a| and binomially
    shifted to the center.
    """
    b = basis(n, d)
    vol = np.pi ** (n / 2) / gamma(n / 2 + 1)
    vals = np.zeros(len(b))
    for i, a in enumerate(b.exponents):
        if any(ai % 2 for ai in a):
            continue
        bs = [(int(ai) + 1) / 2 for ai in a]
        num = 2.0
        for bi in bs:
            num *= gamma(bi)
        sphere = num / gamma(sum(bs))
        vals[i] = sphere / (int(a.sum()) + n) / vol * float(radius) ** int(a.sum())
    y = Tms(n, d, vals)
    if center is not None:
        y = _binomial_shift(y, np.asarray(center, dtype=float))
    return y


def gaussian_moments(n: int, d: int) -> Tms:
    """Standard product Gaussian: E x^a = prod (a_i - 1)!! for even a_i, else 0."""
    def dfact(k: int) -> float:
        out = 1.0
        while k > 1:
            out *= k
            k -= 2
        return out

    b = basis(n, d)
    vals = np.zeros(len(b))
    for i, a in enumerate(b.exponents):
        if any(ai % 2 for ai in a):
            continue
        v = 1.0
        for ai in a:
            v *= dfact(int(ai) - 1)
        vals[i] = v
    return Tms(n, d, vals)


def box_uniform_moments(n: int, d: int, lo: float = -1.0, hi: float = 1.0) -> Tms:
    """Uniform on [lo, hi]^n: product of (hi^(a+1) - lo^(a+1)) / ((a+1)(hi-lo))."""
    if hi <= lo:
        raise ValueError("need lo < hi")
    b = basis(n, d)
    one_d = np.array([
        (hi ** (k + 1) - lo ** (k + 1)) / ((k + 1) * (hi - lo))
        for k in range(d + 1)
    ])
    vals = np.ones(len(b))
    for j in range(n):
        vals *= one_d[b.exponents[:, j]]
    return Tms(n, d, vals)


def monte_carlo_moments(
    K: SemialgebraicSet,
    d: int,
    samples: int = 1_000_000,
    seed: int = 0,
    min_acceptance: float = 1e-4,
) -> Tms:
    """Empirical moments of the uniform measure on K by rejection sampling.

    Proposals are uniform on the enclosing ball named by K.radius (required).
    Counter-based Philox stream keyed by the seed, fixed batch size, so the
    result is deterministic per seed.  Raises SamplingError when fewer than
    min_acceptance of proposals land in K.
    """
    if K.radius is None:
        raise ValueError("Monte Carlo reference needs K.radius")
    if samples < 100_000:
        raise ValueError("use at least 1e5 samples")
    rng = np.random.Generator(np.random.Philox(key=seed))
    b = basis(K.n, d)
    acc = np.zeros(len(b))
    n_acc = 0
    batch = 65_536
    drawn = 0
    while drawn < samples:
        take = min(batch, samples - drawn)
        u = rng.standard_normal((take, K.n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        r = K.radius * rng.random(take) ** (1.0 / K.n)
        pts = r[:, None] * u
        drawn += take
        mask = K.contains(pts, tol=0.0)
        if mask.any():
            acc += b.evaluate(pts[mask]).sum(axis=0)
            n_acc += int(mask.sum())
    if n_acc < min_acceptance * samples:
        raise SamplingError(
            f"acceptance rate {n_acc / samples:.2e} below {min_acceptance:.0e}; "
            "supply an analytic reference or a tighter radius"
        )
    return Tms(K.n, d, acc / n_acc)


@dataclass
class ReferenceSpec:
    """Serializable recipe for a reference measure.

    kind: "ball" (params center, radius), "gaussian", "box" (lo, hi),
    "monte_carlo" (samples, seed).
    """

    kind: str
    params: dict = field(default_factory=dict)

    def moments(self, K: SemialgebraicSet, d: int) -> Tms:
        if self.kind == "ball":
            return ball_uniform_moments(
                K.n, d,
                center=self.params.get("center"),
                radius=float(self.params.get("radius", 1.0)),
            )
        if self.kind == "gaussian":
            return gaussian_moments(K.n, d)
        if self.kind == "box":
            return box_uniform_moments(
                K.n, d,
                lo=float(self.params.get("lo", -1.0)),
                hi=float(self.params.get("hi", 1.0)),
            )
        if self.kind == "monte_carlo":
            return monte_carlo_moments(
                K, d,
                samples=int(self.params.get("samples", 1_000_000)),
                seed=int(self.params.get("seed", 0)),
            )
        raise ValueError(f"unknown reference kind {self.kind!r}")

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        out.update({
            k: (list(map(float, v)) if isinstance(v, (list, tuple, np.ndarray)) else v)
            for k, v in self.params.items()
        })
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ReferenceSpec":
        params = {k: v for k, v in obj.items() if k != "kind"}
        return cls(kind=obj["kind"], params=params)


def default_reference(K: SemialgebraicSet, d: int) -> tuple[Tms, ReferenceSpec]:
    """Pick a strictly K-positive reference: witness ball if declared,
    Gaussian on all of R^n, else Monte Carlo over the enclosing ball."""
    if K.interior_witness is not None:
        c, r = K.interior_witness
        spec = ReferenceSpec("ball", {"center": list(map(float, c)), "radius": float(r)})
    elif K.is_rn:
        spec = ReferenceSpec("gaussian")
    else:
        spec = ReferenceSpec("monte_carlo", {"samples": 1_000_000, "seed": 0})
    return spec.moments(K, d), spec
