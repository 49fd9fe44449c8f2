"""Semialgebraic sets K = {x : g_1(x) >= 0, ..., g_m(x) >= 0} and the
generator families whose localizing matrices drive the SDP hierarchy.

Two families per set: the truncated quadratic module family (g_0 = 1 together
with each g_i) and the preordering family (all 2^m products g_1^e1 ... g_m^em,
e in {0,1}^m).  Each family member carries its half degree
ceil(deg/2), except the constant member which counts as 0, and the family
exposes d_g = max(1, max_i ceil(deg g_i / 2)), the step the flatness rank
condition looks back by.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .moments import Polynomial, half_degree

PREORDERING_CAP = 12


@dataclass(frozen=True)
class FamilyMember:
    """One generator product: label nu, the polynomial, its half degree."""

    label: tuple[int, ...]
    poly: Polynomial
    half_deg: int


@dataclass(frozen=True)
class GeneratorFamily:
    """g_0 = 1 plus products of set generators, with degree bookkeeping."""

    kind: str                      # "quadratic_module" | "preordering"
    members: tuple[FamilyMember, ...]

    @property
    def d_g(self) -> int:
        return max([1] + [m.half_deg for m in self.members])

    def orders(self, k: int) -> list[int]:
        """Localizing-matrix orders k - d_nu for each member."""
        return [k - m.half_deg for m in self.members]


@dataclass
class SemialgebraicSet:
    """K described by inequality generators, with optional metric hints.

    radius: R with K contained in the centered ball of radius R (compactness
    witness; needed for sound nonexistence claims and for Monte Carlo
    references).  interior_witness: (center, r) with the closed ball
    B(center, r) inside K, used as the default reference-measure support.
    """

    n: int
    generators: list[Polynomial] = field(default_factory=list)
    radius: float | None = None
    interior_witness: tuple[np.ndarray, float] | None = None

    def __post_init__(self):
        for g in self.generators:
            if g.n != self.n:
                raise ValueError("generator has wrong variable count")
        if self.radius is not None and self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.interior_witness is not None:
            c, r = self.interior_witness
            c = np.asarray(c, dtype=float)
            if c.shape != (self.n,):
                raise ValueError("witness center has wrong length")
            if r <= 0:
                raise ValueError("witness radius must be positive")
            self.interior_witness = (c, float(r))
            self._spot_check_witness()

    @property
    def m(self) -> int:
        return len(self.generators)

    @property
    def is_rn(self) -> bool:
        return self.m == 0

    def _spot_check_witness(self, samples: int = 512, tol: float = 1e-9):
        """Sample the witness ball; every generator must be >= -tol there."""
        c, r = self.interior_witness
        rng = np.random.default_rng(np.random.Philox(key=12345))
        u = rng.standard_normal((samples, self.n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        radii = r * rng.random(samples) ** (1.0 / self.n)
        pts = np.vstack([c[None, :], c + radii[:, None] * u])
        for g in self.generators:
            vals = g(pts)
            if np.min(vals) < -tol:
                raise ValueError(
                    f"interior witness ball leaves K: generator dips to {np.min(vals):.3g}"
                )

    def half_degrees(self) -> tuple[list[int], int]:
        """Per-generator half degrees and the family step d_g = max(1, ...)."""
        halves = [half_degree(g) for g in self.generators]
        return halves, max([1] + halves)

    def quadratic_module_family(self) -> GeneratorFamily:
        members = [FamilyMember(label=(0,) * self.m, poly=Polynomial.constant(self.n, 1.0), half_deg=0)]
        for i, g in enumerate(self.generators):
            label = tuple(1 if j == i else 0 for j in range(self.m))
            members.append(FamilyMember(label=label, poly=g, half_deg=half_degree(g)))
        return GeneratorFamily(kind="quadratic_module", members=tuple(members))

    def preordering_family(self) -> GeneratorFamily:
        if self.m > PREORDERING_CAP:
            raise ValueError(
                f"preordering has 2^{self.m} members; cap is m <= {PREORDERING_CAP}"
            )
        members = []
        for mask in itertools.product((0, 1), repeat=self.m):
            poly = Polynomial.constant(self.n, 1.0)
            for i, bit in enumerate(mask):
                if bit:
                    poly = poly * self.generators[i]
            members.append(FamilyMember(
                label=mask, poly=poly,
                half_deg=0 if not any(mask) else half_degree(poly),
            ))
        return GeneratorFamily(kind="preordering", members=tuple(members))

    def family(self, mode: str) -> GeneratorFamily:
        if mode == "qm":
            return self.quadratic_module_family()
        if mode == "pre":
            return self.preordering_family()
        raise ValueError(f"unknown family mode {mode!r} (want 'qm' or 'pre')")

    def contains(self, points: np.ndarray, tol: float = 1e-9) -> np.ndarray:
        """Boolean mask of points satisfying every generator >= -tol."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        ok = np.ones(pts.shape[0], dtype=bool)
        for g in self.generators:
            ok &= np.asarray(g(pts)) >= -tol
        if self.radius is not None:
            ok &= np.einsum("ij,ij->i", pts, pts) <= self.radius**2 + tol
        return ok


def ball_set(n: int, radius: float, center: np.ndarray | None = None) -> SemialgebraicSet:
    """{x : radius^2 - ||x - center||^2 >= 0} with consistent hints."""
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)
    g = Polynomial.constant(n, float(radius) ** 2 - float(c @ c))
    for i in range(n):
        g = g + Polynomial.variable(n, i) * (2.0 * c[i])
        g = g - Polynomial.variable(n, i) * Polynomial.variable(n, i)
    out_radius = float(np.linalg.norm(c) + radius)
    return SemialgebraicSet(
        n=n, generators=[g], radius=out_radius,
        interior_witness=(c, float(radius)),
    )


def box_set(n: int, lo: float = -1.0, hi: float = 1.0) -> SemialgebraicSet:
    """Product box [lo, hi]^n via the n quadratics (hi - x_i)(x_i - lo)."""
    if hi <= lo:
        raise ValueError("need lo < hi")
    gens = []
    for i in range(n):
        xi = Polynomial.variable(n, i)
        gens.append((Polynomial.constant(n, hi) - xi) * (xi - Polynomial.constant(n, lo)))
    c = np.full(n, (lo + hi) / 2.0)
    r = (hi - lo) / 2.0
    return SemialgebraicSet(
        n=n, generators=gens,
        radius=float(np.linalg.norm(c) + r * np.sqrt(n)),
        interior_witness=(c, r),
    )
