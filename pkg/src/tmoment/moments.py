"""Truncated moment sequences and the Riesz functional calculus.

A truncated moment sequence (tms) of degree d in n variables is a vector y
indexed by the graded lex monomial basis of R[x]_d.  The two workhorses are
the Riesz functional L_y(p) = sum_a p_a y_a and the shifted sequence h * y
defined by (h * y)_b = sum_g h_g y_{b+g}, tied together by the identity

    L_y(h q) = L_{h*y}(q)        for deg h + deg q <= d.

Moment and localizing matrices are Hankel-like reshapes of these sequences:
M_k(y)[a, b] = y_{a+b} and M_k(g, y) = M_{k - ceil(deg g / 2)}(g * y).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .monomials import MonomialBasis, basis, monomial_count


class Polynomial:
    """Sparse multivariate polynomial: exponent tuple -> coefficient."""

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: dict | None = None):
        self.n = int(n)
        self.terms: dict[tuple[int, ...], float] = {}
        if terms:
            for a, c in terms.items():
                key = tuple(int(v) for v in a)
                if len(key) != self.n:
                    raise ValueError(f"exponent {key} has wrong arity for n={self.n}")
                if any(v < 0 for v in key):
                    raise ValueError(f"negative exponent in {key}")
                c = float(c)
                if c != 0.0:
                    self.terms[key] = self.terms.get(key, 0.0) + c
            self.terms = {a: c for a, c in self.terms.items() if c != 0.0}

    # -- constructors -----------------------------------------------------

    @classmethod
    def constant(cls, n: int, c: float) -> "Polynomial":
        return cls(n, {(0,) * n: c})

    @classmethod
    def variable(cls, n: int, i: int) -> "Polynomial":
        """x_{i+1}, zero-based i."""
        e = [0] * n
        e[i] = 1
        return cls(n, {tuple(e): 1.0})

    @classmethod
    def from_coeffs(cls, n: int, d: int, coeffs: np.ndarray) -> "Polynomial":
        b = basis(n, d)
        return cls(n, {b.exponent(i): c for i, c in enumerate(np.asarray(coeffs, dtype=float))})

    # -- structure ---------------------------------------------------------

    @property
    def degree(self) -> int:
        if not self.terms:
            return 0
        return max(sum(a) for a in self.terms)

    def coeff_vector(self, d: int | None = None) -> np.ndarray:
        """Dense coefficient vector in the graded lex basis of degree d."""
        d = self.degree if d is None else int(d)
        if d < self.degree:
            raise ValueError(f"degree {d} cannot hold a degree-{self.degree} polynomial")
        b = basis(self.n, d)
        v = np.zeros(len(b))
        for a, c in self.terms.items():
            v[b.index_of(a)] = c
        return v

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out.get(a, 0.0) + c
        return Polynomial(self.n, out)

    def __radd__(self, other):
        return self.__add__(other)

    def __neg__(self):
        return Polynomial(self.n, {a: -c for a, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return Polynomial(self.n, {a: c * float(other) for a, c in self.terms.items()})
        other = self._coerce(other)
        out: dict[tuple[int, ...], float] = {}
        for a, ca in self.terms.items():
            for b, cb in other.terms.items():
                key = tuple(x + y for x, y in zip(a, b))
                out[key] = out.get(key, 0.0) + ca * cb
        return Polynomial(self.n, out)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        out = Polynomial.constant(self.n, 1.0)
        for _ in range(int(k)):
            out = out * self
        return out

    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.n != self.n:
                raise ValueError("mixed variable counts")
            return other
        if np.isscalar(other):
            return Polynomial.constant(self.n, float(other))
        raise TypeError(f"cannot combine Polynomial with {type(other)!r}")

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __call__(self, points) -> np.ndarray | float:
        """Evaluate at one point (n,) or many points (m, n)."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        vals = np.zeros(pts.shape[0])
        for a, c in self.terms.items():
            vals += c * np.prod(pts ** np.asarray(a), axis=1)
        return float(vals[0]) if single else vals

    def __repr__(self):
        return f"Polynomial(n={self.n}, {format_polynomial(self)!r})"


def format_polynomial(p: Polynomial) -> str:
    """Render in the CLI grammar: terms like 3*x1^2*x2 joined by +/-."""
    if not p.terms:
        return "0"
    keys = sorted(p.terms, key=lambda a: (sum(a), tuple(-v for v in a)))
    pieces = []
    for a in keys:
        c = p.terms[a]
        mono = "*".join(
            f"x{j + 1}" if e == 1 else f"x{j + 1}^{e}"
            for j, e in enumerate(a) if e != 0
        )
        mag = abs(c)
        if not mono:
            body = repr(mag)
        elif mag == 1.0:
            body = mono
        else:
            body = f"{mag!r}*{mono}"
        if not pieces:
            pieces.append(body if c >= 0 else f"-{body}")
        else:
            pieces.append(f"+ {body}" if c >= 0 else f"- {body}")
    return " ".join(pieces)


@dataclass
class Tms:
    """Truncated moment sequence: values over the graded lex basis of degree d."""

    n: int
    d: int
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        want = monomial_count(self.n, self.d)
        if self.values.shape != (want,):
            raise ValueError(
                f"tms for (n={self.n}, d={self.d}) needs {want} values, got shape {self.values.shape}"
            )

    @property
    def basis(self) -> MonomialBasis:
        return basis(self.n, self.d)

    def __getitem__(self, alpha) -> float:
        return float(self.values[self.basis.index_of(alpha)])

    def truncate(self, t: int) -> "Tms":
        """Leading subsequence of degree t <= d (graded order is a prefix code)."""
        if t > self.d or t < 0:
            raise ValueError(f"cannot truncate degree-{self.d} tms to degree {t}")
        return Tms(self.n, t, self.values[: monomial_count(self.n, t)].copy())

    def copy(self) -> "Tms":
        return Tms(self.n, self.d, self.values.copy())


def riesz(y: Tms, p: Polynomial) -> float:
    """L_y(p) = sum_a p_a y_a; requires deg p <= y.d."""
    if p.n != y.n:
        raise ValueError("variable count mismatch")
    b = y.basis
    total = 0.0
    for a, c in p.terms.items():
        total += c * y.values[b.index_of(a)]
    return total


def shift(h: Polynomial, y: Tms) -> Tms:
    """(h * y)_b = sum_g h_g y_{b+g}, a tms of degree y.d - deg h."""
    if h.n != y.n:
        raise ValueError("variable count mismatch")
    dh = h.degree
    if dh > y.d:
        raise ValueError(f"shift degree {dh} exceeds tms degree {y.d}")
    dout = y.d - dh
    bout = basis(y.n, dout)
    bin_ = y.basis
    out = np.zeros(len(bout))
    for g, c in h.terms.items():
        idx = np.array([bin_.index_of(tuple(b + np.asarray(g))) for b in bout.exponents])
        out += c * y.values[idx]
    return Tms(y.n, dout, out)


def moment_index_table(n: int, k: int, top: int) -> np.ndarray:
    """T[i, j] = index of a_i + a_j in the degree-`top` basis, for |a| <= k."""
    bk = basis(n, k)
    btop = basis(n, top)
    N = len(bk)
    tab = np.empty((N, N), dtype=np.int64)
    for i in range(N):
        ai = bk.exponents[i]
        for j in range(i, N):
            idx = btop.index_of(tuple(ai + bk.exponents[j]))
            tab[i, j] = idx
            tab[j, i] = idx
    return tab


@dataclass
class MomentMatrix:
    """A (localizing) moment matrix plus the linear map that filled it.

    entry_source holds, for each cell (i, j), the list of (source index,
    coefficient) pairs into the originating tms, so relaxation builders can
    emit SDP constraint matrices without re-deriving the map.  For a plain
    moment matrix there is one unit-coefficient pair per cell; for a
    localizing matrix of g there is one pair per term of g.
    """

    n: int
    order: int
    entries: np.ndarray
    index_table: np.ndarray = field(repr=False)      # (N, N) into source basis, plain part
    generator: Polynomial | None = None

    @property
    def size(self) -> int:
        return self.entries.shape[0]


def moment_matrix(y: Tms, k: int) -> MomentMatrix:
    """M_k(y)[a, b] = y_{a+b}; requires 2k <= y.d."""
    if 2 * k > y.d:
        raise ValueError(f"moment matrix of order {k} needs degree {2 * k}, tms has {y.d}")
    tab = moment_index_table(y.n, k, y.d)
    return MomentMatrix(n=y.n, order=k, entries=y.values[tab], index_table=tab)


def half_degree(g: Polynomial) -> int:
    """ceil(deg g / 2)."""
    return (g.degree + 1) // 2


def localizing_matrix(g: Polynomial, y: Tms, k: int) -> MomentMatrix:
    """M_{k - ceil(deg g/2)}(g * y), the localizing matrix of g at order k.

    Entries equal sum_g g_c y_{a+b+c}; computed exactly as the moment matrix
    of the shifted sequence so the identity with `shift` holds bit for bit.
    """
    dg = half_degree(g)
    if k - dg < 0:
        raise ValueError(f"order {k} too small for generator of degree {g.degree}")
    z = shift(g, y)
    m = moment_matrix(z, k - dg)
    return MomentMatrix(n=y.n, order=k - dg, entries=m.entries,
                        index_table=m.index_table, generator=g)


def tms_from_atoms(n: int, d: int, points: np.ndarray, weights: np.ndarray) -> Tms:
    """Moments of the atomic measure sum_j w_j delta(u_j) up to degree d."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.asarray(weights, dtype=float)
    if pts.shape[0] != w.shape[0]:
        raise ValueError("points/weights length mismatch")
    b = basis(n, d)
    if pts.shape[0] == 0:
        return Tms(n, d, np.zeros(len(b)))
    return Tms(n, d, b.evaluate(pts).T @ w)
