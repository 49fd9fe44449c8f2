"""Graded lexicographic monomial bookkeeping.

Monomials x^a in n variables are ordered first by total degree, then
lexicographically with x1 > x2 > ... > xn, so the list for (n=2, d=2) is

    1, x1, x2, x1^2, x1*x2, x2^2.

Every truncated moment sequence, moment matrix row/column labeling and
polynomial coefficient vector in this package uses this one ordering.  The
ordering is a prefix code in the degree: the basis for degree d is the first
binom(n+d, d) entries of the basis for any d' >= d.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterator

import numpy as np

# Allocation guard: basis tables above this length are refused rather than
# letting numpy attempt a multi-gigabyte allocation.
MAX_BASIS_LEN = 50_000_000


class CapacityError(ValueError):
    """Requested basis is too large to tabulate."""


def monomial_count(n: int, d: int) -> int:
    """Number of monomials in n variables of total degree <= d."""
    if n < 1 or d < 0:
        raise ValueError(f"need n >= 1 and d >= 0, got n={n}, d={d}")
    return math.comb(n + d, d)


def degree_count(n: int, t: int) -> int:
    """Number of monomials of total degree exactly t."""
    return math.comb(n + t - 1, t)


def _exponents_of_degree(n: int, total: int) -> Iterator[tuple[int, ...]]:
    # lex order with x1 greatest: leading exponent descending, recurse on rest
    if n == 1:
        yield (total,)
        return
    for a in range(total, -1, -1):
        for rest in _exponents_of_degree(n - 1, total - a):
            yield (a,) + rest


def iter_exponents(n: int, d: int) -> Iterator[tuple[int, ...]]:
    """All exponents with |a| <= d in graded lex order."""
    for total in range(d + 1):
        yield from _exponents_of_degree(n, total)


@dataclass(frozen=True)
class MonomialBasis:
    """The graded lex basis of R[x1..xn]_d with O(1) index lookup."""

    n: int
    d: int
    exponents: np.ndarray = field(repr=False)   # (len, n) int64
    degrees: np.ndarray = field(repr=False)     # (len,) int64
    _index: dict = field(repr=False)

    def __len__(self) -> int:
        return self.exponents.shape[0]

    def index_of(self, alpha) -> int:
        """Position of exponent alpha; KeyError if |alpha| > d."""
        key = tuple(int(a) for a in alpha)
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"monomial {key} not in basis (n={self.n}, d={self.d})") from None

    def __contains__(self, alpha) -> bool:
        return tuple(int(a) for a in alpha) in self._index

    def exponent(self, i: int) -> tuple[int, ...]:
        return tuple(int(a) for a in self.exponents[i])

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Vandermonde-style array V[p, i] = u_p^{a_i} for points (m, n)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.n:
            raise ValueError(f"points have {pts.shape[1]} coordinates, basis has n={self.n}")
        # power table per variable, then product across variables
        out = np.ones((pts.shape[0], len(self)))
        for j in range(self.n):
            pows = np.vander(pts[:, j], N=self.d + 1, increasing=True)
            out *= pows[:, self.exponents[:, j]]
        return out


@lru_cache(maxsize=None)
def basis(n: int, d: int) -> MonomialBasis:
    """Cached graded lex basis for (n, d)."""
    count = monomial_count(n, d)
    if count > MAX_BASIS_LEN:
        raise CapacityError(f"basis for (n={n}, d={d}) has {count} monomials")
    exps = np.array(list(iter_exponents(n, d)), dtype=np.int64)
    degs = exps.sum(axis=1)
    index = {tuple(int(a) for a in e): i for i, e in enumerate(exps)}
    return MonomialBasis(n=n, d=d, exponents=exps, degrees=degs, _index=index)
