"""Hadamard matrices supplying the balancing signs for half-sample replication.

Construction repertoire: Sylvester doubling from order 1, the Paley quadratic
residue construction for orders q+1 with q a prime congruent to 3 mod 4, and
Sylvester doubling of Paley matrices.  Entries are kept as exact integers and
every orthogonality property is checked in integer arithmetic, so the checks
are equalities rather than tolerances.

Constructed matrices are normalized so that their first column is all ones.
Every other column is orthogonal to it and therefore sums to zero; those are
the columns a balanced replication scheme may use, which is why a matrix of
order R supplies at most R - 1 sign columns.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InsufficientBalancedColumns, UnconstructibleOrder

_H2 = np.array([[1, 1], [1, -1]], dtype=np.int64)


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class HadamardMatrix:
    """R x R matrix of +-1 integers with M'M = R*I; rejects anything else."""

    order: int
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=np.int64)
        if e.shape != (self.order, self.order):
            raise ValueError(f"entries must be ({self.order}, {self.order}), got {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)
        if not verify(e):
            raise ValueError(f"order-{self.order} matrix is not Hadamard (entries not +-1 or M'M != R*I)")


def verify(matrix) -> bool:
    """True iff the matrix is +-1 valued with M'M = R*I, in exact integer arithmetic."""
    e = matrix.entries if isinstance(matrix, HadamardMatrix) else np.asarray(matrix)
    if e.ndim != 2 or e.shape[0] != e.shape[1]:
        return False
    e = e.astype(np.int64)
    if not np.isin(e, (-1, 1)).all():
        return False
    n = e.shape[0]
    return bool((e.T @ e == n * np.eye(n, dtype=np.int64)).all())


def _paley(q: int) -> np.ndarray:
    """Order q+1 matrix from quadratic residues mod q, q prime, q % 4 == 3."""
    residues = np.zeros(q, dtype=bool)
    residues[[(x * x) % q for x in range(1, q)]] = True
    chi = np.where(residues, np.int64(1), np.int64(-1))
    chi[0] = 0

    n = q + 1
    h = np.ones((n, n), dtype=np.int64)
    idx = np.arange(q)
    h[1:, 0] = -1
    h[1:, 1:] = chi[(idx[:, None] - idx[None, :]) % q]
    np.fill_diagonal(h[1:, 1:], 1)
    # flip rows so column 0 is all ones; row flips preserve M'M = R*I
    return h * h[:, :1]


def _build(order: int) -> np.ndarray:
    if order == 1:
        return np.array([[1]], dtype=np.int64)
    if order == 2:
        return _H2.copy()
    if order < 4 or order % 4 != 0:
        raise UnconstructibleOrder(f"order {order}: must be 1, 2, or a positive multiple of 4")
    if order & (order - 1) == 0:
        m = np.array([[1]], dtype=np.int64)
        while m.shape[0] < order:
            m = np.kron(_H2, m)
        return m
    q = order - 1
    if q % 4 == 3 and _is_prime(q):
        return _paley(q)
    half = order // 2
    if half % 4 == 0:
        try:
            return np.kron(_H2, _build(half))
        except UnconstructibleOrder:
            pass
    raise UnconstructibleOrder(
        f"order {order}: not reachable by Sylvester doubling or the prime Paley construction"
    )


def is_constructible(order: int) -> bool:
    """Whether ``construct(order)`` would succeed, without building the matrix."""
    if order in (1, 2):
        return True
    if order < 1 or order % 4 != 0:
        return False
    if order & (order - 1) == 0:
        return True
    q = order - 1
    if q % 4 == 3 and _is_prime(q):
        return True
    return order // 2 % 4 == 0 and is_constructible(order // 2)


@lru_cache(maxsize=None)
def construct(order: int) -> HadamardMatrix:
    """Build and verify a Hadamard matrix of exactly this order.

    Raises UnconstructibleOrder when the order is outside the Sylvester /
    Paley closure (e.g. any non-multiple of 4 above 2, or orders such as 28
    and 92 that need constructions this package deliberately omits).
    Results are cached; matrices are immutable, so sharing is safe.
    """
    return HadamardMatrix(int(order), _build(int(order)))


def smallest_valid_order(n_strata: int) -> int:
    """Smallest constructible order >= n_strata.

    The search runs up to 2 * n_strata + 4; the next power of two always
    falls inside that window, so the search cannot come back empty for any
    positive input.
    """
    if n_strata < 1:
        raise ValueError(f"n_strata must be >= 1, got {n_strata}")
    bound = 2 * n_strata + 4
    candidate = n_strata
    while candidate <= bound:
        if is_constructible(candidate):
            return candidate
        candidate += 1
    raise UnconstructibleOrder(f"no constructible order in [{n_strata}, {bound}]")


def balanced_columns(matrix: HadamardMatrix, n_columns: int) -> np.ndarray:
    """First ``n_columns`` zero-sum columns of the matrix, as an R x n array.

    Zero column sums make the mean of the replicate totals equal the
    full-sample total; pairwise column orthogonality is what collapses the
    squared deviations.  Both properties are exact for the returned columns.
    """
    if n_columns < 1:
        raise ValueError(f"n_columns must be >= 1, got {n_columns}")
    e = matrix.entries
    balanced = np.flatnonzero(e.sum(axis=0) == 0)
    if balanced.size < n_columns:
        raise InsufficientBalancedColumns(
            f"order-{matrix.order} matrix has {balanced.size} zero-sum columns, "
            f"need {n_columns}"
        )
    out = e[:, balanced[:n_columns]].copy()
    out.setflags(write=False)
    return out
