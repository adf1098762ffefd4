"""Exact rational linear algebra on small dense matrices.

Matrices are lists of rows of ``Fraction``.  Pivots are picked by a
Markowitz count (fewest fill-in candidates) with ties broken by column
then row index, so results are deterministic.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence


def to_fraction_matrix(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    return [[Fraction(x) for x in row] for row in rows]


@dataclass(frozen=True)
class Elimination:
    """Reduced row echelon data: ``rref`` rows, pivot (row, col) pairs."""

    rref: tuple[tuple[Fraction, ...], ...]
    pivots: tuple[tuple[int, int], ...]
    ncols: int

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def pivot_cols(self) -> tuple[int, ...]:
        return tuple(c for _, c in self.pivots)

    @property
    def free_cols(self) -> tuple[int, ...]:
        p = set(self.pivot_cols)
        return tuple(c for c in range(self.ncols) if c not in p)


def eliminate(rows: Sequence[Sequence], markowitz: bool = True,
              column_order: Sequence[int] | None = None) -> Elimination:
    """Gauss-Jordan elimination over the rationals.

    With ``markowitz`` the pivot minimising (r_i - 1)(c_j - 1) over the
    remaining nonzeros is taken at each step.  Otherwise columns are scanned
    in ``column_order`` (default natural order).
    """
    A = to_fraction_matrix(rows)
    m = len(A)
    n = len(A[0]) if m else 0
    used_rows: set[int] = set()
    used_cols: set[int] = set()
    pivots: list[tuple[int, int]] = []
    order = list(column_order) if column_order is not None else list(range(n))
    while True:
        best = None
        if markowitz:
            rc = {i: sum(1 for j in range(n) if j not in used_cols and A[i][j] != 0)
                  for i in range(m) if i not in used_rows}
            cc = {j: sum(1 for i in range(m) if i not in used_rows and A[i][j] != 0)
                  for j in range(n) if j not in used_cols}
            for j in order:
                if j in used_cols:
                    continue
                for i in range(m):
                    if i in used_rows or A[i][j] == 0:
                        continue
                    key = ((rc[i] - 1) * (cc[j] - 1), j, i)
                    if best is None or key < best:
                        best = key
            if best is None:
                break
            _, pj, pi = best
        else:
            for j in order:
                if j in used_cols:
                    continue
                cand = [i for i in range(m) if i not in used_rows and A[i][j] != 0]
                if cand:
                    best = (cand[0], j)
                    break
            if best is None:
                break
            pi, pj = best
        piv = A[pi][pj]
        A[pi] = [x / piv for x in A[pi]]
        for i in range(m):
            if i != pi and A[i][pj] != 0:
                f = A[i][pj]
                A[i] = [x - f * y for x, y in zip(A[i], A[pi])]
        used_rows.add(pi)
        used_cols.add(pj)
        pivots.append((pi, pj))
    return Elimination(tuple(tuple(r) for r in A), tuple(pivots), n)


def rank(rows: Sequence[Sequence]) -> int:
    if not rows:
        return 0
    return eliminate(rows).rank


def solve_affine(rows: Sequence[Sequence], rhs: Sequence):
    """Parametrise the solutions of ``rows @ x = rhs``.

    Returns ``(x0, basis)`` with ``x0`` a particular solution (free
    variables zero) and ``basis`` a list of null-space vectors, one per free
    column; ``None`` if the system is inconsistent.
    """
    n = len(rows[0])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    el = eliminate(aug, column_order=range(n + 1))
    if any(c == n for c in el.pivot_cols):
        return None
    piv = [(r, c) for r, c in el.pivots]
    free = [c for c in range(n) if c not in {c for _, c in piv}]
    x0 = [Fraction(0)] * n
    for r, c in piv:
        x0[c] = el.rref[r][n]
    basis = []
    for f in free:
        v = [Fraction(0)] * n
        v[f] = Fraction(1)
        for r, c in piv:
            v[c] = -el.rref[r][f]
        basis.append(v)
    return x0, basis


def det(rows: Sequence[Sequence]) -> Fraction:
    A = to_fraction_matrix(rows)
    n = len(A)
    d = Fraction(1)
    for k in range(n):
        p = next((i for i in range(k, n) if A[i][k] != 0), None)
        if p is None:
            return Fraction(0)
        if p != k:
            A[k], A[p] = A[p], A[k]
            d = -d
        d *= A[k][k]
        for i in range(k + 1, n):
            f = A[i][k] / A[k][k]
            if f:
                A[i] = [x - f * y for x, y in zip(A[i], A[k])]
    return d


def inverse(rows: Sequence[Sequence]) -> list[list[Fraction]]:
    n = len(rows)
    aug = [list(r) + [1 if i == j else 0 for j in range(n)] for i, r in enumerate(rows)]
    el = eliminate(aug, markowitz=False, column_order=range(2 * n))
    if sorted(el.pivot_cols) != list(range(n)):
        raise ZeroDivisionError("singular matrix")
    out = [None] * n
    for r, c in el.pivots:
        out[c] = list(el.rref[r][n:])
    return out
