"""Exact rank of rational matrices.

Two independent routines:

* :func:`bareiss_rank`: dense fraction-free Bareiss elimination.
* :func:`sparse_rank`: sparse integer row elimination with content
  normalization, with a choice of pivot rule.  This is what large regular
  representations go through, since they are very sparse.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

SparseRow = dict[int, int]


def _integer_rows(rows: Sequence[Sequence[Fraction | int]]) -> list[list[int]]:
    out = []
    for r in rows:
        den = 1
        for x in r:
            den = math.lcm(den, Fraction(x).denominator)
        out.append([int(Fraction(x) * den) for x in r])
    return out


def bareiss_rank(rows: Sequence[Sequence[Fraction | int]]) -> int:
    """Rank by fraction-free Gaussian elimination with row and column pivoting."""
    M = _integer_rows(rows)
    if not M or not M[0]:
        return 0
    m, n = len(M), len(M[0])
    prev = 1
    rank = 0
    for col in range(n):
        if rank == m:
            break
        pivot = next((r for r in range(rank, m) if M[r][col] != 0), None)
        if pivot is None:
            continue
        M[rank], M[pivot] = M[pivot], M[rank]
        p = M[rank][col]
        for r in range(rank + 1, m):
            f = M[r][col]
            row, prow = M[r], M[rank]
            for c in range(col + 1, n):
                row[c] = (p * row[c] - f * prow[c]) // prev
            row[col] = 0
        prev = p
        rank += 1
    return rank


def _normalize(row: SparseRow) -> SparseRow:
    g = 0
    for v in row.values():
        g = math.gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {k: v // g for k, v in row.items()}
    return row


def sparse_rank(rows: Sequence[SparseRow], pivot: str = "first") -> int:
    """Rank of integer rows given as ``{column: value}`` dicts.

    ``pivot`` selects the rule: ``"first"`` takes rows in order and pivots on
    their smallest column; ``"sparsest"`` always eliminates with the
    currently sparsest remaining row and its largest column.
    """
    if pivot not in ("first", "sparsest"):
        raise ValueError(f"unknown pivot rule {pivot!r}")
    # column -> reduced pivot row
    pivots: dict[int, SparseRow] = {}
    pending = [_normalize({k: v for k, v in r.items() if v}) for r in rows]
    pending = [r for r in pending if r]
    if pivot == "sparsest":
        pending.sort(key=len)
    rank = 0
    for row in pending:
        row = dict(row)
        while row:
            col = min(row) if pivot == "first" else max(row)
            prow = pivots.get(col)
            if prow is None:
                break
            # clear col from row using the stored pivot row
            a, b = prow[col], row[col]
            g = math.gcd(a, b)
            fa, fb = a // g, b // g
            new = {k: v * fa for k, v in row.items()}
            for k, v in prow.items():
                nv = new.get(k, 0) - fb * v
                if nv:
                    new[k] = nv
                else:
                    new.pop(k, None)
            row = _normalize(new)
        if row:
            col = min(row) if pivot == "first" else max(row)
            pivots[col] = row
            rank += 1
    return rank


def rank(rows: Sequence[Sequence[Fraction | int]], method: str = "sparse-first") -> int:
    """Rank of a dense rational matrix by the named method."""
    if method == "bareiss":
        return bareiss_rank(rows)
    rule = method.split("-", 1)[1] if "-" in method else "first"
    sparse = [{j: x for j, x in enumerate(r) if x} for r in _integer_rows(rows)]
    return sparse_rank(sparse, rule)


def nullspace_dimension(rows: Sequence[Sequence[Fraction | int]], ncols: int) -> int:
    """Dimension of ``{x : x M = 0}`` for an ``len(rows) x ncols`` matrix ``M``."""
    return len(rows) - (rank(rows) if rows and ncols else 0)


def inertia(S: Sequence[Sequence[Fraction | int]]) -> tuple[int, int, int]:
    """``(positive, negative, zero)`` eigenvalue counts of a symmetric rational matrix.

    Symmetric Gaussian elimination with 1x1 pivots where possible and 2x2
    pivots ``[[0, b], [b, 0]]`` (one positive, one negative eigenvalue)
    otherwise; inertia is additive over Schur complements.
    """
    M = [[Fraction(x) for x in r] for r in S]
    pos = neg = 0
    while M:
        n = len(M)
        i = next((i for i in range(n) if M[i][i] != 0), None)
        if i is not None:
            piv = M[i][i]
            if piv > 0:
                pos += 1
            else:
                neg += 1
            rest = [r for r in range(n) if r != i]
            M = [[M[r][c] - M[r][i] * M[i][c] / piv for c in rest] for r in rest]
            continue
        pair = next(((i, j) for i in range(n) for j in range(i + 1, n) if M[i][j] != 0), None)
        if pair is None:
            return pos, neg, n
        i, j = pair
        pos += 1
        neg += 1
        b = M[i][j]
        rest = [r for r in range(n) if r not in (i, j)]
        # inverse of [[0, b], [b, 0]] is [[0, 1/b], [1/b, 0]]
        M = [[M[r][c] - (M[r][i] * M[j][c] + M[r][j] * M[i][c]) / b for c in rest] for r in rest]
    return pos, neg, 0
