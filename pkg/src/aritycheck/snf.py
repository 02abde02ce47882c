"""Integer Smith normal form.

Entries are Python ints, so intermediate growth never overflows.  Sparse
matrices are given as a list of columns, each a ``{row: value}`` dict.
"""
from __future__ import annotations

import heapq
from typing import Sequence


def smith_normal_form(M: Sequence[Sequence[int]]) -> tuple[list[int], int]:
    """Invariant factors ``d1 | d2 | ... | dr`` and the rank ``r`` of ``M``."""
    A = [list(map(int, row)) for row in M]
    factors = _dense_snf(A)
    return factors, len(factors)


def _dense_snf(A: list[list[int]]) -> list[int]:
    nrows = len(A)
    ncols = len(A[0]) if nrows else 0
    diag = []
    t = 0
    while t < min(nrows, ncols):
        # smallest nonzero pivot in the trailing block
        best = None
        for i in range(t, nrows):
            row = A[i]
            for j in range(t, ncols):
                v = row[j]
                if v and (best is None or abs(v) < best[0]):
                    best = (abs(v), i, j)
                    if best[0] == 1:
                        break
            if best and best[0] == 1:
                break
        if best is None:
            break
        _, i, j = best
        A[t], A[i] = A[i], A[t]
        for row in A:
            row[t], row[j] = row[j], row[t]
        while True:
            p = A[t][t]
            dirty = False
            for i in range(t + 1, nrows):
                v = A[i][t]
                if v:
                    q = v // p
                    if q:
                        Ai, At = A[i], A[t]
                        for j in range(t, ncols):
                            Ai[j] -= q * At[j]
                    if A[i][t]:
                        dirty = True
            for j in range(t + 1, ncols):
                v = A[t][j]
                if v:
                    q = v // p
                    if q:
                        for row in A:
                            row[j] -= q * row[t]
                    if A[t][j]:
                        dirty = True
            if dirty:
                # a remainder is now smaller than the pivot; move it in place
                best = None
                for i in range(t, nrows):
                    if A[i][t] and (best is None or abs(A[i][t]) < best[0]):
                        best = (abs(A[i][t]), i, t)
                for j in range(t, ncols):
                    if A[t][j] and (best is None or abs(A[t][j]) < best[0]):
                        best = (abs(A[t][j]), t, j)
                _, i, j = best
                A[t], A[i] = A[i], A[t]
                for row in A:
                    row[t], row[j] = row[j], row[t]
                continue
            # enforce divisibility by the pivot on the trailing block
            bad = None
            for i in range(t + 1, nrows):
                for j in range(t + 1, ncols):
                    if A[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            At, Ab = A[t], A[bad]
            for j in range(t, ncols):
                At[j] += Ab[j]
        diag.append(abs(A[t][t]))
        t += 1
    return diag


def sparse_invariant_factors(columns: Sequence[dict[int, int]], nrows: int) -> list[int]:
    """Invariant factors of a sparse integer matrix.

    Unit pivots are eliminated first, preferring short rows and columns to
    limit fill.  Whatever block is left without a unit entry is finished by
    the dense algorithm.
    """
    cols: dict[int, dict[int, int]] = {}
    rows: dict[int, dict[int, int]] = {}
    for j, col in enumerate(columns):
        c = {i: v for i, v in col.items() if v}
        if not c:
            continue
        cols[j] = c
        for i, v in c.items():
            rows.setdefault(i, {})[j] = v
    ones = 0
    heap = [(len(c), j) for j, c in cols.items()]
    heapq.heapify(heap)
    while heap:
        size, c = heapq.heappop(heap)
        col = cols.get(c)
        if col is None or len(col) != size:
            continue
        r = None
        for i, v in col.items():
            if (v == 1 or v == -1) and (r is None or len(rows[i]) < len(rows[r])):
                r = i
        if r is None:
            continue
        ones += 1
        for j in _eliminate(cols, rows, r, c):
            heapq.heappush(heap, (len(cols[j]), j))
    if not cols:
        return [1] * ones
    row_ids = sorted(rows)
    col_ids = sorted(cols)
    rpos = {i: k for k, i in enumerate(row_ids)}
    dense = [[0] * len(col_ids) for _ in row_ids]
    for k, j in enumerate(col_ids):
        for i, v in cols[j].items():
            dense[rpos[i]][k] = v
    rest = _dense_snf(dense)
    return [1] * ones + rest


def _eliminate(cols, rows, r, c):
    """Schur-complement step on the unit pivot at (r, c); returns touched columns."""
    p = cols[c][r]
    prow = rows.pop(r)
    pcol = cols.pop(c)
    del prow[c]
    del pcol[r]
    for j in prow:
        del cols[j][r]
    for i in pcol:
        del rows[i][c]
    # M'[i][j] = M[i][j] - M[i][c] * M[r][j] / p, with p = +-1
    for i, a in pcol.items():
        f = a * p
        ri = rows[i]
        for j, b in prow.items():
            nv = ri.get(j, 0) - f * b
            cj = cols[j]
            if nv:
                ri[j] = nv
                cj[i] = nv
            else:
                ri.pop(j, None)
                cj.pop(i, None)
    touched = []
    for j in prow:
        if cols[j]:
            touched.append(j)
        else:
            del cols[j]
    for i in pcol:
        if not rows[i]:
            del rows[i]
    return touched


def rank_and_factors(columns: Sequence[dict[int, int]], nrows: int) -> tuple[int, list[int]]:
    factors = sparse_invariant_factors(columns, nrows)
    return len(factors), [d for d in factors if d > 1]


def is_divisibility_chain(factors: Sequence[int]) -> bool:
    return all(b % a == 0 for a, b in zip(factors, factors[1:]))
