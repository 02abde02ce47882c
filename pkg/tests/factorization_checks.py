"""Exhaustive checks of factorization systems on small pointed finite sets.

A map ``<a> -> <b>`` is a row of an integer array with entries in 0..b.
"""
from __future__ import annotations

from itertools import product

import numpy as np

MAX = 4


def all_tables(a, b, active=False):
    lo = 1 if active else 0
    if a == 0:
        return np.zeros((1, 0), dtype=np.int64)
    if b == 0 and active:
        return np.zeros((0, a), dtype=np.int64)
    return np.array(list(product(range(lo, b + 1), repeat=a)), dtype=np.int64).reshape(-1, a)


def compose(g, f):
    """``g . f`` for single tables."""
    return np.concatenate([[0], g])[f]


def compose_many(G, F):
    """Row-wise ``G[i] . F[j]`` for all i, j: shape (len(G), len(F), a)."""
    pad = np.concatenate([np.zeros((len(G), 1), dtype=np.int64), G], axis=1)
    return pad[:, F]


def codes(rows, base):
    """Integer code of each table along the last axis."""
    w = (base + 1) ** np.arange(rows.shape[-1], dtype=np.int64)
    return rows @ w


def is_inert(t, b):
    nz = [v for v in t if v]
    return len(nz) == b and len(set(nz)) == b


def is_active(t, b):
    return all(v for v in t)


def is_nonunital(t, b):
    return is_active(t, b) and set(t) == set(range(1, b + 1))


def is_unitary(t, b):
    # active and injective: only isomorphisms and unit insertions
    return is_active(t, b) and len(set(t)) == len(t)


def is_iso(t, b):
    return len(t) == b and sorted(t) == list(range(1, b + 1))


SYSTEMS = {
    "inert_active": (is_inert, is_active, False),
    "nonunital_unitary": (is_nonunital, is_unitary, True),
}


def _class(pred, a, b, active_only):
    T = all_tables(a, b, active_only)
    return [t for t in T if pred(tuple(t), b)]


def check_orthogonality(system, max_size=MAX):
    """Every left map is orthogonal to every right map: ``h -> (h.l, r.h)``
    is a bijection from Hom(B, X) onto commuting squares.  Returns the number
    of (l, r) pairs checked; raises AssertionError on a failure."""
    left, right, active_only = SYSTEMS[system]
    sizes = range(max_size + 1)
    hom = {(a, b): all_tables(a, b, active_only) for a in sizes for b in sizes}
    checked = 0
    for A, B, X, Y in product(sizes, repeat=4):
        Ls = _class(left, A, B, active_only)
        rlist = _class(right, X, Y, active_only)
        Rs = np.array(rlist, dtype=np.int64).reshape(len(rlist), X)
        if not Ls or not len(Rs):
            continue
        HBX, HAX, HBY = hom[(B, X)], hom[(A, X)], hom[(B, Y)]
        # r . h and r . u for every right map r at once
        rh = codes(compose_many(Rs, HBX), Y)
        ru = codes(compose_many(Rs, HAX), Y)
        for l in Ls:
            checked += len(Rs)
            hl = codes(compose_many(HBX, l[None, :])[:, 0], X)
            vl = codes(compose_many(HBY, l[None, :])[:, 0], Y)
            key = hl[None, :] * (Y + 1) ** B + rh
            srt = np.sort(key, axis=1)
            assert not (srt[:, 1:] == srt[:, :-1]).any(), (system, "two lifts", l.tolist())
            vals, counts = np.unique(vl, return_counts=True)
            pos = np.searchsorted(vals, ru).clip(0, max(len(vals) - 1, 0))
            hit = np.where(vals[pos] == ru, counts[pos], 0) if len(vals) else np.zeros_like(ru)
            squares = hit.sum(axis=1)
            assert (squares == len(HBX)).all(), (system, "square without a lift", l.tolist())
    return checked


def check_unique_factorization(system, max_size=MAX):
    """Each map in the ambient category factors as right after left, and any
    two factorizations differ by exactly one isomorphism of the middle."""
    left, right, active_only = SYSTEMS[system]
    sizes = range(max_size + 1)
    # both left classes hit every element of the middle, so |M| <= |A|
    mids = sizes
    L = {(a, m): _class(left, a, m, active_only) for a in sizes for m in mids}
    R = {(m, y): _class(right, m, y, active_only) for m in mids for y in sizes}
    isos = {m: [p for p in all_tables(m, m, True) if is_iso(tuple(p), m)] for m in mids}
    checked = 0
    for A, Y in product(sizes, sizes):
        facs: dict = {}
        for M in mids:
            for l in L[(A, M)]:
                for r in R[(M, Y)]:
                    key = tuple(compose(r, l).tolist())
                    facs.setdefault(key, []).append((M, l, r))
        for f in all_tables(A, Y, active_only):
            found = facs.get(tuple(f.tolist()))
            assert found, (system, "no factorization", f.tolist())
            M0, l0, r0 = found[0]
            for M1, l1, r1 in found[1:]:
                assert M1 == M0, (system, "middle objects differ", f.tolist())
                links = [p for p in isos[M0] if np.array_equal(compose(p, l0), l1)
                         and np.array_equal(compose(r1, p), r0)]
                assert len(links) == 1, (system, "factorizations not uniquely isomorphic", f.tolist())
            checked += 1
    return checked
