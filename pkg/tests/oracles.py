"""Brute-force oracles, independent of the package.

Run as a script to refreeze ``oracle_values.json``.
"""
from __future__ import annotations

import json
import sys
from fractions import Fraction
from itertools import permutations, product
from pathlib import Path

FROZEN = Path(__file__).with_name("oracle_values.json")


def _units(n, t):
    return [e for e in range(n) if all(t[e][a] == a and t[a][e] == a for a in range(n))]


def _assoc(n, t):
    return all(t[t[a][b]][c] == t[a][t[b][c]] for a in range(n) for b in range(n) for c in range(n))


def _comm(n, t):
    return all(t[a][b] == t[b][a] for a in range(n) for b in range(n))


def magma_tables(n, *, commutative, associative):
    """Every unital binary table on {0..n-1} with the requested laws."""
    for flat in product(range(n), repeat=n * n):
        t = [flat[i * n:(i + 1) * n] for i in range(n)]
        if not _units(n, t):
            continue
        if commutative and not _comm(n, t):
            continue
        if associative and not _assoc(n, t):
            continue
        yield t


def count_structures(n, *, commutative, associative):
    raw = 0
    classes = set()
    for t in magma_tables(n, commutative=commutative, associative=associative):
        raw += 1
        best = None
        for p in permutations(range(n)):
            inv = [0] * n
            for a, b in enumerate(p):
                inv[b] = a
            key = tuple(p[t[inv[a]][inv[b]]] for a in range(n) for b in range(n))
            best = key if best is None or key < best else best
        classes.add(best)
    return {"raw": raw, "iso_classes": len(classes)}


def substitute_orders(outer, inners):
    """Compose linear orders: each entry of ``outer`` is replaced by its block."""
    labelled = [(i, q) for i in outer for q in inners[i]]
    ranking = sorted(labelled)
    return tuple(ranking.index(x) for x in labelled)


def set_partitions(elements):
    if not elements:
        yield []
        return
    head, rest = elements[0], elements[1:]
    for p in set_partitions(rest):
        yield [[head]] + p
        for i in range(len(p)):
            yield p[:i] + [[head] + p[i]] + p[i + 1:]


def proper_partitions(k):
    """Set partitions of {1..k} with strictly between 1 and k blocks."""
    return [p for p in set_partitions(list(range(1, k + 1))) if 1 < len(p) < k]


def interval_partitions(k):
    """Cuts of a line of k points into between 2 and k-1 intervals."""
    return [c for c in product([0, 1], repeat=k - 1) if 0 < sum(c) < k - 1]


def refines(p, q):
    return all(any(set(b) <= set(c) for c in q) for b in p)


def proper_part_mobius(k):
    """Möbius value from bottom to top of the partition lattice, by recursion."""
    parts = [tuple(tuple(sorted(b)) for b in p) for p in set_partitions(list(range(1, k + 1)))]
    parts.sort(key=lambda p: -len(p))
    bottom = parts[0]
    mu = {}
    for p in parts:
        if p == bottom:
            mu[p] = 1
            continue
        mu[p] = -sum(mu[q] for q in mu if refines(q, p) and q != p)
    return mu[parts[-1]]


def rational_betti_order_complex(elements, leq):
    """Reduced rational Betti numbers of the order complex, by dense ranks."""
    n = len(elements)
    chains = [[(i,) for i in range(n)]]
    while True:
        nxt = [c + (j,) for c in chains[-1] for j in range(n) if j != c[-1] and leq(elements[c[-1]], elements[j])]
        if not nxt:
            break
        chains.append(nxt)
    sizes = [1] + [len(c) for c in chains]

    def rank(d):
        # boundary from d-chains to (d-1)-chains, d counted from 0 (vertices -> empty)
        if d == 0:
            return 1 if sizes[1] else 0
        rows = {c: i for i, c in enumerate(chains[d - 1])}
        M = [[Fraction(0)] * len(chains[d]) for _ in rows]
        for j, c in enumerate(chains[d]):
            for t in range(len(c)):
                M[rows[c[:t] + c[t + 1:]]][j] += (-1) ** t
        return _rank(M)

    ranks = [rank(d) for d in range(len(chains))] + [0]
    betti = {}
    for d in range(-1, len(chains)):
        b = sizes[d + 1] - ranks[d + 1] - (ranks[d] if d >= 0 else 0)
        if b:
            betti[d] = b
    return betti


def _rank(M):
    M = [row[:] for row in M]
    r = 0
    cols = len(M[0]) if M else 0
    for c in range(cols):
        piv = next((i for i in range(r, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[r], M[piv] = M[piv], M[r]
        for i in range(len(M)):
            if i != r and M[i][c]:
                f = M[i][c] / M[r][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        r += 1
    return r


def compute_all():
    out = {
        "commutative_monoids": {str(n): count_structures(n, commutative=True, associative=True) for n in (1, 2, 3)},
        "monoids": {str(n): count_structures(n, commutative=False, associative=True) for n in (1, 2, 3)},
        "commutative_unital_magmas": {str(n): count_structures(n, commutative=True, associative=False) for n in (1, 2, 3)},
        "proper_partitions": {str(k): len(proper_partitions(k)) for k in range(2, 8)},
        "interval_partitions": {str(k): len(interval_partitions(k)) for k in range(2, 8)},
        "partition_lattice_mobius": {str(k): proper_part_mobius(k) for k in range(2, 7)},
        "order_substitution": [],
        "partition_order_complex_betti": {},
    }
    for outer, inners in [((1, 0), ((0,), (1, 0))), ((0, 1, 2), ((1, 0), (), (0,))), ((2, 0, 1), ((0,), (1, 0), (0, 1)))]:
        out["order_substitution"].append({"outer": list(outer), "inners": [list(v) for v in inners],
                                          "result": list(substitute_orders(outer, inners))})
    for k in (3, 4, 5):
        ps = [frozenset(frozenset(b) for b in p) for p in proper_partitions(k)]
        b = rational_betti_order_complex(ps, lambda p, q: refines(p, q))
        out["partition_order_complex_betti"][str(k)] = {str(d): v for d, v in b.items()}
    return out


if __name__ == "__main__":
    data = compute_all()
    FROZEN.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    json.dump(data, sys.stdout, indent=2, sort_keys=True)
