import json

import pytest
from hypothesis import given, settings, strategies as st

from aritycheck.fincat import (
    FiniteCategory,
    FinitePoset,
    Functor,
    NotFunctorial,
    comma_category,
    functor_from_json,
    is_n_initial,
    order_complex,
    poset_connectivity,
    poset_inclusion,
    realization_homology,
    skeletalize,
)
from aritycheck.homology import boundary_chain_complex, homology
from aritycheck.operads import EInfinity, multimorphism, part_category


def chain(n):
    return FinitePoset(n, [(a, b) for a in range(n) for b in range(a, n)])


def discrete(n):
    return FinitePoset(n, [])


def iso_pair():
    # objects 0, 1; morphisms id0, id1, f: 0 -> 1, g: 1 -> 0 inverse to each other
    comp = {(0, 0): 0, (1, 1): 1, (2, 0): 2, (1, 2): 2, (3, 1): 3, (0, 3): 3, (3, 2): 0, (2, 3): 1}
    return FiniteCategory(2, [0, 1, 0, 1], [0, 1, 1, 0], [0, 1], comp)


def monoid(table, n):
    """One-object category from a multiplication table on 0..n-1 (0 = unit)."""
    return FiniteCategory(1, [0] * n, [0] * n, [0], {(g, f): table[g][f] for g in range(n) for f in range(n)})


def test_skeletalize_examples():
    C = iso_pair()
    C.validate()
    assert skeletalize(C).poset.n == 1
    O = EInfinity(3)
    part = part_category(O, multimorphism(O, 3))
    S = skeletalize(part.category)
    assert S.poset.n == 3 and all(S.poset.up[a] == {a} for a in range(3))
    P = chain(3)
    assert skeletalize(P.as_category()).poset.n == 3


def test_order_complex_examples():
    K, _ = order_complex(discrete(3))
    assert len(K.simplices) == 1 and len(K.simplices[0]) == 3
    subsets = [s for s in range(1, 7)]  # bitmasks of nonempty proper subsets of {0,1,2}
    P = FinitePoset(6, [(a - 1, b - 1) for a in subsets for b in subsets if a & b == a], subsets)
    K, _ = order_complex(P)
    assert (len(K.simplices[0]), len(K.simplices[1])) == (6, 6) and len(K.simplices) == 2
    H = homology(boundary_chain_complex(K))
    assert H.nonzero_degrees() == [1] and H.betti_at(1) == 1
    K, _ = order_complex(chain(3))
    assert homology(boundary_chain_complex(K)).nonzero_degrees() == []


def test_comma_examples():
    P = chain(4)
    F = Functor.identity(P.as_category())
    for d in range(4):
        over = comma_category(F, d, "over")
        sk = skeletalize(over).poset
        assert sk.n == d + 1 and sk.maximum() is not None
    D = chain(3).as_category()
    init = Functor(discrete(1).as_category(), D, [0], [D.identities[0]])
    for j in range(3):
        assert comma_category(init, j, "over").n_objects == 1
    # two discrete points sent to the ends of a 3-chain
    G = Functor(discrete(2).as_category(), D, [0, 2], [D.identities[0], D.identities[2]])
    sizes = [comma_category(G, j, "over").n_objects for j in range(3)]
    assert sizes == [1, 1, 2]
    under = [comma_category(G, j, "under").n_objects for j in range(3)]
    assert under == [2, 1, 1]


def test_comma_rejects_non_functor():
    D = chain(2).as_category()
    bad = Functor(discrete(2).as_category(), D, [0, 1], [D.identities[1], D.identities[1]])
    with pytest.raises(NotFunctorial):
        comma_category(bad, 0)


def test_quillen_a_examples():
    P = FinitePoset(4, [(0, 1), (0, 2), (1, 3), (2, 3), (0, 3)])
    assert is_n_initial(Functor.identity(P.as_category()), 4).verdict == "yes"
    assert is_n_initial(poset_inclusion(P, [0]), 4).verdict == "yes"
    V = FinitePoset(3, [(0, 2), (1, 2)], ["a", "b", "c"])
    rep = is_n_initial(poset_inclusion(V, [0, 1]), 0)
    assert rep.verdict == "no"
    (row,) = [r for r in rep.per_object if r["object"] == "c"]
    assert row["status"] == "no" and row["certificate"]["level"] == -1


def test_functor_json_formats():
    V = FinitePoset(3, [(0, 2), (1, 2)], ["a", "b", "c"])
    F = functor_from_json({"poset": V.to_json(), "subposet": ["a", "b"]})
    assert F.on_objects == [0, 1]
    C = V.as_category()
    G = functor_from_json({"source": C.to_json(), "target": V.to_json(),
                           "objects": [0, 1, 2], "morphisms": list(range(C.n_morphisms))})
    assert is_n_initial(G, 2).verdict == "yes"
    again = FiniteCategory.from_json(json.loads(json.dumps(C.to_json())))
    assert again.n_objects == 3 and again.n_morphisms == C.n_morphisms


def test_non_thin_nerves():
    # idempotent monoid {1, e}: the nerve is contractible
    H = realization_homology(monoid([[0, 1], [1, 1]], 2), through=3)
    assert H.nonzero_degrees() == []
    # Z/2: homology of RP-infinity
    H = realization_homology(monoid([[0, 1], [1, 0]], 2), through=3)
    assert H.betti_at(0) == 0 and H.torsion_at(1) == [2] and H.torsion_at(2) == [] and H.torsion_at(3) == [2]


def mobius_bottom_top(P):
    """Möbius value of the poset with a new bottom and top adjoined."""
    order = P.linear_extension()
    mu = {}
    for a in order:
        # mu(bottom, a) = -1 - sum over strictly smaller b
        mu[a] = -1 - sum(mu[b] for b in mu if b != a and P.leq(b, a))
    return -1 - sum(mu.values())


posets = st.integers(0, 7).flatmap(lambda n: st.lists(
    st.tuples(st.integers(0, max(n - 1, 0)), st.integers(0, max(n - 1, 0))), max_size=12).map(
        lambda pairs: (n, pairs)))


def closure(n, pairs):
    up = [{a} for a in range(n)]
    for a, b in pairs:
        if a < b:
            up[a].add(b)
    for a in reversed(range(n)):
        for b in list(up[a]):
            up[a] |= up[b]
    return FinitePoset(n, [(a, b) for a in range(n) for b in up[a]])


@settings(max_examples=60, deadline=None)
@given(posets)
def test_order_complex_euler_is_mobius(data):
    P = closure(*data)
    K, _ = order_complex(P)
    H = homology(boundary_chain_complex(K))
    chi = sum((1 if d % 2 == 0 else -1) * H.betti_at(d) for d in range(-1, len(K.simplices) + 1))
    assert chi == mobius_bottom_top(P)


@settings(max_examples=40, deadline=None)
@given(posets)
def test_posets_with_a_maximum_are_contractible(data):
    n, pairs = data
    P = closure(n + 1, pairs + [(a, n) for a in range(n)])
    cert = poset_connectivity(P, 3)
    assert cert.level >= 3 and cert.fully_certified
