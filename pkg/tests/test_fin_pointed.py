import pytest
from hypothesis import given, strategies as st

from aritycheck.fin_pointed import (
    PointedMap,
    active_maps,
    all_maps,
    compose,
    delta,
    factor_inert_active,
    factor_nonunital_unitary,
    fold,
    identity,
    inert_maps,
    is_active,
    is_inert,
    is_maximally_active,
    is_nonunital,
    is_unitary,
    surjections,
)


def pm(src, dst, *table):
    return PointedMap(src, dst, tuple(table))


def test_delta():
    assert delta(3, 2).table == (0, 1, 0)
    assert delta(1, 1) == identity(1)
    assert delta(2, 1).table == (1, 0)
    with pytest.raises(ValueError):
        delta(2, 3)


def test_compose():
    assert compose(fold(2), identity(2)) == fold(2)
    assert compose(pm(2, 1, 1, 1), pm(3, 2, 1, 2, 0)) == pm(3, 1, 1, 1, 0)
    with pytest.raises(ValueError):
        compose(delta(2, 1), fold(2))


def test_classes():
    assert not is_inert(fold(2))
    assert is_inert(delta(3, 2))
    assert is_inert(identity(4))
    assert is_active(fold(2))
    assert not is_active(delta(2, 1))
    assert is_active(PointedMap(0, 1, ()))
    assert is_maximally_active(fold(5))
    assert not is_maximally_active(PointedMap(0, 1, ()))
    assert not is_maximally_active(identity(2))
    assert is_nonunital(fold(2))
    assert not is_nonunital(PointedMap(0, 1, ()))
    assert is_nonunital(identity(3))
    with pytest.raises(ValueError):
        is_nonunital(delta(2, 1))


def test_bad_tables():
    with pytest.raises(ValueError):
        PointedMap(2, 1, (1,))
    with pytest.raises(ValueError):
        PointedMap(1, 1, (2,))


def test_factor_inert_active_examples():
    lam, mid, alpha = factor_inert_active(pm(3, 1, 1, 1, 0))
    assert lam == pm(3, 2, 1, 2, 0) and mid.m == 2 and alpha == pm(2, 1, 1, 1)
    lam, mid, alpha = factor_inert_active(identity(3))
    assert lam == identity(3) and alpha == identity(3)
    lam, mid, alpha = factor_inert_active(fold(3))
    assert lam == identity(3) and alpha == fold(3)


def test_factor_nonunital_unitary_examples():
    nonu, mid, u = factor_nonunital_unitary(pm(2, 2, 1, 1))
    assert nonu == pm(2, 1, 1, 1) and mid.m == 1 and u == pm(1, 2, 1)
    nonu, mid, u = factor_nonunital_unitary(PointedMap(0, 1, ()))
    assert nonu == identity(0) and mid.m == 0 and u == PointedMap(0, 1, ())
    nonu, _, u = factor_nonunital_unitary(identity(2))
    assert nonu == identity(2) and u == identity(2)


def test_enumerators_agree_with_filters():
    for a in range(4):
        for b in range(4):
            every = list(all_maps(a, b))
            assert len(every) == (b + 1) ** a
            assert set(active_maps(a, b)) == {f for f in every if is_active(f)}
            assert set(inert_maps(a, b)) == {f for f in every if is_inert(f)}
            assert set(surjections(a, b)) == {f for f in every if is_active(f) and is_nonunital(f)}


tables = st.integers(0, 4).flatmap(
    lambda a: st.integers(0, 4).flatmap(
        lambda b: st.lists(st.integers(0, b), min_size=a, max_size=a).map(lambda t: PointedMap(a, b, tuple(t)))))


@given(tables)
def test_inert_active_factorization_recomposes(f):
    lam, mid, alpha = factor_inert_active(f)
    assert is_inert(lam) and is_active(alpha) and lam.dst == mid.m == alpha.src
    assert compose(alpha, lam) == f


@given(tables)
def test_nonunital_unitary_factorization_recomposes(f):
    if not is_active(f):
        return
    nonu, mid, u = factor_nonunital_unitary(f)
    assert is_nonunital(nonu) and is_unitary(u)
    assert compose(u, nonu) == f


@given(tables)
def test_json_roundtrip(f):
    assert PointedMap.from_json(f.to_json()) == f
