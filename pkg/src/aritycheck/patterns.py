"""Finite algebraic patterns and Segal functors into finite sets."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Hashable, Optional, Sequence

import numpy as np

from .fin_pointed import PointedMap, is_active, is_inert
from .fincat import FiniteCategory
from .operads import (
    DiscreteOperad,
    EInfinity,
    EOne,
    OperatorMorphism,
    compose_active,
    identity_morphism,
)


class PatternError(ValueError):
    pass


class BoundExceeded(RuntimeError):
    pass


class FinitePattern:
    """A finite category with inert and active morphism classes and a set of
    elementary objects.

    ``generators`` is a set of morphisms of which every morphism is a
    composite; functoriality is checked on composites ``g . s`` with ``s`` a
    generator.
    """

    def __init__(self, category: FiniteCategory, inert: set[int], active: set[int],
                 elementary: Sequence[int], generators: Sequence[int], name: str = "pattern",
                 ref: Optional[dict] = None):
        self.category = category
        self.inert = set(inert)
        self.active = set(active)
        self.elementary = sorted(elementary)
        self.generators = list(generators)
        self.name = name
        self.ref = ref or {"name": name}
        self._el = set(self.elementary)
        self._label_pos = {lab: i for i, lab in enumerate(category.object_labels)}
        labels = category.morphism_labels or list(range(category.n_morphisms))
        self._mor_pos = {(category.src[f], category.dst[f], lab): f for f, lab in enumerate(labels)}
        self._slices: dict[int, list[int]] = {}
        self.operad: Optional[DiscreteOperad] = None
        self.k: Optional[int] = None

    @property
    def n_objects(self) -> int:
        return self.category.n_objects

    def object_index(self, label) -> int:
        return self._label_pos[label]

    def morphism_index(self, a: int, b: int, label) -> int:
        return self._mor_pos[(a, b, label)]

    def compose(self, g: int, f: int) -> int:
        return self.category.compose(g, f)

    def is_elementary(self, x: int) -> bool:
        return x in self._el

    def elementary_slice(self, x: int) -> list[int]:
        """Inert morphisms from ``x`` to elementary objects."""
        if x not in self._slices:
            C = self.category
            self._slices[x] = [f for f in C.out_of(x) if f in self.inert and C.dst[f] in self._el]
        return self._slices[x]

    def check_structure(self, exhaustive: bool = True) -> None:
        """Identities are inert and active; both classes are closed under
        composition; every morphism has an inert-active factorization, unique
        up to a unique isomorphism of the middle object."""
        C = self.category
        for e in C.identities:
            if e not in self.inert or e not in self.active:
                raise PatternError("identities must be inert and active")
        for cls_name, cls in (("inert", self.inert), ("active", self.active)):
            for f in cls:
                for g in C.out_of(C.dst[f]):
                    if g in cls and C.compose(g, f) not in cls:
                        raise PatternError(f"{cls_name} morphisms are not closed under composition")
        if not exhaustive:
            return
        isos = [f for f in range(C.n_morphisms) if f in self.inert and f in self.active]
        for f in range(C.n_morphisms):
            facs = []
            for i in C.out_of(C.src[f]):
                if i not in self.inert:
                    continue
                for a in C.out_of(C.dst[i]):
                    if a in self.active and C.dst[a] == C.dst[f] and C.compose(a, i) == f:
                        facs.append((i, a))
            if not facs:
                raise PatternError(f"morphism {f} has no inert-active factorization")
            i0, a0 = facs[0]
            for i1, a1 in facs[1:]:
                links = [p for p in isos if C.src[p] == C.dst[i0] and C.dst[p] == C.dst[i1]
                         and C.compose(p, i0) == i1 and C.compose(a1, p) == a0]
                if len(links) != 1:
                    raise PatternError(f"factorizations of morphism {f} are not uniquely isomorphic")


# --------------------------------------------------------------------------
# operator patterns


def _tables_into(O: DiscreteOperad, src: tuple, dst: tuple) -> list[OperatorMorphism]:
    """All morphisms ``src -> dst`` over arbitrary pointed maps."""
    out = []
    for table in product(range(len(dst) + 1), repeat=len(src)):
        shape = PointedMap(len(src), len(dst), table)
        choices = []
        for j in range(1, len(dst) + 1):
            ins = tuple(src[i - 1] for i in shape.fiber(j))
            ops = O.ops(ins, dst[j - 1])
            if not ops:
                break
            choices.append(ops)
        else:
            for ops in product(*choices):
                out.append(OperatorMorphism(tuple(src), tuple(dst), shape, ops))
    return out


def _is_inert_morphism(O: DiscreteOperad, f: OperatorMorphism) -> bool:
    if not is_inert(f.shape):
        return False
    return all(op == O.unit(c) for op, c in zip(f.ops, f.dst))


def operator_pattern(O: DiscreteOperad, k: int, name: Optional[str] = None) -> FinitePattern:
    """The operator category of ``O`` on color tuples of length ``<= k``."""
    if k < 0:
        raise ValueError("k must be non-negative")
    objects = [tuple(t) for m in range(k + 1) for t in product(O.colors, repeat=m)]
    arrows = []
    for a, x in enumerate(objects):
        for b, y in enumerate(objects):
            for f in _tables_into(O, x, y):
                arrows.append((a, b, f))
    pos = {o: i for i, o in enumerate(objects)}
    C = FiniteCategory.from_concrete(objects, arrows, lambda g, f: compose_active(O, g, f),
                                     lambda a: identity_morphism(O, objects[a]))
    labels = C.morphism_labels
    inert = {f for f in range(C.n_morphisms) if _is_inert_morphism(O, labels[f])}
    active = {f for f in range(C.n_morphisms) if is_active(labels[f].shape)}
    elementary = [i for i, o in enumerate(objects) if len(o) == 1]
    gens = _generators(O, objects, pos, C)
    ref = {"operad": O.name, "k": k}
    P = FinitePattern(C, inert, active, elementary, gens, name or f"{O.name}<={k}", ref)
    P.operad = O
    P.k = k
    return P


def _generators(O: DiscreteOperad, objects, pos, C: FiniteCategory) -> list[int]:
    """Adjacent transpositions, deletion of the last entry, and one operation
    applied to a block of trailing entries (all other entries fixed)."""
    lookup = {(C.src[f], C.dst[f], lab): f for f, lab in enumerate(C.morphism_labels)}
    two = isinstance(O, (EInfinity, EOne))
    gens = set()
    for x in objects:
        m = len(x)
        a = pos[x]
        for i in range(m - 1):
            tab = list(range(1, m + 1))
            tab[i], tab[i + 1] = tab[i + 1], tab[i]
            y = list(x)
            y[i], y[i + 1] = y[i + 1], y[i]
            y = tuple(y)
            f = OperatorMorphism(x, y, PointedMap(m, m, tuple(tab)), tuple(O.unit(c) for c in y))
            gens.add(lookup[(a, pos[y], f)])
        if m:
            y = x[:-1]
            f = OperatorMorphism(x, y, PointedMap(m, m - 1, tuple(range(1, m)) + (0,)),
                                 tuple(O.unit(c) for c in y))
            gens.add(lookup[(a, pos[y], f)])
        for r in range(0, m + 1):
            if two and r > 2:
                continue
            head, block = x[:m - r], x[m - r:]
            for c in O.colors:
                y = head + (c,)
                if y not in pos:
                    continue
                for op in O.ops(block, c):
                    if r == 1 and op == O.unit(c):
                        continue
                    tab = tuple(range(1, m - r + 1)) + (m - r + 1,) * r
                    f = OperatorMorphism(x, y, PointedMap(m, m - r + 1, tab),
                                         tuple(O.unit(cc) for cc in head) + (op,))
                    gens.add(lookup[(a, pos[y], f)])
    return sorted(gens)


def pattern_fin(k: int) -> FinitePattern:
    return operator_pattern(EInfinity(max(k, 1)), k, f"fin<={k}")


def pattern_assoc(k: int) -> FinitePattern:
    return operator_pattern(EOne(max(k, 1)), k, f"assoc<={k}")


def pattern_from_ref(ref: dict) -> FinitePattern:
    from .operads import builtin

    if ref.get("operad") in ("e_infinity", "fin"):
        return pattern_fin(int(ref["k"]))
    if ref.get("operad") in ("e_one", "assoc"):
        return pattern_assoc(int(ref["k"]))
    raise PatternError(f"unknown pattern reference {ref!r}")


# --------------------------------------------------------------------------
# Segal functors


@dataclass
class SegalFunctor:
    """A functor to finite sets: ``sizes[x]`` elements at each object and an
    integer array per morphism."""
    pattern: FinitePattern
    sizes: list[int]
    tables: list[np.ndarray]
    structure: Optional[dict] = None
    _segal: Optional[bool] = field(default=None, repr=False)

    def table(self, f: int) -> np.ndarray:
        return self.tables[f]

    def check_functorial(self, exhaustive: bool = False) -> Optional[str]:
        """None if functorial, else a description of the first failure.

        By default only composites ``g . s`` with ``s`` a generator are
        compared, which implies the rest by induction on word length."""
        P, C = self.pattern, self.pattern.category
        for f in range(C.n_morphisms):
            t = self.tables[f]
            if t.shape != (self.sizes[C.src[f]],):
                return f"table of morphism {f} has the wrong length"
            if t.size and (t.min() < 0 or t.max() >= self.sizes[C.dst[f]]):
                return f"table of morphism {f} leaves the target"
        for a, e in enumerate(C.identities):
            if not np.array_equal(self.tables[e], np.arange(self.sizes[a])):
                return f"identity of object {a} does not act trivially"
        inner = range(C.n_morphisms) if exhaustive else P.generators
        for s in inner:
            ts = self.tables[s]
            for g in C.out_of(C.dst[s]):
                if not np.array_equal(self.tables[P.compose(g, s)], self.tables[g][ts]):
                    return f"composite of morphisms {g} and {s} is not preserved"
        return None

    def is_segal(self) -> tuple[bool, Optional[dict]]:
        ok, witness = is_segal(self)
        self._segal = ok
        return ok, witness

    def to_json(self) -> dict:
        C = self.pattern.category
        labels = C.morphism_labels
        return {
            "pattern": self.pattern.ref,
            "values": {json.dumps(list(C.object_labels[a])): list(range(n)) for a, n in enumerate(self.sizes)},
            "action": {json.dumps(labels[f].to_json() if hasattr(labels[f], "to_json") else labels[f]):
                       self.tables[f].tolist() for f in range(C.n_morphisms)},
        }


def segal_functor_from_json(data: dict) -> SegalFunctor:
    """Inverse of ``SegalFunctor.to_json``; elements may be any JSON values,
    and action tables list the image of each element in order."""
    P = pattern_from_ref(data["pattern"])
    C = P.category
    elems, where = {}, {}
    for key, vals in data["values"].items():
        a = P.object_index(tuple(json.loads(key)))
        elems[a] = vals
        where[a] = {json.dumps(v, sort_keys=True): i for i, v in enumerate(vals)}
        if len(where[a]) != len(vals):
            raise PatternError(f"repeated elements at object {key}")
    if len(elems) != C.n_objects:
        raise PatternError("values must be given at every object")
    tables: list = [None] * C.n_morphisms
    for key, images in data["action"].items():
        m = json.loads(key)
        label = OperatorMorphism(tuple(m["src"]), tuple(m["dst"]),
                                 PointedMap(len(m["src"]), len(m["dst"]), tuple(m["shape"])),
                                 tuple(tuple(o) if isinstance(o, list) else o for o in m["ops"]))
        a, b = P.object_index(label.src), P.object_index(label.dst)
        try:
            f = P.morphism_index(a, b, label)
        except KeyError:
            raise PatternError(f"unknown morphism {key}") from None
        if len(images) != len(elems[a]):
            raise PatternError(f"table of {key} has the wrong length")
        try:
            tables[f] = np.array([where[b][json.dumps(v, sort_keys=True)] for v in images], dtype=np.int64)
        except KeyError:
            raise PatternError(f"table of {key} leaves the target") from None
    if any(t is None for t in tables):
        raise PatternError("action must be given on every morphism")
    return SegalFunctor(P, [len(elems[a]) for a in range(C.n_objects)], tables)


def _product_rows(domains: Sequence[int], bound: int = 2_000_000) -> np.ndarray:
    total = 1
    for d in domains:
        total *= d
    if total > bound:
        raise BoundExceeded(f"product of {len(domains)} domains has {total} elements")
    if not domains:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.indices(domains).reshape(len(domains), -1).T
    return grids.astype(np.int64)


def is_segal(F: SegalFunctor) -> tuple[bool, Optional[dict]]:
    """Check that ``F(x)`` maps bijectively onto the limit over the
    elementary slice of every ``x``."""
    P, C = F.pattern, F.pattern.category
    for x in range(C.n_objects):
        sl = P.elementary_slice(x)
        doms = [F.sizes[C.dst[r]] for r in sl]
        pos = {r: i for i, r in enumerate(sl)}
        cons = []
        for i, r in enumerate(sl):
            for t in C.out_of(C.dst[r]):
                if t in P.inert and P.is_elementary(C.dst[t]) and not C.is_identity(t):
                    j = pos.get(P.compose(t, r))
                    if j is not None:
                        cons.append((i, j, F.tables[t]))
        rows = _product_rows(doms)
        mask = np.ones(len(rows), dtype=bool)
        for i, j, t in cons:
            mask &= t[rows[:, i]] == rows[:, j]
        limit = rows[mask]
        image = np.stack([F.tables[r] for r in sl], axis=1) if sl else np.zeros((F.sizes[x], 0), dtype=np.int64)
        codes_img = _codes(image, doms)
        codes_lim = _codes(limit, doms)
        if len(set(codes_img.tolist())) != F.sizes[x]:
            return False, {"object": list(C.object_labels[x]), "reason": "Segal map is not injective"}
        if set(codes_img.tolist()) != set(codes_lim.tolist()):
            return False, {"object": list(C.object_labels[x]), "reason": "Segal map is not surjective",
                           "size": F.sizes[x], "limit": int(len(limit))}
    return True, None


def _codes(rows: np.ndarray, doms: Sequence[int]) -> np.ndarray:
    code = np.zeros(len(rows), dtype=np.int64)
    mult = 1
    for i, d in enumerate(doms):
        code += rows[:, i] * mult
        mult *= d
    return code


def restrict(F: SegalFunctor, Q: FinitePattern) -> SegalFunctor:
    """Restriction along the inclusion of a sub-pattern (matched by labels)."""
    P = F.pattern
    C, D = P.category, Q.category
    try:
        obj = [P.object_index(lab) for lab in D.object_labels]
        mor = [P.morphism_index(obj[D.src[f]], obj[D.dst[f]], D.morphism_labels[f]) for f in range(D.n_morphisms)]
    except KeyError:
        raise PatternError("not a sub-pattern of the functor's pattern") from None
    return SegalFunctor(Q, [F.sizes[a] for a in obj], [F.tables[f] for f in mor], F.structure)


# --------------------------------------------------------------------------
# the skeletal model: F(x) = M^|x|, inerts act by projections


def _digits(n: int, m: int) -> np.ndarray:
    if m == 0:
        return np.zeros((1, 0), dtype=np.int64)
    codes = np.arange(n ** m, dtype=np.int64)
    return np.stack([(codes // n ** t) % n for t in range(m)], axis=1)


def _single_color(P: FinitePattern) -> None:
    if any(len(set(o)) > 1 or (o and o[0] != "*") for o in P.category.object_labels):
        raise PatternError("the skeletal model needs a single-colored operator pattern")


def skeletal_functor(P: FinitePattern, n: int, op_tables: dict, structure: Optional[dict] = None) -> SegalFunctor:
    """The functor with ``F(<m>) = M^m`` (little-endian codes) whose value on
    a morphism applies the operation tables fiberwise."""
    _single_color(P)
    C = P.category
    sizes = [n ** len(o) for o in C.object_labels]
    digits: dict[int, np.ndarray] = {}
    tables = []
    for f in range(C.n_morphisms):
        lab = C.morphism_labels[f]
        a = lab.shape.src
        if a not in digits:
            digits[a] = _digits(n, a)
        D = digits[a]
        out = np.zeros(len(D), dtype=np.int64)
        for j in range(1, lab.shape.dst + 1):
            fib = lab.shape.fiber(j)
            idx = np.zeros(len(D), dtype=np.int64)
            for t, i in enumerate(fib):
                idx += D[:, i - 1] * n ** t
            out += op_tables[lab.ops[j - 1]][idx] * n ** (j - 1)
        tables.append(out)
    return SegalFunctor(P, sizes, tables, structure)


def operation_tables(F: SegalFunctor) -> dict:
    """Read the operation tables off a skeletal functor (values on the
    maximally active morphisms into an object of length one)."""
    C = F.pattern.category
    out = {}
    for f in range(C.n_morphisms):
        lab = C.morphism_labels[f]
        if lab.shape.dst == 1 and is_active(lab.shape):
            out.setdefault(lab.ops[0], F.tables[f])
    return out


def is_skeletal(F: SegalFunctor, n: int) -> bool:
    """Sizes are powers of ``n`` and inert morphisms act by projections."""
    C = F.pattern.category
    for a, o in enumerate(C.object_labels):
        if F.sizes[a] != n ** len(o):
            return False
    for f in F.pattern.inert:
        lab = C.morphism_labels[f]
        D = _digits(n, lab.shape.src)
        exp = np.zeros(len(D), dtype=np.int64)
        for j in range(1, lab.shape.dst + 1):
            (i,) = lab.shape.fiber(j)
            exp += D[:, i - 1] * n ** (j - 1)
        if not np.array_equal(F.tables[f], exp):
            return False
    return True


def _perm_index(n: int, r: int, p: Sequence[int]) -> np.ndarray:
    """``idx[code(a)] = code(b)`` with ``b[p[t]] = a[t]``."""
    D = _digits(n, r)
    idx = np.zeros(len(D), dtype=np.int64)
    for t in range(r):
        idx += D[:, t] * n ** p[t]
    return idx


def close_under_symmetry(O: DiscreteOperad, n: int, tables: dict, r: int) -> None:
    """Fill tables of arity r ops from those already present, by equivariance."""
    for op in list(tables):
        if O.arity(op) != r:
            continue
        for p in permutations(range(r)):
            w = O.act(op, p)
            if w not in tables:
                tables[w] = tables[op][_perm_index(n, r, p)]


def forced_tables(O: DiscreteOperad, n: int, tables: dict, r: int) -> Optional[dict]:
    """Tables of arity r forced by functoriality from lower arities, using
    ``w = b . (v, unit)`` with b binary; None if some arity-r operation has
    no such decomposition."""
    binary = O.ops(("*", "*"), "*")
    if r < 3 or not binary:
        return None
    u = O.unit("*")
    out: dict = {}
    D = _digits(n, r)
    head = np.zeros(len(D), dtype=np.int64)
    for t in range(r - 1):
        head += D[:, t] * n ** t
    targets = O.ops(("*",) * r, "*")
    for b in binary:
        for v in O.ops(("*",) * (r - 1), "*"):
            c = O.gamma(b, [v, u])
            if c in out:
                continue
            out[c] = tables[b][tables[v][head] + n * D[:, r - 1]]
            close_under_symmetry(O, n, out, r)
            if len(out) == len(targets):
                return out
    return out if len(out) == len(targets) else None


def structure_tables(O: DiscreteOperad, n: int, unit_value: int, binary: np.ndarray, k: int) -> Optional[dict]:
    """All operation tables up to arity k generated by a unit and one binary
    table for the first binary operation."""
    tables: dict = {}
    for op in O.ops((), "*"):
        tables[op] = np.array([unit_value], dtype=np.int64)
    tables[O.unit("*")] = np.arange(n, dtype=np.int64)
    if k >= 2:
        b0 = O.ops(("*", "*"), "*")[0]
        tables[b0] = np.asarray(binary, dtype=np.int64)
        close_under_symmetry(O, n, tables, 2)
        if set(O.ops(("*", "*"), "*")) - set(tables):
            return None
    for r in range(3, k + 1):
        forced = forced_tables(O, n, tables, r)
        if forced is None:
            return None
        tables.update(forced)
    return tables


# --------------------------------------------------------------------------
# enumeration


@dataclass
class Enumeration:
    functors: list[SegalFunctor]
    raw: int
    iso_classes: int

    def to_json(self) -> dict:
        return {"raw": self.raw, "iso_classes": self.iso_classes}


def _relabel_structure(n: int, e: int, table: Sequence[int], perm: Sequence[int]) -> tuple:
    new = [0] * (n * n)
    for a in range(n):
        for b in range(n):
            new[perm[a] + n * perm[b]] = perm[table[a + n * b]]
    return (perm[e],) + tuple(new)


def _candidate_binaries(O: DiscreteOperad, n: int, e: int, k: int, max_candidates: int) -> np.ndarray:
    """Binary tables (codes ``a + n*b``) meeting conditions that functoriality
    forces in low arity: the unit law, symmetry when the binary operation is
    fixed by the swap, and associativity when k >= 3 and both bracketings
    name the same ternary operation."""
    b0 = O.ops(("*", "*"), "*")[0]
    symmetric = O.act(b0, (1, 0)) == b0
    cells = [(a, b) for a in range(n) for b in range(n) if a != e and b != e and (not symmetric or a <= b)]
    count = n ** len(cells)
    if count > max_candidates:
        raise BoundExceeded(f"{count} candidate tables exceed the bound {max_candidates}")
    free = _digits(n, len(cells))
    T = np.zeros((len(free), n * n), dtype=np.int64)
    for a in range(n):
        T[:, a + n * e] = a
        T[:, e + n * a] = a
    for c, (a, b) in enumerate(cells):
        T[:, a + n * b] = free[:, c]
        if symmetric:
            T[:, b + n * a] = free[:, c]
    u = O.unit("*")
    if k >= 3 and O.gamma(b0, [b0, u]) == O.gamma(b0, [u, b0]):
        keep = np.ones(len(T), dtype=bool)
        for a in range(n):
            for b in range(n):
                ab = T[:, a + n * b]
                for c in range(n):
                    bc = T[:, b + n * c]
                    keep &= T[np.arange(len(T)), ab + n * c] == T[np.arange(len(T)), a + n * bc]
        T = T[keep]
    return T


def enumerate_segal(P: FinitePattern, n: int, max_candidates: int = 1_000_000) -> Enumeration:
    """All Segal functors in the skeletal model with ``F(<1>)`` of size n."""
    O, k = P.operad, P.k
    if O is None:
        raise PatternError("enumeration needs an operator pattern")
    _single_color(P)
    if n < 1:
        raise ValueError("base must be nonempty")
    found = []
    for e in range(n):
        if k >= 2:
            cands = _candidate_binaries(O, n, e, k, max_candidates)
        else:
            cands = [None]
        for row in cands:
            tables = structure_tables(O, n, e, row, k) if row is not None else _low_tables(O, n, e, k)
            if tables is None:
                continue
            F = skeletal_functor(P, n, tables, {"unit": e, "binary": None if row is None else row.tolist()})
            if F.check_functorial() is None and is_segal(F)[0]:
                found.append(F)
    keys = set()
    for F in found:
        st = F.structure
        if st["binary"] is None:
            keys.add(0 if k == 0 else 1)
            continue
        keys.add(min(_relabel_structure(n, st["unit"], st["binary"], p) for p in permutations(range(n))))
    if k == 0:
        found = found[:1]
    return Enumeration(found, len(found), len(keys) if found else 0)


def functor_from_structure(P: FinitePattern, n: int, structure: dict) -> SegalFunctor:
    """Rebuild an enumerated skeletal functor from its unit and binary table."""
    O, k = P.operad, P.k
    e = int(structure["unit"])
    if structure.get("binary") is None:
        tables = _low_tables(O, n, e, k)
    else:
        tables = structure_tables(O, n, e, np.asarray(structure["binary"]), k)
        if tables is None:
            raise PatternError("structure does not generate all operation tables")
    return skeletal_functor(P, n, tables, dict(structure))


def _low_tables(O: DiscreteOperad, n: int, e: int, k: int) -> dict:
    tables = {op: np.array([e], dtype=np.int64) for op in O.ops((), "*")}
    tables[O.unit("*")] = np.arange(n, dtype=np.int64)
    return tables


# --------------------------------------------------------------------------
# right Kan extension along an arity inclusion


@dataclass
class _CommaData:
    """The comma category under a new object y: objects ``(x, g: y -> x)``
    with x old, constraints along generators of the old pattern."""
    objects: list[tuple[int, int]]
    index: dict[tuple[int, int], int]
    constraints: list[tuple[int, int, int]]
    seeds: list[int]
    assembly: list[tuple[int, int, list[int]]]


class _Inclusion:
    def __init__(self, S: FinitePattern, T: FinitePattern):
        CS, CT = S.category, T.category
        try:
            self.obj = [T.object_index(lab) for lab in CS.object_labels]
            self.mor = [T.morphism_index(self.obj[CS.src[f]], self.obj[CS.dst[f]], CS.morphism_labels[f])
                        for f in range(CS.n_morphisms)]
        except KeyError:
            raise PatternError("source pattern is not a sub-pattern of the target") from None
        self.obj_back = {t: s for s, t in enumerate(self.obj)}
        self.mor_back = {t: s for s, t in enumerate(self.mor)}
        self.new = [y for y in range(CT.n_objects) if y not in self.obj_back]


def _comma(S: FinitePattern, T: FinitePattern, inc: _Inclusion, y: int) -> _CommaData:
    CS, CT = S.category, T.category
    objects = []
    for x in range(CS.n_objects):
        for g in CT.hom(y, inc.obj[x]):
            objects.append((x, g))
    index = {o: i for i, o in enumerate(objects)}
    gens_from: dict[int, list[int]] = {}
    for h in S.generators:
        gens_from.setdefault(CS.src[h], []).append(h)
    constraints = []
    for i, (x, g) in enumerate(objects):
        for h in gens_from.get(x, []):
            j = index[(CS.dst[h], T.compose(inc.mor[h], g))]
            constraints.append((i, j, h))
    seeds = [i for i, (x, g) in enumerate(objects) if S.is_elementary(x) and g in T.inert]
    assembly = []
    for i, (x, g) in enumerate(objects):
        comps = [index[(CS.dst[r], T.compose(inc.mor[r], g))] for r in S.elementary_slice(x)]
        assembly.append((i, x, comps))
    return _CommaData(objects, index, constraints, seeds, assembly)


@dataclass
class KanExtension:
    functor: Optional[SegalFunctor]
    diagnostics: dict
    families: dict = field(default_factory=dict)


def _segal_inverse(F: SegalFunctor, x: int):
    """Lookup from codes of elementary components back to ``F(x)``; None if
    the Segal map of F at x is not injective."""
    S = F.pattern
    C = S.category
    sl = S.elementary_slice(x)
    doms = [F.sizes[C.dst[r]] for r in sl]
    total = 1
    for d in doms:
        total *= d
    img = np.stack([F.tables[r] for r in sl], axis=1) if sl else np.zeros((F.sizes[x], 0), dtype=np.int64)
    codes = _codes(img, doms)
    if len(np.unique(codes)) != F.sizes[x]:
        return None
    inv = np.full(total, -1, dtype=np.int64)
    inv[codes] = np.arange(F.sizes[x])
    return inv, doms


def _solve_limit(F: SegalFunctor, cd: _CommaData, bound: int) -> tuple[np.ndarray, dict]:
    """Compatible families over the comma category, one row per family."""
    S = F.pattern
    CS = S.category
    nvar = len(cd.objects)
    dom = [F.sizes[x] for x, _ in cd.objects]
    rows = _product_rows([dom[i] for i in cd.seeds], bound)
    V = np.full((len(rows), nvar), -1, dtype=np.int64)
    V[:, cd.seeds] = rows
    known = np.zeros(nvar, dtype=bool)
    known[cd.seeds] = True
    mask = np.ones(len(rows), dtype=bool)
    inverses: dict[int, object] = {}
    out_cons: list[list[tuple[int, int]]] = [[] for _ in range(nvar)]
    for i, j, h in cd.constraints:
        out_cons[i].append((j, h))
    branched = 0
    while True:
        changed = True
        while changed:
            changed = False
            for i in range(nvar):
                if not known[i]:
                    continue
                for j, h in out_cons[i]:
                    if not known[j]:
                        V[:, j] = F.tables[h][V[:, i]]
                        known[j] = True
                        changed = True
            for i, x, comps in cd.assembly:
                if known[i] or not comps or not all(known[c] for c in comps):
                    continue
                if x not in inverses:
                    inverses[x] = _segal_inverse(F, x)
                if inverses[x] is None:
                    continue
                inv, doms = inverses[x]
                vals = inv[_codes(V[:, comps], doms)]
                mask &= vals >= 0
                V[:, i] = np.where(vals >= 0, vals, 0)
                known[i] = True
                changed = True
        missing = np.flatnonzero(~known)
        if not len(missing):
            break
        # nothing forces this variable: branch over its whole domain
        i = int(missing[0])
        d = dom[i]
        if len(V) * d > bound:
            raise BoundExceeded(f"branching on comma object {i} exceeds the bound {bound}")
        V = np.repeat(V, d, axis=0)
        mask = np.repeat(mask, d)
        V[:, i] = np.tile(np.arange(d), len(V) // d)
        known[i] = True
        branched += 1
    for i, j, h in cd.constraints:
        mask &= F.tables[h][V[:, i]] == V[:, j]
    return V[mask], {"comma_objects": nvar, "constraints": len(cd.constraints),
                     "seeds": len(cd.seeds), "candidates": int(len(V)), "branched": branched}


def right_kan_extend(F: SegalFunctor, T: FinitePattern, bound: int = 2_000_000) -> KanExtension:
    """Pointwise right Kan extension of F along the inclusion into T.

    Old objects keep their values; a new object y gets the compatible
    families over its comma category, identified by their components at the
    inert elementary comma objects."""
    S = F.pattern
    CS, CT = S.category, T.category
    inc = _Inclusion(S, T)
    commas: dict[int, _CommaData] = {}
    fams: dict[int, np.ndarray] = {}
    lookup: dict[int, dict] = {}
    diag: dict = {"new_objects": {}}
    for y in inc.new:
        cd = _comma(S, T, inc, y)
        commas[y] = cd
        sols, info = _solve_limit(F, cd, bound)
        fams[y] = sols
        keys = _codes(sols[:, cd.seeds], [F.sizes[cd.objects[i][0]] for i in cd.seeds])
        lookup[y] = {int(c): r for r, c in enumerate(keys.tolist())}
        info["limit_size"] = int(len(sols))
        info["seed_identification"] = len(lookup[y]) == len(sols)
        diag["new_objects"][json.dumps(list(CT.object_labels[y]))] = info
    sizes = [0] * CT.n_objects
    for s, t in enumerate(inc.obj):
        sizes[t] = F.sizes[s]
    for y in inc.new:
        sizes[y] = len(fams[y])
    broken = []

    def encode(y: int, comps: list[np.ndarray]) -> np.ndarray:
        cd = commas[y]
        doms = [F.sizes[cd.objects[i][0]] for i in cd.seeds]
        codes = _codes(np.stack(comps, axis=1), doms)
        table = lookup[y]
        return np.array([table.get(int(c), -1) for c in codes.tolist()], dtype=np.int64)

    tables = []
    for f in range(CT.n_morphisms):
        a, b = CT.src[f], CT.dst[f]
        if a in inc.obj_back and b in inc.obj_back:
            tables.append(F.tables[inc.mor_back[f]])
            continue
        if a not in inc.obj_back:
            cd_a = commas[a]
            if b in inc.obj_back:
                tables.append(fams[a][:, cd_a.index[(inc.obj_back[b], f)]].copy())
                continue
            comps = []
            for i in commas[b].seeds:
                e, s = commas[b].objects[i]
                comps.append(fams[a][:, cd_a.index[(e, T.compose(s, f))]])
            if not len(fams[a]):
                tables.append(np.zeros(0, dtype=np.int64))
                continue
            t = encode(b, comps) if comps else np.zeros(len(fams[a]), dtype=np.int64)
        else:
            x = inc.obj_back[a]
            comps = []
            for i in commas[b].seeds:
                e, s = commas[b].objects[i]
                comps.append(F.tables[inc.mor_back[T.compose(s, f)]])
            if F.sizes[x] == 0:
                tables.append(np.zeros(0, dtype=np.int64))
                continue
            t = encode(b, comps) if comps else np.zeros(F.sizes[x], dtype=np.int64)
        if (t < 0).any():
            broken.append(f)
            t = np.where(t < 0, 0, t)
        tables.append(t)
    diag["unresolved_morphisms"] = len(broken)
    G = SegalFunctor(T, sizes, tables, F.structure)
    return KanExtension(G, diag, fams)


def _positions(P: FinitePattern, x: int) -> list[int]:
    """Elementary slice of x ordered by the position it picks out."""
    C = P.category
    return sorted(P.elementary_slice(x), key=lambda f: C.morphism_labels[f].shape.fiber(1)[0])


def segal_normal_form(F: SegalFunctor) -> SegalFunctor:
    """Transport a single-colored Segal functor to the skeletal model along
    its Segal maps, so ``F(<m>)`` becomes ``M^m`` with ``M = F(<1>)``."""
    P = F.pattern
    _single_color(P)
    C = P.category
    one = [x for x in range(C.n_objects) if len(C.object_labels[x]) == 1]
    if not one:
        raise PatternError("pattern has no object of length one")
    n = F.sizes[one[0]]
    phi, psi = [], []
    for x in range(C.n_objects):
        m = len(C.object_labels[x])
        if F.sizes[x] != n ** m:
            raise PatternError(f"|F({m})| = {F.sizes[x]} is not {n}^{m}")
        sl = _positions(P, x)
        if m and sl:
            codes = _codes(np.stack([F.tables[r] for r in sl], axis=1), [n] * m)
        else:
            codes = np.zeros(F.sizes[x], dtype=np.int64)
        inv = np.full(n ** m, -1, dtype=np.int64)
        inv[codes] = np.arange(F.sizes[x])
        if (inv < 0).any():
            raise PatternError(f"Segal map at an object of length {m} is not bijective")
        phi.append(codes)
        psi.append(inv)
    tables = [phi[C.dst[f]][F.tables[f][psi[C.src[f]]]] for f in range(C.n_morphisms)]
    return SegalFunctor(P, [n ** len(o) for o in C.object_labels], tables, F.structure)


def _candidate_extensions(O, n: int, low: dict, k: int, up_to: int, bound: int):
    """Operation tables up to arity ``up_to`` restricting to ``low``."""
    u = O.unit("*")
    if k >= 2:
        tables = dict(low)
        for r in range(k + 1, up_to + 1):
            forced = forced_tables(O, n, tables, r)
            if forced is None:
                raise BoundExceeded(f"arity {r} operations are not forced by lower arities")
            tables.update(forced)
        return [tables]
    nullary = O.ops((), "*")
    if k < 1 or not nullary:
        raise BoundExceeded("the unit is not determined by the source pattern")
    e = int(low[nullary[0]][0])
    out = []
    for row in _candidate_binaries(O, n, e, up_to, bound):
        t = structure_tables(O, n, e, row, up_to)
        if t is not None and np.array_equal(t[u], low[u]):
            out.append(t)
    return out


def check_unique_extension(F: SegalFunctor, target: FinitePattern, bound: int = 1_000_000) -> dict:
    """Decide whether the Segal functor F extends to a Segal functor on the
    larger pattern, uniquely up to isomorphism relative to F.

    The right Kan extension is computed and put in skeletal form; every
    skeletal Segal extension is generated from the operation tables of F and
    compared with it."""
    S = F.pattern
    O, k, up_to = target.operad, S.k, target.k
    if O is None or S.operad is None:
        raise PatternError("uniqueness check needs operator patterns")
    _single_color(S)
    report: dict = {"source_k": k, "target_k": up_to}
    Fs = segal_normal_form(F)
    n = Fs.sizes[S.object_index(("*",))] if k >= 1 else None
    report["base"] = n
    kan = right_kan_extend(F, target, bound)
    G = kan.functor
    report["kan"] = kan.diagnostics
    problems = []
    if kan.diagnostics["unresolved_morphisms"]:
        problems.append("Kan extension leaves morphisms unresolved")
    sizes_ok = n is not None and all(G.sizes[x] == n ** len(o) for x, o in enumerate(target.category.object_labels))
    report["sizes_ok"] = sizes_ok
    if not sizes_ok:
        problems.append("Kan extension has the wrong sizes")
    msg = G.check_functorial()
    if msg:
        problems.append("Kan extension is not functorial: " + msg)
    seg, _ = is_segal(G)
    if not seg:
        problems.append("Kan extension is not Segal")
    report["kan_is_segal"] = not problems
    back = restrict(G, S)
    report["restricts_to_input"] = back.sizes == F.sizes and all(
        np.array_equal(a, b) for a, b in zip(back.tables, F.tables))
    if not report["restricts_to_input"]:
        problems.append("Kan extension does not restrict to the input")
    try:
        cands = _candidate_extensions(O, n, operation_tables(Fs), k, up_to, bound) if n is not None else None
    except BoundExceeded as exc:
        cands = None
        report["reason"] = str(exc)
    if cands is None:
        report["verdict"] = "counterexample" if problems else "unknown"
        report["problems"] = problems
        return report
    valid = []
    for t in cands:
        H = skeletal_functor(target, n, t)
        if H.check_functorial() is None and is_segal(H)[0]:
            valid.append(H)
    report["segal_extensions"] = len(valid)
    report["problems"] = problems
    if problems or len(valid) != 1:
        if not valid:
            problems.append("no Segal extension exists")
        elif len(valid) > 1:
            problems.append(f"{len(valid)} non-isomorphic Segal extensions")
        report["verdict"] = "counterexample"
        return report
    Gs = segal_normal_form(G)
    same = all(np.array_equal(a, b) for a, b in zip(Gs.tables, valid[0].tables))
    report["kan_matches_extension"] = same
    report["verdict"] = "extends_uniquely" if same else "counterexample"
    if not same:
        problems.append("Kan extension differs from the Segal extension")
    return report
