"""Finite categories, posets, comma categories and realization connectivity."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Hashable, Optional, Sequence

from .homology import (
    ChainComplex,
    ConnectivityCertificate,
    SimplicialComplex,
    certify,
    edge_path_presentation,
    homology,
    pi1_status,
    spanning_forest,
)


class NotFunctorial(ValueError):
    pass


class NotThin(ValueError):
    pass


class FiniteCategory:
    """Objects are ``0..n-1``; morphisms are ``0..m-1`` with ``src``/``dst``.

    Composition is either a full table or a callable ``(g, f) -> gf`` on
    composable pairs, memoized on first use.
    """

    def __init__(self, n_objects: int, src: Sequence[int], dst: Sequence[int],
                 identities: Sequence[int],
                 compose: "dict[tuple[int, int], int] | Callable[[int, int], int]",
                 object_labels: Optional[Sequence[Hashable]] = None,
                 morphism_labels: Optional[Sequence[Hashable]] = None):
        self.n_objects = n_objects
        self.src = list(src)
        self.dst = list(dst)
        self.identities = list(identities)
        if len(self.src) != len(self.dst):
            raise ValueError("src and dst disagree in length")
        if len(self.identities) != n_objects:
            raise ValueError("need one identity per object")
        for a, e in enumerate(self.identities):
            if self.src[e] != a or self.dst[e] != a:
                raise ValueError(f"identity of {a} is not an endomorphism of {a}")
        if callable(compose):
            self._fn = compose
            self._table: dict[tuple[int, int], int] = {}
        else:
            self._fn = None
            self._table = dict(compose)
        self.object_labels = list(object_labels) if object_labels is not None else list(range(n_objects))
        self.morphism_labels = list(morphism_labels) if morphism_labels is not None else None
        self._hom: dict[tuple[int, int], list[int]] = {}
        self._out: list[list[int]] = [[] for _ in range(n_objects)]
        self._in: list[list[int]] = [[] for _ in range(n_objects)]
        for f, (a, b) in enumerate(zip(self.src, self.dst)):
            self._hom.setdefault((a, b), []).append(f)
            self._out[a].append(f)
            self._in[b].append(f)

    @property
    def n_morphisms(self) -> int:
        return len(self.src)

    def hom(self, a: int, b: int) -> list[int]:
        return self._hom.get((a, b), [])

    def out_of(self, a: int) -> list[int]:
        return self._out[a]

    def into(self, b: int) -> list[int]:
        return self._in[b]

    def is_identity(self, f: int) -> bool:
        return self.identities[self.src[f]] == f

    def compose(self, g: int, f: int) -> int:
        """g after f."""
        if self.dst[f] != self.src[g]:
            raise ValueError(f"morphisms {g} and {f} are not composable")
        key = (g, f)
        r = self._table.get(key)
        if r is None:
            if self._fn is None:
                raise ValueError(f"composition table has no entry for {key}")
            r = self._fn(g, f)
            self._table[key] = r
        return r

    def validate(self) -> None:
        """Exhaustive check of units and associativity."""
        for f in range(self.n_morphisms):
            if self.compose(f, self.identities[self.src[f]]) != f:
                raise ValueError(f"identity is not a right unit for {f}")
            if self.compose(self.identities[self.dst[f]], f) != f:
                raise ValueError(f"identity is not a left unit for {f}")
        for f in range(self.n_morphisms):
            for g in self._out[self.dst[f]]:
                gf = self.compose(g, f)
                if self.src[gf] != self.src[f] or self.dst[gf] != self.dst[g]:
                    raise ValueError(f"composite of {g},{f} has wrong endpoints")
                for h in self._out[self.dst[g]]:
                    if self.compose(h, gf) != self.compose(self.compose(h, g), f):
                        raise ValueError(f"associativity fails on {h},{g},{f}")

    def is_thin(self) -> bool:
        return all(len(v) <= 1 for v in self._hom.values())

    @classmethod
    def from_concrete(cls, objects: Sequence[Hashable], arrows: Sequence[tuple[int, int, Hashable]],
                      compose_labels: Callable[[Hashable, Hashable], Hashable],
                      identity_label: Callable[[int], Hashable]) -> "FiniteCategory":
        """Build from labelled arrows ``(a, b, label)``; composition is
        computed on labels and looked up."""
        lookup = {}
        src, dst = [], []
        for k, (a, b, lab) in enumerate(arrows):
            if (a, b, lab) in lookup:
                raise ValueError(f"duplicate arrow {(a, b, lab)}")
            lookup[(a, b, lab)] = k
            src.append(a)
            dst.append(b)
        ids = []
        for a in range(len(objects)):
            key = (a, a, identity_label(a))
            if key not in lookup:
                raise ValueError(f"identity of object {a} is missing")
            ids.append(lookup[key])
        labels = [lab for _, _, lab in arrows]

        def comp(g: int, f: int) -> int:
            key = (src[f], dst[g], compose_labels(labels[g], labels[f]))
            try:
                return lookup[key]
            except KeyError:
                raise ValueError(f"composite {key} is not among the arrows") from None

        return cls(len(objects), src, dst, ids, comp, objects, labels)

    def to_json(self) -> dict:
        comp = []
        for f in range(self.n_morphisms):
            for g in self._out[self.dst[f]]:
                comp.append([g, f, self.compose(g, f)])
        return {
            "objects": list(range(self.n_objects)),
            "morphisms": [{"id": f, "src": a, "dst": b} for f, (a, b) in enumerate(zip(self.src, self.dst))],
            "compose": comp,
            "identities": list(self.identities),
        }

    @classmethod
    def from_json(cls, data: dict) -> "FiniteCategory":
        objs = list(data["objects"])
        opos = {o: i for i, o in enumerate(objs)}
        mors = sorted(data["morphisms"], key=lambda m: m["id"])
        mpos = {m["id"]: i for i, m in enumerate(mors)}
        src = [opos[m["src"]] for m in mors]
        dst = [opos[m["dst"]] for m in mors]
        ids = [mpos[e] for e in data["identities"]]
        table = {(mpos[g], mpos[f]): mpos[gf] for g, f, gf in data["compose"]}
        C = cls(len(objs), src, dst, ids, table, objs, [m["id"] for m in mors])
        for f in range(C.n_morphisms):
            for g in C.out_of(C.dst[f]):
                if (g, f) not in table:
                    raise ValueError(f"composition table misses the pair {(g, f)}")
        C.validate()
        return C


class FinitePoset:
    """Elements ``0..n-1``; ``up[a]`` is the set of b with a <= b."""

    def __init__(self, n: int, leq: Sequence[tuple[int, int]], labels: Optional[Sequence[Hashable]] = None):
        self.n = n
        self.up: list[set[int]] = [{a} for a in range(n)]
        for a, b in leq:
            self.up[a].add(b)
        self.labels = list(labels) if labels is not None else list(range(n))
        self._check()

    def _check(self) -> None:
        for a in range(self.n):
            for b in self.up[a]:
                if b != a and a in self.up[b]:
                    raise ValueError(f"antisymmetry fails for {a}, {b}")
                if not self.up[b] <= self.up[a]:
                    raise ValueError(f"transitivity fails at {a} <= {b}")

    def leq(self, a: int, b: int) -> bool:
        return b in self.up[a]

    def linear_extension(self) -> list[int]:
        return sorted(range(self.n), key=lambda a: -len(self.up[a]))

    def maximum(self) -> Optional[int]:
        for a in range(self.n):
            if all(a in self.up[b] for b in range(self.n)):
                return a
        return None

    def minimum(self) -> Optional[int]:
        for a in range(self.n):
            if len(self.up[a]) == self.n:
                return a
        return None

    def as_category(self) -> FiniteCategory:
        pairs = [(a, b) for a in range(self.n) for b in sorted(self.up[a])]
        pos = {p: i for i, p in enumerate(pairs)}
        src = [a for a, _ in pairs]
        dst = [b for _, b in pairs]
        ids = [pos[(a, a)] for a in range(self.n)]
        return FiniteCategory(self.n, src, dst, ids,
                              lambda g, f: pos[(src[f], dst[g])], self.labels)

    def to_json(self) -> dict:
        return {"elements": list(self.labels),
                "leq": [[self.labels[a], self.labels[b]] for a in range(self.n) for b in sorted(self.up[a])]}

    @classmethod
    def from_json(cls, data: dict) -> "FinitePoset":
        labels = list(data["elements"])
        pos = {e: i for i, e in enumerate(labels)}
        return cls(len(labels), [(pos[a], pos[b]) for a, b in data["leq"]], labels)


@dataclass
class Skeleton:
    poset: FinitePoset
    class_of: list[int]
    representatives: list[int]

    def category(self) -> FiniteCategory:
        return self.poset.as_category()


def isomorphism_classes(C: FiniteCategory) -> list[int]:
    parent = list(range(C.n_objects))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for f in range(C.n_morphisms):
        a, b = C.src[f], C.dst[f]
        if a == b or find(a) == find(b):
            continue
        for g in C.hom(b, a):
            if C.compose(g, f) == C.identities[a] and C.compose(f, g) == C.identities[b]:
                parent[find(a)] = find(b)
                break
    roots = {}
    return [roots.setdefault(find(a), len(roots)) for a in range(C.n_objects)]


def skeletalize(C: FiniteCategory) -> Skeleton:
    """Collapse isomorphism classes; raises NotThin if the result is not a poset."""
    cls = isomorphism_classes(C)
    n = max(cls) + 1 if cls else 0
    reps = [-1] * n
    for a, c in enumerate(cls):
        if reps[c] < 0:
            reps[c] = a
    leq = []
    for i, r in enumerate(reps):
        for j, s in enumerate(reps):
            h = len(C.hom(r, s))
            if h > 1:
                raise NotThin(f"{h} parallel morphisms between objects {r} and {s}")
            if h and i != j:
                leq.append((i, j))
    return Skeleton(FinitePoset(n, leq, [C.object_labels[r] for r in reps]), cls, reps)


def order_complex(P: FinitePoset, max_dim: Optional[int] = None) -> tuple[SimplicialComplex, list[int]]:
    """Chains of ``P`` as simplices; vertices are relabelled along a linear
    extension so that chains are increasing tuples.  Returns the complex and
    the element at each vertex."""
    order = P.linear_extension()
    vid = {a: i for i, a in enumerate(order)}
    above = [sorted(vid[b] for b in P.up[a] if b != a) for a in order]
    layers: list[list[tuple[int, ...]]] = [[(v,) for v in range(P.n)]] if P.n else []
    cur = layers[0] if layers else []
    truncated = False
    d = 0
    while cur:
        if max_dim is not None and d == max_dim:
            truncated = any(above[s[-1]] for s in cur)
            break
        nxt = [s + (w,) for s in cur for w in above[s[-1]]]
        if not nxt:
            break
        nxt.sort()
        layers.append(nxt)
        cur = nxt
        d += 1
    return SimplicialComplex(P.n, layers, not truncated), order


@dataclass
class PosetModel:
    """A poset ``P`` with a functor ``C -> P`` certified to be a homotopy
    equivalence: every fiber over an upper (or lower) set has an initial
    (or terminal) object."""
    poset: FinitePoset
    class_of: list[int]
    side: str
    witnesses: list[int]


def reachability_classes(C: FiniteCategory) -> tuple[list[int], FinitePoset]:
    """Preorder reflection: a <= b iff Hom(a, b) is nonempty."""
    n = C.n_objects
    reach = [set() for _ in range(n)]
    for f in range(C.n_morphisms):
        reach[C.src[f]].add(C.dst[f])
    cls = [-1] * n
    reps = []
    for a in range(n):
        if cls[a] >= 0:
            continue
        c = len(reps)
        reps.append(a)
        for b in reach[a]:
            if a in reach[b]:
                cls[b] = c
    leq = {(cls[a], cls[b]) for a in range(n) for b in reach[a] if cls[a] != cls[b]}
    labels = [C.object_labels[r] for r in reps]
    return cls, FinitePoset(len(reps), sorted(leq), labels)


def poset_model(C: FiniteCategory) -> Optional[PosetModel]:
    """Quillen A applied to the preorder reflection, or None when neither
    fiber condition can be certified."""
    cls, P = reachability_classes(C)
    members: list[list[int]] = [[] for _ in range(P.n)]
    for a, c in enumerate(cls):
        members[c].append(a)
    down: list[set[int]] = [set() for _ in range(P.n)]
    for a in range(P.n):
        for b in P.up[a]:
            down[b].add(a)
    for side in ("under", "over"):
        witnesses = []
        for rho in range(P.n):
            span = P.up[rho] if side == "under" else down[rho]
            objs = [a for c in span for a in members[c]]
            found = None
            for i in members[rho]:
                if side == "under":
                    ok = all(len(C.hom(i, b)) == 1 for b in objs)
                else:
                    ok = all(len(C.hom(b, i)) == 1 for b in objs)
                if ok:
                    found = i
                    break
            if found is None:
                break
            witnesses.append(found)
        else:
            return PosetModel(P, cls, side, witnesses)
    return None


def poset_connectivity(P: FinitePoset, cap: int, budget: int = 200_000) -> ConnectivityCertificate:
    from .homology import connectivity

    if P.n and (P.maximum() is not None or P.minimum() is not None):
        return certify(True, 1, None, "yes", cap, contractible=True)
    K, _ = order_complex(P, max_dim=cap + 1)
    return connectivity(K, cap, budget)


# --------------------------------------------------------------------------
# nerves of non-thin categories


def nerve_chain_complex(C: FiniteCategory, top: int) -> ChainComplex:
    """Normalized nerve, reduced, through degree ``top``.

    A d-simplex is a string of d composable non-identity morphisms; a face
    whose composite is an identity is degenerate and contributes zero.
    """
    nonid = [f for f in range(C.n_morphisms) if not C.is_identity(f)]
    layers: list[list[tuple[int, ...]]] = [[(a,) for a in range(C.n_objects)]]
    if top >= 1:
        layers.append([(f,) for f in nonid])
    nonid_out = [[f for f in C.out_of(a) if not C.is_identity(f)] for a in range(C.n_objects)]
    for d in range(2, top + 1):
        layers.append([s + (g,) for s in layers[-1] for g in nonid_out[C.dst[s[-1]]]])
    index = [{s: i for i, s in enumerate(L)} for L in layers]
    bounds: dict[int, list[dict[int, int]]] = {}
    if top >= 1:
        bounds[1] = []
        for (f,) in layers[1]:
            col: dict[int, int] = {}
            col[C.dst[f]] = col.get(C.dst[f], 0) + 1
            col[C.src[f]] = col.get(C.src[f], 0) - 1
            bounds[1].append({k: v for k, v in col.items() if v})
    for d in range(2, top + 1):
        cols = []
        lower = index[d - 1]
        for s in layers[d]:
            col: dict[int, int] = {}

            def add(face, sign):
                k = lower[face]
                col[k] = col.get(k, 0) + sign

            add(s[1:], 1)
            for i in range(1, d):
                h = C.compose(s[i], s[i - 1])
                if not C.is_identity(h):
                    add(s[:i - 1] + (h,) + s[i + 1:], -1 if i % 2 else 1)
            add(s[:-1], -1 if d % 2 else 1)
            cols.append({k: v for k, v in col.items() if v})
        bounds[d] = cols
    return ChainComplex([len(L) for L in layers], bounds, True, False)


def nerve_pi1(C: FiniteCategory, budget: int = 200_000) -> str:
    nonid = [f for f in range(C.n_morphisms) if not C.is_identity(f)]
    eid = {f: k for k, f in enumerate(nonid)}
    edges = [(C.src[f], C.dst[f]) for f in nonid]
    tris = []
    for f in nonid:
        for g in C.out_of(C.dst[f]):
            if C.is_identity(g):
                continue
            h = C.compose(g, f)
            tris.append((eid[f], eid[g], None if C.is_identity(h) else eid[h]))
    return pi1_status(edge_path_presentation(C.n_objects, edges, tris), budget)[0]


def category_connectivity(C: FiniteCategory, cap: int, budget: int = 200_000) -> ConnectivityCertificate:
    """Connectivity of the realization of ``C``.  Thin-after-quotient
    categories go through the order complex of the skeleton; others through
    the normalized nerve truncated just above ``cap``."""
    try:
        S = skeletalize(C)
    except NotThin:
        pass
    else:
        return poset_connectivity(S.poset, cap, budget)
    model = poset_model(C)
    if model is not None:
        cert = poset_connectivity(model.poset, cap, budget)
        cert.notes.append(f"reduced to a {model.poset.n}-element poset by Quillen A ({model.side} fibers)")
        return cert
    if C.n_objects == 0:
        return certify(False, 0, None, "n/a", cap)
    comp, _ = spanning_forest(C.n_objects, [(C.src[f], C.dst[f]) for f in range(C.n_morphisms)])
    if max(comp) > 0:
        return certify(True, max(comp) + 1, None, "n/a", cap)
    for a in range(C.n_objects):
        if all(len(C.hom(b, a)) == 1 for b in range(C.n_objects)) or \
                all(len(C.hom(a, b)) == 1 for b in range(C.n_objects)):
            return certify(True, 1, None, "yes", cap, contractible=True)
    profile = homology(nerve_chain_complex(C, cap + 1), through=cap)
    pi1 = nerve_pi1(C, budget) if cap >= 1 else "n/a"
    return certify(True, 1, profile, pi1, cap)


def realization_poset(C: FiniteCategory) -> Optional[FinitePoset]:
    """A poset with homotopy equivalent realization, if one is certified."""
    try:
        return skeletalize(C).poset
    except NotThin:
        model = poset_model(C)
        return None if model is None else model.poset


def realization_homology(C: FiniteCategory, through: Optional[int] = None):
    """Reduced homology of the realization; all degrees when ``through`` is
    None (needs a certified poset model), else degrees ``<= through``."""
    from .homology import boundary_chain_complex

    P = realization_poset(C)
    if P is None:
        if through is None:
            raise NotThin("no poset model; a degree bound is required for the nerve")
        return homology(nerve_chain_complex(C, through + 1), through=through)
    K, _ = order_complex(P, max_dim=None if through is None else through + 1)
    return homology(boundary_chain_complex(K, True), through=through)


# --------------------------------------------------------------------------
# functors and comma categories


class Functor:
    def __init__(self, source: FiniteCategory, target: FiniteCategory,
                 on_objects: Sequence[int], on_morphisms: Sequence[int]):
        self.source = source
        self.target = target
        self.on_objects = list(on_objects)
        self.on_morphisms = list(on_morphisms)

    def check(self) -> None:
        C, D = self.source, self.target
        if len(self.on_objects) != C.n_objects or len(self.on_morphisms) != C.n_morphisms:
            raise NotFunctorial("object or morphism table has the wrong length")
        for f in range(C.n_morphisms):
            Ff = self.on_morphisms[f]
            if D.src[Ff] != self.on_objects[C.src[f]] or D.dst[Ff] != self.on_objects[C.dst[f]]:
                raise NotFunctorial(f"morphism {f} is sent to a morphism with wrong endpoints")
        for a in range(C.n_objects):
            if self.on_morphisms[C.identities[a]] != D.identities[self.on_objects[a]]:
                raise NotFunctorial(f"identity of {a} is not preserved")
        for f in range(C.n_morphisms):
            for g in C.out_of(C.dst[f]):
                if self.on_morphisms[C.compose(g, f)] != D.compose(self.on_morphisms[g], self.on_morphisms[f]):
                    raise NotFunctorial(f"composition of {g},{f} is not preserved")

    @classmethod
    def identity(cls, C: FiniteCategory) -> "Functor":
        return cls(C, C, range(C.n_objects), range(C.n_morphisms))


def induced_subposet(P: FinitePoset, elements: Sequence[int]) -> FinitePoset:
    idx = {a: i for i, a in enumerate(elements)}
    leq = [(idx[a], idx[b]) for a in elements for b in P.up[a] if b in idx]
    return FinitePoset(len(elements), leq, [P.labels[a] for a in elements])


def poset_inclusion(P: FinitePoset, elements: Sequence[int]) -> Functor:
    """The inclusion of the full subposet on ``elements`` as a functor."""
    Q = induced_subposet(P, elements)
    C, D = Q.as_category(), P.as_category()
    mors = [D.hom(elements[C.src[f]], elements[C.dst[f]])[0] for f in range(C.n_morphisms)]
    return Functor(C, D, list(elements), mors)


def _category_json(data: dict) -> FiniteCategory:
    if "elements" in data:
        return FinitePoset.from_json(data).as_category()
    return FiniteCategory.from_json(data)


def functor_from_json(data: dict) -> Functor:
    """``{"source": C, "target": D, "objects": [...], "morphisms": [...]}``
    with C and D in category or poset format and both maps given by index.
    A poset with a ``"subposet"`` list of elements gives its inclusion."""
    if "subposet" in data:
        P = FinitePoset.from_json(data["poset"])
        pos = {e: i for i, e in enumerate(P.labels)}
        return poset_inclusion(P, [pos[e] for e in data["subposet"]])
    if "poset" in data:
        return Functor.identity(FinitePoset.from_json(data["poset"]).as_category())
    F = Functor(_category_json(data["source"]), _category_json(data["target"]),
                [int(v) for v in data["objects"]], [int(v) for v in data["morphisms"]])
    F.check()
    return F


def comma_category(F: Functor, d: int, side: str = "over", check: bool = True) -> FiniteCategory:
    """``side='over'``: pairs (c, u: F(c) -> d); ``side='under'``: pairs
    (c, u: d -> F(c)).  A morphism is a morphism h of the source making the
    triangle commute."""
    if check:
        F.check()
    C, D = F.source, F.target
    if side == "over":
        objs = [(c, u) for c in range(C.n_objects) for u in D.hom(F.on_objects[c], d)]
    elif side == "under":
        objs = [(c, u) for c in range(C.n_objects) for u in D.hom(d, F.on_objects[c])]
    else:
        raise ValueError(f"side must be 'over' or 'under', got {side!r}")
    opos = {o: i for i, o in enumerate(objs)}
    by_c: dict[int, list[int]] = {}
    for i, (c, _) in enumerate(objs):
        by_c.setdefault(c, []).append(i)
    src, dst, hs = [], [], []
    for i, (c, u) in enumerate(objs):
        for h in C.out_of(c):
            Fh = F.on_morphisms[h]
            if side == "over":
                for j in by_c.get(C.dst[h], []):
                    if D.compose(objs[j][1], Fh) == u:
                        src.append(i)
                        dst.append(j)
                        hs.append(h)
            else:
                j = opos[(C.dst[h], D.compose(Fh, u))]
                src.append(i)
                dst.append(j)
                hs.append(h)
    mpos = {(a, b, h): k for k, (a, b, h) in enumerate(zip(src, dst, hs))}
    ids = [mpos[(i, i, C.identities[c])] for i, (c, _) in enumerate(objs)]
    return FiniteCategory(len(objs), src, dst, ids,
                          lambda g, f: mpos[(src[f], dst[g], C.compose(hs[g], hs[f]))],
                          objs, hs)


@dataclass
class InitialityReport:
    n: int
    per_object: list[dict]
    verdict: str

    def to_json(self) -> dict:
        return {"n": self.n, "verdict": self.verdict, "objects": self.per_object}


def is_n_initial(F: Functor, n: int, budget: int = 200_000) -> InitialityReport:
    """Quillen A test: every ``|C x_D D_{/j}|`` must be n-connected."""
    if n < -2:
        raise ValueError("n must be at least -2")
    F.check()
    cap = max(n, 0)
    rows = []
    for j in range(F.target.n_objects):
        cert = category_connectivity(comma_category(F, j, "over", check=False), cap, budget)
        status = cert.is_n_connected(n)
        row = {"object": F.target.object_labels[j], "status": status, "certificate": cert.to_json()}
        if status == "no":
            row["witness_level"] = cert.upper
        rows.append(row)
    statuses = {r["status"] for r in rows}
    verdict = "no" if "no" in statuses else ("unknown" if "unknown" in statuses else "yes")
    return InitialityReport(n, rows, verdict)
