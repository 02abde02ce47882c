"""Integer homology of finite chain complexes and connectivity certificates."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .snf import rank_and_factors, is_divisibility_chain

UNKNOWN = "unknown"


@dataclass
class ChainComplex:
    """``sizes[d]`` cells in degree d; ``boundaries[d]`` holds the columns of
    the boundary map from degree d to degree d-1 (d >= 1).

    When ``complete`` is false the complex was cut off at its top degree and
    homology is only meaningful strictly below it.
    """
    sizes: list[int]
    boundaries: dict[int, list[dict[int, int]]]
    reduced: bool = True
    complete: bool = True

    @property
    def top(self) -> int:
        return len(self.sizes) - 1

    def boundary(self, d: int) -> list[dict[int, int]]:
        if d == 0:
            if not self.reduced:
                return [{} for _ in range(self.sizes[0])] if self.sizes else []
            return [{0: 1} for _ in range(self.sizes[0])] if self.sizes else []
        if d > self.top or d < 0:
            return []
        return self.boundaries.get(d, [{} for _ in range(self.sizes[d])])

    def size(self, d: int) -> int:
        if d == -1:
            return 1 if self.reduced else 0
        if 0 <= d <= self.top:
            return self.sizes[d]
        return 0

    def check_boundary_squared(self) -> bool:
        for d in range(0 if self.reduced else 1, self.top):
            lower = self.boundary(d)
            for col in self.boundary(d + 1):
                acc: dict[int, int] = {}
                for k, a in col.items():
                    for i, b in lower[k].items():
                        acc[i] = acc.get(i, 0) + a * b
                if any(acc.values()):
                    return False
        return True


@dataclass
class HomologyProfile:
    """Betti numbers and torsion coefficients per degree.

    ``through`` is the last degree that was computed; for a complete
    complex every degree above it is zero.
    """
    reduced: bool
    betti: dict[int, int]
    torsion: dict[int, list[int]]
    through: int
    complete: bool = True

    def betti_at(self, d: int) -> int:
        if d > self.through:
            if not self.complete:
                raise ValueError(f"degree {d} beyond computed range {self.through}")
            return 0
        return self.betti.get(d, 0)

    def torsion_at(self, d: int) -> list[int]:
        if d > self.through and not self.complete:
            raise ValueError(f"degree {d} beyond computed range {self.through}")
        return list(self.torsion.get(d, []))

    def is_zero_at(self, d: int) -> bool:
        return self.betti_at(d) == 0 and not self.torsion_at(d)

    def nonzero_degrees(self) -> list[int]:
        return [d for d in sorted(set(self.betti) | set(self.torsion))
                if self.betti.get(d, 0) or self.torsion.get(d)]

    def agrees_with(self, other: "HomologyProfile", through: Optional[int] = None) -> bool:
        if self.reduced != other.reduced:
            return False
        lo = -1 if self.reduced else 0
        if through is None:
            if not (self.complete and other.complete):
                through = min(self.through, other.through)
            else:
                through = max(self.through, other.through)
        for d in range(lo, through + 1):
            if self.betti_at(d) != other.betti_at(d) or self.torsion_at(d) != other.torsion_at(d):
                return False
        return True

    def to_json(self) -> dict:
        lo = -1 if self.reduced else 0
        return {
            "reduced": self.reduced,
            "complete": self.complete,
            "through": self.through,
            "degrees": {
                str(d): {"betti": self.betti.get(d, 0), "torsion": list(self.torsion.get(d, []))}
                for d in range(lo, self.through + 1)
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "HomologyProfile":
        betti = {int(d): v["betti"] for d, v in data["degrees"].items() if v["betti"]}
        torsion = {int(d): list(v["torsion"]) for d, v in data["degrees"].items() if v["torsion"]}
        return cls(bool(data["reduced"]), betti, torsion, int(data["through"]),
                   bool(data.get("complete", True)))


def homology(C: ChainComplex, through: Optional[int] = None) -> HomologyProfile:
    """Homology in degrees up to ``through`` (default: all meaningful degrees)."""
    last = C.top if C.complete else C.top - 1
    if through is not None:
        last = min(last, through)
    lo = -1 if C.reduced else 0
    ranks: dict[int, int] = {}
    tors: dict[int, list[int]] = {}

    def rank(d: int) -> int:
        if d not in ranks:
            cols = C.boundary(d) if d >= 0 else []
            nrows = C.size(d - 1)
            if not cols or nrows == 0:
                ranks[d], tors[d] = 0, []
            else:
                ranks[d], tors[d] = rank_and_factors(cols, nrows)
        return ranks[d]

    betti: dict[int, int] = {}
    torsion: dict[int, list[int]] = {}
    for d in range(lo, last + 1):
        b = C.size(d) - rank(d) - rank(d + 1)
        if b:
            betti[d] = b
        if tors[d + 1]:
            torsion[d] = tors[d + 1]
    complete = C.complete and last == C.top
    return HomologyProfile(C.reduced, betti, torsion, last, complete)


# --------------------------------------------------------------------------
# fundamental group


def spanning_forest(n: int, edges: Sequence[tuple[int, int]]) -> tuple[list[int], set[int]]:
    """Component label per vertex and the set of tree edge indices."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for k, (u, v) in enumerate(edges):
        if u != v:
            adj[u].append((v, k))
            adj[v].append((u, k))
    comp = [-1] * n
    tree: set[int] = set()
    c = 0
    for s in range(n):
        if comp[s] >= 0:
            continue
        comp[s] = c
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v, k in adj[u]:
                if comp[v] < 0:
                    comp[v] = c
                    tree.add(k)
                    queue.append(v)
        c += 1
    return comp, tree


def _free_reduce(word: list[int]) -> list[int]:
    out: list[int] = []
    for x in word:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    while len(out) > 1 and out[0] == -out[-1]:
        out = out[1:-1]
    return out


@dataclass
class Presentation:
    generators: list[int]
    relators: list[list[int]]

    def is_trivial(self) -> bool:
        return not self.generators


def edge_path_presentation(n_vertices: int, edges: Sequence[tuple[int, int]],
                           triangles: Sequence[tuple[Optional[int], Optional[int], Optional[int]]],
                           ) -> Presentation:
    """Edge-path group presentation of a connected 2-complex.

    Generator ``k + 1`` is edge k; a triangle ``(e01, e12, e02)`` gives the
    relator e01 * e12 * e02^-1, with ``None`` marking a degenerate edge.
    Edges of a spanning tree are set to the identity.
    """
    _, tree = spanning_forest(n_vertices, edges)
    gens = [k + 1 for k in range(len(edges)) if k not in tree]
    rels = []
    for a, b, c in triangles:
        w = []
        if a is not None and a not in tree:
            w.append(a + 1)
        if b is not None and b not in tree:
            w.append(b + 1)
        if c is not None and c not in tree:
            w.append(-(c + 1))
        rels.append(w)
    return Presentation(gens, rels)


def simplify_presentation(P: Presentation, budget: int = 200_000) -> Presentation:
    """Greedy Tietze rewriting.

    Short relators are absorbed by a union-find over generators; remaining
    relators in which some generator occurs once are used to eliminate it.
    Stops when nothing changes or the rewriting budget (total letters
    processed) is spent.
    """
    parent: dict[int, tuple[int, int]] = {g: (g, 1) for g in P.generators}
    trivial: set[int] = set()

    def find(g: int) -> tuple[int, int]:
        path = []
        sign = 1
        x = g
        while parent[x][0] != x:
            path.append(x)
            y, s = parent[x]
            sign *= s
            x = y
        # path compression
        acc = sign
        for p in path:
            s_p = parent[p][1]
            parent[p] = (x, acc)
            acc *= s_p
        return x, sign

    def subst(word: list[int]) -> list[int]:
        out = []
        for letter in word:
            g = abs(letter)
            if g not in parent:
                continue
            root, s = find(g)
            if root in trivial:
                continue
            out.append(root * s * (1 if letter > 0 else -1))
        return _free_reduce(out)

    rels = [list(r) for r in P.relators]
    spent = 0
    changed = True
    while changed and spent <= budget:
        changed = False
        keep = []
        for r in rels:
            spent += len(r)
            w = subst(r)
            if not w:
                changed = changed or bool(r)
                continue
            if len(w) == 1:
                trivial.add(abs(w[0]))
                changed = True
                continue
            if len(w) == 2 and abs(w[0]) != abs(w[1]):
                a, b = w
                ra, rb = abs(a), abs(b)
                sa = 1 if a > 0 else -1
                sb = 1 if b > 0 else -1
                # ra^sa * rb^sb = 1  =>  ra = rb^(-sb*sa)
                parent[ra] = (rb, -sb * sa)
                changed = True
                continue
            keep.append(w)
        rels = keep
        if not changed:
            changed = _eliminate_once(rels, parent, trivial, find)
            if changed:
                rels = [subst(r) for r in rels]
                rels = [r for r in rels if r]
    gens = sorted({g for g in P.generators if find(g)[0] == g and g not in trivial})
    live = set(gens)
    rels = [r for r in (subst(r) for r in rels) if r]
    return Presentation([g for g in gens if g in live], rels)


def _eliminate_once(rels, parent, trivial, find) -> bool:
    """Use a relator in which some generator g occurs once to solve for g,
    substitute the solution into the other relators and drop g.

    Relators passed in only mention union-find roots, so dropping g is safe.
    """
    for idx, w in enumerate(rels):
        counts: dict[int, int] = {}
        for x in w:
            counts[abs(x)] = counts.get(abs(x), 0) + 1
        singles = [g for g, c in counts.items() if c == 1]
        if not singles:
            continue
        g = singles[0]
        pos = next(i for i, x in enumerate(w) if abs(x) == g)
        e = 1 if w[pos] > 0 else -1
        # rotate so that g^e is first: g^e * rest = 1  =>  g = rest^-e
        rot = w[pos:] + w[:pos]
        rest = rot[1:]
        repl = [-x for x in reversed(rest)] if e == 1 else list(rest)
        repl_inv = [-x for x in reversed(repl)]
        new_rels = []
        for j, r in enumerate(rels):
            if j == idx:
                continue
            nr = []
            for x in r:
                if abs(x) == g:
                    nr.extend(repl if x > 0 else repl_inv)
                else:
                    nr.append(x)
            new_rels.append(_free_reduce(nr))
        rels[:] = new_rels
        trivial.add(g)  # removed generator; its value lives in the rewritten relators
        return True
    return False


def abelianization_rank_and_torsion(P: Presentation) -> tuple[int, list[int]]:
    idx = {g: i for i, g in enumerate(P.generators)}
    cols = []
    for r in P.relators:
        col: dict[int, int] = {}
        for x in r:
            i = idx.get(abs(x))
            if i is None:
                continue
            col[i] = col.get(i, 0) + (1 if x > 0 else -1)
        cols.append({i: v for i, v in col.items() if v})
    if not P.generators:
        return 0, []
    rank, tors = rank_and_factors(cols, len(P.generators))
    return len(P.generators) - rank, tors


def pi1_status(P: Presentation, budget: int = 200_000) -> tuple[str, Presentation]:
    S = simplify_presentation(P, budget)
    if S.is_trivial():
        return "yes", S
    free_rank, tors = abelianization_rank_and_torsion(S)
    if free_rank or tors:
        return "no", S
    return UNKNOWN, S


# --------------------------------------------------------------------------
# connectivity


@dataclass
class ConnectivityCertificate:
    """Certified bounds on the connectivity of a space.

    ``level`` is a certified lower bound; ``at_least`` marks that nothing
    obstructing a higher value was found below ``cap``.  ``upper`` is a
    certified upper bound when one is known.
    """
    level: int
    cap: int
    at_least: bool
    upper: Optional[int]
    nonempty: bool
    connected: bool
    homology_vanishes_through: int
    pi1: str
    profile: Optional[HomologyProfile] = None
    notes: list[str] = field(default_factory=list)

    @property
    def exact(self) -> bool:
        return self.upper is not None and self.upper == self.level

    @property
    def fully_certified(self) -> bool:
        """True when no status needed to settle ``level`` is unknown."""
        return self.exact or self.at_least

    def is_n_connected(self, n: int) -> str:
        if n <= self.level:
            return "yes"
        if self.upper is not None and n > self.upper:
            return "no"
        return UNKNOWN

    def to_json(self) -> dict:
        return {
            "level": self.level,
            "at_least": self.at_least,
            "cap": self.cap,
            "upper": self.upper,
            "nonempty": self.nonempty,
            "connected": self.connected,
            "homology_vanishes_through": self.homology_vanishes_through,
            "pi1": self.pi1,
            "notes": list(self.notes),
        }


def certify(nonempty: bool, n_components: int, profile: Optional[HomologyProfile],
            pi1: str, cap: int, contractible: bool = False) -> ConnectivityCertificate:
    """Combine the raw invariants into a certificate (Hurewicz in the
    simply connected range)."""
    if not nonempty:
        return ConnectivityCertificate(-2, cap, False, -2, False, False, -2, "n/a", profile)
    if n_components > 1:
        return ConnectivityCertificate(-1, cap, False, -1, True, False, -1, "n/a", profile)
    if contractible:
        return ConnectivityCertificate(cap, cap, True, None, True, True, cap, "yes", profile,
                                       ["cone point: contractible"])
    # first degree >= 1 with nonzero reduced homology, if within cap
    vanish = 0
    first_bad = None
    for d in range(1, cap + 1):
        if profile.is_zero_at(d):
            vanish = d
        else:
            first_bad = d
            break
    if cap < 1:
        return ConnectivityCertificate(0, cap, True, None, True, True, 0, pi1, profile)
    if pi1 == "yes":
        if first_bad is None:
            return ConnectivityCertificate(cap, cap, True, None, True, True, vanish, pi1, profile)
        return ConnectivityCertificate(first_bad - 1, cap, False, first_bad - 1, True, True,
                                       vanish, pi1, profile)
    if pi1 == "no":
        return ConnectivityCertificate(0, cap, False, 0, True, True, vanish, pi1, profile)
    upper = None if first_bad is None else first_bad - 1
    return ConnectivityCertificate(0, cap, False, upper, True, True, vanish, pi1, profile,
                                   ["pi1 undecided: homological bound only"])


# --------------------------------------------------------------------------
# simplicial complexes


@dataclass
class SimplicialComplex:
    """A finite simplicial complex on vertices ``0..n_vertices-1``.

    ``simplices[d]`` lists the d-simplices as strictly increasing tuples.
    If ``complete`` is false, only the skeleton up to ``top`` is stored.
    """
    n_vertices: int
    simplices: list[list[tuple[int, ...]]]
    complete: bool = True

    def __post_init__(self):
        self._index = [{s: i for i, s in enumerate(layer)} for layer in self.simplices]
        for d, (layer, idx) in enumerate(zip(self.simplices, self._index)):
            if len(idx) != len(layer):
                raise ValueError(f"duplicate simplices in degree {d}")
            for s in layer:
                if len(s) != d + 1 or any(a >= b for a, b in zip(s, s[1:])):
                    raise ValueError(f"malformed simplex {s}")
                if s[0] < 0 or s[-1] >= self.n_vertices:
                    raise ValueError(f"simplex {s} has a vertex out of range")
                if d and any(s[:i] + s[i + 1:] not in self._index[d - 1] for i in range(d + 1)):
                    raise ValueError(f"simplex {s} is missing a face")
        if self.simplices and len(self.simplices[0]) != self.n_vertices:
            raise ValueError("every vertex must appear as a 0-simplex")

    @classmethod
    def from_facets(cls, n_vertices: int, facets, max_dim: Optional[int] = None) -> "SimplicialComplex":
        from itertools import combinations

        found: list[set] = []
        top = -1
        for f in facets:
            f = tuple(sorted(set(f)))
            top = max(top, len(f) - 1)
            hi = len(f) if max_dim is None else min(len(f), max_dim + 1)
            for r in range(1, hi + 1):
                while len(found) < r:
                    found.append(set())
                found[r - 1].update(combinations(f, r))
        if n_vertices:
            if not found:
                found.append(set())
            found[0].update((v,) for v in range(n_vertices))
        complete = max_dim is None or top <= max_dim
        return cls(n_vertices, [sorted(layer) for layer in found], complete)

    @property
    def top(self) -> int:
        return len(self.simplices) - 1

    def index(self, s: tuple[int, ...]) -> int:
        return self._index[len(s) - 1][s]

    def count(self, d: int) -> int:
        return len(self.simplices[d]) if 0 <= d <= self.top else 0

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * len(layer) for d, layer in enumerate(self.simplices))

    def to_json(self) -> dict:
        return {"vertices": self.n_vertices, "complete": self.complete,
                "simplices": [[list(s) for s in layer] for layer in self.simplices]}

    @classmethod
    def from_json(cls, data: dict) -> "SimplicialComplex":
        return cls(int(data["vertices"]),
                   [[tuple(s) for s in layer] for layer in data["simplices"]],
                   bool(data.get("complete", True)))


def boundary_chain_complex(K: SimplicialComplex, reduced: bool = True) -> ChainComplex:
    bounds: dict[int, list[dict[int, int]]] = {}
    for d in range(1, K.top + 1):
        lower = K._index[d - 1]
        cols = []
        for s in K.simplices[d]:
            col = {}
            for i in range(d + 1):
                col[lower[s[:i] + s[i + 1:]]] = -1 if i % 2 else 1
            cols.append(col)
        bounds[d] = cols
    return ChainComplex([len(layer) for layer in K.simplices], bounds, reduced, K.complete)


def _complex_pi1(K: SimplicialComplex, budget: int) -> str:
    edges = K.simplices[1] if K.top >= 1 else []
    if K.top < 2:
        tris = []
    else:
        e = K._index[1]
        tris = [(e[(a, b)], e[(b, c)], e[(a, c)]) for a, b, c in K.simplices[2]]
    P = edge_path_presentation(K.n_vertices, edges, tris)
    return pi1_status(P, budget)[0]


def _cone_vertex(K: SimplicialComplex) -> Optional[int]:
    if not K.complete or K.n_vertices == 0:
        return None
    if K.top == 0:
        return 0 if K.n_vertices == 1 else None
    deg = [0] * K.n_vertices
    for a, b in K.simplices[1]:
        deg[a] += 1
        deg[b] += 1
    for v in range(K.n_vertices):
        if deg[v] != K.n_vertices - 1:
            continue
        ok = True
        for d in range(1, K.top + 1):
            idx = K._index[d]
            for s in K.simplices[d - 1]:
                if v not in s and tuple(sorted(s + (v,))) not in idx:
                    ok = False
                    break
            if not ok:
                break
        if ok and all(v in s for s in K.simplices[K.top]):
            return v
    return None


def connectivity(K: SimplicialComplex, cap: int, budget: int = 200_000) -> ConnectivityCertificate:
    if cap < 0:
        raise ValueError("cap must be non-negative")
    if K.n_vertices == 0:
        return certify(False, 0, None, "n/a", cap)
    comp, _ = spanning_forest(K.n_vertices, K.simplices[1] if K.top >= 1 else [])
    n_comp = max(comp) + 1
    if n_comp > 1:
        return certify(True, n_comp, None, "n/a", cap)
    if _cone_vertex(K) is not None:
        return certify(True, 1, None, "yes", cap, contractible=True)
    if not K.complete and K.top < cap + 1:
        raise ValueError(f"need simplices up to dimension {cap + 1}, have {K.top}")
    profile = homology(boundary_chain_complex(K, True), through=cap)
    pi1 = _complex_pi1(K, budget) if cap >= 1 else "n/a"
    return certify(True, 1, profile, pi1, cap)
