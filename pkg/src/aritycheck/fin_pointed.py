"""Pointed finite sets <m> = {1..m} + {*} and the maps between them.

A map <a> -> <b> is stored as a table of length ``a`` with entries in
``0..b``; the entry 0 stands for the basepoint.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator


@dataclass(frozen=True)
class PointedSet:
    m: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"cardinality must be non-negative, got {self.m}")


@dataclass(frozen=True)
class PointedMap:
    src: int
    dst: int
    table: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "table", tuple(self.table))
        if self.src < 0 or self.dst < 0:
            raise ValueError("negative cardinality")
        if len(self.table) != self.src:
            raise ValueError(f"table has length {len(self.table)}, expected {self.src}")
        for v in self.table:
            if not 0 <= v <= self.dst:
                raise ValueError(f"entry {v} out of range 0..{self.dst}")

    def __call__(self, i: int) -> int:
        return 0 if i == 0 else self.table[i - 1]

    def fiber(self, j: int) -> tuple[int, ...]:
        """Non-basepoint preimages of ``j``, in increasing order."""
        return tuple(i for i, v in enumerate(self.table, 1) if v == j)

    def image(self) -> tuple[int, ...]:
        return tuple(sorted({v for v in self.table if v}))

    def to_json(self) -> dict:
        return {"src": self.src, "dst": self.dst, "table": list(self.table)}

    @classmethod
    def from_json(cls, data: dict) -> "PointedMap":
        return cls(int(data["src"]), int(data["dst"]), tuple(int(v) for v in data["table"]))


def identity(m: int) -> PointedMap:
    return PointedMap(m, m, tuple(range(1, m + 1)))


def fold(k: int) -> PointedMap:
    """The map <k> -> <1> sending everything to 1."""
    return PointedMap(k, 1, (1,) * k)


def delta(m: int, i: int) -> PointedMap:
    if not 1 <= i <= m:
        raise ValueError(f"index {i} out of range 1..{m}")
    return PointedMap(m, 1, tuple(1 if j == i else 0 for j in range(1, m + 1)))


def compose(g: PointedMap, f: PointedMap) -> PointedMap:
    """g after f."""
    if f.dst != g.src:
        raise ValueError(f"cannot compose: f lands in <{f.dst}>, g starts at <{g.src}>")
    gt = (0,) + g.table
    return PointedMap(f.src, g.dst, tuple(gt[v] for v in f.table))


def is_inert(f: PointedMap) -> bool:
    counts = [0] * (f.dst + 1)
    for v in f.table:
        counts[v] += 1
    return all(c == 1 for c in counts[1:])


def is_active(f: PointedMap) -> bool:
    return 0 not in f.table


def is_bijection(f: PointedMap) -> bool:
    return f.src == f.dst and is_active(f) and is_inert(f)


def is_maximally_active(f: PointedMap) -> bool:
    return is_active(f) and len(set(f.table)) == 1


def _require_active(f: PointedMap) -> None:
    if not is_active(f):
        raise ValueError(f"map {f.table} is not active")


def is_nonunital(f: PointedMap) -> bool:
    _require_active(f)
    return len(set(f.table)) == f.dst


def is_unitary(f: PointedMap) -> bool:
    """Active and injective; in Fin_* these are exactly the maps with the
    unique left lifting property against surjective active maps."""
    _require_active(f)
    return len(set(f.table)) == f.src


def factor_inert_active(f: PointedMap) -> tuple[PointedMap, PointedSet, PointedMap]:
    """Split ``f`` as active after inert, keeping surviving elements in order."""
    survivors = [i for i, v in enumerate(f.table, 1) if v]
    n = len(survivors)
    lam = [0] * f.src
    for pos, i in enumerate(survivors, 1):
        lam[i - 1] = pos
    alpha = tuple(f.table[i - 1] for i in survivors)
    return PointedMap(f.src, n, tuple(lam)), PointedSet(n), PointedMap(n, f.dst, alpha)


def factor_nonunital_unitary(f: PointedMap) -> tuple[PointedMap, PointedSet, PointedMap]:
    """Split an active ``f`` as an injection after a surjection onto its image."""
    _require_active(f)
    image = f.image()
    rank = {j: r for r, j in enumerate(image, 1)}
    n = len(image)
    nonu = PointedMap(f.src, n, tuple(rank[v] for v in f.table))
    return nonu, PointedSet(n), PointedMap(n, f.dst, image)


def all_maps(src: int, dst: int) -> Iterator[PointedMap]:
    for t in product(range(dst + 1), repeat=src):
        yield PointedMap(src, dst, t)


def active_maps(src: int, dst: int) -> Iterator[PointedMap]:
    for t in product(range(1, dst + 1), repeat=src):
        yield PointedMap(src, dst, t)


def inert_maps(src: int, dst: int) -> Iterator[PointedMap]:
    from itertools import permutations

    for chosen in permutations(range(1, src + 1), dst):
        t = [0] * src
        for j, i in enumerate(chosen, 1):
            t[i - 1] = j
        yield PointedMap(src, dst, tuple(t))


def surjections(src: int, dst: int) -> Iterator[PointedMap]:
    for f in active_maps(src, dst):
        if len(set(f.table)) == dst:
            yield f
