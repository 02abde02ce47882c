"""Discrete symmetric operads and their partition categories."""
from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import permutations, product
from typing import Hashable, Iterator, Optional, Sequence

from .fin_pointed import PointedMap

Op = Hashable
Color = Hashable


class ArityCapExceeded(ValueError):
    pass


class OperadAxiomError(ValueError):
    pass


def compose_perm(p: Sequence[int], q: Sequence[int]) -> tuple[int, ...]:
    """Relabelling by ``p`` then by ``q``: new input s is old input p[q[s]]."""
    return tuple(p[s] for s in q)


def invert_perm(p: Sequence[int]) -> tuple[int, ...]:
    inv = [0] * len(p)
    for t, s in enumerate(p):
        inv[s] = t
    return tuple(inv)


class DiscreteOperad:
    """Set-valued symmetric operad truncated at ``arity_cap``.

    ``act(op, perm)`` relabels inputs: input t of the result is input
    ``perm[t]`` of ``op``.
    """
    name = "operad"

    def __init__(self, arity_cap: int):
        if arity_cap < 1:
            raise ValueError("arity cap must be at least 1")
        self.arity_cap = arity_cap

    colors: tuple = ("*",)

    def ops(self, inputs: tuple, output: Color) -> list[Op]:
        raise NotImplementedError

    def gamma(self, op: Op, inner: Sequence[Op]) -> Op:
        raise NotImplementedError

    def act(self, op: Op, perm: Sequence[int]) -> Op:
        raise NotImplementedError

    def unit(self, color: Color) -> Op:
        raise NotImplementedError

    def arity(self, op: Op) -> int:
        raise NotImplementedError

    def has_op(self, op: Op, inputs: tuple, output: Color) -> bool:
        return op in self.ops(inputs, output)

    def solve_outer(self, target: Op, inner: Sequence[Op], inputs: tuple, output: Color) -> Iterator[Op]:
        """All ``u`` in Mul(inputs; output) with ``gamma(u, inner) == target``."""
        for u in self.ops(inputs, output):
            if self.gamma(u, inner) == target:
                yield u

    def signatures(self, k: int) -> Iterator[tuple[tuple, Color]]:
        for inputs in product(self.colors, repeat=k):
            for c in self.colors:
                if self.ops(inputs, c):
                    yield inputs, c

    def _check_arity(self, k: int) -> None:
        if k > self.arity_cap:
            raise ArityCapExceeded(f"arity {k} exceeds cap {self.arity_cap}")


class EInfinity(DiscreteOperad):
    """One operation of each arity; the operation of arity k is the int k."""
    name = "e_infinity"

    def ops(self, inputs, output):
        if output != "*" or any(c != "*" for c in inputs) or len(inputs) > self.arity_cap:
            return []
        return [len(inputs)]

    def gamma(self, op, inner):
        if op != len(inner):
            raise ValueError(f"operation of arity {op} given {len(inner)} inputs")
        k = sum(inner)
        self._check_arity(k)
        return k

    def act(self, op, perm):
        return op

    def unit(self, color):
        return 1

    def arity(self, op):
        return op

    def solve_outer(self, target, inner, inputs, output):
        if sum(inner) == target and len(inputs) <= self.arity_cap:
            yield len(inputs)


class EOne(DiscreteOperad):
    """Operations of arity k are linear orders of the inputs, stored as the
    tuple of input indices in increasing position."""
    name = "e_one"

    def ops(self, inputs, output):
        if output != "*" or any(c != "*" for c in inputs) or len(inputs) > self.arity_cap:
            return []
        return list(permutations(range(len(inputs))))

    def gamma(self, op, inner):
        if len(op) != len(inner):
            raise ValueError(f"operation of arity {len(op)} given {len(inner)} inputs")
        off = [0]
        for v in inner:
            off.append(off[-1] + len(v))
        self._check_arity(off[-1])
        return tuple(off[i] + q for i in op for q in inner[i])

    def act(self, op, perm):
        inv = invert_perm(perm)
        return tuple(inv[i] for i in op)

    def unit(self, color):
        return (0,)

    def has_op(self, op, inputs, output):
        return (output == "*" and len(inputs) <= self.arity_cap and all(c == "*" for c in inputs)
                and isinstance(op, tuple) and sorted(op) == list(range(len(inputs))))

    def arity(self, op):
        return len(op)

    def solve_outer(self, target, inner, inputs, output):
        m = len(inner)
        if len(inputs) != m or len(target) > self.arity_cap:
            return
        off = [0]
        for v in inner:
            off.append(off[-1] + len(v))
        if off[-1] != len(target):
            return
        owner = {}
        for i, v in enumerate(inner):
            for q in range(len(v)):
                owner[off[i] + q] = i
        # read off the block order; each nonempty block must be a contiguous run
        order = []
        pos = 0
        while pos < len(target):
            i = owner[target[pos]]
            n = len(inner[i])
            if tuple(target[pos:pos + n]) != tuple(off[i] + q for q in inner[i]):
                return
            order.append(i)
            pos += n
        units = [i for i in range(m) if not inner[i]]
        # empty blocks may sit anywhere
        for slots in _interleavings(len(order), len(units)):
            word, a, b = [], 0, 0
            for s in slots:
                if s:
                    word.append(units[b])
                    b += 1
                else:
                    word.append(order[a])
                    a += 1
            for perm in permutations(units):
                w = tuple(perm[units.index(x)] if x in units else x for x in word)
                yield w


def _interleavings(a: int, b: int) -> Iterator[tuple[int, ...]]:
    """0/1 sequences with ``a`` zeros and ``b`` ones; ones are distinguishable
    later, so only their positions are produced here."""
    from itertools import combinations

    n = a + b
    for ones in combinations(range(n), b):
        s = [0] * n
        for i in ones:
            s[i] = 1
        yield tuple(s)


class TableOperad(DiscreteOperad):
    """A finite operad given by explicit tables (see ``from_json``)."""
    name = "table"

    def __init__(self, colors, signature: dict, composition: dict, units: dict, symmetry: dict,
                 arity_cap: Optional[int] = None):
        self.colors = tuple(colors)
        self.signature = dict(signature)  # op -> (inputs, output)
        self._by_sig: dict[tuple, list] = {}
        for op, (ins, out) in self.signature.items():
            self._by_sig.setdefault((tuple(ins), out), []).append(op)
        cap = max((len(ins) for ins, _ in self.signature.values()), default=1)
        super().__init__(arity_cap or max(cap, 1))
        self.composition = dict(composition)  # (op, tuple(inner)) -> op
        self.units = dict(units)
        self.symmetry = dict(symmetry)  # (op, perm) -> op

    def ops(self, inputs, output):
        return list(self._by_sig.get((tuple(inputs), output), []))

    def arity(self, op):
        return len(self.signature[op][0])

    def gamma(self, op, inner):
        key = (op, tuple(inner))
        if key not in self.composition:
            k = sum(self.arity(v) for v in inner)
            self._check_arity(k)
            raise ValueError(f"composition of {op} with {tuple(inner)} is not tabulated")
        return self.composition[key]

    def act(self, op, perm):
        perm = tuple(perm)
        if perm == tuple(range(len(perm))):
            return op
        return self.symmetry[(op, perm)]

    def unit(self, color):
        return self.units[color]

    def to_json(self) -> dict:
        by_arity: dict[str, list] = {}
        for (ins, out), ops in self._by_sig.items():
            by_arity.setdefault(str(len(ins)), []).append(
                {"inputs": list(ins), "output": out, "elements": list(ops)})
        return {
            "colors": list(self.colors),
            "operations": by_arity,
            "composition": [{"outer": o, "inner": list(i), "result": r}
                            for (o, i), r in self.composition.items()],
            "units": [[c, u] for c, u in self.units.items()],
            "symmetry": [{"op": o, "perm": list(p), "result": r} for (o, p), r in self.symmetry.items()],
        }

    @classmethod
    def from_json(cls, data: dict, validate: bool = True) -> "TableOperad":
        colors = list(data["colors"])
        signature = {}
        for k, entries in data["operations"].items():
            for e in entries:
                ins = tuple(e["inputs"])
                if len(ins) != int(k):
                    raise ValueError(f"signature {ins} listed under arity {k}")
                for op in e["elements"]:
                    if op in signature:
                        raise ValueError(f"operation id {op!r} used twice")
                    signature[op] = (ins, e["output"])
        composition = {(c["outer"], tuple(c["inner"])): c["result"] for c in data.get("composition", [])}
        units = data["units"]
        units = dict(units.items()) if isinstance(units, dict) else {c: u for c, u in units}
        symmetry = {(s["op"], tuple(s["perm"])): s["result"] for s in data.get("symmetry", [])}
        O = cls(colors, signature, composition, units, symmetry)
        if validate:
            check_axioms(O)
        return O


def builtin(name: str, arity_cap: int) -> DiscreteOperad:
    key = name.lower().replace("-", "_")
    if key in ("e_infinity", "einfinity", "e_inf", "comm"):
        return EInfinity(arity_cap)
    if key in ("e_one", "e1", "e_1", "assoc"):
        return EOne(arity_cap)
    raise ValueError(f"unknown builtin operad {name!r}")


def load_operad(source: str, arity_cap: int = 6) -> DiscreteOperad:
    """A builtin name or the path of an operad JSON file."""
    try:
        return builtin(source, arity_cap)
    except ValueError:
        pass
    with open(spec) as fh:
        return TableOperad.from_json(json.load(fh))


def _all_ops(O: DiscreteOperad, k: int) -> list[tuple[tuple, Color, Op]]:
    return [(ins, c, op) for ins, c in O.signatures(k) for op in O.ops(ins, c)]


def check_axioms(O: DiscreteOperad, cap: Optional[int] = None) -> None:
    """Exhaustive unit, associativity and equivariance checks up to ``cap``."""
    cap = O.arity_cap if cap is None else cap
    by_out: dict[Color, list[tuple[tuple, Op]]] = {}
    for k in range(cap + 1):
        for ins, c, op in _all_ops(O, k):
            by_out.setdefault(c, []).append((ins, op))

    def fail(msg):
        raise OperadAxiomError(msg)

    for c in O.colors:
        u = O.unit(c)
        if u not in O.ops((c,), c):
            fail(f"unit of {c!r} has the wrong signature")
    for k in range(cap + 1):
        for ins, c, op in _all_ops(O, k):
            if O.gamma(O.unit(c), [op]) != op:
                fail(f"left unit law fails for {op!r}")
            if O.gamma(op, [O.unit(x) for x in ins]) != op:
                fail(f"right unit law fails for {op!r}")
            for p in permutations(range(k)):
                q = O.act(op, p)
                if q not in O.ops(tuple(ins[s] for s in p), c):
                    fail(f"{op!r} acted on by {p} has the wrong signature")
                for r in permutations(range(k)):
                    if O.act(q, r) != O.act(op, compose_perm(p, r)):
                        fail(f"action is not associative on {op!r}")

    def inner_choices(ins, budget):
        """Tuples of operations feeding ``ins`` with total arity <= budget."""
        if not ins:
            yield ()
            return
        for sig, v in by_out.get(ins[0], []):
            a = len(sig)
            if a <= budget:
                for rest in inner_choices(ins[1:], budget - a):
                    yield (v,) + rest

    for k in range(cap + 1):
        for ins, c, op in _all_ops(O, k):
            for inner in inner_choices(ins, cap):
                g = O.gamma(op, inner)
                ar = [O.arity(v) for v in inner]
                # equivariance in the outer operation
                for p in permutations(range(k)):
                    lhs = O.gamma(O.act(op, p), [inner[s] for s in p])
                    off = [0]
                    for a in ar:
                        off.append(off[-1] + a)
                    block = tuple(off[s] + t for s in p for t in range(ar[s]))
                    if lhs != O.act(g, block):
                        fail(f"outer equivariance fails for {op!r}")
                # equivariance in the inner operations (one at a time)
                off = [0]
                for a in ar:
                    off.append(off[-1] + a)
                for i, v in enumerate(inner):
                    for p in permutations(range(ar[i])):
                        new_inner = list(inner)
                        new_inner[i] = O.act(v, p)
                        perm = list(range(off[-1]))
                        for t in range(ar[i]):
                            perm[off[i] + t] = off[i] + p[t]
                        if O.gamma(op, new_inner) != O.act(g, perm):
                            fail(f"inner equivariance fails for {op!r}")
                # associativity
                inner_ins = [_inputs_of(O, v, by_out) for v in inner]
                flat = tuple(x for s in inner_ins for x in s)
                for deep in inner_choices(flat, cap):
                    lhs = O.gamma(g, deep)
                    pos = 0
                    mids = []
                    for a, v in zip(ar, inner):
                        mids.append(O.gamma(v, deep[pos:pos + a]))
                        pos += a
                    if lhs != O.gamma(op, mids):
                        fail(f"associativity fails for {op!r}")


def _inputs_of(O: DiscreteOperad, v: Op, by_out) -> tuple:
    if isinstance(O, TableOperad):
        return O.signature[v][0]
    return ("*",) * O.arity(v)


# --------------------------------------------------------------------------
# morphisms of the operator category


@dataclass(frozen=True)
class OperatorMorphism:
    """A morphism ``src -> dst`` of color tuples over a pointed map, with one
    operation per target index whose inputs are the fiber in increasing order."""
    src: tuple
    dst: tuple
    shape: PointedMap
    ops: tuple

    def fiber_colors(self, j: int) -> tuple:
        return tuple(self.src[i - 1] for i in self.shape.fiber(j))

    @property
    def is_active(self) -> bool:
        return 0 not in self.shape.table

    def to_json(self) -> dict:
        return {"src": list(self.src), "dst": list(self.dst), "shape": list(self.shape.table),
                "ops": [_op_json(o) for o in self.ops]}


ActiveMorphism = OperatorMorphism


def _op_json(op):
    return list(op) if isinstance(op, tuple) else op


def make_morphism(O: DiscreteOperad, src, dst, table, ops, active: bool = True) -> OperatorMorphism:
    src, dst = tuple(src), tuple(dst)
    shape = PointedMap(len(src), len(dst), tuple(table))
    f = OperatorMorphism(src, dst, shape, tuple(ops))
    if active and not f.is_active:
        raise ValueError(f"shape {shape.table} is not active")
    if len(f.ops) != len(dst):
        raise ValueError("need one operation per target index")
    for j in range(1, len(dst) + 1):
        if not O.has_op(f.ops[j - 1], f.fiber_colors(j), dst[j - 1]):
            raise ValueError(f"operation {f.ops[j - 1]!r} does not fit fiber {j}")
    return f


def identity_morphism(O: DiscreteOperad, colors) -> OperatorMorphism:
    colors = tuple(colors)
    n = len(colors)
    return OperatorMorphism(colors, colors, PointedMap(n, n, tuple(range(1, n + 1))),
                            tuple(O.unit(c) for c in colors))


def compose_active(O: DiscreteOperad, g: OperatorMorphism, f: OperatorMorphism) -> OperatorMorphism:
    """g after f; works for arbitrary (not only active) shapes."""
    if f.dst != g.src:
        raise ValueError(f"cannot compose: {f.dst} != {g.src}")
    ftab, gtab = f.shape.table, g.shape.table
    ffib: list[list[int]] = [[] for _ in range(len(f.dst) + 1)]
    for i, v in enumerate(ftab, 1):
        ffib[v].append(i)
    gfib: list[list[int]] = [[] for _ in range(len(g.dst) + 1)]
    for j, v in enumerate(gtab, 1):
        gfib[v].append(j)
    ops = []
    for k in range(1, len(g.dst) + 1):
        js = gfib[k]
        L = [i for j in js for i in ffib[j]]
        op = O.gamma(g.ops[k - 1], [f.ops[j - 1] for j in js])
        if any(a > b for a, b in zip(L, L[1:])):
            srt = sorted(L)
            pos = {i: t for t, i in enumerate(L)}
            op = O.act(op, [pos[i] for i in srt])
        ops.append(op)
    shape = PointedMap(f.shape.src, g.shape.dst, tuple(0 if v == 0 else gtab[v - 1] for v in ftab))
    return OperatorMorphism(f.src, g.dst, shape, tuple(ops))


def decompose_active(O: DiscreteOperad, f: OperatorMorphism) -> list[OperatorMorphism]:
    """Components over each target color: the fiber tuple mapped to one color."""
    out = []
    for j in range(1, len(f.dst) + 1):
        cols = f.fiber_colors(j)
        out.append(OperatorMorphism(cols, (f.dst[j - 1],), PointedMap(len(cols), 1, (1,) * len(cols)),
                                    (f.ops[j - 1],)))
    return out


def oplus(components: Sequence[OperatorMorphism], shape: PointedMap) -> OperatorMorphism:
    """Reassemble components along ``shape``; component j supplies fiber j."""
    if len(components) != shape.dst:
        raise ValueError("one component per target index is required")
    src = [None] * shape.src
    for j, c in enumerate(components, 1):
        fib = shape.fiber(j)
        if len(fib) != len(c.src) or len(c.dst) != 1:
            raise ValueError(f"component {j} does not match its fiber")
        for i, col in zip(fib, c.src):
            src[i - 1] = col
    if any(c is None for c in src):
        raise ValueError("shape is not active")
    return OperatorMorphism(tuple(src), tuple(c.dst[0] for c in components), shape,
                            tuple(c.ops[0] for c in components))


def is_maximally_active(f: OperatorMorphism) -> bool:
    return f.is_active and len(set(f.shape.table)) == 1


def is_nonunital(f: OperatorMorphism) -> bool:
    return f.is_active and len(set(f.shape.table)) == len(f.dst)


def nonunital_reduction(O: DiscreteOperad, mu: OperatorMorphism) -> OperatorMorphism:
    if not is_maximally_active(mu):
        raise ValueError("nonunital reduction needs a maximally active morphism")
    i = mu.shape.table[0]
    return decompose_active(O, mu)[i - 1]


def multimorphism(O: DiscreteOperad, op: Op, inputs=None, output="*") -> OperatorMorphism:
    k = O.arity(op)
    inputs = ("*",) * k if inputs is None else tuple(inputs)
    return make_morphism(O, inputs, (output,), (1,) * k, (op,))


# --------------------------------------------------------------------------
# factorization categories


@dataclass(frozen=True)
class Factorization:
    """An object of Fact^{<|x|}: ``mu = beta . alpha`` through ``y``."""
    alpha: OperatorMorphism
    beta: OperatorMorphism

    @property
    def y(self) -> tuple:
        return self.alpha.dst

    def to_json(self) -> dict:
        return {"y": list(self.y), "alpha": self.alpha.to_json(), "beta": self.beta.to_json()}


def _growth_tables(k: int, n: int, rmin: int, rmax: int) -> Iterator[tuple[tuple[int, ...], int]]:
    """Tables ``<k> -> <n>`` whose image is {1..r}, labelled in order of first
    occurrence; indices r+1..n are left for units."""
    def rec(prefix, r):
        if len(prefix) == k:
            if rmin <= r:
                yield tuple(prefix), r
            return
        if r + (k - len(prefix)) < rmin:
            return
        for v in range(1, min(r + 1, rmax) + 1):
            prefix.append(v)
            yield from rec(prefix, max(r, v))
            prefix.pop()

    yield from rec([], 0)


def _reorder_op(O: DiscreteOperad, op: Op, old: Sequence[int], new_order: Sequence[int]) -> Op:
    """``op`` has inputs listed by ``old``; return the same operation with
    inputs listed by ``new_order`` (a rearrangement of ``old``)."""
    if list(old) == list(new_order):
        return op
    pos = {v: t for t, v in enumerate(old)}
    return O.act(op, [pos[v] for v in new_order])


def _solve_fiberwise(O: DiscreteOperad, first: OperatorMorphism, total: OperatorMorphism,
                     table: Sequence[int], colors: tuple) -> Iterator[OperatorMorphism]:
    """Second legs ``g`` with the given shape ``table`` and ``g . first == total``."""
    n_out = len(total.dst)
    gfib: list[list[int]] = [[] for _ in range(n_out + 1)]
    for j, v in enumerate(table, 1):
        gfib[v].append(j)
    ffib: list[list[int]] = [[] for _ in range(len(first.dst) + 1)]
    for i, v in enumerate(first.shape.table, 1):
        ffib[v].append(i)
    choices = []
    for t in range(1, n_out + 1):
        js = gfib[t]
        L = [i for j in js for i in ffib[j]]
        srt = sorted(L)
        target = _reorder_op(O, total.ops[t - 1], srt, L)
        sols = list(O.solve_outer(target, [first.ops[j - 1] for j in js],
                                  tuple(colors[j - 1] for j in js), total.dst[t - 1]))
        if not sols:
            return
        choices.append(sols)
    shape = PointedMap(len(colors), n_out, tuple(table))
    for ops in product(*choices):
        yield OperatorMorphism(tuple(colors), total.dst, shape, ops)


def _relabel(O: DiscreteOperad, f: OperatorMorphism, sigma: Sequence[int], side: str) -> OperatorMorphism:
    """Transport ``f`` along the bijection ``j -> sigma[j-1]`` applied to its
    target (side='dst') or source (side='src')."""
    if side == "dst":
        dst = [None] * len(f.dst)
        ops = [None] * len(f.dst)
        for j, s in enumerate(sigma, 1):
            dst[s - 1] = f.dst[j - 1]
            ops[s - 1] = f.ops[j - 1]
        table = tuple(0 if v == 0 else sigma[v - 1] for v in f.shape.table)
        return OperatorMorphism(f.src, tuple(dst), PointedMap(len(f.src), len(dst), table), tuple(ops))
    src = [None] * len(f.src)
    table = [0] * len(f.src)
    for j, s in enumerate(sigma, 1):
        src[s - 1] = f.src[j - 1]
        table[s - 1] = f.shape.table[j - 1]
    ops = []
    for t in range(1, len(f.dst) + 1):
        old = [sigma[j - 1] for j in f.shape.fiber(t)]
        ops.append(_reorder_op(O, f.ops[t - 1], old, sorted(old)))
    return OperatorMorphism(tuple(src), f.dst, PointedMap(len(src), len(f.dst), tuple(table)), tuple(ops))


def _key(obj: Factorization):
    a, b = obj.alpha, obj.beta
    return repr((a.dst, a.shape.table, a.ops, b.shape.table, b.ops))


def canonical_form(O: DiscreteOperad, obj: Factorization) -> tuple[Factorization, tuple[int, ...]]:
    """Representative of the isomorphism class of ``obj`` reached by
    relabelling the middle object, and the relabelling used."""
    tab = obj.alpha.shape.table
    n = len(obj.y)
    first = []
    for v in tab:
        if v not in first:
            first.append(v)
    units = [j for j in range(1, n + 1) if j not in first]
    best = None
    for perm in permutations(units):
        order = first + list(perm)
        sigma = [0] * n
        for new, old in enumerate(order, 1):
            sigma[old - 1] = new
        cand = Factorization(_relabel(O, obj.alpha, sigma, "dst"), _relabel(O, obj.beta, sigma, "src"))
        key = _key(cand)
        if best is None or key < best[0]:
            best = (key, cand, tuple(sigma))
    return best[1], best[2]


MODES = ("fact", "qpart", "part")


def factorization_objects(O: DiscreteOperad, mu: OperatorMorphism, mode: str = "fact") -> list[Factorization]:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not mu.is_active:
        raise ValueError("factorizations are taken of active morphisms")
    x, z = mu.src, mu.dst
    k = len(x)
    if k > O.arity_cap:
        raise ArityCapExceeded(f"arity {k} exceeds cap {O.arity_cap}")
    nullary: dict = {c: O.ops((), c) for c in O.colors}
    out = []
    for n in range(1, k):
        rmin = 2 if mode != "fact" else 1
        rmax = n
        for tab, r in _growth_tables(k, n, rmin, rmax):
            if mode == "part" and r != n:
                continue
            blocks = [[] for _ in range(r)]
            for i, v in enumerate(tab, 1):
                blocks[v - 1].append(i)
            # beta on image indices is forced by mu
            forced = []
            ok = True
            for blk in blocks:
                ts = {mu.shape.table[i - 1] for i in blk}
                if len(ts) != 1:
                    ok = False
                    break
                forced.append(ts.pop())
            if not ok:
                continue
            block_options = []
            for blk in blocks:
                ins = tuple(x[i - 1] for i in blk)
                block_options.append([(c, op) for c in O.colors for op in O.ops(ins, c)])
            unit_options = [(c, op) for c in O.colors for op in nullary[c]]
            for img in product(*block_options):
                for uns in product(unit_options, repeat=n - r):
                    y = tuple(c for c, _ in img) + tuple(c for c, _ in uns)
                    alpha = OperatorMorphism(x, y, PointedMap(k, n, tab),
                                             tuple(op for _, op in img) + tuple(op for _, op in uns))
                    for utargets in product(range(1, len(z) + 1), repeat=n - r):
                        btab = tuple(forced) + utargets
                        for beta in _solve_fiberwise(O, alpha, mu, btab, y):
                            obj = Factorization(alpha, beta)
                            if n > r and canonical_form(O, obj)[0] != obj:
                                continue
                            out.append(obj)
    return out


def factorization_morphisms(O: DiscreteOperad, a: Factorization, b: Factorization) -> list[OperatorMorphism]:
    """Active ``g: a.y -> b.y`` with ``g . a.alpha == b.alpha`` and
    ``b.beta . g == a.beta``."""
    ya, yb = a.y, b.y
    forced: dict[int, int] = {}
    for i, (u, v) in enumerate(zip(a.alpha.shape.table, b.alpha.shape.table)):
        if forced.setdefault(u, v) != v:
            return []
    free = [j for j in range(1, len(ya) + 1) if j not in forced]
    bb = b.beta.shape.table
    options = []
    for j in free:
        t = a.beta.shape.table[j - 1]
        options.append([jj for jj in range(1, len(yb) + 1) if bb[jj - 1] == t])
    out = []
    for targets in product(*options):
        table = [0] * len(ya)
        for j, v in forced.items():
            table[j - 1] = v
        for j, v in zip(free, targets):
            table[j - 1] = v
        for g in _solve_fiberwise(O, a.alpha, b.alpha, table, ya):
            if compose_active(O, b.beta, g) == a.beta:
                out.append(g)
    return out


@dataclass
class FactorizationCategory:
    mu: OperatorMorphism
    mode: str
    objects: list[Factorization]
    category: "FiniteCategory"

    def index(self, obj: Factorization) -> int:
        return self._pos[obj]

    def __post_init__(self):
        self._pos = {o: i for i, o in enumerate(self.objects)}


def fact_lt_category(O: DiscreteOperad, mu: OperatorMorphism, mode: str = "fact") -> FactorizationCategory:
    """Fact^{<|x|}(mu) (or its quasi-partition / partition full subcategory),
    one object per isomorphism class of middle-object relabellings."""
    from .fincat import FiniteCategory

    objs = factorization_objects(O, mu, mode)
    arrows = []
    for ia, a in enumerate(objs):
        for ib, b in enumerate(objs):
            for g in factorization_morphisms(O, a, b):
                arrows.append((ia, ib, g))
    C = FiniteCategory.from_concrete(objs, arrows, lambda g, f: compose_active(O, g, f),
                                     lambda i: identity_morphism(O, objs[i].y))
    return FactorizationCategory(mu, mode, objs, C)


def qpart_category(O: DiscreteOperad, mu: OperatorMorphism) -> FactorizationCategory:
    return fact_lt_category(O, mu, "qpart")


def part_category(O: DiscreteOperad, mu: OperatorMorphism) -> FactorizationCategory:
    return fact_lt_category(O, mu, "part")


# --------------------------------------------------------------------------
# partition complexes and sigma


def _category(F):
    return F.category if isinstance(F, FactorizationCategory) else F


def pi_homology(O: DiscreteOperad, mu: OperatorMorphism, which: str = "part"):
    """Reduced homology of the (quasi-)partition complex of ``mu``."""
    from .fincat import realization_homology

    if which not in ("part", "qpart"):
        raise ValueError("which must be 'part' or 'qpart'")
    return realization_homology(fact_lt_category(O, mu, which).category)


def orbit_representatives(O: DiscreteOperad, k: int) -> list[tuple[tuple, Color, Op]]:
    """One arity-k operation per orbit of the input permutation action."""
    seen = set()
    reps = []
    perms = list(permutations(range(k)))
    for ins, c in O.signatures(k):
        for op in O.ops(ins, c):
            if (ins, c, op) in seen:
                continue
            reps.append((ins, c, op))
            for p in perms:
                seen.add((tuple(ins[s] for s in p), c, O.act(op, p)))
    return reps


def maximally_active_representatives(O: DiscreteOperad, k: int, zmax: int) -> list[OperatorMorphism]:
    """Maximally active morphisms of arity k into tuples of length <= zmax,
    up to relabelling inputs and targets (the active target comes first)."""
    from itertools import combinations_with_replacement

    nullary = [(c, op) for c in O.colors for op in O.ops((), c)]
    out = []
    for ins, c, op in orbit_representatives(O, k):
        for m in range(1, zmax + 1):
            for rest in combinations_with_replacement(range(len(nullary)), m - 1):
                extra = [nullary[r] for r in rest]
                dst = (c,) + tuple(col for col, _ in extra)
                out.append(OperatorMorphism(ins, dst, PointedMap(k, m, (1,) * k),
                                            (op,) + tuple(o for _, o in extra)))
    return out


@dataclass
class SigmaResult:
    which: str
    k0: int
    k1: int
    cap: int
    lower: Optional[int]
    upper: Optional[int]
    vacuous: bool
    witnesses: list[dict]

    @property
    def value(self):
        """The exact value, ``'>=cap'`` when only the cap was reached, or
        None when the bounds do not meet."""
        if self.vacuous:
            return f">={self.cap}"
        if self.upper is not None and self.lower == self.upper:
            return self.lower
        if self.upper is None and self.lower is not None and self.lower >= self.cap:
            return f">={self.cap}"
        return None

    @property
    def fully_certified(self) -> bool:
        return all(w["certified"] for w in self.witnesses)

    def to_json(self) -> dict:
        return {"which": self.which, "window": [self.k0, self.k1], "cap": self.cap,
                "value": self.value, "lower": self.lower, "upper": self.upper,
                "vacuous": self.vacuous, "fully_certified": self.fully_certified,
                "finite_window": True, "witnesses": self.witnesses}


def sigma(O: DiscreteOperad, k0: int, k1, which: str = "sigma", cap: int = 4, zmax: int = 2,
          adaptive_cap: bool = True) -> SigmaResult:
    """Minimum connectivity of (quasi-)partition complexes over arities
    ``k0 < k <= k1``.  Arities are processed in increasing order; with
    ``adaptive_cap`` the connectivity cap drops to the running minimum."""
    from .fincat import category_connectivity

    if which not in ("sigma", "qsigma"):
        raise ValueError("which must be 'sigma' or 'qsigma'")
    if k1 is None or (isinstance(k1, float) and k1 == float("inf")):
        raise ValueError("the arity window must be finite")
    k1 = int(k1)
    if not 1 <= k0 <= k1:
        raise ValueError(f"need 1 <= k0 <= k1, got {k0}, {k1}")
    if k1 > O.arity_cap:
        raise ArityCapExceeded(f"window end {k1} exceeds arity cap {O.arity_cap}")
    if cap < 0:
        raise ValueError("cap must be non-negative")
    if k0 == k1:
        return SigmaResult(which, k0, k1, cap, None, None, True, [])
    lower = None
    upper = None
    cur = cap
    witnesses = []
    for k in range(k0 + 1, k1 + 1):
        if which == "sigma":
            mus = [OperatorMorphism(ins, (c,), PointedMap(k, 1, (1,) * k), (op,))
                   for ins, c, op in orbit_representatives(O, k)]
            mode = "part"
        else:
            mus = maximally_active_representatives(O, k, zmax)
            mode = "qpart"
        for mu in mus:
            C = fact_lt_category(O, mu, mode).category
            cert = category_connectivity(C, cur)
            lv = cert.level
            up = cert.upper
            lower = lv if lower is None else min(lower, lv)
            if up is not None:
                upper = up if upper is None else min(upper, up)
            witnesses.append({
                "arity": k, "mu": mu.to_json(), "cap": cur, "level": lv,
                "at_least": cert.at_least, "upper": up, "pi1": cert.pi1,
                "certified": cert.fully_certified, "objects": C.n_objects,
            })
            if adaptive_cap:
                cur = max(0, min(cur, lower))
    if upper is not None and lower is not None and lower > upper:
        lower = upper
    return SigmaResult(which, k0, k1, cap, lower, upper, False, witnesses)


# --------------------------------------------------------------------------
# the reduction propositions


def _require_maximally_active(mu: OperatorMorphism) -> None:
    if not is_maximally_active(mu):
        raise ValueError("expected a maximally active morphism")


def _profiles(Cs, through):
    from .fincat import realization_homology

    return [realization_homology(C, through) for C in Cs]


def _lift(O, f: OperatorMorphism, sigma_src, sigma_dst) -> OperatorMorphism:
    g = f
    if sigma_dst is not None:
        g = _relabel(O, g, sigma_dst, "dst")
    if sigma_src is not None:
        g = _relabel(O, g, sigma_src, "src")
    return g


def nonunital_part(O: DiscreteOperad, q: Factorization) -> tuple[Factorization, OperatorMorphism]:
    """Split the first leg through its image: returns the partition
    ``(alpha_nonu, beta . u)`` and the unitary ``u`` into ``q.y``."""
    a = q.alpha
    image = sorted(set(a.shape.table))
    rank = {j: r for r, j in enumerate(image, 1)}
    y_img = tuple(a.dst[j - 1] for j in image)
    a_nonu = OperatorMorphism(a.src, y_img, PointedMap(len(a.src), len(image), tuple(rank[v] for v in a.shape.table)),
                              tuple(a.ops[j - 1] for j in image))
    n = len(a.dst)
    u_ops = tuple(O.unit(a.dst[j - 1]) if j in rank else a.ops[j - 1] for j in range(1, n + 1))
    u = OperatorMorphism(y_img, a.dst, PointedMap(len(image), n, tuple(image)), u_ops)
    if compose_active(O, u, a_nonu) != a:
        raise AssertionError("nonunital/unitary split does not recompose")
    return Factorization(a_nonu, compose_active(O, q.beta, u)), u


def verify_part_vs_qpart(O: DiscreteOperad, mu: OperatorMorphism) -> dict:
    """Part(mu) -> QPart(mu): inclusion of objects, a right adjoint given by
    the nonunital part of the first leg (checked by hom bijections), and
    agreement of homology and connectivity."""
    from .fincat import category_connectivity

    _require_maximally_active(mu)
    if not is_nonunital(mu):
        raise ValueError("expected a nonunital maximally active morphism")
    k = len(mu.src)
    P = part_category(O, mu)
    Q = qpart_category(O, mu)
    pset, qset = set(P.objects), set(Q.objects)
    filtered = {q for q in Q.objects if len(set(q.alpha.shape.table)) == len(q.y)}
    objects_ok = pset == filtered
    CP, CQ = P.category, Q.category
    adjoint_ok = True
    failures = []
    for iq, q in enumerate(Q.objects):
        r, u = nonunital_part(O, q)
        p0, sig = canonical_form(O, r)
        if p0 not in pset:
            adjoint_ok = False
            failures.append({"object": iq, "reason": "reduction is not a partition"})
            continue
        ip0 = P.index(p0)
        inv = [0] * len(sig)
        for j, s in enumerate(sig, 1):
            inv[s - 1] = j
        eps = _relabel(O, u, inv, "src")
        if eps not in {CQ.morphism_labels[h] for h in CQ.hom(Q.index(p0), iq)}:
            adjoint_ok = False
            failures.append({"object": iq, "reason": "counit is not a morphism"})
            continue
        for ip, p in enumerate(P.objects):
            via = [compose_active(O, eps, CP.morphism_labels[h]) for h in CP.hom(ip, ip0)]
            direct = {CQ.morphism_labels[h] for h in CQ.hom(Q.index(p), iq)}
            if len(via) != len(set(via)) or set(via) != direct:
                adjoint_ok = False
                failures.append({"object": iq, "partition": ip, "reason": "hom sets are not in bijection"})
                break
    cap = max(k - 2, 0)
    hp, hq = _profiles([CP, CQ], None)
    cp, cq = category_connectivity(CP, cap), category_connectivity(CQ, cap)
    certs_ok = (cp.level, cp.upper, cp.at_least) == (cq.level, cq.upper, cq.at_least)
    passed = objects_ok and adjoint_ok and hp.agrees_with(hq) and certs_ok
    return {
        "check": "part_vs_qpart", "pass": passed, "arity": k,
        "part_objects": len(P.objects), "qpart_objects": len(Q.objects),
        "strict_containment": len(qset) > len(pset),
        "objects_ok": objects_ok, "adjoint_ok": adjoint_ok, "failures": failures[:10],
        "profiles": {"part": hp.to_json(), "qpart": hq.to_json()},
        "certificates": {"part": cp.to_json(), "qpart": cq.to_json()},
        "note": "partitions are defined by the explicit three conditions",
    }


def _project(O: DiscreteOperad, q: Factorization, i: int):
    """Component of a factorization at the active target ``i``; also the
    positions of the kept middle indices."""
    keep = [j for j, t in enumerate(q.beta.shape.table, 1) if t == i]
    pos = {j: r for r, j in enumerate(keep, 1)}
    a = q.alpha
    alpha = OperatorMorphism(a.src, tuple(a.dst[j - 1] for j in keep),
                             PointedMap(len(a.src), len(keep), tuple(pos[v] for v in a.shape.table)),
                             tuple(a.ops[j - 1] for j in keep))
    beta = OperatorMorphism(alpha.dst, (q.beta.dst[i - 1],), PointedMap(len(keep), 1, (1,) * len(keep)),
                            (q.beta.ops[i - 1],))
    return Factorization(alpha, beta), keep


def verify_qpart_reduction(O: DiscreteOperad, mu: OperatorMorphism) -> dict:
    """The projection QPart(mu) -> QPart(mu^nonu) onto the active component:
    checks functoriality and compares homology profiles."""
    from .fincat import Functor, NotFunctorial

    _require_maximally_active(mu)
    nu = nonunital_reduction(O, mu)
    i = mu.shape.table[0]
    Q1 = qpart_category(O, mu)
    Q2 = qpart_category(O, nu)
    C1, C2 = Q1.category, Q2.category
    obj_map, frames = [], []
    for q in Q1.objects:
        r, keep = _project(O, q, i)
        c, sig = canonical_form(O, r)
        obj_map.append(Q2.index(c))
        frames.append((keep, sig))
    lookup = {(C2.src[h], C2.dst[h], C2.morphism_labels[h]): h for h in range(C2.n_morphisms)}
    mor_map = []
    functor_ok = True
    for h in range(C1.n_morphisms):
        g = C1.morphism_labels[h]
        (ka, sa), (kb, sb) = frames[C1.src[h]], frames[C1.dst[h]]
        posb = {j: r for r, j in enumerate(kb, 1)}
        table = tuple(posb[g.shape.table[j - 1]] for j in ka)
        gi = OperatorMorphism(tuple(g.src[j - 1] for j in ka), tuple(g.dst[j - 1] for j in kb),
                              PointedMap(len(ka), len(kb), table), tuple(g.ops[j - 1] for j in kb))
        gi = _lift(O, gi, sa, sb)
        key = (obj_map[C1.src[h]], obj_map[C1.dst[h]], gi)
        if key not in lookup:
            functor_ok = False
            break
        mor_map.append(lookup[key])
    if functor_ok:
        try:
            Functor(C1, C2, obj_map, mor_map).check()
        except NotFunctorial:
            functor_ok = False
    h1, h2 = _profiles([C1, C2], None)
    P1 = part_category(O, mu)
    return {
        "check": "qpart_reduction", "pass": functor_ok and h1.agrees_with(h2),
        "functor_ok": functor_ok, "arity": len(mu.src), "targets": len(mu.dst),
        "qpart_objects": len(Q1.objects), "part_objects": len(P1.objects),
        "strict_containment": len(Q1.objects) > len(P1.objects),
        "reduced_qpart_objects": len(Q2.objects),
        "profiles": {"source": h1.to_json(), "target": h2.to_json()},
    }
