"""Finite subgroups of GL2 over Z/p^nZ.

Groups are stored as explicit sorted element tuples so that equality,
hashing, and iteration order are deterministic across runs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, NamedTuple, Optional

from .errors import (
    BudgetExceeded,
    CapExceeded,
    NonInvertibleConjugator,
    NonInvertibleGenerator,
)
from .zmod import ModulusContext, ResidueVector, unit_inverse

DEFAULT_CAP = 5000


@dataclass(frozen=True, order=True)
class Mat2:
    """2x2 matrix over Z/p^nZ, entries reduced on construction."""

    a: int
    b: int
    c: int
    d: int
    ctx: ModulusContext = field(compare=False)

    def __post_init__(self):
        N = self.ctx.modulus
        object.__setattr__(self, "a", self.a % N)
        object.__setattr__(self, "b", self.b % N)
        object.__setattr__(self, "c", self.c % N)
        object.__setattr__(self, "d", self.d % N)

    @classmethod
    def identity(cls, ctx: ModulusContext) -> "Mat2":
        return cls(1, 0, 0, 1, ctx)

    @classmethod
    def diagonal(cls, u: int, v: int, ctx: ModulusContext) -> "Mat2":
        return cls(u, 0, 0, v, ctx)

    @classmethod
    def from_rows(cls, rows, ctx: ModulusContext) -> "Mat2":
        (a, b), (c, d) = rows
        return cls(a, b, c, d, ctx)

    def row_list(self):
        return [[self.a, self.b], [self.c, self.d]]

    def mul(self, other: "Mat2") -> "Mat2":
        if other.ctx != self.ctx:
            raise ValueError("mixed moduli")
        N = self.ctx.modulus
        return Mat2(
            (self.a * other.a + self.b * other.c) % N,
            (self.a * other.b + self.b * other.d) % N,
            (self.c * other.a + self.d * other.c) % N,
            (self.c * other.b + self.d * other.d) % N,
            self.ctx,
        )

    def __mul__(self, other: "Mat2") -> "Mat2":
        return self.mul(other)

    def det(self) -> int:
        return (self.a * self.d - self.b * self.c) % self.ctx.modulus

    def trace(self) -> int:
        return (self.a + self.d) % self.ctx.modulus

    def is_invertible(self) -> bool:
        return self.det() % self.ctx.p != 0

    def inv(self) -> "Mat2":
        di = unit_inverse(self.det(), self.ctx)
        N = self.ctx.modulus
        return Mat2(self.d * di % N, -self.b * di % N, -self.c * di % N, self.a * di % N, self.ctx)

    def pow(self, k: int) -> "Mat2":
        if k < 0:
            return self.inv().pow(-k)
        out = Mat2.identity(self.ctx)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def order(self) -> int:
        ident = Mat2.identity(self.ctx)
        cur = self
        k = 1
        while cur != ident:
            cur = cur * self
            k += 1
        return k

    def is_diagonal(self) -> bool:
        return self.b == 0 and self.c == 0

    def is_upper(self) -> bool:
        return self.c == 0

    def is_lower(self) -> bool:
        return self.b == 0

    def is_unipotent_upper(self) -> bool:
        return self.a == 1 and self.d == 1 and self.c == 0

    def is_unipotent_lower(self) -> bool:
        return self.a == 1 and self.d == 1 and self.b == 0

    def reduce_to(self, m: int) -> "Mat2":
        """Image under Z/p^n -> Z/p^m for m <= n."""
        if m > self.ctx.n:
            raise ValueError("cannot reduce to a finer modulus")
        sub = ModulusContext(self.ctx.p, m)
        return Mat2(self.a, self.b, self.c, self.d, sub)

    def apply(self, vec) -> ResidueVector:
        """Matrix-times-column-vector action on the rank-2 module."""
        x, y = vec
        N = self.ctx.modulus
        return ResidueVector(((self.a * x + self.b * y) % N, (self.c * x + self.d * y) % N), self.ctx)


def close_group(gens: Iterable[Mat2], ctx: ModulusContext, cap: int = DEFAULT_CAP) -> "MatGroup":
    """Closure of the generators under multiplication, capped at cap elements."""
    gens = list(gens)
    for g in gens:
        if g.ctx != ctx:
            raise ValueError("generator modulus mismatch")
        if not g.is_invertible():
            raise NonInvertibleGenerator(f"generator {g.row_list()} has determinant divisible by {ctx.p}")
    ident = Mat2.identity(ctx)
    elements = {ident}
    frontier = [ident]
    for g in gens:
        if g not in elements:
            elements.add(g)
            frontier.append(g)
    while frontier:
        h = frontier.pop()
        for g in gens:
            w = h * g
            if w not in elements:
                if len(elements) >= cap:
                    raise CapExceeded(f"group closure exceeded cap of {cap} elements")
                elements.add(w)
                frontier.append(w)
    return MatGroup(tuple(sorted(elements)), ctx, tuple(gens))


class MatGroup:
    """A finite subgroup of GL2(Z/p^nZ), held as its sorted element tuple."""

    def __init__(self, elements: tuple, ctx: ModulusContext, gens: tuple = ()):
        self.elements = tuple(sorted(set(elements)))
        self.ctx = ctx
        self._gens = tuple(gens)

    def __eq__(self, other) -> bool:
        return isinstance(other, MatGroup) and self.ctx == other.ctx and self.elements == other.elements

    def __hash__(self) -> int:
        return hash((self.ctx, self.elements))

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, m: Mat2) -> bool:
        return m in self._index

    def __repr__(self) -> str:
        return f"MatGroup(order={len(self.elements)}, mod={self.ctx.modulus})"

    @cached_property
    def _index(self) -> dict:
        return {m: i for i, m in enumerate(self.elements)}

    @cached_property
    def identity(self) -> Mat2:
        return Mat2.identity(self.ctx)

    @cached_property
    def generating_set(self) -> tuple:
        """A small generating tuple: stored generators first, then greedy fill."""
        chosen = []
        span = {self.identity}
        for g in itertools.chain(self._gens, self.elements):
            if g in span:
                continue
            chosen.append(g)
            frontier = list(span)
            span.add(g)
            frontier.append(g)
            while frontier:
                h = frontier.pop()
                for c in chosen:
                    for w in (h * c, c * h):
                        if w not in span:
                            span.add(w)
                            frontier.append(w)
            if len(span) == len(self.elements):
                break
        return tuple(chosen)

    def is_subgroup_of(self, other: "MatGroup") -> bool:
        return self.ctx == other.ctx and all(g in other for g in self.elements)

    def to_spec_dict(self) -> dict:
        gens = self.generating_set or (self.identity,)
        return {
            "p": self.ctx.p,
            "n": self.ctx.n,
            "generators": [g.row_list() for g in gens],
        }


class TripleParam(NamedTuple):
    a: int
    b: int
    c: int


@dataclass(frozen=True)
class ExampleGroup:
    """The order-2p^2 group generated by diag(1,-1), diag(1+p,1+p),
    and [[1, m*p],[p, 1]] over Z/p^2, with its three-parameter labeling."""

    group: MatGroup
    nonsquare: int
    triples: dict
    delta1: Mat2
    delta2: Mat2
    delta3: Mat2

    def element(self, a: int, b: int, c: int) -> Mat2:
        p = self.group.ctx.p
        return self.triples[TripleParam(a % 2, b % p, c % p)]

    def triple_of(self, g: Mat2) -> TripleParam:
        for t, m in self.triples.items():
            if m == g:
                return t
        raise KeyError("element is not in the group")


def smallest_nonsquare(p: int) -> int:
    """Least positive quadratic non-residue mod an odd prime p."""
    for m in range(2, p):
        if pow(m, (p - 1) // 2, p) == p - 1:
            return m
    raise ValueError(f"no non-residue below {p}; is p prime?")


def closed_form_triple(a: int, b: int, c: int, m: int, ctx: ModulusContext) -> Mat2:
    """Element with parameters (a, b, c): sign flip a, scaling b, rotation c."""
    p = ctx.p
    sign = -1 if a % 2 else 1
    return Mat2(1 + p * b, m * p * c, sign * p * c, sign * (1 + p * b), ctx)


def make_example_group(p: int, m: Optional[int] = None) -> ExampleGroup:
    """Construct the counterexample group at an odd prime p (modulus p^2)."""
    if p == 2 or any(p % q == 0 for q in range(2, min(p, int(p**0.5) + 2))) or p < 2:
        raise ValueError(f"p must be an odd prime, got {p}")
    if m is None:
        m = smallest_nonsquare(p)
    elif pow(m % p, (p - 1) // 2, p) != p - 1:
        raise ValueError(f"{m} is a square mod {p}")
    ctx = ModulusContext(p, 2)
    d1 = Mat2.diagonal(1, -1, ctx)
    d2 = Mat2.diagonal(1 + p, 1 + p, ctx)
    d3 = Mat2(1, m * p, p, 1, ctx)
    grp = close_group([d1, d2, d3], ctx, cap=4 * p * p)
    if len(grp) != 2 * p * p:
        raise AssertionError(f"expected order {2 * p * p}, got {len(grp)}")
    triples = {}
    for a in range(2):
        for b in range(p):
            for c in range(p):
                g = closed_form_triple(a, b, c, m, ctx)
                if g not in grp:
                    raise AssertionError(f"closed form ({a},{b},{c}) landed outside the group")
                triples[TripleParam(a, b, c)] = g
    if len(set(triples.values())) != 2 * p * p:
        raise AssertionError("triple labeling is not a bijection")
    return ExampleGroup(grp, m, triples, d1, d2, d3)


def reduce_mod(group: MatGroup, m: int) -> MatGroup:
    """Image of the group under entrywise reduction Z/p^n -> Z/p^m."""
    if m > group.ctx.n or m < 1:
        raise ValueError(f"target exponent {m} out of range 1..{group.ctx.n}")
    elems = {g.reduce_to(m) for g in group.elements}
    gens = tuple(g.reduce_to(m) for g in group._gens)
    return MatGroup(tuple(elems), ModulusContext(group.ctx.p, m), gens)


def special_subgroups(group: MatGroup):
    """(diagonal part, upper-unipotent part, lower-unipotent part), each a MatGroup."""
    ctx = group.ctx
    diag = [g for g in group if g.is_diagonal()]
    upp = [g for g in group if g.is_unipotent_upper()]
    low = [g for g in group if g.is_unipotent_lower()]
    return (
        MatGroup(tuple(diag), ctx),
        MatGroup(tuple(upp), ctx),
        MatGroup(tuple(low), ctx),
    )


def cyclic_subgroups(group: MatGroup) -> list:
    """All distinct cyclic subgroups, sorted by (order, elements)."""
    seen = set()
    out = []
    for g in group:
        elems = []
        cur = g
        while True:
            elems.append(cur)
            if cur == group.identity:
                break
            cur = cur * g
        key = tuple(sorted(elems))
        if key not in seen:
            seen.add(key)
            out.append(MatGroup(key, group.ctx, (g,)))
    out.sort(key=lambda h: (len(h), h.elements))
    return out


def enumerate_subgroups(group: MatGroup, cap: int = 200000) -> list:
    """All subgroups, built by closing unions of previously found subgroups.

    Starts from the cyclic subgroups and repeatedly closes pairwise unions
    until no new subgroup appears. Complete because every subgroup is
    generated by finitely many cyclic pieces.
    """
    found = {h.elements: h for h in cyclic_subgroups(group)}
    work = 0
    changed = True
    while changed:
        changed = False
        current = sorted(found.values(), key=lambda h: (len(h), h.elements))
        for h1, h2 in itertools.combinations(current, 2):
            if h1.is_subgroup_of(h2) or h2.is_subgroup_of(h1):
                continue
            work += 1
            if work > cap:
                raise BudgetExceeded(f"subgroup enumeration exceeded {cap} closure attempts")
            joined = close_group(
                list(h1.generating_set) + list(h2.generating_set), group.ctx, cap=len(group) + 1
            )
            if joined.elements not in found:
                found[joined.elements] = joined
                changed = True
    return sorted(found.values(), key=lambda h: (len(h), h.elements))


def conjugate(group: MatGroup, t: Mat2) -> MatGroup:
    """t * G * t^{-1}."""
    if not t.is_invertible():
        raise NonInvertibleConjugator(f"conjugator {t.row_list()} is not invertible")
    ti = t.inv()
    elems = tuple(t * g * ti for g in group.elements)
    gens = tuple(t * g * ti for g in group._gens)
    return MatGroup(elems, group.ctx, gens)


def _projective_line_reps(ctx: ModulusContext):
    """Generators of the free rank-1 submodules of (Z/p^n)^2: (1,y) then (pk,1)."""
    N = ctx.modulus
    for y in range(N):
        yield (1, y)
    for k in range(N // ctx.p):
        yield (ctx.p * k, 1)


def find_triangularizing_conjugator(group: MatGroup, budget: int = 25):
    """A matrix t with t*G*t^{-1} all upper (or all lower) triangular, or None.

    Searches for a free line stabilized by every element; the first basis
    vector of t^{-1} spans that line. Identity-first ordering makes already
    upper-triangular groups return (identity, "upper").
    """
    if group.ctx.modulus > budget:
        raise BudgetExceeded(f"stable-line search over modulus {group.ctx.modulus} exceeds budget {budget}")
    ident = Mat2.identity(group.ctx)
    if all(g.is_upper() for g in group):
        return ident, "upper"
    if all(g.is_lower() for g in group):
        return ident, "lower"
    N = group.ctx.modulus
    for v in _projective_line_reps(group.ctx):
        stable = True
        for g in group.generating_set:
            w = g.apply(v)
            # w must lie in the line spanned by v: solve w = t*v with t a scalar
            if v[0] % group.ctx.p != 0:
                t = w.entries[0] * unit_inverse(v[0], group.ctx) % N
            else:
                t = w.entries[1] * unit_inverse(v[1], group.ctx) % N
            if (t * v[0] - w.entries[0]) % N or (t * v[1] - w.entries[1]) % N:
                stable = False
                break
        if not stable:
            continue
        # complete v to a basis; t^{-1} has columns (v, w)
        if v[0] % group.ctx.p != 0:
            other = (0, 1)
        else:
            other = (1, 0)
        t_inv = Mat2(v[0], other[0], v[1], other[1], group.ctx)
        t = t_inv.inv()
        conj = conjugate(group, t)
        if not all(g.is_upper() for g in conj):
            raise AssertionError("stable line did not triangularize")
        return t, "upper"
    return None
