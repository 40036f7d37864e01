"""Decidable predicates on matrix groups mirroring arithmetic hypotheses.

Each predicate reads a purely group-theoretic fact off a subgroup of
GL2(Z/p^nZ): common fixed vectors, the determinant image and kernel, and
cyclic submodules stable under the whole group. A report bundles the
values consumed by the falsification experiments.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import WrongLevel
from .matgrp import MatGroup, reduce_mod
from .zmod import ResidueMatrix, ResidueVector, Submodule, kernel


@dataclass(frozen=True)
class ConditionReport:
    """Group-level answers to the hypotheses of the triviality criterion."""

    has_fixed_point_of_exact_order_p: bool
    det_image_order_mod_p: int
    det_kernel_trivial_mod_p: bool
    stable_cyclic_order_p: tuple
    stable_cyclic_order_p2: tuple
    isogeny_condition_p3: bool
    zeta_condition_holds: bool

    def to_json_dict(self) -> dict:
        return {
            "hasFixedPointOfExactOrderP": self.has_fixed_point_of_exact_order_p,
            "detImageOrderMod_p": self.det_image_order_mod_p,
            "detKernelTrivialMod_p": self.det_kernel_trivial_mod_p,
            "stableCyclicOrderP": [
                [list(g.entries) for g in s.generators] for s in self.stable_cyclic_order_p
            ],
            "stableCyclicOrderP2": [
                [list(g.entries) for g in s.generators] for s in self.stable_cyclic_order_p2
            ],
            "isogenyConditionP3": self.isogeny_condition_p3,
            "zetaConditionHolds": self.zeta_condition_holds,
        }


def fixed_points(group: MatGroup) -> Submodule:
    """Common fixed vectors: the intersection of ker(g - I) over the group."""
    ctx = group.ctx
    n = ctx.modulus
    rows = []
    for g in group.elements:
        rows.append([(g.a - 1) % n, g.b])
        rows.append([g.c, (g.d - 1) % n])
    m = ResidueMatrix.from_rows(rows, ctx, cols=2)
    return kernel(m)


def det_image(group: MatGroup) -> list:
    """Sorted distinct determinants, a subgroup of the units."""
    return sorted({g.det() for g in group.elements})


def det_kernel_trivial(group: MatGroup) -> bool:
    """Whether the identity is the only element of determinant 1 (level 1)."""
    if group.ctx.n != 1:
        raise WrongLevel(f"determinant-kernel test needs level 1, got level {group.ctx.n}")
    ident = group.identity
    return all(g == ident for g in group.elements if g.det() == 1)


def stable_cyclic_submodules(group: MatGroup, order: int) -> list:
    """Cyclic submodules <v> of the given exact order with g.v in <v> for all g.

    Stability under a generating set implies stability under the group,
    since g(h v) lies in g<v> = <g v> <= <v>.
    """
    ctx = group.ctx
    p, n, modulus = ctx.p, ctx.n, ctx.modulus
    k = 0
    q = order
    while q > 1 and q % p == 0:
        q //= p
        k += 1
    if q != 1 or k < 1 or k > n:
        raise ValueError(f"order must be a power of {p} between {p} and {modulus}")
    gens = group.generating_set
    found = {}
    for v in itertools.product(range(modulus), repeat=2):
        if min(ctx.valuation(v[0]), ctx.valuation(v[1])) != n - k:
            continue
        span = Submodule.span([list(v)], 2, ctx)
        key = tuple(tuple(g.entries) for g in span.generators)
        if key in found:
            continue
        if all(span.contains(g.apply(v)) for g in gens):
            found[key] = span
    return [found[key] for key in sorted(found)]


def isogeny_condition_p3(group: MatGroup) -> bool:
    """Whether stable cyclic submodules of orders p^2 and p intersect trivially.

    True iff some stable cyclic submodule of order p^2 misses some stable
    cyclic submodule of order p entirely; level 2 only.
    """
    ctx = group.ctx
    if ctx.n != 2:
        raise WrongLevel(f"the intersection test needs level 2, got level {ctx.n}")
    big = stable_cyclic_submodules(group, ctx.p**2)
    small = stable_cyclic_submodules(group, ctx.p)
    for c1 in big:
        for c2 in small:
            if not all(c1.contains(w) for w in c2.generators):
                return True
    return False


def evaluate_main_theorem_conditions(group: MatGroup) -> ConditionReport:
    """Evaluate every predicate on the level-1 and level-2 reductions."""
    if group.ctx.n < 2:
        raise WrongLevel("condition evaluation needs a group at level 2 or higher")
    level1 = reduce_mod(group, 1)
    level2 = reduce_mod(group, 2)
    fp = fixed_points(level1)
    dets = det_image(level1)
    stable_p = stable_cyclic_submodules(level2, group.ctx.p)
    stable_p2 = stable_cyclic_submodules(level2, group.ctx.p**2)
    return ConditionReport(
        has_fixed_point_of_exact_order_p=fp.cardinality() > 1,
        det_image_order_mod_p=len(dets),
        det_kernel_trivial_mod_p=det_kernel_trivial(level1),
        stable_cyclic_order_p=tuple(stable_p),
        stable_cyclic_order_p2=tuple(stable_p2),
        isogeny_condition_p3=isogeny_condition_p3(level2),
        zeta_condition_holds=len(dets) >= 3,
    )
