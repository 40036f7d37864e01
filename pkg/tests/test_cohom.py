"""Tests for the cohomology core.

The anti-regression oracle here enumerates value tables literally: either
every table in M^|G| (tiny cases) or every assignment of generator values
propagated through the group, with the cocycle relation then checked over
all pairs. Expected cardinalities below were frozen from those runs.
"""

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from cohomlab.cohom import (
    Cocycle,
    CohomologyReport,
    ModuleAction,
    action_image,
    coboundary_of,
    coboundary_space,
    cocycle_space,
    h1,
    h1_loc,
    h1_loc_via_restrictions,
    inflation,
    is_coboundary,
    is_cocycle,
    is_locally_trivial,
    locally_trivial_subspace,
    normalize_locally_trivial_cocycle,
    pointwise_stabilizer,
    restriction,
)
from cohomlab.errors import (
    CapExceeded,
    HypothesisViolated,
    NotASubgroup,
    StabilizerMismatch,
)
from cohomlab.matgrp import (
    Mat2,
    MatGroup,
    close_group,
    conjugate,
    cyclic_subgroups,
    make_example_group,
    special_subgroups,
)
from cohomlab.zmod import ModulusContext

Z2 = ModulusContext(2, 1)
Z3 = ModulusContext(3, 1)
Z9 = ModulusContext(3, 2)
Z25 = ModulusContext(5, 2)


# ---------------------------------------------------------------------------
# oracle: literal table enumeration
# ---------------------------------------------------------------------------


def table_satisfies_relation(group, action, table):
    n = action.ctx.modulus
    idx = group._index
    for g in group.elements:
        rows = action.act_rows(g)
        zg = table[idx[g]]
        for h in group.elements:
            zh = table[idx[h]]
            want = tuple(
                (zg[i] + sum(rows[i][t] * zh[t] for t in range(action.rank))) % n
                for i in range(action.rank)
            )
            if table[idx[g * h]] != want:
                return False
    return True


def brute_tables(group, action):
    """All cocycle tables, by propagating every generator assignment."""
    n = action.ctx.modulus
    r = action.rank
    gens = group.generating_set
    module = list(itertools.product(range(n), repeat=r))
    if not gens:
        return {((0,) * r,)}
    out = set()
    for assign in itertools.product(module, repeat=len(gens)):
        table = {group.identity: (0,) * r}
        frontier = [group.identity]
        ok = True
        while frontier and ok:
            h = frontier.pop()
            zh = table[h]
            for s, zs in zip(gens, assign):
                g = s * h
                rows = action.act_rows(s)
                val = tuple(
                    (zs[i] + sum(rows[i][t] * zh[t] for t in range(r))) % n for i in range(r)
                )
                if g not in table:
                    table[g] = val
                    frontier.append(g)
                elif table[g] != val:
                    ok = False
                    break
        if not ok or len(table) != len(group):
            continue
        flat = tuple(table[g] for g in group.elements)
        if table_satisfies_relation(group, action, flat):
            out.add(flat)
    return out


def brute_coboundaries(group, action):
    n = action.ctx.modulus
    r = action.rank
    out = set()
    for v in itertools.product(range(n), repeat=r):
        tab = []
        for g in group.elements:
            moved = action.apply(g, v)
            tab.append(tuple((moved.entries[i] - v[i]) % n for i in range(r)))
        out.add(tuple(tab))
    return out


def brute_locally_trivial(group, action, z1_tables):
    n = action.ctx.modulus
    r = action.rank
    idx = group._index
    images = []
    for g in group.elements:
        img = set()
        for v in itertools.product(range(n), repeat=r):
            moved = action.apply(g, v)
            img.add(tuple((moved.entries[i] - v[i]) % n for i in range(r)))
        images.append(img)
    return {t for t in z1_tables if all(t[idx[g]] in images[i] for i, g in enumerate(group.elements))}


def submodule_card(sub):
    return sub.cardinality()


def example_cocycle(ex):
    """The explicit nontrivial locally trivial cocycle on the p=odd family:
    value (0, (-1)^a * p * c) at the element with parameters (a, b, c)."""
    grp = ex.group
    p = grp.ctx.p
    n = grp.ctx.modulus
    rev = {g: t for t, g in ex.triples.items()}
    vals = []
    for g in grp.elements:
        t = rev[g]
        vals.append((0, ((-1) ** t.a * p * t.c) % n))
    return Cocycle(grp, ModuleAction.standard(grp.ctx), tuple(vals))


SIGMA3 = close_group([Mat2(1, 1, 0, 1, Z3)], Z3)
TRIVIAL9 = MatGroup((Mat2.identity(Z9),), Z9)


# ---------------------------------------------------------------------------
# spaces on frozen examples
# ---------------------------------------------------------------------------


def test_trivial_group_spaces():
    assert cocycle_space(TRIVIAL9).is_zero()
    assert coboundary_space(TRIVIAL9).is_zero()
    assert h1(TRIVIAL9) == []
    assert locally_trivial_subspace(TRIVIAL9).is_zero()
    assert h1_loc_via_restrictions(TRIVIAL9) == []


def test_sigma_mod3_cardinalities():
    z1 = cocycle_space(SIGMA3)
    b1 = coboundary_space(SIGMA3)
    loc = locally_trivial_subspace(SIGMA3)
    assert z1.cardinality() == 9
    assert b1.cardinality() == 3
    assert loc.cardinality() == 3
    assert h1(SIGMA3) == [3]
    assert b1.le(loc) and loc.le(z1)
    assert loc == b1


def test_sigma_mod3_matches_brute():
    action = ModuleAction.standard(Z3)
    tables = brute_tables(SIGMA3, action)
    assert len(tables) == 9
    assert brute_coboundaries(SIGMA3, action) <= tables
    assert len(brute_coboundaries(SIGMA3, action)) == 3
    got = {tuple(tuple(v[i * 2 : i * 2 + 2]) for i in range(len(SIGMA3))) for v in (x.entries for x in cocycle_space(SIGMA3).vectors())}
    assert got == tables


def test_gl2f2_all_subgroups_match_brute():
    swap = Mat2(0, 1, 1, 0, Z2)
    sig = Mat2(1, 1, 0, 1, Z2)
    g = close_group([swap, sig], Z2)
    from cohomlab.matgrp import enumerate_subgroups

    action = ModuleAction.standard(Z2)
    for sub in enumerate_subgroups(g):
        tables = brute_tables(sub, action)
        cobs = brute_coboundaries(sub, action)
        loc_tables = brute_locally_trivial(sub, action, tables)
        assert cocycle_space(sub).cardinality() == len(tables)
        assert coboundary_space(sub).cardinality() == len(cobs)
        assert locally_trivial_subspace(sub).cardinality() == len(loc_tables)


@settings(max_examples=25, deadline=None)
@given(st.data())
def test_random_small_groups_match_brute(data):
    ctx = data.draw(st.sampled_from([Z3, Z9, ModulusContext(2, 2)]))
    n = ctx.modulus
    mats = []
    for _ in range(2):
        m = Mat2(*(data.draw(st.integers(0, n - 1)) for _ in range(4)), ctx)
        if m.is_invertible():
            mats.append(m)
    try:
        grp = close_group(mats, ctx, cap=21)
    except CapExceeded:
        return
    if len(grp) > 20 or len(grp.generating_set) > 2:
        return
    action = ModuleAction.standard(ctx)
    tables = brute_tables(grp, action)
    z1 = cocycle_space(grp, action)
    b1 = coboundary_space(grp, action)
    loc = locally_trivial_subspace(grp, action)
    assert z1.cardinality() == len(tables)
    assert b1.cardinality() == len(brute_coboundaries(grp, action))
    assert loc.cardinality() == len(brute_locally_trivial(grp, action, tables))
    assert b1.le(loc) and loc.le(z1)
    # representative independence: locally trivial + coboundary stays locally trivial
    if loc.generators and b1.generators:
        zc = Cocycle.from_flat(grp, action, loc.generators[0].entries)
        bc = Cocycle.from_flat(grp, action, b1.generators[0].entries)
        assert is_locally_trivial(zc.add(bc))


# ---------------------------------------------------------------------------
# the explicit counterexample cocycle
# ---------------------------------------------------------------------------


def test_example_cocycle_is_nontrivial_locally_trivial():
    ex = make_example_group(3)
    zc = example_cocycle(ex)
    assert is_cocycle(zc, exhaustive=True)
    assert is_locally_trivial(zc)
    assert is_coboundary(zc) is None
    # scaling by p kills it: the class has order exactly p
    assert zc.scale(3).is_zero()


def test_example_cocycle_in_computed_spaces():
    ex = make_example_group(3)
    zc = example_cocycle(ex)
    flat = zc.flatten()
    assert cocycle_space(ex.group).contains(flat)
    assert locally_trivial_subspace(ex.group).contains(flat)
    assert not coboundary_space(ex.group).contains(flat)


@pytest.mark.parametrize("p", [3, 5])
def test_example_family_h1loc_nonempty(p):
    ex = make_example_group(p)
    rep = h1_loc(ex.group)
    assert rep.h1loc_invariants != ()
    assert list(rep.h1loc_invariants) == h1_loc_via_restrictions(ex.group)
    for w in rep.h1loc_witnesses:
        assert is_cocycle(w)
        assert is_locally_trivial(w)
        assert is_coboundary(w) is None
    prod = 1
    for d in rep.h1_invariants:
        prod *= d
    assert prod * coboundary_space(ex.group).cardinality() == cocycle_space(ex.group).cardinality()


def test_restriction_of_example_cocycle():
    ex = make_example_group(3)
    zc = example_cocycle(ex)
    d3 = close_group([ex.delta3], ex.group.ctx)
    res = restriction(zc, d3)
    assert res.group is d3
    for c in range(3):
        g = ex.element(0, 0, c)
        assert tuple(res.value_of(g)) == (0, (3 * c) % 9)
    with pytest.raises(NotASubgroup):
        restriction(zc, close_group([Mat2(1, 1, 0, 1, Z9)], Z9))


def test_restriction_of_coboundary_is_coboundary():
    ex = make_example_group(3)
    cb = coboundary_of(ex.group, (4, 7))
    d, _, _ = special_subgroups(ex.group)
    res = restriction(cb, d)
    v = is_coboundary(res)
    assert v is not None


# ---------------------------------------------------------------------------
# h1_loc verdicts
# ---------------------------------------------------------------------------


def test_cyclic_groups_have_trivial_h1loc():
    ex = make_example_group(3)
    for cyc in cyclic_subgroups(ex.group)[:8]:
        rep = h1_loc(cyc)
        assert rep.h1loc_invariants == ()
        assert h1_loc_via_restrictions(cyc) == []


def test_full_diagonal_mod9_trivial_h1loc():
    units = [1, 2, 4, 5, 7, 8]
    elems = tuple(Mat2.diagonal(u, v, Z9) for u in units for v in units)
    diag = MatGroup(elems, Z9)
    assert len(diag) == 36
    rep = h1_loc(diag)
    assert rep.h1loc_invariants == ()
    assert h1_loc_via_restrictions(diag) == []


def test_h1_gl2_f3_trivial():
    g = close_group([Mat2(1, 1, 0, 1, Z3), Mat2(2, 0, 0, 1, Z3), Mat2(0, 2, 1, 0, Z3)], Z3, cap=60)
    assert len(g) == 48
    assert h1(g) == []


def test_h1loc_conjugation_invariant():
    ex = make_example_group(3)
    t = Mat2(1, 2, 1, 0, Z9)
    assert t.is_invertible()
    conj = conjugate(ex.group, t)
    assert list(h1_loc(conj).h1loc_invariants) == list(h1_loc(ex.group).h1loc_invariants)


def test_two_h1loc_paths_agree_on_samples():
    groups = [
        SIGMA3,
        close_group([Mat2(1, 1, 0, 1, Z9)], Z9),
        close_group([Mat2(1, 1, 0, 1, Z3), Mat2(2, 0, 0, 1, Z3)], Z3),
        close_group([Mat2(1, 0, 1, 1, Z9), Mat2(1, 0, 0, 2, Z9)], Z9),
        make_example_group(3).group,
    ]
    for grp in groups:
        rep = h1_loc(grp)
        assert list(rep.h1loc_invariants) == h1_loc_via_restrictions(grp)


# ---------------------------------------------------------------------------
# line actions, stabilizers, inflation
# ---------------------------------------------------------------------------


def test_line_action_requires_diagonal():
    act = ModuleAction.line_of(Z9, 0)
    with pytest.raises(ValueError):
        act.act_rows(Mat2(1, 1, 0, 1, Z9))
    assert act.act_rows(Mat2.diagonal(4, 7, Z9)) == ((4,),)
    assert ModuleAction.line_of(Z9, 1).act_rows(Mat2.diagonal(4, 7, Z9)) == ((7,),)


def test_product_law_on_diagonal_group():
    units = [1, 2, 4, 5, 7, 8]
    elems = tuple(Mat2.diagonal(u, v, Z9) for u in units for v in units)
    diag = MatGroup(elems, Z9)
    full = h1_loc(diag).h1loc_invariants
    line0 = h1_loc(diag, ModuleAction.line_of(Z9, 0)).h1loc_invariants
    line1 = h1_loc(diag, ModuleAction.line_of(Z9, 1)).h1loc_invariants
    prod = 1
    for d in itertools.chain(line0, line1):
        prod *= d
    full_card = 1
    for d in full:
        full_card *= d
    assert full_card == prod


def test_pointwise_stabilizer_and_action_image():
    ex = make_example_group(3)
    coarse = ModuleAction.standard(Z3)
    stab = pointwise_stabilizer(ex.group, coarse)
    assert len(stab) == 9  # elements congruent to the identity mod 3
    q, qact, proj = action_image(ex.group, coarse)
    assert len(q) == 2
    assert qact == ModuleAction.standard(Z3)
    assert all(proj[g] in q for g in ex.group.elements)


def test_inflation_identity_reindex():
    grp = SIGMA3
    action = ModuleAction.standard(Z3)
    stab = MatGroup((Mat2.identity(Z3),), Z3)
    zc = Cocycle.from_flat(grp, action, cocycle_space(grp).generators[0].entries)
    infl = inflation(zc, grp, stab)
    assert infl.values == zc.values


def test_inflation_through_reduction():
    ex = make_example_group(3)
    coarse = ModuleAction.standard(Z3)
    stab = pointwise_stabilizer(ex.group, coarse)
    q, qact, proj = action_image(ex.group, coarse)
    y = Cocycle.zero(q, qact)
    z = inflation(y, ex.group, stab, coarse)
    assert z.is_zero()
    ygens = cocycle_space(q, qact).generators
    if ygens:
        y2 = Cocycle.from_flat(q, qact, ygens[0].entries)
        z2 = inflation(y2, ex.group, stab, coarse)
        assert is_cocycle(z2, exhaustive=True)


def test_inflation_stabilizer_mismatch():
    ex = make_example_group(3)
    coarse = ModuleAction.standard(Z3)
    q, qact, proj = action_image(ex.group, coarse)
    y = Cocycle.zero(q, qact)
    wrong = MatGroup((Mat2.identity(Z9),), Z9)
    with pytest.raises(StabilizerMismatch):
        inflation(y, ex.group, wrong, coarse)


def test_inflation_h1loc_equality_lemma():
    # the kernel-of-action quotient carries the same h1_loc invariants
    ex = make_example_group(3)
    coarse = ModuleAction.standard(Z3)
    q, qact, _ = action_image(ex.group, coarse)
    assert list(h1_loc(ex.group, coarse).h1loc_invariants) == list(h1_loc(q, qact).h1loc_invariants)


# ---------------------------------------------------------------------------
# normal form
# ---------------------------------------------------------------------------


def borel25():
    rho = Mat2.diagonal(1, 7, Z25)  # order 4, stays order 4 mod 5
    tau_u = Mat2(1, 5, 0, 1, Z25)
    tau_l = Mat2(1, 0, 5, 1, Z25)
    return close_group([rho, tau_u, tau_l], Z25, cap=3000), rho


def test_normalize_zero_cocycle():
    grp, rho = borel25()
    parts = special_subgroups(grp)
    z = Cocycle.zero(grp)
    out = normalize_locally_trivial_cocycle(z, rho, parts)
    assert out.is_zero()


def test_normalize_coboundary_vanishes_on_upper_part():
    grp, rho = borel25()
    parts = special_subgroups(grp)
    cb = coboundary_of(grp, (3, 11))
    out = normalize_locally_trivial_cocycle(cb, rho, parts)
    d, su, sl = parts
    upper = close_group(list(d.elements) + list(su.elements), grp.ctx, cap=len(grp) + 1)
    assert all(out.value_of(g).is_zero() for g in upper)
    # still cohomologous to the input
    assert is_coboundary(out.sub(cb)) is not None


def test_normalize_rejects_small_order_rho():
    ex = make_example_group(3)
    parts = special_subgroups(ex.group)
    z = Cocycle.zero(ex.group)
    with pytest.raises(HypothesisViolated):
        normalize_locally_trivial_cocycle(z, ex.delta1, parts)


def test_normalize_rejects_wrong_parts():
    grp, rho = borel25()
    d, su, sl = special_subgroups(grp)
    z = Cocycle.zero(grp)
    with pytest.raises(HypothesisViolated):
        normalize_locally_trivial_cocycle(z, rho, (su, d, sl))


def test_normalize_rejects_non_locally_trivial():
    grp = SIGMA3
    gens = cocycle_space(grp).generators
    noncob = None
    b1 = coboundary_space(grp)
    for g in gens:
        if not b1.contains(g):
            noncob = g
            break
    assert noncob is not None
    zc = Cocycle.from_flat(grp, ModuleAction.standard(Z3), noncob.entries)
    rho = Mat2.identity(Z3)
    with pytest.raises(HypothesisViolated):
        normalize_locally_trivial_cocycle(zc, rho, special_subgroups(grp))


def test_report_serialization_shape():
    ex = make_example_group(3)
    rep = h1_loc(ex.group)
    d = rep.to_json_dict()
    assert set(d) == {"z1", "b1", "h1", "h1loc", "witnesses"}
    assert d["h1loc"] and all(isinstance(x, int) for x in d["h1loc"])
    assert all(len(v) == 2 for w in d["witnesses"] for v in w)
