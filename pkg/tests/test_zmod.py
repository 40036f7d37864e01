"""Tests for exact linear algebra over Z/p^nZ.

Frozen values here were computed by the enumeration oracles in this file
(span/kernel/solution-set enumeration over small rings) and are asserted
as literals where the operations under test could regress silently.
"""

import itertools

import pytest
from hypothesis import given, settings, strategies as st

from cohomlab.errors import DimensionMismatch, NotASubmodule, NotAUnit
from cohomlab.zmod import (
    ModulusContext,
    ResidueMatrix,
    ResidueVector,
    Submodule,
    annihilator,
    canonical_row_form,
    image_contains,
    kernel,
    quotient_decomposition,
    quotient_invariants,
    solve_linear,
    unit_inverse,
)

Z9 = ModulusContext(3, 2)
Z3 = ModulusContext(3, 1)
Z4 = ModulusContext(2, 2)
Z25 = ModulusContext(5, 2)


# ---------------------------------------------------------------------------
# enumeration oracles
# ---------------------------------------------------------------------------


def enumerate_span(rows, rank, ctx):
    """All Z/p^n-linear combinations of the rows, as a frozenset of tuples."""
    N = ctx.modulus
    seen = {(0,) * rank}
    frontier = [(0,) * rank]
    while frontier:
        v = frontier.pop()
        for row in rows:
            w = tuple((a + b) % N for a, b in zip(v, row))
            if w not in seen:
                seen.add(w)
                frontier.append(w)
    return frozenset(seen)


def brute_kernel(m):
    N = m.ctx.modulus
    out = set()
    for x in itertools.product(range(N), repeat=m.cols):
        if m.mul_vec(x).is_zero():
            out.add(x)
    return out


def brute_solutions(m, b):
    N = m.ctx.modulus
    return {
        x
        for x in itertools.product(range(N), repeat=m.cols)
        if tuple(m.mul_vec(x)) == tuple(b)
    }


def brute_invariants(s_set, t_set, ctx):
    """Invariant factors of the quotient of two enumerated submodules."""
    p, n = ctx.p, ctx.n
    sizes = []
    cur = s_set
    for _ in range(n + 1):
        summed = {tuple((a + b) % ctx.modulus for a, b in zip(x, y)) for x in cur for y in t_set}
        sizes.append(len(summed) // len(t_set))
        cur = {tuple((p * a) % ctx.modulus for a in x) for x in cur}
    logs = []
    for q in sizes:
        e = 0
        while q > 1:
            q //= p
            e += 1
        logs.append(e)
    invs = []
    for j in range(1, n + 1):
        upper = logs[j - 1] - logs[j]
        lower = logs[j] - logs[j + 1] if j + 1 <= n else 0
        invs.extend([p**j] * (upper - lower))
    return sorted(invs)


def small_contexts():
    return [Z3, Z9, Z4, ModulusContext(2, 3), ModulusContext(5, 1)]


# ---------------------------------------------------------------------------
# ModulusContext / unit_inverse
# ---------------------------------------------------------------------------


def test_context_rejects_bad_parameters():
    with pytest.raises(ValueError):
        ModulusContext(4, 1)
    with pytest.raises(ValueError):
        ModulusContext(1, 2)
    with pytest.raises(ValueError):
        ModulusContext(3, 0)


def test_context_modulus():
    assert Z9.modulus == 9
    assert ModulusContext(2, 6).modulus == 64


def test_unit_inverse_examples():
    assert unit_inverse(2, Z9) == 5
    assert unit_inverse(1, ModulusContext(2, 1)) == 1
    with pytest.raises(NotAUnit):
        unit_inverse(6, Z9)
    with pytest.raises(NotAUnit):
        unit_inverse(0, Z3)
    with pytest.raises(ValueError):
        unit_inverse(9, Z9)


@pytest.mark.parametrize(
    "ctx",
    [ModulusContext(2, 6), ModulusContext(3, 4), ModulusContext(5, 3), ModulusContext(7, 2), ModulusContext(11, 2), ModulusContext(13, 1)],
)
def test_unit_inverse_exhaustive(ctx):
    for a in range(ctx.modulus):
        if a % ctx.p:
            assert (unit_inverse(a, ctx) * a) % ctx.modulus == 1
        else:
            with pytest.raises(NotAUnit):
                unit_inverse(a, ctx)


# ---------------------------------------------------------------------------
# canonical_row_form
# ---------------------------------------------------------------------------


def test_canonical_row_form_zero_matrix_is_empty():
    m = ResidueMatrix.from_rows([[0, 0], [0, 0]], Z9)
    h = canonical_row_form(m)
    assert h.rows == 0 and h.cols == 2


def test_canonical_row_form_identity_fixed():
    m = ResidueMatrix.from_rows([[1, 0], [0, 1]], Z9)
    assert canonical_row_form(m).row_list() == [[1, 0], [0, 1]]


def test_canonical_row_form_frozen_example():
    # span{(3,3),(0,3)} = span{(3,0),(0,3)} in (Z/9)^2, 9 elements
    m = ResidueMatrix.from_rows([[3, 3], [0, 3]], Z9)
    h = canonical_row_form(m)
    assert h.row_list() == [[3, 0], [0, 3]]
    assert enumerate_span([[3, 3], [0, 3]], 2, Z9) == enumerate_span(h.row_list(), 2, Z9)


def test_canonical_row_form_unique_per_span():
    # every spanning subset of a fixed submodule canonicalizes identically
    target = enumerate_span([[3, 0], [0, 3]], 2, Z9)
    vecs = sorted(target)
    hits = 0
    for pair in itertools.combinations(vecs, 2):
        if enumerate_span(pair, 2, Z9) == target:
            hits += 1
            h = canonical_row_form(ResidueMatrix.from_rows(pair, Z9))
            assert h.row_list() == [[3, 0], [0, 3]]
    assert hits > 1


@settings(max_examples=120, deadline=None)
@given(st.data())
def test_canonical_row_form_idempotent_and_span_preserving(data):
    ctx = data.draw(st.sampled_from(small_contexts()))
    rank = data.draw(st.integers(min_value=1, max_value=3))
    nrows = data.draw(st.integers(min_value=1, max_value=3))
    rows = [
        [data.draw(st.integers(min_value=0, max_value=ctx.modulus - 1)) for _ in range(rank)]
        for _ in range(nrows)
    ]
    m = ResidueMatrix.from_rows(rows, ctx, cols=rank)
    h = canonical_row_form(m)
    assert canonical_row_form(h).row_list() == h.row_list()
    assert enumerate_span(rows, rank, ctx) == enumerate_span(h.row_list(), rank, ctx)
    # ordered by pivot column, pivots are p-powers, entries above reduced
    pivots = []
    for row in h.row_list():
        j = next(k for k, e in enumerate(row) if e)
        pivots.append(j)
        piv = row[j]
        assert piv == ctx.p ** ctx.valuation(piv)
    assert pivots == sorted(pivots) and len(set(pivots)) == len(pivots)


# ---------------------------------------------------------------------------
# solve_linear / image_contains / kernel
# ---------------------------------------------------------------------------


def test_solve_linear_square_example():
    m = ResidueMatrix.from_rows([[0, 6], [6, 7]], Z9)
    b = ResidueVector((0, 6), Z9)
    x = solve_linear(m, b)
    assert x is not None and tuple(m.mul_vec(x)) == (0, 6)
    assert tuple(m.mul_vec((0, 6))) == (0, 6)  # the known witness also solves


def test_solve_linear_identity():
    m = ResidueMatrix.from_rows([[1, 0], [0, 1]], Z9)
    assert tuple(solve_linear(m, ResidueVector((4, 7), Z9))) == (4, 7)


def test_solve_linear_unsolvable():
    m = ResidueMatrix.from_rows([[3, 0], [0, 3]], Z9)
    assert solve_linear(m, ResidueVector((1, 0), Z9)) is None


def test_solve_linear_dimension_mismatch():
    m = ResidueMatrix.from_rows([[1, 0], [0, 1]], Z9)
    with pytest.raises(DimensionMismatch):
        solve_linear(m, ResidueVector((1, 0, 0), Z9))


def test_kernel_identity_trivial():
    assert kernel(ResidueMatrix.from_rows([[1, 0], [0, 1]], Z9)).is_zero()


def test_kernel_zero_matrix_mod3_is_everything():
    m = ResidueMatrix.from_rows([[3, 3], [0, 3]], Z3)
    assert kernel(m).cardinality() == 9


def test_kernel_unipotent_difference():
    # sigma - I = [[0,1],[0,0]] over Z/3: kernel is the first coordinate line
    k = kernel(ResidueMatrix.from_rows([[0, 1], [0, 0]], Z3))
    assert k.cardinality() == 3
    assert [list(g.entries) for g in k.generators] == [[1, 0]]


@settings(max_examples=120, deadline=None)
@given(st.data())
def test_solve_and_kernel_match_enumeration(data):
    ctx = data.draw(st.sampled_from(small_contexts()))
    rows = data.draw(st.integers(min_value=1, max_value=3))
    cols = data.draw(st.integers(min_value=1, max_value=3))
    entries = [data.draw(st.integers(min_value=0, max_value=ctx.modulus - 1)) for _ in range(rows * cols)]
    m = ResidueMatrix(rows, cols, tuple(entries), ctx)
    b = ResidueVector(
        tuple(data.draw(st.integers(min_value=0, max_value=ctx.modulus - 1)) for _ in range(rows)), ctx
    )
    sols = brute_solutions(m, b)
    x = solve_linear(m, b)
    assert (x is not None) == bool(sols)
    if x is not None:
        assert tuple(x) in sols
    assert image_contains(m, b) == bool(sols)
    ker = kernel(m)
    assert {tuple(v) for v in ker.vectors()} == brute_kernel(m)


def test_image_contains_zero_cases():
    z = ResidueMatrix.from_rows([[0, 0], [0, 0]], Z9)
    assert image_contains(z, ResidueVector((0, 0), Z9))
    assert not image_contains(z, ResidueVector((0, 3), Z9))


# ---------------------------------------------------------------------------
# annihilator duality
# ---------------------------------------------------------------------------


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_annihilator_reflexive(data):
    ctx = data.draw(st.sampled_from(small_contexts()))
    rank = data.draw(st.integers(min_value=1, max_value=3))
    nrows = data.draw(st.integers(min_value=0, max_value=3))
    rows = [
        [data.draw(st.integers(min_value=0, max_value=ctx.modulus - 1)) for _ in range(rank)]
        for _ in range(nrows)
    ]
    s = Submodule.span(rows, rank, ctx)
    ann = annihilator(s)
    N = ctx.modulus
    for g in s.generators:
        for y in ann.generators:
            assert sum(a * b for a, b in zip(g, y)) % N == 0
    assert annihilator(ann) == s
    assert s.cardinality() * ann.cardinality() == N**rank


# ---------------------------------------------------------------------------
# quotient invariants
# ---------------------------------------------------------------------------


def test_quotient_trivial_when_equal():
    s = Submodule.span([[1, 0], [0, 1]], 2, Z9)
    assert quotient_invariants(s, s) == []


def test_quotient_full_by_line_mod3():
    s = Submodule.span([[1, 0], [0, 1]], 2, Z3)
    t = Submodule.span([[1, 0]], 2, Z3)
    assert quotient_invariants(s, t) == [3]


def test_quotient_rejects_non_submodule():
    s = Submodule.span([[3, 0]], 2, Z9)
    t = Submodule.span([[0, 3]], 2, Z9)
    with pytest.raises(NotASubmodule):
        quotient_invariants(s, t)


def test_quotient_full_by_zero_mod9():
    s = Submodule.span([[1, 0], [0, 1]], 2, Z9)
    assert quotient_invariants(s, Submodule.zero(2, Z9)) == [9, 9]


def test_quotient_mixed_orders():
    s = Submodule.span([[1, 0], [0, 3]], 2, Z9)
    assert quotient_invariants(s, Submodule.zero(2, Z9)) == [3, 9]
    t = Submodule.span([[3, 0]], 2, Z9)
    assert quotient_invariants(s, t) == [3, 3]


def test_quotient_witnesses_generate():
    s = Submodule.span([[1, 0], [0, 1]], 2, Z9)
    t = Submodule.span([[3, 0], [0, 3]], 2, Z9)
    invs, wits = quotient_decomposition(s, t)
    assert invs == [3, 3]
    assert len(wits) == 2
    # the witnesses plus t must regenerate s
    regen = Submodule.span([list(w.entries) for w in wits] + [list(g.entries) for g in t.generators], 2, Z9)
    assert regen == s


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_quotient_invariants_match_enumeration(data):
    ctx = data.draw(st.sampled_from([Z3, Z9, Z4]))
    rank = 2
    s_rows = [
        [data.draw(st.integers(min_value=0, max_value=ctx.modulus - 1)) for _ in range(rank)]
        for _ in range(data.draw(st.integers(min_value=0, max_value=2)))
    ]
    s = Submodule.span(s_rows, rank, ctx)
    # build t inside s by scaling/selecting generators
    t_rows = []
    for g in s.generators:
        k = data.draw(st.integers(min_value=0, max_value=ctx.modulus - 1))
        t_rows.append([(k * e) % ctx.modulus for e in g.entries])
    t = Submodule.span(t_rows, rank, ctx)
    got = quotient_invariants(s, t)
    s_set = {tuple(v) for v in s.vectors()}
    t_set = {tuple(v) for v in t.vectors()}
    assert got == brute_invariants(s_set, t_set, ctx)
    prod = 1
    for d in got:
        prod *= d
    assert prod == s.cardinality() // t.cardinality()
    for i in range(len(got) - 1):
        assert got[i + 1] % got[i] == 0


def test_submodule_coset_reduce_canonical():
    s = Submodule.span([[3, 0], [0, 3]], 2, Z9)
    reps = {tuple(s.coset_reduce((a, b))) for a in range(9) for b in range(9)}
    assert len(reps) == 81 // 9
    for v in s.vectors():
        assert tuple(s.coset_reduce(v.entries)) == (0, 0)
