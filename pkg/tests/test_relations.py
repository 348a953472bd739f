"""Relation algebra: projections, con, rectangularity, parallelogram machinery,
essentiality, witness projections, representations, and preservation."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import wnucsp.relations as R
from wnucsp.errors import UsageError
from wnucsp.wnus import maj3, sum3_mod2

from conftest import (
    conjunction_of_projections,
    dom,
    oracle_con,
    oracle_essential,
    oracle_has_parallelogram,
    oracle_parallelogram_closure,
    oracle_rectangular,
    rel,
)

EQ2 = rel([(0, 0), (1, 1)], 2)
EQ3 = rel([(0, 0, 0), (1, 1, 1)], 2)
FULL2 = rel(list(itertools.product(range(2), repeat=2)), 2)
NEQ2 = rel([(0, 1), (1, 0)], 2)


def small_relations(max_size=2, arity=(1, 2, 3)):
    """Hypothesis strategy over small nonempty relations on uniform domains."""

    def build(draw):
        a = draw(st.sampled_from(arity))
        size = draw(st.integers(1, max_size))
        space = list(itertools.product(range(size), repeat=a))
        tuples = draw(st.sets(st.sampled_from(space), min_size=1))
        return rel(sorted(tuples), [size] * a)

    return st.composite(build)()


# --- project -----------------------------------------------------------------


def test_project_examples():
    rho = rel([(0, 0, 1), (1, 1, 0)], 2)
    assert R.project(rho, {0, 2}).tuples == {(0, 1), (1, 0)}
    assert R.project(rho, range(3)).tuples == rho.tuples
    assert R.project(EQ3, {0, 2}).tuples == {(0, 0), (1, 1)}


def test_project_out_of_range():
    with pytest.raises(UsageError):
        R.project(EQ2, {0, 5})
    with pytest.raises(UsageError):
        R.project(EQ2, set())


@settings(max_examples=60)
@given(small_relations())
def test_project_monotone(rho):
    # pr_I(pr_J(rho)) == pr_I(rho) whenever I <= J, with index renumbering
    n = rho.arity
    for j_set in itertools.combinations(range(n), max(1, n - 1)):
        inner = R.project(rho, j_set)
        for r in range(1, len(j_set) + 1):
            for i_set in itertools.combinations(j_set, r):
                positions = [j_set.index(i) for i in i_set]
                assert R.project(inner, positions).tuples == R.project(rho, i_set).tuples


# --- con ---------------------------------------------------------------------


def test_con_examples():
    assert R.con(EQ2, 0).tuples == {(0, 0), (1, 1)}
    assert R.con(FULL2, 0).tuples == set(itertools.product(range(2), repeat=2))
    rho = rel([(0, 0), (0, 1), (1, 1)], 2)
    assert R.con(rho, 0).tuples == set(itertools.product(range(2), repeat=2))


def test_con_empty_relation():
    empty = R.RelationTable(2, (dom(2), dom(2)), frozenset())
    assert R.con(empty, 0).tuples == set()


@settings(max_examples=80)
@given(small_relations(max_size=3, arity=(1, 2, 3)))
def test_con_matches_oracle(rho):
    for i in range(rho.arity):
        assert R.con(rho, i).tuples == oracle_con(rho, i)


# --- subdirect / rectangular -------------------------------------------------


def test_is_subdirect_examples():
    assert R.is_subdirect(NEQ2)
    assert not R.is_subdirect(rel([(0, 0), (0, 1)], 2))
    assert R.is_subdirect(EQ3)


def test_rectangular_examples():
    assert R.is_rectangular(EQ2)
    assert not R.rectangular_at(rel([(0, 0), (0, 1), (1, 1)], 2), 0)
    assert not R.is_rectangular(rel([(0, 0), (0, 1), (1, 1)], 2))
    assert R.is_rectangular(FULL2)


@settings(max_examples=80)
@given(small_relations(max_size=2, arity=(2, 3)))
def test_rectangular_matches_oracle(rho):
    assert R.is_rectangular(rho) == oracle_rectangular(rho)


# --- parallelogram -----------------------------------------------------------


def test_parallelogram_examples():
    assert R.has_parallelogram(EQ2)
    assert not R.has_parallelogram(rel([(0, 0), (0, 1), (1, 0)], 2))
    assert R.has_parallelogram(FULL2)
    assert R.has_parallelogram(rel([(0,), (1,)], 3))  # arity 1 vacuous


def test_parallelogram_closure_examples():
    assert R.parallelogram_closure(rel([(0, 0), (0, 1), (1, 0)], 2)).tuples == set(
        itertools.product(range(2), repeat=2)
    )
    assert R.parallelogram_closure(EQ2).tuples == EQ2.tuples
    assert R.parallelogram_closure(FULL2).tuples == FULL2.tuples


@settings(max_examples=80)
@given(small_relations(max_size=3, arity=(2, 3)))
def test_parallelogram_closure_matches_rule_fixpoint(rho):
    closed = R.parallelogram_closure(rho)
    assert closed.tuples == oracle_parallelogram_closure(rho)
    # idempotent and extensive
    assert rho.tuples <= closed.tuples
    assert R.parallelogram_closure(closed).tuples == closed.tuples
    assert R.has_parallelogram(closed)


@settings(max_examples=80)
@given(small_relations(max_size=3, arity=(2, 3)))
def test_has_parallelogram_matches_oracle(rho):
    assert R.has_parallelogram(rho) == oracle_has_parallelogram(rho)


@settings(max_examples=60)
@given(small_relations(max_size=2, arity=(2, 3)), small_relations(max_size=2, arity=(2, 3)))
def test_parallelogram_closure_monotone(r1, r2):
    if r1.arity != r2.arity or r1.coord_domains != r2.coord_domains:
        return
    union = R.relation(r1.coord_domains, r1.tuples | r2.tuples)
    assert R.parallelogram_closure(r1).tuples <= R.parallelogram_closure(union).tuples


def test_parallelogram_permutation_equivalence():
    # the bipartition form agrees with checking the two-block condition on
    # every variable permutation
    space = list(itertools.product(range(2), repeat=3))
    import random

    rng = random.Random(7)
    for _ in range(120):
        tuples = rng.sample(space, rng.randint(1, 8))
        rho = rel(tuples, 2)
        by_perm = True
        for perm in itertools.permutations(range(3)):
            permd = {tuple(t[p] for p in perm) for t in rho.tuples}
            for cut in (1, 2):
                seen = {}
                for t in permd:
                    seen.setdefault(t[:cut], set()).add(t[cut:])
                owner = {}
                for left, rights in seen.items():
                    for r2 in rights:
                        if r2 in owner and owner[r2] != frozenset(rights):
                            by_perm = False
                        owner.setdefault(r2, frozenset(rights))
        assert R.has_parallelogram(rho) == by_perm


def test_parallelogram_implies_rectangular_and_transitive_con():
    space = list(itertools.product(range(2), repeat=3))
    import random

    rng = random.Random(11)
    for _ in range(100):
        rho = R.parallelogram_closure(rel(rng.sample(space, rng.randint(1, 6)), 2))
        assert R.is_rectangular(rho)
        for i in range(rho.arity):
            c = R.con(rho, i).tuples
            assert all(
                (a, d) in c for a, b in c for b2, d in c if b == b2
            )


# --- essentiality ------------------------------------------------------------


def test_is_essential_examples():
    assert R.is_essential(EQ2)
    assert not R.is_essential(FULL2)
    assert not R.is_essential(EQ3)


@settings(max_examples=100)
@given(small_relations(max_size=3, arity=(1, 2, 3)))
def test_is_essential_matches_full_scan(rho):
    assert R.is_essential(rho) == oracle_essential(rho)


def test_min_witness_projection_traces():
    assert R.min_witness_projection(EQ3, (0, 0, 1)) == {0, 2}
    assert R.min_witness_projection(EQ2, (0, 1)) == {0, 1}
    # relation missing only one full-support tuple, all projections full
    space = [t for t in itertools.product(range(2), repeat=3) if t != (1, 1, 1)]
    rho = rel(space, 2)
    assert R.min_witness_projection(rho, (1, 1, 1)) == {0, 1, 2}


def test_min_witness_projection_rejects_members():
    with pytest.raises(UsageError):
        R.min_witness_projection(EQ2, (0, 0))


@settings(max_examples=80)
@given(small_relations(max_size=2, arity=(2, 3)))
def test_min_witness_projection_properties(rho):
    outside = [t for t in itertools.product(*(d.elements for d in rho.coord_domains)) if t not in rho.tuples]
    for alpha in outside[:4]:
        coords = sorted(R.min_witness_projection(rho, alpha))
        proj = R.project(rho, coords)
        assert tuple(alpha[i] for i in coords) not in proj.tuples
        assert R.is_essential(proj)


# --- essential representation -------------------------------------------------


def test_essential_representation_examples():
    g = R.essential_representation(EQ3)
    assert conjunction_of_projections(EQ3, g) == EQ3.tuples
    assert all(R.is_essential(R.project(EQ3, s)) for s in g)
    assert R.essential_representation(EQ2) == {frozenset({0, 1})}
    assert conjunction_of_projections(FULL2, R.essential_representation(FULL2)) == FULL2.tuples


@settings(max_examples=100)
@given(small_relations(max_size=3, arity=(1, 2, 3)))
def test_essential_representation_properties(rho):
    g = R.essential_representation(rho)
    assert conjunction_of_projections(rho, g) == rho.tuples
    for s in g:
        assert R.is_essential(R.project(rho, s))
    # antichain
    for s in g:
        for s2 in g:
            assert not (s < s2)
    if R.is_essential(rho):
        assert g == {frozenset(range(rho.arity))}


def test_essential_representation_high_arity_conjunction():
    # arity 5 over a 3-element domain, per the stated enumeration bound
    space = list(itertools.product(range(3), repeat=5))
    import random

    rng = random.Random(3)
    for _ in range(5):
        rho = rel(rng.sample(space, 40), 3)
        g = R.essential_representation(rho)
        assert conjunction_of_projections(rho, g) == rho.tuples


# --- preservation ------------------------------------------------------------


def test_preserved_by_examples():
    assert R.preserved_by(EQ2, maj3())
    assert not R.preserved_by(rel([(0, 0), (0, 1), (1, 0)], 2), sum3_mod2())
    proj2 = R.project  # any relation is preserved by a projection operation
    from wnucsp.algebra import op_from_function

    first_of_three = op_from_function(2, 3, lambda x, y, z: x)
    assert R.preserved_by(rel([(0, 1), (1, 0), (0, 0)], 2), first_of_three)


def test_preserved_by_domain_mismatch():
    from wnucsp.algebra import op_from_function

    tiny = op_from_function(1, 3, lambda x, y, z: 0)
    with pytest.raises(UsageError):
        R.preserved_by(EQ2, tiny)
