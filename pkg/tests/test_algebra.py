"""Finite algebra toolkit: identities, clone generation, congruences, linearity,
irreducibility, absorption, and domain classification."""

import itertools

import pytest

import wnucsp.algebra as A
import wnucsp.relations as R
from wnucsp.errors import UsageError
from wnucsp.wnus import (
    NAMED_WNUS,
    dual_discriminator3,
    maj3,
    median3,
    pair_sum3,
    sum3_mod2,
    sum4_mod3,
    sum5_mod4,
    twist3,
)

from conftest import dom, oracle_congruences

D2, D3, D4 = dom(2), dom(3), dom(4)


# --- identity checks -----------------------------------------------------------


def test_zoo_is_special():
    for name, make in NAMED_WNUS.items():
        w = make()
        assert A.is_idempotent(w), name
        assert A.is_wnu(w), name
        assert A.is_special_wnu(w), name


def test_first_projection_is_not_wnu():
    proj1 = A.op_from_function(2, 3, lambda x, y, z: x)
    assert A.is_idempotent(proj1)
    assert not A.is_wnu(proj1)


def test_maj3_and_sum3_identities():
    assert A.is_special_wnu(maj3())
    assert A.is_special_wnu(sum3_mod2())


# --- derive_special_wnu ---------------------------------------------------------


def nonspecial_wnu3() -> A.OperationTable:
    """Idempotent WNU on {0,1,2} violating the special identity.

    One-off patterns: w(y,x,x) = v[y,x] with v chosen so that 2*0 = 1 but
    2*1 = 0 (so 2*(2*0) != 2*0); all-distinct triples map to 2.
    """
    v = {(1, 0): 0, (0, 1): 1, (2, 0): 2, (2, 1): 2, (0, 2): 1, (1, 2): 0}

    def t(x, y, z):
        if x == y == z:
            return x
        if y == z:
            return v[(x, y)]
        if x == z:
            return v[(y, x)]
        if x == y:
            return v[(z, x)]
        return 2

    return A.op_from_function(3, 3, t)


def test_derive_special_identity_cases():
    assert A.derive_special_wnu(maj3()) == maj3()
    assert A.derive_special_wnu(sum3_mod2()) == sum3_mod2()


def test_derive_special_on_nonspecial_wnu():
    w = nonspecial_wnu3()
    assert A.is_wnu(w) and A.is_idempotent(w) and not A.is_special_wnu(w)
    ws = A.derive_special_wnu(w)
    assert A.is_special_wnu(ws)
    # clone membership: the derived table is rediscoverable by generation
    target = tuple(ws.table)
    assert A.clone_member_matching(D3, w, 3, lambda t: t == target) == target


def test_derive_special_rejects_non_wnu():
    proj1 = A.op_from_function(2, 3, lambda x, y, z: x)
    with pytest.raises(UsageError):
        A.derive_special_wnu(proj1)


# --- subuniverse generation -----------------------------------------------------


def test_generate_subuniverse():
    w = twist3()
    assert A.generate_subuniverse({0}, w) == {0}  # idempotence
    assert A.generate_subuniverse({0, 1, 2}, w) == {0, 1, 2}
    # {0,2} is not closed under twist3: w(0,2,2) = 0? recompute via closure
    closure = A.generate_subuniverse({0, 2}, w)
    for combo in itertools.product(sorted(closure), repeat=3):
        assert w.apply(combo) in closure


def test_subuniverses_listing():
    subs = A.subuniverses(D2, maj3())
    assert subs == ((0,), (1,), (0, 1))


# --- congruences ---------------------------------------------------------------


@pytest.mark.parametrize(
    "w,domain,expected_count",
    [
        (maj3(), D2, 2),
        (sum3_mod2(), D2, 2),
        (pair_sum3(), D4, 5),
        (twist3(), D3, 3),
        (sum5_mod4(), D4, 3),
    ],
)
def test_congruence_counts(w, domain, expected_count):
    assert len(A.congruences(domain, w)) == expected_count


@pytest.mark.parametrize(
    "w,domain",
    [
        (maj3(), D2),
        (sum3_mod2(), D2),
        (twist3(), D3),
        (dual_discriminator3(), D3),
        (median3(), D3),
        (sum4_mod3(), D3),
        (pair_sum3(), D4),
        (sum5_mod4(), D4),
    ],
)
def test_congruences_match_partition_enumeration(w, domain):
    got = {c.key() for c in A.congruences(domain, w)}
    assert got == oracle_congruences(domain, w)


def test_congruence_lattice_closed_under_meet_and_join():
    for w, domain in [(pair_sum3(), D4), (twist3(), D3), (sum5_mod4(), D4)]:
        lattice = A.congruences(domain, w)
        keys = {c.key() for c in lattice}
        for c1 in lattice:
            for c2 in lattice:
                meet_classes = [
                    a & b for a in c1.classes for b in c2.classes if a & b
                ]
                meet = A.congruence_from_classes(domain, meet_classes)
                assert meet.key() in keys
                join = A._join(domain, w, c1, c2)
                assert join.key() in keys


def test_maximal_congruences():
    assert [c.key() for c in A.maximal_congruences(D2, maj3())] == [((0,), (1,))]
    maxes = {c.key() for c in A.maximal_congruences(D4, pair_sum3())}
    assert len(maxes) == 3
    assert all(len(k) == 2 for k in maxes)


def test_congruence_preservation_invariant():
    for w, domain in [(twist3(), D3), (sum5_mod4(), D4)]:
        for c in A.congruences(domain, w):
            rel_c = c.as_relation()
            assert R.preserved_by(rel_c, w)


# --- linear structure -----------------------------------------------------------


def test_is_linear_examples():
    ls = A.is_linear(D2, sum3_mod2())
    assert ls is not None and ls.primes == (2,)
    assert ls.to_coords(0) == (0,) and ls.to_coords(1) == (1,)
    assert A.is_linear(D2, maj3()) is None
    one = dom(1)
    ls1 = A.is_linear(one, A.OperationTable(3, 1, (0,)))
    assert ls1 is not None and ls1.primes == ()


def test_is_linear_product():
    ls = A.is_linear(D4, pair_sum3())
    assert ls is not None and ls.primes == (2, 2)
    # round trip: w equals the coordinate sum under the isomorphism
    w = pair_sum3()
    for args in itertools.product(range(4), repeat=3):
        coords = [ls.to_coords(a) for a in args]
        summed = tuple(sum(c[i] for c in coords) % 2 for i in range(2))
        assert ls.from_coords(summed) == w.apply(args)


def test_is_linear_rejects_wrong_arity_sum():
    # Z_3 with the ternary sum is not even idempotent; the 4-ary sum is linear
    assert A.is_linear(D3, sum4_mod3()) is not None
    assert A.is_linear(D4, sum5_mod4()) is None  # Z_4 is not a product of primes


def test_minimal_linear_congruence_examples():
    assert A.minimal_linear_congruence(D2, sum3_mod2()).is_diagonal
    assert A.minimal_linear_congruence(D2, maj3()).n_classes == 1
    assert A.minimal_linear_congruence(D4, pair_sum3()).is_diagonal
    assert A.minimal_linear_congruence(D4, sum5_mod4()).key() == ((0, 2), (1, 3))
    assert A.minimal_linear_congruence(D3, twist3()).key() == ((0, 1), (2,))


def test_linear_round_trip_on_quotients():
    for w, domain in [(twist3(), D3), (sum5_mod4(), D4)]:
        sigma = A.minimal_linear_congruence(domain, w)
        qdom, qop = A.quotient_algebra(domain, w, sigma)
        ls = A.is_linear(qdom, qop)
        assert ls is not None
        for args in itertools.product(qdom.elements, repeat=qop.arity):
            coords = [ls.to_coords(a) for a in args]
            summed = tuple(
                sum(c[i] for c in coords) % p for i, p in enumerate(ls.primes)
            )
            assert ls.from_coords(summed) == qop.apply(args)


# --- irreducible congruences ------------------------------------------------------


def test_irreducibility_affine_diagonal():
    delta = A.diagonal_congruence(D2)
    assert A.is_irreducible_congruence(D2, sum3_mod2(), delta)
    star = A.sigma_star(D2, sum3_mod2(), delta)
    assert star.tuples == set(itertools.product(range(2), repeat=2))


def test_irreducibility_majority_diagonal_reducible():
    delta = A.diagonal_congruence(D2)
    assert not A.is_irreducible_congruence(D2, maj3(), delta)
    with pytest.raises(UsageError):
        A.sigma_star(D2, maj3(), delta)


def test_irreducibility_rejects_full():
    with pytest.raises(UsageError):
        A.is_irreducible_congruence(D2, maj3(), A.full_congruence(D2))


def test_sigma_star_unique_minimal():
    # Z_4 mod-2 kernel: compatible strict supersets have a unique minimum
    sigma = A.minimal_linear_congruence(D4, sum5_mod4())
    assert A.is_irreducible_congruence(D4, sum5_mod4(), sigma)
    star = A.sigma_star(D4, sum5_mod4(), sigma)
    sig_pairs = {(a, b) for c in sigma.classes for a in c for b in c}
    assert sig_pairs < star.tuples


# --- absorption -----------------------------------------------------------------


def test_absorption_examples():
    b = A.find_ternary_absorbing(D2, maj3())
    assert b is not None and b[0] == (0,)
    assert A.find_binary_absorbing(D2, maj3()) is None
    assert A.find_binary_absorbing(D2, sum3_mod2()) is None
    assert A.find_ternary_absorbing(D2, sum3_mod2()) is None


def test_absorption_witness_reverifies():
    for domain, w, k, finder in [
        (D2, maj3(), 3, A.find_ternary_absorbing),
        (D3, dual_discriminator3(), 3, A.find_ternary_absorbing),
        (D3, median3(), 2, A.find_binary_absorbing),
    ]:
        hit = finder(domain, w)
        if hit is None:
            continue
        b, term = hit
        points = list(itertools.product(domain.elements, repeat=k))
        index = {p: i for i, p in enumerate(points)}
        for slot in range(k):
            for fill in itertools.product(b, repeat=k - 1):
                for a in domain.elements:
                    args = fill[:slot] + (a,) + fill[slot:]
                    assert term[index[args]] in set(b)


def test_no_absorption_for_linear_phase_algebras():
    assert A.find_binary_absorbing(D3, twist3()) is None
    assert A.find_ternary_absorbing(D3, twist3()) is None
    assert A.find_binary_absorbing(D4, sum5_mod4()) is None
    assert A.find_ternary_absorbing(D4, sum5_mod4()) is None


# --- classification --------------------------------------------------------------


def test_classify_examples():
    c = A.classify_domain(D2, maj3())
    assert c.kind == "ternary_absorbing" and c.subuniverse == (0,)
    c = A.classify_domain(D2, sum3_mod2())
    assert c.kind == "linear_quotient" and c.congruence.is_diagonal
    assert c.linear.primes == (2,)
    with pytest.raises(UsageError):
        A.classify_domain(dom(1), maj3())


def test_classify_total_on_zoo_subdomains():
    for name, make in NAMED_WNUS.items():
        w = make()
        universe = dom(w.universe_size)
        for sub in A.subuniverses(universe, w):
            if len(sub) < 2:
                continue
            c = A.classify_domain(R.Domain(sub), w)
            assert c.kind in {
                "binary_absorbing",
                "ternary_absorbing",
                "pc_quotient",
                "linear_quotient",
            }
            if c.kind.endswith("absorbing"):
                assert set(c.subuniverse) < set(sub)
            else:
                assert c.congruence.is_proper


def test_classify_pc_quotient_case():
    # a simple nonlinear algebra without absorption must classify as PC:
    # build the three-element rock-paper-scissors-like WNU if it exists in
    # the zoo; otherwise verify classify never claims PC for quotient-linear
    c = A.classify_domain(D4, sum5_mod4())
    assert c.kind == "linear_quotient"
    assert c.congruence.key() == ((0, 2), (1, 3))
