"""Finite algebras (D; w) for a shared m-ary operation w.

Provides the identity checks on w, clone generation at a fixed arity,
congruence lattices, quotients, detection of linear structure (products of
prime cyclic groups under the m-ary sum), irreducible congruences with
their minimal compatible extensions, absorbing subuniverses, and the
classification of a domain that routes the solver's reduction steps.

Operations act on raw element values; a domain is any subset of the
operation's universe closed under it.  Heavy computations are cached per
(domain, operation) since the solver revisits the same algebras constantly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .closure import close_vectors, find_in_closure
from .errors import AlgorithmInvariantError, ResourceBudgetError, UsageError
from .relations import Domain, RelationTable, relation

__all__ = [
    "OperationTable",
    "Congruence",
    "LinearStructure",
    "DomainClassification",
    "is_idempotent",
    "is_wnu",
    "is_special_wnu",
    "derive_special_wnu",
    "generate_subuniverse",
    "close_tuple_set",
    "congruences",
    "maximal_congruences",
    "principal_congruence",
    "minimal_congruences_above",
    "quotient_algebra",
    "is_linear",
    "minimal_linear_congruence",
    "is_irreducible_congruence",
    "sigma_star",
    "find_binary_absorbing",
    "find_ternary_absorbing",
    "classify_domain",
    "generate_terms",
    "subuniverses",
    "op_from_function",
    "congruence_from_classes",
    "clone_member_matching",
    "diagonal_congruence",
    "full_congruence",
]

CLONE_BUDGET = 200_000


@dataclass(frozen=True)
class OperationTable:
    """A total m-ary operation on {0..universe_size-1} stored as a flat table."""

    arity: int
    universe_size: int
    table: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.arity < 1:
            raise UsageError("operation arity must be >= 1")
        if len(self.table) != self.universe_size**self.arity:
            raise UsageError("operation table has wrong size")
        if any(v < 0 or v >= self.universe_size for v in self.table):
            raise UsageError("operation table value out of range")

    def apply(self, args: tuple[int, ...]) -> int:
        idx = 0
        for a in args:
            idx = idx * self.universe_size + a
        return self.table[idx]


def op_from_function(universe_size: int, arity: int, fn) -> OperationTable:
    table = tuple(
        fn(*args) for args in itertools.product(range(universe_size), repeat=arity)
    )
    return OperationTable(arity, universe_size, table)


def is_idempotent(w: OperationTable) -> bool:
    return all(w.apply((x,) * w.arity) == x for x in range(w.universe_size))


def is_wnu(w: OperationTable) -> bool:
    """All placements of a single deviating argument agree."""
    if w.arity < 2:
        return True
    m, n = w.arity, w.universe_size
    for x in range(n):
        for y in range(n):
            base = w.apply((y,) + (x,) * (m - 1))
            for pos in range(1, m):
                args = [x] * m
                args[pos] = y
                if w.apply(tuple(args)) != base:
                    return False
    return True


def is_special_wnu(w: OperationTable) -> bool:
    """Idempotent WNU with x*(x*y) = x*y for x*y = w(x,..,x,y)."""
    if not (is_idempotent(w) and is_wnu(w)):
        return False
    m = w.arity
    for x in range(w.universe_size):
        for y in range(w.universe_size):
            xy = w.apply((x,) * (m - 1) + (y,))
            if w.apply((x,) * (m - 1) + (xy,)) != xy:
                return False
    return True


# ---------------------------------------------------------------------------
# closure machinery


def close_tuple_set(
    seeds,
    w: OperationTable,
    domains: tuple[Domain, ...] | None = None,
    budget: int | None = None,
) -> frozenset[tuple[int, ...]]:
    """Least superset of the seed tuples closed under coordinatewise w.

    If the coordinate domains are supplied, closure stops as soon as the full
    product is reached (the full relation is always closed).
    """
    seeds = set(map(tuple, seeds))
    if not seeds:
        return frozenset()
    full_size = None
    if domains is not None:
        full_size = 1
        for d in domains:
            full_size *= d.size
    if full_size is not None and len(seeds) >= full_size:
        return frozenset(seeds)
    return frozenset(close_vectors(seeds, w, stop_size=full_size, work_budget=budget))


def generate_subuniverse(gens, w: OperationTable) -> frozenset[int]:
    """Least superset of gens closed under w."""
    if not gens:
        raise UsageError("generator set must be nonempty")
    closed = close_vectors([(g,) for g in gens], w, stop_size=w.universe_size)
    return frozenset(v[0] for v in closed)


# ---------------------------------------------------------------------------
# congruences


@dataclass(frozen=True)
class Congruence:
    """A partition of a domain preserved by the algebra's operation.

    Classes are canonically ordered by their smallest element.
    """

    domain: Domain
    classes: tuple[frozenset[int], ...]

    def __post_init__(self) -> None:
        seen: set[int] = set()
        for c in self.classes:
            if not c or (seen & c):
                raise UsageError("classes must be nonempty and disjoint")
            seen |= c
        if seen != set(self.domain.elements):
            raise UsageError("classes must cover the domain")
        if tuple(min(c) for c in self.classes) != tuple(
            sorted(min(c) for c in self.classes)
        ):
            raise UsageError("classes must be ordered by least element")

    @property
    def n_classes(self) -> int:
        return len(self.classes)

    @property
    def is_proper(self) -> bool:
        return self.n_classes >= 2

    @property
    def is_diagonal(self) -> bool:
        return self.n_classes == self.domain.size

    def class_of(self, x: int) -> frozenset[int]:
        for c in self.classes:
            if x in c:
                return c
        raise UsageError(f"{x} not in domain")

    def class_index(self, x: int) -> int:
        for i, c in enumerate(self.classes):
            if x in c:
                return i
        raise UsageError(f"{x} not in domain")

    def related(self, a: int, b: int) -> bool:
        return self.class_index(a) == self.class_index(b)

    def refines(self, other: "Congruence") -> bool:
        return all(any(c <= d for d in other.classes) for c in self.classes)

    def key(self) -> tuple:
        return tuple(tuple(sorted(c)) for c in self.classes)

    def as_relation(self) -> RelationTable:
        pairs = {(a, b) for c in self.classes for a in c for b in c}
        return relation((self.domain, self.domain), pairs)


def congruence_from_classes(dom: Domain, classes) -> Congruence:
    ordered = tuple(sorted((frozenset(c) for c in classes), key=min))
    return Congruence(dom, ordered)


def diagonal_congruence(dom: Domain) -> Congruence:
    return congruence_from_classes(dom, [{x} for x in dom.elements])


def full_congruence(dom: Domain) -> Congruence:
    return congruence_from_classes(dom, [set(dom.elements)])


class _UnionFind:
    def __init__(self, items):
        self.parent = {x: x for x in items}

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[ra] = rb
        return True

    def classes(self):
        groups: dict = {}
        for x in self.parent:
            groups.setdefault(self.find(x), set()).add(x)
        return list(groups.values())


def _congruence_closure(dom: Domain, w: OperationTable, seed_pairs) -> Congruence:
    """Least congruence containing the seed pairs.

    Merges propagate through single-coordinate substitutions; transitivity
    is inherent in the union-find representation.
    """
    uf = _UnionFind(dom.elements)
    queue: list[tuple[int, int]] = []
    for a, b in seed_pairs:
        if uf.union(a, b):
            queue.append((a, b))
    m = w.arity
    elems = dom.elements
    while queue:
        a, b = queue.pop()
        for j in range(m):
            for rest in itertools.product(elems, repeat=m - 1):
                u = rest[:j] + (a,) + rest[j:]
                v = rest[:j] + (b,) + rest[j:]
                x, y = w.apply(u), w.apply(v)
                if uf.union(x, y):
                    queue.append((x, y))
    return congruence_from_classes(dom, uf.classes())


def principal_congruence(dom: Domain, w: OperationTable, a: int, b: int) -> Congruence:
    return _congruence_closure(dom, w, [(a, b)])


def _join(dom: Domain, w: OperationTable, s1: Congruence, s2: Congruence) -> Congruence:
    pairs = [(min(c), x) for c in s1.classes for x in c] + [
        (min(c), x) for c in s2.classes for x in c
    ]
    return _congruence_closure(dom, w, pairs)


_congruence_cache: dict[tuple[Domain, OperationTable], tuple[Congruence, ...]] = {}


def congruences(dom: Domain, w: OperationTable) -> tuple[Congruence, ...]:
    """The full congruence lattice, generated by joins of principal congruences."""
    key = (dom, w)
    cached = _congruence_cache.get(key)
    if cached is not None:
        return cached
    found: dict[tuple, Congruence] = {}
    delta = diagonal_congruence(dom)
    found[delta.key()] = delta
    principals = []
    for a, b in itertools.combinations(dom.elements, 2):
        p = principal_congruence(dom, w, a, b)
        principals.append(p)
        found.setdefault(p.key(), p)
    frontier = list(found.values())
    while frontier:
        new: list[Congruence] = []
        for s in frontier:
            for p in principals:
                j = _join(dom, w, s, p)
                if j.key() not in found:
                    found[j.key()] = j
                    new.append(j)
        frontier = new
    result = tuple(sorted(found.values(), key=lambda c: c.key()))
    _congruence_cache[key] = result
    return result


def maximal_congruences(dom: Domain, w: OperationTable) -> tuple[Congruence, ...]:
    """Proper congruences maximal under refinement."""
    proper = [c for c in congruences(dom, w) if c.is_proper]
    return tuple(
        c
        for c in proper
        if not any(o is not c and c.refines(o) and c.key() != o.key() for o in proper)
    )


def minimal_congruences_above(
    dom: Domain, w: OperationTable, theta: Congruence
) -> tuple[Congruence, ...]:
    """Minimal congruences strictly coarser than theta (may include the full one)."""
    above = [
        c
        for c in congruences(dom, w)
        if theta.refines(c) and c.key() != theta.key()
    ]
    return tuple(
        c
        for c in above
        if not any(o.key() != c.key() and o.refines(c) for o in above)
    )


def quotient_algebra(
    dom: Domain, w: OperationTable, sigma: Congruence
) -> tuple[Domain, OperationTable]:
    """The factor algebra on class indices 0..k-1, in canonical class order."""
    k = sigma.n_classes
    reps = [min(c) for c in sigma.classes]
    qdom = Domain(tuple(range(k)))

    def qop(*args: int) -> int:
        value = w.apply(tuple(reps[a] for a in args))
        return sigma.class_index(value)

    table = tuple(qop(*args) for args in itertools.product(range(k), repeat=w.arity))
    return qdom, OperationTable(w.arity, k, table)


# ---------------------------------------------------------------------------
# linear structure


@dataclass(frozen=True)
class LinearStructure:
    """An isomorphism onto a product of prime cyclic groups under the m-ary sum."""

    primes: tuple[int, ...]
    zero: int
    iso: tuple[tuple[int, tuple[int, ...]], ...]  # (element, coordinates)

    def to_coords(self, x: int) -> tuple[int, ...]:
        for e, c in self.iso:
            if e == x:
                return c
        raise UsageError(f"{x} not in linear structure")

    def from_coords(self, coords: tuple[int, ...]) -> int:
        for e, c in self.iso:
            if c == tuple(coords):
                return e
        raise UsageError(f"coordinates {coords} not in linear structure")


def _group_from_zero(dom: Domain, w: OperationTable, zero: int):
    """Candidate abelian group x+y := w(x, y, zero, .., zero); None if not a group."""
    m = w.arity
    pad = (zero,) * (m - 2) if m >= 2 else ()

    def add(a: int, b: int) -> int:
        if m == 1:
            return w.apply((a,))
        return w.apply((a, b) + pad)

    table = {(a, b): add(a, b) for a in dom.elements for b in dom.elements}
    for a in dom.elements:
        if table[(a, zero)] != a or table[(zero, a)] != a:
            return None
    for a in dom.elements:
        for b in dom.elements:
            if table[(a, b)] != table[(b, a)]:
                return None
            for c in dom.elements:
                if table[(table[(a, b)], c)] != table[(a, table[(b, c)])]:
                    return None
    for a in dom.elements:
        if not any(table[(a, b)] == zero for b in dom.elements):
            return None
    return table


def _prime_factors(n: int) -> list[int]:
    out = []
    p = 2
    while p * p <= n:
        while n % p == 0:
            out.append(p)
            n //= p
        p += 1
    if n > 1:
        out.append(n)
    return out


_linear_cache: dict[tuple[Domain, OperationTable], LinearStructure | None] = {}


def is_linear(dom: Domain, w: OperationTable) -> LinearStructure | None:
    """Isomorphism onto (Z_p1 x .. x Z_ps; x1+..+xm), or None.

    Tries every element as the zero, reconstructs the binary sum from w,
    and verifies w agrees with the iterated sum on every argument tuple.
    """
    key = (dom, w)
    if key in _linear_cache:
        return _linear_cache[key]
    result = _find_linear(dom, w)
    _linear_cache[key] = result
    return result


def _find_linear(dom: Domain, w: OperationTable) -> LinearStructure | None:
    if dom.size == 1:
        return LinearStructure((), dom.elements[0], ((dom.elements[0], ()),))
    for zero in dom.elements:
        table = _group_from_zero(dom, w, zero)
        if table is None:
            continue

        def add(a, b):
            return table[(a, b)]

        # every nonzero element must have prime order (elementary per prime)
        primes_of_size = sorted(set(_prime_factors(dom.size)))
        ok = True
        for x in dom.elements:
            order = _order(add, zero, x)
            if order != 1 and order not in primes_of_size:
                ok = False
                break
        if not ok:
            continue
        # verify w is the m-ary sum
        good = True
        for args in itertools.product(dom.elements, repeat=w.arity):
            acc = zero
            for a in args:
                acc = add(acc, a)
            if w.apply(args) != acc:
                good = False
                break
        if not good:
            continue
        # basis per prime, greedily over sorted elements
        primes: list[int] = []
        basis: list[int] = []
        for p in primes_of_size:
            members = [x for x in dom.elements if x != zero and _order(add, zero, x) == p]
            span = {zero}
            for x in sorted(members):
                if x in span:
                    continue
                basis.append(x)
                primes.append(p)
                new_span = set()
                for s in span:
                    acc = s
                    for _ in range(p):
                        new_span.add(acc)
                        acc = add(acc, x)
                span = new_span
        coords_of: dict[int, tuple[int, ...]] = {}
        for coeffs in itertools.product(*(range(p) for p in primes)):
            acc = zero
            for c, b, p in zip(coeffs, basis, primes):
                for _ in range(c):
                    acc = add(acc, b)
            if acc in coords_of:
                coords_of = {}
                break
            coords_of[acc] = coeffs
        if len(coords_of) != dom.size:
            continue
        iso = tuple(sorted(coords_of.items()))
        return LinearStructure(tuple(primes), zero, iso)
    return None


def _order(add, zero: int, x: int) -> int:
    order, acc = 1, x
    while acc != zero:
        acc = add(acc, x)
        order += 1
    return order


_min_linear_cache: dict[tuple[Domain, OperationTable], Congruence] = {}


def minimal_linear_congruence(dom: Domain, w: OperationTable) -> Congruence:
    """The least congruence whose quotient is linear.

    The full congruence always qualifies (one-element quotient), and the
    least such congruence is unique; a tie would signal a broken premise.
    """
    key = (dom, w)
    cached = _min_linear_cache.get(key)
    if cached is not None:
        return cached
    candidates = []
    for sigma in congruences(dom, w):
        qdom, qop = quotient_algebra(dom, w, sigma)
        if is_linear(qdom, qop) is not None:
            candidates.append(sigma)
    minimal = [
        c
        for c in candidates
        if not any(o.key() != c.key() and o.refines(c) for o in candidates)
    ]
    if len(minimal) != 1:
        raise AlgorithmInvariantError(
            f"expected a unique minimal linear congruence, found {len(minimal)}"
        )
    _min_linear_cache[key] = minimal[0]
    return minimal[0]


# ---------------------------------------------------------------------------
# irreducible congruences


def _compatible_closure(
    dom: Domain, w: OperationTable, sigma: Congruence, extra: tuple[int, int]
) -> frozenset[tuple[int, int]]:
    """Least sigma-compatible subuniverse of D^2 containing sigma and one extra pair."""
    pairs: set[tuple[int, int]] = {(a, b) for c in sigma.classes for a in c for b in c}
    pairs.add(extra)
    full = dom.size * dom.size
    classes = {x: sigma.class_of(x) for x in dom.elements}
    while len(pairs) < full:
        # compatibility saturation in both coordinates
        saturated = set(pairs)
        for x, y in list(pairs):
            for x2 in classes[x]:
                saturated.add((x2, y))
            for y2 in classes[y]:
                saturated.add((x, y2))
        grown = set(close_vectors(saturated, w, stop_size=full))
        if grown == pairs:
            break
        pairs = grown
    return frozenset(pairs)


_irred_cache: dict[tuple[Domain, OperationTable, tuple], tuple[bool, frozenset | None]] = {}


def _irreducibility(dom: Domain, w: OperationTable, sigma: Congruence):
    key = (dom, w, sigma.key())
    cached = _irred_cache.get(key)
    if cached is not None:
        return cached
    sigma_pairs = {(a, b) for c in sigma.classes for a in c for b in c}
    outside = [
        (a, b)
        for a in dom.elements
        for b in dom.elements
        if (a, b) not in sigma_pairs
    ]
    if not outside:
        raise UsageError("irreducibility is defined for proper congruences")
    closures = [_compatible_closure(dom, w, sigma, pair) for pair in outside]
    meet = frozenset.intersection(*closures)
    if meet == frozenset(sigma_pairs):
        result = (False, None)
    else:
        result = (True, meet)
    _irred_cache[key] = result
    return result


def is_irreducible_congruence(dom: Domain, w: OperationTable, sigma: Congruence) -> bool:
    """True iff sigma is not the meet of its strictly larger compatible relations.

    Compatible relations are subuniverses of D^2 containing sigma whose two
    variables are both compatible with sigma.
    """
    if not sigma.is_proper:
        raise UsageError("irreducibility is defined for proper congruences")
    return _irreducibility(dom, w, sigma)[0]


def sigma_star(dom: Domain, w: OperationTable, sigma: Congruence) -> RelationTable:
    """The unique minimal compatible relation strictly containing an irreducible sigma."""
    irreducible, meet = _irreducibility(dom, w, sigma)
    if not irreducible:
        raise UsageError("sigma* is only defined for irreducible congruences")
    return relation((dom, dom), meet)


# ---------------------------------------------------------------------------
# absorption


def subuniverses(dom: Domain, w: OperationTable) -> tuple[tuple[int, ...], ...]:
    """All nonempty subsets of the domain closed under w, sorted by (size, elements)."""
    out = []
    for r in range(1, dom.size + 1):
        for subset in itertools.combinations(dom.elements, r):
            s = set(subset)
            if all(
                w.apply(combo) in s for combo in itertools.product(subset, repeat=w.arity)
            ):
                out.append(subset)
    return tuple(sorted(out, key=lambda s: (len(s), s)))


_term_cache: dict[tuple[Domain, OperationTable, int], tuple[tuple[int, ...], ...]] = {}


def generate_terms(dom: Domain, w: OperationTable, k: int) -> tuple[tuple[int, ...], ...]:
    """All k-ary term operations of (D; w), generated from the projections.

    Each term is a flat table over D^k in lexicographic argument order.
    Generation stops with a resource error if the clone budget is hit.
    """
    key = (dom, w, k)
    cached = _term_cache.get(key)
    if cached is not None:
        return cached
    points = list(itertools.product(dom.elements, repeat=k))
    projections = [tuple(pt[i] for pt in points) for i in range(k)]
    result = close_vectors(projections, w, count_budget=CLONE_BUDGET)
    _term_cache[key] = result
    return result


def _absorbs(
    dom: Domain, term: tuple[int, ...], k: int, b: tuple[int, ...]
) -> bool:
    """Does the k-ary term map every one-open-slot pattern over B into B?"""
    points = list(itertools.product(dom.elements, repeat=k))
    index = {pt: i for i, pt in enumerate(points)}
    bset = set(b)
    for slot in range(k):
        for fill in itertools.product(b, repeat=k - 1):
            for a in dom.elements:
                args = fill[:slot] + (a,) + fill[slot:]
                if term[index[args]] not in bset:
                    return False
    return True


_absorb_cache: dict = {}


def _find_absorbing(dom: Domain, w: OperationTable, k: int):
    """First proper subuniverse absorbed by some k-ary term, smallest-first."""
    key = (dom, w, k)
    if key in _absorb_cache:
        return _absorb_cache[key]
    terms = generate_terms(dom, w, k)
    result = None
    for b in subuniverses(dom, w):
        if len(b) == dom.size:
            continue
        for term in terms:
            if _absorbs(dom, term, k, b):
                result = (b, term)
                break
        if result is not None:
            break
    _absorb_cache[key] = result
    return result


def find_binary_absorbing(dom: Domain, w: OperationTable):
    """A proper binary absorbing subuniverse with its witness term, or None.

    Returns (elements, term_table) where term_table is flat over D^2 in
    lexicographic argument order.
    """
    return _find_absorbing(dom, w, 2)


def find_ternary_absorbing(dom: Domain, w: OperationTable):
    return _find_absorbing(dom, w, 3)


# ---------------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class DomainClassification:
    """Which reduction applies to a domain: absorption, PC quotient, or linear quotient."""

    kind: str  # binary_absorbing | ternary_absorbing | pc_quotient | linear_quotient
    subuniverse: tuple[int, ...] | None = None
    congruence: Congruence | None = None
    linear: LinearStructure | None = None


_classify_cache: dict[tuple[Domain, OperationTable], DomainClassification] = {}


def classify_domain(dom: Domain, w: OperationTable) -> DomainClassification:
    """Route a domain of size >= 2 to its applicable reduction.

    Tries binary absorption, then ternary absorption.  Failing both, every
    maximal proper congruence must have a polynomially complete or linear
    quotient; a non-linear quotient is reported as the PC case.
    """
    if dom.size < 2:
        raise UsageError("classification needs at least two elements")
    key = (dom, w)
    cached = _classify_cache.get(key)
    if cached is not None:
        return cached
    result = _classify(dom, w)
    _classify_cache[key] = result
    return result


def _classify(dom: Domain, w: OperationTable) -> DomainClassification:
    hit = find_binary_absorbing(dom, w)
    if hit is not None:
        return DomainClassification("binary_absorbing", subuniverse=hit[0])
    hit = find_ternary_absorbing(dom, w)
    if hit is not None:
        return DomainClassification("ternary_absorbing", subuniverse=hit[0])
    linear_hit: tuple[Congruence, LinearStructure] | None = None
    for sigma in sorted(maximal_congruences(dom, w), key=lambda c: c.key()):
        qdom, qop = quotient_algebra(dom, w, sigma)
        ls = is_linear(qdom, qop)
        if ls is None:
            return DomainClassification("pc_quotient", congruence=sigma)
        if linear_hit is None:
            linear_hit = (sigma, ls)
    if linear_hit is None:
        raise AlgorithmInvariantError("no maximal congruence on a nontrivial domain")
    return DomainClassification(
        "linear_quotient", congruence=linear_hit[0], linear=linear_hit[1]
    )


# ---------------------------------------------------------------------------
# special WNU derivation


def clone_member_matching(
    dom: Domain, w: OperationTable, k: int, predicate
) -> tuple[int, ...] | None:
    """First k-ary term of (D; w) whose flat table satisfies the predicate.

    Generates the clone incrementally and stops on the first hit, so it is
    much cheaper than a full generate_terms when a hit exists.
    """
    points = list(itertools.product(dom.elements, repeat=k))
    projections = [tuple(pt[i] for pt in points) for i in range(k)]
    return find_in_closure(projections, w, predicate, count_budget=CLONE_BUDGET)


def derive_special_wnu(w: OperationTable) -> OperationTable:
    """A special WNU of the same arity inside the clone generated by w.

    Searches the arity-m clone breadth-first; raises a resource error if the
    generation budget runs out before a special table appears.
    """
    if not (is_idempotent(w) and is_wnu(w)):
        raise UsageError("input must be an idempotent WNU")
    if is_special_wnu(w):
        return w
    dom = Domain(tuple(range(w.universe_size)))

    # term tables over the full universe share OperationTable's index order
    def special(table: tuple[int, ...]) -> bool:
        return is_special_wnu(OperationTable(w.arity, w.universe_size, table))

    hit = clone_member_matching(dom, w, w.arity, special)
    if hit is None:
        raise ResourceBudgetError("no special WNU found within the clone budget")
    return OperationTable(w.arity, w.universe_size, hit)
