"""Shared helpers: compact relation constructors and independent brute-force oracles.

The oracles here re-derive the structural predicates straight from their
definitions (full enumeration, literal fixpoint rules) and never share code
with the implementations they check.
"""

from __future__ import annotations

import itertools

from wnucsp.relations import Domain, RelationTable


def dom(n: int) -> Domain:
    return Domain(tuple(range(n)))


def rel(tuples, sizes) -> RelationTable:
    """Relation from tuple literals; sizes is an int (uniform) or per-coordinate list."""
    tuples = [tuple(t) for t in tuples]
    arity = len(tuples[0]) if tuples else (len(sizes) if isinstance(sizes, (list, tuple)) else 1)
    if isinstance(sizes, int):
        domains = tuple(dom(sizes) for _ in range(arity))
    else:
        domains = tuple(dom(s) for s in sizes)
    return RelationTable(len(domains), domains, frozenset(tuples))


def product_tuples(rho: RelationTable):
    return itertools.product(*(d.elements for d in rho.coord_domains))


# --- oracles -----------------------------------------------------------------


def oracle_con(rho: RelationTable, i: int) -> set[tuple[int, int]]:
    """Interchangeability of values at coordinate i, by the defining formula."""
    pairs = set()
    for y in rho.coord_domains[i].elements:
        for y2 in rho.coord_domains[i].elements:
            for t in rho.tuples:
                if t[i] != y:
                    continue
                if t[:i] + (y2,) + t[i + 1 :] in rho.tuples:
                    pairs.add((y, y2))
                    break
    return pairs


def oracle_essential(rho: RelationTable) -> bool:
    """Essential-tuple search over the full coordinate product."""
    for alpha in product_tuples(rho):
        if alpha in rho.tuples:
            continue
        if all(
            any(
                alpha[:i] + (b,) + alpha[i + 1 :] in rho.tuples
                for b in rho.coord_domains[i].elements
            )
            for i in range(rho.arity)
        ):
            return True
    return False


def oracle_parallelogram_closure(rho: RelationTable) -> frozenset:
    """Literal fixpoint of the three-tuple rectangle rule."""
    tuples = set(rho.tuples)
    n = rho.arity
    changed = True
    while changed:
        changed = False
        for a1, a2, a3 in itertools.product(sorted(tuples), repeat=3):
            i1 = {i for i in range(n) if a1[i] == a2[i]}
            i2 = {i for i in range(n) if a1[i] == a3[i]}
            if i1 | i2 == set(range(n)):
                a4 = tuple(a3[i] if i in i1 else a2[i] for i in range(n))
                if a4 not in tuples:
                    tuples.add(a4)
                    changed = True
    return frozenset(tuples)


def oracle_has_parallelogram(rho: RelationTable) -> bool:
    return oracle_parallelogram_closure(rho) == rho.tuples


def oracle_rectangular(rho: RelationTable) -> bool:
    for i in range(rho.arity):
        for a, b in oracle_con(rho, i):
            for t in rho.tuples:
                if t[i] == a and t[:i] + (b,) + t[i + 1 :] not in rho.tuples:
                    return False
    return True


def conjunction_of_projections(rho: RelationTable, coord_sets) -> set:
    """Evaluate the conjunction of rho's projections over the full product."""
    import wnucsp.relations as R

    projs = [(tuple(sorted(s)), R.project(rho, s).tuples) for s in coord_sets]
    out = set()
    for alpha in product_tuples(rho):
        if all(tuple(alpha[i] for i in s) in p for s, p in projs):
            out.add(alpha)
    return out


def oracle_congruences(domain: Domain, w) -> set:
    """All partitions preserved by w, by full partition enumeration."""

    def partitions(xs):
        if not xs:
            yield []
            return
        first, rest = xs[0], xs[1:]
        for p in partitions(rest):
            for i in range(len(p)):
                yield p[:i] + [[first] + p[i]] + p[i + 1 :]
            yield [[first]] + p

    keys = set()
    for p in partitions(list(domain.elements)):
        idx = {}
        for ci, c in enumerate(p):
            for x in c:
                idx[x] = ci
        # single-coordinate perturbations suffice: coordinatewise-related
        # argument tuples are chained one coordinate at a time, and the
        # relation is transitive
        ok = True
        for args in itertools.product(domain.elements, repeat=w.arity):
            base = w.apply(args)
            for j in range(w.arity):
                for b in domain.elements:
                    if idx[b] == idx[args[j]] and b != args[j]:
                        if idx[w.apply(args[:j] + (b,) + args[j + 1 :])] != idx[base]:
                            ok = False
                            break
                if not ok:
                    break
            if not ok:
                break
        if ok:
            keys.add(tuple(sorted(tuple(sorted(c)) for c in p)))
    return keys
