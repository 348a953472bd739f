"""Extensional finitary relations and the structural tests the solver needs.

A relation is stored as an explicit set of tuples together with one domain
per coordinate.  Everything here is immutable and pure, so results are
memoised in module-level caches keyed by the relation value itself.

Coordinates are 0-based throughout.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .errors import UsageError

__all__ = [
    "Domain",
    "RelationTable",
    "project",
    "con",
    "is_subdirect",
    "rectangular_at",
    "is_rectangular",
    "has_parallelogram",
    "parallelogram_closure",
    "is_essential",
    "min_witness_projection",
    "essential_representation",
    "preserved_by",
]


@dataclass(frozen=True, order=True)
class Domain:
    """A finite set of element indices, kept sorted for determinism."""

    elements: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.elements) == 0:
            raise UsageError("domain must be nonempty")
        if tuple(sorted(set(self.elements))) != self.elements:
            raise UsageError("domain elements must be sorted and distinct")

    @property
    def size(self) -> int:
        return len(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in self.elements


@lru_cache(maxsize=None)
def domain(*elements: int) -> Domain:
    """Interned Domain constructor; accepts elements in any order."""
    return Domain(tuple(sorted(set(elements))))


@dataclass(frozen=True)
class RelationTable:
    """An arity-ary relation, a subset of the product of its coordinate domains."""

    arity: int
    coord_domains: tuple[Domain, ...]
    tuples: frozenset[tuple[int, ...]]

    def __post_init__(self) -> None:
        if self.arity < 1 or len(self.coord_domains) != self.arity:
            raise UsageError("arity must be >= 1 and match coord_domains")
        for t in self.tuples:
            if len(t) != self.arity:
                raise UsageError(f"tuple {t} has wrong length for arity {self.arity}")
            for x, dom in zip(t, self.coord_domains):
                if x not in dom:
                    raise UsageError(f"tuple {t} leaves its coordinate domains")

    @property
    def is_empty(self) -> bool:
        return not self.tuples

    @property
    def is_full(self) -> bool:
        size = 1
        for dom in self.coord_domains:
            size *= dom.size
        return len(self.tuples) == size

    def __contains__(self, t: tuple[int, ...]) -> bool:
        return t in self.tuples

    def __iter__(self):
        return iter(sorted(self.tuples))

    def __len__(self) -> int:
        return len(self.tuples)


def relation(domains: tuple[Domain, ...], tuples) -> RelationTable:
    return RelationTable(len(domains), domains, frozenset(map(tuple, tuples)))


def full_relation(domains: tuple[Domain, ...]) -> RelationTable:
    return relation(domains, itertools.product(*(d.elements for d in domains)))


def _check_coords(rho: RelationTable, coords) -> tuple[int, ...]:
    coords = tuple(sorted(coords))
    if not coords:
        raise UsageError("coordinate set must be nonempty")
    if coords[0] < 0 or coords[-1] >= rho.arity:
        raise UsageError(f"coordinate set {coords} out of range for arity {rho.arity}")
    if len(set(coords)) != len(coords):
        raise UsageError("coordinate set has repeats")
    return coords


def project(rho: RelationTable, coords) -> RelationTable:
    """Projection onto the given coordinates, in ascending coordinate order."""
    coords = _check_coords(rho, coords)
    doms = tuple(rho.coord_domains[i] for i in coords)
    return relation(doms, {tuple(t[i] for i in coords) for t in rho.tuples})


_con_cache: dict[tuple[RelationTable, int], RelationTable] = {}


def con(rho: RelationTable, i: int) -> RelationTable:
    """Pairs of values interchangeable at coordinate i via a shared completion.

    Returns the binary relation of all (y, y') such that some assignment of
    the remaining coordinates completes both to members of rho.  Reflexive on
    the i-th projection and symmetric; transitive whenever coordinate i is
    rectangular.  An empty rho yields the empty relation.
    """
    if i < 0 or i >= rho.arity:
        raise UsageError(f"coordinate {i} out of range")
    key = (rho, i)
    cached = _con_cache.get(key)
    if cached is not None:
        return cached
    dom = rho.coord_domains[i]
    groups: dict[tuple[int, ...], set[int]] = {}
    for t in rho.tuples:
        rest = t[:i] + t[i + 1 :]
        groups.setdefault(rest, set()).add(t[i])
    pairs: set[tuple[int, int]] = set()
    for values in groups.values():
        for y in values:
            for y2 in values:
                pairs.add((y, y2))
    result = relation((dom, dom), pairs)
    _con_cache[key] = result
    return result


def is_subdirect(rho: RelationTable) -> bool:
    """True iff every coordinate projection covers its whole domain."""
    for i in range(rho.arity):
        seen = {t[i] for t in rho.tuples}
        if seen != set(rho.coord_domains[i].elements):
            return False
    return True


def rectangular_at(rho: RelationTable, i: int) -> bool:
    """True iff substituting con(rho, i)-related values at coordinate i stays in rho."""
    c = con(rho, i)
    by_value: dict[int, set[int]] = {}
    for a, b in c.tuples:
        by_value.setdefault(a, set()).add(b)
    for t in rho.tuples:
        for b in by_value.get(t[i], ()):
            if b != t[i] and t[:i] + (b,) + t[i + 1 :] not in rho.tuples:
                return False
    return True


def is_rectangular(rho: RelationTable) -> bool:
    return all(rectangular_at(rho, i) for i in range(rho.arity))


def _proper_splits(arity: int):
    """Proper bipartitions of {0..arity-1}; coordinate 0 stays on the left."""
    rest = list(range(1, arity))
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            left = (0,) + extra
            if len(left) < arity:
                yield left


def _split_blocks(tuples, left: tuple[int, ...], arity: int):
    """Group tuples of one bipartition into (left-part -> set of right-parts)."""
    right = tuple(i for i in range(arity) if i not in left)
    rows: dict[tuple[int, ...], set[tuple[int, ...]]] = {}
    for t in tuples:
        rows.setdefault(tuple(t[i] for i in left), set()).add(tuple(t[i] for i in right))
    return right, rows


def _split_is_rectangular(tuples, left: tuple[int, ...], arity: int) -> bool:
    # Rows that share any column must carry identical column sets; that is
    # exactly closure under completing a rectangle across this split.
    _, rows = _split_blocks(tuples, left, arity)
    col_owner: dict[tuple[int, ...], frozenset] = {}
    for cols in rows.values():
        fc = frozenset(cols)
        for c in cols:
            prev = col_owner.get(c)
            if prev is None:
                col_owner[c] = fc
            elif prev != fc:
                return False
    return True


_par_cache: dict[RelationTable, bool] = {}


def has_parallelogram(rho: RelationTable) -> bool:
    """Closure of rho under rectangle completion across every coordinate bipartition.

    Arity-1 relations hold vacuously.
    """
    if rho.arity < 2:
        return True
    cached = _par_cache.get(rho)
    if cached is not None:
        return cached
    res = all(_split_is_rectangular(rho.tuples, left, rho.arity) for left in _proper_splits(rho.arity))
    _par_cache[rho] = res
    return res


_par_closure_cache: dict[RelationTable, RelationTable] = {}


def parallelogram_closure(rho: RelationTable) -> RelationTable:
    """Least superset of rho closed under rectangle completion (all bipartitions).

    Computed by repeatedly completing, for each bipartition, every connected
    block of the induced bipartite membership graph to a full block.  The
    result is the least fixed point, so iteration order is irrelevant.
    """
    if rho.arity < 2:
        return rho
    cached = _par_closure_cache.get(rho)
    if cached is not None:
        return cached
    tuples = set(rho.tuples)
    splits = list(_proper_splits(rho.arity))
    changed = True
    while changed:
        changed = False
        for left in splits:
            right, rows = _split_blocks(tuples, left, rho.arity)
            # union-find over row keys through shared columns
            parent: dict[tuple[int, ...], tuple[int, ...]] = {r: r for r in rows}

            def find(x):
                while parent[x] != x:
                    parent[x] = parent[parent[x]]
                    x = parent[x]
                return x

            col_first: dict[tuple[int, ...], tuple[int, ...]] = {}
            for rkey, cols in rows.items():
                for c in cols:
                    if c in col_first:
                        ra, rb = find(col_first[c]), find(rkey)
                        if ra != rb:
                            parent[ra] = rb
                    else:
                        col_first[c] = rkey
            comp_rows: dict[tuple[int, ...], list] = {}
            comp_cols: dict[tuple[int, ...], set] = {}
            for rkey, cols in rows.items():
                root = find(rkey)
                comp_rows.setdefault(root, []).append(rkey)
                comp_cols.setdefault(root, set()).update(cols)
            for root, rkeys in comp_rows.items():
                cols = comp_cols[root]
                for rkey in rkeys:
                    if len(rows[rkey]) == len(cols):
                        continue
                    for c in cols:
                        t = [0] * rho.arity
                        for pos, i in enumerate(left):
                            t[i] = rkey[pos]
                        for pos, i in enumerate(right):
                            t[i] = c[pos]
                        t = tuple(t)
                        if t not in tuples:
                            tuples.add(t)
                            changed = True
    result = relation(rho.coord_domains, tuples)
    _par_closure_cache[rho] = result
    _par_cache[result] = True
    return result


def _essential_witness(rho: RelationTable) -> tuple[int, ...] | None:
    """A non-member admitting a single-coordinate repair into rho at every coordinate.

    Candidates only need to be scanned at Hamming distance 1 from members:
    a witness is repairable at every coordinate, so it is such a neighbour.
    """
    if rho.arity == 1:
        dom = rho.coord_domains[0]
        members = {t[0] for t in rho.tuples}
        if members and members != set(dom.elements):
            return (min(set(dom.elements) - members),)
        return None
    candidates: set[tuple[int, ...]] = set()
    for t in rho.tuples:
        for i in range(rho.arity):
            for b in rho.coord_domains[i].elements:
                if b != t[i]:
                    cand = t[:i] + (b,) + t[i + 1 :]
                    if cand not in rho.tuples:
                        candidates.add(cand)
    for cand in sorted(candidates):
        ok = True
        for i in range(rho.arity):
            if not any(
                cand[:i] + (b,) + cand[i + 1 :] in rho.tuples
                for b in rho.coord_domains[i].elements
            ):
                ok = False
                break
        if ok:
            return cand
    return None


_essential_cache: dict[RelationTable, bool] = {}


def is_essential(rho: RelationTable) -> bool:
    """True iff rho is not a conjunction of lower-arity relations.

    Witnessed by a tuple outside rho that can be repaired into rho at every
    single coordinate.
    """
    cached = _essential_cache.get(rho)
    if cached is None:
        cached = _essential_witness(rho) is not None
        _essential_cache[rho] = cached
    return cached


def min_witness_projection(rho: RelationTable, alpha: tuple[int, ...]) -> frozenset[int]:
    """A coordinate set I with pr_I(alpha) outside pr_I(rho), grown greedily.

    Scans coordinates left to right, keeping the first coordinate whose
    prefix (joined with the already-kept set) separates alpha from rho,
    and restarts until the kept set alone separates.  The projection of
    rho onto the result is always an essential relation.
    """
    alpha = tuple(alpha)
    if alpha in rho.tuples:
        raise UsageError("alpha must lie outside the relation")
    kept: set[int] = set()
    while True:
        k = 0
        while True:
            coords = tuple(sorted(kept | set(range(k + 1))))
            if tuple(alpha[i] for i in coords) not in {
                tuple(t[i] for i in coords) for t in rho.tuples
            }:
                break
            k += 1
        kept.add(k)
        coords = tuple(sorted(kept))
        if tuple(alpha[i] for i in coords) not in {tuple(t[i] for i in coords) for t in rho.tuples}:
            return frozenset(kept)


_repr_cache: dict[RelationTable, frozenset[frozenset[int]]] = {}


def essential_representation(rho: RelationTable) -> frozenset[frozenset[int]]:
    """Coordinate sets G whose projections are essential and conjoin back to rho.

    Only inclusion-maximal sets are kept.  For an essential relation the
    result is the full coordinate set alone; for a full relation it is empty
    (the empty conjunction).
    """
    cached = _repr_cache.get(rho)
    if cached is not None:
        return cached
    result = _essential_representation(rho)
    _repr_cache[rho] = result
    return result


def _essential_representation(rho: RelationTable) -> frozenset[frozenset[int]]:
    n = rho.arity
    if n == 1:
        dom = rho.coord_domains[0]
        if {t[0] for t in rho.tuples} == set(dom.elements):
            return frozenset()
        return frozenset({frozenset({0})})
    g: set[frozenset[int]] = set()
    last = n - 1
    seen: set[tuple[int, ...]] = set()
    for t in sorted(rho.tuples):
        for b in rho.coord_domains[last].elements:
            alpha = t[:last] + (b,)
            if alpha in rho.tuples or alpha in seen:
                continue
            seen.add(alpha)
            g.add(min_witness_projection(rho, alpha))
    g |= essential_representation(project(rho, range(n - 1)))
    return frozenset(s for s in g if not any(s < other for other in g))


def preserved_by(rho: RelationTable, op) -> bool:
    """True iff applying op coordinatewise to any m member tuples stays in rho.

    op is an OperationTable whose universe must contain every coordinate
    domain.  Full relations are trivially preserved.
    """
    from .closure import vectors_closed

    universe = set(range(op.universe_size))
    for dom in rho.coord_domains:
        if not set(dom.elements) <= universe:
            raise UsageError("operation universe does not cover the relation's domains")
    if rho.is_full or rho.is_empty:
        return True
    return vectors_closed(rho.tuples, op)
