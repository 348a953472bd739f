"""Closure of vector sets under coordinatewise application of a finite operation.

One engine serves tuple-set closure (relations), element closure
(subuniverses), pair closure (compatible relations), and function-table
closure (clone generation at a fixed arity): all of these are sets of
fixed-length vectors over the operation's universe.

Combos are walked depth-first with incrementally folded table indices, and
for symmetric operations only multisets of arguments are visited, which cuts
the m-fold product down by a factor of about m!.
"""

from __future__ import annotations

import itertools

from .errors import ResourceBudgetError

_symmetric_cache: dict = {}


def is_symmetric_op(w) -> bool:
    """True iff the operation is invariant under permuting its arguments."""
    cached = _symmetric_cache.get(w)
    if cached is not None:
        return cached
    result = True
    m = w.arity
    if m > 1:
        for args in itertools.product(range(w.universe_size), repeat=m):
            v = w.apply(args)
            for j in range(m - 1):
                swapped = list(args)
                swapped[j], swapped[j + 1] = swapped[j + 1], swapped[j]
                if w.apply(tuple(swapped)) != v:
                    result = False
                    break
            if not result:
                break
    _symmetric_cache[w] = result
    return result


def _round(members, w, seen, on_new, work_box, work_budget) -> bool:
    """One full pass over argument combos.

    on_new is called with each newly discovered image and may return True to
    abort the pass; with on_new=None the pass aborts on the first escape
    (closedness test).  Returns True iff the pass ran to completion.
    """
    size = w.universe_size
    table = w.table
    m = w.arity
    sym = is_symmetric_op(w)
    length = len(members[0])
    coords = range(length)

    def rec(depth: int, start: int, partial) -> bool:
        work_box[0] += 1
        if work_budget is not None and work_box[0] > work_budget:
            raise ResourceBudgetError("closure work budget exhausted")
        if depth == m:
            img = tuple(table[p] for p in partial)
            if img not in seen:
                if on_new is None:
                    return False
                seen.add(img)
                if on_new(img):
                    return False
            return True
        lo = start if sym else 0
        for idx in range(lo, len(members)):
            v = members[idx]
            nxt = [partial[i] * size + v[i] for i in coords]
            if not rec(depth + 1, idx, nxt):
                return False
        return True

    return rec(0, 0, [0] * length)


def close_vectors(
    vectors,
    w,
    stop_size: int | None = None,
    count_budget: int | None = None,
    work_budget: int | None = None,
) -> tuple[tuple, ...]:
    """Least superset closed under pointwise w, in deterministic discovery order.

    Stops early once stop_size vectors are reached (the caller knows the set
    is then necessarily full).  count_budget bounds discovered vectors,
    work_budget bounds visited argument combos; both raise on exhaustion.
    """
    order = sorted(set(map(tuple, vectors)))
    if not order:
        return ()
    seen = set(order)
    work_box = [0]
    while True:
        if stop_size is not None and len(seen) >= stop_size:
            break
        new: list[tuple] = []

        def collect(img, new=new):
            new.append(img)
            if count_budget is not None and len(seen) > count_budget:
                raise ResourceBudgetError("closure element budget exhausted")
            return stop_size is not None and len(seen) >= stop_size

        _round(order, w, seen, collect, work_box, work_budget)
        if not new:
            break
        order.extend(new)
    return tuple(order)


def find_in_closure(
    vectors,
    w,
    predicate,
    count_budget: int | None = None,
    work_budget: int | None = None,
):
    """First vector in the closure satisfying the predicate, else None.

    Seeds are checked first, then newly discovered vectors in discovery
    order; generation stops as soon as a hit appears.
    """
    order = sorted(set(map(tuple, vectors)))
    for v in order:
        if predicate(v):
            return v
    seen = set(order)
    work_box = [0]
    hit: list = []
    while True:
        new: list[tuple] = []

        def check(img, new=new):
            new.append(img)
            if count_budget is not None and len(seen) > count_budget:
                raise ResourceBudgetError("closure element budget exhausted")
            if predicate(img):
                hit.append(img)
                return True
            return False

        _round(order, w, seen, check, work_box, work_budget)
        if hit:
            return hit[0]
        if not new:
            return None
        order.extend(new)


def vectors_closed(vectors, w, work_budget: int | None = None) -> bool:
    """True iff the vector set is already closed under pointwise w (one pass)."""
    members = sorted(set(map(tuple, vectors)))
    if not members:
        return True
    return _round(members, w, set(members), None, [0], work_budget)
