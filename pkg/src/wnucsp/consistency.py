"""Instance-level preprocessing: pairwise consistency, connectivity structure,
the irreducibility check, and the constraint-weakening order.

The pairwise network is kept as bitmasks over local domain positions with a
globally cached composition table, which keeps the cubic propagation loop
cheap on long thin instances.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .algebra import (
    Congruence,
    OperationTable,
    _congruence_closure,
    congruence_from_classes,
    maximal_congruences,
    minimal_congruences_above,
)
from .errors import AlgorithmInvariantError, UsageError
from .instance import Constraint, CspInstance, restrict_instance
from .relations import Domain, RelationTable, con, full_relation, project, relation

__all__ = [
    "CycleConsistencyResult",
    "establish_cycle_consistency",
    "LinkedPartition",
    "linked_components",
    "is_fragmented",
    "fragments",
    "solve_nonlinked",
    "IrreducibilityOutcome",
    "check_irreducibility",
    "is_weaker",
    "congruence_weakened",
    "con_as_congruence",
]


# --------------------------------------------------------------------------
# pairwise (2,3) propagation

_compose_cache: dict = {}
_transpose_cache: dict = {}


def _compose(a: int, b: int, si: int, sk: int, sj: int) -> int:
    key = (a, b, si, sk, sj)
    hit = _compose_cache.get(key)
    if hit is not None:
        return hit
    out = 0
    mask_k = (1 << sk) - 1
    mask_j = (1 << sj) - 1
    rows_b = [(b >> (kk * sj)) & mask_j for kk in range(sk)]
    for aa in range(si):
        row = (a >> (aa * sk)) & mask_k
        acc = 0
        kk = 0
        while row:
            if row & 1:
                acc |= rows_b[kk]
            row >>= 1
            kk += 1
        out |= acc << (aa * sj)
    _compose_cache[key] = out
    return out


def _transpose(a: int, si: int, sj: int) -> int:
    key = (a, si, sj)
    hit = _transpose_cache.get(key)
    if hit is not None:
        return hit
    out = 0
    for aa in range(si):
        for bb in range(sj):
            if a & (1 << (aa * sj + bb)):
                out |= 1 << (bb * si + aa)
    _transpose_cache[key] = out
    return out


@dataclass
class CycleConsistencyResult:
    status: str  # "ok" | "no_solution"
    instance: CspInstance | None
    network: dict[tuple[int, int], RelationTable] | None


_pair_proj_cache: dict = {}


def _pair_projection(rel: RelationTable, pi: int, pj: int) -> frozenset:
    key = (rel, pi, pj)
    hit = _pair_proj_cache.get(key)
    if hit is None:
        hit = frozenset((t[pi], t[pj]) for t in rel.tuples)
        _pair_proj_cache[key] = hit
    return hit


def establish_cycle_consistency(
    inst: CspInstance, want_network: bool = False
) -> CycleConsistencyResult:
    """Propagate pairwise projections to a fixed point, shrinking domains.

    On success the returned instance is 1-consistent and cycle-consistent
    and has the same solution set as the input.  Reports no_solution when a
    pairwise relation (or a domain) empties.  The materialised pairwise
    network is built only on request.
    """
    domains = list(inst.domains)
    constraints = list(inst.constraints)
    n = inst.n_vars

    while True:
        # refilter relations to current domains; enforce constraint subdirectness
        reduced = False
        filtered: list[frozenset] = []
        for c in constraints:
            doms = tuple(domains[v] for v in c.scope)
            tuples = c.relation.tuples
            if doms != c.relation.coord_domains:
                tuples = frozenset(
                    t for t in tuples if all(x in d for x, d in zip(t, doms))
                )
            if not tuples:
                return CycleConsistencyResult("no_solution", None, None)
            filtered.append(tuples)
            for pos, v in enumerate(c.scope):
                seen = {t[pos] for t in tuples}
                if seen != set(domains[v].elements):
                    domains[v] = Domain(tuple(sorted(seen)))
                    reduced = True
        if reduced:
            continue
        for idx, c in enumerate(constraints):
            doms = tuple(domains[v] for v in c.scope)
            if doms != c.relation.coord_domains:
                constraints[idx] = Constraint(c.scope, relation(doms, filtered[idx]))

        sizes = [d.size for d in domains]
        pos_of = [{e: p for p, e in enumerate(d.elements)} for d in domains]
        fulls = [[(1 << (sizes[i] * sizes[j])) - 1 for j in range(n)] for i in range(n)]
        masks = [[fulls[i][j] for j in range(n)] for i in range(n)]
        for i in range(n):
            diag = 0
            for p in range(sizes[i]):
                diag |= 1 << (p * sizes[i] + p)
            masks[i][i] = diag
        for c in constraints:
            for pi, vi in enumerate(c.scope):
                for pj, vj in enumerate(c.scope):
                    if vi == vj:
                        continue
                    m = 0
                    for a, b in _pair_projection(c.relation, pi, pj):
                        m |= 1 << (pos_of[vi][a] * sizes[vj] + pos_of[vj][b])
                    masks[vi][vj] &= m

        # worklist to the least fixed point of the triangle rule
        in_queue = [[True] * n for _ in range(n)]
        queue = [(i, j) for i in range(n) for j in range(n)]
        qhead = 0
        failed = False
        while qhead < len(queue):
            i, j = queue[qhead]
            qhead += 1
            in_queue[i][j] = False
            cur = masks[i][j]
            si, sj = sizes[i], sizes[j]
            row_i, full_row_i = masks[i], fulls[i]
            for k in range(n):
                if k == i or k == j:
                    continue
                a = row_i[k]
                b = masks[k][j]
                if a == full_row_i[k] and b == fulls[k][j]:
                    continue
                cur &= _compose(a, b, si, sizes[k], sj)
                if not cur:
                    break
            if cur != masks[i][j]:
                if not cur:
                    failed = True
                    break
                masks[i][j] = cur
                masks[j][i] = _transpose(cur, si, sj)
                for x in range(n):
                    for p, q in ((i, x), (x, j), (j, x), (x, i)):
                        if not in_queue[p][q]:
                            in_queue[p][q] = True
                            queue.append((p, q))
        if failed:
            return CycleConsistencyResult("no_solution", None, None)

        # subdirectness of the network; shrink domains where it fails
        reduced = False
        for i in range(n):
            m = masks[i][i]
            keep = [domains[i].elements[p] for p in range(sizes[i]) if m & (1 << (p * sizes[i] + p))]
            for j in range(n):
                if j == i:
                    continue
                rows = {
                    domains[i].elements[p]
                    for p in range(sizes[i])
                    if (masks[i][j] >> (p * sizes[j])) & ((1 << sizes[j]) - 1)
                }
                keep = [e for e in keep if e in rows]
            if not keep:
                return CycleConsistencyResult("no_solution", None, None)
            if len(keep) != sizes[i]:
                domains[i] = Domain(tuple(sorted(keep)))
                reduced = True
        if reduced:
            continue

        network = None
        if want_network:
            network = {}
            for i in range(n):
                for j in range(n):
                    pairs = set()
                    for p in range(sizes[i]):
                        for q in range(sizes[j]):
                            if masks[i][j] & (1 << (p * sizes[j] + q)):
                                pairs.add(
                                    (domains[i].elements[p], domains[j].elements[q])
                                )
                    network[(i, j)] = relation((domains[i], domains[j]), pairs)
        out = CspInstance(inst.var_names, tuple(domains), tuple(constraints), inst.algebra)
        return CycleConsistencyResult("ok", out, network)


# --------------------------------------------------------------------------
# connectivity structure


@dataclass
class LinkedPartition:
    components: tuple[frozenset[tuple[int, int]], ...]  # sets of (variable, value)
    linked: bool


class _UF:
    def __init__(self):
        self.parent = {}

    def add(self, x):
        self.parent.setdefault(x, x)

    def find(self, x):
        p = self.parent
        while p[x] != x:
            p[x] = p[p[x]]
            x = p[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def linked_components(inst: CspInstance) -> LinkedPartition:
    """Partition of (variable, value) pairs under constraint-path connectivity."""
    uf = _UF()
    for i, d in enumerate(inst.domains):
        for a in d.elements:
            uf.add((i, a))
    appearing: set[int] = set()
    for c in inst.constraints:
        appearing.update(c.scope)
        for pi, vi in enumerate(c.scope):
            for pj, vj in enumerate(c.scope):
                if pi >= pj:
                    continue
                for a, b in _pair_projection(c.relation, pi, pj):
                    uf.union((vi, a), (vj, b))
    groups: dict = {}
    for key in uf.parent:
        groups.setdefault(uf.find(key), set()).add(key)
    components = tuple(
        sorted((frozenset(g) for g in groups.values()), key=lambda g: min(g))
    )
    linked = True
    for z in appearing:
        roots = {uf.find((z, a)) for a in inst.domains[z].elements}
        if len(roots) > 1:
            linked = False
            break
    return LinkedPartition(components, linked)


def _variable_components(inst: CspInstance) -> list[set[int]]:
    uf = _UF()
    for i in range(inst.n_vars):
        uf.add(i)
    for c in inst.constraints:
        for v in c.scope[1:]:
            uf.union(c.scope[0], v)
    groups: dict = {}
    for i in range(inst.n_vars):
        groups.setdefault(uf.find(i), set()).add(i)
    return sorted(groups.values(), key=min)


def is_fragmented(inst: CspInstance) -> bool:
    """Can the variables split into two nonempty parts with no crossing scope?"""
    return inst.n_vars >= 2 and len(_variable_components(inst)) >= 2


def fragments(inst: CspInstance) -> list[tuple[tuple[int, ...], CspInstance]]:
    """Sub-instances per variable component, with their variable index maps."""
    out = []
    for comp in _variable_components(inst):
        var_map = tuple(sorted(comp))
        back = {v: i for i, v in enumerate(var_map)}
        cons = tuple(
            Constraint(tuple(back[v] for v in c.scope), c.relation)
            for c in inst.constraints
            if set(c.scope) <= comp
        )
        sub = CspInstance(
            tuple(inst.var_names[v] for v in var_map),
            tuple(inst.domains[v] for v in var_map),
            cons,
            inst.algebra,
        )
        out.append((var_map, sub))
    return out


def solve_nonlinked(inst: CspInstance, solve):
    """Decide a non-linked, non-fragmented instance component by component.

    Every linked component restricts each domain to a proper nonempty subset;
    the instance is satisfiable iff some component's restriction is.  The
    handle returns (satisfiable, candidate); the first satisfiable
    component's result is passed through.
    """
    lp = linked_components(inst)
    if lp.linked:
        raise UsageError("instance is linked")
    if is_fragmented(inst):
        raise UsageError("instance is fragmented")
    for comp in lp.components:
        sub_domains: dict[int, set[int]] = {}
        for (v, a) in comp:
            sub_domains.setdefault(v, set()).add(a)
        if set(sub_domains) != set(range(inst.n_vars)):
            continue  # component missing a variable cannot hold a solution
        restriction = {}
        for v, vals in sub_domains.items():
            if vals == set(inst.domains[v].elements):
                raise UsageError("component does not shrink every domain; instance linked?")
            restriction[v] = Domain(tuple(sorted(vals)))
        sat, candidate = solve(restrict_instance(inst, restriction))
        if sat:
            return True, candidate
    return False, None


# --------------------------------------------------------------------------
# irreducibility


@dataclass
class IrreducibilityOutcome:
    kind: str  # "irreducible" | "reduce" | "no_solution"
    variable: int | None = None
    new_domain: Domain | None = None


def _propagated_congruences(inst: CspInstance, k: int, sigma_k: Congruence):
    """Spread a congruence on variable k along constraint projections.

    Returns (I, sigma_map, edges) where edges[j] = (constraint, pos_i, pos_j, i)
    records the projection that first produced sigma_j.
    """
    sigma_map: dict[int, Congruence] = {k: sigma_k}
    edges: dict[int, tuple] = {}
    by_var: dict[int, list[Constraint]] = {}
    for c in inst.constraints:
        for v in c.scope:
            by_var.setdefault(v, []).append(c)
    frontier = [k]
    while frontier:
        i = frontier.pop(0)
        for c in by_var.get(i, []):
            for pos_i, vi in enumerate(c.scope):
                if vi != i:
                    continue
                for pos_j, vj in enumerate(c.scope):
                    if vj in sigma_map:
                        continue
                    delta = _pair_projection(c.relation, pos_i, pos_j)
                    sig = _image_partition(
                        sigma_map[i], delta, inst.domains[vj]
                    )
                    if sig is not None and sig.is_proper:
                        sigma_map[vj] = sig
                        edges[vj] = (c, pos_i, pos_j, i)
                        frontier.append(vj)
    return sorted(sigma_map), sigma_map, edges


def _image_partition(sigma_i: Congruence, delta, dom_j: Domain) -> Congruence | None:
    """sigma_j(x, y) = exists x', y' with delta(x', x), delta(y', y), sigma_i(x', y').

    Returns None unless the result is an equivalence relation on dom_j.
    """
    pairs: set[tuple[int, int]] = set()
    by_class: dict[int, set[int]] = {}
    for x1, x2 in delta:
        by_class.setdefault(sigma_i.class_index(x1), set()).add(x2)
    for image in by_class.values():
        for x in image:
            for y in image:
                pairs.add((x, y))
    # equivalence check: reflexive on dom_j, symmetric by shape, transitive?
    if any((x, x) not in pairs for x in dom_j.elements):
        return None
    adj: dict[int, set[int]] = {}
    for x, y in pairs:
        adj.setdefault(x, set()).add(y)
    for x, ys in adj.items():
        for y in ys:
            if not adj.get(y, set()) <= ys or x not in adj.get(y, set()):
                return None
    classes = []
    seen: set[int] = set()
    for x in dom_j.elements:
        if x not in seen:
            cls = frozenset(adj[x])
            classes.append(cls)
            seen |= cls
    return congruence_from_classes(dom_j, classes)


def check_irreducibility(inst: CspInstance, solve) -> IrreducibilityOutcome:
    """Scan maximal congruences per variable and test class-reduced projections.

    ``solve`` decides sub-instances.  Returns the first actionable outcome in
    deterministic order, or the irreducible verdict.
    """
    for k in range(inst.n_vars):
        if inst.domains[k].size < 2:
            continue
        for sigma_k in sorted(
            maximal_congruences(inst.domains[k], inst.algebra), key=lambda c: c.key()
        ):
            outcome = _check_one(inst, k, sigma_k, solve)
            if outcome is not None:
                return outcome
    return IrreducibilityOutcome("irreducible")


def _check_one(inst, k, sigma_k, solve) -> IrreducibilityOutcome | None:
    var_ids, sigma_map, edges = _propagated_congruences(inst, k, sigma_k)
    back = {v: i for i, v in enumerate(var_ids)}
    proj_constraints = []
    for c in inst.constraints:
        positions = [p for p, v in enumerate(c.scope) if v in sigma_map]
        if not positions:
            continue
        scope = tuple(back[c.scope[p]] for p in positions)
        rel = project(c.relation, positions) if len(positions) != len(c.scope) else c.relation
        proj_constraints.append(Constraint(scope, rel))
    base = CspInstance(
        tuple(inst.var_names[v] for v in var_ids),
        tuple(inst.domains[v] for v in var_ids),
        tuple(proj_constraints),
        inst.algebra,
    )

    # linked classes per class of sigma_k, spread along the recorded edges
    class_families = []
    for e_k in sigma_k.classes:
        family: dict[int, frozenset[int]] = {k: e_k}
        order = [v for v in var_ids if v in edges]
        pending = [v for v in order]
        while pending:
            progressed = False
            for v in list(pending):
                c, pos_i, pos_j, i = edges[v]
                if i not in family:
                    continue
                delta = _pair_projection(c.relation, pos_i, pos_j)
                image = {y for (x, y) in delta if x in family[i]}
                cls = sigma_map[v].class_of(min(image))
                if not image <= cls:
                    raise AlgorithmInvariantError("projection image crosses classes")
                family[v] = cls
                pending.remove(v)
                progressed = True
            if not progressed:
                raise AlgorithmInvariantError("class propagation stalled")
        class_families.append(family)

    reduced_instances = []
    for family in class_families:
        restriction = {back[v]: Domain(tuple(sorted(family[v]))) for v in var_ids}
        reduced_instances.append(restrict_instance(base, restriction))

    sats = [solve(r) for r in reduced_instances]
    if not any(sats):
        return IrreducibilityOutcome("no_solution")

    for v in var_ids:
        attained: set[int] = set()
        for family, red, sat in zip(class_families, reduced_instances, sats):
            if not sat:
                continue
            cls = family[v]
            if len(cls) == 1:
                attained |= cls
                continue
            for a in sorted(cls):
                if solve(
                    restrict_instance(red, {back[v]: Domain((a,))})
                ):
                    attained.add(a)
        if attained != set(inst.domains[v].elements):
            if not attained:
                return IrreducibilityOutcome("no_solution")
            return IrreducibilityOutcome(
                "reduce", variable=v, new_domain=Domain(tuple(sorted(attained)))
            )
    return None


# --------------------------------------------------------------------------
# weaker constraints


def is_weaker(c1: Constraint, c2: Constraint) -> bool:
    """Is c1 implied by c2 over a sub-scope, strictly (not mutually equivalent)?"""
    set1, set2 = set(c1.scope), set(c2.scope)
    if not set1 <= set2:
        return False
    positions = [c2.scope.index(v) for v in c1.scope]
    for t in c2.relation.tuples:
        if tuple(t[p] for p in positions) not in c1.relation.tuples:
            return False
    if set1 != set2:
        return True
    # equal scopes: strict unless the implication reverses as well
    back = [c1.scope.index(v) for v in c2.scope]
    for t in c1.relation.tuples:
        if tuple(t[p] for p in back) not in c2.relation.tuples:
            return True
    return False


def con_as_congruence(rho: RelationTable, w: OperationTable) -> Congruence | None:
    """con(rho, 0) as a congruence on the first domain, or None if not one.

    Requires reflexivity, that is a subdirect first coordinate.
    """
    dom0 = rho.coord_domains[0]
    c0 = con(rho, 0)
    adj: dict[int, set[int]] = {x: set() for x in dom0.elements}
    for x, y in c0.tuples:
        adj[x].add(y)
    for x in dom0.elements:
        if x not in adj[x]:
            raise UsageError("con(rho, 0) is not reflexive on the first domain")
    for x, ys in adj.items():
        for y in ys:
            if adj[y] != ys:
                return None
    classes = []
    seen: set[int] = set()
    for x in dom0.elements:
        if x not in seen:
            classes.append(frozenset(adj[x]))
            seen |= adj[x]
    return congruence_from_classes(dom0, classes)


def congruence_weakened(c: Constraint, w: OperationTable) -> list[Constraint]:
    """One weakening per minimal congruence strictly above con(relation, 0).

    The first coordinate is rebound through the coarser congruence.  When
    con(relation, 0) is already the full relation the single result is the
    tautological full relation on the same scope (callers drop it).  When
    con(relation, 0) is rectangular it is itself a congruence and the
    minimal congruences come from the lattice; otherwise the unique minimal
    congruence strictly containing it is its congruence closure.
    """
    rho = c.relation
    dom0 = rho.coord_domains[0]
    theta = con_as_congruence(rho, w)
    if theta is not None and theta.n_classes == 1:
        return [Constraint(c.scope, full_relation(rho.coord_domains))]
    if theta is not None:
        sigmas = minimal_congruences_above(dom0, w, theta)
    else:
        sigmas = (_congruence_closure(dom0, w, con(rho, 0).tuples),)
    out = []
    for sigma in sigmas:
        tuples = set()
        for t in rho.tuples:
            for y1 in sigma.class_of(t[0]):
                tuples.add((y1,) + t[1:])
        out.append(Constraint(c.scope, relation(rho.coord_domains, tuples)))
    return out
