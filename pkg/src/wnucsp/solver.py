"""The decision procedure for instances preserved by a special WNU.

One call runs, in order: pairwise consistency, connectivity decomposition,
the irreducibility check, constraint normalisation (essential projections,
rectangle closure, irreducible first-coordinate congruences), probing of the
congruence-weakened instance, absorption and quotient reductions, and
finally the linear phase over the minimal linear quotients, which repeatedly
parameterises the factor system, probes one candidate reduction, weakens the
instance to a boundary form, and learns one more linear equation.

Every domain reduction restarts the pipeline on the reduced instance.  The
procedure decides; witnesses are produced by candidate propagation from the
recursion's leaves with a self-reduction fallback.

Recursive calls carry per-path depth counters by type (component, weakened,
class reduction) with hard runtime bounds; exceeding one is an invariant
violation, never a wrong verdict.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, replace

from . import consistency as cons
from .algebra import (
    minimal_linear_congruence,
    classify_domain,
)
from .errors import AlgorithmInvariantError, UsageError
from .instance import Constraint, CspInstance, restrict_instance
from .linear import (
    FactorInstance,
    LinearParameterization,
    apply_phi,
    build_factor_instance,
    gauss_solve,
    learn_hyperplane_mixed,
    slot_values_to_classes,
)
from .relations import Domain, is_essential, parallelogram_closure

__all__ = [
    "SolveOutcome",
    "TraceRecord",
    "RecursionTrace",
    "SolveContext",
    "solve",
    "solve_decide",
    "has_solution_in",
    "weaken_to_theta_prime",
    "learn_equation",
    "extract_solution",
]

RECURSE_REDUCE = 1  # single-domain reductions (in-place restarts, not counted)
RECURSE_COMPONENT = 2  # linked components / irreducibility class reductions
RECURSE_WEAKENED = 3  # congruence-weakened instance probes
RECURSE_CLASS = 4  # minimal-linear class reductions


@dataclass(frozen=True)
class SolveOutcome:
    satisfiable: bool
    assignment: tuple[int, ...] | None = None

    @staticmethod
    def sat(assignment) -> "SolveOutcome":
        return SolveOutcome(True, tuple(assignment))

    @staticmethod
    def unsat() -> "SolveOutcome":
        return SolveOutcome(False, None)


@dataclass
class TraceRecord:
    rec_type: int  # 0 for the root call
    depths: tuple[int, int, int]  # (component, weakened, class) depths
    domain_sizes: tuple[int, ...]
    phase: str = "start"


@dataclass
class RecursionTrace:
    records: list[TraceRecord] = field(default_factory=list)
    visited: set[str] = field(default_factory=set)

    def max_depth(self, rec_type: int) -> int:
        idx = {RECURSE_COMPONENT: 0, RECURSE_WEAKENED: 1, RECURSE_CLASS: 2}[rec_type]
        return max((r.depths[idx] for r in self.records), default=0)

    def phases_seen(self) -> set[str]:
        return {r.phase for r in self.records}


@dataclass
class SolveContext:
    universe_size: int
    memo: dict = field(default_factory=dict)
    trace: RecursionTrace | None = None
    on_reduction: object = None
    depth_component: int = 0
    depth_weakened: int = 0
    depth_class: int = 0

    def child(self, rec_type: int) -> "SolveContext":
        d2, d3, d4 = self.depth_component, self.depth_weakened, self.depth_class
        if rec_type == RECURSE_COMPONENT:
            d2 += 1
            if d2 > self.universe_size:
                raise AlgorithmInvariantError(
                    f"component recursion depth {d2} exceeds universe size"
                )
        elif rec_type == RECURSE_WEAKENED:
            d3 += 1
            if d3 >= 2 ** (self.universe_size**2):
                raise AlgorithmInvariantError(
                    f"weakened recursion depth {d3} reaches its bound"
                )
        elif rec_type == RECURSE_CLASS:
            d4 += 1
            if d4 > self.universe_size:
                raise AlgorithmInvariantError(
                    f"class recursion depth {d4} exceeds universe size"
                )
        return replace(
            self,
            depth_component=d2,
            depth_weakened=d3,
            depth_class=d4,
        )

    def visit(self, phase: str) -> None:
        if self.trace is not None:
            self.trace.visited.add(phase)

    def record(self, rec_type: int, inst: CspInstance) -> TraceRecord | None:
        if self.trace is None:
            return None
        rec = TraceRecord(
            rec_type,
            (self.depth_component, self.depth_weakened, self.depth_class),
            tuple(d.size for d in inst.domains),
        )
        self.trace.records.append(rec)
        return rec


def _min_assignment(inst: CspInstance) -> tuple[int, ...]:
    return tuple(d.elements[0] for d in inst.domains)


def _notify(ctx: SolveContext, phase: str, before: CspInstance, after: CspInstance):
    hook = ctx.on_reduction
    if hook is not None and ctx.depth_component == ctx.depth_weakened == ctx.depth_class == 0:
        hook(phase, before, after)


# --------------------------------------------------------------------------
# constraint normalisation


def _dedupe(constraints) -> list[Constraint]:
    seen = set()
    out = []
    for c in constraints:
        key = (c.scope, c.relation.tuples)
        if key not in seen:
            seen.add(key)
            out.append(c)
    return out


def _essential_split(c: Constraint) -> list[Constraint]:
    from .relations import essential_representation, project

    g = essential_representation(c.relation)
    full = frozenset(range(c.relation.arity))
    if g == frozenset({full}):
        return [c]
    out = []
    for coords in sorted(g, key=sorted):
        coords = tuple(sorted(coords))
        out.append(
            Constraint(tuple(c.scope[i] for i in coords), project(c.relation, coords))
        )
    return out


def _normalize_constraints(inst: CspInstance) -> CspInstance:
    """Fixpoint of: essential splitting, rectangle closure, and splitting of
    constraints whose first-coordinate interchange congruence is reducible."""
    from .algebra import is_irreducible_congruence

    w = inst.algebra
    constraints = list(inst.constraints)
    while True:
        # essential representations
        split = []
        for c in constraints:
            split.extend(_essential_split(c))
        constraints = _dedupe(split)
        # rectangle closure; non-essential results send us back to splitting
        closed = []
        need_resplit = False
        for c in constraints:
            rel = parallelogram_closure(c.relation)
            closed.append(Constraint(c.scope, rel) if rel is not c.relation else c)
            if not is_essential(rel):
                need_resplit = True
        constraints = closed
        if need_resplit:
            continue
        # first-coordinate congruence must be irreducible
        out = []
        weakened_any = False
        for c in constraints:
            theta = cons.con_as_congruence(c.relation, w)
            if theta is None:
                raise AlgorithmInvariantError(
                    "closed essential relation has non-transitive con"
                )
            if not theta.is_proper:
                raise AlgorithmInvariantError(
                    "essential relation with full first-coordinate congruence"
                )
            if theta.is_diagonal or is_irreducible_congruence(
                c.relation.coord_domains[0], w, theta
            ):
                out.append(c)
            else:
                weakened_any = True
                for wc in cons.congruence_weakened(c, w):
                    if not wc.relation.is_full:
                        out.append(wc)
        constraints = _dedupe(out)
        if not weakened_any:
            return inst.with_constraints(constraints)


def _weakened_instance(inst: CspInstance) -> CspInstance:
    """Congruence-weaken every constraint and restore the rectangle closure."""
    out = []
    for c in inst.constraints:
        for wc in cons.congruence_weakened(c, inst.algebra):
            rel = parallelogram_closure(wc.relation)
            if not rel.is_full:
                out.append(Constraint(wc.scope, rel))
    return inst.with_constraints(_dedupe(out))


# --------------------------------------------------------------------------
# the decision procedure


def _solve(inst: CspInstance, ctx: SolveContext, rec_type: int = 0):
    """Decide; returns (satisfiable, candidate_assignment_or_None).

    The candidate satisfies the instance actually decided at the leaf, which
    may be a weakening of the caller's instance; public entry points verify
    and re-extract when needed.
    """
    rec = ctx.record(rec_type, inst)

    def done(phase, sat, candidate=None, memo_key=None):
        if rec is not None:
            rec.phase = phase
        if memo_key is not None:
            ctx.memo[memo_key] = (sat, candidate)
        return sat, candidate

    for c in inst.constraints:
        if c.relation.is_empty:
            return done("trivial", False)
    if not inst.constraints:
        return done("trivial", True, _min_assignment(inst))
    if all(d.size == 1 for d in inst.domains):
        a = _min_assignment(inst)
        return done("trivial", inst.satisfies(a), a)

    key = inst.key()
    if key in ctx.memo:
        sat, candidate = ctx.memo[key]
        if rec is not None:
            rec.phase = "memo"
        return sat, candidate

    while True:
        # cycle consistency
        ctx.visit("cycle_consistency")
        cc = cons.establish_cycle_consistency(inst)
        if cc.status == "no_solution":
            return done("cycle_consistency", False, memo_key=key)
        if cc.instance.domains != inst.domains or cc.instance.constraints != inst.constraints:
            _notify(ctx, "cycle_consistency", inst, cc.instance)
        inst = cc.instance
        if not inst.constraints:
            return done("cycle_consistency", True, _min_assignment(inst), memo_key=key)
        if all(d.size == 1 for d in inst.domains):
            a = _min_assignment(inst)
            return done("cycle_consistency", inst.satisfies(a), a, memo_key=key)

        # fragmented instances split into independent sub-instances
        if cons.is_fragmented(inst):
            if rec is not None:
                rec.phase = "fragments"
            values: list[int | None] = [None] * inst.n_vars
            for var_map, sub in cons.fragments(inst):
                sat, cand = _solve(sub, ctx)
                if not sat:
                    return done("fragments", False, memo_key=key)
                if cand is None:
                    cand = _min_assignment(sub)
                for local, v in enumerate(var_map):
                    values[v] = cand[local]
            return done("fragments", True, tuple(values), memo_key=key)

        # non-linked instances decompose into linked components
        lp = cons.linked_components(inst)
        if not lp.linked:
            if rec is not None:
                rec.phase = "components"
            sat, cand = cons.solve_nonlinked(
                inst, lambda sub: _solve(sub, ctx.child(RECURSE_COMPONENT))
            )
            return done("components", sat, cand, memo_key=key)

        # irreducibility
        ctx.visit("irreducibility")
        out = cons.check_irreducibility(
            inst, lambda sub: _solve(sub, ctx.child(RECURSE_COMPONENT))[0]
        )
        if out.kind == "no_solution":
            return done("irreducibility", False, memo_key=key)
        if out.kind == "reduce":
            reduced = restrict_instance(inst, {out.variable: out.new_domain})
            _notify(ctx, "irreducibility", inst, reduced)
            inst = reduced
            continue

        # constraint normalisation
        ctx.visit("normalize")
        inst = _normalize_constraints(inst)
        if not inst.constraints:
            return done("normalize", True, _min_assignment(inst), memo_key=key)

        # probe the congruence-weakened instance
        ctx.visit("weaken_probe")
        weakened = _weakened_instance(inst)
        reduced_here = False
        for i in range(inst.n_vars):
            if inst.domains[i].size == 1:
                continue
            attained = []
            for b in inst.domains[i].elements:
                probe = restrict_instance(weakened, {i: Domain((b,))})
                if _solve(probe, ctx.child(RECURSE_WEAKENED), RECURSE_WEAKENED)[0]:
                    attained.append(b)
            if len(attained) != inst.domains[i].size:
                if not attained:
                    return done("weaken_probe", False, memo_key=key)
                reduced = restrict_instance(inst, {i: Domain(tuple(attained))})
                _notify(ctx, "weaken_probe", inst, reduced)
                inst = reduced
                reduced_here = True
                break
        if reduced_here:
            continue

        # absorption reduction
        ctx.visit("absorption")
        reduced_here = False
        for i in range(inst.n_vars):
            if inst.domains[i].size == 1:
                continue
            cls = classify_domain(inst.domains[i], inst.algebra)
            if cls.kind in ("binary_absorbing", "ternary_absorbing"):
                reduced = restrict_instance(inst, {i: Domain(cls.subuniverse)})
                _notify(ctx, "absorption", inst, reduced)
                inst = reduced
                reduced_here = True
                break
        if reduced_here:
            continue

        # polynomially complete quotient reduction
        ctx.visit("pc_quotient")
        reduced_here = False
        for i in range(inst.n_vars):
            if inst.domains[i].size == 1:
                continue
            cls = classify_domain(inst.domains[i], inst.algebra)
            if cls.kind == "pc_quotient":
                block = min(cls.congruence.classes, key=min)
                reduced = restrict_instance(inst, {i: Domain(tuple(sorted(block)))})
                _notify(ctx, "pc_quotient", inst, reduced)
                inst = reduced
                reduced_here = True
                break
        if reduced_here:
            continue

        # linear phase
        ctx.visit("linear")
        return _linear_phase(inst, ctx, rec, key)


def _linear_phase(inst: CspInstance, ctx: SolveContext, rec, memo_key):
    def done(phase, sat, candidate=None):
        if rec is not None:
            rec.phase = phase
        ctx.memo[memo_key] = (sat, candidate)
        return sat, candidate

    sigmas = []
    for i in range(inst.n_vars):
        sigma = minimal_linear_congruence(inst.domains[i], inst.algebra)
        if inst.domains[i].size > 1 and not sigma.is_proper:
            raise AlgorithmInvariantError(
                "nontrivial domain reached the linear phase without a proper "
                "linear congruence"
            )
        sigmas.append(sigma)
    factor = build_factor_instance(inst, sigmas)
    system = factor.system.copy()
    max_rounds = len(factor.slot_primes) + 2

    for _ in range(max_rounds):
        g = gauss_solve(system)
        if g.status == "no_solution":
            return done("linear_solve", False)
        if g.status == "unique":
            classes = slot_values_to_classes(factor, g.unique_values)
            sat, cand = has_solution_in(inst, classes, ctx)
            return done("linear_solve", sat, cand)
        param = g.param
        zero = (0,) * param.k
        sat, cand = has_solution_in(inst, apply_phi(factor, param, zero), ctx)
        if sat:
            return done("linear_probe", True, cand)
        ctx.visit("weaken_boundary")
        theta_prime = weaken_to_theta_prime(inst, factor, param, ctx)
        ctx.visit("learn")
        learned = learn_equation(theta_prime, factor, param, ctx)
        if learned is None:
            return done("learn", False)
        prime, coeffs, rhs = learned
        system.add_equation(prime, coeffs, rhs)
        if rec is not None:
            rec.phase = "learn"
    raise AlgorithmInvariantError("linear phase failed to converge")


def has_solution_in(inst: CspInstance, classes, ctx: SolveContext):
    """Decide the reduction of every domain to the given class (type-4)."""
    restriction = {}
    for i, cls in enumerate(classes):
        elems = tuple(sorted(cls))
        if not elems:
            return False, None
        if set(elems) != set(inst.domains[i].elements):
            restriction[i] = Domain(elems)
    reduced = restrict_instance(inst, restriction) if restriction else inst
    child = ctx.child(RECURSE_CLASS) if restriction else ctx
    return _solve(reduced, child, RECURSE_CLASS if restriction else 0)


# --------------------------------------------------------------------------
# weakening to the boundary instance (the linear phase's middle part)


def _remove_weaker(constraints) -> list[Constraint]:
    out = _dedupe(constraints)
    changed = True
    while changed:
        changed = False
        for i, c in enumerate(out):
            if any(j != i and cons.is_weaker(c, other) for j, other in enumerate(out)):
                del out[i]
                changed = True
                break
    return out


def _solvable_everywhere(inst, constraints, factor, param, ctx) -> bool:
    """Does the weakened instance solve inside every parameter point's classes?

    The admissible parameter points form a coset of the whole group exactly
    when they include zero and every unit vector, so k+1 probes suffice.
    """
    candidate = inst.with_constraints(constraints)
    probes = [(0,) * param.k] + [
        tuple(1 if i == j else 0 for i in range(param.k)) for j in range(param.k)
    ]
    for a in probes:
        sat, _ = has_solution_in(candidate, apply_phi(factor, param, a), ctx)
        if not sat:
            return False
    return True


def weaken_to_theta_prime(
    inst: CspInstance,
    factor: FactorInstance,
    param: LinearParameterization,
    ctx: SolveContext,
) -> CspInstance:
    """Weaken constraints while some parameter point still has no solution.

    First drops constraints weaker than others, then repeatedly tries
    replacing one constraint by its congruence-weakened forms, and failing
    that by its one-variable-dropped projections, keeping any replacement
    that leaves some class combination unsolvable.  On return every single
    further weakening of either kind would make all class combinations
    solvable.
    """
    from .relations import project

    w = inst.algebra
    theta = _remove_weaker(inst.constraints)

    def weaken_once(constraints) -> list[Constraint] | None:
        for idx, c in enumerate(constraints):
            replacement = []
            for wc in cons.congruence_weakened(c, w):
                if not wc.relation.is_full:
                    replacement.extend(_essential_split(wc))
            omega = _remove_weaker(constraints[:idx] + replacement + constraints[idx + 1 :])
            if not _solvable_everywhere(inst, omega, factor, param, ctx):
                return omega
        for idx, c in enumerate(constraints):
            replacement = []
            if c.relation.arity >= 2:
                for drop in range(c.relation.arity):
                    coords = tuple(p for p in range(c.relation.arity) if p != drop)
                    pc = Constraint(
                        tuple(c.scope[p] for p in coords), project(c.relation, coords)
                    )
                    if not pc.relation.is_full:
                        replacement.extend(_essential_split(pc))
            omega = _remove_weaker(constraints[:idx] + replacement + constraints[idx + 1 :])
            if not _solvable_everywhere(inst, omega, factor, param, ctx):
                return omega
        return None

    while True:
        next_theta = weaken_once(theta)
        if next_theta is None:
            return inst.with_constraints(theta)
        theta = next_theta


def learn_equation(
    theta_prime: CspInstance,
    factor: FactorInstance,
    param: LinearParameterization,
    ctx: SolveContext,
):
    """Learn the linear equation describing where the weakened instance solves.

    Non-linked instances are swept prefix by prefix; linked ones are learned
    over all parameters at once.  Returns (prime, coeffs, rhs) or None when
    the weakened instance solves nowhere, in which case the caller's
    instance has no solutions at all.
    """
    point_cache: dict[tuple[int, ...], bool] = {}

    def member(a: tuple[int, ...]) -> bool:
        hit = point_cache.get(a)
        if hit is None:
            hit = has_solution_in(theta_prime, apply_phi(factor, param, a), ctx)[0]
            point_cache[a] = hit
        return hit

    lp = cons.linked_components(theta_prime)
    k = param.k
    if lp.linked:
        prefix_lengths = [k]
    else:
        prefix_lengths = list(range(1, k + 1))

    for i in prefix_lengths:
        moduli = param.moduli[:i]
        suffix_space = list(
            itertools.product(*(range(q) for q in param.moduli[i:]))
        )

        def prefix_member(q: tuple[int, ...]) -> bool:
            return any(member(tuple(q) + suffix) for suffix in suffix_space)

        result = learn_hyperplane_mixed(prefix_member, moduli)
        if result.kind == "full":
            if i == k:
                raise AlgorithmInvariantError(
                    "weakened instance solves everywhere after a failed probe"
                )
            continue
        if result.kind == "empty":
            return None
        if result.kind == "not_affine":
            raise AlgorithmInvariantError(
                "admissible parameter set is not a single linear equation"
            )
        plane = result.plane
        coeffs = {
            param.free_vars[j]: plane.coeffs[j]
            for j in range(i)
            if plane.coeffs[j]
        }
        _verify_equation(plane, i, param, prefix_member)
        return plane.prime, coeffs, plane.c0
    raise AlgorithmInvariantError("prefix sweep ended without learning an equation")


def _verify_equation(plane, i, param, prefix_member) -> None:
    """Soundness spot-check: points on the learned plane must be admissible."""
    space = 1
    for q in param.moduli[:i]:
        space *= q
    if space <= 1024:
        points = itertools.product(*(range(q) for q in param.moduli[:i]))
        for pt in points:
            pt = tuple(pt)
            if plane.accepts(pt) != prefix_member(pt):
                raise AlgorithmInvariantError("learned equation disagrees with the oracle")


# --------------------------------------------------------------------------
# public entry points


def solve_decide(inst: CspInstance, trace: RecursionTrace | None = None, on_reduction=None) -> bool:
    """Verdict only; the cheap path for differential runs."""
    ctx = SolveContext(inst.algebra.universe_size, trace=trace)
    ctx.on_reduction = on_reduction
    return _solve(inst, ctx)[0]


def extract_solution(inst: CspInstance, decide=None) -> tuple[int, ...]:
    """Witness by self-reduction: fix one variable at a time, ascending.

    Requires a satisfiable instance; verification failure at the end would
    mean the decision procedure itself is broken.
    """
    if decide is None:
        decide = solve_decide
    current = inst
    values: list[int] = []
    for i in range(inst.n_vars):
        found = None
        for a in current.domains[i].elements:
            candidate = restrict_instance(current, {i: Domain((a,))})
            if decide(candidate):
                found = a
                current = candidate
                break
        if found is None:
            raise UsageError("extract_solution needs a satisfiable instance")
        values.append(found)
    if not inst.satisfies(values):
        raise AlgorithmInvariantError("extracted assignment fails verification")
    return tuple(values)


def solve(
    inst: CspInstance, trace: RecursionTrace | None = None, on_reduction=None
) -> SolveOutcome:
    """Decide and, when satisfiable, return a verified assignment.

    Candidates propagated from the recursion's leaves satisfy the weakened
    instance solved there; when one fails the original constraints the
    witness is rebuilt by self-reduction over decision calls.
    """
    ctx = SolveContext(inst.algebra.universe_size, trace=trace)
    ctx.on_reduction = on_reduction
    sat, candidate = _solve(inst, ctx)
    if not sat:
        return SolveOutcome.unsat()
    if candidate is not None and inst.satisfies(candidate):
        return SolveOutcome.sat(candidate)
    assignment = extract_solution(inst)
    return SolveOutcome.sat(assignment)
