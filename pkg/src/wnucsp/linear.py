"""The linear phase: quotient instances over products of prime cyclic groups,
their equation systems, the affine parameterisation of the solution space,
and learning a single equation from membership queries.

Equations never mix moduli: every affine subset of a mixed product of prime
cyclic groups decomposes as a product of per-prime affine subsets, so each
constraint contributes one equation block per prime.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .algebra import Congruence, LinearStructure, is_linear, quotient_algebra
from .errors import AlgorithmInvariantError, UsageError
from .instance import CspInstance

__all__ = [
    "FactorInstance",
    "LinearSystem",
    "LinearParameterization",
    "Hyperplane",
    "build_factor_instance",
    "gauss_solve",
    "GaussOutcome",
    "apply_phi",
    "learn_hyperplane",
    "learn_hyperplane_mixed",
    "LearnResult",
]


# --------------------------------------------------------------------------
# field helpers


def _inv(a: int, p: int) -> int:
    return pow(a, p - 2, p)


def _rref(rows: list[list[int]], width: int, p: int):
    """Reduced row echelon form in place; returns pivot column list.

    Rows are length width+1 with the right-hand side last.
    """
    pivots: list[int] = []
    r = 0
    for col in range(width):
        pivot = None
        for i in range(r, len(rows)):
            if rows[i][col] % p:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = _inv(rows[r][col] % p, p)
        rows[r] = [(x * inv) % p for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col] % p:
                f = rows[i][col] % p
                rows[i] = [(x - f * y) % p for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return pivots


# --------------------------------------------------------------------------
# system and factor instance


@dataclass
class LinearSystem:
    """Per-prime equation blocks over globally indexed slot variables."""

    slot_primes: tuple[int, ...]  # modulus of each slot variable
    blocks: dict[int, list[tuple[dict[int, int], int]]] = field(default_factory=dict)
    inconsistent: bool = False

    def add_equation(self, prime: int, coeffs: dict[int, int], rhs: int) -> None:
        coeffs = {v: c % prime for v, c in coeffs.items() if c % prime}
        rhs %= prime
        if not coeffs:
            if rhs:
                self.inconsistent = True
            return
        for v in coeffs:
            if self.slot_primes[v] != prime:
                raise UsageError("equation mixes moduli")
        self.blocks.setdefault(prime, []).append((coeffs, rhs))

    def copy(self) -> "LinearSystem":
        out = LinearSystem(self.slot_primes)
        out.blocks = {p: list(rows) for p, rows in self.blocks.items()}
        out.inconsistent = self.inconsistent
        return out


@dataclass
class FactorInstance:
    """Quotient of an instance by per-variable congruences with linear quotients."""

    sigmas: tuple[Congruence, ...]
    structures: tuple[LinearStructure, ...]
    var_slots: tuple[tuple[int, ...], ...]  # slot variable ids per instance variable
    slot_primes: tuple[int, ...]
    class_constraints: tuple[tuple[tuple[int, ...], frozenset], ...]  # (scope, class tuples)
    system: LinearSystem


def _affine_fit(points: list[tuple[int, ...]], p: int):
    """Equations cutting out an affine subset of Z_p^h, or None if not affine."""
    h = len(points[0])
    base = points[0]
    diffs = [[(x - b) % p for x, b in zip(pt, base)] for pt in points[1:]]
    basis_rows = [d + [0] for d in diffs]
    pivots = _rref(basis_rows, h, p)
    rank = len(pivots)
    if len(set(points)) != p**rank:
        return None
    basis = [row[:h] for row in basis_rows[:rank]]
    # every difference must reduce to zero against the basis
    for d in diffs:
        vec = list(d)
        for row, col in zip(basis, pivots):
            f = vec[col] % p
            if f:
                vec = [(x - f * y) % p for x, y in zip(vec, row)]
        if any(x % p for x in vec):
            return None
    # nullspace of the basis gives the equations
    free_cols = [c for c in range(h) if c not in pivots]
    equations = []
    for fc in free_cols:
        c_vec = [0] * h
        c_vec[fc] = 1
        for row, col in zip(basis, pivots):
            c_vec[col] = (-row[fc]) % p
        rhs = sum(c * b for c, b in zip(c_vec, base)) % p
        equations.append((c_vec, rhs))
    return equations


def build_factor_instance(inst: CspInstance, sigmas) -> FactorInstance:
    """Quotient every variable by its congruence and express constraints as equations.

    Every quotient must be linear; each factored relation must be exactly an
    affine subset of the product of its prime-power-free coordinates, which
    holds whenever the relations were invariant upstream.
    """
    sigmas = tuple(sigmas)
    structures = []
    var_slots: list[tuple[int, ...]] = []
    slot_primes: list[int] = []
    for i, sigma in enumerate(sigmas):
        qdom, qop = quotient_algebra(inst.domains[i], inst.algebra, sigma)
        ls = is_linear(qdom, qop)
        if ls is None:
            raise UsageError(f"quotient of variable {i} is not linear")
        structures.append(ls)
        slots = []
        for prime in ls.primes:
            slots.append(len(slot_primes))
            slot_primes.append(prime)
        var_slots.append(tuple(slots))

    system = LinearSystem(tuple(slot_primes))
    class_constraints = []
    for c in inst.constraints:
        classes = frozenset(
            tuple(sigmas[v].class_index(x) for v, x in zip(c.scope, t))
            for t in c.relation.tuples
        )
        class_constraints.append((c.scope, classes))
        slots = [s for v in c.scope for s in var_slots[v]]
        if not slots:
            if not classes:
                system.add_equation(2, {}, 1)  # unsatisfiable marker
            continue
        if not classes:
            system.add_equation(slot_primes[slots[0]], {}, 1)
            continue
        points = []
        for ct in sorted(classes):
            vec: list[int] = []
            for v, cls_idx in zip(c.scope, ct):
                vec.extend(structures[v].to_coords(cls_idx))
            points.append(tuple(vec))
        primes_here = sorted({slot_primes[s] for s in slots})
        by_prime = {}
        for p in primes_here:
            positions = [k for k, s in enumerate(slots) if slot_primes[s] == p]
            by_prime[p] = (positions, sorted({tuple(pt[k] for k in positions) for pt in points}))
        # the point set must factor as the product of its per-prime projections
        expected = 1
        for positions, proj in by_prime.values():
            expected *= len(proj)
        if expected != len(set(points)):
            raise AlgorithmInvariantError("factored relation is not a product across primes")
        for p, (positions, proj) in by_prime.items():
            eqs = _affine_fit(proj, p)
            if eqs is None:
                raise AlgorithmInvariantError("factored relation is not an affine subset")
            for c_vec, rhs in eqs:
                coeffs = {slots[positions[k]]: c_vec[k] for k in range(len(positions))}
                system.add_equation(p, coeffs, rhs)
    return FactorInstance(
        sigmas,
        tuple(structures),
        tuple(var_slots),
        tuple(slot_primes),
        tuple(class_constraints),
        system,
    )


# --------------------------------------------------------------------------
# solving and parameterising


@dataclass
class LinearParameterization:
    """Affine surjection from assignments of the free slots onto the solution set."""

    free_vars: tuple[int, ...]  # slot ids, ascending
    moduli: tuple[int, ...]  # prime of each free slot
    offset: tuple[int, ...]  # one value per slot variable
    columns: tuple[tuple[int, ...], ...]  # per free var, one delta per slot variable
    slot_primes: tuple[int, ...]

    @property
    def k(self) -> int:
        return len(self.free_vars)

    def point_count(self) -> int:
        total = 1
        for q in self.moduli:
            total *= q
        return total

    def slot_values(self, a: tuple[int, ...]) -> tuple[int, ...]:
        vals = list(self.offset)
        for aj, col in zip(a, self.columns):
            if aj:
                for s, delta in enumerate(col):
                    if delta:
                        vals[s] = (vals[s] + aj * delta) % self.slot_primes[s]
        return tuple(vals)


@dataclass
class GaussOutcome:
    status: str  # "no_solution" | "unique" | "param"
    unique_values: tuple[int, ...] | None = None  # per slot variable
    param: LinearParameterization | None = None


def gauss_solve(system: LinearSystem) -> GaussOutcome:
    """Eliminate each prime block; expose free slots and the affine map.

    Leftmost-pivot policy: pivots take the smallest slot ids, so the free
    variables are deterministic.
    """
    if system.inconsistent:
        return GaussOutcome("no_solution")
    nslots = len(system.slot_primes)
    offset = [0] * nslots
    pivot_rows: dict[int, tuple[dict[int, int], int]] = {}
    free: list[int] = []
    for p in sorted(system.blocks):
        vars_p = sorted(
            {v for coeffs, _ in system.blocks[p] for v in coeffs}
        )
        col_of = {v: i for i, v in enumerate(vars_p)}
        rows = []
        for coeffs, rhs in system.blocks[p]:
            row = [0] * len(vars_p) + [rhs]
            for v, c in coeffs.items():
                row[col_of[v]] = c
            rows.append(row)
        pivots = _rref(rows, len(vars_p), p)
        for r, _ in enumerate(rows):
            if r >= len(pivots) and any(rows[r][:-1]):
                raise AlgorithmInvariantError("rref left a nonzero non-pivot row")
        for r in range(len(pivots), len(rows)):
            if rows[r][-1] % p:
                return GaussOutcome("no_solution")
        for r, col in enumerate(pivots):
            coeffs = {
                vars_p[c]: rows[r][c]
                for c in range(len(vars_p))
                if c != col and rows[r][c]
            }
            pivot_rows[vars_p[col]] = (coeffs, rows[r][-1])
    for v in range(nslots):
        if v not in pivot_rows:
            free.append(v)
    # offset: free variables at zero
    for v, (coeffs, rhs) in pivot_rows.items():
        offset[v] = rhs % system.slot_primes[v]
    if not free:
        return GaussOutcome("unique", unique_values=tuple(offset))
    columns = []
    for f in free:
        p = system.slot_primes[f]
        col = [0] * nslots
        col[f] = 1
        for v, (coeffs, rhs) in pivot_rows.items():
            if f in coeffs:
                col[v] = (-coeffs[f]) % p
        columns.append(tuple(col))
    param = LinearParameterization(
        tuple(free),
        tuple(system.slot_primes[f] for f in free),
        tuple(offset),
        tuple(columns),
        system.slot_primes,
    )
    return GaussOutcome("param", param=param)


def apply_phi(factor: FactorInstance, param: LinearParameterization, a) -> tuple:
    """Per-variable congruence classes named by a point of the parameter space."""
    a = tuple(a)
    if len(a) != param.k:
        raise UsageError("parameter point has wrong dimension")
    vals = param.slot_values(a)
    out = []
    for i, slots in enumerate(factor.var_slots):
        coords = tuple(vals[s] for s in slots)
        cls_idx = factor.structures[i].from_coords(coords)
        out.append(factor.sigmas[i].classes[cls_idx])
    return tuple(out)


def slot_values_to_classes(factor: FactorInstance, vals) -> tuple:
    out = []
    for i, slots in enumerate(factor.var_slots):
        coords = tuple(vals[s] for s in slots)
        cls_idx = factor.structures[i].from_coords(coords)
        out.append(factor.sigmas[i].classes[cls_idx])
    return tuple(out)


# --------------------------------------------------------------------------
# hyperplane learning


@dataclass(frozen=True)
class Hyperplane:
    """c1*x1 + .. + ch*xh = c0 over Z_prime, normalised to leading coefficient 1.

    A degenerate plane (all coefficients zero, c0 = 1) encodes the empty set.
    """

    prime: int
    coeffs: tuple[int, ...]
    c0: int

    @property
    def degenerate(self) -> bool:
        return not any(self.coeffs)

    def accepts(self, point: tuple[int, ...]) -> bool:
        return sum(c * x for c, x in zip(self.coeffs, point)) % self.prime == self.c0


@dataclass
class LearnResult:
    kind: str  # "full" | "hyperplane" | "empty" | "not_affine"
    plane: Hyperplane | None = None
    queries: int = 0


def learn_hyperplane_mixed(member, moduli) -> LearnResult:
    """Learn the accepted subset of a mixed product of prime cyclic groups.

    The oracle's set is expected to be empty, everything, or the solution
    set of a single-prime linear equation; anything else is reported as
    not_affine when the recorded answers contradict every candidate.  Query
    count stays within max(moduli) * h + 1.
    """
    moduli = tuple(moduli)
    h = len(moduli)
    if h == 0:
        raise UsageError("learning needs at least one coordinate")
    budget = max(moduli) * h + 1
    cache: dict[tuple[int, ...], bool] = {}

    def query(pt: tuple[int, ...]) -> bool:
        if pt not in cache:
            if len(cache) >= budget:
                raise AlgorithmInvariantError("hyperplane learner exceeded its query budget")
            cache[pt] = bool(member(pt))
        return cache[pt]

    zero = tuple(0 for _ in range(h))
    probes = [zero] + [
        tuple(1 if i == j else 0 for i in range(h)) for j in range(h)
    ]
    d = None
    for pt in probes:
        if not query(pt):
            d = pt
            break
    if d is None:
        return LearnResult("full", queries=len(cache))

    coeffs = [0] * h
    prime_of_plane = None
    ok = True
    for j in range(h):
        q = moduli[j]
        accepted = []
        for a in range(q):
            if a == d[j]:
                continue
            pt = d[:j] + (a,) + d[j + 1 :]
            if query(pt):
                accepted.append(a)
        if len(accepted) > 1:
            ok = False
            break
        if accepted:
            a_star = accepted[0]
            coeffs[j] = (-_inv((a_star - d[j]) % q, q)) % q
            if prime_of_plane is None:
                prime_of_plane = q
            elif prime_of_plane != q:
                ok = False
                break
    if not ok:
        return LearnResult("not_affine", queries=len(cache))

    if prime_of_plane is None:
        # no coordinate line through d meets the set
        if any(cache.values()):
            return LearnResult("not_affine", queries=len(cache))
        plane = Hyperplane(moduli[0], tuple(0 for _ in range(h)), 1)
        return LearnResult("empty", plane=plane, queries=len(cache))

    p = prime_of_plane
    # with the scale fixed by sum(c_j d_j) - c0 = 1
    c0 = (sum(coeffs[j] * d[j] for j in range(h)) - 1) % p
    # normalise so the first nonzero coefficient is 1
    lead = next(c for c in coeffs if c)
    scale = _inv(lead, p)
    coeffs = [(c * scale) % p for c in coeffs]
    c0 = (c0 * scale) % p
    plane = Hyperplane(p, tuple(coeffs), c0)

    # the candidate plane constrains only its own prime's coordinates
    for pt, ans in cache.items():
        value = sum(coeffs[j] * pt[j] for j in range(h) if moduli[j] == p) % p
        if (value == c0) != ans:
            return LearnResult("not_affine", queries=len(cache))
    # spend any remaining budget probing unqueried points of the plane
    spare = budget - len(cache)
    if spare > 0:
        for pt in itertools.product(*(range(q) for q in moduli)):
            if spare <= 0:
                break
            value = sum(coeffs[j] * pt[j] for j in range(h) if moduli[j] == p) % p
            if value == c0 and pt not in cache:
                spare -= 1
                if not query(pt):
                    return LearnResult("not_affine", queries=len(cache))
    return LearnResult("hyperplane", plane=plane, queries=len(cache))


def learn_hyperplane(member, p: int, h: int) -> LearnResult:
    """Single-prime convenience wrapper over the mixed-modulus learner."""
    return learn_hyperplane_mixed(member, (p,) * h)
