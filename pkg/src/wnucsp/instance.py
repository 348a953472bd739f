"""CSP instances: variables with current subdomains plus extensional constraints.

Instances are immutable; every reduction builds a new instance through
helpers that keep relations filtered to the current domains.  Construction
through ``make_instance`` validates ingestion invariants (arity matching,
scope distinctness, relations preserved by the algebra's operation); the
solver's internal rebuilds use the trusted constructor directly, since they
only ever shrink domains and replace relations by definable ones.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from .algebra import OperationTable
from .errors import UsageError
from .relations import Domain, RelationTable, preserved_by, relation

__all__ = ["Constraint", "CspInstance", "make_instance", "restrict_instance"]


@dataclass(frozen=True)
class Constraint:
    """A scope of distinct variable indices and a relation of matching arity."""

    scope: tuple[int, ...]
    relation: RelationTable

    def __post_init__(self) -> None:
        if len(self.scope) != self.relation.arity:
            raise UsageError("scope length must equal relation arity")
        if len(set(self.scope)) != len(self.scope):
            raise UsageError("scope variables must be distinct")

    def sort_key(self):
        return (self.scope, tuple(sorted(self.relation.tuples)))


@dataclass(frozen=True)
class CspInstance:
    var_names: tuple[str, ...]
    domains: tuple[Domain, ...]
    constraints: tuple[Constraint, ...]
    algebra: OperationTable

    @property
    def n_vars(self) -> int:
        return len(self.domains)

    def key(self):
        """Canonical hashable content key (algebra-homogeneous contexts only)."""
        return (
            tuple(d.elements for d in self.domains),
            tuple(sorted((c.scope, tuple(sorted(c.relation.tuples))) for c in self.constraints)),
        )

    def satisfies(self, assignment) -> bool:
        """Does the full assignment (indexable by variable) satisfy every constraint?"""
        for c in self.constraints:
            if tuple(assignment[v] for v in c.scope) not in c.relation.tuples:
                return False
        return True

    def with_constraints(self, constraints) -> "CspInstance":
        return replace(self, constraints=tuple(constraints))


def _aligned_relation(c: Constraint, domains) -> RelationTable:
    doms = tuple(domains[v] for v in c.scope)
    if doms == c.relation.coord_domains:
        return c.relation
    keep = [
        t for t in c.relation.tuples if all(x in d for x, d in zip(t, doms))
    ]
    return relation(doms, keep)


def restrict_instance(inst: CspInstance, new_domains: dict[int, Domain]) -> CspInstance:
    """Shrink some variable domains and refilter every touched relation."""
    domains = list(inst.domains)
    for v, d in new_domains.items():
        if not set(d.elements) <= set(domains[v].elements):
            raise UsageError("restriction must shrink the domain")
        domains[v] = d
    touched = set(new_domains)
    constraints = tuple(
        c
        if not (set(c.scope) & touched)
        else Constraint(c.scope, _aligned_relation(c, domains))
        for c in inst.constraints
    )
    return CspInstance(inst.var_names, tuple(domains), constraints, inst.algebra)


def make_instance(
    var_names,
    domains,
    constraints,
    algebra: OperationTable,
    check_preservation: bool = True,
) -> CspInstance:
    """Validating ingestion constructor.

    Deduplicates nothing and keeps constraint order.  Scope variables must be
    distinct (parsers normalise repeats before reaching here), every variable
    domain must be closed under the operation, and with check_preservation
    every relation is verified invariant.
    """
    var_names = tuple(var_names)
    domains = tuple(domains)
    if len(var_names) != len(domains):
        raise UsageError("one domain per variable required")
    n = len(var_names)
    for d in domains:
        from .closure import vectors_closed

        if not vectors_closed([(x,) for x in d.elements], algebra):
            raise UsageError(f"variable domain {d.elements} not closed under the operation")
    fixed = []
    for c in constraints:
        if any(v < 0 or v >= n for v in c.scope):
            raise UsageError("constraint scope out of range")
        rel = _aligned_relation(c, domains)
        if check_preservation and not preserved_by(rel, algebra):
            raise UsageError("constraint relation not preserved by the operation")
        fixed.append(Constraint(c.scope, rel))
    return CspInstance(var_names, domains, tuple(fixed), algebra)
