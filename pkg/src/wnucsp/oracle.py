"""Exhaustive reference solver.

Ground truth for differential testing: plain lexicographic enumeration of
assignments with direct membership checks.  Shares nothing with the solver
beyond relation membership.
"""

from __future__ import annotations

import itertools

from .errors import ResourceBudgetError
from .instance import CspInstance

__all__ = ["brute_force_solve", "brute_force_solutions", "ORACLE_CAP"]

ORACLE_CAP = 10_000_000


def _space(inst: CspInstance) -> int:
    total = 1
    for d in inst.domains:
        total *= d.size
    return total


def brute_force_solve(inst: CspInstance, cap: int = ORACLE_CAP):
    """First satisfying assignment in lexicographic order, else None."""
    if _space(inst) > cap:
        raise ResourceBudgetError(f"assignment space exceeds oracle cap {cap}")
    for assignment in itertools.product(*(d.elements for d in inst.domains)):
        if inst.satisfies(assignment):
            return assignment
    return None


def brute_force_solutions(inst: CspInstance, cap: int = ORACLE_CAP):
    """All satisfying assignments, lexicographically ordered."""
    if _space(inst) > cap:
        raise ResourceBudgetError(f"assignment space exceeds oracle cap {cap}")
    return [
        assignment
        for assignment in itertools.product(*(d.elements for d in inst.domains))
        if inst.satisfies(assignment)
    ]
