"""Seeded random instances whose relations are closed under a chosen operation.

Relations are built by sampling seed tuples from the full product space and
closing them coordinatewise, which guarantees preservation by construction.
Everything is a pure function of the configuration, so any instance can be
regenerated from its seed.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from .algebra import OperationTable, close_tuple_set, derive_special_wnu
from .errors import UsageError
from .instance import Constraint, CspInstance, make_instance
from .relations import Domain, relation
from .wnus import NAMED_WNUS, named_wnu

__all__ = ["GeneratorConfig", "generate_instance", "resolve_wnu"]


@dataclass(frozen=True)
class GeneratorConfig:
    seed: int
    domain_size: int = 2
    wnu: str = "sum3"
    n_vars: int = 4
    n_constraints: int = 4
    max_arity: int = 3
    density: float = 0.5

    def __post_init__(self) -> None:
        if self.domain_size < 1 or self.n_vars < 1 or self.n_constraints < 0:
            raise UsageError("generator sizes must be positive")
        if not 0.0 < self.density <= 1.0:
            raise UsageError("density must be in (0, 1]")
        if self.max_arity < 1:
            raise UsageError("max arity must be >= 1")


def resolve_wnu(name: str) -> OperationTable:
    """A named operation, or one loaded from `file:<path>`."""
    if name.startswith("file:"):
        from .fileio import load_algebra

        return load_algebra(name[len("file:") :])
    if name in NAMED_WNUS:
        return named_wnu(name)
    raise UsageError(f"unknown operation {name!r}; use one of "
                     f"{sorted(NAMED_WNUS)} or file:<path>")


def _random_constraint(rng: random.Random, w, n_vars, domain_size, max_arity, density):
    arity = rng.randint(1, min(max_arity, n_vars))
    scope = tuple(rng.sample(range(n_vars), arity))
    dom = Domain(tuple(range(domain_size)))
    domains = tuple(dom for _ in range(arity))
    space = list(itertools.product(range(domain_size), repeat=arity))
    n_seeds = max(1, round(density * len(space)))
    seeds = rng.sample(space, n_seeds)
    closed = close_tuple_set(seeds, w, domains)
    return Constraint(scope, relation(domains, closed))


def generate_instance(cfg: GeneratorConfig, w: OperationTable | None = None) -> CspInstance:
    """Deterministic instance for the configuration.

    All variables start with the full universe as domain; relations are
    seed-tuple closures, so preservation needs no re-checking.
    """
    if w is None:
        w = resolve_wnu(cfg.wnu)
    if w.universe_size != cfg.domain_size:
        raise UsageError(
            f"operation universe {w.universe_size} != domain size {cfg.domain_size}"
        )
    rng = random.Random(cfg.seed)
    constraints = [
        _random_constraint(
            rng, w, cfg.n_vars, cfg.domain_size, cfg.max_arity, cfg.density
        )
        for _ in range(cfg.n_constraints)
    ]
    dom = Domain(tuple(range(cfg.domain_size)))
    return make_instance(
        tuple(f"x{i}" for i in range(cfg.n_vars)),
        tuple(dom for _ in range(cfg.n_vars)),
        constraints,
        derive_special_wnu(w),
        check_preservation=False,
    )
