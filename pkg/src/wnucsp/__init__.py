"""CSP solving for constraint languages preserved by a weak near-unanimity operation.

The package splits into:

- ``relations``:   extensional relations and their structural tests
- ``algebra``:     finite algebras, congruences, absorption, classification
- ``instance``:    CSP instances and constraints
- ``consistency``: propagation, connectivity, irreducibility, weakening
- ``linear``:      factor systems over prime fields, parameterisation, learning
- ``solver``:      the decision procedure and solution extraction
- ``oracle``:      brute-force reference solver
- ``generator``:   seeded random instances closed under a chosen operation
- ``fileio``:      the line-oriented instance file format
- ``diff``:        differential runs of solver vs oracle
- ``cli``:         the ``wnucsp`` command line
"""

from .errors import (
    AlgorithmInvariantError,
    InputFormatError,
    ResourceBudgetError,
    UsageError,
)

__all__ = [
    "AlgorithmInvariantError",
    "InputFormatError",
    "ResourceBudgetError",
    "UsageError",
]
