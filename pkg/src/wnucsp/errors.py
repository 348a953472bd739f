"""Exception taxonomy shared across the package.

Usage errors are caller mistakes (bad indices, violated preconditions).
Resource errors mean a configured search budget ran out; they are never
silently converted into an answer.  Invariant errors signal that an
internal guarantee of the algorithm was observed to fail, which always
means a bug somewhere upstream.
"""


class UsageError(ValueError):
    """A precondition of an operation was violated by the caller."""


class InputFormatError(ValueError):
    """An instance file (or embedded algebra block) failed to parse or validate."""


class ResourceBudgetError(RuntimeError):
    """A configured enumeration/generation budget was exhausted."""


class AlgorithmInvariantError(RuntimeError):
    """An internal invariant of the decision procedure failed at runtime."""
