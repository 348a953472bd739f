"""A small zoo of special weak near-unanimity operations used across tests and the CLI.

All tables are verified special WNUs at import time in the test suite, not
here; construction stays cheap and explicit.
"""

from __future__ import annotations

from .algebra import OperationTable, op_from_function

__all__ = [
    "maj3",
    "sum3_mod2",
    "dual_discriminator3",
    "median3",
    "sum4_mod3",
    "twist3",
    "sum5_mod4",
    "pair_sum3",
    "named_wnu",
    "NAMED_WNUS",
]


def maj3() -> OperationTable:
    """Majority on {0,1}."""
    return op_from_function(2, 3, lambda x, y, z: (x & y) | (y & z) | (x & z))


def sum3_mod2() -> OperationTable:
    """x + y + z on Z_2."""
    return op_from_function(2, 3, lambda x, y, z: (x + y + z) % 2)


def dual_discriminator3() -> OperationTable:
    """Majority where defined, first argument on all-distinct triples; universe {0,1,2}."""

    def d(x, y, z):
        if y == z:
            return y
        if x == y or x == z:
            return x
        return x

    return op_from_function(3, 3, d)


def median3() -> OperationTable:
    """Median of the chain 0 < 1 < 2."""
    return op_from_function(3, 3, lambda x, y, z: sorted((x, y, z))[1])


def sum4_mod3() -> OperationTable:
    """x1 + x2 + x3 + x4 on Z_3 (idempotent at arity 4)."""
    return op_from_function(3, 4, lambda a, b, c, d: (a + b + c + d) % 3)


def twist3() -> OperationTable:
    """A three-element special WNU with congruence classes {0,1} / {2}.

    The quotient is the Boolean three-ary sum; inside {0,1} the one-off
    patterns behave like majority, while {0,2} and {1,2} close into
    two-element subuniverses with minority-like behaviour.  Built so that
    the only proper nontrivial congruence is {0,1}/{2}.
    """
    cls = {0: 0, 1: 0, 2: 1}
    one_off = {
        (1, 0): 0,  # w(1,0,0) and permutations
        (0, 1): 1,
        (2, 0): 2,
        (2, 1): 2,
        (0, 2): 0,
        (1, 2): 1,
    }

    def t(x, y, z):
        if x == y == z:
            return x
        if y == z:
            return one_off[(x, y)]
        if x == z:
            return one_off[(y, x)]
        if x == y:
            return one_off[(z, x)]
        return 2  # all distinct: class sum is 0+0+1 -> the {2} class

    table = op_from_function(3, 3, t)
    assert all(
        cls[t(x, y, z)] == (cls[x] + cls[y] + cls[z]) % 2
        for x in range(3)
        for y in range(3)
        for z in range(3)
    )
    return table


def sum5_mod4() -> OperationTable:
    """x1 + .. + x5 on Z_4 (idempotent at arity 5); no absorbing subuniverse."""
    return op_from_function(4, 5, lambda a, b, c, d, e: (a + b + c + d + e) % 4)


def pair_sum3() -> OperationTable:
    """Componentwise x + y + z on Z_2 x Z_2, elements coded as 2*hi + lo."""

    def s(x, y, z):
        hi = ((x >> 1) + (y >> 1) + (z >> 1)) % 2
        lo = ((x & 1) + (y & 1) + (z & 1)) % 2
        return 2 * hi + lo

    return op_from_function(4, 3, s)


NAMED_WNUS = {
    "maj3": maj3,
    "sum3": sum3_mod2,
    "dd3": dual_discriminator3,
    "median3": median3,
    "sum4mod3": sum4_mod3,
    "twist3": twist3,
    "sum5mod4": sum5_mod4,
    "pairsum3": pair_sum3,
}


def named_wnu(name: str) -> OperationTable:
    try:
        return NAMED_WNUS[name]()
    except KeyError:
        raise KeyError(f"unknown operation name {name!r}") from None
