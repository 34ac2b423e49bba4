"""Shared fixtures and independent oracles for the test suite.

The oracles here deliberately avoid the engine's own combinatorics: counts
come from recurrences, partitions from a different generator, expectations
from direct index-tuple sums.
"""

from fractions import Fraction

from freestoch.cumulants import moments_from_cumulants
from freestoch.partitions import (
    iter_exact_index_tuples,
    iter_geq_index_tuples,
)
from freestoch.processes import (
    make_custom_process,
    make_free_poisson,
    make_semicircular,
    tuple_increment_cumulants,
)

CUSTOM_SEQ = (
    Fraction(1, 2), Fraction(1, 3), Fraction(1, 5), Fraction(1, 7),
    Fraction(1, 11), Fraction(1, 13), Fraction(1, 17), Fraction(1, 19),
)

# centered variant: first cumulant zero, used for inner-singleton vanishing
CENTERED_SEQ = (
    Fraction(0), Fraction(1, 3), Fraction(1, 5), Fraction(1, 7),
    Fraction(1, 11), Fraction(1, 13), Fraction(1, 17), Fraction(1, 19),
)


def process_fixtures():
    return {
        "free_poisson": make_free_poisson(1),
        "semicircular": make_semicircular(),
        "custom": make_custom_process(CUSTOM_SEQ),
    }


def bell_numbers(n_max):
    """Bell numbers by the binomial recurrence."""
    from math import comb

    bell = [1]
    for n in range(n_max):
        bell.append(sum(comb(n, i) * bell[i] for i in range(n + 1)))
    return bell  # bell[k] = B_k, bell[0] = 1


def catalan(n):
    from math import comb

    return comb(2 * n, n) // (n + 1)


def set_partitions_by_insertion(elements):
    """Independent generator: insert the last element into every slot."""
    elements = list(elements)
    if not elements:
        yield []
        return
    rest, last = elements[:-1], elements[-1]
    for smaller in set_partitions_by_insertion(rest):
        for i, subset in enumerate(smaller):
            yield smaller[:i] + [subset + [last]] + smaller[i + 1:]
        yield smaller + [[last]]


def brute_expect_st(p, sub, spec):
    """Direct sum over exact-pattern index tuples of per-tuple mixed moments."""
    total = Fraction(0)
    for v in iter_exact_index_tuples(p, sub.n):
        total += moments_from_cumulants(tuple_increment_cumulants(spec, sub, v))
    return total


def brute_expect_pr(p, sub, spec):
    total = Fraction(0)
    for v in iter_geq_index_tuples(p, sub.n):
        total += moments_from_cumulants(tuple_increment_cumulants(spec, sub, v))
    return total
