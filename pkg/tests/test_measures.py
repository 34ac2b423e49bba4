from fractions import Fraction

import pytest

from freestoch.errors import CrossingPartitionError, DimensionError, SizeGuardError
from freestoch.measures import (
    MeasureWord,
    SUBDIVISION_BATTERY,
    free_sandwich_residual,
    diagonal_nesting_residual,
    exact_moment,
    example_formulas_check,
    expect_pr,
    expect_product_of_st,
    expect_st,
    identity_suite,
    inner_peeling_residual,
    l2_residual,
    limit_expect_st,
    limit_product_of_st,
    main_theorem_residual,
    st_report,
    st_uniform_formula,
)
from freestoch.partitions import (
    Partition,
    classify_classes,
    coarsenings,
    enumerate_noncrossing,
    enumerate_set_partitions,
    mobius,
)
from freestoch.processes import (
    Subdivision,
    make_custom_process,
    make_free_poisson,
    make_semicircular,
    make_tuple,
)

from helpers import (
    CENTERED_SEQ,
    brute_expect_pr,
    brute_expect_st,
    process_fixtures,
)

POISSON2 = make_tuple(make_free_poisson(1), "identical", k=2)


def test_poisson_uniform_closed_forms():
    # the order-2 diagonal trace is 1 + 1/N, the off-diagonal one 1 - 1/N
    for n in (1, 2, 4, 8):
        sub = Subdivision.uniform(n)
        assert expect_st(Partition.one_hat(2), sub, POISSON2) == 1 + Fraction(1, n)
        assert expect_st(Partition.zero_hat(2), sub, POISSON2) == 1 - Fraction(1, n)


def test_engine_matches_brute_force_small():
    subs = [Subdivision.uniform(3), Subdivision.of(["1/2", "1/3", "1/6"])]
    for name, base in process_fixtures().items():
        for k in (1, 2, 3):
            spec = make_tuple(base, "identical", k=k)
            for sub in subs:
                for p in enumerate_set_partitions(k):
                    assert expect_st(p, sub, spec) == brute_expect_st(p, sub, spec), (name, p)
                    assert expect_pr(p, sub, spec) == brute_expect_pr(p, sub, spec), (name, p)


def test_pr_at_zero_hat_is_the_full_moment():
    for sub in SUBDIVISION_BATTERY:
        for k in (1, 2, 3):
            spec = make_tuple(make_free_poisson(1), "identical", k=k)
            scaled = exact_moment(spec, sub.t)
            assert expect_pr(Partition.zero_hat(k), sub, spec) == scaled


def test_pr_equals_st_at_one_hat():
    sub = Subdivision.uniform(5)
    spec = make_tuple(make_semicircular(), "identical", k=3)
    one = Partition.one_hat(3)
    assert expect_pr(one, sub, spec) == expect_st(one, sub, spec)


def test_finite_inversion_and_mobius_consistency():
    sub = Subdivision.of(["1/7", "2/7", "4/7"])
    for name, base in process_fixtures().items():
        for k in (2, 3, 4):
            spec = make_tuple(base, "identical", k=k)
            for p in enumerate_set_partitions(k):
                via_st = sum(
                    (expect_st(s, sub, spec, max_blocks=k) for s in coarsenings(p)),
                    Fraction(0))
                assert expect_pr(p, sub, spec) == via_st, (name, p)
                back = sum(
                    (mobius(p, s, "full") * expect_pr(s, sub, spec) for s in coarsenings(p)),
                    Fraction(0))
                assert expect_st(p, sub, spec, max_blocks=k) == back, (name, p)


def test_uniform_formula_reproduces_finite_values():
    spec = make_tuple(make_custom_process(CENTERED_SEQ), "identical", k=4)
    for p in enumerate_set_partitions(4):
        formula = st_uniform_formula(p, spec)
        for n in (1, 2, 3, 7):
            assert formula.evaluate(n) == expect_st(p, Subdivision.uniform(n), spec)
        assert formula.limit == limit_expect_st(p, spec)


def test_crossing_patterns_decay():
    cross = Partition.parse("((1,3)(2,4))")
    for base in process_fixtures().values():
        spec = make_tuple(base, "identical", k=4)
        formula = st_uniform_formula(cross, spec)
        assert formula.constant_term == 0
        assert limit_expect_st(cross, spec) == 0


def test_finite_values_converge_to_the_limit():
    spec = make_tuple(make_free_poisson(1), "identical", k=3)
    p = Partition.parse("((1,3)(2))")
    limit = limit_expect_st(p, spec)
    gaps = [abs(expect_st(p, Subdivision.uniform(n), spec) - limit) for n in (2, 4, 8, 16)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_limit_formula_examples():
    poisson = make_tuple(make_free_poisson(1), "identical", k=4)
    t = Fraction(5, 3)
    for p in enumerate_noncrossing(4):
        assert limit_expect_st(p, poisson, t) == t ** p.num_blocks
    semi = make_tuple(make_semicircular(), "identical", k=4)
    for p in enumerate_noncrossing(4):
        expected = t ** p.num_blocks if all(len(b) == 2 for b in p.blocks) else 0
        assert limit_expect_st(p, semi, t) == expected


def test_st_report_invariants():
    spec = make_tuple(make_free_poisson(1), "identical", k=3)
    p = Partition.parse("((1,2)(3))")
    sub = Subdivision.uniform(6)
    rep = st_report(p, spec, sub)
    assert rep.uniform_formula.evaluate(6) == rep.finite_value
    assert rep.uniform_formula.limit == rep.limit_value


def test_product_single_factor_reduces_to_expect_st():
    sub = Subdivision.uniform(4)
    spec = make_tuple(make_free_poisson(1), "identical", k=3)
    p = Partition.parse("((1,3)(2))")
    assert expect_product_of_st([(p, "st")], spec, sub) == expect_st(p, sub, spec)
    assert expect_product_of_st([(p, "pr")], spec, sub) == expect_pr(p, sub, spec)


def test_product_of_two_diagonals_is_the_second_moment():
    sub = Subdivision.of(["1/2", "1/2"])
    spec = make_tuple(make_free_poisson(1), "identical", k=2)
    one1 = Partition.one_hat(1)
    value = expect_product_of_st([(one1, "st"), (one1, "st")], spec, sub)
    assert value == exact_moment(spec, sub.t)


def test_psi2_squared_matches_brute_force():
    # double off-diagonal sum: every pair of exact-pattern tuples, moments
    # computed through the cumulant transform rather than the engine
    from freestoch.cumulants import moments_from_cumulants
    from freestoch.partitions import iter_exact_index_tuples
    from freestoch.processes import tuple_increment_cumulants

    sub = Subdivision.uniform(4)
    zero2 = Partition.zero_hat(2)
    for base in (make_semicircular(), make_free_poisson(1)):
        spec4 = make_tuple(base, "identical", k=4)
        value = expect_product_of_st([(zero2, "st"), (zero2, "st")], spec4, sub)
        brute = Fraction(0)
        for va in iter_exact_index_tuples(zero2, sub.n):
            for vb in iter_exact_index_tuples(zero2, sub.n):
                functional = tuple_increment_cumulants(spec4, sub, va + vb)
                brute += moments_from_cumulants(functional)
        assert value == brute


def test_limit_product_matches_finite_extrapolation():
    spec4 = make_tuple(make_free_poisson(1), "identical", k=4)
    zero2 = Partition.zero_hat(2)
    factors = [(zero2, "st"), (zero2, "st")]
    limit = limit_product_of_st(factors, spec4)
    gaps = [abs(expect_product_of_st(factors, spec4, Subdivision.uniform(n)) - limit)
            for n in (4, 8, 16)]
    assert all(a > b for a, b in zip(gaps, gaps[1:]))


def test_main_theorem_residuals_vanish():
    t = Fraction(4, 3)
    for name, base in process_fixtures().items():
        for k in range(1, 5):
            spec = make_tuple(base, "identical", k=k)
            for p in enumerate_noncrossing(k):
                assert main_theorem_residual(p, spec, "L1", t) == 0, (name, p)
                assert main_theorem_residual(p, spec, "L2", t) == 0, (name, p)


def test_main_theorem_sides_for_a_known_case():
    spec = make_tuple(make_free_poisson(1), "identical", k=3)
    p = Partition.parse("((1,3)(2))")
    assert limit_expect_st(p, spec) == 1  # R_p at t = 1
    assert main_theorem_residual(p, spec, "L1") == 0


def test_main_theorem_guards():
    spec5 = make_tuple(make_free_poisson(1), "identical", k=5)
    with pytest.raises(SizeGuardError):
        main_theorem_residual(Partition.one_hat(5), spec5, "L2")
    with pytest.raises(CrossingPartitionError):
        spec4 = make_tuple(make_free_poisson(1), "identical", k=4)
        main_theorem_residual(Partition.parse("((1,3)(2,4))"), spec4, "L1")


def test_one_outer_class_shape():
    # single outer class: the residual reduces to scalar peeling onto the
    # diagonal of the outer block
    spec = make_tuple(make_custom_process(CENTERED_SEQ), "identical", k=4)
    for text in ("((1,4)(2,3))", "((1,4)(2)(3))", "((1,2,4)(3))"):
        p = Partition.parse(text)
        assert classify_classes(p).outer_count == 1
        assert main_theorem_residual(p, spec, "L1") == 0
        assert main_theorem_residual(p, spec, "L2") == 0
        assert inner_peeling_residual(p, spec, "L2") == 0


def test_inner_singleton_vanishing_for_centered_processes():
    # centered process, inner singleton: both the trace and the L2 norm of
    # the measure must vanish
    for base in (make_semicircular(), make_custom_process(CENTERED_SEQ)):
        for k in (3, 4):
            spec = make_tuple(base, "identical", k=k)
            for p in enumerate_noncrossing(k):
                split = classify_classes(p)
                if not any(len(b) == 1 for b in split.inner):
                    continue
                lhs = MeasureWord(Fraction(1), ((p, "st"),), spec.words)
                zero = MeasureWord(Fraction(0), (), ())
                assert limit_expect_st(p, spec) == 0
                assert l2_residual(lhs, zero) == 0


def test_inner_peeling_residuals():
    for base in process_fixtures().values():
        for k in (2, 3, 4):
            spec = make_tuple(base, "identical", k=k)
            for p in enumerate_noncrossing(k):
                assert inner_peeling_residual(p, spec, "L1") == 0
                assert inner_peeling_residual(p, spec, "L2") == 0


def test_diagonal_nesting():
    for base in process_fixtures().values():
        spec = make_tuple(base, "identical", k=4)
        for blocks in ([(1, 2), (3, 4)], [(1,), (2, 3, 4)], [(1, 2, 3, 4)]):
            assert diagonal_nesting_residual(spec, blocks) == 0
    with pytest.raises(ValueError):
        diagonal_nesting_residual(spec, [(1, 3), (2, 4)])


def test_free_sandwich_limit():
    for base in process_fixtures().values():
        for t in (Fraction(1), Fraction(2, 3)):
            res = free_sandwich_residual(base, (Fraction(5, 7), Fraction(1), Fraction(2)), t)
            assert res == 0


def test_example_formulas():
    for which in ("free_poisson", "brownian"):
        for k in range(1, 5):
            for p in enumerate_noncrossing(k):
                l1, l2 = example_formulas_check(which, p, Fraction(1))
                assert l1 == 0 and l2 == 0, (which, p)
    # order-2 diagonal of the centered process is the scalar t
    semi2 = make_tuple(make_semicircular(), "identical", k=2)
    t = Fraction(7, 5)
    assert limit_expect_st(Partition.one_hat(2), semi2, t) == t


def test_identity_suite_all_fixtures():
    for name, base in process_fixtures().items():
        records = identity_suite(base, 3, process_name=name)
        assert records and all(r["pass"] for r in records)
        checks = {r["check"] for r in records}
        assert {"st_pr_inversion", "mobius_inversion", "pr_outer_product",
                "inner_peeling_l1", "inner_peeling_l2", "diagonal_nesting",
                "free_sandwich_limit"} <= checks


def test_engine_guards():
    spec = make_tuple(make_free_poisson(1), "identical", k=2)
    with pytest.raises(SizeGuardError):
        expect_st(Partition.zero_hat(2), Subdivision.uniform(65), spec)
    spec6 = make_tuple(make_free_poisson(1), "identical", k=6)
    with pytest.raises(SizeGuardError):
        expect_st(Partition.zero_hat(6), Subdivision.uniform(4), spec6)
    with pytest.raises(DimensionError):
        expect_st(Partition.zero_hat(3), Subdivision.uniform(4), spec)
    spec9 = make_tuple(make_free_poisson(1), "identical", k=9)
    with pytest.raises(SizeGuardError):
        limit_product_of_st([(Partition.zero_hat(9), "st")], spec9)
