import random
import time

import pytest

from bdepth import (
    DHORN,
    HORN,
    KROM,
    NULL,
    BaseClassSpec,
    Formula,
    alpha_literal_count,
    brute_force_sat,
    is_good,
    is_member,
    parse_class_spec,
    solve_horn,
    solve_in_class,
    solve_krom,
)
from bdepth.classes import NotInClassError, UnsupportedClassError
from bdepth.cnf import verify_witness
from bdepth.oracle import gen_chain, gen_disjoint_copies

from conftest import random_assignment, random_member

PRESETS = [HORN, DHORN, KROM, NULL]


class TestSpec:
    def test_presets(self):
        assert HORN.alpha == frozenset("+") and HORN.s == 1
        assert DHORN.alpha == frozenset("-") and DHORN.s == 1
        assert KROM == BaseClassSpec(frozenset("+-"), 2)
        assert NULL == BaseClassSpec(frozenset("+-"), 0)

    def test_alpha_nonempty(self):
        with pytest.raises(ValueError):
            BaseClassSpec(frozenset(), 1)

    def test_parse(self):
        assert parse_class_spec("horn") == HORN
        assert parse_class_spec("KROM") == KROM
        assert parse_class_spec("alpha=+,-;s=2") == KROM
        assert parse_class_spec("alpha=+;s=3") == BaseClassSpec(frozenset("+"), 3)
        with pytest.raises(ValueError):
            parse_class_spec("weird")


class TestClauseClassification:
    def test_alpha_count_horn(self):
        assert alpha_literal_count([1, -2, -3], HORN) == 1

    def test_alpha_count_krom(self):
        assert alpha_literal_count([1, 2, 3], KROM) == 3

    def test_alpha_count_empty(self):
        assert alpha_literal_count([], HORN) == 0
        assert alpha_literal_count([], NULL) == 0

    def test_good_bad(self):
        assert is_good([1, -2, -3], HORN)
        assert not is_good([1, 2], HORN)
        assert is_good([1, 2], KROM)
        assert is_good([], NULL) and not is_good([1], NULL)

    def test_monotone_badness(self):
        # removing literals never turns a bad clause good in reverse:
        # a bad subset forces the superset bad
        rng = random.Random(0)
        for _ in range(300):
            n = rng.randint(1, 8)
            full = [v * rng.choice([1, -1]) for v in range(1, n + 1)]
            sub = [l for l in full if rng.random() < 0.6]
            spec = rng.choice(PRESETS)
            if not is_good(sub, spec):
                assert not is_good(full, spec)


class TestMembership:
    def test_empty_formula_in_everything(self):
        for spec in PRESETS:
            assert is_member(Formula({}), spec)

    def test_chain_families(self):
        for n in (1, 3, 6):
            q = gen_chain(n, True)
            qp = gen_chain(n, False)
            assert is_member(q, DHORN)
            assert not is_member(q, HORN) and not is_member(q, KROM)
            assert is_member(qp, KROM) and is_member(qp, DHORN)
            assert not is_member(qp, HORN)

    def test_closure_under_assignments(self):
        rng = random.Random(1)
        for spec in PRESETS:
            for _ in range(250):
                f = random_member(rng, spec)
                tau = random_assignment(rng, f.variables)
                assert is_member(f.apply(tau), spec)


class TestHorn:
    def test_all_negative_sat_all_false(self):
        r = solve_horn(Formula.from_literal_sets([[-1, -2]]))
        assert r.satisfiable and r.witness == {1: 0, 2: 0}

    def test_unit_conflict(self):
        assert not solve_horn(Formula.from_literal_sets([[1], [-1]])).satisfiable

    def test_propagation_conflict(self):
        f = Formula.from_literal_sets([[1], [-1, 2], [-1, -2]])
        assert not solve_horn(f).satisfiable
        assert not brute_force_sat(f).satisfiable

    def test_rejects_non_horn(self):
        with pytest.raises(NotInClassError):
            solve_horn(Formula.from_literal_sets([[1, 2]]))

    def test_empty_clause_unsat(self):
        assert not solve_horn(Formula({1: []})).satisfiable


class TestKrom:
    def test_simple_sat(self):
        assert solve_krom(Formula.from_literal_sets([[1, 2]])).satisfiable

    def test_all_sign_patterns_unsat(self):
        f = Formula.from_literal_sets([[1, 2], [-1, 2], [1, -2], [-1, -2]])
        assert not solve_krom(f).satisfiable

    def test_three_clause_cycle(self):
        f = Formula.from_literal_sets([[1, 2], [-2, 3], [-3, -1]])
        r = solve_krom(f)
        assert r.satisfiable and verify_witness(f, r.witness)
        assert brute_force_sat(f).satisfiable

    def test_rejects_wide(self):
        with pytest.raises(NotInClassError):
            solve_krom(Formula.from_literal_sets([[1, 2, 3]]))

    def test_empty_clause_unsat(self):
        assert not solve_krom(Formula({1: []})).satisfiable


class TestSolveInClass:
    def test_dhorn_flip(self):
        f = Formula.from_literal_sets([[1, 2, -3]])
        r = solve_in_class(f, DHORN)
        assert r.satisfiable and verify_witness(f, r.witness)

    def test_null(self):
        assert not solve_in_class(Formula({1: []}), NULL).satisfiable
        assert solve_in_class(Formula({}), NULL).satisfiable

    def test_rejects_general_spec(self):
        with pytest.raises(UnsupportedClassError):
            solve_in_class(Formula({}), BaseClassSpec(frozenset("+-"), 3))

    def test_rejects_non_member(self):
        with pytest.raises(NotInClassError):
            solve_in_class(Formula.from_literal_sets([[1, 2]]), HORN)

    def test_agreement_with_brute_force(self):
        rng = random.Random(2)
        for spec in PRESETS:
            for _ in range(250):
                f = random_member(rng, spec)
                if len(f.variables) > 16:
                    continue
                r = solve_in_class(f, spec)
                b = brute_force_sat(f)
                assert r.satisfiable == b.satisfiable
                if r.satisfiable:
                    assert verify_witness(f, r.witness)
                    assert set(r.witness) == set(f.variables)

    def test_deterministic_witness_policy(self):
        # unforced variables land on the all-false / all-true side
        f = Formula.from_literal_sets([[-1, -2], [3]])
        assert solve_in_class(f, HORN).witness == {1: 0, 2: 0, 3: 1}
        g = Formula.from_literal_sets([[1, 2], [-3]])
        assert solve_in_class(g, DHORN).witness == {1: 1, 2: 1, 3: 0}


def test_linearity_smoke():
    # solve time on n disjoint copies stays near-linear in n
    block_horn = Formula.from_literal_sets([[1], [-1, 2], [-2, -3]])
    block_krom = Formula.from_literal_sets([[1, 2], [-1, 3], [-3, -2]])
    results = {}
    import gc

    for spec, block, solver in ((HORN, block_horn, solve_horn), (KROM, block_krom, solve_krom)):
        times = []
        sizes = [2000, 4000, 8000, 16000]
        solver(gen_disjoint_copies(block, sizes[0]))  # warm-up
        for n in sizes:
            f = gen_disjoint_copies(block, n)
            best = float("inf")
            for _ in range(2):
                gc.collect()
                t0 = time.perf_counter()
                r = solver(f)
                best = min(best, time.perf_counter() - t0)
                assert r.satisfiable
            times.append(best)
        # fitted growth exponent over the 8x size span
        import math

        xs = [math.log(n) for n in sizes]
        ys = [math.log(max(t, 1e-9)) for t in times]
        xbar, ybar = sum(xs) / len(xs), sum(ys) / len(ys)
        slope = sum((x - xbar) * (y - ybar) for x, y in zip(xs, ys)) / sum(
            (x - xbar) ** 2 for x in xs
        )
        results[spec.name] = slope
        assert slope <= 1.5, (spec.name, times)
