"""Shared generators for the test suite.  Everything is seeded."""

from __future__ import annotations

import random
from functools import lru_cache

from bdepth import HORN, KROM, NULL, BaseClassSpec, Formula, is_member


def reference_depth(formula: Formula, spec) -> int:
    """Unpruned recursion over the depth definition; the independent
    oracle used to pin derived expectations."""

    @lru_cache(maxsize=None)
    def rec(contents: frozenset[frozenset[int]]) -> int:
        f = Formula.from_literal_sets(sorted(contents, key=sorted))
        if is_member(f, spec):
            return 0
        comps = f.components()
        if len(comps) > 1:
            return max(rec(c.content_key()) for c in comps)
        return 1 + min(
            max(rec(f.apply({v: 0}).content_key()), rec(f.apply({v: 1}).content_key()))
            for v in f.variables
        )

    return rec(formula.content_key())


def random_formula(rng: random.Random, max_vars=10, max_clauses=16, max_width=3) -> Formula:
    n = rng.randint(1, max_vars)
    m = rng.randint(1, max_clauses)
    clauses = []
    for _ in range(m):
        w = rng.randint(1, min(max_width, n))
        vs = rng.sample(range(1, n + 1), w)
        clauses.append([v * rng.choice([1, -1]) for v in vs])
    return Formula.from_literal_sets(clauses)


def random_member(rng: random.Random, spec: BaseClassSpec, max_vars=14, max_clauses=30) -> Formula:
    """A random formula inside the class, built constructively."""
    n = rng.randint(1, max_vars)
    m = rng.randint(1, max_clauses)
    clauses = []
    for _ in range(m):
        if spec == NULL:
            clauses.append([])
            continue
        if spec == KROM:
            w = rng.randint(1, min(2, n))
            vs = rng.sample(range(1, n + 1), w)
            clauses.append([v * rng.choice([1, -1]) for v in vs])
            continue
        # horn / dhorn: at most one literal of the special polarity
        special_sign = 1 if spec == HORN else -1
        plain = rng.randint(0, min(3, n))
        vs = rng.sample(range(1, n + 1), plain)
        lits = [-special_sign * v for v in vs]
        if rng.random() < 0.7:
            rest = [v for v in range(1, n + 1) if v not in vs]
            if rest:
                lits.append(special_sign * rng.choice(rest))
        if not lits:
            lits = [-special_sign * rng.randint(1, n)]
        clauses.append(lits)
    return Formula.from_literal_sets(clauses)


def random_assignment(rng: random.Random, variables, at_most=None) -> dict[int, int]:
    variables = sorted(variables)
    if not variables:
        return {}
    k = rng.randint(0, len(variables) if at_most is None else min(at_most, len(variables)))
    return {v: rng.randint(0, 1) for v in rng.sample(variables, k)}


def horn_adjacent_mix(rng: random.Random, max_vars=20, max_clauses=24) -> Formula:
    """Mostly Horn clauses with occasional extra positive literals."""
    n = rng.randint(4, max_vars)
    m = rng.randint(4, max_clauses)
    clauses = []
    for _ in range(m):
        negs = rng.sample(range(1, n + 1), rng.randint(0, min(3, n)))
        lits = [-v for v in negs]
        rest = [v for v in range(1, n + 1) if v not in negs]
        extra = rng.choices(rest, k=min(len(rest), rng.choice([0, 1, 1, 2, 2, 3])))
        lits.extend(set(extra))
        if lits:
            clauses.append(lits)
    if not clauses:
        clauses = [[1]]
    return Formula.from_literal_sets(clauses)
