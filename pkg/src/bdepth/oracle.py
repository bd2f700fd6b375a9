"""Exact backdoor depth and size at desk scale, plus generator families.

The depth oracle is the recursive definition run literally: members have
depth 0, a connected non-member branches over every variable and both
values, and a disconnected formula takes the maximum over components.
It exists to validate the approximation pipeline, not to compete with
it, so everything is budgeted, memoized brute force.
"""

from __future__ import annotations

from itertools import combinations

from .cnf import Formula
from .classes import BaseClassSpec, is_member


def exact_backdoor_depth(formula: Formula, spec: BaseClassSpec, budget: int) -> int | None:
    """Exact backdoor depth if it is at most ``budget``, else None.

    Memoized on clause contents (ids erased) so subproblems reached by
    different assignment orders share work.  The min/max search prunes a
    variable as soon as one of its two branches exceeds the remaining
    budget; the returned value is exact whenever it is not None.
    """
    best_exact: dict[frozenset[frozenset[int]], int] = {}
    lower_bound: dict[frozenset[frozenset[int]], int] = {}

    def depth(fm: Formula, limit: int) -> int | None:
        if is_member(fm, spec):
            return 0
        key = fm.content_key()
        exact = best_exact.get(key)
        if exact is not None:
            return exact if exact <= limit else None
        if lower_bound.get(key, 0) > limit:
            return None
        comps = fm.components()
        if len(comps) > 1:
            worst = 0
            for comp in comps:
                r = depth(comp, limit)
                if r is None:
                    lower_bound[key] = max(lower_bound.get(key, 0), limit + 1)
                    return None
                worst = max(worst, r)
            best_exact[key] = worst
            return worst
        if limit <= 0:
            lower_bound[key] = max(lower_bound.get(key, 0), 1)
            return None
        occ: dict[int, int] = {}
        for cid in fm.clause_ids:
            for lit in fm.literals(cid):
                v = abs(lit)
                occ[v] = occ.get(v, 0) + 1
        order = sorted(fm.variables, key=lambda v: (-occ.get(v, 0), v))
        best: int | None = None
        for v in order:
            cap = limit - 1 if best is None else best - 2
            r0 = depth(fm.apply({v: 0}), cap)
            if r0 is None:
                continue
            r1 = depth(fm.apply({v: 1}), cap)
            if r1 is None:
                continue
            best = max(r0, r1) + 1
            if best == 1:
                break
        if best is None:
            lower_bound[key] = max(lower_bound.get(key, 0), limit + 1)
            return None
        best_exact[key] = best
        return best

    return depth(formula, budget)


def _all_instantiations_member(formula: Formula, spec: BaseClassSpec, variables: list[int]) -> bool:
    if not variables:
        return is_member(formula, spec)
    v, rest = variables[0], variables[1:]
    return _all_instantiations_member(formula.apply({v: 0}), spec, rest) and _all_instantiations_member(
        formula.apply({v: 1}), spec, rest
    )


def exact_backdoor_size(formula: Formula, spec: BaseClassSpec, budget: int) -> int | None:
    """Smallest strong backdoor size if at most ``budget``, else None.

    Enumerates variable subsets per connected component in ascending
    cardinality and checks every instantiation; component minima add up
    because membership is decided clause by clause.
    """
    remaining = budget
    total = 0
    for comp in formula.components():
        if is_member(comp, spec):
            continue
        comp_vars = sorted(comp.variables)
        found: int | None = None
        for k in range(0, min(len(comp_vars), remaining) + 1):
            for subset in combinations(comp_vars, k):
                if _all_instantiations_member(comp, spec, list(subset)):
                    found = k
                    break
            if found is not None:
                break
        if found is None:
            return None
        total += found
        remaining -= found
        if remaining < 0:
            return None
    return total


def gen_chain(n: int, with_y: bool) -> Formula:
    """Chain family: clauses c_i over x_{i-1}, x_i, optionally with a
    negated fresh y_i per clause.

    Variables are numbered x_i -> i + 1 (so x_0..x_n take 1..n+1) and
    y_i -> n + 1 + i.  With the y literals the chain is dual Horn but
    neither Horn nor Krom; without them it is Krom and dual Horn.
    """
    if n < 1:
        raise ValueError("chain needs n >= 1")
    x = lambda i: i + 1
    y = lambda i: n + 1 + i
    clauses = []
    for i in range(1, n + 1):
        lits = [x(i - 1), x(i)]
        if with_y:
            lits.append(-y(i))
        clauses.append(lits)
    return Formula.from_literal_sets(clauses)


def gen_disjoint_copies(formula: Formula, n: int) -> Formula:
    """n variable-disjoint copies; copy k maps the j-th variable (in id
    order) to (k-1)*V + j.  Clause ids run copy-major from 1."""
    if n < 1:
        raise ValueError("need n >= 1")
    base_vars = sorted(formula.variables)
    v_count = len(base_vars)
    rank = {v: j + 1 for j, v in enumerate(base_vars)}
    clauses = []
    for k in range(n):
        off = k * v_count
        for cid in formula.clause_ids:
            clauses.append(
                frozenset((1 if l > 0 else -1) * (off + rank[abs(l)]) for l in formula.literals(cid))
            )
    return Formula.from_literal_sets(clauses)


def gen_flip(formula: Formula) -> Formula:
    """Negate every literal; swaps Horn with dual Horn, fixes Krom."""
    return Formula(
        [(cid, frozenset(-l for l in formula.literals(cid))) for cid in formula.clause_ids]
    )
