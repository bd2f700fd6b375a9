"""Clause-defined base classes and their linear-time leaf solvers.

A class is given by a polarity set alpha and a per-clause budget s: a
formula belongs to it when every clause has at most s literals whose
polarity lies in alpha.  Horn, dual Horn, Krom and Null are the presets
with tractable satisfiability; membership tests and clause
classification work for arbitrary (alpha, s).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .cnf import Formula, SatResult, lit_var


class NotInClassError(ValueError):
    """A leaf solver was called on a formula outside its class."""


class UnsupportedClassError(ValueError):
    """Solving is only implemented for the preset classes."""


@dataclass(frozen=True)
class BaseClassSpec:
    """The pair (alpha, s): clauses may hold at most s alpha-literals."""

    alpha: frozenset[str]
    s: int

    def __post_init__(self):
        if not self.alpha or not self.alpha <= {"+", "-"}:
            raise ValueError("alpha must be a nonempty subset of {+, -}")
        if self.s < 0:
            raise ValueError("s must be non-negative")

    @property
    def name(self) -> str:
        key = ("".join(sorted(self.alpha)), self.s)
        return _PRESET_NAMES.get(key, f"alpha={','.join(sorted(self.alpha))};s={self.s}")

    def __str__(self) -> str:
        return self.name


HORN = BaseClassSpec(frozenset("+"), 1)
DHORN = BaseClassSpec(frozenset("-"), 1)
KROM = BaseClassSpec(frozenset("+-"), 2)
NULL = BaseClassSpec(frozenset("+-"), 0)

_PRESET_NAMES = {
    ("+", 1): "horn",
    ("-", 1): "dhorn",
    ("+-", 2): "krom",
    ("+-", 0): "null",
}
PRESETS = {"horn": HORN, "dhorn": DHORN, "krom": KROM, "null": NULL}


def parse_class_spec(text: str) -> BaseClassSpec:
    """Accept a preset name or the explicit ``alpha=+,-;s=2`` syntax."""
    key = text.strip().lower()
    if key in PRESETS:
        return PRESETS[key]
    alpha: frozenset[str] | None = None
    s: int | None = None
    for part in key.split(";"):
        part = part.strip()
        if part.startswith("alpha="):
            alpha = frozenset(p.strip() for p in part[len("alpha="):].split(",") if p.strip())
        elif part.startswith("s="):
            s = int(part[len("s="):])
    if alpha is None or s is None:
        raise ValueError(f"cannot parse class spec {text!r}")
    return BaseClassSpec(alpha, s)


def is_alpha_literal(lit: int, spec: BaseClassSpec) -> bool:
    return ("+" if lit > 0 else "-") in spec.alpha


def alpha_literal_count(literals: Iterable[int], spec: BaseClassSpec) -> int:
    return sum(1 for l in literals if is_alpha_literal(l, spec))


def alpha_variables(literals: Iterable[int], spec: BaseClassSpec) -> frozenset[int]:
    """Variables that alpha-occur in the clause."""
    return frozenset(lit_var(l) for l in literals if is_alpha_literal(l, spec))


def is_good(literals: Iterable[int], spec: BaseClassSpec) -> bool:
    return alpha_literal_count(literals, spec) <= spec.s


def is_member(formula: Formula, spec: BaseClassSpec) -> bool:
    return all(is_good(formula.literals(cid), spec) for cid in formula.clause_ids)


def bad_clause_ids(formula: Formula, spec: BaseClassSpec) -> tuple[int, ...]:
    return tuple(cid for cid in formula.clause_ids if not is_good(formula.literals(cid), spec))


def solve_horn(formula: Formula) -> SatResult:
    """Unit propagation from the all-false assignment.

    Per-clause counter of still-unsatisfied negative literals; a clause
    whose counter hits zero without being satisfied forces its positive
    literal, or derives the empty clause.  Linear in the formula size.
    """
    if not is_member(formula, HORN):
        raise NotInClassError("formula is not Horn")
    pos_of: dict[int, int | None] = {}
    neg_count: dict[int, int] = {}
    watch_neg: dict[int, list[int]] = {}
    watch_pos: dict[int, list[int]] = {}
    satisfied: set[int] = set()
    forced: set[int] = set()
    queue: list[int] = []
    for cid in formula.clause_ids:
        lits = formula.literals(cid)
        pos = next((l for l in lits if l > 0), None)
        pos_of[cid] = pos
        if pos is not None:
            watch_pos.setdefault(pos, []).append(cid)
        negs = [l for l in lits if l < 0]
        neg_count[cid] = len(negs)
        for l in negs:
            watch_neg.setdefault(-l, []).append(cid)
        if not negs:
            queue.append(cid)
    at = 0
    while at < len(queue):
        cid = queue[at]
        at += 1
        if cid in satisfied:
            continue
        pos = pos_of[cid]
        if pos is None:
            return SatResult(False)
        v = pos
        if v in forced:
            continue
        forced.add(v)
        satisfied.update(watch_pos.get(v, ()))
        for ocid in watch_neg.get(v, ()):
            neg_count[ocid] -= 1
            if neg_count[ocid] == 0 and ocid not in satisfied:
                queue.append(ocid)
    witness = {v: (1 if v in forced else 0) for v in formula.variables}
    return SatResult(True, witness)


def solve_krom(formula: Formula) -> SatResult:
    """2-SAT by strongly connected components of the implication graph."""
    if not is_member(formula, KROM):
        raise NotInClassError("formula is not Krom")
    edges: dict[int, list[int]] = {}
    nodes: set[int] = set()
    for v in formula.variables:
        nodes.add(v)
        nodes.add(-v)

    def add_edge(a: int, b: int) -> None:
        edges.setdefault(a, []).append(b)

    for cid in formula.clause_ids:
        lits = sorted(formula.literals(cid), key=lambda l: (lit_var(l), l < 0))
        if len(lits) == 0:
            return SatResult(False)
        if len(lits) == 1:
            add_edge(-lits[0], lits[0])
        else:
            a, b = lits
            add_edge(-a, b)
            add_edge(-b, a)
    for k in edges:
        edges[k].sort(key=lambda l: (lit_var(l), l < 0))

    # iterative Tarjan; components are numbered in completion order,
    # which is reverse topological order of the condensation
    order = sorted(nodes, key=lambda l: (lit_var(l), l < 0))
    index: dict[int, int] = {}
    low: dict[int, int] = {}
    comp: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = 0
    comp_count = 0
    for root in order:
        if root in index:
            continue
        work: list[tuple[int, int]] = [(root, 0)]
        while work:
            node, ei = work[-1]
            if ei == 0:
                index[node] = low[node] = counter
                counter += 1
                stack.append(node)
                on_stack.add(node)
            neigh = edges.get(node, [])
            advanced = False
            while ei < len(neigh):
                nb = neigh[ei]
                ei += 1
                if nb not in index:
                    work[-1] = (node, ei)
                    work.append((nb, 0))
                    advanced = True
                    break
                if nb in on_stack:
                    low[node] = min(low[node], index[nb])
            if advanced:
                continue
            work.pop()
            if low[node] == index[node]:
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp[w] = comp_count
                    if w == node:
                        break
                comp_count += 1
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
    witness: dict[int, int] = {}
    for v in sorted(formula.variables):
        if comp[v] == comp[-v]:
            return SatResult(False)
        # smaller component id = completed earlier = closer to a sink
        witness[v] = 1 if comp[v] < comp[-v] else 0
    return SatResult(True, witness)


def _flip(formula: Formula) -> Formula:
    return Formula([(cid, frozenset(-l for l in formula.literals(cid))) for cid in formula.clause_ids])


def solve_in_class(formula: Formula, spec: BaseClassSpec) -> SatResult:
    """Dispatch to the preset leaf solver.

    Horn runs unit propagation, dual Horn is solved through the polarity
    flip, Krom through the implication graph, and a Null member is
    satisfiable exactly when it has no clause at all.  Other specs raise:
    general (alpha, s) solving is deliberately unsupported.
    """
    if spec == HORN:
        return solve_horn(formula)
    if spec == DHORN:
        if not is_member(formula, DHORN):
            raise NotInClassError("formula is not dual Horn")
        res = solve_horn(_flip(formula))
        if not res.satisfiable:
            return res
        assert res.witness is not None
        return SatResult(True, {v: 1 - val for v, val in res.witness.items()})
    if spec == KROM:
        return solve_krom(formula)
    if spec == NULL:
        if not is_member(formula, NULL):
            raise NotInClassError("formula is not in the variable-free class")
        return SatResult(formula.is_empty, {} if formula.is_empty else None)
    raise UnsupportedClassError(f"no leaf solver for class {spec}")
