"""Component backdoor trees: validation, metrics, and SAT decision.

A tree certifies an upper bound on backdoor depth.  Variable nodes
branch on both values of a variable, component nodes split a formula
into its connected components, leaves must lie in the base class.  Every
node carries the formula it stands for; validation recomputes those
formulas from the root instead of trusting them.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Union

from .cnf import Formula, SatResult
from .classes import BaseClassSpec, is_member, solve_in_class


@dataclass(frozen=True)
class LeafNode:
    formula: Formula


@dataclass(frozen=True)
class VariableNode:
    formula: Formula
    variable: int
    child0: "TreeNode"
    child1: "TreeNode"


@dataclass(frozen=True)
class ComponentNode:
    formula: Formula
    children: tuple["TreeNode", ...]


TreeNode = Union[LeafNode, VariableNode, ComponentNode]


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def validate_tree(formula: Formula, root: TreeNode, spec: BaseClassSpec) -> ValidationResult:
    """Check the defining conditions by recomputation from ``formula``.

    Returns a falsy result carrying the first failure found: root formula
    mismatch, a leaf outside the class, a variable-node child that is not
    the recomputed instantiation, a component node whose children are not
    exactly the connected components, or a variable repeated on a path.
    """

    def fail(reason: str) -> ValidationResult:
        return ValidationResult(False, reason)

    # trees from the game exploration share subtrees (a DAG); a node that
    # validated once against its own formula never needs re-walking
    done: set[int] = set()

    def walk(node: TreeNode, expected: Formula, path_vars: frozenset[int]) -> ValidationResult:
        if node.formula != expected:
            return fail("stored node formula differs from recomputation")
        if id(node) in done:
            return ValidationResult(True)
        if isinstance(node, LeafNode):
            if not is_member(expected, spec):
                return fail(f"leaf formula with clauses {expected.clause_ids} not in class {spec}")
            return ValidationResult(True)
        if isinstance(node, VariableNode):
            if node.variable in path_vars:
                return fail(f"variable {node.variable} repeats on a root-to-leaf path")
            if node.variable not in expected.variables:
                return fail(f"branch variable {node.variable} does not occur in the node formula")
            below = path_vars | {node.variable}
            for eps, child in ((0, node.child0), (1, node.child1)):
                res = walk(child, expected.apply({node.variable: eps}), below)
                if not res:
                    return res
            done.add(id(node))
            return ValidationResult(True)
        if isinstance(node, ComponentNode):
            comps = expected.components()
            if len(comps) < 2:
                return fail("component node over a connected formula")
            if len(comps) != len(node.children):
                return fail("component node child count differs from the component count")
            for child, comp in zip(node.children, comps):
                res = walk(child, comp, path_vars)
                if not res:
                    return res
            done.add(id(node))
            return ValidationResult(True)
        return fail(f"unknown node type {type(node).__name__}")

    return walk(root, formula, frozenset())


def tree_depth(root: TreeNode) -> int:
    """Largest number of variable nodes on any root-to-leaf path."""
    memo: dict[int, int] = {}

    def depth(node: TreeNode) -> int:
        cached = memo.get(id(node))
        if cached is not None:
            return cached
        if isinstance(node, LeafNode):
            d = 0
        elif isinstance(node, VariableNode):
            d = 1 + max(depth(node.child0), depth(node.child1))
        else:
            d = max(depth(c) for c in node.children)
        memo[id(node)] = d
        return d

    return depth(root)


def tree_variables(root: TreeNode) -> frozenset[int]:
    """All variables branched on anywhere in the tree."""
    out: set[int] = set()
    for node in iter_nodes(root):
        if isinstance(node, VariableNode):
            out.add(node.variable)
    return frozenset(out)


def iter_nodes(root: TreeNode):
    """Every distinct node once (shared subtrees visited a single time)."""
    seen: set[int] = set()
    stack = [root]
    while stack:
        node = stack.pop()
        if id(node) in seen:
            continue
        seen.add(id(node))
        yield node
        if isinstance(node, VariableNode):
            stack.append(node.child1)
            stack.append(node.child0)
        elif isinstance(node, ComponentNode):
            stack.extend(reversed(node.children))


def iter_leaves(root: TreeNode):
    for node in iter_nodes(root):
        if isinstance(node, LeafNode):
            yield node


def leaf_size_sum(root: TreeNode) -> int:
    """Sum of leaf formula sizes over root-to-leaf paths."""
    memo: dict[int, int] = {}

    def total(node: TreeNode) -> int:
        cached = memo.get(id(node))
        if cached is not None:
            return cached
        if isinstance(node, LeafNode):
            t = node.formula.size
        elif isinstance(node, VariableNode):
            t = total(node.child0) + total(node.child1)
        else:
            t = sum(total(c) for c in node.children)
        memo[id(node)] = t
        return t

    return total(root)


def count_nodes(root: TreeNode) -> tuple[int, int, int]:
    """(variable nodes, component nodes, leaves), distinct nodes only."""
    var = comp = leaf = 0
    for node in iter_nodes(root):
        if isinstance(node, LeafNode):
            leaf += 1
        elif isinstance(node, VariableNode):
            var += 1
        else:
            comp += 1
    return var, comp, leaf


def unfolded_node_count(root: TreeNode) -> int:
    """Node count of the tree with shared subtrees expanded; can be
    exponentially larger than the number of distinct nodes."""
    memo: dict[int, int] = {}

    def count(node: TreeNode) -> int:
        cached = memo.get(id(node))
        if cached is not None:
            return cached
        if isinstance(node, LeafNode):
            n = 1
        elif isinstance(node, VariableNode):
            n = 1 + count(node.child0) + count(node.child1)
        else:
            n = 1 + sum(count(c) for c in node.children)
        memo[id(node)] = n
        return n

    return count(root)


def decide_sat_with_tree(
    formula: Formula, root: TreeNode, spec: BaseClassSpec, jobs: int = 1
) -> SatResult:
    """Decide satisfiability through a valid tree (validation is the
    caller's job).  Leaves are solved by the class solver; component
    nodes combine children by AND, variable nodes by OR.  When SAT, the
    witness follows SAT branches (0 before 1) and is completed with 0 for
    variables no leaf constrains.
    """
    leaves = list(iter_leaves(root))
    if jobs > 1 and len(leaves) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda lf: solve_in_class(lf.formula, spec), leaves))
    else:
        results = [solve_in_class(lf.formula, spec) for lf in leaves]
    leaf_result = {id(lf): res for lf, res in zip(leaves, results)}

    status: dict[int, bool] = {}

    def fold(node: TreeNode) -> bool:
        cached = status.get(id(node))
        if cached is not None:
            return cached
        sat: bool
        if isinstance(node, LeafNode):
            sat = leaf_result[id(node)].satisfiable
        elif isinstance(node, VariableNode):
            sat = fold(node.child0) or fold(node.child1)
        else:
            sat = all(fold(c) for c in node.children)
        status[id(node)] = sat
        return sat

    if not fold(root):
        return SatResult(False)

    witness: dict[int, int] = {}
    collected: set[int] = set()

    def collect(node: TreeNode) -> None:
        if id(node) in collected:
            return
        collected.add(id(node))
        if isinstance(node, LeafNode):
            w = leaf_result[id(node)].witness
            if w:
                witness.update(w)
        elif isinstance(node, VariableNode):
            if status[id(node.child0)]:
                witness[node.variable] = 0
                collect(node.child0)
            else:
                witness[node.variable] = 1
                collect(node.child1)
        else:
            for c in node.children:
                collect(c)

    collect(root)
    for v in formula.variables:
        witness.setdefault(v, 0)
    return SatResult(True, witness)


class TreeFormatError(ValueError):
    """A serialized tree does not fit the formula it is loaded against."""


def tree_to_json(root: TreeNode) -> dict:
    """Serialize as a plain tree.  Shared subtrees are reused as shared
    dict objects in memory, but note that dumping deep trees built from
    heavily shared exploration results expands every path."""
    memo: dict[int, dict] = {}

    def build(node: TreeNode) -> dict:
        cached = memo.get(id(node))
        if cached is not None:
            return cached
        if isinstance(node, LeafNode):
            data = {"node": "leaf", "clause_ids": list(node.formula.clause_ids)}
        elif isinstance(node, VariableNode):
            data = {
                "node": "var",
                "variable": node.variable,
                "clause_ids": list(node.formula.clause_ids),
                "children": [build(node.child0), build(node.child1)],
            }
        else:
            data = {
                "node": "comp",
                "clause_ids": list(node.formula.clause_ids),
                "children": [build(c) for c in node.children],
            }
        memo[id(node)] = data
        return data

    return build(root)


def tree_from_json(data: dict, formula: Formula) -> TreeNode:
    """Rebuild a tree against ``formula``, recomputing every node formula
    and cross-checking the stored clause ids."""

    def build(node: dict, expected: Formula) -> TreeNode:
        stored = tuple(node.get("clause_ids", ()))
        if stored != expected.clause_ids:
            raise TreeFormatError(
                f"stored clause ids {stored} do not match recomputed {expected.clause_ids}"
            )
        kind = node.get("node")
        if kind == "leaf":
            return LeafNode(expected)
        if kind == "var":
            variable = int(node["variable"])
            if variable not in expected.variables:
                raise TreeFormatError(f"branch variable {variable} not in node formula")
            kids = node.get("children", [])
            if len(kids) != 2:
                raise TreeFormatError("variable node needs exactly two children")
            return VariableNode(
                expected,
                variable,
                build(kids[0], expected.apply({variable: 0})),
                build(kids[1], expected.apply({variable: 1})),
            )
        if kind == "comp":
            comps = expected.components()
            kids = node.get("children", [])
            if len(kids) != len(comps) or len(comps) < 2:
                raise TreeFormatError("component node children do not match the components")
            return ComponentNode(expected, tuple(build(k, c) for k, c in zip(kids, comps)))
        raise TreeFormatError(f"unknown node kind {kind!r}")

    return build(data, formula)
