"""End-to-end approximation: formula in, tree or certificate out.

Runs the level-(d+1) obstruction builder through the exhaustive game
exploration.  The outcome is a validated component backdoor tree, a
verified lower-bound certificate (then the backdoor depth exceeds the
budget), or an explicitly flagged heuristic rejection that makes no
soundness claim.
"""

from __future__ import annotations

from dataclasses import dataclass

from .cnf import Formula
from .classes import BaseClassSpec
from .game import (
    BuildStats,
    CapExceededError,
    CapRejection,
    Certificate,
    Lost,
    Separated,
    build_backdoor_tree,
)
from .obstruction import (
    LowerBoundCertificate,
    build_main_splitter,
    make_certificate,
    round_bound_main_capped,
    verify_certificate,
)
from .tree import TreeNode

ROUND_BOUND_CEILING = 10**9


@dataclass
class AnalyzeOutcome:
    kind: str  # tree | certificate | rejected | error
    tree: TreeNode | None = None
    certificate: LowerBoundCertificate | None = None
    reason: str | None = None
    stats: BuildStats | None = None
    round_bound: int = 0


def approximate_backdoor_tree(
    formula: Formula,
    spec: BaseClassSpec,
    budget: int,
    path_cap: int = 10**6,
    join_retry_cap: int = 64,
    node_cap: int | None = None,
) -> AnalyzeOutcome:
    """Either a component backdoor tree, or evidence that the backdoor
    depth exceeds ``budget``, or a flagged rejection.

    Every play ends within |var| rounds (each move consumes a variable),
    far below the theoretical round bound that is reported alongside.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    machine = build_main_splitter(formula, budget + 1, budget + 1, spec, path_cap)
    machine.join_retry_cap = join_retry_cap
    round_bound = round_bound_main_capped(budget + 1, budget + 1, spec.s, ROUND_BOUND_CEILING)
    round_cap = min(len(formula.variables) + 1, round_bound)
    try:
        result = build_backdoor_tree(formula, spec, machine, round_cap, node_cap=node_cap)
    except CapExceededError as exc:
        return AnalyzeOutcome("error", reason=str(exc), round_bound=round_bound)
    if result.kind == "tree":
        return AnalyzeOutcome(
            "tree", tree=result.tree, stats=result.stats, round_bound=round_bound
        )
    halt = result.halt
    if isinstance(halt, Certificate):
        cert = halt.certificate
        if verify_certificate(formula, cert):
            return AnalyzeOutcome(
                "certificate", certificate=cert, stats=result.stats, round_bound=round_bound
            )
        return AnalyzeOutcome(
            "rejected",
            reason=f"emitted {cert.kind} certificate failed verification",
            stats=result.stats,
            round_bound=round_bound,
        )
    if isinstance(halt, Separated):
        cert = make_certificate(halt.payload, spec)
        if verify_certificate(formula, cert):
            return AnalyzeOutcome(
                "certificate", certificate=cert, stats=result.stats, round_bound=round_bound
            )
        return AnalyzeOutcome(
            "rejected",
            reason="separated obstruction tree failed verification",
            stats=result.stats,
            round_bound=round_bound,
        )
    if isinstance(halt, CapRejection):
        return AnalyzeOutcome(
            "rejected", reason=halt.reason, stats=result.stats, round_bound=round_bound
        )
    if isinstance(halt, Lost):
        return AnalyzeOutcome(
            "error",
            reason="variable-free position outside the class: no tree exists",
            stats=result.stats,
            round_bound=round_bound,
        )
    return AnalyzeOutcome("error", reason=f"unexpected halt {halt!r}", round_bound=round_bound)
