"""The splitter/connector game and the strategy-to-tree conversion.

A position is a connected instantiated subformula together with the
assignment history that produced it.  The splitter picks a variable of
the position, the connector picks a value and a connected component of
the instantiation.  Splitter strategies are resumable state machines
(``SplitterAlgorithm``): deterministic, cloneable at connector branch
points, halting with an explicit outcome.

``build_backdoor_tree`` plays a splitter algorithm against every
connector reply at once and assembles the resulting component backdoor
tree, or surfaces the algorithm's halt (a lower-bound certificate, a
separation, or a cap overflow).
"""

from __future__ import annotations

import copy
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Callable, Mapping

from .cnf import EMPTY_FORMULA, Formula
from .classes import BaseClassSpec, is_member
from .oracle import exact_backdoor_depth
from .tree import ComponentNode, LeafNode, TreeNode, VariableNode


@dataclass(frozen=True)
class GamePosition:
    formula: Formula
    history: Mapping[int, int]
    round: int

    def key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.formula.position_key()


@dataclass(frozen=True)
class SplitterMove:
    variable: int


@dataclass(frozen=True)
class ConnectorReply:
    value: int
    component_index: int


@dataclass(frozen=True)
class Win:
    """The position is in the base class."""


@dataclass(frozen=True)
class Separated:
    """The algorithm separated its payload from every live variable."""

    payload: Any
    position: GamePosition


@dataclass(frozen=True)
class Certificate:
    """A sound lower-bound certificate was found."""

    certificate: Any


@dataclass(frozen=True)
class CapRejection:
    """A practical cap was hit; explicitly not a soundness claim."""

    reason: str


@dataclass(frozen=True)
class Lost:
    """Variable-free non-member position: the splitter cannot move.

    Unreachable for the clause-budget classes (variable-free formulas
    always belong to them) but kept for rule completeness.
    """


HaltOutcome = Win | Separated | Certificate | CapRejection | Lost
StepResult = SplitterMove | HaltOutcome


class SplitterAlgorithm(ABC):
    """Resumable splitter strategy: (position, state) -> (move, state).

    ``step`` may mutate internal state and must be deterministic given
    the position and prior state.  ``clone`` deep-copies the state so the
    game tree can fork at connector branch points.
    """

    @abstractmethod
    def step(self, position: GamePosition) -> StepResult:
        raise NotImplementedError

    def clone(self) -> "SplitterAlgorithm":
        return copy.deepcopy(self)


class GameError(ValueError):
    """Invalid move or reply."""


def initial_positions(formula: Formula) -> list[GamePosition]:
    """One round-zero position per connected component."""
    return [GamePosition(comp, {}, 0) for comp in formula.components()]


def advance(position: GamePosition, move: SplitterMove, reply: ConnectorReply) -> GamePosition:
    """Apply one round of the game.  The caller must handle the case of
    the instantiation having no components (every clause satisfied)."""
    if move.variable not in position.formula.variables:
        raise GameError(f"variable {move.variable} does not occur in the position")
    if reply.value not in (0, 1):
        raise GameError(f"assignment value must be 0 or 1, got {reply.value}")
    instantiated = position.formula.apply({move.variable: reply.value})
    comps = instantiated.components()
    if not 0 <= reply.component_index < len(comps):
        raise GameError(
            f"component index {reply.component_index} invalid for {len(comps)} components"
        )
    history = dict(position.history)
    history[move.variable] = reply.value
    return GamePosition(comps[reply.component_index], history, position.round + 1)


class ConnectorStrategy(ABC):
    """Connector side of the game, including the starting component."""

    def choose_start(self, components: list[Formula]) -> int:
        return 0

    @abstractmethod
    def reply(self, position: GamePosition, variable: int) -> ConnectorReply:
        raise NotImplementedError


class FunctionConnector(ConnectorStrategy):
    def __init__(self, fn: Callable[[GamePosition, int], ConnectorReply], start: int = 0):
        self.fn = fn
        self.start = start

    def choose_start(self, components: list[Formula]) -> int:
        return self.start

    def reply(self, position: GamePosition, variable: int) -> ConnectorReply:
        return self.fn(position, variable)


class RandomConnector(ConnectorStrategy):
    def __init__(self, seed: int):
        import random

        self.rng = random.Random(seed)

    def choose_start(self, components: list[Formula]) -> int:
        return self.rng.randrange(len(components)) if components else 0

    def reply(self, position: GamePosition, variable: int) -> ConnectorReply:
        value = self.rng.randint(0, 1)
        comps = position.formula.apply({variable: value}).components()
        return ConnectorReply(value, self.rng.randrange(len(comps)) if comps else 0)


class AdversarialConnector(ConnectorStrategy):
    """Plays the reply that maximizes the exact backdoor depth of the
    next position (budgeted oracle).  Desk-scale only."""

    def __init__(self, spec: BaseClassSpec, budget: int = 8):
        self.spec = spec
        self.budget = budget

    def _depth(self, formula: Formula) -> int:
        d = exact_backdoor_depth(formula, self.spec, self.budget)
        return self.budget + 1 if d is None else d

    def choose_start(self, components: list[Formula]) -> int:
        if not components:
            return 0
        depths = [self._depth(c) for c in components]
        return max(range(len(components)), key=lambda i: (depths[i], -i))

    def reply(self, position: GamePosition, variable: int) -> ConnectorReply:
        best: tuple[int, int, int] | None = None
        for value in (0, 1):
            comps = position.formula.apply({variable: value}).components()
            if not comps:
                cand = (0, value, 0)
                if best is None or cand[0] > best[0]:
                    best = cand
                continue
            for idx, comp in enumerate(comps):
                cand = (self._depth(comp), value, idx)
                if best is None or cand[0] > best[0]:
                    best = cand
        assert best is not None
        return ConnectorReply(best[1], best[2])


class OracleSplitter(SplitterAlgorithm):
    """Optimal splitter: replays the depth recursion, branching on the
    smallest variable whose worse value still meets the budget."""

    def __init__(self, spec: BaseClassSpec, budget: int = 16):
        self.spec = spec
        self.budget = budget

    def step(self, position: GamePosition) -> StepResult:
        formula = position.formula
        if is_member(formula, self.spec):
            return Win()
        if not formula.variables:
            return Lost()
        total = exact_backdoor_depth(formula, self.spec, self.budget)
        if total is None:
            return CapRejection(f"exact depth exceeds oracle budget {self.budget}")
        best_var: int | None = None
        for v in sorted(formula.variables):
            worst = 0
            ok = True
            for eps in (0, 1):
                d = exact_backdoor_depth(formula.apply({v: eps}), self.spec, total - 1)
                if d is None:
                    ok = False
                    break
                worst = max(worst, d)
            if ok and worst == total - 1:
                best_var = v
                break
        assert best_var is not None, "depth recursion guarantees an optimal variable"
        return SplitterMove(best_var)


@dataclass(frozen=True)
class TranscriptStep:
    variable: int
    value: int
    component_index: int


@dataclass(frozen=True)
class GameTranscript:
    outcome: str  # win | separated | certificate | cap_rejected | lost | cap_exceeded
    halt: HaltOutcome | None
    start_index: int
    steps: tuple[TranscriptStep, ...]
    final_position: GamePosition


_HALT_NAMES = {
    Win: "win",
    Separated: "separated",
    Certificate: "certificate",
    CapRejection: "cap_rejected",
    Lost: "lost",
}


def run_game(
    formula: Formula,
    spec: BaseClassSpec,
    alg: SplitterAlgorithm,
    connector: ConnectorStrategy,
    round_cap: int,
) -> GameTranscript:
    """Play one full game; the transcript allows deterministic replay.

    Exceeding ``round_cap`` is reported as the ``cap_exceeded`` outcome,
    not an exception.
    """
    comps = formula.components()
    if not comps:
        pos = GamePosition(EMPTY_FORMULA, {}, 0)
        return GameTranscript("win", Win(), 0, (), pos)
    start = connector.choose_start(comps)
    if not 0 <= start < len(comps):
        raise GameError(f"connector chose starting component {start} of {len(comps)}")
    pos = GamePosition(comps[start], {}, 0)
    steps: list[TranscriptStep] = []
    machine = alg  # the algorithm instance is consumed; clone() to keep a pristine copy
    while True:
        if is_member(pos.formula, spec):
            return GameTranscript("win", Win(), start, tuple(steps), pos)
        if not pos.formula.variables:
            return GameTranscript("lost", Lost(), start, tuple(steps), pos)
        if pos.round >= round_cap:
            return GameTranscript("cap_exceeded", None, start, tuple(steps), pos)
        res = machine.step(pos)
        if not isinstance(res, SplitterMove):
            return GameTranscript(_HALT_NAMES[type(res)], res, start, tuple(steps), pos)
        variable = res.variable
        if variable not in pos.formula.variables:
            raise GameError(f"algorithm moved on {variable}, not a variable of the position")
        reply = connector.reply(pos, variable)
        if reply.value not in (0, 1):
            raise GameError(f"connector value {reply.value}")
        instantiated = pos.formula.apply({variable: reply.value})
        comps2 = instantiated.components()
        history = dict(pos.history)
        history[variable] = reply.value
        if not comps2:
            pos = GamePosition(EMPTY_FORMULA, history, pos.round + 1)
            steps.append(TranscriptStep(variable, reply.value, 0))
            continue
        if not 0 <= reply.component_index < len(comps2):
            raise GameError(
                f"connector chose component {reply.component_index} of {len(comps2)}"
            )
        pos = GamePosition(comps2[reply.component_index], history, pos.round + 1)
        steps.append(TranscriptStep(variable, reply.value, reply.component_index))


def transcript_to_json(transcript: GameTranscript) -> dict:
    """Replayable record of one play: outcome, starting component, and
    the (variable, value, component) choices in order."""
    return {
        "outcome": transcript.outcome,
        "start_index": transcript.start_index,
        "rounds": len(transcript.steps),
        "steps": [[s.variable, s.value, s.component_index] for s in transcript.steps],
        "final_clause_ids": list(transcript.final_position.formula.clause_ids),
    }


@dataclass
class BuildStats:
    machine_steps: int = 0
    variable_nodes: int = 0
    memo_hits: int = 0
    max_rounds: int = 0


@dataclass
class BuildResult:
    kind: str  # "tree" or "halt"
    tree: TreeNode | None
    halt: HaltOutcome | None
    stats: BuildStats


class CapExceededError(RuntimeError):
    """Some play ran past the round cap; carries the partial play."""

    def __init__(self, history: Mapping[int, int], rounds: int):
        super().__init__(f"round cap exceeded after {rounds} rounds")
        self.history = dict(history)
        self.rounds = rounds


class _Abort(Exception):
    def __init__(self, halt: HaltOutcome):
        self.halt = halt


def build_backdoor_tree(
    formula: Formula,
    spec: BaseClassSpec,
    alg: SplitterAlgorithm,
    round_cap: int,
    node_cap: int | None = None,
) -> BuildResult:
    """Explore every connector reply against ``alg`` and assemble the
    component backdoor tree.

    The algorithm state is cloned at each branch point.  Connected
    positions are memoized by (clause ids, variables); that key fixes
    every residual literal set, so a finished subtree is reusable no
    matter which history reached the position.  Any non-winning halt
    aborts the build and is returned as the result.  ``node_cap`` bounds
    the total number of machine steps; overrunning it aborts with a
    flagged rejection (exploration is exponential in the worst case).
    """
    memo: dict[tuple[tuple[int, ...], tuple[int, ...]], TreeNode] = {}
    stats = BuildStats()

    def expand(fm: Formula, history: dict[int, int], rounds: int, machine: SplitterAlgorithm) -> TreeNode:
        if is_member(fm, spec):
            return LeafNode(fm)
        comps = fm.components()
        if len(comps) >= 2:
            kids = tuple(expand(c, history, rounds, machine.clone()) for c in comps)
            return ComponentNode(fm, kids)
        if not fm.variables:
            raise _Abort(Lost())
        key = fm.position_key()
        hit = memo.get(key)
        if hit is not None:
            stats.memo_hits += 1
            return hit
        if rounds >= round_cap:
            raise CapExceededError(history, rounds)
        if node_cap is not None and stats.machine_steps >= node_cap:
            raise _Abort(CapRejection(f"game-tree exploration cap of {node_cap} steps hit"))
        stats.machine_steps += 1
        res = machine.step(GamePosition(fm, history, rounds))
        if isinstance(res, Win):
            raise GameError("algorithm claimed a win on a position outside the class")
        if not isinstance(res, SplitterMove):
            raise _Abort(res)
        v = res.variable
        if v not in fm.variables:
            raise GameError(f"algorithm moved on {v}, not a variable of the position")
        stats.variable_nodes += 1
        stats.max_rounds = max(stats.max_rounds, rounds + 1)
        kids = []
        for eps in (0, 1):
            child_formula = fm.apply({v: eps})
            child_history = dict(history)
            child_history[v] = eps
            kids.append(expand(child_formula, child_history, rounds + 1, machine.clone()))
        node = VariableNode(fm, v, kids[0], kids[1])
        memo[key] = node
        return node

    try:
        root = expand(formula, {}, 0, alg.clone())
        return BuildResult("tree", root, None, stats)
    except _Abort as abort:
        return BuildResult("halt", None, abort.halt, stats)


def splitter_wins_within(
    formula: Formula, spec: BaseClassSpec, alg: SplitterAlgorithm, rounds: int
) -> bool:
    """True when the algorithm reaches a winning position within the
    given number of rounds against every connector play."""
    try:
        result = build_backdoor_tree(formula, spec, alg, round_cap=rounds)
    except CapExceededError:
        return False
    return result.kind == "tree"
