"""Lower-bound certificates and the splitter machines that produce them.

Three certificate kinds, each with an independent verifier:

* ``WideClause``: a clause with more than d + s alpha-literals rules out
  depth d, so a clause with k alpha-literals certifies depth >= k - s.
* ``ObstructionTree``: a recursive witness.  Depth 0 is a single bad
  clause; a join combines two depth-i trees, one living in the formula
  instantiated by a recorded assignment beta, connected by an incidence
  path, with no live variable occurring in clauses of both sides.  A
  depth-d tree certifies depth >= d + 1.
* ``SeparatorObstruction``: a sequence of shortest paths between bad
  clauses together with an assignment of the registered important
  variables; a large enough one forces large depth.

The machines: ``build_separator_splitter`` grows a separator obstruction
around a given path until the path is separated from every live
variable (or a certificate falls out), and ``build_main_splitter``
recursively builds obstruction trees of increasing depth, separating
each new connecting path before joining.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Union

from .cnf import (
    Formula,
    IncidencePath,
    Vertex,
    bfs_distances,
    clause_vertex,
    shortest_path,
)
from .classes import (
    BaseClassSpec,
    alpha_literal_count,
    alpha_variables,
    bad_clause_ids,
    is_good,
    is_member,
    parse_class_spec,
)
from .game import (
    CapRejection,
    Certificate,
    GamePosition,
    Separated,
    SplitterAlgorithm,
    SplitterMove,
    StepResult,
    Win,
)


class DanglingReferenceError(ValueError):
    """A certificate refers to a clause or variable the formula lacks."""


class ConstructionError(ValueError):
    """A splitter machine was seeded with invalid input."""


# ---------------------------------------------------------------------------
# certificate payloads


@dataclass(frozen=True)
class ObstructionLeaf:
    clause_id: int


@dataclass(frozen=True)
class ObstructionJoin:
    left: "ObstructionNode"
    beta: tuple[tuple[int, int], ...]  # sorted (variable, value) pairs
    right: "ObstructionNode"
    path: IncidencePath


ObstructionNode = Union[ObstructionLeaf, ObstructionJoin]


def obstruction_depth(node: ObstructionNode) -> int:
    if isinstance(node, ObstructionLeaf):
        return 0
    return 1 + obstruction_depth(node.left)


def obstruction_clause_ids(node: ObstructionNode) -> frozenset[int]:
    """All clauses of the witness: leaf clauses and path clauses."""
    if isinstance(node, ObstructionLeaf):
        return frozenset((node.clause_id,))
    return (
        obstruction_clause_ids(node.left)
        | obstruction_clause_ids(node.right)
        | frozenset(node.path.clause_ids)
    )


def obstruction_elements(node: ObstructionNode) -> frozenset[Vertex]:
    """Incidence-graph vertices of the witness: its clauses plus the
    variable vertices of its paths."""
    if isinstance(node, ObstructionLeaf):
        return frozenset((clause_vertex(node.clause_id),))
    own = frozenset(node.path.vertices)
    return obstruction_elements(node.left) | obstruction_elements(node.right) | own


@dataclass(frozen=True)
class SeparatorObstruction:
    paths: tuple[IncidencePath, ...]
    tau: tuple[tuple[int, int], ...]  # sorted (variable, value) pairs

    @property
    def size(self) -> int:
        return len(self.paths) + 1

    @property
    def assignment(self) -> dict[int, int]:
        return dict(self.tau)


@dataclass(frozen=True)
class WideClause:
    clause_id: int
    alpha_count: int


CertificatePayload = Union[ObstructionNode, SeparatorObstruction, WideClause]


@dataclass(frozen=True)
class LowerBoundCertificate:
    payload: CertificatePayload
    spec: BaseClassSpec
    claimed_bound: int  # meaning: backdoor depth >= claimed_bound

    @property
    def kind(self) -> str:
        if isinstance(self.payload, WideClause):
            return "wide_clause"
        if isinstance(self.payload, SeparatorObstruction):
            return "separator_obstruction"
        return "obstruction_tree"


# ---------------------------------------------------------------------------
# round bounds and thresholds


def separator_size_threshold(d: int) -> int:
    """Separator obstructions of this size certify depth >= d."""
    if d < 0:
        raise ValueError("d must be non-negative")
    return (8**d * (14**2 + 2 * d)) ** (2**d)


def round_bound_separate(d: int, s: int) -> int:
    """Worst-case rounds for the path-separation machine, exact."""
    if d < 0 or s < 0:
        raise ValueError("d and s must be non-negative")
    return (3 * s + d + 1) * separator_size_threshold(d)


def round_bound_separate_capped(d: int, s: int, ceiling: int) -> int:
    # saturating variant for loop guards; the exact value overflows use
    if d > 8:
        return ceiling
    return min(round_bound_separate(d, s), ceiling)


def round_bound_main(i: int, d: int, s: int) -> int:
    """Worst-case rounds for the level-i obstruction builder, exact."""
    if not 1 <= i <= d:
        raise ValueError(f"need 1 <= i <= d, got i={i}, d={d}")
    return (2**i - 1) * round_bound_separate(d, s)


def round_bound_main_capped(i: int, d: int, s: int, ceiling: int) -> int:
    if not 1 <= i <= d:
        raise ValueError(f"need 1 <= i <= d, got i={i}, d={d}")
    if d > 8:
        return ceiling
    return min(round_bound_main(i, d, s), ceiling)


def certificate_bound(payload: CertificatePayload, spec: BaseClassSpec) -> int:
    """The depth lower bound a payload supports: depth >= returned value."""
    if isinstance(payload, WideClause):
        return payload.alpha_count - spec.s
    if isinstance(payload, SeparatorObstruction):
        d = 0
        while separator_size_threshold(d + 1) <= payload.size:
            d += 1
        return d if separator_size_threshold(0) <= payload.size else 0
    if isinstance(payload, (ObstructionLeaf, ObstructionJoin)):
        return obstruction_depth(payload) + 1
    raise TypeError(f"unknown certificate payload {type(payload).__name__}")


def make_certificate(payload: CertificatePayload, spec: BaseClassSpec) -> LowerBoundCertificate:
    return LowerBoundCertificate(payload, spec, certificate_bound(payload, spec))


# ---------------------------------------------------------------------------
# verifiers


def _live_clause_vars(formula: Formula, cids: Iterable[int]) -> frozenset[int]:
    out: set[int] = set()
    for cid in cids:
        if cid in formula:
            for lit in formula.literals(cid):
                out.add(abs(lit))
    return frozenset(out)


def verify_obstruction_tree(formula: Formula, node: ObstructionNode, spec: BaseClassSpec) -> bool:
    """Check the recursive witness conditions against ``formula``.

    Leaves must be clauses that are bad in the ambient formula.  For a
    join, the left tree is checked in the ambient formula, the right
    tree in its beta-instantiation, the connecting path must run between
    vertices of the two trees, and no variable may occur both in a live
    clause of the left tree and a live clause of the right tree (clause
    contents taken in the respective ambients).  Unknown clause ids or
    beta variables raise, as distinct from returning False.
    """
    for cid in obstruction_clause_ids(node):
        if cid not in formula:
            raise DanglingReferenceError(f"clause {cid} not in formula")

    def check(n: ObstructionNode, ambient: Formula) -> bool:
        if isinstance(n, ObstructionLeaf):
            if n.clause_id not in ambient:
                return False
            return not is_good(ambient.literals(n.clause_id), spec)
        if obstruction_depth(n.left) != obstruction_depth(n.right):
            return False
        if not check(n.left, ambient):
            return False
        for v, val in n.beta:
            if v not in formula.variables:
                raise DanglingReferenceError(f"beta variable {v} not in formula")
            if val not in (0, 1):
                return False
        instantiated = ambient.apply(dict(n.beta))
        if not check(n.right, instantiated):
            return False
        left_vars = _live_clause_vars(ambient, obstruction_clause_ids(n.left))
        right_vars = _live_clause_vars(instantiated, obstruction_clause_ids(n.right))
        if left_vars & right_vars:
            return False
        path = n.path
        if not path.is_valid_in(ambient):
            return False
        left_elems = obstruction_elements(n.left)
        right_elems = obstruction_elements(n.right)
        forward = path.first in left_elems and path.last in right_elems
        backward = path.first in right_elems and path.last in left_elems
        return forward or backward

    return check(node, formula)


def check_separator_properties(
    formula: Formula,
    spec: BaseClassSpec,
    paths: tuple[IncidencePath, ...],
    v_increments: list[list[int]],
) -> list[str]:
    """Structural properties of a separator obstruction, checked per
    extension step.  Returns human-readable violations (empty = all
    hold).  Occurrences are taken in the original clause contents, which
    coincide with the contents at recording time for unregistered
    variables.
    """
    problems: list[str] = []
    if len(paths) != len(v_increments):
        return [f"{len(paths)} paths but {len(v_increments)} variable increments"]

    def alpha_occurs(v: int, cid: int) -> bool:
        return v in alpha_variables(formula.literals(cid), spec)

    def occurs(v: int, cid: int) -> bool:
        return v in (abs(l) for l in formula.literals(cid))

    x_cap = max((alpha_literal_count(formula.literals(cid), spec) for cid in formula.clause_ids), default=0)

    all_vars = formula.variables
    v_sets: list[set[int]] = []
    acc: set[int] = set()
    for incr in v_increments:
        acc = acc | set(incr)
        v_sets.append(set(acc))

    # edges and degrees of the growing tree
    edges: set[frozenset[Vertex]] = set()
    vertices: set[Vertex] = set()
    for i, path in enumerate(paths, start=1):
        for a, b in path.edges():
            edges.add(frozenset((a, b)))
        vertices.update(path.vertices)
        # the union so far must be a tree
        if len(edges) != len(vertices) - 1:
            problems.append(f"tree shape: step {i} union has {len(vertices)} vertices, {len(edges)} edges")
        v_i = v_sets[i - 1]
        t_clauses = sorted({cid for p in paths[:i] for cid in p.clause_ids})
        degree: dict[Vertex, int] = {}
        for e in edges:
            for vx in e:
                degree[vx] = degree.get(vx, 0) + 1
        candidates = {v for cid in t_clauses for v in (abs(l) for l in formula.literals(cid))}
        for v in sorted(candidates - v_i):
            # unregistered variables touch at most two clauses per path, consecutively
            for j, pj in enumerate(paths[:i], start=1):
                hits = [k for k, cid in enumerate(pj.clause_ids) if occurs(v, cid)]
                if len(hits) > 2:
                    problems.append(f"path occurrence: variable {v} occurs in {len(hits)} clauses of path {j}")
                elif len(hits) == 2 and hits[1] - hits[0] != 1:
                    problems.append(f"path occurrence: variable {v} in non-consecutive clauses of path {j}")
            # and alpha-occur in at most two clauses of the tree, consecutive in one path
            a_hits = [cid for cid in t_clauses if alpha_occurs(v, cid)]
            if len(a_hits) > 2:
                problems.append(f"alpha occurrence: variable {v} alpha-occurs in {len(a_hits)} tree clauses at step {i}")
            elif len(a_hits) == 2:
                consecutive = False
                for pj in paths[:i]:
                    cids = pj.clause_ids
                    for k in range(len(cids) - 1):
                        if {cids[k], cids[k + 1]} == set(a_hits):
                            consecutive = True
                if not consecutive:
                    problems.append(f"alpha occurrence: occurrences of {v} not consecutive in one path at step {i}")
            # clauses hosting unregistered alpha-occurrences stay at tree degree <= 2
            for cid in a_hits:
                if degree.get(clause_vertex(cid), 0) > 2:
                    problems.append(f"host degree: clause {cid} has degree > 2 but hosts unregistered {v}")
        # freshly registered variables alpha-occur in at most four tree clauses
        for v in v_increments[i - 1]:
            a_hits = [cid for cid in t_clauses if alpha_occurs(v, cid)]
            if len(a_hits) > 4:
                problems.append(f"fresh registration: variable {v} alpha-occurs in {len(a_hits)} clauses at step {i}")
        # registration per step is bounded (the seed step may register 2x)
        incr_size = len(v_increments[i - 1])
        limit = 2 * x_cap if i == 1 else 2 * spec.s + x_cap + 1
        if incr_size > limit:
            problems.append(f"registration size: step {i} registered {incr_size} variables, limit {limit}")
    # every variable has degree at most three in the final tree
    degree = {}
    for e in edges:
        for vx in e:
            degree[vx] = degree.get(vx, 0) + 1
    for v in sorted(all_vars):
        if degree.get(("v", v), 0) > 3:
            problems.append(f"variable degree: {v} has degree {degree[('v', v)]} in the final tree")
    return problems


def verify_separator_obstruction(
    formula: Formula, obstruction: SeparatorObstruction, spec: BaseClassSpec
) -> bool:
    """Replay the construction: every path must be a shortest path to a
    nearest bad clause in the correctly instantiated formula, the
    registered variable sets must match the endpoint case analysis, the
    assignment must cover exactly the registered variables, and the
    structural properties must hold.
    """
    paths = obstruction.paths
    if not paths:
        return False
    for path in paths:
        for kind, ident in path.vertices:
            if kind == "c":
                if ident not in formula:
                    raise DanglingReferenceError(f"clause {ident} not in formula")
            elif ident not in formula.variables:
                raise DanglingReferenceError(f"variable {ident} not in formula")
    tau = obstruction.assignment
    for v in tau:
        if v not in formula.variables:
            raise DanglingReferenceError(f"assigned variable {v} not in formula")

    p1 = paths[0]
    if p1.first[0] != "c" or p1.last[0] != "c":
        return False
    b0, b1 = p1.first[1], p1.last[1]
    if is_good(formula.literals(b0), spec) or is_good(formula.literals(b1), spec):
        return False
    if not p1.is_valid_in(formula):
        return False
    dist = bfs_distances(formula, [p1.first])
    if dist.get(p1.last) != p1.length:
        return False
    registered: set[int] = set(alpha_variables(formula.literals(b0), spec))
    registered |= alpha_variables(formula.literals(b1), spec)
    v_increments: list[list[int]] = [sorted(registered)]

    seen_vertices: set[Vertex] = set(p1.vertices)
    for index in range(1, len(paths)):
        tau_prev = {v: tau[v] for v in registered if v in tau}
        if len(tau_prev) != len(registered):
            return False  # an important variable is unassigned
        live = formula.apply(tau_prev)
        sources = [vx for vx in sorted(seen_vertices) if live.has_vertex(vx)]
        if not sources:
            return False
        path = paths[index]
        if path.last[0] != "c":
            return False
        b_cid = path.last[1]
        if b_cid not in live or is_good(live.literals(b_cid), spec):
            return False
        if not path.is_valid_in(live):
            return False
        if path.first not in seen_vertices:
            return False
        if any(vx in seen_vertices for vx in path.vertices[1:]):
            return False
        dist = bfs_distances(live, sources)
        reachable_bad = [
            cid for cid in bad_clause_ids(live, spec) if clause_vertex(cid) in dist
        ]
        if not reachable_bad:
            return False
        dmin = min(dist[clause_vertex(cid)] for cid in reachable_bad)
        if path.length != dmin or dist.get(path.last) != dmin:
            return False
        fresh: set[int] = set(alpha_variables(live.literals(b_cid), spec))
        a = path.first
        if path.length > 0:
            if a[0] == "v":
                c_cid = path.vertices[1][1]
                fresh.add(a[1])
                fresh |= alpha_variables(live.literals(c_cid), spec)
            elif a[1] != b_cid:
                c_cid = path.vertices[2][1]
                fresh |= alpha_variables(live.literals(a[1]), spec)
                fresh |= alpha_variables(live.literals(c_cid), spec)
        increment = sorted(fresh - registered)
        v_increments.append(increment)
        registered |= fresh
        seen_vertices.update(path.vertices)

    if set(tau) != registered:
        return False
    return not check_separator_properties(formula, spec, paths, v_increments)


def verify_certificate(formula: Formula, cert: LowerBoundCertificate) -> bool:
    """Certificate verifies and its claimed bound matches the rule."""
    payload = cert.payload
    if isinstance(payload, WideClause):
        if payload.clause_id not in formula:
            raise DanglingReferenceError(f"clause {payload.clause_id} not in formula")
        count = alpha_literal_count(formula.literals(payload.clause_id), cert.spec)
        if count != payload.alpha_count or count <= cert.spec.s:
            return False
    elif isinstance(payload, SeparatorObstruction):
        if not verify_separator_obstruction(formula, payload, cert.spec):
            return False
    else:
        if not verify_obstruction_tree(formula, payload, cert.spec):
            return False
    return cert.claimed_bound == certificate_bound(payload, cert.spec)


# ---------------------------------------------------------------------------
# the path-separation machine


class SeparatorMachine(SplitterAlgorithm):
    """Splitter strategy that separates a seed path from all live
    variables by growing a separator obstruction around it.

    Per step, in order: halt on a clause wider than d + s alpha-literals
    (sound certificate); halt when the obstruction reaches the size
    threshold (sound) or the practical path cap (flagged rejection);
    assign the smallest registered-but-unassigned variable still in the
    position; otherwise extend with a shortest path to a nearest bad
    clause, register the endpoint-case variables, and assign the
    smallest; when no vertex of the obstruction is left in the position,
    halt separated.
    """

    # test instrumentation: when set to a callable, every machine reports
    # its obstruction after seeding and after each extension (class-level
    # so clones made at connector branch points share the sink)
    trace_sink = None

    def __init__(
        self,
        root: Formula,
        ambient: Formula,
        path: IncidencePath,
        d: int,
        spec: BaseClassSpec,
        path_cap: int = 10**6,
    ):
        if path.first[0] != "c" or path.last[0] != "c":
            raise ConstructionError("seed path must run between two clauses")
        if not path.is_valid_in(ambient):
            raise ConstructionError("seed path is not a path of the ambient formula")
        for cid in (path.first[1], path.last[1]):
            if is_good(ambient.literals(cid), spec):
                raise ConstructionError(f"seed endpoint {cid} is not a bad clause")
        self.root = root
        self.ambient = ambient
        self.spec = spec
        self.d = d
        self.path_cap = path_cap
        self.paths: list[IncidencePath] = [path]
        seed = alpha_variables(ambient.literals(path.first[1]), spec) | alpha_variables(
            ambient.literals(path.last[1]), spec
        )
        self.v_increments: list[list[int]] = [sorted(seed)]
        self.registered: set[int] = set(seed)
        self.size_threshold = separator_size_threshold(d)
        self._trace()

    def _trace(self) -> None:
        sink = type(self).trace_sink
        if sink is not None:
            sink(
                {
                    "ambient": self.ambient,
                    "spec": self.spec,
                    "d": self.d,
                    "paths": tuple(self.paths),
                    "v_increments": [list(i) for i in self.v_increments],
                }
            )

    def _vertices(self) -> set[Vertex]:
        out: set[Vertex] = set()
        for p in self.paths:
            out.update(p.vertices)
        return out

    def _wide_clause(self, position: GamePosition) -> WideClause | None:
        formula = position.formula
        for cid in formula.clause_ids:
            if alpha_literal_count(formula.literals(cid), self.spec) > self.d + self.spec.s:
                root_count = alpha_literal_count(self.root.literals(cid), self.spec)
                return WideClause(cid, root_count)
        return None

    def _snapshot(self, position: GamePosition) -> SeparatorObstruction:
        tau = tuple(
            sorted((v, position.history.get(v, 0)) for v in self.registered)
        )
        return SeparatorObstruction(tuple(self.paths), tau)

    def step(self, position: GamePosition) -> StepResult:
        formula = position.formula
        wide = self._wide_clause(position)
        if wide is not None:
            return Certificate(make_certificate(wide, self.spec))
        if is_member(formula, self.spec):
            return Win()
        if len(self.paths) + 1 >= self.size_threshold:
            return Certificate(make_certificate(self._snapshot(position), self.spec))
        if len(self.paths) >= self.path_cap:
            return CapRejection(
                f"separator obstruction grew past the practical cap of {self.path_cap} paths"
            )
        while True:
            pending = sorted(
                v
                for v in self.registered
                if v not in position.history and v in formula.variables
            )
            if pending:
                return SplitterMove(pending[0])
            sources = [vx for vx in sorted(self._vertices()) if formula.has_vertex(vx)]
            if not sources:
                return Separated(self._snapshot(position), position)
            targets = [clause_vertex(cid) for cid in bad_clause_ids(formula, self.spec)]
            path = shortest_path(formula, sources, targets)
            assert path is not None, "position is connected and has a bad clause"
            self.paths.append(path)
            fresh = set(alpha_variables(formula.literals(path.last[1]), self.spec))
            a = path.first
            if path.length > 0:
                if a[0] == "v":
                    fresh.add(a[1])
                    fresh |= alpha_variables(formula.literals(path.vertices[1][1]), self.spec)
                elif a[1] != path.last[1]:
                    fresh |= alpha_variables(formula.literals(a[1]), self.spec)
                    fresh |= alpha_variables(formula.literals(path.vertices[2][1]), self.spec)
            self.v_increments.append(sorted(fresh - self.registered))
            self.registered |= fresh
            self._trace()
            # the new bad clause is live, so its alpha-variables are
            # unassigned and in the position: the next loop pass moves


def build_separator_splitter(
    ambient: Formula,
    path: IncidencePath,
    d: int,
    spec: BaseClassSpec,
    path_cap: int = 10**6,
    root: Formula | None = None,
) -> SeparatorMachine:
    """Machine for separating ``path`` (a shortest path between two bad
    clauses of ``ambient``); may also be resumed mid-game from any
    position descending from ``ambient``."""
    return SeparatorMachine(root if root is not None else ambient, ambient, path, d, spec, path_cap)


# ---------------------------------------------------------------------------
# the recursive obstruction-tree machine


class MainMachine(SplitterAlgorithm):
    """Level-i obstruction builder as an explicit phase machine.

    Level 1 finds two variable-disjoint bad clauses, joins them by a
    shortest path, and separates that path (if every pair of bad clauses
    shares a variable it assigns alpha-variables of the smallest bad
    clause until the position resolves or a disjoint pair appears; a
    single bad clause is handled the same way).  Level i wraps two
    level-(i-1) runs, joins their trees by a shortest path between two
    leaf clauses, and separates the path.  Every join is self-checked
    against the verifier's sharing condition; on failure the second tree
    is rebuilt from the current position.
    """

    def __init__(
        self,
        root: Formula,
        level: int,
        d: int,
        spec: BaseClassSpec,
        path_cap: int = 10**6,
        join_retry_cap: int = 64,
    ):
        if level < 1:
            raise ConstructionError("level must be at least 1")
        self.root = root
        self.level = level
        self.d = d
        self.spec = spec
        self.path_cap = path_cap
        self.join_retry_cap = join_retry_cap
        self.ambient: Formula | None = None
        self.start_history: dict[int, int] | None = None
        self.phase = "build_first" if level > 1 else "base"
        self.sub: SplitterAlgorithm | None = None
        self.first_tree: ObstructionNode | None = None
        self.joined_tree: ObstructionNode | None = None
        self.retries = 0

    # -- helpers

    def _window(self, upto: dict[int, int]) -> tuple[tuple[int, int], ...]:
        # assignments made since this machine was bound
        assert self.start_history is not None
        return tuple(sorted((v, val) for v, val in upto.items() if v not in self.start_history))

    def _wide_clause(self, position: GamePosition) -> WideClause | None:
        formula = position.formula
        for cid in formula.clause_ids:
            if alpha_literal_count(formula.literals(cid), self.spec) > self.d + self.spec.s:
                return WideClause(cid, alpha_literal_count(self.root.literals(cid), self.spec))
        return None

    def _join_ok(self, left: ObstructionNode, beta: tuple[tuple[int, int], ...], right: ObstructionNode) -> bool:
        assert self.ambient is not None
        instantiated = self.ambient.apply(dict(beta))
        left_vars = _live_clause_vars(self.ambient, obstruction_clause_ids(left))
        right_vars = _live_clause_vars(instantiated, obstruction_clause_ids(right))
        return not (left_vars & right_vars)

    def _spawn_separator(self, join_path: IncidencePath) -> SeparatorMachine:
        assert self.ambient is not None
        return SeparatorMachine(self.root, self.ambient, join_path, self.d, self.spec, self.path_cap)

    def _leaf_for_join(self, node: ObstructionNode) -> int:
        return min(obstruction_clause_ids(node))

    # -- base level

    def _base_step(self, position: GamePosition) -> StepResult | None:
        """Returns a move/halt, or None after arming the separator phase."""
        assert self.ambient is not None and self.start_history is not None
        formula = position.formula
        bad = bad_clause_ids(formula, self.spec)
        pair: tuple[int, int] | None = None
        for i, c1 in enumerate(bad):
            vars1 = formula.clause(c1).variables
            for c2 in bad[i + 1 :]:
                if not (vars1 & formula.clause(c2).variables):
                    pair = (c1, c2)
                    break
            if pair:
                break
        if pair is None:
            # single bad clause, or all pairs entangled: assign its
            # alpha-variables; the position either resolves or frees a pair
            target = formula.literals(bad[0])
            alphas = sorted(alpha_variables(target, self.spec))
            return SplitterMove(alphas[0])
        c1, c2 = pair
        path = shortest_path(self.ambient, [clause_vertex(c1)], [clause_vertex(c2)])
        assert path is not None, "both clauses live in the connected ambient formula"
        beta = self._window(dict(position.history))
        tree = ObstructionJoin(ObstructionLeaf(c1), beta, ObstructionLeaf(c2), path)
        self.joined_tree = tree
        self.sub = self._spawn_separator(path)
        self.phase = "separate"
        return None

    # -- stepping

    def step(self, position: GamePosition) -> StepResult:
        if self.ambient is None:
            self.ambient = position.formula
            self.start_history = dict(position.history)
        wide = self._wide_clause(position)
        if wide is not None:
            return Certificate(make_certificate(wide, self.spec))
        if is_member(position.formula, self.spec):
            return Win()
        while True:
            if self.phase == "base":
                res = self._base_step(position)
                if res is not None:
                    return res
                continue
            if self.phase == "build_first":
                if self.sub is None:
                    self.sub = MainMachine(
                        self.root, self.level - 1, self.d, self.spec, self.path_cap, self.join_retry_cap
                    )
                res = self.sub.step(position)
                if isinstance(res, Separated):
                    self.first_tree = res.payload
                    self.sub = None
                    self.phase = "build_second"
                    continue
                return res
            if self.phase == "build_second":
                if self.sub is None:
                    self.sub = MainMachine(
                        self.root, self.level - 1, self.d, self.spec, self.path_cap, self.join_retry_cap
                    )
                res = self.sub.step(position)
                if isinstance(res, Separated):
                    assert self.first_tree is not None
                    second = res.payload
                    assert isinstance(self.sub, MainMachine)
                    sub_start = self.sub.start_history or {}
                    beta = self._window(dict(sub_start))
                    if not self._join_ok(self.first_tree, beta, second):
                        self.retries += 1
                        self.sub = None
                        if self.retries > self.join_retry_cap:
                            return CapRejection(
                                f"obstruction join failed {self.retries} times"
                            )
                        continue
                    c1 = self._leaf_for_join(self.first_tree)
                    c2 = self._leaf_for_join(second)
                    assert self.ambient is not None
                    path = shortest_path(self.ambient, [clause_vertex(c1)], [clause_vertex(c2)])
                    assert path is not None
                    self.joined_tree = ObstructionJoin(self.first_tree, beta, second, path)
                    self.sub = self._spawn_separator(path)
                    self.phase = "separate"
                    continue
                return res
            if self.phase == "separate":
                assert self.sub is not None
                res = self.sub.step(position)
                if isinstance(res, Separated):
                    assert self.joined_tree is not None
                    return Separated(self.joined_tree, position)
                return res
            raise AssertionError(f"unknown phase {self.phase}")


def build_main_splitter(
    root: Formula,
    i: int,
    d: int,
    spec: BaseClassSpec,
    path_cap: int = 10**6,
) -> MainMachine:
    """Machine realizing the level-i recursion for budget d."""
    if not 1 <= i <= d:
        raise ConstructionError(f"need 1 <= i <= d, got i={i}, d={d}")
    return MainMachine(root, i, d, spec, path_cap)


# ---------------------------------------------------------------------------
# serialization


def _path_to_json(path: IncidencePath) -> list[list]:
    return [[kind, ident] for kind, ident in path.vertices]


def _path_from_json(data: list) -> IncidencePath:
    return IncidencePath(tuple((str(k), int(i)) for k, i in data))


def _node_to_json(node: ObstructionNode) -> dict:
    if isinstance(node, ObstructionLeaf):
        return {"type": "leaf", "clause": node.clause_id}
    return {
        "type": "join",
        "left": _node_to_json(node.left),
        "beta": [[v, val] for v, val in node.beta],
        "right": _node_to_json(node.right),
        "path": _path_to_json(node.path),
    }


def _node_from_json(data: dict) -> ObstructionNode:
    if data["type"] == "leaf":
        return ObstructionLeaf(int(data["clause"]))
    return ObstructionJoin(
        _node_from_json(data["left"]),
        tuple((int(v), int(val)) for v, val in data["beta"]),
        _node_from_json(data["right"]),
        _path_from_json(data["path"]),
    )


def certificate_to_json(cert: LowerBoundCertificate) -> dict:
    if isinstance(cert.payload, WideClause):
        payload = {"clause_id": cert.payload.clause_id, "alpha_count": cert.payload.alpha_count}
    elif isinstance(cert.payload, SeparatorObstruction):
        payload = {
            "paths": [_path_to_json(p) for p in cert.payload.paths],
            "tau": [[v, val] for v, val in cert.payload.tau],
        }
    else:
        payload = _node_to_json(cert.payload)
    return {
        "kind": cert.kind,
        "spec": cert.spec.name,
        "claimed_bound": cert.claimed_bound,
        "payload": payload,
    }


def certificate_from_json(data: dict) -> LowerBoundCertificate:
    spec = parse_class_spec(data["spec"])
    kind = data["kind"]
    payload_data = data["payload"]
    payload: CertificatePayload
    if kind == "wide_clause":
        payload = WideClause(int(payload_data["clause_id"]), int(payload_data["alpha_count"]))
    elif kind == "separator_obstruction":
        payload = SeparatorObstruction(
            tuple(_path_from_json(p) for p in payload_data["paths"]),
            tuple((int(v), int(val)) for v, val in payload_data["tau"]),
        )
    elif kind == "obstruction_tree":
        payload = _node_from_json(payload_data)
    else:
        raise ValueError(f"unknown certificate kind {kind!r}")
    return LowerBoundCertificate(payload, spec, int(data["claimed_bound"]))
