"""CNF formulas, partial assignments, and incidence-graph utilities.

Literals are signed integers in the DIMACS convention: ``v`` for the
positive literal of variable ``v >= 1`` and ``-v`` for the negative one.
Clauses are sets of literals without complementary pairs and carry an id
that stays stable under instantiation, so certificates can refer back to
clauses of the original formula.

Incidence-graph vertices are tagged pairs ``("c", clause_id)`` and
``("v", variable_id)``.  Tuple comparison gives the deterministic vertex
order used everywhere: clauses before variables, then by id.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

Vertex = tuple[str, int]


def clause_vertex(cid: int) -> Vertex:
    return ("c", cid)


def variable_vertex(var: int) -> Vertex:
    return ("v", var)


class DimacsError(ValueError):
    """Malformed DIMACS input."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class MissingVertexError(ValueError):
    """A referenced clause id or variable is not present in the formula."""


def lit_var(lit: int) -> int:
    return lit if lit > 0 else -lit


def lit_sign(lit: int) -> str:
    return "+" if lit > 0 else "-"


def _check_literals(lits: frozenset[int]) -> frozenset[int]:
    for lit in lits:
        if lit == 0:
            raise ValueError("0 is not a literal")
        if -lit in lits:
            raise ValueError(f"complementary pair on variable {lit_var(lit)}")
    return lits


@dataclass(frozen=True)
class Clause:
    """A clause with a stable id.  Literal set, no complementary pairs."""

    id: int
    literals: frozenset[int]

    def __post_init__(self):
        _check_literals(self.literals)

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(lit_var(l) for l in self.literals)

    def __len__(self) -> int:
        return len(self.literals)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self.literals, key=lambda l: (lit_var(l), l < 0)))


class Formula:
    """An immutable CNF formula: a map from clause id to literal set.

    All derived data (variable set, occurrence lists, size) is computed
    lazily and cached; instances are safe to share between threads.
    """

    __slots__ = ("_by_id", "_ids", "_vars", "_occ", "_size", "_hash")

    def __init__(self, clauses: Mapping[int, Iterable[int]] | Iterable[tuple[int, Iterable[int]]]):
        items = clauses.items() if isinstance(clauses, Mapping) else clauses
        by_id: dict[int, frozenset[int]] = {}
        for cid, lits in items:
            if cid in by_id:
                raise ValueError(f"duplicate clause id {cid}")
            by_id[int(cid)] = _check_literals(frozenset(int(l) for l in lits))
        self._by_id = by_id
        self._ids: tuple[int, ...] | None = None
        self._vars: frozenset[int] | None = None
        self._occ: dict[int, tuple[int, ...]] | None = None
        self._size: int | None = None
        self._hash: int | None = None

    @classmethod
    def from_literal_sets(cls, clause_lits: Iterable[Iterable[int]]) -> "Formula":
        """Build a formula numbering clauses 1, 2, ... in the given order."""
        return cls(list(enumerate((frozenset(c) for c in clause_lits), start=1)))

    @property
    def clause_ids(self) -> tuple[int, ...]:
        if self._ids is None:
            self._ids = tuple(sorted(self._by_id))
        return self._ids

    def literals(self, cid: int) -> frozenset[int]:
        try:
            return self._by_id[cid]
        except KeyError:
            raise MissingVertexError(f"no clause with id {cid}") from None

    def __contains__(self, cid: int) -> bool:
        return cid in self._by_id

    def clause(self, cid: int) -> Clause:
        return Clause(cid, self.literals(cid))

    @property
    def clauses(self) -> tuple[Clause, ...]:
        return tuple(Clause(cid, self._by_id[cid]) for cid in self.clause_ids)

    def __len__(self) -> int:
        return len(self._by_id)

    @property
    def is_empty(self) -> bool:
        return not self._by_id

    @property
    def variables(self) -> frozenset[int]:
        if self._vars is None:
            vs: set[int] = set()
            for lits in self._by_id.values():
                for l in lits:
                    vs.add(lit_var(l))
            self._vars = frozenset(vs)
        return self._vars

    @property
    def size(self) -> int:
        """Total number of literal occurrences."""
        if self._size is None:
            self._size = sum(len(lits) for lits in self._by_id.values())
        return self._size

    def occurrences(self, var: int) -> tuple[int, ...]:
        """Ids of clauses whose current literal set mentions ``var``."""
        if self._occ is None:
            occ: dict[int, list[int]] = {}
            for cid in self.clause_ids:
                for l in self._by_id[cid]:
                    occ.setdefault(lit_var(l), []).append(cid)
            self._occ = {v: tuple(cids) for v, cids in occ.items()}
        if var not in self._occ:
            if var not in self.variables:
                raise MissingVertexError(f"variable {var} not in formula")
        return self._occ.get(var, ())

    def has_vertex(self, vertex: Vertex) -> bool:
        kind, ident = vertex
        if kind == "c":
            return ident in self._by_id
        if kind == "v":
            return ident in self.variables
        return False

    def neighbors(self, vertex: Vertex) -> list[Vertex]:
        kind, ident = vertex
        if kind == "c":
            return [variable_vertex(v) for v in sorted(lit_var(l) for l in self.literals(ident))]
        if kind == "v":
            return [clause_vertex(c) for c in self.occurrences(ident)]
        raise MissingVertexError(f"unknown vertex kind {kind!r}")

    def apply(self, assignment: Mapping[int, int]) -> "Formula":
        """Instantiate: drop satisfied clauses, strip falsified literals."""
        out: list[tuple[int, frozenset[int]]] = []
        for cid in self.clause_ids:
            lits = self._by_id[cid]
            kept: list[int] = []
            satisfied = False
            for l in lits:
                val = assignment.get(lit_var(l))
                if val is None:
                    kept.append(l)
                elif (l > 0) == (val == 1):
                    satisfied = True
                    break
            if not satisfied:
                out.append((cid, frozenset(kept)))
        return Formula(out)

    def restrict(self, cids: Iterable[int]) -> "Formula":
        return Formula([(cid, self._by_id[cid]) for cid in cids])

    def components(self) -> list["Formula"]:
        """Connected components of the incidence graph, each a sub-formula.

        Ordered by smallest clause id.  The empty formula has none.
        """
        parent: dict[int, int] = {cid: cid for cid in self._by_id}

        def find(x: int) -> int:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        first_clause: dict[int, int] = {}
        for cid in self.clause_ids:
            for l in self._by_id[cid]:
                v = lit_var(l)
                if v in first_clause:
                    ra, rb = find(first_clause[v]), find(cid)
                    if ra != rb:
                        parent[max(ra, rb)] = min(ra, rb)
                else:
                    first_clause[v] = cid
        groups: dict[int, list[int]] = {}
        for cid in self.clause_ids:
            groups.setdefault(find(cid), []).append(cid)
        return [self.restrict(groups[root]) for root in sorted(groups)]

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def content_key(self) -> frozenset[frozenset[int]]:
        """Clause contents with ids erased; equal keys mean equal formulas
        in the set-of-clauses sense (duplicates collapse)."""
        return frozenset(self._by_id.values())

    def position_key(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        """(sorted clause ids, sorted variables).  Together with the
        originating formula this determines every residual literal set."""
        return (self.clause_ids, tuple(sorted(self.variables)))

    def to_dimacs(self, num_vars: int | None = None, comments: Sequence[str] = ()) -> str:
        """Serialize in clause-id order."""
        nv = num_vars if num_vars is not None else (max(self.variables) if self._by_id and self.variables else 0)
        lines = [f"c {c}" for c in comments]
        lines.append(f"p cnf {nv} {len(self._by_id)}")
        for cid in self.clause_ids:
            lits = sorted(self._by_id[cid], key=lambda l: (lit_var(l), l < 0))
            lines.append(" ".join(str(l) for l in lits + [0]))
        return "\n".join(lines) + "\n"

    def __deepcopy__(self, memo: dict) -> "Formula":
        # immutable; machine states that hold formulas clone cheaply
        return self

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Formula):
            return NotImplemented
        return self._by_id == other._by_id

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._by_id.items()))
        return self._hash

    def __repr__(self) -> str:
        inner = ", ".join(f"{cid}:{sorted(self._by_id[cid], key=abs)}" for cid in self.clause_ids)
        return f"Formula({{{inner}}})"


EMPTY_FORMULA = Formula({})


@dataclass(frozen=True)
class ParseResult:
    formula: Formula
    declared_vars: int
    declared_clauses: int
    tautologies_dropped: int
    warnings: tuple[str, ...]


def parse_dimacs(text: str | bytes) -> ParseResult:
    """Parse DIMACS CNF.

    Duplicate literals inside a clause are collapsed; tautological clauses
    (both ``x`` and ``-x``) are dropped and reported as warnings.  Kept
    clauses are numbered 1, 2, ... in input order.  Empty clauses (a bare
    ``0``) are accepted.  Clauses may span lines.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    declared_vars = declared_clauses = -1
    clauses: list[frozenset[int]] = []
    warnings: list[str] = []
    tautologies = 0
    pending: list[int] = []
    pending_line = 0
    saw_any = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        saw_any = True
        if line.startswith("c"):
            continue
        if line.startswith("p"):
            if declared_vars >= 0:
                raise DimacsError(lineno, "duplicate header")
            fields = line.split()
            if len(fields) != 4 or fields[0] != "p" or fields[1] != "cnf":
                raise DimacsError(lineno, f"malformed header {line!r}")
            try:
                declared_vars = int(fields[2])
                declared_clauses = int(fields[3])
            except ValueError:
                raise DimacsError(lineno, f"malformed header {line!r}") from None
            if declared_vars < 0 or declared_clauses < 0:
                raise DimacsError(lineno, "negative counts in header")
            continue
        if declared_vars < 0:
            raise DimacsError(lineno, "clause before header")
        try:
            tokens = [int(t) for t in line.split()]
        except ValueError:
            raise DimacsError(lineno, f"non-integer token in {line!r}") from None
        if not pending:
            pending_line = lineno
        for tok in tokens:
            if tok == 0:
                lits = frozenset(pending)
                pending = []
                if any(-l in lits for l in lits):
                    tautologies += 1
                    warnings.append(f"line {pending_line}: tautological clause dropped")
                else:
                    clauses.append(lits)
            else:
                if lit_var(tok) > declared_vars:
                    raise DimacsError(lineno, f"literal {tok} outside declared range 1..{declared_vars}")
                pending.append(tok)
    if not saw_any:
        raise DimacsError(0, "empty input")
    if declared_vars < 0:
        raise DimacsError(0, "missing header")
    if pending:
        raise DimacsError(pending_line, "clause not terminated by 0")
    if declared_clauses >= 0 and len(clauses) + tautologies != declared_clauses:
        warnings.append(
            f"header declares {declared_clauses} clauses, found {len(clauses) + tautologies}"
        )
    return ParseResult(
        formula=Formula.from_literal_sets(clauses),
        declared_vars=declared_vars,
        declared_clauses=declared_clauses,
        tautologies_dropped=tautologies,
        warnings=tuple(warnings),
    )


def apply_assignment(formula: Formula, assignment: Mapping[int, int]) -> Formula:
    return formula.apply(assignment)


def connected_components(formula: Formula) -> list[Formula]:
    return formula.components()


@dataclass(frozen=True)
class IncidencePath:
    """A path in the incidence graph: alternating variable/clause vertices."""

    vertices: tuple[Vertex, ...]

    def __post_init__(self):
        if not self.vertices:
            raise ValueError("a path has at least one vertex")
        for a, b in zip(self.vertices, self.vertices[1:]):
            if a[0] == b[0]:
                raise ValueError("consecutive vertices must alternate kind")
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("repeated vertex in path")

    @property
    def first(self) -> Vertex:
        return self.vertices[0]

    @property
    def last(self) -> Vertex:
        return self.vertices[-1]

    @property
    def length(self) -> int:
        return len(self.vertices) - 1

    @property
    def clause_ids(self) -> tuple[int, ...]:
        return tuple(i for k, i in self.vertices if k == "c")

    @property
    def path_variables(self) -> tuple[int, ...]:
        return tuple(i for k, i in self.vertices if k == "v")

    def edges(self) -> list[tuple[Vertex, Vertex]]:
        return list(zip(self.vertices, self.vertices[1:]))

    def reversed(self) -> "IncidencePath":
        return IncidencePath(tuple(reversed(self.vertices)))

    def is_valid_in(self, formula: Formula) -> bool:
        for vx in self.vertices:
            if not formula.has_vertex(vx):
                return False
        for a, b in self.edges():
            cvx, vvx = (a, b) if a[0] == "c" else (b, a)
            if vvx[1] not in (lit_var(l) for l in formula.literals(cvx[1])):
                return False
        return True


def shortest_path(
    formula: Formula,
    sources: Iterable[Vertex],
    targets: Iterable[Vertex],
) -> IncidencePath | None:
    """Breadth-first shortest path from any source to any target.

    Deterministic: vertices are expanded in sorted order and each vertex
    keeps the smallest-order predecessor, so ties always resolve the same
    way.  Returns None when no target is reachable.  A source that is
    itself a target yields a zero-length path.
    """
    src = sorted(set(sources))
    tgt = set(targets)
    for vx in list(src) + sorted(tgt):
        if not formula.has_vertex(vx):
            raise MissingVertexError(f"vertex {vx} not in formula")
    parent: dict[Vertex, Vertex | None] = {vx: None for vx in src}
    frontier = src
    while frontier:
        hits = [vx for vx in frontier if vx in tgt]
        if hits:
            end = min(hits)
            chain = [end]
            while parent[chain[-1]] is not None:
                chain.append(parent[chain[-1]])
            return IncidencePath(tuple(reversed(chain)))
        nxt: list[Vertex] = []
        for vx in frontier:
            for nb in formula.neighbors(vx):
                if nb not in parent:
                    parent[nb] = vx
                    nxt.append(nb)
        frontier = sorted(nxt)
    return None


def bfs_distances(formula: Formula, sources: Iterable[Vertex]) -> dict[Vertex, int]:
    """Distance map from a vertex set, for verification cross-checks."""
    dist: dict[Vertex, int] = {}
    frontier = sorted(set(sources))
    for vx in frontier:
        if not formula.has_vertex(vx):
            raise MissingVertexError(f"vertex {vx} not in formula")
        dist[vx] = 0
    d = 0
    while frontier:
        d += 1
        nxt = []
        for vx in frontier:
            for nb in formula.neighbors(vx):
                if nb not in dist:
                    dist[nb] = d
                    nxt.append(nb)
        frontier = sorted(nxt)
    return dist


@dataclass(frozen=True)
class SatResult:
    satisfiable: bool
    witness: dict[int, int] | None = None

    @property
    def status(self) -> str:
        return "SAT" if self.satisfiable else "UNSAT"


def verify_witness(formula: Formula, witness: Mapping[int, int]) -> bool:
    return formula.apply(witness).is_empty


def brute_force_sat(formula: Formula, max_vars: int = 24) -> SatResult:
    """Exhaustive SAT oracle by enumeration of all assignments.

    The 2^n assignment space is swept as one big-integer bitmap per
    clause (bit m = clause satisfied under assignment index m), which is
    plain enumeration, just word-parallel.  Independent of the class
    solvers by construction.
    """
    variables = sorted(formula.variables)
    n = len(variables)
    if n > max_vars:
        raise ValueError(f"{n} variables exceed the brute-force cap of {max_vars}")
    if formula.is_empty:
        return SatResult(True, {})
    total = 1 << n
    full = (1 << total) - 1
    var_bit: dict[int, int] = {}
    block = 1
    for v in variables:
        # bitmap of assignment indices where v is set to 1
        ones = (1 << block) - 1
        pattern = 0
        step = block * 2
        shift = block
        while shift < total:
            pattern |= ones << shift
            shift += step
        var_bit[v] = pattern
        block *= 2
    remaining = full
    for cid in formula.clause_ids:
        lits = formula.literals(cid)
        sat_map = 0
        for l in lits:
            bm = var_bit[lit_var(l)]
            sat_map |= bm if l > 0 else (full & ~bm)
        remaining &= sat_map
        if not remaining:
            return SatResult(False)
    index = (remaining & -remaining).bit_length() - 1
    witness = {v: (index >> i) & 1 for i, v in enumerate(variables)}
    return SatResult(True, witness)
