"""Backdoor depth toolkit: compute component backdoor trees of CNF
formulas into the Schaefer classes, decide satisfiability through them,
and produce and verify depth lower-bound certificates."""

from .cnf import (
    Formula,
    IncidencePath,
    ParseResult,
    SatResult,
    apply_assignment,
    brute_force_sat,
    connected_components,
    parse_dimacs,
    shortest_path,
)
from .classes import (
    DHORN,
    HORN,
    KROM,
    NULL,
    BaseClassSpec,
    alpha_literal_count,
    is_good,
    is_member,
    parse_class_spec,
    solve_horn,
    solve_in_class,
    solve_krom,
)
from .game import (
    AdversarialConnector,
    ConnectorReply,
    GamePosition,
    OracleSplitter,
    RandomConnector,
    SplitterAlgorithm,
    SplitterMove,
    advance,
    build_backdoor_tree,
    initial_positions,
    run_game,
)
from .obstruction import (
    LowerBoundCertificate,
    ObstructionJoin,
    ObstructionLeaf,
    SeparatorObstruction,
    WideClause,
    build_main_splitter,
    build_separator_splitter,
    certificate_bound,
    round_bound_main,
    round_bound_separate,
    separator_size_threshold,
    verify_certificate,
    verify_obstruction_tree,
    verify_separator_obstruction,
)
from .oracle import (
    exact_backdoor_depth,
    exact_backdoor_size,
    gen_chain,
    gen_disjoint_copies,
    gen_flip,
)
from .pipeline import AnalyzeOutcome, approximate_backdoor_tree
from .tree import (
    ComponentNode,
    LeafNode,
    VariableNode,
    decide_sat_with_tree,
    leaf_size_sum,
    tree_depth,
    tree_from_json,
    tree_to_json,
    tree_variables,
    validate_tree,
)

__version__ = "0.1.0"
