"""Command-line interface.

Subcommands: analyze (tree or lower-bound certificate), solve (SAT via a
tree), depth-exact (oracle), verify (certificate checking), generate
(instance families), report (CSV + figures).

Exit codes for analyze: 0 a validated tree, 1 a sound certificate, 2 a
flagged heuristic rejection, 3 errors.  Usage errors exit 4 so scripts
can tell them apart from rejections.  JSON output is byte-deterministic:
no timestamps, sorted keys.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cnf import DimacsError, Formula, parse_dimacs
from .classes import BaseClassSpec, UnsupportedClassError, parse_class_spec
from .obstruction import (
    DanglingReferenceError,
    certificate_bound,
    certificate_from_json,
    certificate_to_json,
    verify_certificate,
)
from .oracle import exact_backdoor_depth, gen_chain, gen_disjoint_copies, gen_flip
from .pipeline import approximate_backdoor_tree
from .tree import (
    TreeFormatError,
    decide_sat_with_tree,
    leaf_size_sum,
    tree_depth,
    tree_from_json,
    tree_to_json,
    unfolded_node_count,
    validate_tree,
)

EXIT_TREE = 0
EXIT_CERTIFICATE = 1
EXIT_REJECTED = 2
EXIT_ERROR = 3
EXIT_USAGE = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # keep exit code 2 free for rejections
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


class CliError(Exception):
    pass


def _load_formula(path: str) -> Formula:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc
    try:
        result = parse_dimacs(data)
    except DimacsError as exc:
        raise CliError(f"{path}: {exc}") from exc
    for warning in result.warnings:
        print(f"c warning: {warning}", file=sys.stderr)
    return result.formula


def _class_spec(text: str) -> BaseClassSpec:
    try:
        return parse_class_spec(text)
    except ValueError as exc:
        raise CliError(str(exc)) from exc


def _emit(document: dict, fmt: str, lines: list[str]) -> None:
    if fmt == "json":
        print(json.dumps(document, sort_keys=True, indent=2))
    else:
        for line in lines:
            print(line)


def _write_out(document: dict, out: str | None) -> None:
    if out:
        Path(out).write_text(json.dumps(document, sort_keys=True, indent=2) + "\n")


def cmd_analyze(args) -> int:
    formula = _load_formula(args.file)
    spec = _class_spec(args.cls)
    outcome = approximate_backdoor_tree(
        formula,
        spec,
        args.budget,
        path_cap=args.cap,
        join_retry_cap=args.retries,
        node_cap=args.node_cap or None,
    )
    stats = outcome.stats
    rounds = {
        "bound": outcome.round_bound,
        "max_play_rounds": stats.max_rounds if stats else 0,
        "machine_steps": stats.machine_steps if stats else 0,
        "variable_nodes": stats.variable_nodes if stats else 0,
        "memo_hits": stats.memo_hits if stats else 0,
    }
    base = {
        "budget": args.budget,
        "class": spec.name,
        "input": {"clauses": len(formula), "variables": len(formula.variables)},
        "rounds": rounds,
    }
    if outcome.kind == "tree":
        validation = validate_tree(formula, outcome.tree, spec)
        if not validation:
            raise CliError(f"internal: produced tree failed validation: {validation.reason}")
        result = {
            "depth": tree_depth(outcome.tree),
            "leaf_size_sum": leaf_size_sum(outcome.tree),
        }
        # the serialized tree expands shared subtrees; build it only when
        # someone will consume it, and refuse clearly rather than emit
        # an astronomically large document
        if args.format == "json" or args.out:
            expanded = unfolded_node_count(outcome.tree)
            if expanded > 1_000_000:
                raise CliError(
                    f"tree expands to {expanded} nodes; too large to serialize "
                    "(use --format text without --out)"
                )
            result["tree"] = tree_to_json(outcome.tree)
        document = dict(base, kind="tree", result=result)
        _emit(
            document,
            args.format,
            [
                f"tree of depth {result['depth']} "
                f"({rounds['variable_nodes']} variable nodes, "
                f"{rounds['max_play_rounds']} rounds deepest play, bound {rounds['bound']})",
                "validated: yes",
            ],
        )
        _write_out(document, args.out)
        return EXIT_TREE
    if outcome.kind == "certificate":
        cert = outcome.certificate
        document = dict(
            base,
            kind="certificate",
            result={"certificate": certificate_to_json(cert)},
        )
        _emit(
            document,
            args.format,
            [
                f"sound lower bound: backdoor depth >= {cert.claimed_bound} "
                f"(exceeds budget {args.budget})",
                f"certificate kind: {cert.kind}",
            ],
        )
        _write_out(document, args.out)
        return EXIT_CERTIFICATE
    if outcome.kind == "rejected":
        document = dict(base, kind="rejected", result={"reason": outcome.reason})
        _emit(
            document,
            args.format,
            [
                "heuristic rejection (no soundness claim): " + str(outcome.reason),
                f"budget {args.budget} not decided",
            ],
        )
        _write_out(document, args.out)
        return EXIT_REJECTED
    raise CliError(f"analysis failed: {outcome.reason}")


def cmd_solve(args) -> int:
    formula = _load_formula(args.file)
    spec = _class_spec(args.cls)
    if args.tree:
        try:
            data = json.loads(Path(args.tree).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(f"cannot read tree {args.tree}: {exc}") from exc
        node_data = data.get("result", {}).get("tree") if isinstance(data, dict) else None
        if node_data is None:
            node_data = data.get("tree") if isinstance(data, dict) and "tree" in data else data
        try:
            root = tree_from_json(node_data, formula)
        except TreeFormatError as exc:
            raise CliError(f"tree does not fit the formula: {exc}") from exc
        validation = validate_tree(formula, root, spec)
        if not validation:
            raise CliError(f"tree failed validation: {validation.reason}")
    else:
        outcome = approximate_backdoor_tree(formula, spec, args.budget)
        if outcome.kind != "tree":
            raise CliError(
                "no backdoor tree found within budget "
                f"{args.budget} ({outcome.kind}); raise --budget"
            )
        root = outcome.tree
    try:
        result = decide_sat_with_tree(formula, root, spec, jobs=args.jobs)
    except UnsupportedClassError as exc:
        raise CliError(str(exc)) from exc
    if result.satisfiable:
        print("s SATISFIABLE")
        lits = [v if result.witness.get(v) else -v for v in sorted(formula.variables)]
        print("v " + " ".join(str(l) for l in lits + [0]))
    else:
        print("s UNSATISFIABLE")
    return 0


def cmd_depth_exact(args) -> int:
    formula = _load_formula(args.file)
    spec = _class_spec(args.cls)
    depth = exact_backdoor_depth(formula, spec, args.budget)
    if args.format == "json":
        print(json.dumps({"budget": args.budget, "class": spec.name, "depth": depth}, sort_keys=True))
    elif depth is None:
        print(f"depth > {args.budget} (budget exceeded)")
    else:
        print(f"depth = {depth}")
    return 0


def cmd_verify(args) -> int:
    formula = _load_formula(args.file)
    try:
        data = json.loads(Path(args.cert).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(f"cannot read certificate {args.cert}: {exc}") from exc
    if isinstance(data, dict) and "result" in data and "certificate" in data.get("result", {}):
        data = data["result"]["certificate"]
    try:
        cert = certificate_from_json(data)
    except (KeyError, ValueError, TypeError) as exc:
        raise CliError(f"malformed certificate: {exc}") from exc
    try:
        ok = verify_certificate(formula, cert)
    except DanglingReferenceError as exc:
        raise CliError(f"certificate references missing objects: {exc}") from exc
    expected = certificate_bound(cert.payload, cert.spec)
    if ok:
        print(f"verified: {cert.kind} certifies backdoor depth >= {cert.claimed_bound}")
        return 0
    print(
        f"NOT verified: {cert.kind} (claimed {cert.claimed_bound}, rule gives {expected})"
    )
    return 1


def cmd_generate(args) -> int:
    if args.family in ("copies", "flip") and not args.file:
        raise CliError(f"generate {args.family} needs --file")
    if args.family == "chain":
        formula = gen_chain(args.n, args.with_y)
        comment = f"family: chain n={args.n} with_y={int(args.with_y)}"
    elif args.family == "copies":
        base = _load_formula(args.file)
        formula = gen_disjoint_copies(base, args.n)
        comment = f"family: copies n={args.n} of {Path(args.file).name}"
    elif args.family == "flip":
        base = _load_formula(args.file)
        formula = gen_flip(base)
        comment = f"family: flip of {Path(args.file).name}"
    else:
        raise CliError(f"unknown family {args.family}")
    text = formula.to_dimacs(comments=[comment])
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_report(args) -> int:
    from .report import run_report

    run_report(Path(args.out_dir), seed=args.seed, jobs=args.jobs)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="bdepth", description="Backdoor depth toolkit for CNF formulas")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, budget_default=None):
        p.add_argument("--class", dest="cls", default="horn",
                       help="horn, dhorn, krom, null, or alpha=+,-;s=2")
        p.add_argument("--format", choices=["json", "text"], default="text")
        p.add_argument("--jobs", type=int, default=1, help="worker cap for leaf solving")

    p = sub.add_parser("analyze", help="compute a backdoor tree or a depth lower bound")
    p.add_argument("file")
    add_common(p)
    p.add_argument("--budget", type=int, default=3, help="target depth budget d")
    p.add_argument("--out", help="write the resulting JSON document here")
    p.add_argument("--cap", type=int, default=10**6,
                   help="practical cap on separator obstruction paths")
    p.add_argument("--retries", type=int, default=64, help="cap on obstruction join retries")
    p.add_argument("--node-cap", type=int, default=0, dest="node_cap",
                   help="abort exploration after this many machine steps (0 = unlimited)")
    p.set_defaults(fn=cmd_analyze)

    p = sub.add_parser("solve", help="decide satisfiability through a backdoor tree")
    p.add_argument("file")
    add_common(p)
    p.add_argument("--tree", help="use this tree JSON instead of computing one")
    p.add_argument("--budget", type=int, default=3)
    p.set_defaults(fn=cmd_solve)

    p = sub.add_parser("depth-exact", help="exact backdoor depth by exhaustive search")
    p.add_argument("file")
    add_common(p)
    p.add_argument("--budget", type=int, default=6)
    p.set_defaults(fn=cmd_depth_exact)

    p = sub.add_parser("verify", help="verify a lower-bound certificate")
    p.add_argument("file")
    p.add_argument("--cert", required=True)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("generate", help="emit instance families as DIMACS")
    p.add_argument("family", choices=["chain", "copies", "flip"])
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--with-y", action="store_true", dest="with_y")
    p.add_argument("--file", help="base formula for copies/flip")
    p.add_argument("--out")
    p.set_defaults(fn=cmd_generate)

    p = sub.add_parser("report", help="run the desk-scale study: CSV plus figures")
    p.add_argument("--out-dir", default="reports")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(fn=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (CliError, ValueError, OSError) as exc:
        # ValueError covers the library's input errors (parsing, budgets,
        # generator parameters, dangling certificate references)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
