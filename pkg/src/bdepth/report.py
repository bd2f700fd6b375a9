"""Desk-scale study: delimited results plus rendered figures.

Produces three artifacts in the output directory:

* ``analysis.csv``: one row per (instance, class, budget) pipeline run.
* ``chain_ladder.png`` and ``chain_ladder.csv``: exact depth of the
  chain families against chain length, per class.
* ``scaling.png`` and ``scaling.csv``: wall time of tree-based SAT
  deciding on growing disjoint unions, with the fitted growth exponent.
"""

from __future__ import annotations

import csv
import math
import random
import time
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .cnf import Formula
from .classes import DHORN, HORN, KROM
from .oracle import exact_backdoor_depth, gen_chain, gen_disjoint_copies
from .pipeline import approximate_backdoor_tree
from .tree import ComponentNode, LeafNode, TreeNode, VariableNode, decide_sat_with_tree, tree_depth


def _corpus(seed: int) -> list[tuple[str, Formula]]:
    rng = random.Random(seed)
    instances: list[tuple[str, Formula]] = []
    for n in (1, 2, 4, 7, 10):
        instances.append((f"chain-y-{n}", gen_chain(n, True)))
        instances.append((f"chain-{n}", gen_chain(n, False)))
    for copies in (2, 4):
        instances.append((f"padded-{copies}", gen_disjoint_copies(gen_chain(2, True), copies)))
    instances.append(("wide-6", Formula.from_literal_sets([list(range(1, 7))])))
    for k in range(6):
        n = rng.randint(5, 14)
        m = rng.randint(5, 18)
        clauses = []
        for _ in range(m):
            w = rng.randint(1, min(3, n))
            vs = rng.sample(range(1, n + 1), w)
            clauses.append([v * rng.choice([1, -1]) for v in vs])
        instances.append((f"mix-{k}", Formula.from_literal_sets(clauses)))
    return instances


def _analysis_rows(seed: int) -> list[dict]:
    rows = []
    for name, formula in _corpus(seed):
        for spec in (HORN, DHORN, KROM):
            for budget in (0, 1, 2, 3):
                t0 = time.perf_counter()
                outcome = approximate_backdoor_tree(formula, spec, budget)
                millis = 1000 * (time.perf_counter() - t0)
                rows.append(
                    {
                        "instance": name,
                        "variables": len(formula.variables),
                        "clauses": len(formula),
                        "class": spec.name,
                        "budget": budget,
                        "outcome": outcome.kind,
                        "tree_depth": tree_depth(outcome.tree) if outcome.kind == "tree" else "",
                        "bound": outcome.certificate.claimed_bound
                        if outcome.kind == "certificate"
                        else "",
                        "max_play_rounds": outcome.stats.max_rounds if outcome.stats else "",
                        "millis": f"{millis:.2f}",
                    }
                )
    return rows


def _chain_ladder(max_n: int = 10) -> list[dict]:
    rows = []
    for n in range(1, max_n + 1):
        fy = gen_chain(n, True)
        fq = gen_chain(n, False)
        rows.append(
            {
                "n": n,
                "horn_chain_y": exact_backdoor_depth(fy, HORN, 8),
                "krom_chain_y": exact_backdoor_depth(fy, KROM, 8),
                "horn_chain": exact_backdoor_depth(fq, HORN, 8),
                "dhorn_chain_y": exact_backdoor_depth(fy, DHORN, 8),
            }
        )
    return rows


def _natural_block_tree(formula: Formula) -> TreeNode:
    """Component node over the copies; each copy branches on its first
    variable into two leaves.  Matches gen_disjoint_copies numbering."""
    comps = formula.components()
    kids = []
    for comp in comps:
        v = min(comp.variables)
        kids.append(
            VariableNode(comp, v, LeafNode(comp.apply({v: 0})), LeafNode(comp.apply({v: 1})))
        )
    if len(comps) == 1:
        return kids[0]
    return ComponentNode(formula, tuple(kids))


def _scaling_rows(sizes: list[int], jobs: int) -> tuple[list[dict], float]:
    block = Formula.from_literal_sets([[1, 2]])  # one Horn-bad clause
    rows = []
    points = []
    for n in sizes:
        formula = gen_disjoint_copies(block, n)
        root = _natural_block_tree(formula)
        t0 = time.perf_counter()
        result = decide_sat_with_tree(formula, root, HORN, jobs=jobs)
        elapsed = time.perf_counter() - t0
        assert result.satisfiable
        rows.append({"copies": n, "seconds": f"{elapsed:.4f}"})
        points.append((math.log(n), math.log(max(elapsed, 1e-9))))
    xbar = sum(x for x, _ in points) / len(points)
    ybar = sum(y for _, y in points) / len(points)
    num = sum((x - xbar) * (y - ybar) for x, y in points)
    den = sum((x - xbar) ** 2 for x, _ in points)
    return rows, num / den


def _write_csv(path: Path, rows: list[dict]) -> None:
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        writer.writerows(rows)


def run_report(out_dir: Path, seed: int = 0, jobs: int = 1) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)

    rows = _analysis_rows(seed)
    _write_csv(out_dir / "analysis.csv", rows)
    outcome_counts: dict[str, int] = {}
    for row in rows:
        outcome_counts[row["outcome"]] = outcome_counts.get(row["outcome"], 0) + 1

    ladder = _chain_ladder()
    _write_csv(out_dir / "chain_ladder.csv", ladder)
    fig, ax = plt.subplots(figsize=(6, 4))
    ns = [r["n"] for r in ladder]
    for key, label in [
        ("horn_chain_y", "horn depth, chain with y"),
        ("krom_chain_y", "krom depth, chain with y"),
        ("horn_chain", "horn depth, plain chain"),
        ("dhorn_chain_y", "dhorn depth, chain with y"),
    ]:
        ax.step(ns, [r[key] for r in ladder], where="mid", label=label)
    ax.set_xlabel("chain length n")
    ax.set_ylabel("exact backdoor depth")
    ax.set_title("Depth ladder of the chain families")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(out_dir / "chain_ladder.png", dpi=150)
    plt.close(fig)

    sizes = [1000, 2000, 4000, 8000, 16000]
    scaling, exponent = _scaling_rows(sizes, jobs)
    _write_csv(out_dir / "scaling.csv", scaling)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(
        [int(r["copies"]) for r in scaling],
        [float(r["seconds"]) for r in scaling],
        marker="o",
    )
    ax.set_xlabel("disjoint copies")
    ax.set_ylabel("decide time [s]")
    ax.set_title(f"Tree-based SAT deciding, fitted exponent {exponent:.2f}")
    fig.tight_layout()
    fig.savefig(out_dir / "scaling.png", dpi=150)
    plt.close(fig)

    print(f"wrote {out_dir}/analysis.csv ({len(rows)} rows; outcomes {outcome_counts})")
    print(f"wrote {out_dir}/chain_ladder.csv and chain_ladder.png")
    print(f"wrote {out_dir}/scaling.csv and scaling.png (exponent {exponent:.2f})")
