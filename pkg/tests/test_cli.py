import json
import subprocess
import sys

import pytest

CLI = [sys.executable, "-m", "bdepth.cli"]


def run(*args, cwd=None):
    return subprocess.run(CLI + list(args), capture_output=True, text=True, cwd=cwd)


@pytest.fixture()
def chain10(tmp_path):
    r = run("generate", "chain", "--n", "10", "--with-y", "--out", str(tmp_path / "chain10.cnf"))
    assert r.returncode == 0
    return tmp_path / "chain10.cnf"


@pytest.fixture()
def wide(tmp_path):
    path = tmp_path / "wide.cnf"
    path.write_text("p cnf 8 1\n1 2 3 4 5 6 7 8 0\n")
    return path


class TestGenerate:
    def test_chain_shape(self, tmp_path):
        r = run("generate", "chain", "--n", "4", "--with-y")
        assert r.returncode == 0
        lines = r.stdout.splitlines()
        assert lines[0].startswith("c family: chain")
        assert lines[1] == "p cnf 9 4"
        assert len(lines) == 6

    def test_copies_and_flip(self, tmp_path):
        base = tmp_path / "b.cnf"
        base.write_text("p cnf 2 1\n1 2 0\n")
        r = run("generate", "copies", "--file", str(base), "--n", "3")
        assert r.returncode == 0 and "p cnf 6 3" in r.stdout
        r = run("generate", "flip", "--file", str(base))
        assert r.returncode == 0 and "-1 -2 0" in r.stdout

    def test_copies_needs_file(self):
        r = run("generate", "copies", "--n", "2")
        assert r.returncode == 3


class TestAnalyze:
    def test_member_tree_exit_zero(self, chain10):
        r = run("analyze", str(chain10), "--class", "dhorn", "--budget", "0")
        assert r.returncode == 0
        assert "depth 0" in r.stdout

    def test_certificate_exit_one(self, chain10):
        r = run("analyze", str(chain10), "--class", "horn", "--budget", "1")
        assert r.returncode == 1
        assert "backdoor depth >=" in r.stdout

    def test_wide_clause(self, wide):
        r = run("analyze", str(wide), "--class", "horn", "--budget", "3", "--format", "json")
        assert r.returncode == 1
        doc = json.loads(r.stdout)
        cert = doc["result"]["certificate"]
        assert cert["kind"] == "wide_clause" and cert["claimed_bound"] == 5 + 2

    def test_parse_error_exit(self, tmp_path):
        bad = tmp_path / "bad.cnf"
        bad.write_text("p cnf 1 1\n2 0\n")
        r = run("analyze", str(bad))
        assert r.returncode == 3 and "error" in r.stderr

    def test_unknown_class(self, chain10):
        r = run("analyze", str(chain10), "--class", "weird")
        assert r.returncode == 3

    def test_explicit_alpha_syntax(self, chain10):
        # krom spelled out; the chain carries 3-literal clauses, so a
        # certificate or a tree must come back, never an error
        r = run("analyze", str(chain10), "--class", "alpha=+,-;s=2", "--budget", "1")
        assert r.returncode in (0, 1)

    def test_solving_general_class_rejected(self, chain10):
        r = run("solve", str(chain10), "--class", "alpha=+;s=3", "--budget", "2")
        assert r.returncode == 3

    def test_usage_error_is_four(self):
        r = run("analyze")
        assert r.returncode == 4

    def test_cap_rejection_exit_two(self, chain10):
        r = run("analyze", str(chain10), "--class", "horn", "--budget", "1", "--cap", "0")
        assert r.returncode == 2
        assert "no soundness claim" in r.stdout

    def test_huge_tree_serialization_refused(self, tmp_path):
        cnf = tmp_path / "c60.cnf"
        r = run("generate", "chain", "--n", "60", "--with-y", "--out", str(cnf))
        assert r.returncode == 0
        # text mode handles the shared tree fine
        r = run("analyze", str(cnf), "--class", "horn", "--budget", "6")
        assert r.returncode == 0, r.stderr
        # expanding it to JSON would be astronomic; refused with a clear error
        r = run("analyze", str(cnf), "--class", "horn", "--budget", "6", "--format", "json")
        assert r.returncode == 3 and "too large to serialize" in r.stderr

    def test_bad_parameters_exit_cleanly(self, chain10, tmp_path):
        r = run("analyze", str(chain10), "--budget", "-1")
        assert r.returncode == 3 and "Traceback" not in r.stderr
        r = run("generate", "chain", "--n", "0")
        assert r.returncode == 3 and "Traceback" not in r.stderr
        r = run("analyze", str(chain10), "--out", str(tmp_path / "no" / "dir" / "x.json"))
        assert r.returncode == 3 and "Traceback" not in r.stderr


class TestVerifyRoundTrip:
    def test_analyze_then_verify(self, chain10, tmp_path):
        cert = tmp_path / "cert.json"
        r = run("analyze", str(chain10), "--class", "horn", "--budget", "1", "--out", str(cert))
        assert r.returncode == 1
        r = run("verify", str(chain10), "--cert", str(cert))
        assert r.returncode == 0, r.stdout + r.stderr
        assert "verified" in r.stdout

    def test_tampered_bound_rejected(self, chain10, tmp_path):
        cert = tmp_path / "cert.json"
        run("analyze", str(chain10), "--class", "horn", "--budget", "1", "--out", str(cert))
        doc = json.loads(cert.read_text())
        doc["result"]["certificate"]["claimed_bound"] += 1
        cert.write_text(json.dumps(doc))
        r = run("verify", str(chain10), "--cert", str(cert))
        assert r.returncode == 1
        assert "NOT verified" in r.stdout

    def test_byte_identical_reruns(self, chain10, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        r1 = run("analyze", str(chain10), "--class", "horn", "--budget", "1",
                 "--out", str(a), "--format", "json")
        r2 = run("analyze", str(chain10), "--class", "horn", "--budget", "1",
                 "--out", str(b), "--format", "json")
        assert r1.stdout == r2.stdout
        assert a.read_bytes() == b.read_bytes()


class TestSolve:
    def test_unsat_contradiction(self, tmp_path):
        f = tmp_path / "c.cnf"
        f.write_text("p cnf 1 2\n1 0\n-1 0\n")
        r = run("solve", str(f), "--class", "null", "--budget", "2")
        assert r.returncode == 0
        assert "s UNSATISFIABLE" in r.stdout

    def test_sat_with_witness(self, chain10):
        r = run("solve", str(chain10), "--class", "horn", "--budget", "4")
        assert r.returncode == 0
        lines = r.stdout.splitlines()
        assert lines[0] == "s SATISFIABLE"
        lits = [int(t) for t in lines[1].split()[1:]]
        assert lits[-1] == 0
        # witness satisfies the formula
        from bdepth import parse_dimacs

        formula = parse_dimacs(chain10.read_text()).formula
        tau = {abs(l): 1 if l > 0 else 0 for l in lits[:-1]}
        assert formula.apply(tau).is_empty

    def test_solve_with_tree_file(self, chain10, tmp_path):
        tree = tmp_path / "tree.json"
        r = run("analyze", str(chain10), "--class", "horn", "--budget", "4", "--out", str(tree))
        assert r.returncode == 0
        r = run("solve", str(chain10), "--class", "horn", "--tree", str(tree))
        assert r.returncode == 0 and "s SATISFIABLE" in r.stdout

    def test_mismatched_tree_errors(self, chain10, tmp_path):
        tree = tmp_path / "tree.json"
        r = run("analyze", str(chain10), "--class", "horn", "--budget", "4", "--out", str(tree))
        assert r.returncode == 0
        other = tmp_path / "other.cnf"
        other.write_text("p cnf 2 1\n1 2 0\n")
        r = run("solve", str(other), "--class", "horn", "--tree", str(tree))
        assert r.returncode == 3


class TestDepthExact:
    def test_member(self, chain10):
        r = run("depth-exact", str(chain10), "--class", "dhorn", "--budget", "3")
        assert r.returncode == 0 and "depth = 0" in r.stdout

    def test_chain_value(self, chain10):
        r = run("depth-exact", str(chain10), "--class", "horn", "--budget", "5",
                "--format", "json")
        assert json.loads(r.stdout)["depth"] == 3

    def test_above_budget(self, wide):
        r = run("depth-exact", str(wide), "--class", "horn", "--budget", "2")
        assert r.returncode == 0 and "depth > 2" in r.stdout


def test_report_writes_outputs(tmp_path):
    out = tmp_path / "rep"
    r = run("report", "--out-dir", str(out), "--seed", "1")
    assert r.returncode == 0, r.stderr
    for name in ("analysis.csv", "chain_ladder.csv", "chain_ladder.png", "scaling.csv", "scaling.png"):
        assert (out / name).exists()
    header = (out / "analysis.csv").read_text().splitlines()[0]
    assert header.startswith("instance,")
