"""End-to-end tests for the command-line interface.

Everything runs in-process through ``main(argv)`` so exit codes, stdout,
and written files can be checked without spawning subprocesses.
"""

import pytest

from satcloak.cli import main
from satcloak.cnf import parse_dimacs

SAT_CNF = "p cnf 3 2\n1 2 3 0\n-1 2 -3 0\n"
FORCED_CNF = "p cnf 2 2\n1 0\n2 0\n"  # unique model: both variables true


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_assignment(line):
    lits = [int(tok) for tok in line.split()]
    return {abs(lit): lit > 0 for lit in lits}


# ---------------------------------------------------------------------------
# randomize / solve-brute / derandomize round trips
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("method", ["iso", "matrix", "gf2"])
def test_randomize_solve_derandomize(tmp_path, capsys, method):
    src = tmp_path / "orig.cnf"
    src.write_text(SAT_CNF)

    code, out, _ = run(
        capsys, "randomize", "--method", method, "--seed", "7", "--in", str(src)
    )
    assert code == 0
    suffix = ".rand.opb" if method == "matrix" else ".rand.cnf"
    artifact = tmp_path / ("orig" + suffix)
    key = tmp_path / "orig.key"
    assert artifact.exists() and key.exists()
    assert str(artifact) in out and str(key) in out

    sol = tmp_path / "answer.sol"
    code, out, _ = run(
        capsys, "solve-brute", "--in", str(artifact), "--out", str(sol)
    )
    assert code == 0
    assert out.startswith("SAT count=")

    code, out, _ = run(
        capsys,
        "derandomize",
        "--secret", str(key),
        "--solution", str(sol),
        "--original", str(src),
    )
    assert code == 0
    assignment = read_assignment(out)
    assert parse_dimacs(SAT_CNF).satisfies(assignment)


def test_randomize_is_deterministic(tmp_path, capsys):
    src = tmp_path / "orig.cnf"
    src.write_text(SAT_CNF)
    paths = []
    for tag in ("a", "b"):
        art = tmp_path / f"{tag}.cnf"
        key = tmp_path / f"{tag}.key"
        code, _, _ = run(
            capsys,
            "randomize", "--method", "gf2", "--seed", "11",
            "--in", str(src), "--out", str(art), "--secret", str(key),
        )
        assert code == 0
        paths.append((art, key))
    (art_a, key_a), (art_b, key_b) = paths
    assert art_a.read_bytes() == art_b.read_bytes()
    assert key_a.read_bytes() == key_b.read_bytes()


def test_derandomize_writes_out_file(tmp_path, capsys):
    src = tmp_path / "orig.cnf"
    src.write_text(FORCED_CNF)
    run(capsys, "randomize", "--method", "iso", "--seed", "1", "--in", str(src))
    sol = tmp_path / "good.sol"
    run(capsys, "solve-brute", "--in", str(tmp_path / "orig.rand.cnf"),
        "--out", str(sol))
    mapped = tmp_path / "mapped.sol"
    code, out, _ = run(
        capsys,
        "derandomize",
        "--secret", str(tmp_path / "orig.key"),
        "--solution", str(sol),
        "--original", str(src),
        "--out", str(mapped),
    )
    assert code == 0
    assert mapped.read_text() == out
    assert read_assignment(out) == {1: True, 2: True}


# ---------------------------------------------------------------------------
# fraud and mismatch detection
# ---------------------------------------------------------------------------

def test_derandomize_rejects_fraudulent_solution(tmp_path, capsys):
    src = tmp_path / "orig.cnf"
    src.write_text(FORCED_CNF)
    run(capsys, "randomize", "--method", "iso", "--seed", "5", "--in", str(src))
    good = tmp_path / "good.sol"
    run(capsys, "solve-brute", "--in", str(tmp_path / "orig.rand.cnf"),
        "--out", str(good))

    # The original has a unique model, so flipping any literal of the
    # provider's answer is guaranteed to break it.
    lits = [int(t) for t in good.read_text().split()]
    lits[0] = -lits[0]
    bad = tmp_path / "bad.sol"
    bad.write_text(" ".join(map(str, lits)) + "\n")

    for command in ("derandomize", "verify-solution"):
        code, _, err = run(
            capsys,
            command,
            "--secret", str(tmp_path / "orig.key"),
            "--solution", str(bad),
            "--original", str(src),
        )
        assert code == 2
        assert "failed validation" in err


def test_verify_solution_accepts_honest_answer(tmp_path, capsys):
    src = tmp_path / "orig.cnf"
    src.write_text(SAT_CNF)
    run(capsys, "randomize", "--method", "matrix", "--seed", "2", "--in", str(src))
    sol = tmp_path / "answer.sol"
    run(capsys, "solve-brute", "--in", str(tmp_path / "orig.rand.opb"),
        "--out", str(sol))
    code, out, _ = run(
        capsys,
        "verify-solution",
        "--secret", str(tmp_path / "orig.key"),
        "--solution", str(sol),
        "--original", str(src),
    )
    assert code == 0
    assert out == "valid\n"


def test_derandomize_digest_mismatch(tmp_path, capsys):
    src = tmp_path / "orig.cnf"
    src.write_text(SAT_CNF)
    run(capsys, "randomize", "--method", "iso", "--seed", "9", "--in", str(src))
    sol = tmp_path / "answer.sol"
    run(capsys, "solve-brute", "--in", str(tmp_path / "orig.rand.cnf"),
        "--out", str(sol))

    other = tmp_path / "other.cnf"
    other.write_text("p cnf 3 2\n1 2 3 0\n-1 2 3 0\n")
    code, _, err = run(
        capsys,
        "derandomize",
        "--secret", str(tmp_path / "orig.key"),
        "--solution", str(sol),
        "--original", str(other),
    )
    assert code == 2
    assert "different instance" in err


# ---------------------------------------------------------------------------
# error taxonomy: usage and format problems exit 1
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("argv", [
    [],
    ["no-such-command"],
    ["randomize", "--method", "bogus", "--seed", "1", "--in", "x.cnf"],
    ["randomize", "--in", "x.cnf"],  # missing required --seed/--method
])
def test_usage_errors_exit_1(argv):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    assert excinfo.value.code == 1


def test_missing_input_file(tmp_path, capsys):
    code, _, err = run(
        capsys, "randomize", "--method", "iso", "--seed", "1",
        "--in", str(tmp_path / "nope.cnf"),
    )
    assert code == 1
    assert "error:" in err


def test_malformed_dimacs(tmp_path, capsys):
    bad = tmp_path / "bad.cnf"
    bad.write_text("p cnf 2\n1 0\n")
    code, _, err = run(capsys, "to3cnf", "--in", str(bad))
    assert code == 1
    assert "error:" in err


@pytest.mark.parametrize("text,fragment", [
    ("1 0 2\n", "literal 0"),
    ("1 -1\n", "repeated"),
    ("1 3\n", "missing variable 2"),
    ("", "no assignment line"),
    ("1 x\n", "non-integer"),
])
def test_solution_file_errors(tmp_path, capsys, text, fragment):
    src = tmp_path / "orig.cnf"
    src.write_text(FORCED_CNF)
    run(capsys, "randomize", "--method", "iso", "--seed", "3", "--in", str(src))
    sol = tmp_path / "weird.sol"
    sol.write_text(text)
    code, _, err = run(
        capsys,
        "derandomize",
        "--secret", str(tmp_path / "orig.key"),
        "--solution", str(sol),
        "--original", str(src),
    )
    assert code == 1
    assert fragment in err


# ---------------------------------------------------------------------------
# conversion commands
# ---------------------------------------------------------------------------

def test_to3cnf(tmp_path, capsys):
    src = tmp_path / "wide.cnf"
    src.write_text("p cnf 5 1\n1 2 3 4 5 0\n")
    code, out, _ = run(capsys, "to3cnf", "--in", str(src))
    assert code == 0
    assert "7 vars, 3 clauses" in out
    three = parse_dimacs((tmp_path / "wide.3cnf.cnf").read_text())
    assert all(len(c) == 3 for c in three.clauses)


def test_max3sat_reduce(tmp_path, capsys):
    src = tmp_path / "maxsat.cnf"
    src.write_text("p cnf 3 2\n1 2 3 0\n-1 -2 -3 0\n")
    code, out, _ = run(capsys, "max3sat-reduce", "--in", str(src))
    assert code == 0
    assert "offset 2" in out
    reduced = parse_dimacs((tmp_path / "maxsat.mincost.cnf").read_text())
    assert reduced.num_vars == 5
    assert reduced.num_clauses == 8
    wts = (tmp_path / "maxsat.mincost.wts").read_text()
    assert "w 4 1" in wts and "w 5 1" in wts


# ---------------------------------------------------------------------------
# mincost pipeline
# ---------------------------------------------------------------------------

def test_mincost_round_trip(tmp_path, capsys):
    src = tmp_path / "task.cnf"
    src.write_text("p cnf 2 1\n1 2 0\n")
    costs = tmp_path / "task.wts"
    costs.write_text("w 1 1\nw 2 1\n")

    code, out, _ = run(
        capsys,
        "mincost-randomize",
        "--in", str(src), "--costs", str(costs),
        "--seed", "3", "--method", "matrix",
    )
    assert code == 0
    artifact = tmp_path / "task.rand.opb"
    assert artifact.exists()
    assert (tmp_path / "task.rand.wts").exists()

    sol = tmp_path / "provider.sol"
    code, out, _ = run(
        capsys, "solve-brute", "--in", str(artifact),
        "--var-limit", "44", "--out", str(sol),
    )
    assert code == 0
    assert out.startswith("SAT count=")

    code, out, _ = run(
        capsys,
        "derandomize",
        "--secret", str(tmp_path / "task.key"),
        "--solution", str(sol),
        "--original", str(src),
        "--costs", str(costs),
    )
    assert code == 0
    cost_line, assignment_line = out.splitlines()
    cost = int(cost_line.split()[1])
    assignment = read_assignment(assignment_line)
    assert parse_dimacs(src.read_text()).satisfies(assignment)
    assert cost == sum(1 for v in (1, 2) if assignment[v])

    code, out, _ = run(
        capsys,
        "verify-solution",
        "--secret", str(tmp_path / "task.key"),
        "--solution", str(sol),
        "--original", str(src),
        "--costs", str(costs),
    )
    assert code == 0
    assert out == f"valid cost={cost}\n"


def test_mincost_record_requires_costs_flag(tmp_path, capsys):
    src = tmp_path / "task.cnf"
    src.write_text("p cnf 2 1\n1 2 0\n")
    costs = tmp_path / "task.wts"
    costs.write_text("w 1 1\n")
    run(capsys, "mincost-randomize", "--in", str(src), "--costs", str(costs),
        "--seed", "3")
    sol = tmp_path / "any.sol"
    sol.write_text("1 2\n")
    code, _, err = run(
        capsys,
        "derandomize",
        "--secret", str(tmp_path / "task.key"),
        "--solution", str(sol),
        "--original", str(src),
    )
    assert code == 1
    assert "--costs" in err


def test_mincost_randomize_rejects_iso():
    with pytest.raises(SystemExit) as excinfo:
        main(["mincost-randomize", "--in", "x.cnf", "--costs", "x.wts",
              "--seed", "1", "--method", "iso"])
    assert excinfo.value.code == 1


# ---------------------------------------------------------------------------
# firewall pipeline
# ---------------------------------------------------------------------------

def test_fw_encode_and_header_solve(tmp_path, capsys):
    p1 = tmp_path / "p1.fw"
    p1.write_text("1 2 0 3 accept\ndefault deny\n")
    same = tmp_path / "same.fw"
    same.write_text("1 2 0 3 accept\ndefault deny\n")
    deny_all = tmp_path / "deny.fw"
    deny_all.write_text("default deny\n")

    code, out, _ = run(
        capsys, "fw-encode", "--p1", str(p1), "--p2", str(same),
        "--layout", "2,2,2,2",
    )
    assert code == 0
    assert "8 header bits" in out
    eq = tmp_path / "p1.eq.cnf"
    assert eq.read_text().startswith("c header-bits 8\n")

    # Identical policies never disagree; --var-limit 4 forces the
    # header-enumeration path since the CNF itself has more variables.
    code, out, _ = run(capsys, "solve-brute", "--in", str(eq), "--var-limit", "4")
    assert code == 0
    assert out == "UNSAT count=0\n"

    code, _, _ = run(
        capsys, "fw-encode", "--p1", str(p1), "--p2", str(deny_all),
        "--layout", "2,2,2,2", "--out", str(eq),
    )
    assert code == 0
    code, out, _ = run(capsys, "solve-brute", "--in", str(eq), "--var-limit", "4")
    assert code == 0
    # Disagreement exactly on src_ip=1, src_port=2, dst_ip=0, dst_port=3,
    # packed MSB-first: 0b01_10_00_11 = 99.
    assert out == "SAT count=1 header=99\n"


def test_fw_encode_header_hint_guard(tmp_path, capsys):
    p1 = tmp_path / "p1.fw"
    p1.write_text("default accept\n")
    p2 = tmp_path / "p2.fw"
    p2.write_text("default deny\n")
    eq = tmp_path / "big.eq.cnf"
    run(capsys, "fw-encode", "--p1", str(p1), "--p2", str(p2),
        "--layout", "8,8,8,8", "--out", str(eq))
    code, _, err = run(capsys, "solve-brute", "--in", str(eq), "--var-limit", "4")
    assert code == 1
    assert "beyond brute-force range" in err


def test_fw_map_round_trip(tmp_path, capsys):
    # 8-bit IP fields split into four 2-bit chunks, so IPs are dotted quads.
    src = tmp_path / "policy.fw"
    src.write_text("1.2.3.0 2 * 3 accept\n* 1 0.1.*.2 * deny\ndefault deny\n")
    code, _, _ = run(
        capsys, "fw-map", "--in", str(src), "--seed", "5", "--layout", "8,2,8,2",
    )
    assert code == 0
    mapped = tmp_path / "policy.mapped.fw"
    key = tmp_path / "policy.key"
    first = mapped.read_text()
    assert mapped.exists() and key.exists()

    # Re-running with the saved key reproduces the mapping exactly.
    again = tmp_path / "again.fw"
    code, _, _ = run(
        capsys, "fw-map", "--in", str(src), "--use-secret", str(key),
        "--layout", "8,2,8,2", "--out", str(again),
    )
    assert code == 0
    assert again.read_text() == first

    # Wildcards and the rule shape survive the mapping.
    lines = first.splitlines()
    assert lines[1].split()[0] == "*"
    assert lines[1].split()[3] == "*"
    assert lines[1].split()[2].split(".")[2] == "*"
    assert lines[2] == "default deny"


def test_fw_map_needs_seed_or_secret(tmp_path, capsys):
    src = tmp_path / "policy.fw"
    src.write_text("default deny\n")
    code, _, err = run(capsys, "fw-map", "--in", str(src))
    assert code == 1
    assert "--seed or --use-secret" in err


def test_fw_bad_layout(tmp_path, capsys):
    src = tmp_path / "policy.fw"
    src.write_text("default deny\n")
    code, _, err = run(
        capsys, "fw-map", "--in", str(src), "--seed", "1", "--layout", "4,4",
    )
    assert code == 1
    assert "four comma-separated" in err


# ---------------------------------------------------------------------------
# solve-brute on linear systems and outsourcing rounds
# ---------------------------------------------------------------------------

def test_solve_brute_opb_infeasible(tmp_path, capsys):
    opb = tmp_path / "sys.opb"
    opb.write_text("* #variable= 2 #constraint= 1\n+1 x1 +1 x2 = 3 ;\n")
    code, out, _ = run(capsys, "solve-brute", "--in", str(opb))
    assert code == 0
    assert out == "UNSAT count=0\n"


def test_solve_brute_unsat_cnf(tmp_path, capsys):
    cnf = tmp_path / "contra.cnf"
    cnf.write_text("p cnf 1 2\n1 0\n-1 0\n")
    code, out, _ = run(capsys, "solve-brute", "--in", str(cnf))
    assert code == 0
    assert out == "UNSAT count=0\n"


def test_outsource_report(tmp_path, capsys):
    src = tmp_path / "orig.cnf"
    src.write_text(SAT_CNF)
    code, out, _ = run(
        capsys,
        "outsource", "--in", str(src), "--method", "iso", "--seed", "2",
        "--providers", "honest,lazy,malicious-unsat",
    )
    assert code == 0
    assert "verdict: sat" in out
    assert "FLAGGED" in out
    assert "flagged: 2 of 3" in out


def test_outsource_empty_providers(tmp_path, capsys):
    src = tmp_path / "orig.cnf"
    src.write_text(SAT_CNF)
    code, _, err = run(
        capsys, "outsource", "--in", str(src), "--providers", " , ,",
    )
    assert code == 1
    assert "empty" in err
