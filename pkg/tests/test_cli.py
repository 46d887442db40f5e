import json
import subprocess
import sys

import pytest

from ramsat.cli import (
    EXIT_FAILURE,
    EXIT_INCOMPLETE,
    EXIT_OK,
    EXIT_VIOLATION,
    main,
    parse_group,
    parse_pattern,
    parse_patterns,
)
from ramsat.encode import VariableMap, parse_dimacs
from ramsat.graphs import make_pattern, parse_coloring_matrix


@pytest.mark.parametrize(
    "text, expected",
    [
        ("K4", make_pattern("complete", 4)),
        ("K4-e", make_pattern("complete_minus_edge", 4)),
        ("C6", make_pattern("cycle", 6)),
        ("K1s:3", make_pattern("star", 3)),
        ("B2", make_pattern("book", 2)),
        ("K4m3", make_pattern("k4_minus_hyper")),
    ],
)
def test_pattern_language(text, expected):
    assert parse_pattern(text) == expected


@pytest.mark.parametrize("text", ["K", "W5", "K4-f", "C2", "K1s:0"])
def test_pattern_language_rejects(text):
    with pytest.raises(ValueError):
        parse_pattern(text)


def test_pattern_list():
    assert [p.label for p in parse_patterns("C4,K1s:3")] == ["C_4", "K_{1,3}"]


def test_group_language():
    assert parse_group("Z17").order == 17
    assert parse_group("D4").order == 8
    assert parse_group("Z8xS3").order == 48
    assert parse_group("smallgroup_16_6").order == 16
    assert parse_group("fixtures/smallgroup_16_6").order == 16
    with pytest.raises(FileNotFoundError):
        parse_group("nosuchgroup")


def test_encode_writes_formula_and_sidecar(tmp_path, capsys):
    out = tmp_path / "k5.cnf"
    assert main(["encode", "--n", "5", "--colors", "K3,K3", "-o", str(out)]) == EXIT_OK
    text = out.read_text()
    assert text.startswith("p cnf 20 40\n")
    assert parse_dimacs(text).clause_count == 40
    vm = VariableMap.from_json((tmp_path / "k5.cnf.varmap.json").read_text())
    assert (vm.n, vm.k) == (5, 2)


def test_encode_structured_instance(tmp_path):
    out = tmp_path / "t1.cnf"
    args = ["encode", "--n", "34", "--colors", "K4-e,K4-e,K4", "--group", "fixtures/smallgroup_16_6", "--blocks", "2", "--extend", "2", "-o", str(out)]
    assert main(args) == EXIT_OK
    assert "c group cayley" in out.read_text()


def test_encode_bad_structure(tmp_path, capsys):
    code = main(["encode", "--n", "33", "--colors", "K4-e,K4-e,K4", "--group", "smallgroup_16_6", "--blocks", "2", "-o", str(tmp_path / "x.cnf")])
    assert code == EXIT_FAILURE
    assert "error:" in capsys.readouterr().err


def test_search_upper_bound(tmp_path, capsys):
    assert main(["search", "--n", "6", "--colors", "K3,K3", "--out", str(tmp_path)]) == EXIT_OK
    assert "R(K_3,K_3) ≤ 6" in capsys.readouterr().out
    result = json.loads((tmp_path / "result.json").read_text(encoding="utf-8"))
    assert result["status"] == "UNSAT" and result["statement"] == "R(K_3,K_3) ≤ 6"
    assert not (tmp_path / "witness.matrix").exists()


def test_search_circulant_witness(tmp_path, capsys):
    assert main(["search", "--n", "17", "--colors", "K4,K4", "--group", "Z17", "--blocks", "1", "--out", str(tmp_path)]) == EXIT_OK
    assert "R(K_4,K_4) ≥ 18" in capsys.readouterr().out
    result = json.loads((tmp_path / "result.json").read_text(encoding="utf-8"))
    assert result["verification"]["verdict"] == "clean"
    assert result["structure"]["ok"]
    c = parse_coloring_matrix((tmp_path / "witness.matrix").read_text())
    assert c.vertex_count == 17


def test_structured_unsat_is_not_an_upper_bound(tmp_path, capsys):
    assert main(["search", "--n", "50", "--colors", "K3,K3", "--group", "Z50", "--blocks", "1", "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "no structured coloring exists" in out
    assert "not an upper bound" in out
    assert "≤" not in out


def test_search_budget_exhausted(tmp_path):
    code = main(["search", "--n", "9", "--colors", "K3,K4", "--max-conflicts", "3", "--out", str(tmp_path)])
    assert code == EXIT_INCOMPLETE


def test_search_is_reproducible(tmp_path):
    args = ["search", "--n", "8", "--colors", "K3,K4", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    for name in ("result.json", "witness.matrix"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_search_from_config(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"n": 5, "colors": "C4,C4", "seed": 1}))
    assert main(["search", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    assert "R(C_4,C_4) ≥ 6" in capsys.readouterr().out
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"n": 5, "colours": "C4,C4"}))
    assert main(["search", "--config", str(bad), "--out", str(tmp_path / "o")]) == EXIT_FAILURE


def test_search_with_external_solver(tmp_path, capsys):
    cmd = f"{sys.executable} -m ramsat solve --competition {{cnf}}"
    assert main(["search", "--n", "5", "--colors", "K3,K3", "--solver-cmd", cmd, "--out", str(tmp_path)]) == EXIT_OK
    assert "R(K_3,K_3) ≥ 6" in capsys.readouterr().out


def test_verify_clean_and_json(tmp_path, capsys):
    m = tmp_path / "c5.matrix"
    m.write_text("x0110\n0x011\n10x01\n110x0\n0110x\n")
    assert main(["verify", str(m), "--colors", "K3,K3", "--strategy", "both"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "R(K_3,K_3) ≥ 6" in out and "strategies agree" in out
    assert main(["verify", str(m), "--colors", "K3,K3", "--json", "--group", "Z5"]) == EXIT_OK
    doc = json.loads(capsys.readouterr().out)
    assert doc["verdict"] == "clean" and doc["bound"] == "R(K_3,K_3) ≥ 6"
    assert doc["structure"]["ok"]


def test_verify_mutated_fixture(capsys):
    assert main(["verify", "theorem1_mutated", "--colors", "K4-e,K4-e,K4"]) == EXIT_VIOLATION
    out = capsys.readouterr().out
    assert "monochromatic copy" in out and "violation" in out


def test_verify_missing_file(capsys):
    assert main(["verify", "/nonexistent.matrix", "--colors", "K3,K3"]) == EXIT_FAILURE


def test_enumerate_writes_index(tmp_path, capsys):
    assert main(["enumerate", "--colors", "C4,K1s:3", "--n", "5", "--out", str(tmp_path)]) == EXIT_OK
    index = json.loads((tmp_path / "index.json").read_text())
    assert index["count"] == 2
    assert len(list(tmp_path.glob("*.matrix"))) == 2


def test_enumerate_incomplete(tmp_path):
    code = main(["enumerate", "--colors", "C4,K1s:6", "--n", "8", "--max-conflicts", "2", "--out", str(tmp_path)])
    assert code == EXIT_INCOMPLETE


def test_solve_competition_exit_codes(tmp_path, capsys):
    sat = tmp_path / "sat.cnf"
    sat.write_text("p cnf 2 2\n1 2 0\n-1 0\n")
    unsat = tmp_path / "unsat.cnf"
    unsat.write_text("p cnf 1 2\n1 0\n-1 0\n")
    assert main(["solve", str(sat), "--competition"]) == 10
    assert "s SATISFIABLE" in capsys.readouterr().out
    assert main(["solve", str(unsat), "--competition"]) == 20
    assert main(["solve", str(unsat)]) == EXIT_OK


def test_grid_summary_sorted(tmp_path, capsys):
    code = main(["grid", "--colors", "K3,K3", "--n-range", "4:6", "--jobs", "2", "--out", str(tmp_path)])
    assert code == EXIT_OK
    rows = (tmp_path / "summary.tsv").read_text(encoding="utf-8").splitlines()
    assert rows[0].startswith("instance")
    assert [r.split("\t")[0] for r in rows[1:]] == ["n=0004", "n=0005", "n=0006"]
    assert [r.split("\t")[1] for r in rows[1:]] == ["SAT", "SAT", "UNSAT"]


def test_grid_over_groups(tmp_path):
    code = main(["grid", "--n", "16", "--colors", "K3,K3,K3", "--groups", "Z16,z4xz4,Z8xZ2", "--out", str(tmp_path), "--timeout", "120"])
    rows = (tmp_path / "summary.tsv").read_text(encoding="utf-8").splitlines()[1:]
    assert [r.split("\t")[0] for r in rows] == sorted(r.split("\t")[0] for r in rows)
    assert code in (EXIT_OK, EXIT_INCOMPLETE)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "ramsat", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "enumerate" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "ramsat", "frobnicate"], capture_output=True, text=True)
    assert proc.returncode == 2
