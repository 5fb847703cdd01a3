import os

import pytest

from hypertest import cli

CORPUS = os.path.join("src", "hypertest", "corpus")


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_ok(capsys):
    code, out, _ = run(capsys, "parse", f"{CORPUS}/alu8.ckt")
    assert code == 0 and "circuit alu8" in out


def test_parse_diagnostics_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.ckt"
    bad.write_text("circuit x\ninput a\noutput y\ngate g kind=NAND in=(a) out=(y)\nend\n")
    code, out, _ = run(capsys, "parse", str(bad))
    assert code == 1
    assert "unknown-kind" in out


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as e:
        cli.main(["transform"])  # missing required args
    assert e.value.code == 2


def test_transform_sim_pipeline(tmp_path, capsys):
    shp_path = tmp_path / "c.shp"
    code, out, _ = run(capsys, "transform", f"{CORPUS}/counter8.ckt",
                       "--csr", "2", "--barrel", "4", "--out", str(shp_path))
    assert code == 0 and shp_path.exists()
    sched = tmp_path / "s.sched"
    sched.write_text("window 0 1 - -\nrepeat\n")
    prog = tmp_path / "p.vec"
    prog.write_text("set en=1 ld=0 lv=0\nset en=1\nset en=0\n")
    code, out, _ = run(capsys, "shpsim", str(shp_path), "--sched", str(sched),
                       "--prog", f"t0={prog}", "--prog", f"t1={prog}")
    assert code == 0
    assert out.count("thread ") == 2


def test_shpsim_redundant_with_injection(tmp_path, capsys):
    shp_path = tmp_path / "c.shp"
    run(capsys, "transform", f"{CORPUS}/counter8.ckt", "--csr", "2",
        "--barrel", "4", "--out", str(shp_path))
    prog = tmp_path / "p.vec"
    prog.write_text("\n".join("set en=1 ld=0 lv=0" for _ in range(6)) + "\n")
    seu = tmp_path / "f.seu"
    seu.write_text("inject cycle=6 elem=count thread=1 bit=0\n")
    code, out, _ = run(capsys, "shpsim", str(shp_path), "--redundant", "3",
                       "--prog", str(prog), "--inject", str(seu))
    assert code == 0
    assert "detect micro=" in out and "recover micro=" in out
    assert "final_equivalent true" in out


def test_sim_expect_mismatch_exit_code(tmp_path, capsys):
    prog = tmp_path / "p.vec"
    prog.write_text("set en=0 ld=1 lv=0x7 ; expect q=0x0\nset ld=0 ; expect q=0x9\n")
    code, out, _ = run(capsys, "sim", f"{CORPUS}/counter8.ckt", "--prog", str(prog))
    assert code == 1
    assert "MISMATCH" in out


def test_gifsim_merge_report_serve_chain(tmp_path, capsys):
    db1 = tmp_path / "a.gcdb"
    code, out, _ = run(capsys, "gifsim", f"{CORPUS}/dup2po.ckt",
                       "--tests", f"{CORPUS}/tests/dup2po",
                       "--mode", "site", "--model", "po", "--out", str(db1))
    assert code == 0 and db1.exists()
    merged = tmp_path / "m.gcdb"
    code, out, _ = run(capsys, "merge", str(db1), str(db1), "--out", str(merged))
    assert code == 0
    code, out, _ = run(capsys, "report", str(merged), "--circuit",
                       f"{CORPUS}/dup2po.ckt")
    assert code == 0
    assert "(root)" in out and "core" in out
    code, out, _ = run(capsys, "report", str(merged), "--circuit",
                       f"{CORPUS}/dup2po.ckt", "--tests", "go_full")
    assert code == 0


def test_report_hash_mismatch_exit_1(tmp_path, capsys):
    db1 = tmp_path / "a.gcdb"
    run(capsys, "gifsim", f"{CORPUS}/dup2po.ckt", "--tests",
        f"{CORPUS}/tests/dup2po", "--out", str(db1))
    code, _out, err = run(capsys, "report", str(db1), "--circuit",
                          f"{CORPUS}/counter8.ckt")
    assert code == 1
    assert "hash" in err


def test_safsim_and_tcpn(tmp_path, capsys):
    code, out, _ = run(capsys, "safsim", f"{CORPUS}/dup2po.ckt",
                       "--decomp", "A", "--tests", f"{CORPUS}/tests/dup2po")
    assert code == 0
    assert "coverage 100.00% of testable" in out
    code, out, _ = run(capsys, "tcpn", f"{CORPUS}/dup2po.ckt",
                       "--tests", f"{CORPUS}/tests/dup2po")
    assert code == 0
    assert "tcpn" in out
