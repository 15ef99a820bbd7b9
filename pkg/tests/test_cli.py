import subprocess
import sys
from decimal import Decimal

import pytest

from addsum import harness as H
from addsum.cli import EXIT_GUARD, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


@pytest.mark.parametrize("argv,first", [
    (["exact", "--f", "Omega:1", "--k", "1", "--x", "10"], "15"),
    (["exact", "--f", "omega_m:1", "--k", "2", "--x", "4"], "5"),
    (["exact", "--f", "omega_m:1", "--k", "2", "--x", "2", "--mode", "lcm"], "3"),
    (["exact", "--f", "B", "--k", "2", "--x", "30", "--method", "naive"], None),
    (["exact", "--f", "B", "--k", "2", "--x", "30", "--method", "mobius"], None),
])
def test_exact_command(capsys, argv, first):
    rc, out, _ = run(capsys, *argv)
    assert rc == EXIT_OK
    lines = out.splitlines()
    assert lines[1].startswith("# f=")
    if first is not None:
        assert lines[0] == first


def test_exact_methods_agree(capsys):
    vals = {run(capsys, "exact", "--f", "A", "--k", "2", "--x", "50", "--method", m)[1].splitlines()[0]
            for m in ("identity", "naive", "mobius")}
    assert len(vals) == 1


def test_constants_table(capsys):
    rc, out, _ = run(capsys, "constants", "M", "D:1:B", "G:A_l:1,2", "zeta:3", "P:2", "a:1,0,0,1", "A:1,0")
    assert rc == EXIT_OK
    rows = [l.split("\t") for l in out.splitlines()]
    assert rows[0] == ["name", "value", "err_bound", "method"]
    table = {r[0]: r[1] for r in rows[1:]}
    assert table["M"].startswith("0.2614972128476427837554")
    assert table["D:1:B"].startswith("1.03465388189743791161")
    assert table["G:A_l:1,2"].startswith("0.48296058424043872718")


@pytest.mark.parametrize("argv", [
    ["constants", "nosuch"],
    ["constants", "F:B,1"],
    ["exact", "--f", "nosuch", "--k", "1", "--x", "10"],
    ["exact", "--f", "B", "--k", "2", "--x", "10", "--mode", "lcm", "--method", "mobius"],
    ["converge", "--f", "B", "--grid", ""],
    ["converge", "--f", "B", "--grid", "10^5,10^4"],
    ["asymptotic", "--f", "B", "--k", "1", "--x", "2"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["exact", "--f", "B"])
    assert exc.value.code == 2


def test_size_guard(capsys):
    rc, _, err = run(capsys, "exact", "--f", "B", "--k", "1", "--x", str(10**10))
    assert rc == EXIT_GUARD and "guard" in err


def test_asymptotic_command(capsys):
    rc, out, _ = run(capsys, "asymptotic", "--f", "B", "--k", "1", "--x", "1000000", "--N", "2")
    assert rc == EXIT_OK
    assert "regime=T1-Form2[r=k-1,s=2k-1]" in out


def test_converge_file_and_determinism(capsys, tmp_path):
    outs = []
    for t in (1, 4):
        path = tmp_path / f"t{t}.csv"
        rc, out, _ = run(capsys, "converge", "--f", "B", "--k", "2", "--grid", "10^3,3*10^3,10^4",
                         "--threads", str(t), "--out", str(path))
        assert rc == EXIT_OK and "summary: 3 rows" in out
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    rows = H.rows_from_csv(outs[0].decode())
    assert [r.x for r in rows] == [1000, 3000, 10000]


def test_converge_config_and_directory(capsys, tmp_path):
    cfg = tmp_path / "exp.cfg"
    cfg.write_text("# demo\nf = Omega:1\nk = 2\ngrid = 10^3,10^4\noutput = json\ndigits = 25\n")
    rc, out, _ = run(capsys, "converge", "--config", str(cfg), "--out", str(tmp_path))
    assert rc == EXIT_OK
    data = (tmp_path / "converge_Omega_1_k2_gcd.json").read_text()
    rows = H.rows_from_json(data)
    assert len(rows) == 2 and rows[0].regime_tag.startswith("T1-Form1")


def test_bad_config_line(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("f = B\nnonsense\n")
    assert run(capsys, "converge", "--config", str(cfg))[0] == EXIT_USAGE


def test_rows_round_trip():
    cfg = H.ExperimentConfig("B", 1, "gcd", [10**3, 10**4], 2)
    rows = H.convergence_rows(cfg, timings=True)
    assert H.rows_from_csv(H.rows_to_csv(rows)) == rows
    assert H.rows_from_json(H.rows_to_json(rows)) == rows
    plain = H.convergence_rows(cfg)
    assert all(r.elapsed_exact is None for r in plain)
    assert [r.numeric() for r in plain] == [r.numeric() for r in rows]
    assert isinstance(rows[0].exact_value, Decimal)


@pytest.mark.parametrize("text,want", [("10^4,3*10^4", [10**4, 3 * 10**4]), ("1e5, 200", [10**5, 200]), ("", [])])
def test_parse_grid(text, want):
    assert H.parse_grid(text) == want


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("ADDSUM_THREADS", "3")
    rc, out, _ = run(capsys, "exact", "--f", "B", "--k", "2", "--x", "1000")
    assert rc == EXIT_OK
    monkeypatch.setenv("ADDSUM_THREADS", "many")
    assert run(capsys, "exact", "--f", "B", "--k", "2", "--x", "1000")[0] == EXIT_USAGE


def test_verify_quick(capsys):
    rc, out, _ = run(capsys, "verify", "quick")
    assert rc == EXIT_OK and "all suites passed" in out


def test_verify_corrupt_reference(capsys, tmp_path):
    ref = tmp_path / "ref.txt"
    ref.write_text("M = 0.2614972128476427837554268386086958\nzeta:3 = 1.2020569031595942853997381\n"
                   "gamma = 0.5772156649115328606065120900824\n")
    assert run(capsys, "verify", "quick", "--reference", str(ref))[0] == EXIT_VERIFY


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "addsum", "exact", "--f", "A", "--k", "1", "--x", "10"],
                          capture_output=True, text=True, check=True)
    # A(2..10) = 2+3+4+5+5+7+6+6+7
    assert proc.stdout.splitlines()[0] == "45"


def test_omega_alias(capsys):
    a = run(capsys, "exact", "--f", "omega:1", "--k", "2", "--x", "40")[1].splitlines()[0]
    b = run(capsys, "exact", "--f", "omega_m:1", "--k", "2", "--x", "40")[1].splitlines()[0]
    assert a == b
