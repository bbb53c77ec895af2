import io
import json
import shutil
import subprocess

import pytest

from smallexp.cli import (
    EXIT_CONFIG,
    EXIT_INCONSISTENT,
    EXIT_OK,
    HIT_FIELDS,
    ConsistencyError,
    bounds_report,
    main,
    read_rows,
    run_table1,
    verify_hit,
    write_rows,
)
from smallexp.enumerator import SearchHit, brute_force_range


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_examples(capsys):
    code, out, _ = run(capsys, "verify", -430950520)
    assert code == EXIT_OK
    assert "exponent 8" in out and "h 4096" in out and "smallest_split_prime 29" in out
    rec = verify_hit(-39)
    assert (rec["h"], rec["four_rank"], rec["exponent"]) == (4, 1, 4) and rec["consistent"]
    assert rec["checks"]["reduced_form_count"]


def test_verify_rejects_non_fundamental(capsys):
    code, _, err = run(capsys, "verify", -21)
    assert code == EXIT_CONFIG and "-84" in err
    code, _, err = run(capsys, "verify", 5)
    assert code == EXIT_CONFIG


def test_verify_reports_inconsistency(capsys, monkeypatch):
    import smallexp.cli as cli

    real = cli.redei_matrix

    class Off:
        def __init__(self, M):
            self.k, self.rank = M.k, M.rank + 1

    monkeypatch.setattr(cli, "redei_matrix", lambda fd: Off(real(fd)))
    code, out, _ = run(capsys, "verify", -39)
    assert code == EXIT_INCONSISTENT and "FAILED" in out


def test_bounds_command(capsys):
    code, out, _ = run(capsys, "bounds", "--exponent", 8, "--k", 3, "--json")
    assert code == EXIT_OK
    rep = json.loads(out)
    assert rep["N"] == 58 and rep["erh_bound"] == pytest.approx(8.9e35)
    assert [r["ceiling"] for r in rep["table"]] == [1042039198, 47157102, 1985247]
    code, out, _ = run(capsys, "bounds", "--exponent", 4)
    assert "N 24" in out and "erh_bound 3.4e+15" in out
    assert run(capsys, "bounds", "--exponent", 6)[0] == EXIT_CONFIG
    assert bounds_report(2)["N"] == 11


def test_redei_and_classgroup_commands(capsys):
    code, out, _ = run(capsys, "redei", "--disc", -84)
    assert code == EXIT_OK
    assert out.splitlines()[:3] == ["1 1 0", "1 0 1", "1 0 1"]
    assert "four_rank 0" in out
    code, out, _ = run(capsys, "classgroup", -5460)
    assert "structure C2 x C2 x C2 x C2" in out and "exponent 2" in out


@pytest.mark.property
def test_csv_and_json_round_trip():
    hits = brute_force_range(8, 3, 3000)
    rows = [h.row() for h in hits]
    for as_json in (False, True):
        buf = io.StringIO()
        write_rows(rows, HIT_FIELDS, buf, as_json)
        buf.seek(0)
        assert read_rows(buf, as_json) == rows
    buf = io.StringIO()
    write_rows(rows, HIT_FIELDS, buf, False)
    assert buf.getvalue().splitlines()[0] == "D,h,exponent,omega,smallest_split_prime"
    assert "e+" not in buf.getvalue()


def test_brute_force_command_output_file(capsys, tmp_path):
    out = tmp_path / "b.csv"
    code, _, err = run(capsys, "brute-force", "--hi", 10**4, "--out", out, "--tasks", 1)
    assert code == EXIT_OK and "unconditional" in err
    rows = read_rows(out.open(), False)
    assert [r["D"] for r in rows] == [h.d for h in brute_force_range(8, 3, 10**4)]
    assert [SearchHit(*r.values()) for r in rows] == brute_force_range(8, 3, 10**4)


@pytest.mark.property
def test_commands_are_deterministic_across_tasks(capsys, tmp_path):
    outs = []
    for t in (1, 2):
        code, out, _ = run(capsys, "direct-search", "--max-prime", 29, "--exponent", 4, "--json", "--tasks", t)
        assert code == EXIT_OK
        outs.append(out)
    assert outs[0] == outs[1] and outs[0]
    outs = []
    for t in (1, 2):
        code, out, _ = run(
            capsys, "sieve", "--modulus-primes", "3,5,7,11,13", "--sieve-primes-max", 31,
            "--hi", 2 * 10**6, "--tasks", t,
        )
        assert code == EXIT_OK
        outs.append(out)
    assert outs[0] == outs[1]
    assert outs[0].splitlines()[0] == "D,smallest_split_prime,exponent_or_minus1"


def test_enumerate_command(capsys):
    code, out, err = run(capsys, "enumerate", "--exponent", 8, "--max-abs-d", 3 * 10**6, "--json", "--tasks", 1)
    assert code == EXIT_OK and "one exception" in err
    got = [json.loads(line)["D"] for line in out.splitlines()]
    want = [h.d for h in brute_force_range(8, 10**6 + 1, 3 * 10**6 + 1, dividing=True)]
    assert got == want and got
    assert run(capsys, "enumerate", "--exponent", 8, "--lower-cutoff", 1000)[0] == EXIT_CONFIG


def test_sieve_config_errors(capsys):
    assert run(capsys, "sieve", "--modulus-primes", "3,9", "--hi", 1000)[0] == EXIT_CONFIG
    assert run(capsys, "sieve", "--abs-bound", 0)[0] == EXIT_CONFIG


def test_table1_without_direct_search():
    rep = run_table1(10**5, with_direct=False)
    assert rep.counts[1] == 9 and rep.largest[1] == -163 and rep.largest[2] == -5460
    assert rep.total == len(rep.hits)
    assert any("unconditional" in r for r in rep.regimes)
    assert rep.lines()[0].startswith("exponent")


def test_table1_with_enumeration_overlap():
    rep = run_table1(3 * 10**6, with_direct=False, with_enumerate=True)
    assert any("exception" in r for r in rep.regimes)
    assert [h.d for h in rep.hits] == [h.d for h in brute_force_range(8, 3, 3 * 10**6 + 1)]


def test_table1_detects_inconsistent_subruns(monkeypatch):
    import smallexp.cli as cli

    monkeypatch.setattr(cli, "direct_search", lambda *a: [SearchHit(-999983, 1, 1, 1, 2)])
    with pytest.raises(ConsistencyError):
        run_table1(10**6)


@pytest.mark.skipif(shutil.which("smallexp") is None, reason="console script not installed")
def test_console_script():
    res = subprocess.run(["smallexp", "classgroup", "-163"], capture_output=True, text=True, check=True)
    assert "h 1" in res.stdout
