"""Strict config parsing, deterministic reporting, and the CLI contract."""

import hashlib
import json
import math

import numpy as np
import pytest

from abtrap import cli
from abtrap.config import DEFAULT_CONFIG_TEXT, parse_config
from abtrap.core import TrapConfig
from abtrap.errors import ConfigError, NumericalFailure
from abtrap.reporting import attach_hash, config_hash, dump_lines, dumps, \
    records_csv, trajectory_csv
from abtrap.secular import ClassicalState, PaulDrive, integrate_trajectory


# A small, fast configuration used by most CLI round trips.
FAST_CFG = """\
omega_P = 1
omega_c = 3
omega_0 = 1/2
a = 1
alpha = 1/4

[solver]
N = 800
k = 2

[sweep]
sectors = 0, 1
ratios = 10, 20
"""


def write_cfg(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


# ---------------------------------------------------------------- parsing

def test_default_config_parses_to_expected_values():
    rc = parse_config(DEFAULT_CONFIG_TEXT)
    assert rc.trap.omega_P == 1.0
    assert rc.trap.omega_c == 1.0
    assert rc.trap.alpha == 0.25
    assert rc.drive == PaulDrive(V=3.0, d=1.0, omega_rf=50.0)
    assert rc.solver.N == 4000 and rc.solver.k == 6
    assert rc.sweep.sectors == (-2, -1, 0, 1, 2)
    # the shipped drive sits comfortably inside the secular regime
    assert rc.drive.ratio(rc.trap.mu) > 20


def test_bare_keys_belong_to_the_trap_section():
    rc = parse_config("omega_P = 2\n")
    assert rc.trap.omega_P == 2.0
    assert rc.trap.omega_c == 0.0
    assert rc.drive is None


def test_bytes_input_accepted():
    rc = parse_config(b"omega_P = 1\n")
    assert rc.trap.omega_P == 1.0


def test_invariant_violation_carries_line_and_key():
    with pytest.raises(ConfigError, match=r"line 1: omega_P"):
        parse_config("omega_P = -1\n")


def test_alpha_consistency_is_checked_exactly():
    body = "omega_P = 1\nomega_0 = 1/2\na = 1\nalpha = {}\n"
    rc = parse_config(body.format("1/4"))
    assert rc.trap.alpha == 0.25
    rc = parse_config(body.format("0.25"))
    assert rc.trap.alpha == 0.25
    with pytest.raises(ConfigError, match=r"line 4: alpha.*inconsistent"):
        parse_config(body.format("0.3"))
    # a mismatch far below float resolution must still be caught
    with pytest.raises(ConfigError, match="inconsistent"):
        parse_config(body.format("0.25000000000000000001"))


def test_scientific_notation_is_exact():
    rc = parse_config("omega_P = 1e-3\n")
    assert "omega_P = 1/1000" in rc.canonical


def test_flux_without_omega_0_back_solves_the_solenoid():
    rc = parse_config("omega_P = 1\nomega_c = 1\nalpha = 1/4\n")
    assert rc.trap.a == 1.0
    assert rc.trap.omega_0 == 0.5
    assert rc.trap.alpha == 0.25


def test_malformed_lines_rejected():
    for text, pattern in [
        ("bogus = 1\n", r"unknown key 'bogus'"),
        ("[nonsense]\n", r"unknown section"),
        ("[trap]\nomega_P = 1\n[trap]\n", r"duplicate section"),
        ("omega_P = 1\nomega_P = 2\n", r"duplicate key"),
        ("omega_P\n", r"expected key = value"),
        ("omega_P = \n", r"empty key or value"),
        ("omega_P = abc\n", r"not a number"),
        ("\n", r"missing mandatory key omega_P"),
        ("omega_P = 1\n[drive]\nV = 1\n", r"missing: d, omega_rf"),
    ]:
        with pytest.raises(ConfigError, match=pattern):
            parse_config(text)


def test_solver_and_sweep_validation():
    with pytest.raises(ConfigError, match=r"at least 200 grid points"):
        parse_config("omega_P = 1\n[solver]\nN = 50\n")
    with pytest.raises(ConfigError, match=r"model must be one of"):
        parse_config("omega_P = 1\n[solver]\nmodel = cubic\n")
    with pytest.raises(ConfigError, match=r"k must be >= 1"):
        parse_config("omega_P = 1\n[solver]\nk = 0\n")
    with pytest.raises(ConfigError, match=r"expected an integer"):
        parse_config("omega_P = 1\n[sweep]\nsectors = 1.5\n")
    with pytest.raises(ConfigError, match=r"empty element"):
        parse_config("omega_P = 1\n[sweep]\nratios = 1,,2\n")
    with pytest.raises(ConfigError, match=r"ratios must be non-negative"):
        parse_config("omega_P = 1\n[sweep]\nratios = -1\n")
    rc = parse_config("omega_P = 1\n[solver]\nR = auto\n")
    assert rc.solver.R is None


def test_canonical_text_ignores_presentation():
    variants = [
        "omega_P = 1\nomega_c = 2\n",
        "# leading comment\n[trap]\n  omega_c   =   2.0\n\nomega_P = 1.0\n",
        "[trap]\nomega_P = 4/4\nomega_c = 2\n",
    ]
    canon = {parse_config(t).canonical for t in variants}
    assert len(canon) == 1
    other = parse_config("omega_P = 1\nomega_c = 3\n").canonical
    assert other not in canon
    digests = {config_hash(parse_config(t).canonical) for t in variants}
    assert len(digests) == 1


def test_config_hash_is_sha256_of_canonical_text():
    rc = parse_config(DEFAULT_CONFIG_TEXT)
    expected = hashlib.sha256(rc.canonical.encode("utf-8")).hexdigest()
    assert config_hash(rc.canonical) == expected


# -------------------------------------------------------------- reporting

def test_dumps_is_sorted_and_newline_terminated():
    text = dumps({"b": 1, "a": np.float64(0.5)})
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": 0.5, "b": 1}


def test_dumps_rejects_non_finite():
    with pytest.raises(ValueError):
        dumps({"x": float("nan")})


def test_record_lines_and_csv_share_content():
    records = attach_hash([{"m": 0, "E": 1.5}, {"m": 1, "E": 2.5}], "abc")
    lines = dump_lines(records).strip().split("\n")
    assert [json.loads(l)["config_hash"] for l in lines] == ["abc", "abc"]
    csv = records_csv(records, ("m", "E", "config_hash"))
    assert csv.splitlines()[0] == "m,E,config_hash"
    assert csv.splitlines()[1] == "0,1.5,abc"


def test_records_csv_rejects_non_finite():
    with pytest.raises(ValueError, match="column E"):
        records_csv([{"E": math.inf}], ("E",))


def test_trajectory_csv_decimation():
    cfg = TrapConfig(omega_P=1.0, omega_c=1.0)
    state = ClassicalState(x1=1.0, x2=0.0, v2=0.5)
    traj = integrate_trajectory(state, cfg, None, T=1.0, dt=0.01)
    full = trajectory_csv(traj)
    assert full.splitlines()[0] == "t,x1,x2,z,v1,v2,vz"
    assert len(full.splitlines()) == traj.n + 1
    thin = trajectory_csv(traj, decimate=10)
    assert len(thin.splitlines()) == 1 + math.ceil(traj.n / 10)
    assert thin.splitlines()[1] == full.splitlines()[1]
    with pytest.raises(ValueError):
        trajectory_csv(traj, decimate=0)


# -------------------------------------------------------------------- cli

def test_reduce_stdout_document(capsys):
    assert cli.main(["reduce"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["values"]["zero_point_Jz"] == 0.75
    assert doc["config_hash"] == config_hash(
        parse_config(DEFAULT_CONFIG_TEXT).canonical)
    assert doc["constraint_matrix"]["classification"] == "second_class"


def test_reduce_degenerate_field_exits_4(tmp_path, capsys):
    path = write_cfg(tmp_path, "omega_P = 1\nomega_c = 0\n")
    assert cli.main(["reduce", "--config", path]) == 4
    err = capsys.readouterr().err
    assert "degenerate" in err
    assert "mu*omega_c" in err


def test_config_errors_exit_2(tmp_path, capsys):
    assert cli.main(["reduce", "--config", str(tmp_path / "nope.cfg")]) == 2
    assert "cannot read config file" in capsys.readouterr().err
    path = write_cfg(tmp_path, "omega_P = -1\n")
    assert cli.main(["reduce", "--config", path]) == 2
    assert "omega_P" in capsys.readouterr().err


def test_spectrum_stdout_matches_file_and_reruns(tmp_path, capsys):
    path = write_cfg(tmp_path, FAST_CFG)
    assert cli.main(["spectrum", "--config", path,
                     "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["spectrum", "--config", path,
                     "--out", str(tmp_path / "b")]) == 0
    first = (tmp_path / "a" / "spectrum.jsonl").read_bytes()
    assert first == (tmp_path / "b" / "spectrum.jsonl").read_bytes()
    capsys.readouterr()
    assert cli.main(["spectrum", "--config", path]) == 0
    assert capsys.readouterr().out.encode() == first
    records = [json.loads(l) for l in first.decode().splitlines()]
    digest = config_hash(parse_config(FAST_CFG).canonical)
    assert {r["config_hash"] for r in records} == {digest}
    assert {r["m"] for r in records} == {0, 1}
    assert len(records) == 4


def test_spectrum_threads_do_not_change_bytes(tmp_path, capsys, monkeypatch):
    path = write_cfg(tmp_path, FAST_CFG)
    assert cli.main(["spectrum", "--config", path]) == 0
    serial = capsys.readouterr().out
    assert cli.main(["spectrum", "--config", path, "--threads", "3"]) == 0
    assert capsys.readouterr().out == serial
    monkeypatch.setenv("ABTRAP_THREADS", "2")
    assert cli.main(["spectrum", "--config", path]) == 0
    assert capsys.readouterr().out == serial


def test_bad_thread_counts_exit_2(capsys, monkeypatch):
    assert cli.main(["spectrum", "--threads", "0"]) == 2
    assert "at least 1" in capsys.readouterr().err
    monkeypatch.setenv("ABTRAP_THREADS", "many")
    assert cli.main(["spectrum"]) == 2
    assert "ABTRAP_THREADS" in capsys.readouterr().err


def test_spectrum_csv_format(tmp_path, capsys):
    path = write_cfg(tmp_path, FAST_CFG)
    assert cli.main(["spectrum", "--config", path, "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "m,n,E,rho2,Ek,residual,bound,model,config_hash"
    assert len(lines) == 5


def test_residual_scan_uses_swept_ratios(tmp_path, capsys):
    path = write_cfg(tmp_path, FAST_CFG)
    assert cli.main(["residual-scan", "--config", path]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert [r["ratio"] for r in doc["records"]] == [10.0, 20.0]
    assert doc["monotone_decreasing"] is True
    assert doc["all_within_bound"] is True
    assert cli.main(["residual-scan", "--config", path,
                     "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("ratio,m,E")
    assert len(lines) == 3


def test_gauge_check_document(capsys):
    assert cli.main(["gauge-check"]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["max_pure_gauge_residual"] <= 1e-12
    assert abs(doc["circulation_over_2pi"] - 0.25) <= 1e-8
    assert doc["symbolic_pass"] is True


def test_secular_requires_a_drive(tmp_path, capsys):
    path = write_cfg(tmp_path, "omega_P = 1\n")
    assert cli.main(["secular", "--config", path]) == 2
    assert "[drive]" in capsys.readouterr().err


def test_secular_artifacts(tmp_path, capsys):
    out = tmp_path / "sec"
    assert cli.main(["secular", "--out", str(out)]) == 0
    doc = json.loads((out / "secular.json").read_text())
    assert doc["relative_error"] <= 0.05
    assert doc["secular_periods"] == 24.0
    rows = (out / "trajectory.csv").read_text().splitlines()
    assert rows[0] == "t,x1,x2,z,v1,v2,vz"
    assert len(rows) <= 4098
    out2 = tmp_path / "sec2"
    assert cli.main(["secular", "--out", str(out2), "--decimate", "100000"]) == 0
    assert len((out2 / "trajectory.csv").read_text().splitlines()) < 20
    assert (out2 / "secular.json").read_bytes() == \
        (out / "secular.json").read_bytes()


def test_secular_bad_decimation_exits_2(tmp_path, capsys):
    assert cli.main(["secular", "--out", str(tmp_path / "x"),
                     "--decimate", "0"]) == 2
    assert "decimate" in capsys.readouterr().err


def test_numerical_failure_maps_to_exit_3(monkeypatch, capsys):
    def boom(rc, digest, args, threads):
        raise NumericalFailure("synthetic blow-up")
    monkeypatch.setitem(cli._HANDLERS, "reduce", boom)
    assert cli.main(["reduce"]) == 3
    assert "synthetic blow-up" in capsys.readouterr().err


def test_verify_all_wiring(monkeypatch, capsys, tmp_path):
    from abtrap.acceptance import CriterionResult, VerificationReport
    bad = CriterionResult(number=1, name="stub", passed=False, detail="no")
    rep = VerificationReport(results=(bad,), all_passed=False,
                             files={"summary.json": "{}\n"}, config_hash="x")
    monkeypatch.setattr(cli, "verify_all", lambda digest: rep)
    assert cli.main(["verify-all", "--out", str(tmp_path / "t")]) == 1
    assert "criterion  1 FAIL" in capsys.readouterr().out
    assert (tmp_path / "t" / "summary.json").read_text() == "{}\n"
    rep_ok = VerificationReport(results=(), all_passed=True, files={},
                                config_hash="x")
    monkeypatch.setattr(cli, "verify_all", lambda digest: rep_ok)
    assert cli.main(["verify-all"]) == 0


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        cli.main(["no-such-command"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        cli.main([])
    assert exc.value.code == 2
