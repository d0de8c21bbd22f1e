import csv
import io
import json
import subprocess
import sys

import pytest

from qjackson.cli import ConfigError, main, parse_config

FIELDS = {"check_id", "paper_anchor", "lhs", "rhs", "rel_dev", "tol", "passed", "seed",
          "params_echo", "terms", "elapsed_ms"}


def run(*args, **kw):
    return subprocess.run([sys.executable, "-m", "qjackson", *args], capture_output=True, text=True, **kw)


def test_core_suite_passes_with_json_schema():
    out = run("--suites", "core", "--trials", "3")
    assert out.returncode == 0, out.stderr
    reports = json.loads(out.stdout)
    assert len(reports) == 9
    for r in reports:
        assert set(r) == FIELDS
        assert isinstance(r["lhs"], list) and len(r["lhs"]) == 2
        assert r["passed"] is True and r["elapsed_ms"] == 0


def test_console_script_is_installed():
    out = subprocess.run(["qjackson", "--suites", "core", "--trials", "1", "--format", "text"],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert all(line.endswith("PASS") for line in out.stdout.splitlines())


def test_trials_give_one_report_per_check_and_seed():
    out = run("--suites", "mg", "--n", "1", "--trials", "5", "--seed", "7")
    assert out.returncode == 0, out.stderr
    reports = json.loads(out.stdout)
    by_id = {}
    for r in reports:
        by_id.setdefault(r["check_id"], []).append(r["seed"])
    assert all(seeds == [7, 8, 9, 10, 11] for seeds in by_id.values())
    assert "mg.theorem31.n1" in by_id


def test_csv_format():
    out = run("--suites", "core", "--trials", "2", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out.stdout)))
    assert len(rows) == 6 and set(rows[0]) == FIELDS


def test_report_file(tmp_path):
    path = tmp_path / "r.json"
    assert run("--suites", "core", "--trials", "1", "--report", str(path)).returncode == 0
    assert len(json.loads(path.read_text())) == 3


def test_unknown_flag_exits_2():
    assert run("--bogus").returncode == 2


@pytest.mark.parametrize("args", [["--suites", "nope"], ["--q", "1.5"], ["--format", "xml"],
                                  ["--trials", "0"], ["--n", "x"]])
def test_bad_values_exit_2(args):
    assert main(args) == 2


def test_unknown_config_key_exits_2(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("seed = 1\ncolour = blue\n")
    assert run("--config", str(cfg)).returncode == 2


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\nsuites = mg\nseed = 4\ntrials = 2\n")
    conf = parse_config(["--config", str(cfg), "--seed", "9"])
    assert conf.suites == ("mg",) and conf.seed == 9 and conf.trials == 2


def test_missing_config_file():
    with pytest.raises(ConfigError):
        parse_config(["--config", "/nonexistent/cfg"])


def test_small_fixed_cutoff_exits_3():
    out = run("--suites", "mg", "--n", "1", "--trials", "1", "--cutoff", "4")
    assert out.returncode == 3
    assert "not converged" in out.stderr.lower()


def test_tolerance_below_product_precision_is_a_config_error():
    out = run("--suites", "mg", "--n", "1", "--trials", "1", "--tol", "1e-17")
    assert out.returncode == 2


def test_failing_check_exits_1(monkeypatch, capsys):
    from qjackson import verify

    definition = verify.REGISTRY["core.qbinomial"]
    broken = lambda n, seed, ctx, workers: verify._Result(1.0, 2.0, 1e-12, {}, 1)
    monkeypatch.setitem(verify.REGISTRY, "core.qbinomial", definition.__class__(
        definition.check_id, definition.anchor, definition.suite, broken, definition.dims))
    assert main(["--suites", "core", "--trials", "1", "--format", "text"]) == 1
    assert "core.qbinomial.n1 5.000e-01 FAIL" in capsys.readouterr().out
