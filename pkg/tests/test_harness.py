"""Configuration validation, suite behaviour, and the command line."""

import dataclasses
import json

import pytest

from lawsonkit import cli, suite
from lawsonkit.suite import ConfigError, RunConfig, run_suite


CFG = RunConfig(m=3, k=2, level=2)


@pytest.mark.parametrize("kw", [
    {"k": 1}, {"m": 2}, {"m": 0, "k": 0}, {"level": 1},
    {"seed": -1}, {"tol_grad": 0.0}, {"tol_sym": 2.0},
])
def test_config_rejected(kw):
    with pytest.raises(ConfigError):
        dataclasses.replace(CFG, **kw).validate()


def test_config_accepted():
    assert CFG.validate() is CFG
    doc = CFG.to_json_dict()
    assert doc["m"] == 3 and doc["level"] == 2


def test_registry_shape():
    names = [name for name, _, _ in suite.REGISTRY]
    assert len(names) == len(set(names))
    groups = [group for _, group, _ in suite.REGISTRY]
    assert set(groups) <= set(suite.GROUPS)
    # dependency order: group blocks appear in GROUPS order, unfragmented
    order = [suite.GROUPS.index(g) for g in groups]
    assert order == sorted(order)


def test_full_run_passes():
    rep = run_suite(CFG)
    assert rep.ok
    for r in rep.results:
        assert r.status in ("pass", "skip")
        if r.status == "skip":
            assert isinstance(r.reason, str) and r.reason
    skipped = {r.name for r in rep.results if r.status == "skip"}
    assert skipped == {"parameter-exchange"}   # needs m = k
    counts = rep.counts()
    assert counts["pass"] == len(suite.REGISTRY) - 1
    assert counts == {"pass": 26, "fail": 0, "skip": 1}


def test_group_filter():
    rep = run_suite(CFG, only="lattice")
    assert [r.group for r in rep.results] == ["lattice"] * 3
    assert rep.ok


def test_name_filter():
    rep = run_suite(CFG, only="cell-metrics")
    assert len(rep.results) == 1
    assert rep.results[0].name == "cell-metrics"
    assert rep.results[0].status == "pass"


def test_unknown_filter():
    with pytest.raises(ConfigError):
        run_suite(CFG, only="no-such-check")


def test_upstream_error_recorded(monkeypatch):
    def boom(ctx):
        raise RuntimeError("boom")

    name, group, _ = suite.REGISTRY[0]
    monkeypatch.setitem(suite.REGISTRY, 0, (name, group, boom))
    rep = run_suite(CFG, only="geometry")
    assert not rep.ok
    assert rep.results[0].status == "fail"
    assert "RuntimeError" in rep.results[0].witness
    # the breakage does not stop the rest of the group
    assert [r.status for r in rep.results[1:]] == ["pass"] * 3


def test_report_json_deterministic():
    a = json.dumps(run_suite(CFG, only="geometry").to_json_dict())
    b = json.dumps(run_suite(CFG, only="geometry").to_json_dict())
    assert a == b


def test_report_json_shape():
    doc = run_suite(CFG, only="lattice").to_json_dict()
    assert set(doc) == {"config", "counts", "ok", "results"}
    assert doc["ok"] is True
    assert json.dumps(doc)


# command line


def run_cli(*argv):
    return cli.main(list(argv))


def test_cli_usage_errors(tmp_path):
    assert run_cli("tessellate", "--bogus") == 2
    assert run_cli("no-such-command") == 2
    assert run_cli("tessellate", "--m", "3", "--k", "1",
                   "--out", str(tmp_path)) == 2
    assert run_cli("verify", "--suite", "no-such-suite",
                   "--out", str(tmp_path)) == 2


def test_cli_tessellate(tmp_path, capsys):
    assert run_cli("tessellate", "--out", str(tmp_path)) == 0
    out = capsys.readouterr().out
    assert "24 integer cells" in out
    doc = json.load(open(tmp_path / "lattice_m3k2.json"))
    assert doc["m"] == 3 and doc["k"] == 2


def test_cli_groups(tmp_path, capsys):
    assert run_cli("groups", "--m", "4", "--out", str(tmp_path)) == 0
    out = capsys.readouterr().out
    assert "full" in out
    doc = json.load(open(tmp_path / "groups_m4k2.json"))
    assert doc["orders"]["full"] == 64


def test_cli_verify_geometry(tmp_path, capsys):
    code = run_cli("verify", "--level", "2", "--suite", "geometry",
                   "--out", str(tmp_path))
    assert code == 0
    assert "ok" in capsys.readouterr().out
    doc = json.load(open(tmp_path / "verify_m3k2_l2.json"))
    assert doc["ok"] is True
    assert all(r["status"] == "pass" for r in doc["results"])


def test_cli_verify_failure_exit(tmp_path, monkeypatch):
    def boom(ctx):
        raise suite.CheckFailed(1.0, "forced failure")

    name, group, _ = suite.REGISTRY[0]
    monkeypatch.setitem(suite.REGISTRY, 0, (name, group, boom))
    code = run_cli("verify", "--level", "2", "--suite", name,
                   "--out", str(tmp_path))
    assert code == 1


def test_cli_report(tmp_path, capsys):
    code = run_cli("report", "--level", "2", "--suite", "lattice",
                   "--out", str(tmp_path))
    assert code == 0
    out = capsys.readouterr().out
    assert "3 passed, 0 failed, 0 skipped" in out
    assert "m=3 k=2" in out


def test_cli_config_file(tmp_path, capsys):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("# comment\nm = 5\ntol-grad = 1e-8\nlevel=2\n")
    # flags win over the file; the file wins over defaults
    code = run_cli("tessellate", "--config", str(cfgfile), "--m", "3",
                   "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "lattice_m3k2.json").exists()
    capsys.readouterr()


def test_cli_bad_config_file(tmp_path, capsys):
    cfgfile = tmp_path / "bad.cfg"
    cfgfile.write_text("wibble = 3\n")
    assert run_cli("tessellate", "--config", str(cfgfile),
                   "--out", str(tmp_path)) == 2
    assert "wibble" in capsys.readouterr().err


def test_cli_export_json(tmp_path, capsys):
    code = run_cli("export", "--level", "2", "--format", "json",
                   "--out", str(tmp_path))
    assert code == 0
    doc = json.load(open(tmp_path / "surface_m3k2_l2.mesh.json"))
    assert doc["n_copies"] == 12
    assert len(doc["vertices"]) == doc["n_verts"]
