"""Command line behavior, driven in process through the entry point."""

import filecmp
import json
import subprocess
import sys

import pytest

from kampen.aperiodic import generate_W
from kampen.cli import main
from kampen.encoder import build_Z
from kampen.turing import TMachine, normalize
from kampen.smachine import SMachine
from kampen.fixtures import copy_erase_mirror
from kampen.words import Alphabet


def run(capsys, *argv):
    rc = main(list(argv))
    out = capsys.readouterr()
    return rc, out.out, out.err


@pytest.fixture()
def z_path(tmp_path):
    ap = Alphabet(("x'", "y'"), tag="zp")
    app = Alphabet(("x''", "y''"), tag="zpp")
    m = build_Z("both", ap, app)
    p = tmp_path / "z.json"
    p.write_text(json.dumps(m.to_dict()))
    return str(p)


def test_words_gen_w(capsys):
    rc, out, _ = run(capsys, "words", "gen-W", "--count", "3")
    assert rc == 0
    assert out.splitlines() == [str(w) for w in generate_W(3)]


def test_words_check_a(capsys):
    rc, out, _ = run(capsys, "words", "check-A", "a.b", "b.a")
    assert (rc, out.strip()) == (0, "pass")
    rc, out, _ = run(capsys, "words", "check-A", "a.a.b", "a.b.b")
    assert (rc, out.strip()) == (1, "fail")


def test_words_f_roundtrip(capsys):
    rc, out, _ = run(capsys, "words", "f-encode", "--tape", "1", "a.b")
    assert rc == 0
    image = out.strip()
    rc, out, _ = run(capsys, "words", "f-decode", "--tape", "1", image)
    assert rc == 0
    assert out.strip() == "a.b"
    rc, out, _ = run(capsys, "words", "f-decode", "--tape", "1", "a'(1)")
    assert rc == 1
    assert "not an f-image" in out


def test_tm_run_and_search(capsys):
    rc, out, _ = run(capsys, "tm", "run", "ba")
    assert rc == 0
    assert "outcome: accepted" in out
    rc, out, _ = run(capsys, "tm", "run", "ab")
    assert rc == 1
    rc, out, _ = run(capsys, "tm", "search-accept", "", "--depth", "30")
    assert rc == 0


def test_tm_normalize_out(tmp_path, capsys):
    dst = tmp_path / "m0.json"
    rc, out, _ = run(capsys, "tm", "normalize", "--out", str(dst))
    assert rc == 0
    m0 = TMachine.from_dict(json.loads(dst.read_text()))
    want = normalize(copy_erase_mirror())
    assert len(m0.commands) == len(want.commands)
    assert f"commands: {len(want.commands)}" in out


def test_env_var_overrides_search_depth(monkeypatch, capsys):
    monkeypatch.setenv("KAMPEN_SEARCH_DEPTH", "1")
    rc, _, _ = run(capsys, "tm", "search-accept", "ba")
    assert rc == 1  # the fixture needs four steps
    # an explicit flag beats the environment
    rc, _, _ = run(capsys, "tm", "search-accept", "ba", "--depth", "30")
    assert rc == 0


def test_sm_validate(capsys):
    rc, out, _ = run(capsys, "sm", "validate", "--machine", "m1")
    assert rc == 0
    assert "rules: 1198" in out
    assert "parts: 9" in out


def test_sm_apply_and_errors(z_path, capsys):
    rc, out, _ = run(capsys, "sm", "apply", "--machine", z_path,
                     "L.x'.y'.p(1).R", "xi1(b)")
    assert rc == 0
    assert out.strip() == "L.x'.p(1).y''.R"
    rc, _, err = run(capsys, "sm", "apply", "--machine", z_path,
                     "L.x'.y'.p(1).R", "xi2")
    assert rc == 1
    assert "not applicable" in err
    rc, _, err = run(capsys, "sm", "apply", "--machine", z_path,
                     "L.x'.y'.p(1).R", "nosuch")
    assert rc == 1


def test_sm_run_and_search(z_path, capsys):
    names = ["xi1(b)", "xi1(a)", "xi2", "xi3(a)", "xi3(b)", "xi4"]
    rc, out, _ = run(capsys, "sm", "run", "--machine", z_path,
                     "L.x'.y'.p(1).R", *names)
    assert rc == 0
    assert out.strip() == "L.x'.y'.p(3).R"
    rc, out, _ = run(capsys, "sm", "search", "--machine", z_path,
                     "L.x'.y'.p(1).R", "L.x'.y'.p(3).R", "--depth", "6")
    assert rc == 0
    assert out.splitlines()[1:] == names
    rc, out, _ = run(capsys, "sm", "search", "--machine", z_path,
                     "L.x'.y'.p(1).R", "L.y'.x'.p(3).R", "--depth", "4")
    assert rc == 1


def test_encode_machines_export(tmp_path, capsys):
    dst = tmp_path / "m1.json"
    rc, out, _ = run(capsys, "encode", "m1", "--out", str(dst))
    assert rc == 0
    m = SMachine.from_dict(json.loads(dst.read_text()))
    assert len(m.rules) == 1198
    rc, out, _ = run(capsys, "encode", "main", "--copies", "2")
    assert rc == 0
    assert "circular: True" in out


def test_encode_trace_roundtrip(tmp_path, capsys):
    tm = normalize(copy_erase_mirror())
    hist = tm.search_accept(tm.input_config(()), 30)
    src = tmp_path / "hist.json"
    src.write_text(json.dumps({"input": "", "names": hist}))
    trace = tmp_path / "trace.json"
    rc, _, _ = run(capsys, "encode", "run", "--history", str(src),
                   "--out", str(trace))
    assert rc == 0
    dec = tmp_path / "dec.json"
    rc, _, _ = run(capsys, "encode", "decode", "--trace", str(trace),
                   "--out", str(dec))
    assert rc == 0
    assert json.loads(dec.read_text())["history"] == hist


def test_encode_f_map(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"input": "ba"}))
    rc, out, _ = run(capsys, "encode", "F", "--config", str(cfg))
    assert rc == 0
    assert out.strip().startswith("q(0).")


def test_present_exports(tmp_path, capsys):
    base = tmp_path / "pres"
    rc, out, _ = run(capsys, "present", "--machine", "m1", "--out", str(base))
    assert rc == 0
    data = json.loads((tmp_path / "pres.json").read_text())
    lines = (tmp_path / "pres.txt").read_text().splitlines()
    assert len(lines) == len(data["relators"])
    assert f"distinct relators: {len(lines)}" in out


def test_diagram_main(tmp_path, capsys):
    base = tmp_path / "trap"
    rc, out, _ = run(capsys, "diagram", "", "--out", str(base))
    assert rc == 0
    assert "check: ok" in out
    assert (tmp_path / "trap.svg").read_text().startswith("<svg")
    grid = json.loads((tmp_path / "trap.json").read_text())
    assert len(grid["rows"]) == 113


def test_diagram_m1(capsys):
    rc, out, _ = run(capsys, "diagram", "", "--machine", "m1")
    assert rc == 0
    assert "rows: 112" in out


def test_verify_quick_suites(tmp_path, capsys):
    report = tmp_path / "report.json"
    rc, out, _ = run(capsys, "verify", "projection", "qqiv",
                     "--report", str(report))
    assert rc == 0
    assert out.count("PASS") == 2
    data = json.loads(report.read_text())
    assert data["passed"] is True
    assert [r["suite"] for r in data["results"]] == ["projection", "qqiv"]


def test_verify_unknown_suite(capsys):
    rc, _, err = run(capsys, "verify", "nosuch")
    assert rc == 2
    for name in ("tuda-suda", "pos", "canon"):
        assert name in err


def test_verify_json_format(tmp_path, capsys):
    rc, out, _ = run(capsys, "--format", "json", "verify", "projection",
                     "--report", str(tmp_path / "r.json"))
    assert rc == 0
    assert json.loads(out)["passed"] is True


def test_pipeline_deterministic(tmp_path, capsys):
    proj = tmp_path / "proj.json"
    proj.write_text(json.dumps({"params": {"copies": 2}}))
    rcs = []
    for name in ("run1", "run2"):
        rc, out, _ = run(capsys, "pipeline", "--project", str(proj),
                         "--out", str(tmp_path / name))
        rcs.append(rc)
        assert "emit_presentation" in out
    assert rcs == [0, 0]
    names = sorted(p.name for p in (tmp_path / "run1").iterdir())
    assert "presentation.txt" in names and "report.json" in names
    for n in names:
        assert filecmp.cmp(tmp_path / "run1" / n, tmp_path / "run2" / n,
                           shallow=False), n


def test_pipeline_missing_machine(tmp_path, capsys):
    proj = tmp_path / "proj.json"
    missing = tmp_path / "nope.json"
    proj.write_text(json.dumps({"machine": str(missing)}))
    rc, _, err = run(capsys, "pipeline", "--project", str(proj),
                     "--out", str(tmp_path / "run"))
    assert rc == 1
    assert "failed at stage" in err
    assert str(missing) in err


def test_pipeline_snapshot_mismatch(tmp_path, capsys):
    snap = tmp_path / "triples.json"
    snap.write_text(json.dumps([{"j": 0, "w": "wrong"}]))
    proj = tmp_path / "proj.json"
    proj.write_text(json.dumps({"triples": str(snap),
                                "params": {"copies": 2}}))
    rc, _, err = run(capsys, "pipeline", "--project", str(proj),
                     "--out", str(tmp_path / "run"))
    assert rc == 1
    assert "stage build_M1" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "kampen.cli", "tm", "run", "ba"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert "accepted" in proc.stdout
