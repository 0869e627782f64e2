import json

import pytest

from nbwalk.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bowtie_window_two_all_pass(capsys):
    code, out, _ = run(capsys, "identities", "--generator", "bowtie", "--k", "2", "--mode", "edge")
    reports = json.loads(out)["reports"]
    assert code == 0 and reports
    assert all(r["status"] == "pass" for r in reports)
    assert all(r["wall_time"] is None for r in reports)


def test_triangle_auxiliary_request_fails_with_diagnostic(capsys):
    code, out, _ = run(capsys, "aux", "--generator", "cycle", "--param", "n=3")
    data = json.loads(out)
    assert code == 1 and data["status"] == "fail"
    assert "backtrack floor is 0" in data["diagnostic"]


def test_vertex_mode_reports_a_witness(capsys):
    code, out, _ = run(capsys, "identities", "--generator", "bowtie", "--k", "2", "--mode", "vertex")
    rep, = json.loads(out)["reports"]
    assert code == 1 and rep["status"] == "fail" and rep["counterexamples"]


def test_pbrw_auxiliary_kernel_is_written(capsys):
    code, out, _ = run(capsys, "aux", "--generator", "complete", "--param", "n=4", "--p", "1/2")
    assert code == 0 and out.startswith("# nbwalk-kernel")


def test_configuration_errors_exit_two(capsys, tmp_path):
    assert run(capsys, "identities", "--generator", "nosuch")[0] == 2
    assert run(capsys, "report")[0] == 2
    bad = tmp_path / "c.json"
    bad.write_text('{\n "graph": {"generator": "bowtie"},\n "walk": {"kind": "lazy"}\n}')
    code, _, err = run(capsys, "identities", "--config", str(bad))
    assert code == 2 and "walk.kind" in err
    with pytest.raises(SystemExit) as exc:
        main(["identities", "--mode", "face"])
    assert exc.value.code == 2


def test_resource_cap_exits_three(capsys):
    code, _, err = run(capsys, "identities", "--generator", "complete", "--param", "n=5", "--k", "3",
                       "--cap-states", "10")
    assert code == 3 and "cap" in err


def test_orientation_infeasible_certificate(capsys):
    code, out, err = run(capsys, "orient", "--generator", "path", "--param", "n=3")
    assert code == 1 and json.loads(err)["certificate"]["reason"] == "vertex of degree < 2"
    code, out, _ = run(capsys, "orient", "--generator", "cycle", "--param", "n=5")
    assert code == 0 and len(out.splitlines()) == 5


def test_conditions_exit_code(capsys):
    code, out, _ = run(capsys, "conditions", "--generator", "cycle", "--param", "n=6", "--which", "2", "--R", "3")
    assert json.loads(out)["conditions"][0]["condition"] == "2"
    assert code == (0 if json.loads(out)["conditions"][0]["holds"] else 1)


def test_report_merges_without_collisions(capsys, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    for d in (a, b):
        (d / "suite.json").write_text(json.dumps({"x": 1}))
    csv = tmp_path / "m.csv"
    code, out, _ = run(capsys, "report", str(a / "suite.json"), str(b / "suite.json"), "--csv", str(csv))
    merged = json.loads(out)["reports"]
    assert code == 0 and len(merged) == 2
    assert csv.read_text().splitlines() == ["key,value", "suite.x,1", "suite#2.x,1"]


def test_report_rejects_bad_json(capsys, tmp_path):
    f = tmp_path / "r.json"
    f.write_text("{\n\n oops")
    code, _, err = run(capsys, "report", str(f))
    assert code == 2 and "line 3" in err


@pytest.mark.parametrize("argv", [
    ["walk", "--sizes", "5,7", "--trials", "200", "--seed", "4"],
    ["cover", "--generator", "complete", "--param", "n=4", "--regenerations", "300", "--seed", "4"],
    ["capacity", "--sizes", "5,7", "--walks", "srw,W"],
    ["identities", "--generator", "complete", "--param", "n=4", "--k", "2"],
    ["abelian", "--factors", "5,5", "--k", "1"],
], ids=lambda a: a[0])
def test_reruns_are_byte_identical(tmp_path, capsys, argv):
    outs = []
    for i in range(2):
        path = tmp_path / f"out{i}"
        assert main(argv + ["--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_different_seeds_differ(tmp_path):
    res = []
    for seed in ("1", "2"):
        path = tmp_path / seed
        main(["walk", "--sizes", "7", "--trials", "200", "--seed", seed, "--out", str(path)])
        res.append(path.read_text())
    assert res[0] != res[1]
