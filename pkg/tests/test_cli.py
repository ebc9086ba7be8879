import json

import pytest

from gaplab.cli import main

CYCLE = {"block_sizes": [1, 1, 1], "P": [[0, 0, 0.5], [0.5, 0, 0], [0, 0.5, 0]], "epsilon": [1, 1, 1]}


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_uncoupled(tmp_path, capsys):
    f = write(tmp_path, "g.json", {"block_sizes": [1, 2], "P": [[0] * 3] * 3, "epsilon": [1, 2, 3]})
    code, out, _ = run(["solve", f], capsys)
    assert code == 0
    assert json.loads(out)["equilibrium"] == [1.0, 2.0, 3.0]


def test_solve_cycle(tmp_path, capsys):
    code, out, _ = run(["solve", write(tmp_path, "g.json", CYCLE)], capsys)
    res = json.loads(out)
    assert code == 0
    assert res["equilibrium"] == pytest.approx([2.0] * 3, abs=1e-14)
    assert res["validation"]["sigma_min"] == pytest.approx(0.5, abs=1e-12)


def test_solve_non_monotone_exit_1(tmp_path, capsys):
    g = dict(CYCLE, P=[[0, 0, 1.2], [1.2, 0, 0], [0, 0.9, 0]])
    code, _, _ = run(["solve", write(tmp_path, "g.json", g)], capsys)
    assert code == 1


def test_malformed_json_exit_2(tmp_path, capsys):
    code, _, err = run(["solve", write(tmp_path, "g.json", '{"P": [1, 2,\n')], capsys)
    assert code == 2
    assert "line" in err


def test_schema_error_exit_2(tmp_path, capsys):
    code, _, err = run(["solve", write(tmp_path, "g.json", {"block_sizes": [1]})], capsys)
    assert code == 2 and "$.P" in err


def test_singular_exit_1(tmp_path, capsys):
    g = {"block_sizes": [1, 1], "P": [[0, 1], [1, 0]], "epsilon": [1, 1]}
    code, _, _ = run(["solve", write(tmp_path, "g.json", g)], capsys)
    assert code == 1


def test_gap_homogeneous(tmp_path, capsys):
    f = write(tmp_path, "p.json", {"base": CYCLE})
    code, out, _ = run(["gap", f, "--closed-form", "--bound", "--format", "json"], capsys)
    assert code == 0
    assert all(r["gap_direct"] == 0.0 and r["bound"] == 0.0 for r in json.loads(out))


def test_gap_general_profile_direct_only(tmp_path, capsys):
    prof = {"base": CYCLE, "conjectures": [{"player": 1, "P": [[0, 0, 0.4], [0.5, 0, 0], [0, 0.5, 0]]}]}
    f = write(tmp_path, "p.json", prof)
    code, out, _ = run(["gap", f], capsys)
    assert code == 0 and "general" in out
    code, _, err = run(["gap", f, "--closed-form"], capsys)
    assert code == 2 and "direct only" in err


def test_gap_table_and_csv(tmp_path, capsys):
    prof = {"base": CYCLE, "conjectures": [{"player": k, "epsilon": [1, 1, 1][:k] + [0.9] + [1, 1, 1][k + 1:]} for k in range(3)]}
    f = write(tmp_path, "p.json", prof)
    code, out, _ = run(["gap", f, "--closed-form", "--per-pair"], capsys)
    assert code == 0 and "0.0808163" in out and "j=2" in out
    code, out, _ = run(["gap", f, "--format", "csv"], capsys)
    assert out.startswith("instance_id,player,gap_direct")


def test_centrality(tmp_path, capsys):
    f = write(tmp_path, "g.json", CYCLE)
    code, out, _ = run(["centrality", f], capsys)
    assert code == 0
    assert [c["bonacich"][0] for c in json.loads(out)] == pytest.approx([2.0] * 3, abs=1e-14)
    code, out, _ = run(["centrality", f, "--kind", "shock", "--i", "0", "--j", "2"], capsys)
    assert code == 0 and json.loads(out)["kind"] == "shock"


def test_centrality_missing_pair_exit_2(tmp_path, capsys):
    f = write(tmp_path, "g.json", CYCLE)
    with pytest.raises(SystemExit) as exc:
        main(["centrality", f, "--kind", "shock"])
    assert exc.value.code == 2


def test_construct_and_replay(tmp_path, capsys):
    cert = str(tmp_path / "c.json")
    prof = str(tmp_path / "p.json")
    code, out, _ = run(
        ["construct", "shock", "--delta", "0.1", "--M", "1000", "--certificate-out", cert, "--profile-out", prof],
        capsys,
    )
    assert code == 0 and json.loads(out)["passed"]
    code, out, _ = run(["replay", cert], capsys)
    assert code == 0 and json.loads(out)["passed"]
    code, out, _ = run(["gap", prof, "--format", "json"], capsys)
    assert all(r["gap_direct"] > 1000 for r in json.loads(out))


def test_construct_diagnostic_exit_1(capsys):
    code, out, _ = run(["construct", "shock", "--delta", "0.2", "--M", "1000", "--gamma", "0.5", "--beta", "0.9"], capsys)
    assert code == 1
    assert json.loads(out)["gap_closed_form"] == pytest.approx(0.0808163265306, rel=1e-11)


def test_construct_graph(capsys):
    code, out, _ = run(["construct", "graph", "--delta", "0.5", "--M", "1000"], capsys)
    assert code == 0 and min(json.loads(out)["gap_direct"]) > 1000


def test_mc_zero_misalignment(tmp_path, capsys):
    out = tmp_path / "t.csv"
    code, _, _ = run(["mc", "--n", "3", "--trials", "20", "--delta-s", "0", "-o", str(out)], capsys)
    assert code == 0
    rows = out.read_bytes().decode().split("\r\n")[1:-1]
    assert len(rows) == 60 and all(float(r.split(",")[5]) == 0.0 for r in rows)


def test_mc_reproducible(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["mc", "--mode", "both", "--n", "4", "--trials", "50", "--delta-s", "0.3", "--delta-g", "0.2", "--seed", "7"]
    assert main(args + ["--threads", "1", "-o", str(a)]) == 0
    assert main(args + ["--threads", "8", "-o", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_mc_config_precedence(tmp_path, capsys):
    cfg = write(tmp_path, "cfg.json", {"n": 2, "trials": 3, "seed": 1, "block_sizes": [1, 1]})
    out = tmp_path / "t.csv"
    s = tmp_path / "s.csv"
    code, _, _ = run(["mc", "--config", cfg, "--n", "4", "--delta-s", "0.5", "-o", str(out), "--summary", str(s)], capsys)
    assert code == 0
    assert len(out.read_bytes().decode().split("\r\n")) == 1 + 12 + 1
    assert s.read_bytes().decode().startswith("delta_s,delta_g,count")


def test_mc_bad_config_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, "cfg.json", {"bogus": 1})
    code, _, _ = run(["mc", "--config", cfg], capsys)
    assert code == 2


def test_demo(capsys):
    code, out, _ = run(["demo"], capsys)
    res = json.loads(out)
    assert code == 0 and res["most_central_node"] != res["worst_node"]
