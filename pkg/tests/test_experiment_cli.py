import csv
import json

import numpy as np
import pytest

from pacinv.cli import main
from pacinv.constructions import REGISTRY, generate, theorem_4_2
from pacinv.experiment import CSV_HEADER, monte_carlo, plot_data, run_config, write_csv
from pacinv.learners import LearnerSpec

CONFIG = {
    "construction": {"name": "theorem_4_2", "params": {"d": 3, "eps": 1 / 64}},
    "learners": [{"kind": "DA", "tie_rule": "uniform_random"}, {"kind": "OIG_INVARIANT"}],
    "m_grid": [2, 4],
    "eps": 1 / 64,
    "trials": 12,
    "seed": 5,
    "delta": 0.5,
}


def test_monte_carlo_is_seeded_and_thread_independent():
    c = theorem_4_2(3, 1 / 64)
    spec = LearnerSpec("DA", {"tie_rule": "uniform_random"})
    a = monte_carlo(c, spec, 3, 20, seed=9)
    b = monte_carlo(c, spec, 3, 20, seed=9, threads=4)
    assert a.errors == b.errors and a.mean_err == b.mean_err
    assert monte_carlo(c, spec, 3, 20, seed=10).errors != a.errors


def test_csv_reproducible(tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_csv(run_config(CONFIG), p1)
    write_csv(run_config(CONFIG, threads=3), p2)
    assert p1.read_text() == p2.read_text()
    rows = list(csv.reader(p1.open()))
    assert rows[0] == CSV_HEADER
    assert len(rows) == 1 + 4
    side = json.loads((tmp_path / "a.csv.json").read_text())
    assert side["meta"]["smallest_m"]["OIG_INVARIANT"] == 2


def test_plot_data_triples():
    res = run_config(CONFIG, trials=4)
    pd = plot_data(res)
    assert set(pd) == {"DA[uniform_random]", "OIG_INVARIANT"}
    assert [m for m, _, _ in pd["OIG_INVARIANT"]] == [2, 4]


def test_registry_generates_with_verification():
    for name, params in [("example_2_2", {}), ("example_3_2", {"d": 2}), ("example_3_4", {}),
                         ("theorem_4_2", {"d": 2, "eps": 0.05}), ("example_5_3", {"d": 1}),
                         ("agnostic_set_shatter", {"d": 2})]:
        assert name in REGISTRY
        c = generate(name, params, verify=True)
        t = c.sample_target(np.random.default_rng(0))
        assert abs(t.D.ps.sum() - 1) < 1e-12


# CLI ------------------------------------------------------------------------------

@pytest.fixture
def problem_file(tmp_path):
    path = tmp_path / "problem.json"
    assert main(["generate", "example_5_3", "--param", "d=1", "--with-target", "--out", str(path)]) == 0
    return path


def test_cli_dims(problem_file, capsys):
    assert main(["dims", "--problem", str(problem_file)]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out == {"vcdim": 1, "vc_o": 0, "vc_ao": 1, "dim_hg": 2}


def test_cli_dims_flags_lower_bound(problem_file, capsys):
    main(["dims", "--problem", str(problem_file), "--measure", "dim_hg", "--kmax", "1"])
    out = json.loads(capsys.readouterr().out)
    assert out == {"dim_hg": 1, "dim_hg_lower_bound_only": True}


def test_cli_graph_and_mu(problem_file, capsys):
    main(["graph", "--problem", str(problem_file), "--class", "raw"])
    g = json.loads(capsys.readouterr().out)
    assert len(g["winners"]) == len(g["edges"]) and g["bound"] <= g["vcdim"]
    main(["mu", "--problem", str(problem_file), "--orbits", "0,1"])
    mu = json.loads(capsys.readouterr().out)
    assert mu["mu"] == pytest.approx(1.0) and mu["duality_gap"] <= 1e-6
    assert abs(sum(a["p"] for a in mu["witness_P"]) - 1) < 1e-9


def test_cli_learn(problem_file, tmp_path, capsys):
    sample = tmp_path / "s.json"
    sample.write_text(json.dumps({"pairs": [{"x": "(+1,e1)", "y": 1}, ["(-1,e2)", 0]]}))
    assert main(["learn", "--problem", str(problem_file), "--sample", str(sample),
                 "--learner", "ERM_INV"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["predictor"][out["instances"].index("(+1,e1)")] == 1
    assert out["meta"]["sample_size"] == 2


def test_cli_experiment(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps(CONFIG))
    out, plot = tmp_path / "r.csv", tmp_path / "plot.json"
    assert main(["experiment", "--config", str(cfg), "--out", str(out), "--seed", "1",
                 "--trials", "3", "--threads", "2", "--emit-plotdata", str(plot)]) == 0
    assert out.read_text().splitlines()[0] == ",".join(CSV_HEADER)
    assert "OIG_INVARIANT" in json.loads(plot.read_text())


def test_cli_reports_package_errors(tmp_path, capsys):
    path = tmp_path / "p.json"
    path.write_text(json.dumps({"instances": [0, 1], "group_generators": [[1, 0]], "hypotheses": [[0, 1]]}))
    sample = tmp_path / "s.json"
    sample.write_text(json.dumps([[0, 0], [1, 1]]))
    assert main(["learn", "--problem", str(path), "--sample", str(sample), "--learner", "ERM_INV"]) == 2
    assert "OrbitLabelConflict" in capsys.readouterr().err
