"""Subcommands are thin adapters: output equals the direct library call."""
import json

import numpy as np
import pytest

from orbitmatch import diagnostics, experiment, orbitdist, renyi, systems
from orbitmatch.cli import dispatch

T2, T3 = systems.parse_system("doubling"), systems.parse_system("tripling")
ID = systems.parse_observation("identity")


def run(capsys, argv):
    code = dispatch(argv)
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    lines = text.strip("\n").split("\n")
    return lines[0], [line.split(",") for line in lines[1:]]


def test_distance_example(capsys):
    code, out, _ = run(capsys, ["distance", "--system-t", "doubling", "--system-s",
                                "tripling", "--obs", "identity", "--x", "0.1",
                                "--y", "0.25", "-n", "3"])
    assert code == 0
    header, body = rows(out)
    assert header == "n,prefix_min,exponent,floor_applied"
    assert body[-1][:2] == ["3", "0.15"]
    assert "\r" not in out


def test_help_and_unknown(capsys):
    code, out, _ = run(capsys, ["--help"])
    assert code == 0 and "usage" in out
    for sub in ("simulate", "distance", "renyi", "diagnose", "experiment"):
        code, out, _ = run(capsys, [sub, "--help"])
        assert code == 0 and "usage" in out
    code, _, err = run(capsys, ["nonsense"])
    assert code == 2 and "invalid choice" in err
    code, _, err = run(capsys, ["distance", "--system-t", "doubling"])
    assert code == 2


def test_distance_matches_library(capsys):
    code, out, _ = run(capsys, ["distance", "--system-t", "doubling", "--system-s",
                                "tripling", "--seed", "4", "-n", "50000"])
    x = systems.stationary_start(T2, 4, 0)
    y = systems.stationary_start(T3, 4, 1)
    curve = orbitdist.shortest_distance_curve(T2, T3, ID, x, y, 50000)
    expo = orbitdist.exponent_curve(curve)
    _, body = rows(out)
    assert [int(r[0]) for r in body] == curve.checkpoints.tolist()
    assert [float(r[1]) for r in body] == curve.prefix_min.tolist()
    assert [float(r[2]) for r in body] == expo.exponent.tolist()


def test_simulate_matches_library(capsys):
    code, out, _ = run(capsys, ["simulate", "--system", "tripling", "--seed", "2",
                                "--stream", "5", "-n", "40"])
    want = systems.DigitStream(3, seed=2, stream=5).states(40)
    header, body = rows(out)
    assert header == "i,x"
    assert [float(r[1]) for r in body] == want.tolist()
    code, out, _ = run(capsys, ["simulate", "--system", "doubling", "--x", "0.1", "-n", "5"])
    assert [float(r[1]) for r in rows(out)[1]] == [0.1, 0.2, 0.4, 0.8, 0.6]


def test_renyi_matches_library(capsys, tmp_path):
    fit_path = tmp_path / "fit.json"
    code, out, _ = run(capsys, ["renyi", "--samples-mu", "5000", "--samples-eta",
                                "5000", "--r-max", "0.25", "--k", "6", "--seed",
                                "7", "--fit", str(fit_path)])
    assert code == 0
    U = systems.sample_invariant(T2, 7, 5000, stream=0)
    V = systems.sample_invariant(T3, 7, 5000, stream=1)
    est = renyi.cross_correlation_curve(U, V, renyi.RadiiSchedule(0.25, 6))
    header, body = rows(out)
    assert header == "r,count,value"
    assert [int(r[1]) for r in body] == est.pair_counts.tolist()
    fit = json.loads(fit_path.read_text())
    assert fit["slope"] == renyi.fit_divergence(est).slope
    assert {"slope", "intercept", "r_squared", "window"} <= set(fit)


def test_renyi_from_files(capsys, tmp_path):
    rng = np.random.default_rng(1)
    U, V = rng.random(800), rng.random(700)
    np.savetxt(tmp_path / "u.csv", U)
    np.savetxt(tmp_path / "v.csv", V)
    code, out, err = run(capsys, ["renyi", "--samples-mu", str(tmp_path / "u.csv"),
                                  "--samples-eta", str(tmp_path / "v.csv"),
                                  "--k", "4"])
    assert code == 0
    assert int(rows(out)[1][0][1]) == renyi.accelerated_count(
        np.loadtxt(tmp_path / "u.csv"), np.loadtxt(tmp_path / "v.csv"), 0.25)
    assert "slope" in json.loads(err)


def test_renyi_insufficient_scales_exit_1(capsys):
    code, out, err = run(capsys, ["renyi", "--samples-mu", "10", "--samples-eta",
                                  "10", "--r-max", "0.0001", "--k", "3"])
    assert code == 1
    assert "insufficient resolved scales" in err
    assert out.startswith("r,count,value\n")


def test_diagnose_h1_matches_library(capsys):
    code, out, err = run(capsys, ["diagnose", "h1", "--system", "tripling",
                                  "--lags", "1:4", "-M", "20000", "--seed", "3"])
    psi = systems.parse_observation("dist:0")
    fit = diagnostics.correlation_decay(T3, psi, psi, [1, 2, 3, 4], 20000, 3)
    header, body = rows(out)
    assert header == "lag,cov"
    assert [float(r[1]) for r in body] == fit.covariances.tolist()
    assert json.loads(err)["indistinguishable_from_zero"] == fit.indistinguishable_from_zero


def test_diagnose_h2(capsys):
    code, out, _ = run(capsys, ["diagnose", "h2", "-M", "5000", "--centers", "100"])
    assert code == 0
    header, body = rows(out)
    assert header == "r,rho,mass,bound,ratio" and len(body) == 9
    code, _, err = run(capsys, ["diagnose", "h2", "--r-grid", "0.01", "--rho-grid", "0.02"])
    assert code == 2


def test_experiment_matches_library(capsys, tmp_path):
    cfg = {"system_t": "doubling", "system_s": "tripling", "observation": "identity",
           "rds": False, "pairs": 8, "n_max": 5000, "checkpoint_base": 10,
           "checkpoint_ratio": 1.5, "seed": 1, "reference_c": 1.0,
           "out_csv": str(tmp_path / "o.csv"), "out_json": str(tmp_path / "o.json")}
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    plot = tmp_path / "p.svg"
    code, _, _ = run(capsys, ["experiment", str(path), "--workers", "2",
                              "--plot", str(plot)])
    assert code == 0
    rep = experiment.run_experiment(experiment.ExperimentConfig.from_dict(cfg))
    assert (tmp_path / "o.csv").read_text() == rep.to_csv()
    assert (tmp_path / "o.json").read_text() == rep.to_json()
    assert "<polyline" in plot.read_text()


@pytest.mark.parametrize("content", ['{"pairs": 0}', "not json", '{"rds": 3}',
                                     '{"system_t": "pentagon", "pairs": 1, "n_max": 10}'])
def test_experiment_config_errors_exit_2(capsys, tmp_path, content):
    path = tmp_path / "bad.json"
    path.write_text(content)
    code, _, err = run(capsys, ["experiment", str(path)])
    assert code == 2 and err


def test_plot_too_short_exit_1(capsys, tmp_path):
    code, _, err = run(capsys, ["distance", "--system-t", "doubling", "--system-s",
                                "tripling", "--x", "0.1", "--y", "0.25", "-n", "3",
                                "--checkpoints", "3", "--plot", str(tmp_path / "a.svg")])
    assert code == 1 and "two" in err


def test_domain_error_exit_2(capsys):
    code, _, _ = run(capsys, ["distance", "--system-t", "doubling", "--system-s",
                              "tripling", "--x", "1.5", "--y", "0.25", "-n", "3"])
    assert code == 2
