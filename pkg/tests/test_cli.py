"""Batch driver: config parsing, subcommand outputs, determinism, errors."""

from __future__ import annotations

import json

import numpy as np
import pytest

from precimat.cli import (
    CvCommandConfig,
    DualcheckConfig,
    EstimateConfig,
    LdaConfig,
    NetworkConfig,
    SimulateConfig,
    main,
)
from precimat.errors import InvalidInput, UnsupportedDimension


# ---------------------------------------------------------------------------
# config objects


_SIM_DICT = {
    "networks": [1],
    "p": 4,
    "n": 20,
    "replications": 2,
    "methods": ["alt_ridge"],
    "targets": ["identity"],
    "folds": 3,
    "lambda_grid": [0.5, 1.0],
    "alpha_grid": [0.0],
    "seed": 0,
}


def test_config_roundtrips():
    cases = [
        (SimulateConfig, _SIM_DICT),
        (
            EstimateConfig,
            {"input": "x.csv", "estimator": "alt_ridge", "target": "identity", "lam": 0.5},
        ),
        (
            CvCommandConfig,
            {"input": "x.csv", "estimator": "two_step", "target": "identity"},
        ),
        (
            LdaConfig,
            {"input": "x.csv", "estimator": "alt_ridge", "target": "identity"},
        ),
        (
            NetworkConfig,
            {"input": "p.csv", "estimator": "alt_ridge", "target": "identity"},
        ),
        (DualcheckConfig, {"p": 2, "iterations": 3}),
    ]
    for cls, d in cases:
        cfg = cls.from_dict(d)
        again = cls.from_dict(cfg.to_dict())
        assert again.to_dict() == cfg.to_dict()


def test_configs_reject_unknown_keys():
    with pytest.raises(InvalidInput):
        SimulateConfig.from_dict({**_SIM_DICT, "bogus": 1})
    with pytest.raises(InvalidInput):
        DualcheckConfig.from_dict({"p": 2, "typo": True})


def test_config_required_keys_and_domains():
    with pytest.raises(InvalidInput):
        SimulateConfig.from_dict({k: v for k, v in _SIM_DICT.items() if k != "p"})
    with pytest.raises(InvalidInput):
        EstimateConfig.from_dict(
            {"input": "x.csv", "estimator": "alt_ridge", "target": "identity"}
        )  # neither lam nor cv
    with pytest.raises(InvalidInput):
        EstimateConfig.from_dict(
            {
                "input": "x.csv",
                "estimator": "alt_ridge",
                "target": "identity",
                "cv": True,
                "input_kind": "covariance",
            }
        )
    with pytest.raises(InvalidInput):
        LdaConfig.from_dict(
            {"input": "x.csv", "estimator": "alt_ridge", "target": "identity", "mode": "x"}
        )
    with pytest.raises(UnsupportedDimension):
        DualcheckConfig.from_dict({"p": 4})
    with pytest.raises(InvalidInput):
        SimulateConfig.from_dict({**_SIM_DICT, "methods": ["nonsense"]})


# ---------------------------------------------------------------------------
# helpers


def _write_config(tmp_path, name: str, d: dict) -> str:
    path = tmp_path / name
    path.write_text(json.dumps(d))
    return str(path)


def _run(args: list[str]) -> int:
    return main(args)


# ---------------------------------------------------------------------------
# simulate


def test_simulate_row_accounting(tmp_path):
    cfg = _write_config(tmp_path, "sim.json", _SIM_DICT)
    out = tmp_path / "out"
    assert _run(["simulate", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "losses.csv").read_text().strip().split("\n")
    assert lines[0].startswith("method,target,network,p,replication,kl")
    # header + 2 replications + 1 mean row
    assert len(lines) == 4
    mean = lines[3].split(",")
    assert mean[4] == "mean"
    assert all(mean[i] != "" for i in range(5, 13))  # means and SDs filled
    assert mean[13] == ""


def test_simulate_single_replication_blank_sds(tmp_path):
    cfg = _write_config(tmp_path, "sim.json", {**_SIM_DICT, "replications": 1})
    out = tmp_path / "out"
    assert _run(["simulate", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "losses.csv").read_text().strip().split("\n")
    mean = lines[2].split(",")
    assert mean[4] == "mean"
    assert all(mean[i] != "" for i in range(5, 9))
    assert all(mean[i] == "" for i in range(9, 13))


def test_simulate_deterministic_across_runs_and_threads(tmp_path):
    cfg = _write_config(tmp_path, "sim.json", _SIM_DICT)
    texts = []
    for name, threads in (("a", "1"), ("b", "1"), ("c", "2")):
        out = tmp_path / name
        code = _run(
            ["simulate", "--config", cfg, "--out", str(out), "--threads", threads]
        )
        assert code == 0
        texts.append((out / "losses.csv").read_bytes())
    assert texts[0] == texts[1]
    assert texts[0] == texts[2]


def test_simulate_generation_failure_recorded_not_fatal(tmp_path):
    cfg = _write_config(
        tmp_path,
        "sim.json",
        {**_SIM_DICT, "networks": [4], "p": 101, "replications": 1},
    )
    out = tmp_path / "out"
    assert _run(["simulate", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "losses.csv").read_text().strip().split("\n")
    detail = lines[1].split(",")
    assert "GenerationFailure" in detail[-1]
    assert lines[2].split(",")[-1] == "all replications failed"


# ---------------------------------------------------------------------------
# estimate / cv


def _write_table(tmp_path, name="x.csv", n=30, p=4, seed=0) -> str:
    rng = np.random.default_rng(seed)
    x = rng.standard_normal((n, p))
    header = ",".join(f"c{i}" for i in range(p))
    body = "\n".join(",".join(repr(float(v)) for v in row) for row in x)
    path = tmp_path / name
    path.write_text(header + "\n" + body + "\n")
    return str(path)


def test_estimate_fixed_lambda(tmp_path, capsys):
    data = _write_table(tmp_path)
    cfg = _write_config(
        tmp_path,
        "est.json",
        {"input": data, "estimator": "alt_ridge", "target": "identity", "lam": 0.5},
    )
    out = tmp_path / "out"
    assert _run(["estimate", "--config", cfg, "--out", str(out)]) == 0
    printed = capsys.readouterr().out.strip().split("\n")
    assert str(out / "theta.csv") in printed
    theta_lines = (out / "theta.csv").read_text().strip().split("\n")
    assert len(theta_lines) == 4
    edges = (out / "edges.csv").read_text().strip().split("\n")
    assert edges[0] == "source,target,weight"


def test_estimate_cv_mode(tmp_path):
    data = _write_table(tmp_path, seed=1)
    cfg = _write_config(
        tmp_path,
        "est.json",
        {
            "input": data,
            "estimator": "alt_ridge",
            "target": "identity",
            "cv": True,
            "folds": 3,
            "lambda_grid": [0.5, 1.0],
        },
    )
    assert _run(["estimate", "--config", cfg, "--out", str(tmp_path / "out")]) == 0


def test_estimate_malformed_cell_names_location(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1.0,2.0\n3.0,oops\n")
    cfg = _write_config(
        tmp_path,
        "est.json",
        {"input": str(bad), "estimator": "alt_ridge", "target": "identity", "lam": 0.5},
    )
    assert _run(["estimate", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "InputError"
    assert "row 2" in err["message"] and "column 1" in err["message"]


def test_cv_surface_and_best(tmp_path):
    data = _write_table(tmp_path, seed=2)
    cfg = _write_config(
        tmp_path,
        "cv.json",
        {
            "input": data,
            "estimator": "alt_ridge",
            "target": "identity",
            "folds": 3,
            "lambda_grid": [0.3, 0.8],
        },
    )
    out = tmp_path / "out"
    assert _run(["cv", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "surface.csv").read_text().strip().split("\n")
    assert lines[0] == "lambda,alpha,mean_score,sd_score"
    assert len(lines) == 3
    best = json.loads((out / "best.json").read_text())
    assert best["lambda"] in (0.3, 0.8)
    assert best["alpha"] is None


# ---------------------------------------------------------------------------
# lda


def _write_labeled(tmp_path, name="ion.csv", n_per=60, p=3, gap=6.0, seed=3) -> str:
    rng = np.random.default_rng(seed)
    x1 = rng.standard_normal((n_per, p)) + gap
    x2 = rng.standard_normal((n_per, p))
    rows = []
    for row in x1:
        rows.append(",".join(repr(float(v)) for v in row) + ",g")
    for row in x2:
        rows.append(",".join(repr(float(v)) for v in row) + ",b")
    header = ",".join(f"f{i}" for i in range(p)) + ",cls"
    path = tmp_path / name
    path.write_text(header + "\n" + "\n".join(rows) + "\n")
    return str(path)


_LDA_SMALL = {
    "estimator": "alt_ridge",
    "target": "identity",
    "repetitions": 2,
    "train": 12,
    "validation": 8,
    "folds": 3,
    "lambda_grid": [0.5, 1.0],
    "alpha_grid": [0.0],
}


def test_lda_rates_mode(tmp_path):
    data = _write_labeled(tmp_path)
    cfg = _write_config(tmp_path, "lda.json", {**_LDA_SMALL, "input": data})
    out = tmp_path / "out"
    assert _run(["lda", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "rates.csv").read_text().strip().split("\n")
    assert lines[0] == "repetition,rate"
    assert len(lines) == 3
    # cleanly separated classes classify perfectly
    assert lines[1] == "0,0.0"


def test_lda_sweep_mode(tmp_path):
    data = _write_labeled(tmp_path, seed=4)
    cfg = _write_config(
        tmp_path,
        "lda.json",
        {
            **_LDA_SMALL,
            "input": data,
            "mode": "sweep",
            "sweep_methods": ["alt_ridge", "archetype2"],
            "sweep_count": 3,
        },
    )
    out = tmp_path / "out"
    assert _run(["lda", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "sweep.csv").read_text().strip().split("\n")
    assert lines[0] == "method,rho,mean_rate"
    assert len(lines) == 1 + 2 * 3
    assert lines[1].split(",")[0] == "alt_ridge"
    assert lines[1].split(",")[1] == "0.1"
    assert lines[3].split(",")[1] == "0.9"


def test_lda_default_sweep_count_is_fifty():
    assert LdaConfig.from_dict(
        {"input": "x.csv", "estimator": "alt_ridge", "target": "identity"}
    ).sweep_count == 50


# ---------------------------------------------------------------------------
# network


def _write_prices(tmp_path, days, p=3, seed=5, name="prices.csv") -> str:
    rng = np.random.default_rng(seed)
    increments = rng.standard_normal((days, p))
    logp = np.cumsum(increments, axis=0)
    start = np.datetime64("2020-01-01")
    lines = ["date," + ",".join(f"t{i}" for i in range(p))]
    for d in range(days):
        date = np.datetime_as_string(start + d)
        lines.append(date + "," + ",".join(repr(float(v)) for v in np.exp(logp[d])))
    path = tmp_path / name
    path.write_text("\n".join(lines) + "\n")
    return str(path)


_NET_SMALL = {
    "estimator": "alt_ridge",
    "target": "identity",
    "folds": 3,
    "lambda_grid": [0.5, 1.0],
    "alpha_grid": [0.0],
}


def test_network_window_count(tmp_path):
    data = _write_prices(tmp_path, days=1095)
    cfg = _write_config(tmp_path, "net.json", {**_NET_SMALL, "input": data})
    out = tmp_path / "out"
    assert _run(["network", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "strength.csv").read_text().strip().split("\n")
    assert lines[0] == "window_start,mean_strength"
    # 1094 return days: starts every 30 days while a full 365-day window fits
    assert len(lines) == 1 + 25
    assert (out / "skipped_windows.csv").read_text().strip() == "window_start"
    years = (out / "years.csv").read_text().strip().split("\n")
    assert years[0] == "year,status"
    assert [ln.split(",")[0] for ln in years[1:]] == ["2020", "2021", "2022"]
    for ln in years[1:]:
        year, status = ln.split(",")
        if status == "fitted":
            assert (out / f"edges_{year}.csv").exists()


def test_network_short_span_fails(tmp_path):
    data = _write_prices(tmp_path, days=100)
    cfg = _write_config(tmp_path, "net.json", {**_NET_SMALL, "input": data})
    assert _run(["network", "--config", cfg, "--out", str(tmp_path / "o")]) == 2


def test_network_no_yearly(tmp_path):
    data = _write_prices(tmp_path, days=400, seed=6)
    cfg = _write_config(
        tmp_path, "net.json", {**_NET_SMALL, "input": data, "yearly": False}
    )
    out = tmp_path / "out"
    assert _run(["network", "--config", cfg, "--out", str(out)]) == 0
    assert not (out / "years.csv").exists()


# ---------------------------------------------------------------------------
# dualcheck


def test_dualcheck_table_shape(tmp_path):
    cfg = _write_config(tmp_path, "dc.json", {"p": 2, "iterations": 2, "n": 40})
    out = tmp_path / "out"
    assert _run(["dualcheck", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "udiff.csv").read_text().strip().split("\n")
    assert lines[0] == "iteration,u12_diff"
    assert len(lines) == 3
    assert lines[1].split(",")[0] == "1"
    theta_lines = (out / "theta_diff.csv").read_text().strip().split("\n")
    assert theta_lines[0] == "iteration,theta_diff"
    assert len(theta_lines) == 3
    # matched routes: differences stay numerically small
    assert float(lines[1].split(",")[1]) < 1e-3
    assert float(theta_lines[1].split(",")[1]) < 1e-3


def test_dualcheck_rejects_large_p(tmp_path, capsys):
    cfg = _write_config(tmp_path, "dc.json", {"p": 4})
    assert _run(["dualcheck", "--config", cfg, "--out", str(tmp_path / "o")]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "UnsupportedDimension"


# ---------------------------------------------------------------------------
# driver errors


def test_unknown_subcommand_exits():
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_missing_config_file(tmp_path, capsys):
    code = _run(["simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path)])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "FileNotFoundError"


def test_bad_json_config(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert _run(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "JSONDecodeError"


def test_seed_override(tmp_path):
    cfg = _write_config(tmp_path, "sim.json", _SIM_DICT)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert _run(["simulate", "--config", cfg, "--out", str(out_a), "--seed", "7"]) == 0
    assert _run(["simulate", "--config", cfg, "--out", str(out_b)]) == 0
    assert (out_a / "losses.csv").read_bytes() != (out_b / "losses.csv").read_bytes()
