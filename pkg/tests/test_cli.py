import json
import os

import numpy as np
import pytest

from lbmh.cli import parse_and_dispatch


def run(tmp_path, *argv) -> int:
    return parse_and_dispatch([*argv, "--out", str(tmp_path)])


def test_design_hyperbolic_ratios(tmp_path):
    code = run(
        tmp_path,
        "design",
        "--target",
        "hyperbolic:0.1",
        "--presets",
        "mala,barker,barker-rademacher",
        "--seed",
        "1",
    )
    assert code == 0
    doc = json.loads((tmp_path / "design.json").read_text())
    assert doc["ratios"]["mala/barker"] == pytest.approx(1.18, abs=0.01)
    assert doc["ratios"]["barker-rademacher/mala"] == pytest.approx(2.08, abs=0.01)
    assert doc["designs"]["mala"]["limiting_acc"] == pytest.approx(0.574, abs=5e-4)


def test_missing_seed_exits_2(tmp_path, capsys):
    assert run(tmp_path, "design", "--target", "gaussian") == 2


def test_unknown_preset_exits_2(tmp_path):
    assert run(tmp_path, "design", "--presets", "hmc", "--seed", "1") == 2


def test_rwm_in_design_exits_2(tmp_path):
    assert run(tmp_path, "design", "--presets", "rwm,mala", "--seed", "1") == 2


def test_degenerate_clt_exits_3(tmp_path):
    code = run(
        tmp_path,
        "clt-check",
        "--target",
        "gaussian",
        "--presets",
        "three-point(2)",
        "--n-grid",
        "32",
        "--samples",
        "200",
        "--seed",
        "1",
    )
    assert code == 3


def test_esjd_scan_smoke_and_determinism(tmp_path):
    args = [
        "esjd-scan",
        "--target",
        "gaussian",
        "--presets",
        "mala,barker",
        "--n-grid",
        "8,16",
        "--samples",
        "1500",
        "--seed",
        "11",
    ]
    assert run(tmp_path / "a", *args) == 0
    assert run(tmp_path / "b", *args, "--threads", "2") == 0
    a = (tmp_path / "a" / "scan.csv").read_bytes()
    b = (tmp_path / "b" / "scan.csv").read_bytes()
    assert a == b
    header = a.decode().splitlines()[0]
    assert header == "n,preset,sigma_opt,esjd,acc,esjd_n13"


def test_clt_check_smoke(tmp_path):
    code = run(
        tmp_path,
        "clt-check",
        "--target",
        "gaussian",
        "--presets",
        "barker",
        "--n-grid",
        "64",
        "--samples",
        "800",
        "--seed",
        "2",
    )
    assert code == 0
    lines = (tmp_path / "clt.csv").read_text().splitlines()
    assert lines[0] == "n,ell,emp_mean,emp_var,pred_mean,pred_var,ks"
    assert len(lines) == 2


def test_poisson_smoke(tmp_path):
    code = run(
        tmp_path,
        "poisson",
        "--presets",
        "barker,rwm",
        "--reps",
        "1",
        "--iters",
        "800",
        "--seed",
        "3",
    )
    assert code == 0
    lines = (tmp_path / "poisson.csv").read_text().splitlines()
    assert lines[0] == "scenario,rep,preset,median_ess,min_ess,acc"
    assert len(lines) == 5  # 2 scenarios x 1 rep x 2 presets


def test_correlated_smoke(tmp_path):
    code = run(
        tmp_path,
        "correlated",
        "--target",
        "ar1:0.9",
        "--presets",
        "mala",
        "--n-grid",
        "8,16",
        "--samples",
        "1200",
        "--seed",
        "4",
    )
    assert code == 0
    assert (tmp_path / "correlated.csv").read_text().startswith("n,preset,")


def test_correlated_rejects_product_target(tmp_path):
    assert run(tmp_path, "correlated", "--target", "gaussian", "--seed", "1") == 2


def test_mu4_sweep_smoke(tmp_path):
    code = run(
        tmp_path,
        "mu4-sweep",
        "--target",
        "hyperbolic:0.1",
        "--mu4",
        "2",
        "--n-grid",
        "8,16",
        "--samples",
        "1000",
        "--seed",
        "5",
    )
    assert code == 0
    lines = (tmp_path / "sweep.csv").read_text().splitlines()
    assert lines[0] == "n,mu4,esjd,acc"
    assert len(lines) == 3


def test_chain_smoke_and_csv_schema(tmp_path):
    code = run(
        tmp_path,
        "chain",
        "--target",
        "gaussian",
        "--n",
        "5",
        "--presets",
        "barker",
        "--iters",
        "500",
        "--coords",
        "3",
        "--adapt",
        "--seed",
        "6",
    )
    assert code == 0
    lines = (tmp_path / "chain.csv").read_text().splitlines()
    assert lines[0] == "iter,coord_0,coord_1,coord_2,accepted,rho"
    assert len(lines) == 501
    first = lines[1].split(",")
    assert first[0] == "0" and first[4] in ("0", "1")


def test_env_var_overrides_out(tmp_path, monkeypatch):
    env_dir = tmp_path / "env_out"
    monkeypatch.setenv("LBMH_OUT", str(env_dir))
    code = parse_and_dispatch(
        ["design", "--presets", "mala,barker", "--seed", "1", "--out", str(tmp_path / "flag_out")]
    )
    assert code == 0
    assert (env_dir / "design.json").exists()
    assert not (tmp_path / "flag_out").exists()


def test_config_file_with_flag_override(tmp_path):
    cfg = {
        "target": "gaussian",
        "presets": ["mala", "barker"],
        "n-grid": [8],
        "samples": 900,
    }
    cfg_path = tmp_path / "run.json"
    cfg_path.write_text(json.dumps(cfg))
    out = tmp_path / "o"
    code = parse_and_dispatch(
        [
            "esjd-scan",
            "--config",
            str(cfg_path),
            "--presets",
            "mala",  # flag wins over the file
            "--seed",
            "7",
            "--out",
            str(out),
        ]
    )
    assert code == 0
    lines = (out / "scan.csv").read_text().splitlines()
    assert len(lines) == 2 and ",mala," in lines[1]


def test_config_file_unknown_key_exits_2(tmp_path):
    cfg_path = tmp_path / "bad.json"
    cfg_path.write_text(json.dumps({"not_a_flag": 1}))
    assert run(tmp_path, "esjd-scan", "--config", str(cfg_path), "--seed", "1") == 2


def test_design_deterministic_outputs(tmp_path):
    for sub in ("x", "y"):
        assert (
            run(tmp_path / sub, "design", "--target", "hyperbolic:0.1", "--presets", "mala,barker", "--seed", "9")
            == 0
        )
    assert (tmp_path / "x" / "design.json").read_bytes() == (tmp_path / "y" / "design.json").read_bytes()
