import csv
import hashlib
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from aftinfo import read_records
from aftinfo.cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, cmd_simulate, main
from aftinfo.config import SWEEP_LOGLOGISTIC_GRID, SWEEP_WEIBULL_GRID, parse_config

BERNOULLI = {"kind": "discrete", "support": [[0], [1]], "probs": [0.5, 0.5]}


def _config(tmp_path, name="cfg.json", **blocks):
    p = tmp_path / name
    p.write_text(json.dumps(blocks), encoding="utf-8")
    return str(p)


def run(capsys, *argv):
    rc = main(list(argv))
    out, err = capsys.readouterr()
    return rc, out, err


def _sha(path):
    return hashlib.sha256(open(path, "rb").read()).hexdigest()


# -- bound -------------------------------------------------------------------


@pytest.mark.parametrize("baseline,expect,ratio", [
    ({"family": "weibull", "gamma": 2}, {("length_biased", False): 1.5,
                                         ("length_biased", True): 1.75,
                                         ("current_duration", False): 0.5,
                                         ("current_duration", True): 0.75}, 1 / 3),
    ({"family": "loglogistic", "gamma": 2}, {("length_biased", False): 0.25,
                                             ("length_biased", True): 0.5,
                                             ("current_duration", False): 0.125,
                                             ("current_duration", True): 0.375}, 0.5),
])
def test_bound_table(tmp_path, capsys, baseline, expect, ratio):
    cfg = _config(tmp_path, baseline=baseline, covariates=BERNOULLI, theta=[0.0])
    rc, out, _ = run(capsys, "bound", "--config", cfg)
    assert rc == EXIT_OK
    res = json.loads(out)
    got = {(b["scheme"], b["h_known"]): b["matrix"][0][0] for b in res["bounds"]}
    assert got.keys() == expect.keys()
    for key, v in expect.items():
        assert got[key] == pytest.approx(v, rel=1e-8), key
    assert res["relative_efficiency"] == pytest.approx(ratio, rel=1e-8)


def test_bound_csv(tmp_path, capsys):
    cfg = _config(tmp_path, baseline={"family": "weibull", "gamma": 2}, covariates=BERNOULLI,
                  theta=[0.0])
    out = tmp_path / "bound.csv"
    rc, _, _ = run(capsys, "bound", "--config", cfg, "--format", "csv", "--out", str(out))
    assert rc == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert rows[0]["scheme"] == "length_biased" and float(rows[0]["scalar_info"]) == \
        pytest.approx(6.0, rel=1e-8)
    assert rows[-1]["scheme"] == "relative_efficiency"


def test_bound_out_of_domain(tmp_path, capsys):
    cfg = _config(tmp_path, baseline={"family": "loglogistic", "gamma": 0.5},
                  covariates=BERNOULLI, theta=[0.0])
    rc, _, err = run(capsys, "bound", "--config", cfg)
    assert rc == EXIT_DOMAIN
    assert "gamma > 1" in err
    cfg = _config(tmp_path, baseline={"family": "weibull", "gamma": -1})
    rc, _, err = run(capsys, "bound", "--config", cfg)
    assert rc == EXIT_DOMAIN and "baseline" in err


@pytest.mark.parametrize("argv", [
    [], ["frobnicate"], ["bound", "--format", "xml"], ["bound", "--seed", "-1"],
    ["bound", "--tol", "0"], ["bound"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == EXIT_USAGE


def test_config_errors_exit_one(tmp_path, capsys):
    p = tmp_path / "broken.json"
    p.write_text("{\"seed\": 1,,}")
    rc, _, err = run(capsys, "bound", "--config", str(p))
    assert rc == EXIT_USAGE and "line 1, column" in err
    cfg = _config(tmp_path, baseline={"family": "weibull"}, colour="blue")
    rc, _, err = run(capsys, "bound", "--config", cfg)
    assert rc == EXIT_USAGE and "colour" in err
    cfg = _config(tmp_path, baseline={"family": "weibull"})
    rc, _, err = run(capsys, "bound", "--config", cfg)
    assert rc == EXIT_USAGE and "covariates" in err


# -- sweep -------------------------------------------------------------------


def _sweep_rows(text):
    return [{k: float(v) for k, v in r.items()} for r in csv.DictReader(io.StringIO(text))]


@pytest.mark.parametrize("family,gammas,i_lb,i_cd", [
    ("weibull", [1, 2, 5, 10], [2, 6, 30, 110], [1, 2, 5, 10]),
    ("loglogistic", [2, 5, 10], [1, 8, 33], [0.5, 2, 4.5]),
])
def test_sweep_examples(tmp_path, capsys, family, gammas, i_lb, i_cd):
    cfg = _config(tmp_path, sweep={"family": family, "gammas": gammas})
    rc, out, _ = run(capsys, "sweep", "--config", cfg)
    assert rc == EXIT_OK
    rows = _sweep_rows(out)
    np.testing.assert_allclose([r["i_lb"] for r in rows], i_lb, rtol=1e-12)
    np.testing.assert_allclose([r["i_cd"] for r in rows], i_cd, rtol=1e-12)
    np.testing.assert_allclose([r["i_lb_quad"] for r in rows], i_lb, rtol=1e-6)
    assert max(r["dev_cd"] for r in rows) < 1e-6
    assert list(csv.reader(io.StringIO(out)))[0][:4] == ["gamma", "i_lb", "i_cd", "ratio"]


def test_sweep_single_row(tmp_path, capsys):
    cfg = _config(tmp_path, baseline={"family": "weibull", "gamma": 3}, sweep={"gammas": [3]})
    rc, out, _ = run(capsys, "sweep", "--config", cfg)
    assert rc == EXIT_OK
    lines = out.strip().splitlines()
    assert len(lines) == 2
    assert _sweep_rows(out)[0]["ratio"] == pytest.approx(0.25)


def test_sweep_default_grid_json(tmp_path, capsys):
    cfg = _config(tmp_path, sweep={"family": "log-logistic"})
    rc, out, _ = run(capsys, "sweep", "--config", cfg, "--format", "json")
    assert rc == EXIT_OK
    res = json.loads(out)
    assert [r["gamma"] for r in res["rows"]] == list(SWEEP_LOGLOGISTIC_GRID)
    assert res["failed"] == []


def test_sweep_errors(tmp_path, capsys):
    cfg = _config(tmp_path, sweep={"family": "gamma"})
    assert run(capsys, "sweep", "--config", cfg)[0] == EXIT_USAGE
    cfg = _config(tmp_path, sweep={"family": "loglogistic", "gammas": [0.8]})
    assert run(capsys, "sweep", "--config", cfg)[0] == EXIT_DOMAIN
    cfg = _config(tmp_path, sweep={"family": "weibull", "gammas": []})
    assert run(capsys, "sweep", "--config", cfg)[0] == EXIT_USAGE


# -- simulate ----------------------------------------------------------------


def test_simulate_is_deterministic(tmp_path, capsys):
    cfg = _config(tmp_path, baseline={"family": "exponential"},
                  sampler={"mode": "exact", "n": 1000})
    hashes, summaries = [], []
    for i in range(2):
        out = tmp_path / f"run{i}.csv"
        assert run(capsys, "simulate", "--config", cfg, "--seed", "42", "--out", str(out))[0] == 0
        hashes.append(_sha(out))
        summary = json.loads(open(str(out) + ".summary.json").read())
        assert summary.pop("records") == str(out)
        summaries.append(summary)
    assert hashes[0] == hashes[1]
    assert summaries[0] == summaries[1]
    assert summaries[0]["seed"] == 42 and not summaries[0]["seed_generated"]
    assert summaries[0]["n"] == 1000 and summaries[0]["mode"] == "exact"
    out = tmp_path / "other.csv"
    run(capsys, "simulate", "--config", cfg, "--seed", "43", "--out", str(out))
    assert _sha(out) != hashes[0]


def test_simulate_records_generated_seed(tmp_path, capsys):
    cfg = _config(tmp_path, baseline={"family": "exponential"},
                  sampler={"mode": "exact", "n": 10})
    out = tmp_path / "r.csv"
    assert run(capsys, "simulate", "--config", cfg, "--out", str(out))[0] == EXIT_OK
    s = json.loads(open(str(out) + ".summary.json").read())
    assert s["seed_generated"] and isinstance(s["seed"], int)
    # rerunning with the recorded seed reproduces the file
    again = tmp_path / "again.csv"
    run(capsys, "simulate", "--config", cfg, "--seed", str(s["seed"]), "--out", str(again))
    assert _sha(out) == _sha(again)


def test_simulate_short_window_warning(tmp_path, capsys):
    base = {"baseline": {"family": "exponential"}}
    cfg = _config(tmp_path, **base, seed=1,
                  sampler={"mode": "direct", "tau": 20, "n": 500, "allow_short_window": True})
    out = tmp_path / "r.csv"
    rc, _, err = run(capsys, "simulate", "--config", cfg, "--out", str(out))
    assert rc == EXIT_OK
    s = json.loads(open(str(out) + ".summary.json").read())
    assert len(s["warnings"]) == 1 and "tau=20" in s["warnings"][0]
    assert err.startswith("warning:")
    assert 0 < s["acceptance_rate"] < 1
    cfg = _config(tmp_path, **base, seed=1, sampler={"mode": "direct", "tau": 20, "n": 500})
    assert run(capsys, "simulate", "--config", cfg, "--out", str(out))[0] == EXIT_DOMAIN


def test_simulate_point_process_count(tmp_path):
    cfg = parse_config({"baseline": {"family": "exponential"},
                        "sampler": {"mode": "point_process", "intensity": 100, "window": 1000}})
    inside = 0
    seeds = 200
    for seed in range(seeds):
        cfg.seed = seed
        s = cmd_simulate(cfg, tmp_path / "pp.csv", "csv")
        assert s["N"] == s["n"]
        inside += 60 <= s["N"] <= 140
    assert inside >= 0.99 * seeds


def test_simulate_needs_out(tmp_path, capsys):
    cfg = _config(tmp_path, baseline={"family": "exponential"}, sampler={"n": 5})
    assert run(capsys, "simulate", "--config", cfg)[0] == EXIT_USAGE


# -- verify ------------------------------------------------------------------


def test_verify_default_battery(capsys):
    rc, out, _ = run(capsys, "verify")
    assert rc == EXIT_OK
    res = json.loads(out)
    assert res["passed"] and not res["failed"]
    kinds = {c["check"] for c in res["checks"]}
    assert kinds == {"closed_form", "patience", "contraction", "two_point_family",
                     "mixing_identity"}
    for c in res["checks"]:
        if c["check"] == "contraction":
            assert (c["status"] == "equality") == c["degenerate"], c["case"]
        else:
            assert c["status"] == "holds", c
    assert sum(c["check"] == "patience" for c in res["checks"]) == 14


def test_verify_degenerate_battery(tmp_path, capsys):
    cfg = _config(tmp_path, verify={"weibull": [2], "loglogistic": [], "custom": [],
                                    "mixing_laws": [{"kind": "degenerate", "u0": 0.5}],
                                    "mixing_bases": [{"family": "weibull", "gamma": 2}]})
    rc, out, _ = run(capsys, "verify", "--config", cfg, "--format", "csv")
    assert rc == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(out)))
    (row,) = [r for r in rows if r["check"] == "contraction"]
    assert row["status"] == "equality"


def test_verify_corrupted_closed_form(tmp_path, capsys):
    cfg = _config(tmp_path, verify={
        "weibull": [2, 3], "loglogistic": [], "custom": [],
        "corrupt_closed_form": {"family": "weibull", "gamma": 3, "scheme": "cd", "delta": 1e-3}})
    rc, out, err = run(capsys, "verify", "--config", cfg)
    assert rc == EXIT_VERIFY
    assert "weibull(gamma=3) current_duration" in err
    res = json.loads(out)
    assert res["failed"] == ["closed_form: weibull(gamma=3) current_duration"]


# -- empirical ---------------------------------------------------------------


def _sim_config(tmp_path, records=None, **extra):
    blocks = {"baseline": {"family": "weibull", "gamma": 2}, "covariates": BERNOULLI,
              "theta": [0.0], "seed": 5, "sampler": {"mode": "exact", "n": 20_000}}
    if records is not None:
        blocks["empirical"] = {"records": records, **extra}
    return _config(tmp_path, name="sim.json" if records is None else "emp.json", **blocks)


@pytest.mark.parametrize("fmt", ["csv", "json"])
def test_simulate_then_empirical(tmp_path, capsys, fmt):
    rec = tmp_path / f"sim.{fmt}"
    assert run(capsys, "simulate", "--config", _sim_config(tmp_path), "--format", fmt,
               "--out", str(rec))[0] == EXIT_OK
    back = read_records(rec)
    assert len(back) == 20_000 and back.dim == 1
    # relative path resolved against the config directory
    cfg = _sim_config(tmp_path, records=rec.name, h_known=True, groups=20)
    rc, out, err = run(capsys, "empirical", "--config", cfg)
    assert rc == EXIT_OK
    res = json.loads(out)
    assert [(r["scheme"], r["h_known"]) for r in res["reports"]] == [
        ("length_biased", False), ("length_biased", True),
        ("current_duration", False), ("current_duration", True)]
    assert all(r["n"] == 20_000 and r["excluded"] == 0 for r in res["reports"])
    assert res["reports"][0]["target"] == [[pytest.approx(1.5, rel=1e-8)]]
    assert "deviation" in err


def test_record_round_trip_loses_nothing(tmp_path, capsys):
    rec = tmp_path / "sim.csv"
    run(capsys, "simulate", "--config", _sim_config(tmp_path), "--out", str(rec))
    cfg = parse_config({"baseline": {"family": "weibull", "gamma": 2}, "covariates": BERNOULLI,
                        "theta": [0.0], "seed": 5, "sampler": {"mode": "exact", "n": 20_000}})
    from aftinfo import simulate
    direct = simulate(cfg.sampler_config(5))
    back = read_records(rec)
    for col in ("x", "d", "z", "onset", "fraction"):
        np.testing.assert_array_equal(getattr(back, col), getattr(direct, col))


def test_empirical_deviation_limit(tmp_path, capsys):
    rec = tmp_path / "sim.csv"
    run(capsys, "simulate", "--config", _sim_config(tmp_path), "--out", str(rec))
    cfg = _sim_config(tmp_path, records=str(rec), schemes=["lb"], groups=10,
                      max_deviation_se=1e-9)
    rc, _, err = run(capsys, "empirical", "--config", cfg, "--format", "csv")
    assert rc == EXIT_VERIFY and "length_biased" in err


def test_empirical_simulates_when_no_records(tmp_path, capsys):
    blocks = {"baseline": {"family": "exponential"}, "covariates": BERNOULLI, "theta": [0.0],
              "sampler": {"mode": "exact", "n": 5000}, "empirical": {"groups": 10}}
    rc, out, _ = run(capsys, "empirical", "--config", _config(tmp_path, **blocks),
                     "--seed", "3")
    assert rc == EXIT_OK
    res = json.loads(out)
    assert res["sample"]["seed"] == 3 and len(res["reports"]) == 2


def test_empirical_missing_records(tmp_path, capsys):
    cfg = _sim_config(tmp_path, records="nope.csv")
    rc, _, err = run(capsys, "empirical", "--config", cfg)
    assert rc == EXIT_USAGE and "nope.csv" in err


def test_module_entry_point(tmp_path):
    cfg = _config(tmp_path, sweep={"family": "weibull", "gammas": [2]})
    proc = subprocess.run([sys.executable, "-m", "aftinfo", "sweep", "--config", cfg],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1].startswith("2.0,6.0,2.0,")
    proc = subprocess.run([sys.executable, "-m", "aftinfo", "nope"], capture_output=True,
                          text=True, check=False)
    assert proc.returncode == EXIT_USAGE


def test_weibull_default_sweep_grid_is_monotone(tmp_path, capsys):
    cfg = _config(tmp_path, sweep={"family": "weibull"})
    rc, out, _ = run(capsys, "sweep", "--config", cfg)
    rows = _sweep_rows(out)
    assert rc == EXIT_OK and [r["gamma"] for r in rows] == list(SWEEP_WEIBULL_GRID)
    for col in ("i_lb", "i_cd", "i_lb_quad", "i_cd_quad"):
        v = [r[col] for r in rows]
        assert all(a < b for a, b in zip(v, v[1:])), col
    ratio = [r["ratio"] for r in rows]
    assert all(a > b for a, b in zip(ratio, ratio[1:]))
