from __future__ import annotations

import json
import math
import subprocess
import sys

import numpy as np
import pytest

from fraclimits.artifacts import read_csv, run_metadata, to_jsonable, write_csv, write_json
from fraclimits.cli import main, suite_options, sweep
from fraclimits.core import ConfigError, RunConfig

KPP_INI = """[problem]
problem = kpp
alpha = 1.0

[grid]
n_points = 256
half_width = 32.0
periodic = true

[time]
dt = 0.05
t_final = 0.5

[tails]
scale = 2.0

[output]
stride = 5
"""

HJ_INI = """[problem]
problem = hj_obstacle
alpha = 1.0

[grid]
n_points = 321
half_width = 10.0
periodic = false

[time]
dt = 0.005
t_final = 0.2

[tails]
A = 0.5

[output]
stride = 20
"""


@pytest.fixture
def kpp_ini(tmp_path):
    p = tmp_path / "kpp.ini"
    p.write_text(KPP_INI)
    return p


def _write(path, text):
    path.write_text(text)
    return path


# artifacts ----------------------------------------------------------------------------------

def test_csv_roundtrip_is_exact(tmp_path):
    rng = np.random.default_rng(3)
    cols = {"a": rng.normal(size=50) * 1e-7, "b": np.exp(rng.normal(size=50) * 30)}
    write_csv(tmp_path / "x.csv", cols)
    back = read_csv(tmp_path / "x.csv")
    for k in cols:
        np.testing.assert_array_equal(back[k], cols[k])


def test_csv_rejects_ragged_columns(tmp_path):
    with pytest.raises(ValueError):
        write_csv(tmp_path / "x.csv", {"a": [1.0, 2.0], "b": [1.0]})


def test_json_conversion(tmp_path):
    obj = {"x": np.float64(1.5), "n": np.int64(3), "flag": np.bool_(True),
           "arr": np.arange(3.0), "bad": math.inf, "tup": (1, 2)}
    conv = to_jsonable(obj)
    assert conv == {"x": 1.5, "n": 3, "flag": True, "arr": [0.0, 1.0, 2.0], "bad": "inf", "tup": [1, 2]}
    write_json(tmp_path / "o.json", obj)
    assert json.loads((tmp_path / "o.json").read_text())["n"] == 3


def test_metadata_records_config(kpp_ini):
    cfg = RunConfig.from_file(kpp_ini)
    meta = run_metadata("simulate", cfg, {"extra": 1})
    assert meta["verb"] == "simulate" and meta["extra"] == 1
    assert RunConfig.from_file(_write(kpp_ini.parent / "back.ini", meta["config_ini"])).to_dict() == cfg.to_dict()


# commands ------------------------------------------------------------------------------------

def test_simulate_writes_outputs(kpp_ini, tmp_path):
    out = tmp_path / "out"
    assert main(["simulate", "--config", str(kpp_ini), "--out", str(out)]) == 0
    data = read_csv(out / "simulate.csv")
    assert set(data) >= {"t", "x", "n"}
    assert sorted(set(data["t"])) == pytest.approx([0.0, 0.25, 0.5])
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["config"]["problem"] == "kpp"


def test_simulate_is_deterministic(kpp_ini, tmp_path):
    for name in ("a", "b"):
        assert main(["simulate", "--config", str(kpp_ini), "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "a" / "simulate.csv").read_bytes() == (tmp_path / "b" / "simulate.csv").read_bytes()


def test_overrides_reach_the_run(kpp_ini, tmp_path):
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(kpp_ini), "--out", str(out), "--alpha", "1.5",
                 "--set", "t_final=0.25"]) == 0
    meta = json.loads((out / "metadata.json").read_text())
    assert meta["config"]["alpha"] == 1.5 and meta["config"]["t_final"] == 0.25


def test_hj_verb(tmp_path):
    ini = tmp_path / "hj.ini"
    ini.write_text(HJ_INI)
    out = tmp_path / "hj"
    assert main(["hj", "--config", str(ini), "--out", str(out)]) == 0
    data = read_csv(out / "hj.csv")
    assert np.max(data["u"]) <= 0.0
    # the hj verb refuses particle problems and simulate refuses limit problems
    assert main(["simulate", "--config", str(ini), "--out", str(out)]) == 2


def test_hamiltonian_table(tmp_path):
    out = tmp_path / "h"
    assert main(["hamiltonian-table", "--alpha", "1.0", "--A", "0.5", "--out", str(out)]) == 0
    table = read_csv(out / "hamiltonian.csv")
    assert table["p"].size == 512
    rep = json.loads((out / "hamiltonian.json").read_text())
    assert rep["C_lower"] < rep["C_upper"] and rep["alpha"] == 1.0


def test_verify_lemma_passes(tmp_path, capsys):
    assert main(["verify-lemma", "--alpha", "1.0", "--out", str(tmp_path)]) == 0
    assert "verify-lemma: PASS" in capsys.readouterr().out
    rep = json.loads((tmp_path / "verify_lemma.json").read_text())
    assert rep["pass"] is True


def test_configuration_errors_exit_2(tmp_path, kpp_ini):
    assert main(["simulate", "--out", str(tmp_path)]) == 2
    assert main(["simulate", "--config", str(kpp_ini), "--set", "bogus=1", "--out", str(tmp_path)]) == 2
    assert main(["verify-lemma", "--set", "nonsense=3", "--out", str(tmp_path)]) == 2
    assert main(["sweep", "verify-lemma", "--values", "", "--out", str(tmp_path)]) == 2
    assert main(["hamiltonian-table", "--alpha", "1.0", "--A", "1.0", "--out", str(tmp_path)]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["simulate", "--bogus"])
    assert exc.value.code == 2


def test_numerical_abort_exits_1(tmp_path, kpp_ini):
    # a step far above the explicit limit of the jump operator aborts the run
    ini = tmp_path / "sme.ini"
    ini.write_text("""[problem]
problem = sme_nonlocal
alpha = 1.0
epsilon = 0.1

[grid]
n_points = 201
half_width = 10.0
periodic = false

[time]
dt = 0.5
t_final = 1.0

[reaction]
r = 1.0
I0 = 1.0

[tails]
A = 0.5
""")
    assert main(["simulate", "--config", str(ini), "--out", str(tmp_path)]) in (1, 2)


def test_suite_options():
    kw = suite_options("verify-kpp", 1.5, 0.2, ["t=0.5"])
    assert kw == {"alpha": 1.5, "epsilon_ladder": (0.2,), "t": 0.5}
    with pytest.raises(ConfigError):
        suite_options("verify-kpp", settings=["oops"])
    with pytest.raises(ConfigError):
        suite_options("verify-lemma", epsilon=0.1)


def test_sweep_keeps_order_and_records_failures():
    rep = sweep("verify-lemma", "alpha", [1.5, 0.5, 2.5])
    assert rep["values"] == [1.5, 0.5, 2.5]
    assert [r["alpha"] for r in rep["rows"]] == [1.5, 0.5, 2.5]
    assert rep["rows"][0]["pass"] and rep["rows"][1]["pass"]
    assert not rep["rows"][2]["ok"] and rep["failed"] == 1


def test_sweep_parallel_matches_serial():
    a = sweep("verify-lemma", "alpha", [0.5, 1.0], threads=1)
    b = sweep("verify-lemma", "alpha", [0.5, 1.0], threads=2)
    assert a["rows"] == b["rows"]


def test_sweep_command_writes_table(tmp_path):
    assert main(["sweep", "verify-lemma", "--axis", "alpha", "--values", "0.5,1.0",
                 "--out", str(tmp_path)]) == 0
    table = read_csv(tmp_path / "sweep.csv")
    np.testing.assert_array_equal(table["alpha"], [0.5, 1.0])


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "fraclimits.cli", "verify-lemma", "--alpha", "0.5",
                           "--out", str(tmp_path)], capture_output=True, text=True)
    assert proc.returncode == 0 and "PASS" in proc.stdout


def test_verify_writes_ladder_table_and_fails_loudly(tmp_path, capsys):
    # a single coarse rung cannot meet the finest-rung bound on max u
    rc = main(["verify-sme", "--epsilon", "0.4", "--set", "t_final=0.2", "--set", "half_width=12.0",
               "--set", "refine=2", "--out", str(tmp_path)])
    assert rc == 1 and "verify-sme: FAIL" in capsys.readouterr().out
    table = read_csv(tmp_path / "verify_sme_ladder.csv")
    assert list(table["window"]) == ["core", "near", "mid"]
    np.testing.assert_array_equal(table["epsilon"], [0.4, 0.4, 0.4])
