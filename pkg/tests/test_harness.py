import json
import math
import os
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from gravlab.errors import ConfigError, InvalidInputError
from gravlab.harness import config as hc
from gravlab.harness import records as hr
from gravlab.harness.cli import ESTIMATORS, main
from gravlab.harness.scenarios import run_scenario, summary_table


def write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def ini(scenario, model, **sections):
    out = [f"[scenario]\nname = {scenario}\nmodel = {model}"]
    for sec, kv in sections.items():
        if sec != "scenario":
            out.append(f"[{sec}]")
        out.extend(f"{k} = {v}" for k, v in kv.items())
    return "\n".join(out) + "\n"


# ------------------------------------------------------------------ config

def test_defaults_filled(tmp_path):
    cfg = hc.load_config(write(tmp_path, ini("dp-rate", "diosi-penrose")), environ={})
    assert cfg.physical["R0"] == 1e-20
    assert cfg.numerics["mc_samples"] == 0
    assert cfg.output == hc.OutputConfig("csv", None)
    assert "physical.m" in cfg.inputs()


def test_inline_comments_and_case(tmp_path):
    text = ("[scenario]\nname = dp-rate ; the scenario\nmodel = diosi-penrose\n"
            "[physical]\nR0 = 2e-20   # regulator\n[constants]\nG_N = 6e-11\n")
    cfg = hc.load_config(write(tmp_path, text), environ={})
    assert cfg.physical["R0"] == 2e-20
    assert cfg.physical_constants().G_N == 6e-11


def test_environment_overrides(tmp_path):
    path = write(tmp_path, ini("estimates", "eft", numerics={"seed": 3}))
    cfg = hc.load_config(path, environ={"GRAVLAB_SEED": "0x10", "GRAVLAB_OUT": "x.csv"})
    assert cfg.seed == 16
    assert cfg.output.path == "x.csv"


@pytest.mark.parametrize("text,match", [
    ("[scenario]\nname = dp-rate\n", "name"),
    ("[physical]\nm = 1\n", "missing"),
    (ini("dp-rate", "diosi-penrose", extra={"a": 1}), "unknown section"),
    (ini("dp-rate", "diosi-penrose", physical={"mass": 1}), "unknown key"),
    (ini("dp-rate", "diosi-penrose", physical={"m": -1}), "positive"),
    (ini("dp-rate", "diosi-penrose", physical={"m": "heavy"}), "m"),
    (ini("dp-rate", "eft"), "not available"),
    (ini("teleport", "eft"), "unknown scenario"),
    (ini("dp-rate", "gr"), "unknown model"),
    (ini("dp-rate", "diosi-penrose", output={"format": "xml"}), "format"),
    (ini("dp-rate", "diosi-penrose", output={"colour": "red"}), "unknown key"),
    (ini("dp-rate", "diosi-penrose", constants={"G": 1}), "unknown constant"),
    (ini("dp-rate", "diosi-penrose", constants={"hbar": 0}), "hbar"),
    (ini("dp-rate", "diosi-penrose", numerics={"seed": -4}), "seed"),
    (ini("cc-trajectories", "classical-channel", numerics={"n_traj": 2.5}), "integer"),
    (ini("cc-trajectories", "classical-channel", numerics={"feedback": "maybe"}), "boolean"),
    (ini("cc-trajectories", "classical-channel", numerics={"n_steps": 5}), "record_every"),
    ("not an ini file", "malformed"),
])
def test_config_errors(tmp_path, text, match):
    with pytest.raises(ConfigError, match=match):
        hc.load_config(write(tmp_path, text), environ={})


def test_missing_file():
    with pytest.raises(ConfigError, match="cannot read"):
        hc.load_config("/nonexistent/run.ini", environ={})


def test_every_compatible_pair_builds():
    for scenario, models in hc.COMPATIBLE.items():
        for model in models:
            assert hc.build_config(scenario, model).scenario == scenario


# ----------------------------------------------------------------- records

def test_observable_rules():
    with pytest.raises(InvalidInputError):
        hr.Observable("x", 1.0, "1", flag=hr.MONTE_CARLO)
    with pytest.raises(InvalidInputError):
        hr.Observable("", 1.0, "1")
    o = hr.Observable("x", 1, "m", 0.1, 10, hr.MONTE_CARLO)
    assert isinstance(o.value, float)
    with pytest.raises(InvalidInputError):
        hr.ResultRecord("s", "m", {}, (o, o))


def test_csv_empty_is_header_only():
    assert hr.to_csv([]) == ",".join(hr.CSV_COLUMNS) + "\n"
    assert hr.to_jsonl([]) == ""


finite = st.floats(allow_nan=False, allow_infinity=True, width=64)


@given(st.lists(st.tuples(st.text("abcxyz_", min_size=1, max_size=6), finite), min_size=1, max_size=5,
                unique_by=lambda t: t[0]),
       st.dictionaries(st.text("pqr", min_size=1, max_size=3), st.floats(allow_nan=False), max_size=3))
def test_jsonl_round_trip(obs, inputs):
    rec = hr.ResultRecord("sc", "md", inputs, tuple(hr.Observable(n, v, "1") for n, v in obs), "prov")
    text = hr.to_jsonl([rec])
    back = hr.parse_jsonl(text)
    assert back == [rec]
    assert hr.to_jsonl(back) == text


@given(st.lists(finite, min_size=1, max_size=5))
def test_csv_values_round_trip(values):
    rec = hr.ResultRecord("sc", "md", {}, tuple(hr.Observable(f"o{i}", v, "1") for i, v in enumerate(values)))
    rows = hr.parse_csv(hr.to_csv([rec]))
    assert [float(r["value"]) for r in sorted(rows, key=lambda r: int(r["observable"][1:]))] == values


def test_emit_writes_file(tmp_path):
    rec = hr.ResultRecord("sc", "md", {}, (hr.Observable("a", 1.5, "m"),))
    path = tmp_path / "o.jsonl"
    text = hr.emit([rec], "jsonl", str(path))
    assert path.read_text() == text
    with pytest.raises(InvalidInputError):
        hr.render([rec], "xml")


def test_record_ordering_is_canonical():
    a = hr.ResultRecord("b", "m", {}, (hr.Observable("z", 1.0, "1"), hr.Observable("a", 2.0, "1")))
    b = hr.ResultRecord("a", "m", {}, (hr.Observable("q", 1.0, "1"),))
    assert hr.to_csv([a, b]) == hr.to_csv([b, a])
    assert hr.to_jsonl([a, b]) == hr.to_jsonl([b, a])
    assert [o.name for o in a.observables] == ["a", "z"]


# --------------------------------------------------------------- scenarios

def run(scenario, model, **sections):
    return run_scenario(hc.build_config(scenario, model, **sections))


def test_interferometer_models():
    eft_rec = run("interferometer-pair", "eft")[0]
    sn_rec = run("interferometer-pair", "sn")[0]
    assert eft_rec.get("negativity").value > 0
    assert sn_rec.get("negativity").value < 1e-12
    dphi = eft_rec.get("delta_phi_exact").value
    assert sn_rec.get("relative_phase_1").value == pytest.approx(dphi / 2, rel=1e-10)
    assert sn_rec.get("relative_phase_2").value == pytest.approx(-dphi / 2, rel=1e-10)
    cc_rec = run("interferometer-pair", "classical-channel", numerics={"n_traj": 50, "n_steps": 10})[0]
    neg = cc_rec.get("negativity")
    assert neg.flag == hr.SIMULATION and neg.n_samples == 50 and neg.stderr >= 0


def test_osc_pair_scenario():
    rec = run("osc-pair", "eft", physical={"alpha": 1.0, "t": 100.0}, numerics={"dim": 20})[0]
    assert rec.get("cat_fidelity_vs_closed_form").value > 1 - 1e-9
    fock = run("osc-pair", "eft", physical={"t": 1.0})[0]
    assert fock.get("negativity").value == pytest.approx(fock.get("lambda_t").value, rel=1e-3)


def test_dp_and_penrose_scenarios():
    rec = run("dp-rate", "diosi-penrose", physical={"m": 1e-15, "R0": 1e-7, "separation": 1e-7},
              numerics={"mc_samples": 100_000, "seed": 2})[0]
    mc = rec.get("dp_rate_mc")
    assert mc.flag == hr.MONTE_CARLO
    assert abs(mc.value - rec.get("dp_rate").value) < 4 * mc.stderr
    zero = run("dp-rate", "diosi-penrose", physical={"separation": 0})[0]
    assert zero.get("coherence_time").value == math.inf
    pen = run("penrose", "penrose", options={"prefactor": "G"})[0]
    assert pen.get("penrose_time").value == pytest.approx(1.054571817e-34 / pen.get("delta_e").value)


def test_cc_and_estimates_scenarios():
    rec = run("cc-trajectories", "classical-channel", numerics={"n_traj": 200, "n_steps": 200})[0]
    assert rec.get("dephasing_rate").flag == hr.SIMULATION
    est = run("estimates", "eft")[0]
    assert 1e23 <= est.get("em_gr_ratio").value <= 1e24
    assert est.get("em_gr_ratio").flag == hr.ORDER_OF_MAGNITUDE


def test_constants_override_changes_results():
    a = run("estimates", "eft")[0].get("em_gr_ratio").value
    b = run("estimates", "eft", constants={"G_N": 2 * 6.6743e-11})[0].get("em_gr_ratio").value
    assert b == pytest.approx(a / 2)


def test_summary_table():
    rows = summary_table()
    assert len(rows) == 8
    cells = {(r.scenario, r.model) for r in rows}
    assert len(cells) == 8
    dp = [r for r in rows if r.model == "diosi-penrose"]
    assert all(r.get("entanglement").value == hr.UNSPECIFIED for r in dp)
    blanks = [r for r in rows if r.get("example_value").flag == hr.NOT_IN_SOURCE]
    assert {r.model for r in blanks} == {"sn", "classical-channel"}


def test_scenario_reproducible():
    cfg = hc.build_config("cc-trajectories", "classical-channel", numerics={"n_traj": 30, "n_steps": 50, "record_every": 10,
                                                                          "seed": 4})
    assert hr.to_csv(run_scenario(cfg)) == hr.to_csv(run_scenario(cfg))
    other = hr.to_csv(run_scenario(cfg.with_seed(5)))
    assert other != hr.to_csv(run_scenario(cfg))


# --------------------------------------------------------------------- CLI

def test_cli_run_byte_reproducible(tmp_path):
    path = write(tmp_path, ini("interferometer-pair", "classical-channel", numerics={"n_traj": 40, "n_steps": 20}))
    outs = []
    for i in range(2):
        out = tmp_path / f"o{i}.csv"
        assert main(["run", path, "--seed", "9", "--out", str(out), "--quiet"]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    assert outs[0].startswith(b"scenario,model,observable")


def test_cli_jsonl_stdout(tmp_path, capsys):
    path = write(tmp_path, ini("penrose", "penrose"))
    assert main(["run", path, "--format", "jsonl", "--quiet"]) == 0
    recs = hr.parse_jsonl(capsys.readouterr().out)
    assert recs[0].model == "penrose"


def test_cli_table_and_estimates(capsys):
    assert main(["table", "--quiet"]) == 0
    rows = hr.parse_csv(capsys.readouterr().out)
    assert len(rows) == 16
    for name in ESTIMATORS:
        assert main(["estimate", name, "--quiet"]) == 0
        assert capsys.readouterr().out.startswith("scenario,")
    assert main(["estimate", "em-gr-ratio", "N=2", "--format", "jsonl", "--quiet"]) == 0
    rec = hr.parse_jsonl(capsys.readouterr().out)[0]
    assert rec.inputs == {"N": 2.0}


@pytest.mark.parametrize("argv", [
    ["estimate", "em-gr-ratio", "N"],
    ["estimate", "em-gr-ratio", "N=abc"],
    ["estimate", "bremsstrahlung", "m=1e-60", "tau=1e-10"],
    ["estimate", "coupling", "m=-1"],
    ["run", "/nonexistent/run.ini"],
])
def test_cli_config_errors_exit_2(argv):
    assert main(argv + ["--quiet"]) == 2


def test_cli_bad_output_path(tmp_path):
    path = write(tmp_path, ini("penrose", "penrose"))
    assert main(["run", path, "--out", str(tmp_path / "missing" / "x.csv"), "--quiet"]) == 2


def test_cli_numerical_breakdown_exit_3(tmp_path):
    path = write(tmp_path, ini("cc-trajectories", "classical-channel",
                               physical={"m": 1e153},
                               numerics={"gamma": 1e-3, "dt": 1.0, "n_steps": 5, "n_traj": 2,
                                         "record_every": 1}))
    assert main(["run", path, "--quiet"]) == 3


def test_cli_selftest(capsys):
    assert main(["selftest"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert len(lines) == 6 and all(line.startswith("PASS") for line in lines)


def test_module_entry_point(tmp_path):
    env = dict(os.environ, GRAVLAB_SEED="3")
    res = subprocess.run([sys.executable, "-m", "gravlab", "estimate", "planck-units", "--quiet"],
                         capture_output=True, text=True, env=env)
    assert res.returncode == 0
    rows = hr.parse_csv(res.stdout)
    assert {r["observable"] for r in rows} == {"M_p", "P_p", "L_p"}
    bad = subprocess.run([sys.executable, "-m", "gravlab", "run", "/nope.ini", "--quiet"],
                         capture_output=True, text=True)
    assert bad.returncode == 2
    assert json.dumps(bad.stdout) == '""'
