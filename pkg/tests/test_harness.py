import math
import os

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from encclone.harness.cli import main
from encclone.harness.config import ExperimentConfig, load_config, parse_range
from encclone.harness.engine import evaluate, point_seed, resolve_backend
from encclone.harness.experiments import run_experiment, walsh_hadamard, z_distribution
from encclone.harness.outputs import SCHEMAS, emit_outputs, render_csv, render_plot_data, validate_rows
from encclone.noise import NoiseParams
from encclone.protocol import plan_iterated

ROOT2 = math.sqrt(2)
NOISY = """
[experiment]
name = {name}
{extra}
[noise]
p2q = 0.003
"""


def cfg(experiment, **kw):
    return ExperimentConfig(experiment=experiment, **kw)


# -- config -----------------------------------------------------------------

def test_parse_range():
    assert parse_range("2-8") == (2, 3, 4, 5, 6, 7, 8)
    assert parse_range("1,3,5") == (1, 3, 5)
    assert parse_range("0-1, 4") == (0, 1, 4)
    with pytest.raises(ValueError):
        parse_range("5-2")
    with pytest.raises(ValueError):
        parse_range("")


def test_config_invariants():
    with pytest.raises(ValueError):
        cfg("exp1", shots=0)
    with pytest.raises(ValueError):
        cfg("exp1", n_values=())
    with pytest.raises(ValueError):
        cfg("exp7")
    with pytest.raises(ValueError):
        cfg("exp2", scenarios=("2-4",))
    with pytest.raises(ValueError):
        cfg("exp1", backend="gpu")
    assert cfg("exp1").n_values == tuple(range(2, 9))


def test_load_config_text():
    c = load_config(text="""
[experiment]
name = exp2
n = 2-3
scenarios = 2-1, undecrypted
shots = 500
seed = 9

[noise]
p2q = 0.01
T1 = 100
T2 = 150
t_measure = 2.0
""")
    assert c.experiment == "exp2" and c.n_values == (2, 3) and c.scenarios == ("2-1", "undecrypted")
    assert c.shots == 500 and c.seed == 9
    assert c.noise.p2q == 0.01 and c.noise.T1 == 100 and c.noise.T2 == 150
    assert c.noise.durations.measure == 2.0
    assert c.noisy


def test_load_config_infinite_times():
    c = load_config(text="[noise]\np2q = 0\nT1 = inf\nT2 = inf\n")
    assert c.noise.is_noiseless and not c.noisy


def test_load_config_rejects_unknown_keys():
    with pytest.raises(ValueError):
        load_config(text="[experiment]\nname = exp1\nfoo = 1\n")
    with pytest.raises(ValueError):
        load_config(text="[noise]\np3q = 0.1\n")


def test_noise_disabled():
    c = load_config(text="[experiment]\nname = exp1\n[noise]\nenabled = false\n")
    assert c.noise is None and not c.noisy


def test_overrides():
    c = cfg("exp1").with_overrides(seed=4, shots=None)
    assert c.seed == 4 and c.shots == 10_000


# -- engine -----------------------------------------------------------------

def test_resolve_backend():
    assert resolve_backend("auto", 6, None) == "statevector"
    assert resolve_backend("auto", 54, None) == "tableau-trajectory"
    assert resolve_backend("auto", 6, NoiseParams()) == "density"
    assert resolve_backend("auto", 54, NoiseParams()) == "pauli-exact"
    assert resolve_backend("auto", 14, NoiseParams(), clifford=False) == "density"
    with pytest.raises(ValueError):
        resolve_backend("statevector", 6, NoiseParams())


def test_point_seed_stable():
    assert point_seed(1, "exp1", 2) == point_seed(1, "exp1", 2)
    assert point_seed(1, "exp1", 2) != point_seed(2, "exp1", 2)
    assert point_seed(1, "exp1", 2) != point_seed(1, "exp1", 3)


@settings(max_examples=30)
@given(st.lists(st.floats(-1, 1), min_size=8, max_size=8))
def test_walsh_hadamard_involution(v):
    v = np.array(v)
    assert np.allclose(walsh_hadamard(walsh_hadamard(v)) / 8, v)


def test_z_distribution_matches_dense():
    from encclone.protocol import ghz_prep

    c = ghz_prep([0, 1, 2], 4)
    sv = evaluate(c, "statevector", None, 0)
    tab = evaluate(c, "tableau-trajectory", None, 0)
    for qs in ([0, 1, 2], [2, 0], [3, 1]):
        dense = np.real(np.diag(sv.reduced(qs).entries))
        assert np.allclose(z_distribution(tab.expect_batch_on(qs), len(qs)), dense)


# -- drivers ----------------------------------------------------------------

def test_exp1_noiseless():
    rows = run_experiment(cfg("exp1", shots=10_000, seed=1))
    assert [r["n"] for r in rows] == list(range(2, 9))
    for r in rows:
        assert r["Fe_exact"] == pytest.approx(1, abs=1e-9)
        assert r["Fe_bsm"] == 1.0
        assert abs(r["Fe_pom"] - 1) <= 4 * r["sigma_pom"]
        assert r["N_qubits"] == 2 * r["n"] + 2


def test_exp1_noisy_trend():
    rows = run_experiment(load_config(text=NOISY.format(name="exp1", extra="n = 2-6\nshots = 2000")))
    pts = sorted(rows, key=lambda r: (r["L2q_pom"], r["n"]))
    fe = [r["Fe_exact"] for r in pts]
    assert all(a >= b for a, b in zip(fe, fe[1:]))
    assert all(r["Fe_exact"] < 1 for r in rows)


def test_exp2_noiseless():
    rows = run_experiment(cfg("exp2", n_values=(2, 3), seed=3))
    for r in rows:
        if r["scenario"] == "undecrypted":
            assert r["S_exact"] == pytest.approx(0, abs=1e-9)
        else:
            assert r["S_exact"] == pytest.approx(2 * ROOT2, abs=1e-9)
            assert abs(r["S"] - 2 * ROOT2) <= 4 * r["sigma"] + 1e-9
    assert {r["scenario"] for r in rows} == {"2-1", "2-2", "2-3", "undecrypted"}


def test_exp2_noisy_ordering():
    rows = run_experiment(load_config(text=NOISY.format(name="exp2", extra="n = 2-4\nshots = 1000")))
    for n in (2, 3, 4):
        s = {r["scenario"]: r["S_exact"] for r in rows if r["n"] == n}
        assert s["2-1"] <= s["2-2"] and s["2-1"] <= s["2-3"]


def test_exp3_rows():
    rows = run_experiment(cfg("exp3", n_values=(2,), l_values=(0, 1, 2)))
    assert [r["N_qubits"] for r in rows] == [6, 18, 54]
    assert [r["clones"] for r in rows] == [3, 9, 27]
    assert all(r["Fe"] == pytest.approx(1, abs=1e-12) for r in rows)
    assert rows[2]["backend"] == "tableau-trajectory"
    sb = run_experiment(cfg("exp3", n_values=(2,), l_values=tuple(range(6)), strategy="single-branch"))
    assert [r["virtual_clones"] for r in sb] == [3 ** (l + 1) for l in range(6)]
    assert all(r["Fe"] == pytest.approx(1, abs=1e-9) for r in sb)


def test_exp3_row_counts_match_planner():
    rows = run_experiment(cfg("exp3", n_values=(2,), l_values=(1,), extra=4))
    plan = plan_iterated(2, 1, extra=4)
    assert rows[0]["N_qubits"] == plan.total_qubits and rows[0]["key_size"] == plan.key_size


def test_exp4_noiseless_small():
    rows = run_experiment(cfg("exp4", r_values=(1, 2, 3), shots=4000))
    for r in rows:
        assert r["Fr_exact"] == pytest.approx(1, abs=1e-9)
        assert r["N_qubits"] == 5 * r["r"]
        assert r["label"] == "witnessed"


def test_exp4_noisy_labels():
    rows = run_experiment(load_config(text=NOISY.format(name="exp4", extra="r = 1-2\nshots = 2000")))
    for r in rows:
        assert r["Fr_exact"] < 1
        assert r["label"] in ("witnessed", "above-floor", "at-floor")


def test_correlation_scan():
    rows = run_experiment(cfg("corr-scan", n_values=(2, 4)))
    cols = [f"T{i}{j}" for i in (1, 2, 3) for j in (1, 2, 3)]
    for r in rows:
        block = np.array([r[c] for c in cols]).reshape(3, 3)
        if r["stage"] == "after-encryption" and r["role"] != "A":
            assert np.all(block < 1e-10)
        if r["stage"] == "after-decryption" and r["role"] == "S1":
            assert np.allclose(np.diag(block), 1)
        if r["stage"] == "before-encryption" and r["role"] == "A":
            assert np.allclose(np.diag(block), 1)


def test_mixedness():
    rows = run_experiment(cfg("mixedness", n_values=(2, 4)))
    for r in rows:
        if r["stage"] == "after-encryption":
            assert abs(r["purity"] - 0.5) < 1e-10


def test_cross_backend_agreement():
    a = run_experiment(cfg("exp1", n_values=(2, 3), backend="statevector", seed=5))
    b = run_experiment(cfg("exp1", n_values=(2, 3), backend="tableau-trajectory", seed=5))
    for ra, rb in zip(a, b):
        assert ra["Fe_exact"] == pytest.approx(rb["Fe_exact"], abs=1e-9)
        assert abs(ra["Fe_pom"] - rb["Fe_pom"]) <= 4 * (ra["sigma_pom"] + rb["sigma_pom"])


def test_noisy_backend_agreement():
    text = NOISY.format(name="exp1", extra="n = 2")
    a = run_experiment(load_config(text=text).with_overrides(backend="density"))
    b = run_experiment(load_config(text=text + "twirl_idle = true\n").with_overrides(backend="pauli-exact"))
    assert a[0]["Fe_exact"] == pytest.approx(b[0]["Fe_exact"], abs=2e-3)


# -- outputs ----------------------------------------------------------------

def test_exp1_header(tmp_path):
    rows = run_experiment(cfg("exp1", n_values=(2,), shots=100))
    text = render_csv("exp1", rows)
    assert text.splitlines()[0] == "n,N_qubits,L2q_bsm,Fe_bsm,sigma_bsm,L2q_pom,Fe_pom,sigma_pom"


def test_plot_data_sorted():
    rows = [{"L2q_bsm": l, "Fe_bsm": 0.9, "sigma_bsm": 0.01} for l in (22, 14, 16)]
    lines = render_plot_data("exp1", rows).splitlines()[1:]
    assert [int(x.split()[0]) for x in lines] == [14, 16, 22]


def test_schema_validation():
    with pytest.raises(ValueError):
        validate_rows("exp1", [{"n": 2}])
    row = {c: 0 for c in SCHEMAS["exp2"]}
    row["sigma"] = -1
    with pytest.raises(ValueError):
        validate_rows("exp2", [row])


def test_emit_errors(tmp_path):
    with pytest.raises(ValueError):
        emit_outputs([], "exp1", str(tmp_path / "x.csv"))
    blocker = tmp_path / "file"
    blocker.write_text("")
    rows = run_experiment(cfg("exp1", n_values=(2,), shots=100))
    with pytest.raises(OSError):
        emit_outputs(rows, "exp1", str(blocker / "out.csv"))


@pytest.mark.parametrize("experiment,extra", [
    ("exp1", "n = 2-3"), ("exp2", "n = 2"), ("exp3", "l = 0-1"), ("exp4", "r = 1-2"),
    ("corr-scan", "n = 2"), ("mixedness", "n = 2"),
])
def test_reproducible_and_schema(tmp_path, experiment, extra):
    path = tmp_path / "c.ini"
    path.write_text(NOISY.format(name=experiment, extra=extra + "\nshots = 500\nseed = 3"))
    outs = []
    for k in range(2):
        out = tmp_path / f"o{k}.csv"
        assert main(["run", experiment, "--config", str(path), "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]
    header = outs[0].decode().splitlines()[0].split(",")
    assert tuple(header) == SCHEMAS[experiment]
    # a different seed changes the sampled values
    if experiment in ("exp1", "exp2", "exp4"):
        out = tmp_path / "o2.csv"
        main(["run", experiment, "--config", str(path), "--out", str(out), "--seed", "4"])
        assert out.read_bytes() != outs[0]


# -- CLI --------------------------------------------------------------------

def test_cli_stdout(capsys):
    assert main(["run", "exp1", "--shots", "100", "--seed", "2"]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0].startswith("n,N_qubits")
    assert len(out.splitlines()) == 8


def test_cli_errors(capsys, tmp_path):
    assert main(["run", "exp1", "--config", str(tmp_path / "missing.ini")]) != 0
    assert "error" in capsys.readouterr().err
    bad = tmp_path / "bad.ini"
    bad.write_text("[experiment]\nn = 9-2\n")
    assert main(["run", "exp1", "--config", str(bad)]) != 0
    with pytest.raises(SystemExit) as e:
        main(["run", "exp9"])
    assert e.value.code != 0
    assert main(["run", "exp1", "--backend", "statevector", "--config", str(_noisy(tmp_path))]) != 0


def _noisy(tmp_path):
    p = tmp_path / "noisy.ini"
    p.write_text(NOISY.format(name="exp1", extra="n = 2"))
    return p


def test_cli_verify(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out
    assert out.count("PASS") >= 7 and "FAIL" not in out
