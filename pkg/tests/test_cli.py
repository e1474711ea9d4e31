import json
import math
import subprocess
import sys

import numpy as np
import pytest

from skyrlab.cli import load_config, main, preset_path, run

PRESETS = ["fig2_linecut", "fig3_correlations", "fig8_rabi", "fig11_obc_diagram",
           "fig14_levels", "fig17_gates", "fig18_lindblad", "fig19_fullspace",
           "fig27_dmi_fidelity", "fig28_radius"]


def run_cli(args):
    return main(args)


def test_all_presets_ship():
    for name in PRESETS:
        cfg = load_config(preset_path(name))
        assert "lattice" in cfg and "params" in cfg


def test_diagonalize_summary_and_outputs(tmp_path, capsys):
    code = run_cli(["diagonalize", "--config", preset_path("fig14_levels"),
                    "--out", str(tmp_path), "--dump-lattice"])
    assert code == 0
    summary = json.loads(capsys.readouterr().out.strip())
    assert summary["task"] == "diagonalize"
    assert 0.9 <= summary["Q_topological"] <= 1.1
    assert (tmp_path / "spectrum.json").exists()
    assert (tmp_path / "spin_field.csv").exists()
    assert (tmp_path / "energy_density.csv").exists()
    lattice = json.loads((tmp_path / "lattice.json").read_text())
    assert lattice["boundary"] == "OBC"
    assert len(lattice["sites"]) == 7


def test_diagonalize_two_site_trivial(tmp_path, capsys):
    # 1-shell OBC at J only would be slow to hand-check; use the one-site
    # Zeeman case: E0 = -0.5
    cfg = {
        "task": "diagonalize",
        "lattice": {"n_shells": 0, "boundary": "OBC"},
        "params": {"J": 0.0, "D": 1.0, "B": [0.0, 0.0, 1.0], "K": 0.0},
        "diagonalize": {"k": 2},
        "seed": 0,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert run_cli(["diagonalize", "--config", str(path), "--out", str(tmp_path)]) == 0
    summary = json.loads(capsys.readouterr().out.strip())
    assert abs(summary["E0"] + 0.5) < 1e-12


def test_gate_preset_reaches_full_population(tmp_path, capsys):
    code = run_cli(["gate", "--config", preset_path("fig17_gates"),
                    "--out", str(tmp_path)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out.strip())
    assert summary["p2_max"] > 0.95
    header = (tmp_path / "trajectory.csv").read_text().splitlines()[0]
    assert header.startswith("t,rx,ry,rz")
    assert (tmp_path / "bloch.json").exists()


def test_sweep_single_point_fp(tmp_path, capsys):
    cfg = {
        "task": "sweep",
        "lattice": {"n_shells": 1, "boundary": "PBC"},
        "params": {"J": 0.5, "D": 1.0, "B": [0.0, 0.0, 0.0], "K": 0.0},
        "sweep": {"J": [0.5], "B": [12.0], "k_pairs": 4},
        "seed": 0,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert run_cli(["sweep", "--config", str(path), "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert rows[0].startswith("J,B,K,boundary")
    assert rows[1].endswith("FullyPolarized")
    summary = json.loads(capsys.readouterr().out.strip())
    assert summary["phases"] == ["FullyPolarized"]


def test_readout_task(tmp_path, capsys):
    cfg = {
        "task": "readout",
        "lattice": {"n_shells": 0, "boundary": "OBC"},
        "params": {"J": 0.0, "D": 1.0, "B": [0, 0, 1.0], "K": 0.0},
        "readout": {},
        "seed": 0,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert run_cli(["readout", "--config", str(path), "--out", str(tmp_path)]) == 0
    results = json.loads((tmp_path / "readout.json").read_text())
    assert results["plus"]["p0"] == pytest.approx(1.0, abs=1e-10)
    assert results["minus"]["p1"] == pytest.approx(1.0, abs=1e-10)
    assert results["plus_i"]["p0"] == pytest.approx(1.0, abs=1e-10)
    assert results["minus_i"]["p1"] == pytest.approx(1.0, abs=1e-10)


def test_dmi_series_preset(tmp_path, capsys):
    code = run_cli(["dmi-series", "--config", preset_path("fig28_radius"),
                    "--out", str(tmp_path)])
    assert code == 0
    summary = json.loads(capsys.readouterr().out.strip())
    radii = summary["radii"]
    assert radii[0] > radii[1] > radii[2]


def test_config_validation_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"lattice": {"n_shells": 1, "boundary": "XYZ"},
                               "params": {}}))
    assert run_cli(["diagonalize", "--config", str(bad)]) == 2
    missing = tmp_path / "missing.json"
    assert run_cli(["diagonalize", "--config", str(missing)]) == 2
    wrong_block = tmp_path / "wrong.json"
    wrong_block.write_text(json.dumps({
        "lattice": {"n_shells": 1, "boundary": "OBC"}, "params": {},
        "sweep": {"J": [0.5], "B": [0.5]}}))
    assert run_cli(["diagonalize", "--config", str(wrong_block)]) == 2


def test_dense_refusal_limit():
    from skyrlab.eigensolver import dense_spectrum
    from skyrlab.errors import ResourceError
    import skyrlab as sk
    ham = sk.build_hamiltonian(sk.build_triangular(2, "OBC"), sk.CouplingParams(J=0.1))
    with pytest.raises(ResourceError):
        dense_spectrum(ham)


def test_failure_exit_codes(tmp_path, monkeypatch, capsys):
    # the runner maps solver failures onto the documented exit codes
    import skyrlab.cli as cli
    from skyrlab.errors import ConvergenceError, ResourceError
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "task": "diagonalize",
        "lattice": {"n_shells": 0, "boundary": "OBC"},
        "params": {"J": 0.0, "D": 1.0, "B": [0, 0, 1.0], "K": 0.0},
        "diagonalize": {"k": 1},
    }))

    def boom_convergence(*a, **k):
        raise ConvergenceError("stuck")

    monkeypatch.setitem(cli._RUNNERS, "diagonalize", boom_convergence)
    assert run_cli(["diagonalize", "--config", str(cfg)]) == 3

    def boom_resource(*a, **k):
        raise ResourceError("too big")

    monkeypatch.setitem(cli._RUNNERS, "diagonalize", boom_resource)
    assert run_cli(["diagonalize", "--config", str(cfg)]) == 4


def test_rerun_is_bit_identical(tmp_path):
    cfg_path = preset_path("fig28_radius")
    out1 = tmp_path / "a"
    out2 = tmp_path / "b"
    run(load_config(cfg_path), "dmi_series", out_dir=str(out1), seed=5)
    run(load_config(cfg_path), "dmi_series", out_dir=str(out2), seed=5)
    f1 = (out1 / "dmi_series.csv").read_bytes()
    f2 = (out2 / "dmi_series.csv").read_bytes()
    assert f1 == f2


def test_console_entry_point_runs():
    proc = subprocess.run([sys.executable, "-m", "skyrlab.cli", "readout",
                           "--config", preset_path("fig14_levels")],
                          capture_output=True, text=True)
    # fig14_levels is a diagonalize config: the readout subcommand must refuse
    assert proc.returncode == 2


@pytest.mark.parametrize("name", PRESETS)
def test_every_preset_runs_to_completion(name, tmp_path, capsys):
    cfg = load_config(preset_path(name))
    task = cfg["task"].replace("-", "_")
    summary = run(cfg, task, out_dir=str(tmp_path), seed=0)
    assert summary["task"] == task
    assert summary["runtime_s"] < 600  # the shipped presets are desk-scale


def test_trajectory_rerun_bit_identical(tmp_path):
    cfg = load_config(preset_path("fig17_gates"))
    out1, out2 = tmp_path / "a", tmp_path / "b"
    run(cfg, "gate", out_dir=str(out1), seed=2)
    run(cfg, "gate", out_dir=str(out2), seed=2)
    assert ((out1 / "trajectory.csv").read_bytes()
            == (out2 / "trajectory.csv").read_bytes())
    assert ((out1 / "bloch.json").read_bytes()
            == (out2 / "bloch.json").read_bytes())


def test_evolve_gate_field_drive(tmp_path, capsys):
    # the oscillating-field realization of a gate, resonant with the gap
    cfg = {
        "task": "evolve",
        "lattice": {"n_shells": 1, "boundary": "OBC"},
        "params": {"J": 0.9, "D": 1.0, "B": [0, 0, 0.4], "K": 0.02,
                   "anisotropy_mode": "bond"},
        "evolve": {"drive": "gate_field", "gate": "X", "amplitude": 0.02,
                   "t_final": 50.0, "dt": 0.25, "record_every": 10,
                   "track_energy": False},
        "seed": 0,
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert run_cli(["evolve", "--config", str(path), "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert len(rows) > 10


def test_evolve_state_checkpoint(tmp_path):
    from skyrlab.operators import load_state
    cfg = load_config(preset_path("fig8_rabi"))
    cfg["evolve"]["checkpoint_state"] = True
    cfg["evolve"]["t_final"] = cfg["evolve"]["dt"] * 80
    run(cfg, "evolve", out_dir=str(tmp_path), seed=0)
    psi = load_state(tmp_path / "final_state.bin")
    assert psi.shape == (2 ** 7,)
    assert abs(np.linalg.norm(psi) - 1.0) < 1e-8
