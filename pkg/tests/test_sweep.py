import math

import numpy as np
import pytest

import skyrlab as sk
from skyrlab.errors import SkyrlabError
from skyrlab.sweep import (PhasePoint, classify_phase, dmi_series,
                           envelope_decay_per_period, entropy_growth_rate,
                           read_phase_csv, run_phase_diagram, solve_point,
                           write_phase_csv)


def test_classify_thresholds():
    fp = PhasePoint(J=0.5, B=2.0, K=0.0, boundary="PBC",
                    q_chirality=0.001, mean_sz=0.5, degeneracy=1)
    assert classify_phase(fp) == "FullyPolarized"
    sk_pt = PhasePoint(J=0.5, B=0.6, K=0.0, boundary="PBC",
                       q_chirality=0.49, mean_sz=0.2, degeneracy=1)
    assert classify_phase(sk_pt) == "Skyrmion"
    hel = PhasePoint(J=0.5, B=0.1, K=0.0, boundary="PBC",
                     q_chirality=0.2, mean_sz=0.1, degeneracy=6)
    assert classify_phase(hel) == "Helical"
    obc_sky = PhasePoint(J=0.9, B=0.4, K=0.02, boundary="OBC",
                         q_topological=0.95, mean_sz=0.1, degeneracy=1)
    assert classify_phase(obc_sky) == "Skyrmion"
    failed = PhasePoint(J=0.5, B=0.1, K=0.0, boundary="PBC", error="boom")
    assert classify_phase(failed) == "Unclassified"


def test_solve_point_fp_regime(hex7_pbc):
    point = solve_point(hex7_pbc, j=0.5, b=12.0, k=0.0)
    assert point.error is None
    assert point.phase == "FullyPolarized"
    assert abs(point.mean_sz - 0.5) < 1e-6
    assert abs(point.q_chirality) < 1e-6
    assert point.entropy_density < 1e-6


def test_solve_point_obc_skyrmion(hex7_obc):
    point = solve_point(hex7_obc, j=0.9, b=0.4, k=0.02, anisotropy_mode="bond")
    assert point.phase == "Skyrmion"
    assert 0.9 <= point.q_topological <= 1.1


def test_grid_validation(hex7_pbc):
    with pytest.raises(SkyrlabError):
        run_phase_diagram(hex7_pbc, [], [0.1])
    with pytest.raises(SkyrlabError):
        run_phase_diagram(hex7_pbc, [0.5], [0.3, 0.1])


def test_sweep_grid_row_major_and_energy_bound(hex7_pbc):
    j_grid = [0.4, 0.8]
    b_grid = [0.2, 1.0, 3.0]
    points = run_phase_diagram(hex7_pbc, j_grid, b_grid, k=0.0, workers=1)
    assert len(points) == 6
    assert [(p.J, p.B) for p in points] == [(j, b) for j in j_grid for b in b_grid]
    # variational bound: ground energy below the polarized product state
    for p in points:
        ham = sk.build_hamiltonian(hex7_pbc, sk.CouplingParams(J=p.J, B=(0, 0, p.B)))
        fp_energy = np.vdot(sk.basis_state(7, 0), ham.apply(sk.basis_state(7, 0))).real
        assert p.ground_energy <= fp_energy + 1e-9


def test_sweep_worker_count_invariance(hex7_pbc):
    j_grid = [0.5]
    b_grid = [0.2, 3.25, 9.0]
    seq = run_phase_diagram(hex7_pbc, j_grid, b_grid, workers=1, seed=3)
    par = run_phase_diagram(hex7_pbc, j_grid, b_grid, workers=2, seed=3)
    for a, b in zip(seq, par):
        assert a.csv_row() == b.csv_row()


def test_sweep_checkpoint_resume(tmp_path, hex7_pbc):
    ckpt = tmp_path / "grid.checkpoint.csv"
    full = run_phase_diagram(hex7_pbc, [0.5], [0.2, 1.0, 3.0], workers=1,
                             seed=0, checkpoint_path=str(ckpt), flush_every=1)
    assert ckpt.exists()
    resumed = run_phase_diagram(hex7_pbc, [0.5], [0.2, 1.0, 3.0], workers=1,
                                seed=0, checkpoint_path=str(ckpt))
    for a, b in zip(full, resumed):
        assert a.csv_row() == b.csv_row()


def test_phase_csv_round_trip(tmp_path, hex7_pbc):
    points = run_phase_diagram(hex7_pbc, [0.5], [0.2, 9.0], workers=1)
    path = tmp_path / "sweep.csv"
    write_phase_csv(path, points)
    back = read_phase_csv(path)
    assert len(back) == 2
    assert back[0].phase == points[0].phase
    assert math.isclose(back[1].ground_energy, points[1].ground_energy)


def test_dmi_series_validation(hex7_obc, qubit_point_params):
    with pytest.raises(SkyrlabError):
        dmi_series(hex7_obc, qubit_point_params, [1.0, 0.5])
    with pytest.raises(SkyrlabError):
        dmi_series(hex7_obc, qubit_point_params, [-1.0, 0.5])
    with pytest.raises(SkyrlabError):
        dmi_series(hex7_obc, qubit_point_params, [1.0], task="wiggle")


def test_dmi_series_single_element_matches_direct(hex7_obc, qubit_point_params):
    series = dmi_series(hex7_obc, qubit_point_params, [1.0], task="static")
    assert len(series) == 1
    entry = series[0]
    ham = sk.build_hamiltonian(hex7_obc, qubit_point_params)
    direct = sk.dense_spectrum(ham)
    assert abs(entry.ground_energy - direct.eigenvalues[0]) < 1e-10
    field = sk.onsite_spin_expectation(direct.eigenvectors[0], hex7_obc)
    assert abs(entry.radius - sk.skyrmion_radius(field, hex7_obc)) < 1e-12


def test_dmi_series_static_radius_decreases(hex7_obc, qubit_point_params):
    series = dmi_series(hex7_obc, qubit_point_params, [0.8, 1.0, 1.25],
                        task="static")
    radii = [e.radius for e in series]
    assert all(r is not None for r in radii)
    assert radii[0] > radii[1] > radii[2]


def test_period_block_fits():
    t = np.linspace(0.0, 10.0, 501)
    decaying = np.exp(-0.05 * t) * np.abs(np.sin(2 * np.pi * t))
    rate = envelope_decay_per_period(t, decaying, period=1.0)
    assert abs(rate - (1.0 - math.exp(-0.05))) < 5e-3
    growing = 0.1 + 0.02 * t + 0.01 * np.sin(2 * np.pi * t)
    slope = entropy_growth_rate(t, growing, period=1.0)
    assert abs(slope - 0.02) < 2e-3
