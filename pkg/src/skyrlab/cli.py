"""Command-line entry point.

One subcommand per workflow; every run is driven by a JSON config (see
the shipped presets under skyrlab/configs) plus a few overriding flags:

    skyrlab diagonalize --config cfg.json [--out DIR] [--seed S]
            [--workers N] [--dump-lattice]
    skyrlab sweep | evolve | gate | lindblad | readout | dmi-series ...

Outputs are CSV/JSON files in the output directory plus one summary
JSON line on stdout.  Exit codes: 2 config error, 3 convergence
failure, 4 resource refusal, 1 other failures.
"""

from __future__ import annotations

import argparse
import importlib.resources
import json
import math
import os
import sys
import time

import numpy as np

from .dynamics import DriveSpec, RecordSpec, evolve_schrodinger, gate_field
from .eigensolver import DENSE_DIM_LIMIT, dense_spectrum, lanczos_lowest
from .errors import (ContractError, ConvergenceError, ResourceError,
                     SkyrlabError)
from .lattice import build_triangular
from .observables import (entropy_partition, neutron_cross_section,
                          onsite_energy_density, onsite_spin_expectation,
                          scalar_chirality, structure_factor,
                          topological_charge)
from .operators import CouplingParams, build_hamiltonian
from .sweep import dmi_series, run_phase_diagram, write_phase_csv
from .twolevel import (evolve_lindblad, evolve_two_level, project_two_level,
                       rabi_period, readout_rotation)

TASKS = ("diagonalize", "sweep", "evolve", "gate", "lindblad", "readout",
         "dmi_series")


def load_config(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ContractError(f"cannot read config {path}: {exc}") from exc


def preset_path(name: str) -> str:
    """Filesystem path of a shipped preset config."""
    res = importlib.resources.files("skyrlab") / "configs" / f"{name}.json"
    return str(res)


def _require(cfg: dict, key: str, kind=dict):
    if key not in cfg:
        raise ContractError(f"config is missing the {key!r} block")
    if not isinstance(cfg[key], kind):
        raise ContractError(f"config block {key!r} must be a {kind.__name__}")
    return cfg[key]


def validate_config(cfg: dict, task: str) -> None:
    _require(cfg, "lattice")
    _require(cfg, "params")
    stated = cfg.get("task")
    if stated is not None and stated.replace("-", "_") != task:
        raise ContractError(f"config task {stated!r} does not match subcommand {task!r}")
    blocks = [t for t in TASKS if t in cfg]
    if blocks and blocks != [task]:
        raise ContractError(
            f"config must hold exactly the {task!r} task block, found {blocks}")
    lat = cfg["lattice"]
    if lat.get("boundary") not in ("PBC", "OBC"):
        raise ContractError("lattice.boundary must be 'PBC' or 'OBC'")
    if not isinstance(lat.get("n_shells"), int) or lat["n_shells"] < 0:
        raise ContractError("lattice.n_shells must be a non-negative integer")


def lattice_from_config(cfg: dict):
    lat = cfg["lattice"]
    return build_triangular(lat["n_shells"], lat["boundary"])


def params_from_config(cfg: dict) -> CouplingParams:
    p = cfg["params"]
    return CouplingParams(
        J=float(p.get("J", 0.0)),
        D=float(p.get("D", 1.0)),
        B=tuple(p.get("B", (0.0, 0.0, 0.0))),
        K=float(p.get("K", 0.0)),
        anisotropy_mode=p.get("anisotropy_mode", "onsite"),
    )


def _solve(ham, k, seed, tol=1e-8, max_krylov=300):
    if ham.dim <= DENSE_DIM_LIMIT:
        return dense_spectrum(ham)
    return lanczos_lowest(ham, k=k, tol=tol, seed=seed, max_krylov=max_krylov)


def _qubit_from_config(cfg, seed):
    lattice = lattice_from_config(cfg)
    params = params_from_config(cfg)
    ham = build_hamiltonian(lattice, params)
    eig = _solve(ham, k=3, seed=seed)
    qubit = project_two_level(
        eig, provenance=f"n={lattice.n_sites} {lattice.boundary} J={params.J}")
    return lattice, params, ham, eig, qubit


def _write_json(path, payload) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


# -- task runners --------------------------------------------------------------

def run_diagonalize(cfg, out, seed, workers):
    block = cfg.get("diagonalize", {})
    lattice = lattice_from_config(cfg)
    params = params_from_config(cfg)
    ham = build_hamiltonian(lattice, params)
    k = int(block.get("k", 4))
    eig = _solve(ham, k=k, seed=seed)
    ground = eig.eigenvectors[0]
    spin_field = onsite_spin_expectation(ground, lattice)
    chirality = scalar_chirality(ground, lattice) if lattice.n_shells >= 1 else math.nan
    summary = {
        "task": "diagonalize",
        "E0": float(eig.eigenvalues[0]),
        "gap": float(eig.eigenvalues[1] - eig.eigenvalues[0]) if len(eig.eigenvalues) > 1 else None,
        "degeneracy": eig.ground_degeneracy,
        "Q": chirality,
        "mean_Sz": spin_field.mean_sz(),
    }
    n_report = min(k, len(eig.eigenvalues))
    _write_json(os.path.join(out, "spectrum.json"), {
        "eigenvalues": [float(v) for v in eig.eigenvalues[:n_report]],
        "residuals": [float(r) for r in eig.residuals[:n_report]],
        "degeneracy_groups": eig.degeneracy_groups[:n_report],
    })
    spin_field.to_csv(os.path.join(out, "spin_field.csv"), lattice)
    wants = set(block.get("observables", []))
    if "energy_density" in wants:
        dens = onsite_energy_density(ground, lattice, params)
        with open(os.path.join(out, "energy_density.csv"), "w") as fh:
            fh.write("site,e\n")
            for i, e in enumerate(dens):
                fh.write(f"{i},{e!r}\n")
    if "structure_factor" in wants:
        grid = structure_factor(ground, lattice, int(block.get("resolution", 48)))
        grid.cross_section = neutron_cross_section(grid)
        grid.to_csv(os.path.join(out, "structure_factor.csv"))
    if "topological_charge" in wants:
        try:
            summary["Q_topological"] = topological_charge(
                spin_field, lattice.default_charge_path())
        except SkyrlabError:
            summary["Q_topological"] = None
    return summary


def run_sweep(cfg, out, seed, workers):
    block = _require(cfg, "sweep")
    lattice = lattice_from_config(cfg)
    params = params_from_config(cfg)
    j_grid = _grid(block, "J")
    b_grid = _grid(block, "B")
    points = run_phase_diagram(
        lattice, j_grid, b_grid, k=params.K, workers=workers, seed=seed,
        k_pairs=int(block.get("k_pairs", 7)),
        anisotropy_mode=params.anisotropy_mode,
        checkpoint_path=os.path.join(out, "sweep.checkpoint.csv"),
    )
    write_phase_csv(os.path.join(out, "sweep.csv"), points)
    phases = sorted({p.phase for p in points})
    return {
        "task": "sweep", "points": len(points), "phases": phases,
        "E0_min": min(p.ground_energy for p in points),
    }


def _grid(block, name):
    spec = block.get(name)
    if isinstance(spec, list):
        return [float(v) for v in spec]
    if isinstance(spec, dict):
        return list(np.linspace(float(spec["start"]), float(spec["stop"]),
                                int(spec["num"])))
    raise ContractError(f"sweep grid {name!r} must be a list or start/stop/num")


def run_evolve(cfg, out, seed, workers):
    block = _require(cfg, "evolve")
    lattice = lattice_from_config(cfg)
    params = params_from_config(cfg)
    ham = build_hamiltonian(lattice, params)
    eig = _solve(ham, k=int(block.get("k", 2)), seed=seed)
    psi0 = eig.eigenvectors[int(block.get("initial_level", 0))]

    kind = block.get("drive", "static_field")
    shift = 0.0
    if kind == "rank2_gate":
        omega = float(block.get("frequency", eig.eigenvalues[1] - eig.eigenvalues[0]))
        drive = DriveSpec(kind="rank2_gate", gate=block.get("gate", "X"),
                          amplitude=float(block.get("amplitude", 0.1 * omega)),
                          frequency=omega,
                          basis_states=(eig.eigenvectors[0], eig.eigenvectors[1]))
        shift = 0.5 * float(eig.eigenvalues[0] + eig.eigenvalues[1])
        basis_pair = (eig.eigenvectors[0], eig.eigenvectors[1])
    elif kind == "gate_field":
        # oscillating Zeeman field realizing the named gate on resonance
        omega = float(block.get("frequency", eig.eigenvalues[1] - eig.eigenvalues[0]))
        drive = gate_field(block.get("gate", "X"),
                           amplitude=float(block.get("amplitude", 1.0)),
                           frequency=omega,
                           gyromagnetic=float(block.get("gyromagnetic", 1.0)))
        basis_pair = (eig.eigenvectors[0], eig.eigenvectors[1]) \
            if len(eig.eigenvectors) > 1 else None
    elif kind in ("static_field", "periodic_field"):
        drive = DriveSpec(kind=kind,
                          field_vector=tuple(block.get("field", (100.0, 0.0, 0.0))),
                          frequency=float(block.get("frequency", 0.0)),
                          gyromagnetic=float(block.get("gyromagnetic", 1.0)))
        basis_pair = (eig.eigenvectors[0], eig.eigenvectors[1]) \
            if len(eig.eigenvectors) > 1 else None
    else:
        raise ContractError(f"unknown drive kind {kind!r}")

    t_final = float(block["t_final"])
    dt = float(block["dt"])
    record = RecordSpec(
        lattice=lattice,
        basis_pair=basis_pair,
        entropy_sites=entropy_partition(lattice, block.get("entropy_partition", "central")),
        charge=block.get("charge"),
        record_every=int(block.get("record_every", 1)),
        track_energy=bool(block.get("track_energy", True)),
    )
    traj = evolve_schrodinger(ham, drive, psi0, t_final, dt, record=record,
                              energy_shift=shift)
    traj.to_csv(os.path.join(out, "trajectory.csv"))
    if block.get("checkpoint_state", False):
        from .operators import save_state
        save_state(os.path.join(out, "final_state.bin"), traj.final_state)
    return {
        "task": "evolve", "drive": kind, "steps": len(traj.times),
        "E0": float(eig.eigenvalues[0]),
        "final_entropy": float(traj.entropy[-1]),
        "final_Sz_c": float(traj.central_spin[-1, 2]),
    }


def run_gate(cfg, out, seed, workers):
    block = _require(cfg, "gate")
    _, _, _, eig, qubit = _qubit_from_config(cfg, seed)
    omega = float(block.get("frequency", qubit.omega0))
    amp = float(block.get("amplitude", 0.1 * qubit.omega0))
    n_periods = float(block.get("n_periods", 1.0))
    psi0 = np.array(block.get("initial", [1.0, 0.0]), dtype=complex)
    psi0 /= np.linalg.norm(psi0)
    traj = evolve_two_level(
        qubit, block.get("gate", "X"), amp, omega, psi0,
        t_final=n_periods * rabi_period(amp),
        record_every=int(block.get("record_every", 1)))
    traj.to_csv(os.path.join(out, "trajectory.csv"))
    _write_json(os.path.join(out, "bloch.json"), {
        "t": [float(v) for v in traj.times],
        "r": [[float(c) for c in row] for row in traj.bloch],
    })
    p2max = float(np.max(traj.populations[:, 1]))
    return {"task": "gate", "gate": block.get("gate", "X"), "omega0": qubit.omega0,
            "amplitude": amp, "p2_max": p2max, "E0": qubit.e1}


def run_lindblad(cfg, out, seed, workers):
    block = _require(cfg, "lindblad")
    _, _, _, eig, qubit = _qubit_from_config(cfg, seed)
    omega = float(block.get("frequency", qubit.omega0))
    amp = float(block.get("amplitude", 0.1 * qubit.omega0))
    t1 = float(block["T1"])
    t2 = float(block["T2"])
    rho0 = np.array(block.get("rho0", [[1, 0], [0, 0]]), dtype=complex)
    t_final = float(block.get("t_final", 3.0 * rabi_period(amp) if amp else 5.0 * t1))
    traj = evolve_lindblad(qubit, block.get("gate", "X"), amp, omega, rho0,
                           t1, t2, t_final,
                           record_every=int(block.get("record_every", 1)))
    traj.to_csv(os.path.join(out, "trajectory.csv"))
    r_final = traj.bloch[-1]
    return {"task": "lindblad", "T1": t1, "T2": t2, "omega0": qubit.omega0,
            "final_bloch_norm": float(np.linalg.norm(r_final))}


def run_readout(cfg, out, seed, workers):
    block = cfg.get("readout", {})
    states = {
        "plus": np.array([1, 1], complex) / math.sqrt(2),
        "minus": np.array([1, -1], complex) / math.sqrt(2),
        "plus_i": np.array([1, 1j], complex) / math.sqrt(2),
        "minus_i": np.array([1, -1j], complex) / math.sqrt(2),
    }
    wanted = block.get("states", list(states))
    results = {}
    for name in wanted:
        basis = "X_basis" if name in ("plus", "minus") else "Y_basis"
        _, pops = readout_rotation(basis, states[name])
        results[name] = {"basis": basis, "p0": pops[0], "p1": pops[1]}
    _write_json(os.path.join(out, "readout.json"), results)
    return {"task": "readout", "states": sorted(results)}


def run_dmi_series(cfg, out, seed, workers):
    block = _require(cfg, "dmi_series")
    lattice = lattice_from_config(cfg)
    params = params_from_config(cfg)
    entries = dmi_series(
        lattice, params, [float(d) for d in block["D_values"]],
        task=block.get("mode", "static"),
        drive_field=float(block.get("drive_field", 100.0)),
        n_periods=float(block.get("n_periods", 25.0)),
        steps_per_period=int(block.get("steps_per_period", 24)),
        seed=seed)
    with open(os.path.join(out, "dmi_series.csv"), "w") as fh:
        fh.write("D,E0,radius,Q_topo,entropy_rate,sz_decay_per_period\n")
        for e in entries:
            rad = "" if e.radius is None else repr(e.radius)
            fh.write(f"{e.D!r},{e.ground_energy!r},{rad},{e.q_topological!r},"
                     f"{e.entropy_rate!r},{e.sz_decay_per_period!r}\n")
    return {"task": "dmi_series", "D_values": [e.D for e in entries],
            "radii": [e.radius for e in entries]}


_RUNNERS = {
    "diagonalize": run_diagonalize,
    "sweep": run_sweep,
    "evolve": run_evolve,
    "gate": run_gate,
    "lindblad": run_lindblad,
    "readout": run_readout,
    "dmi_series": run_dmi_series,
}


def run(cfg: dict, task: str, out_dir: str | None = None, seed: int | None = None,
        workers: int = 1, dump_lattice: bool = False) -> dict:
    """Validate and execute one configured task; returns the summary dict."""
    validate_config(cfg, task)
    out = out_dir or cfg.get("output", {}).get("directory", ".")
    os.makedirs(out, exist_ok=True)
    use_seed = int(cfg.get("seed", 0) if seed is None else seed)
    if dump_lattice:
        with open(os.path.join(out, "lattice.json"), "w") as fh:
            fh.write(lattice_from_config(cfg).to_json() + "\n")
    t0 = time.perf_counter()
    summary = _RUNNERS[task](cfg, out, use_seed, workers)
    summary["seed"] = use_seed
    summary["runtime_s"] = round(time.perf_counter() - t0, 3)
    return summary


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="skyrlab",
        description="Triangular-lattice skyrmion qubit toolkit")
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        name = task.replace("_", "-")
        p = sub.add_parser(name, help=f"run a {name} task from a JSON config")
        p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--workers", type=int, default=1)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--dump-lattice", action="store_true")
    args = parser.parse_args(argv)
    task = args.task.replace("-", "_")
    try:
        cfg = load_config(args.config)
        summary = run(cfg, task, out_dir=args.out, seed=args.seed,
                      workers=args.workers, dump_lattice=args.dump_lattice)
    except ContractError as exc:
        print(f"config/contract error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"convergence failure: {exc}", file=sys.stderr)
        return 3
    except ResourceError as exc:
        print(f"resource refusal: {exc}", file=sys.stderr)
        return 4
    except SkyrlabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(json.dumps(summary, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
