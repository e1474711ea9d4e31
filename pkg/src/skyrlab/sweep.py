"""Phase-diagram grids and comparative DMI series.

Each (J, B) grid point is an independent ground-state solve (dense
below 4096 dimensions, Lanczos above) followed by the standard
observables.  Points are dispatched row-major to a process pool; the
collector places results by grid index, so the output is identical for
any worker count, and point failures are recorded in the row instead of
aborting the sweep.  Long grids flush finished points to a checkpoint
CSV that a rerun resumes from.
"""

from __future__ import annotations

import math
import multiprocessing
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import DriveSpec, RecordSpec, evolve_schrodinger
from .eigensolver import DENSE_DIM_LIMIT, dense_spectrum, lanczos_lowest
from .errors import DegenerateInputError, SkyrlabError
from .lattice import SpinLattice, build_triangular
from .observables import (entanglement_entropy_density, entropy_partition,
                          onsite_spin_expectation, scalar_chirality,
                          skyrmion_radius, topological_charge)
from .operators import CouplingParams, build_hamiltonian

PHASES = ("Helical", "Skyrmion", "FullyPolarized", "Unclassified")


@dataclass
class PhasePoint:
    """Ground-state observables at one (J, B) grid point."""

    J: float
    B: float
    K: float
    boundary: str
    q_chirality: float = math.nan
    q_topological: float = math.nan
    mean_sz: float = math.nan
    central_sz: float = math.nan
    entropy_density: float = math.nan
    ground_energy: float = math.nan
    degeneracy: int = 0
    phase: str = "Unclassified"
    error: str | None = None

    CSV_HEADER = ("J,B,K,boundary,Q_chir,Q_topo,mean_Sz,central_Sz,S_ent,"
                  "E0,degeneracy,phase")

    def csv_row(self) -> str:
        fields = [repr(float(self.J)), repr(float(self.B)), repr(float(self.K)),
                  self.boundary, repr(self.q_chirality), repr(self.q_topological),
                  repr(self.mean_sz), repr(self.central_sz),
                  repr(self.entropy_density), repr(self.ground_energy),
                  str(self.degeneracy), self.phase]
        return ",".join(fields)


def classify_phase(point: PhasePoint, eps_fp: float = 0.05,
                   eps_sk: float = 0.1) -> str:
    """Threshold classification into Helical / Skyrmion / FullyPolarized.

    PBC uses the chirality plateau and ground degeneracy; OBC uses the
    real-space winding number window [0.8, 1.2].
    """
    if point.error is not None:
        return "Unclassified"
    if point.boundary == "OBC":
        if math.isfinite(point.q_topological) and 0.8 <= point.q_topological <= 1.2:
            return "Skyrmion"
        if point.mean_sz > 0.5 - eps_fp:
            return "FullyPolarized"
        return "Unclassified"
    q = point.q_chirality
    if point.mean_sz > 0.5 - eps_fp and abs(q) < eps_fp:
        return "FullyPolarized"
    if abs(q - 0.5) < eps_sk:
        return "Skyrmion"
    if q < 0.5 - eps_sk and (point.degeneracy > 1 or point.mean_sz < 0.5 - eps_fp):
        return "Helical"
    return "Unclassified"


def solve_point(lattice: SpinLattice, j: float, b: float, k: float,
                anisotropy_mode: str = "onsite", seed: int = 0,
                k_pairs: int = 7, tol: float = 1e-8,
                eps_fp: float = 0.05, eps_sk: float = 0.1) -> PhasePoint:
    """Ground-state solve plus observables at one parameter point."""
    point = PhasePoint(J=j, B=b, K=k, boundary=lattice.boundary)
    try:
        params = CouplingParams(J=j, B=(0.0, 0.0, b), K=k,
                                anisotropy_mode=anisotropy_mode)
        ham = build_hamiltonian(lattice, params)
        if ham.dim <= DENSE_DIM_LIMIT:
            eig = dense_spectrum(ham)
        else:
            eig = lanczos_lowest(ham, k=min(k_pairs, ham.dim), tol=tol, seed=seed)
        ground = eig.eigenvectors[0]
        point.ground_energy = float(eig.eigenvalues[0])
        point.degeneracy = eig.ground_degeneracy
        spin_field = onsite_spin_expectation(ground, lattice)
        point.mean_sz = spin_field.mean_sz()
        point.central_sz = float(spin_field.sz[lattice.center_index])
        try:
            point.q_chirality = scalar_chirality(ground, lattice)
        except DegenerateInputError:
            point.q_chirality = math.nan
        try:
            point.q_topological = topological_charge(
                spin_field, lattice.default_charge_path())
        except (DegenerateInputError, SkyrlabError):
            point.q_topological = math.nan
        point.entropy_density = entanglement_entropy_density(
            ground, entropy_partition(lattice, "half"), lattice.n_sites)
        point.phase = classify_phase(point, eps_fp, eps_sk)
    except SkyrlabError as exc:
        point.error = f"{type(exc).__name__}: {exc}"
        point.phase = "Unclassified"
    return point


def _point_task(args):
    (n_shells, boundary, j, b, k, mode, seed, k_pairs, tol) = args
    lattice = build_triangular(n_shells, boundary)
    return solve_point(lattice, j, b, k, mode, seed, k_pairs, tol)


def run_phase_diagram(lattice: SpinLattice, j_grid, b_grid, k: float = 0.0,
                      workers: int = 1, seed: int = 0, k_pairs: int = 7,
                      anisotropy_mode: str = "onsite", tol: float = 1e-8,
                      checkpoint_path: str | None = None,
                      flush_every: int | None = None) -> list[PhasePoint]:
    """Row-major (J outer, B inner) grid of ground-state phase points.

    Per-point seeds derive from the base seed and the grid index, so the
    result is independent of the worker count.  With a checkpoint path,
    finished points stream to disk and a rerun resumes after the last
    complete row.
    """
    j_grid = [float(j) for j in j_grid]
    b_grid = [float(b) for b in b_grid]
    if not j_grid or not b_grid:
        raise SkyrlabError("grids must be nonempty")
    if sorted(j_grid) != j_grid or sorted(b_grid) != b_grid:
        raise SkyrlabError("grids must be sorted ascending")

    tasks = []
    for idx_j, j in enumerate(j_grid):
        for idx_b, b in enumerate(b_grid):
            point_seed = seed + 7919 * (idx_j * len(b_grid) + idx_b)
            tasks.append((lattice.n_shells, lattice.boundary, j, b, k,
                          anisotropy_mode, point_seed, k_pairs, tol))

    done: list[PhasePoint | None] = [None] * len(tasks)
    start_at = 0
    if checkpoint_path and os.path.exists(checkpoint_path):
        resumed = read_phase_csv(checkpoint_path)
        for i, p in enumerate(resumed[: len(tasks)]):
            done[i] = p
        start_at = len(resumed)

    pending = list(range(start_at, len(tasks)))
    if flush_every is None:
        flush_every = len(b_grid)

    def flush(upto):
        if not checkpoint_path:
            return
        with open(checkpoint_path, "w") as fh:
            fh.write(PhasePoint.CSV_HEADER + "\n")
            for p in done[:upto]:
                fh.write(p.csv_row() + "\n")

    if workers <= 1:
        for count, i in enumerate(pending, 1):
            done[i] = _point_task(tasks[i])
            if count % flush_every == 0:
                flush(start_at + count)
    else:
        # spawn: forking after numba's OpenMP layer initializes is unsafe
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            for count, (i, point) in enumerate(
                    zip(pending, pool.map(_point_task,
                                          [tasks[i] for i in pending])), 1):
                done[i] = point
                if count % flush_every == 0:
                    flush(start_at + count)
    flush(len(tasks))
    return done  # type: ignore[return-value]


def write_phase_csv(path, points: list[PhasePoint]) -> None:
    with open(path, "w") as fh:
        fh.write(PhasePoint.CSV_HEADER + "\n")
        for p in points:
            fh.write(p.csv_row() + "\n")


def read_phase_csv(path) -> list[PhasePoint]:
    points = []
    with open(path) as fh:
        header = fh.readline()
        if header.strip() != PhasePoint.CSV_HEADER:
            raise SkyrlabError(f"unrecognized checkpoint header in {path}")
        for line in fh:
            parts = line.strip().split(",")
            if len(parts) != 12:
                continue
            points.append(PhasePoint(
                J=float(parts[0]), B=float(parts[1]), K=float(parts[2]),
                boundary=parts[3], q_chirality=float(parts[4]),
                q_topological=float(parts[5]), mean_sz=float(parts[6]),
                central_sz=float(parts[7]), entropy_density=float(parts[8]),
                ground_energy=float(parts[9]), degeneracy=int(parts[10]),
                phase=parts[11]))
    return points


# -- comparative DMI series ----------------------------------------------------

@dataclass
class DmiPoint:
    """One entry of a DMI-strength series."""

    D: float
    ground_energy: float = math.nan
    radius: float | None = None
    q_topological: float = math.nan
    entropy_rate: float = math.nan          # fitted initial slope of S_ent(t)
    sz_decay_per_period: float = math.nan   # fractional |<S_z_c>| envelope loss
    error: str | None = None


def _period_blocks(times: np.ndarray, values: np.ndarray, period: float):
    """Split a uniformly sampled series into whole-period blocks."""
    times = np.asarray(times)
    values = np.asarray(values)
    n_per = max(1, int(round(period / (times[1] - times[0]))))
    n_blocks = len(values) // n_per
    return values[: n_blocks * n_per].reshape(n_blocks, n_per)


def entropy_growth_rate(times: np.ndarray, entropy: np.ndarray,
                        period: float) -> float:
    """Initial growth rate of the period-averaged entropy, per period.

    The raw signal oscillates at the precession frequency; the trend
    lives in the per-period means.  Fitted over the first half of the
    run.
    """
    means = _period_blocks(times, entropy, period).mean(axis=1)
    m = max(3, len(means) // 2)
    if len(means) < 3:
        return math.nan
    coef = np.polyfit(np.arange(m), means[:m], 1)
    return float(coef[0])


def envelope_decay_per_period(times: np.ndarray, signal: np.ndarray,
                              period: float) -> float:
    """Per-period fractional decay of the |signal| envelope.

    Log-linear fit to the per-period maxima of |signal|; positive
    values mean the envelope shrinks.
    """
    peaks = np.abs(_period_blocks(times, signal, period)).max(axis=1)
    keep = peaks > 1e-9
    if keep.sum() < 3:
        return math.nan
    slope = np.polyfit(np.arange(len(peaks))[keep], np.log(peaks[keep]), 1)[0]
    return float(1.0 - math.exp(slope))


def dmi_series(lattice: SpinLattice, base_params: CouplingParams, d_values,
               task: str = "static", drive_field: float = 100.0,
               n_periods: float = 8.0, steps_per_period: int = 24,
               seed: int = 0, k_pairs: int = 2) -> list[DmiPoint]:
    """Repeat a static solve or an X-gate precessional run per DMI value.

    All couplings except D stay fixed; D_values must be positive and
    ascending.  The dynamics variant drives the skyrmion with a static
    transverse field and reports the entropy growth rate of the central
    spin and the per-period decay of its |<S_z>| envelope.
    """
    d_values = [float(d) for d in d_values]
    if any(d <= 0 for d in d_values) or sorted(d_values) != d_values:
        raise SkyrlabError("D values must be positive and ascending")
    if task not in ("static", "dynamics"):
        raise SkyrlabError(f"unknown dmi_series task {task!r}")

    results = []
    for idx, d in enumerate(d_values):
        entry = DmiPoint(D=d)
        try:
            params = replace(base_params, D=d)
            ham = build_hamiltonian(lattice, params)
            if ham.dim <= DENSE_DIM_LIMIT:
                eig = dense_spectrum(ham)
            else:
                eig = lanczos_lowest(ham, k=k_pairs, seed=seed + idx)
            ground = eig.eigenvectors[0]
            entry.ground_energy = float(eig.eigenvalues[0])
            spin_field = onsite_spin_expectation(ground, lattice)
            if lattice.boundary == "OBC":
                entry.radius = skyrmion_radius(spin_field, lattice)
            try:
                entry.q_topological = topological_charge(
                    spin_field, lattice.default_charge_path())
            except (DegenerateInputError, SkyrlabError):
                pass
            if task == "dynamics":
                period = 2.0 * math.pi / abs(drive_field)
                drive = DriveSpec(kind="static_field",
                                  field_vector=(drive_field, 0.0, 0.0))
                rec = RecordSpec(lattice=lattice,
                                 entropy_sites=entropy_partition(lattice, "central"),
                                 track_energy=False)
                traj = evolve_schrodinger(
                    ham, drive, ground, t_final=n_periods * period,
                    dt=period / steps_per_period, record=rec)
                entry.entropy_rate = entropy_growth_rate(
                    traj.times, traj.entropy, period)
                entry.sz_decay_per_period = envelope_decay_per_period(
                    traj.times, traj.central_spin[:, 2], period)
        except SkyrlabError as exc:
            entry.error = f"{type(exc).__name__}: {exc}"
        results.append(entry)
    return results
