"""The projected two-level qubit and its coherent / dissipative dynamics.

The qubit lives in the span of the lattice ground and first excited
states: H0 = diag(E1, E2) with basis index 0 = ground = north pole of
the Bloch sphere.  Gates enter as H(t) = H0 + A cos(wt) H_gate with the
standard 2x2 gate matrices.  Coherent evolution uses the same
commutator-free Magnus scheme as the full-space propagator with exact
2x2 exponentials; open-system evolution integrates the Lindblad master
equation with fixed-step RK4 on the vectorized density matrix.

Decoherence channels: relaxation L1 = sqrt(gamma1)|0><1| with
gamma1 = 1/T1, and pure dephasing via sigma_z with rate
gamma_phi = 1/T2 - 1/(2 T1), scaled so the coherence decays exactly as
exp(-t/T2).  T2 <= 2 T1 is enforced (positivity of gamma_phi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import TrajectoryRecord, normalize_gate_name
from .eigensolver import EigenResult
from .errors import ContractError, DegenerateInputError
from .observables import entanglement_entropy_density

_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=np.complex128)
_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=np.complex128)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=np.complex128)
_ID2 = np.eye(2, dtype=np.complex128)

# CF4 nodes/weights (same scheme as dynamics)
_C1 = 0.5 - math.sqrt(3.0) / 6.0
_C2 = 0.5 + math.sqrt(3.0) / 6.0
_WA = 0.25 + math.sqrt(3.0) / 6.0
_WB = 0.25 - math.sqrt(3.0) / 6.0


@dataclass(frozen=True)
class QubitSystem:
    """Two lowest levels of a diagonalized lattice point."""

    e1: float
    e2: float
    provenance: str = ""

    def __post_init__(self):
        if not self.e2 > self.e1:
            raise ContractError("qubit needs E2 > E1 strictly")

    @property
    def omega0(self) -> float:
        return self.e2 - self.e1

    @property
    def h0(self) -> np.ndarray:
        return np.diag([self.e1, self.e2]).astype(np.complex128)


def project_two_level(eigs: EigenResult, tol_degeneracy: float | None = None,
                      provenance: str = "") -> QubitSystem:
    """Qubit from the two lowest eigenpairs; degenerate pairs are rejected."""
    if len(eigs.eigenvalues) < 2:
        raise ContractError("need at least 2 converged eigenpairs")
    gap_tol = eigs.tol_degeneracy if tol_degeneracy is None else tol_degeneracy
    e1, e2 = float(eigs.eigenvalues[0]), float(eigs.eigenvalues[1])
    if e2 - e1 <= gap_tol:
        raise DegenerateInputError(
            f"no isolated qubit at this parameter point: gap {e2 - e1:.3e}"
        )
    return QubitSystem(e1, e2, provenance)


def gate_matrix(gate: str) -> np.ndarray:
    """Standard 2x2 gate Hamiltonians (X, Y, Z, Hadamard)."""
    name = normalize_gate_name(gate)
    if name == "X":
        return _SIGMA_X.copy()
    if name == "Y":
        return _SIGMA_Y.copy()
    if name == "Z":
        return _SIGMA_Z.copy()
    return (_SIGMA_X + _SIGMA_Z) / math.sqrt(2.0)


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """R_axis(theta) = exp(-i theta sigma_axis / 2)."""
    sigma = {"x": _SIGMA_X, "y": _SIGMA_Y, "z": _SIGMA_Z}[axis]
    return math.cos(angle / 2) * _ID2 - 1.0j * math.sin(angle / 2) * sigma


def composite_hadamard() -> np.ndarray:
    """Hadamard as the composite pulse R_z(pi/2) R_x(pi/2) R_z(pi/2).

    Equals gate_matrix("H") up to a global phase (an x-axis middle
    rotation is the identity that works; a y-axis one is not a
    Hadamard for any global phase).
    """
    rz = rotation_matrix("z", math.pi / 2)
    rx = rotation_matrix("x", math.pi / 2)
    return rz @ rx @ rz


def rwa_hamiltonian(detuning: float, rabi: float, gate: str) -> np.ndarray:
    """Rotating-frame effective Hamiltonian (Delta/2) sigma_z + (Omega_R/2) H_gate."""
    return 0.5 * detuning * _SIGMA_Z + 0.5 * rabi * gate_matrix(gate)


def pi_pulse_duration(field_amplitude: float, gyromagnetic: float = 1.0) -> float:
    """Resonant pi-pulse length 2 pi / (gamma B0) (Rabi rate gamma B0 / 2)."""
    if field_amplitude == 0.0 or gyromagnetic == 0.0:
        raise ContractError("pi pulse needs nonzero field and gyromagnetic ratio")
    return 2.0 * math.pi / (gyromagnetic * abs(field_amplitude))


def rabi_period(amplitude: float) -> float:
    """RWA Rabi period 2 pi / Omega_R with Omega_R = A."""
    if amplitude == 0.0:
        raise ContractError("Rabi period undefined at zero amplitude")
    return 2.0 * math.pi / abs(amplitude)


def refine_rabi_period(traj: TrajectoryRecord) -> float:
    """Rabi period from the first maximum of the excited population."""
    p2 = traj.populations[:, 1]
    if np.all(np.isnan(p2)):
        raise ContractError("trajectory has no recorded populations")
    idx = int(np.nanargmax(p2))
    return 2.0 * float(traj.times[idx])


def _expm_2x2(mat: np.ndarray) -> np.ndarray:
    """exp(-i mat) for Hermitian 2x2 via the su(2) closed form."""
    a0 = 0.5 * (mat[0, 0] + mat[1, 1]).real
    bx = mat[0, 1].real
    by = -mat[0, 1].imag
    bz = 0.5 * (mat[0, 0] - mat[1, 1]).real
    r = math.sqrt(bx * bx + by * by + bz * bz)
    phase = complex(math.cos(a0), -math.sin(a0))
    if r < 1e-300:
        return phase * _ID2
    ndot = (bx * _SIGMA_X + by * _SIGMA_Y + bz * _SIGMA_Z) / r
    return phase * (math.cos(r) * _ID2 - 1.0j * math.sin(r) * ndot)


def _bloch_of_state(c: np.ndarray) -> np.ndarray:
    w = np.conj(c[0]) * c[1]
    return np.array([2.0 * w.real, 2.0 * w.imag,
                     float(abs(c[0]) ** 2 - abs(c[1]) ** 2)])


def _pack_record(times, blochs, pops, energy) -> TrajectoryRecord:
    times = np.asarray(times)
    blochs = np.asarray(blochs)
    pops = np.asarray(pops)
    m = len(times)
    return TrajectoryRecord(
        times=times,
        bloch=blochs,
        central_spin=0.5 * blochs,   # <S_alpha> = sigma_alpha / 2 on the qubit
        energy=np.asarray(energy),
        entropy=np.full(m, np.nan),
        charge=np.full(m, np.nan),
        populations=pops,
        leakage=np.zeros(m),
    )


def _auto_dt(scales, steps_per_period: int = 200) -> float:
    fastest = max(abs(s) for s in scales if s is not None)
    fastest = max(fastest, 1e-12)
    return 2.0 * math.pi / fastest / steps_per_period


def evolve_two_level(qubit: QubitSystem, gate: str, amplitude: float,
                     omega: float, psi0: np.ndarray, t_final: float,
                     dt: float | None = None,
                     record_every: int = 1) -> TrajectoryRecord:
    """Coherent evolution under H0 + A cos(wt) H_gate (CF4, exact 2x2 exps)."""
    psi = np.asarray(psi0, dtype=np.complex128).copy()
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ContractError("psi0 must be normalized")
    if dt is None:
        dt = _auto_dt((omega, qubit.omega0, amplitude))
    n_steps = max(1, int(round(t_final / dt)))
    dt = t_final / n_steps
    h0 = qubit.h0
    hg = gate_matrix(gate)

    times = [0.0]
    blochs = [_bloch_of_state(psi)]
    pops = [(abs(psi[0]) ** 2, abs(psi[1]) ** 2)]
    energy = [float(np.vdot(psi, h0 @ psi).real)]
    for step in range(1, n_steps + 1):
        t_prev = (step - 1) * dt
        f1 = amplitude * math.cos(omega * (t_prev + _C1 * dt))
        f2 = amplitude * math.cos(omega * (t_prev + _C2 * dt))
        for wa, wb in ((_WA, _WB), (_WB, _WA)):
            gen = dt * (0.5 * h0 + (wa * f1 + wb * f2) * hg)
            psi = _expm_2x2(gen) @ psi
        if step % record_every == 0 or step == n_steps:
            times.append(step * dt)
            blochs.append(_bloch_of_state(psi))
            pops.append((abs(psi[0]) ** 2, abs(psi[1]) ** 2))
            energy.append(float(np.vdot(psi, h0 @ psi).real))
    rec = _pack_record(times, blochs, pops, energy)
    rec.final_state = psi
    return rec


def _dissipator_superop(t1: float, t2: float) -> np.ndarray:
    """Vectorized (row-major) Lindblad dissipator for the two channels."""
    gamma1 = 1.0 / t1
    gamma_phi = max(0.0, 1.0 / t2 - 0.5 / t1)  # clip the T2 = 2 T1 boundary
    l1 = math.sqrt(gamma1) * np.array([[0.0, 1.0], [0.0, 0.0]], dtype=np.complex128)
    # sqrt(gamma_phi/2) sigma_z makes |rho01| decay exactly at 1/T2
    l2 = math.sqrt(0.5 * gamma_phi) * _SIGMA_Z
    sup = np.zeros((4, 4), dtype=np.complex128)
    for lop in (l1, l2):
        ldl = lop.conj().T @ lop
        sup += np.kron(lop, lop.conj())
        sup -= 0.5 * (np.kron(ldl, _ID2) + np.kron(_ID2, ldl.T))
    return sup


def _hamiltonian_superop(mat: np.ndarray) -> np.ndarray:
    return -1.0j * (np.kron(mat, _ID2) - np.kron(_ID2, mat.T))


def check_density_matrix(rho: np.ndarray, tol: float = 1e-9) -> None:
    if rho.shape != (2, 2):
        raise ContractError("density matrix must be 2x2")
    if abs(np.trace(rho) - 1.0) > tol:
        raise ContractError("density matrix must have unit trace")
    if np.max(np.abs(rho - rho.conj().T)) > tol:
        raise ContractError("density matrix must be Hermitian")
    if np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))) < -tol:
        raise ContractError("density matrix must be positive semidefinite")


def evolve_lindblad(qubit: QubitSystem, gate: str, amplitude: float,
                    omega: float, rho0: np.ndarray, t1: float, t2: float,
                    t_final: float, dt: float | None = None,
                    record_every: int = 1) -> TrajectoryRecord:
    """Lindblad evolution of the driven qubit (fixed-step RK4).

    Requires T1 > 0 and 0 < T2 <= 2 T1; trace is preserved by the
    equation and monitored, and the Bloch vector satisfies |r| <= 1.
    """
    if not t1 > 0:
        raise ContractError("T1 must be positive")
    if not 0 < t2 <= 2.0 * t1 + 1e-12:
        raise ContractError("need 0 < T2 <= 2*T1 (positivity of dephasing rate)")
    rho0 = np.asarray(rho0, dtype=np.complex128)
    check_density_matrix(rho0)

    if dt is None:
        dt = _auto_dt((omega, qubit.omega0, amplitude, 1.0 / t1, 1.0 / t2))
    n_steps = max(1, int(round(t_final / dt)))
    dt = t_final / n_steps

    sup0 = _hamiltonian_superop(qubit.h0) + _dissipator_superop(t1, t2)
    sup_gate = _hamiltonian_superop(gate_matrix(gate))
    h0 = qubit.h0

    def rhs(t, v):
        return sup0 @ v + (amplitude * math.cos(omega * t)) * (sup_gate @ v)

    v = rho0.reshape(4).copy()
    sigma_vec = np.stack([_SIGMA_X.reshape(4), _SIGMA_Y.reshape(4),
                          _SIGMA_Z.reshape(4)])

    def snapshot(t, v):
        rho = v.reshape(2, 2)
        bl = np.array([np.trace(s.reshape(2, 2).conj().T @ rho).real
                       for s in sigma_vec])
        pops = (float(rho[0, 0].real), float(rho[1, 1].real))
        en = float(np.trace(h0 @ rho).real)
        return bl, pops, en

    times = [0.0]
    bl, pp, en = snapshot(0.0, v)
    blochs, pops, energy = [bl], [pp], [en]
    for step in range(1, n_steps + 1):
        t = (step - 1) * dt
        k1 = rhs(t, v)
        k2 = rhs(t + 0.5 * dt, v + 0.5 * dt * k1)
        k3 = rhs(t + 0.5 * dt, v + 0.5 * dt * k2)
        k4 = rhs(t + dt, v + dt * k3)
        v = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if step % record_every == 0 or step == n_steps:
            times.append(step * dt)
            bl, pp, en = snapshot(step * dt, v)
            blochs.append(bl)
            pops.append(pp)
            energy.append(en)
    rec = _pack_record(times, blochs, pops, energy)
    rec.final_state = v.reshape(2, 2)
    return rec


# -- readout and the ideal two-qubit circuit ----------------------------------

def readout_rotation(target_basis: str, psi: np.ndarray
                     ) -> tuple[np.ndarray, tuple[float, float]]:
    """Rotate |+->/|+i,-i> onto the energy basis and report populations.

    X_basis uses the Hadamard (|+> -> |0>, |-> -> |1>); Y_basis uses the
    x-rotation that maps |+i> -> |0> and |-i> -> |1>.  The populations
    are what a projective energy measurement (resonant-photon
    absorption) would sample.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    if abs(np.linalg.norm(psi) - 1.0) > 1e-9:
        raise ContractError("psi must be normalized")
    if target_basis == "X_basis":
        rot = gate_matrix("H")
    elif target_basis == "Y_basis":
        rot = np.array([[1.0, -1.0j], [-1.0j, 1.0]], dtype=np.complex128) / math.sqrt(2.0)
    else:
        raise ContractError(f"unknown readout basis {target_basis!r}")
    rotated = rot @ psi
    return rotated, (float(abs(rotated[0]) ** 2), float(abs(rotated[1]) ** 2))


def cnot_matrix() -> np.ndarray:
    """CNOT with the first qubit as control, basis order 00,01,10,11."""
    mat = np.eye(4, dtype=np.complex128)
    mat[[2, 3]] = mat[[3, 2]]
    return mat


def bell_circuit() -> np.ndarray:
    """(H x I) then CNOT on |00>: the Bell state (|00> + |11>)/sqrt(2)."""
    psi = np.zeros(4, dtype=np.complex128)
    psi[0] = 1.0
    h_on_control = np.kron(gate_matrix("H"), _ID2)
    return cnot_matrix() @ (h_on_control @ psi)


def bell_qubit_entropy() -> float:
    """Single-qubit entanglement entropy of the Bell circuit output."""
    return entanglement_entropy_density(bell_circuit(), [0], n_sites=2)
