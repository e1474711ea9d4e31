"""skyrlab: exact diagonalization and gate dynamics for skyrmion qubits.

Triangular spin-1/2 lattices with Dzyaloshinskii-Moriya interaction:
phase diagrams (helical / skyrmionic / fully polarized), static
observables, and qubit gate simulations at three fidelity levels
(precessional field drive, projected two-level with Lindblad
decoherence, full-Hilbert rank-2 photonic drive).
"""

from .errors import (ContractError, ConvergenceError, DegenerateInputError,
                     IntegratorError, ResourceError, SkyrlabError)
from .kernels import BACKEND
from .lattice import Bond, SpinLattice, build_triangular, dmi_vector, elementary_triangles
from .operators import (CouplingParams, SparseOperator, apply, basis_state,
                        build_hamiltonian, load_state, random_state, save_state,
                        site_spin_operator, zeeman_drive_operator)
from .eigensolver import EigenResult, dense_spectrum, lanczos_lowest
from .observables import (SpinField, StructureFactorGrid,
                          entanglement_entropy_density, entropy_partition,
                          neutron_cross_section, onsite_energy_density,
                          onsite_spin_expectation, reduced_density_matrix,
                          scalar_chirality, skyrmion_radius, structure_factor,
                          topological_charge)
from .dynamics import (DriveSpec, RecordSpec, TrajectoryRecord,
                       evolve_schrodinger, full_gate_operator, gate_field,
                       logical_bloch_vector)
from .twolevel import (QubitSystem, bell_circuit, evolve_lindblad,
                       evolve_two_level, gate_matrix, pi_pulse_duration,
                       project_two_level, rabi_period, readout_rotation,
                       rwa_hamiltonian)
from .sweep import (DmiPoint, PhasePoint, classify_phase, dmi_series,
                    run_phase_diagram, solve_point)

__version__ = "0.1.0"
