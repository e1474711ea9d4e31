"""Independent dense oracles for the test suite.

Everything here is built the slow, obvious way -- explicit Kronecker
embeddings, dense matrix exponentials, brute-force pair enumeration --
so the matrix-free kernels, the Lanczos solver, and the structured
propagators are checked against arithmetic that shares none of their
code paths.
"""

import numpy as np
import scipy.linalg

SX = np.array([[0, 1], [1, 0]], dtype=complex) / 2
SY = np.array([[0, -1j], [1j, 0]], dtype=complex) / 2
SZ = np.array([[1, 0], [0, -1]], dtype=complex) / 2
ID2 = np.eye(2, dtype=complex)


def site_spin_matrix(n_sites, site, axis):
    """Dense S_axis on `site` with the package's little-endian bit layout."""
    op = {0: SX, 1: SY, 2: SZ}[axis] if isinstance(axis, int) else \
        {"x": SX, "y": SY, "z": SZ}[axis]
    mats = [ID2] * n_sites
    mats[n_sites - 1 - site] = op  # bit i of the index is site i
    out = np.array([[1.0 + 0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def dense_hamiltonian(lattice, params):
    """Eq.-by-eq dense Hamiltonian via Kronecker products."""
    n = lattice.n_sites
    dim = 2 ** n
    spins = [[site_spin_matrix(n, i, a) for a in range(3)] for i in range(n)]
    ham = np.zeros((dim, dim), dtype=complex)
    k_bond = params.K if params.anisotropy_mode == "bond" else 0.0
    for b in lattice.bonds:
        si, sj = spins[b.i], spins[b.j]
        for a in range(3):
            ham += params.J * si[a] @ sj[a]
        cross = (si[1] @ sj[2] - si[2] @ sj[1],
                 si[2] @ sj[0] - si[0] @ sj[2],
                 si[0] @ sj[1] - si[1] @ sj[0])
        for a in range(3):
            ham += params.D * b.dmi[a] * cross[a]
        ham += k_bond * si[2] @ sj[2]
    for i in range(n):
        for a in range(3):
            ham -= params.B[a] * spins[i][a]
        if params.anisotropy_mode == "onsite":
            ham += params.K * spins[i][2] @ spins[i][2]
    return ham


def dense_propagate(h_of_t, psi0, t_final, n_steps):
    """Midpoint-Magnus stepping with explicit dense exponentials."""
    dt = t_final / n_steps
    psi = np.asarray(psi0, dtype=complex).copy()
    for step in range(n_steps):
        t_mid = (step + 0.5) * dt
        psi = scipy.linalg.expm(-1j * dt * h_of_t(t_mid)) @ psi
    return psi


def brute_force_bond_count(lattice):
    """Count unit-distance site pairs (minimum image under PBC)."""
    count = 0
    for i in range(lattice.n_sites):
        for j in range(i + 1, lattice.n_sites):
            d = lattice.neighbor_displacement(i, j)
            if abs(d @ d - 1.0) < 1e-9:
                count += 1
    return count


def brute_structure_factor(psi, lattice, qvecs):
    """Double loop over site pairs with dense two-site correlators."""
    n = lattice.n_sites
    spins = [[site_spin_matrix(n, i, a) for a in range(3)] for i in range(n)]
    corr = np.empty((3, n, 3, n), dtype=complex)
    for a in range(3):
        for r in range(n):
            for b in range(3):
                for rp in range(n):
                    op = 0.5 * (spins[r][a] @ spins[rp][b]
                                + spins[rp][b] @ spins[r][a])
                    corr[a, r, b, rp] = np.vdot(psi, op @ psi)
    out = np.empty((3, 3, len(qvecs)), dtype=complex)
    for iq, q in enumerate(qvecs):
        phase = np.exp(1j * (lattice.positions @ q))
        for a in range(3):
            for b in range(3):
                acc = 0.0j
                for r in range(n):
                    for rp in range(n):
                        acc += (np.conj(phase[r]) * phase[rp]
                                * corr[a, r, b, rp])
                out[a, b, iq] = acc
    return out


def dense_entropy_density(psi, n_sites, subsystem):
    """Entropy via the full density matrix and an explicit partial trace."""
    sites = sorted(subsystem)
    rest = [s for s in range(n_sites) if s not in sites]
    rho = np.outer(psi, psi.conj())
    dim_a = 2 ** len(sites)
    rho_a = np.zeros((dim_a, dim_a), dtype=complex)
    for s in range(2 ** n_sites):
        for sp in range(2 ** n_sites):
            if any((s >> r) & 1 != (sp >> r) & 1 for r in rest):
                continue
            a = sum(((s >> site) & 1) << pos for pos, site in enumerate(sites))
            ap = sum(((sp >> site) & 1) << pos for pos, site in enumerate(sites))
            rho_a[a, ap] += rho[s, sp]
    evals = np.linalg.eigvalsh(rho_a)
    evals = evals[evals > 1e-14]
    return float(-np.sum(evals * np.log(evals)) / len(sites))
