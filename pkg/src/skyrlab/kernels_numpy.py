"""Pure-numpy implementations of the hot Hilbert-space kernels.

Every function here has a numba twin in :mod:`skyrlab.kernels_numba` with
an identical signature; :mod:`skyrlab.kernels` picks one pair at import
time.  The basis convention is little-endian: site ``i`` lives in bit
``i`` of the basis index, bit value 0 is spin-up (+z), and the local
Pauli sign is ``z_i(s) = 1 - 2*bit_i(s)``.

The numpy versions trade memory for vector throughput: index arrays of
the full Hilbert dimension are materialized per term, which is fine as a
fallback and for small lattices.
"""

import numpy as np


def _basis(dim):
    return np.arange(dim, dtype=np.int64)


def ham_apply(psi, out, n_sites, bond_i, bond_j, bond_zz, bond_hop,
              bond_fi, bond_fj, bond_gi, bond_gj, fx, fy, fz, diag_const):
    """out <- H psi for the spin Hamiltonian in gather form.

    Per bond b = (i, j): diagonal ``bond_zz*z_i*z_j``, a flip-flop of
    weight ``bond_hop`` on anti-aligned pairs, and the two single-flip
    DMI amplitudes ``bond_fi*z_i*z_j + bond_gi*z_j`` (flip at i) and
    ``bond_fj*z_i*z_j + bond_gj*z_i`` (flip at j).  Per site: Zeeman
    fields halved into fx, fy, fz.
    """
    dim = psi.shape[0]
    s = _basis(dim)
    out[:] = diag_const * psi
    for i in range(n_sites):
        zi = 1.0 - 2.0 * ((s >> i) & 1)
        if fz[i] != 0.0:
            out -= fz[i] * zi * psi
        if fx[i] != 0.0 or fy[i] != 0.0:
            out += (-fx[i] + 1j * fy[i] * zi) * psi[s ^ (1 << i)]
    for b in range(bond_i.shape[0]):
        i = bond_i[b]
        j = bond_j[b]
        zi = 1.0 - 2.0 * ((s >> i) & 1)
        zj = 1.0 - 2.0 * ((s >> j) & 1)
        zz = zi * zj
        if bond_zz[b] != 0.0:
            out += bond_zz[b] * zz * psi
        if bond_hop[b] != 0.0:
            # 0.5*(1-zz) selects anti-aligned pairs without a mask copy
            out += bond_hop[b] * 0.5 * (1.0 - zz) * psi[s ^ ((1 << i) | (1 << j))]
        if bond_fi[b] != 0.0 or bond_gi[b] != 0.0:
            out += (bond_fi[b] * zz + bond_gi[b] * zj) * psi[s ^ (1 << i)]
        if bond_fj[b] != 0.0 or bond_gj[b] != 0.0:
            out += (bond_fj[b] * zz + bond_gj[b] * zi) * psi[s ^ (1 << j)]
    return out


def site_sigma_apply(psi, out, site, axis):
    """out <- sigma_axis^site psi (bare Pauli, not spin-1/2)."""
    dim = psi.shape[0]
    s = _basis(dim)
    if axis == 2:
        z = 1.0 - 2.0 * ((s >> site) & 1)
        out[:] = z * psi
    else:
        flipped = psi[s ^ (1 << site)]
        if axis == 0:
            out[:] = flipped
        else:
            z = 1.0 - 2.0 * ((s >> site) & 1)
            out[:] = -1j * z * flipped
    return out


def pauli_string_expect(psi, flip_mask, sign_mask, base):
    """<psi| P |psi> for a Pauli string.

    ``flip_mask`` collects the x/y sites, ``sign_mask`` the y/z sites,
    and ``base`` carries the accumulated (-i)^n_y prefactor.
    """
    dim = psi.shape[0]
    s = _basis(dim)
    sgn = 1.0 - 2.0 * (np.bitwise_count(s & sign_mask) & np.int64(1))
    return base * np.sum(np.conj(psi) * sgn * psi[s ^ flip_mask])
