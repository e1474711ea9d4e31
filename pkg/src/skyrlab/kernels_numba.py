"""Numba-compiled twins of the kernels in :mod:`skyrlab.kernels_numpy`.

`ham_apply` and `site_sigma_apply` are elementwise over output entries,
so the parallel loops are bitwise deterministic for any thread count.
`pauli_string_expect` is a reduction and stays serial on purpose: a
fixed summation order keeps repeated runs byte-identical.
"""

import numba
import numpy as np
from numba import njit, prange


@njit(inline="always")
def _parity(x):
    x ^= x >> 32
    x ^= x >> 16
    x ^= x >> 8
    x ^= x >> 4
    x ^= x >> 2
    x ^= x >> 1
    return x & 1


@njit(cache=True, parallel=True)
def ham_apply(psi, out, n_sites, bond_i, bond_j, bond_zz, bond_hop,
              bond_fi, bond_fj, bond_gi, bond_gj, fx, fy, fz, diag_const):
    dim = psi.shape[0]
    nb = bond_i.shape[0]
    for s in prange(dim):
        acc = diag_const * psi[s]
        for i in range(n_sites):
            zi = 1.0 - 2.0 * ((s >> i) & 1)
            if fz[i] != 0.0:
                acc -= fz[i] * zi * psi[s]
            if fx[i] != 0.0 or fy[i] != 0.0:
                acc += (-fx[i] + 1j * fy[i] * zi) * psi[s ^ (1 << i)]
        for b in range(nb):
            i = bond_i[b]
            j = bond_j[b]
            zi = 1.0 - 2.0 * ((s >> i) & 1)
            zj = 1.0 - 2.0 * ((s >> j) & 1)
            zz = zi * zj
            acc += bond_zz[b] * zz * psi[s]
            if zz < 0.0:
                acc += bond_hop[b] * psi[s ^ ((1 << i) | (1 << j))]
            acc += (bond_fi[b] * zz + bond_gi[b] * zj) * psi[s ^ (1 << i)]
            acc += (bond_fj[b] * zz + bond_gj[b] * zi) * psi[s ^ (1 << j)]
        out[s] = acc
    return out


@njit(cache=True, parallel=True)
def site_sigma_apply(psi, out, site, axis):
    dim = psi.shape[0]
    mask = 1 << site
    for s in prange(dim):
        z = 1.0 - 2.0 * ((s >> site) & 1)
        if axis == 2:
            out[s] = z * psi[s]
        elif axis == 0:
            out[s] = psi[s ^ mask]
        else:
            out[s] = -1j * z * psi[s ^ mask]
    return out


@njit(cache=True)
def pauli_string_expect(psi, flip_mask, sign_mask, base):
    dim = psi.shape[0]
    acc = 0.0j
    for s in range(dim):
        sgn = 1.0 - 2.0 * _parity(s & sign_mask)
        acc += np.conj(psi[s]) * sgn * psi[s ^ flip_mask]
    return base * acc


# silence "unused" linters; numba is referenced for its version elsewhere
_NUMBA_VERSION = numba.__version__
