"""Static observables of a many-body spin state.

Everything is computed from the state vector with matrix-free Pauli
strings:

* on-site polarization <S_alpha^i> (units hbar/2, values in [-1/2, 1/2]);
* scalar spin chirality, the triangle-averaged triple product of unit
  Pauli vectors -- the quantum stand-in for the winding number, ~0.5 on
  the skyrmion plateau and 0 for saturated spins;
* topological charge, the accumulated rotation angle of the expectation
  field along a lattice path divided by 2 pi (path-summed by default,
  with the two-endpoint doubled-angle variant as a mode);
* spin structure factor S_ab(q) on the first Brillouin zone and the
  small-angle elastic neutron cross-section built from it;
* entanglement entropy density of a site subset (natural log, so one
  spin saturates at ln 2);
* on-site energy density with bond energies split half/half between the
  endpoints (the unique symmetric choice that restores sum(e_i) = <H>);
* skyrmion radius from the angle-averaged radial S_z profile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ContractError, DegenerateInputError
from .lattice import SpinLattice, elementary_triangles
from .operators import CouplingParams, check_normalized

_AXIS_NAMES = ("x", "y", "z")


@dataclass
class SpinField:
    """Per-site expectation vectors <S^i> = (Sx, Sy, Sz)."""

    vectors: np.ndarray  # (n_sites, 3)

    @property
    def sz(self) -> np.ndarray:
        return self.vectors[:, 2]

    def mean_sz(self) -> float:
        return float(np.mean(self.vectors[:, 2]))

    def to_csv(self, path, lattice: SpinLattice) -> None:
        with open(path, "w") as fh:
            fh.write("site,x,y,Sx,Sy,Sz\n")
            for i, (pos, vec) in enumerate(zip(lattice.positions, self.vectors)):
                fh.write(f"{i},{pos[0]!r},{pos[1]!r},"
                         f"{vec[0]!r},{vec[1]!r},{vec[2]!r}\n")


def _sigma_expect(psi, site, axis):
    """<psi|sigma_axis^site|psi>, real part."""
    out = np.empty_like(psi)
    kernels.site_sigma_apply(psi, out, site, axis)
    return float(np.vdot(psi, out).real)


def pauli_string_expectation(psi: np.ndarray, sites, axes) -> complex:
    """<psi| prod_k sigma_{axes[k]}^{sites[k]} |psi> for distinct sites."""
    flip_mask = 0
    sign_mask = 0
    base = 1.0 + 0.0j
    for site, axis in zip(sites, axes):
        if axis in (0, 1):
            flip_mask ^= 1 << site
        if axis in (1, 2):
            sign_mask |= 1 << site
        if axis == 1:
            base *= -1.0j
    return complex(kernels.pauli_string_expect(
        np.ascontiguousarray(psi, dtype=np.complex128),
        np.int64(flip_mask), np.int64(sign_mask), complex(base)))


def onsite_spin_expectation(state: np.ndarray, lattice: SpinLattice) -> SpinField:
    """<S_alpha^i> for every site and axis (Bloch vector field)."""
    check_normalized(state)
    psi = np.ascontiguousarray(state, dtype=np.complex128)
    vecs = np.empty((lattice.n_sites, 3))
    for i in range(lattice.n_sites):
        for a in range(3):
            vecs[i, a] = 0.5 * _sigma_expect(psi, i, a)
    return SpinField(vecs)


def scalar_chirality(state: np.ndarray, lattice: SpinLattice) -> float:
    """Triangle-averaged <sigma_i . (sigma_j x sigma_k)>.

    Unit-normalized Pauli vectors (2S), averaged over the elementary
    triangles; this normalization puts the skyrmion plateau near 0.5
    and saturated states at 0.  The traversal sense is chosen so that
    a skyrmion whose background follows a +z field (core reversed)
    carries positive chirality.
    """
    check_normalized(state)
    tris = elementary_triangles(lattice)
    if not tris:
        raise DegenerateInputError("lattice has no elementary triangles")
    psi = np.ascontiguousarray(state, dtype=np.complex128)
    total = 0.0
    for (i, k, j) in tris:  # clockwise traversal of the ccw-ordered triangles
        for (a, b, c, sign) in ((0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0),
                                (0, 2, 1, -1.0), (1, 0, 2, -1.0), (2, 1, 0, -1.0)):
            total += sign * pauli_string_expectation(psi, (i, j, k), (a, b, c)).real
    return total / len(tris)


def topological_charge(spin_field: SpinField | np.ndarray, path,
                       mode: str = "path") -> float:
    """Winding number from accumulated rotation angles along a path.

    mode="path": (1/2pi) sum of angles between consecutive expectation
    vectors.  mode="endpoints": the doubled angle between the first and
    last vector only, (1/2pi) * 2 arccos(. . .).
    """
    vecs = spin_field.vectors if isinstance(spin_field, SpinField) else np.asarray(spin_field)
    path = list(path)
    if len(path) < 2:
        raise ContractError("path needs at least two sites")
    chain = vecs[path]
    norms = np.linalg.norm(chain, axis=1)
    if np.any(norms < 1e-10):
        raise DegenerateInputError(
            "winding angle undefined: a path site has zero spin expectation"
        )
    unit = chain / norms[:, None]

    def angle(u, v):
        return math.acos(float(np.clip(np.dot(u, v), -1.0, 1.0)))

    if mode == "endpoints":
        return angle(unit[0], unit[-1]) / math.pi
    if mode == "path":
        total = sum(angle(unit[a], unit[a + 1]) for a in range(len(path) - 1))
        return total / (2.0 * math.pi)
    raise ContractError(f"unknown topological-charge mode {mode!r}")


# -- correlations and structure factor ---------------------------------------

def spin_correlation_tensor(state: np.ndarray, lattice: SpinLattice) -> np.ndarray:
    """Symmetrized two-spin correlations C[a, r, b, r'] = Re<S_a^r S_b^r'>.

    The Hermitian-symmetrized kernel (S_a^r S_b^r' + h.c.)/2 equals the
    elementwise real part, keeps the diagonal blocks positive
    semidefinite, and coincides with the bare product for r != r'.
    Computed as a blocked Gram matrix of the 3n vectors S_a^r |psi>.
    """
    check_normalized(state)
    psi = np.ascontiguousarray(state, dtype=np.complex128)
    n = lattice.n_sites
    rows = [(a, r) for a in range(3) for r in range(n)]

    def build_block(indices):
        block = np.empty((len(indices), psi.shape[0]), dtype=np.complex128)
        for pos, (a, r) in enumerate(indices):
            kernels.site_sigma_apply(psi, block[pos], r, a)
        return block

    chunk = 8
    gram = np.empty((len(rows), len(rows)))
    for astart in range(0, len(rows), chunk):
        ablock = build_block(rows[astart:astart + chunk])
        for bstart in range(astart, len(rows), chunk):
            bblock = ablock if bstart == astart else build_block(rows[bstart:bstart + chunk])
            g = ablock.conj() @ bblock.T
            gram[astart:astart + g.shape[0], bstart:bstart + g.shape[1]] = g.real
            gram[bstart:bstart + g.shape[1], astart:astart + g.shape[0]] = g.real.T
    corr = 0.25 * gram.reshape(3, n, 3, n)  # S = sigma/2
    return corr


@dataclass
class StructureFactorGrid:
    """S_ab(q) on a uniform grid over qx/pi, qy/pi in [-1, 1]."""

    qx_over_pi: np.ndarray                     # (m,)
    qy_over_pi: np.ndarray                     # (m,)
    values: np.ndarray                         # (3, 3, m, m) complex, [a, b, iy, ix]
    cross_section: np.ndarray | None = field(default=None)

    def to_csv(self, path) -> None:
        if self.cross_section is None:
            self.cross_section = neutron_cross_section(self)
        cols = [f"{p}S_{_AXIS_NAMES[a]}{_AXIS_NAMES[b]}"
                for a in range(3) for b in range(3) for p in ("Re", "Im")]
        with open(path, "w") as fh:
            fh.write("qx_over_pi,qy_over_pi," + ",".join(cols) + ",cross_section\n")
            for iy, qy in enumerate(self.qy_over_pi):
                for ix, qx in enumerate(self.qx_over_pi):
                    vals = []
                    for a in range(3):
                        for b in range(3):
                            v = self.values[a, b, iy, ix]
                            vals.extend((repr(float(v.real)), repr(float(v.imag))))
                    fh.write(f"{qx!r},{qy!r}," + ",".join(vals)
                             + f",{float(self.cross_section[iy, ix])!r}\n")


def structure_factor(state: np.ndarray, lattice: SpinLattice,
                     resolution: int = 48) -> StructureFactorGrid:
    """S_ab(q) = sum_{r,r'} exp(i q.(r'-r)) <S_a^r S_b^r'> on the zone grid."""
    if resolution < 8:
        raise ContractError("resolution must be at least 8")
    corr = spin_correlation_tensor(state, lattice)
    qfrac = np.linspace(-1.0, 1.0, resolution)
    qs = math.pi * qfrac
    # phases[iq, r] = exp(i q . r) evaluated on the flattened (iy, ix) grid
    qxg, qyg = np.meshgrid(qs, qs)
    qvec = np.column_stack([qxg.ravel(), qyg.ravel()])
    phases = np.exp(1j * qvec @ lattice.positions.T)       # (nq, n)
    values = np.empty((3, 3, resolution, resolution), dtype=np.complex128)
    for a in range(3):
        for b in range(3):
            quad = np.einsum("qr,rs,qs->q", phases.conj(), corr[a, :, b, :], phases)
            values[a, b] = quad.reshape(resolution, resolution)
    return StructureFactorGrid(qfrac, qfrac, values)


def neutron_cross_section(grid: StructureFactorGrid) -> np.ndarray:
    """Small-angle elastic cross-section sum_ab (delta_ab - q_a q_b) S_ab(q).

    q is the in-plane unit vector (q_z = 0); at q = 0 the transverse
    projector is undefined and is replaced by the identity.  Arbitrary
    units; the real part is floored at -1e-9.
    """
    m = len(grid.qx_over_pi)
    qxg, qyg = np.meshgrid(grid.qx_over_pi, grid.qy_over_pi)
    qnorm = np.hypot(qxg, qyg)
    safe = np.where(qnorm > 1e-12, qnorm, 1.0)
    hx, hy = qxg / safe, qyg / safe
    zero = qnorm <= 1e-12
    hx = np.where(zero, 0.0, hx)
    hy = np.where(zero, 0.0, hy)
    out = ((1.0 - hx * hx) * grid.values[0, 0]
           + (1.0 - hy * hy) * grid.values[1, 1]
           + grid.values[2, 2]
           - hx * hy * (grid.values[0, 1] + grid.values[1, 0])).real
    return np.maximum(out, -1e-9)


# -- entanglement -------------------------------------------------------------

def reduced_density_matrix(state: np.ndarray, n_sites: int, subsystem) -> np.ndarray:
    """Partial trace of |psi><psi| down to the given site subset."""
    sites = sorted(set(int(s) for s in subsystem))
    if not sites or len(sites) >= n_sites:
        raise ContractError("subsystem must be a nonempty proper subset of sites")
    if sites[0] < 0 or sites[-1] >= n_sites:
        raise ContractError("subsystem site index out of range")
    rest = [s for s in range(n_sites) if s not in sites]
    idx = np.arange(2 ** n_sites, dtype=np.int64)
    arow = np.zeros_like(idx)
    for pos, s in enumerate(sites):
        arow |= ((idx >> s) & 1) << pos
    bcol = np.zeros_like(idx)
    for pos, s in enumerate(rest):
        bcol |= ((idx >> s) & 1) << pos
    mat = np.zeros((2 ** len(sites), 2 ** len(rest)), dtype=np.complex128)
    mat[arow, bcol] = state
    return mat @ mat.conj().T


def _schmidt_probabilities(state, n_sites, sites):
    rest = [s for s in range(n_sites) if s not in sites]
    idx = np.arange(2 ** n_sites, dtype=np.int64)
    arow = np.zeros_like(idx)
    for pos, s in enumerate(sites):
        arow |= ((idx >> s) & 1) << pos
    bcol = np.zeros_like(idx)
    for pos, s in enumerate(rest):
        bcol |= ((idx >> s) & 1) << pos
    mat = np.zeros((2 ** len(sites), 2 ** len(rest)), dtype=np.complex128)
    mat[arow, bcol] = state
    if mat.shape[0] > mat.shape[1]:
        mat = mat.conj().T
    gram = mat @ mat.conj().T
    probs = np.linalg.eigvalsh(gram)
    return np.clip(probs, 0.0, None)


def entanglement_entropy_density(state: np.ndarray, subsystem,
                                 n_sites: int | None = None) -> float:
    """- (1/|A|) Tr[rho_A ln rho_A] for the site subset A (natural log)."""
    sites = sorted(set(int(s) for s in subsystem))
    if n_sites is None:
        n_sites = int(round(math.log2(state.shape[0])))
    if not sites or len(sites) >= n_sites:
        raise ContractError("subsystem must be a nonempty proper subset of sites")
    check_normalized(state)
    probs = _schmidt_probabilities(state, n_sites, sites)
    probs = probs[probs > 1e-14]
    return float(-np.sum(probs * np.log(probs)) / len(sites))


def entropy_partition(lattice: SpinLattice, preset: str) -> list[int]:
    """Named subsystem presets.

    "half": the first floor(n/2) sites plus the central spin (for the
    19-site patch: sites 0-8 and 9).  "central": the central spin only.
    """
    if preset == "central":
        return [lattice.center_index]
    if preset == "half":
        return sorted(set(range(lattice.n_sites // 2)) | {lattice.center_index})
    raise ContractError(f"unknown entropy partition preset {preset!r}")


# -- energetics ---------------------------------------------------------------

def onsite_energy_density(state: np.ndarray, lattice: SpinLattice,
                          params: CouplingParams) -> np.ndarray:
    """Per-site energy e_i; bond terms split half/half so sum(e_i) = <H>."""
    check_normalized(state)
    psi = np.ascontiguousarray(state, dtype=np.complex128)
    n = lattice.n_sites
    energies = np.zeros(n)

    field_vecs = onsite_spin_expectation(psi, lattice).vectors
    bvec = np.asarray(params.B)
    energies -= field_vecs @ bvec
    if params.anisotropy_mode == "onsite":
        energies += 0.25 * params.K

    k_bond = params.K if params.anisotropy_mode == "bond" else 0.0
    for bond in lattice.bonds:
        i, j = bond.i, bond.j
        dx, dy, _ = bond.dmi
        pair = np.empty((3, 3))
        for a in range(3):
            for b in range(3):
                pair[a, b] = 0.25 * pauli_string_expectation(psi, (i, j), (a, b)).real
        heis = params.J * (pair[0, 0] + pair[1, 1] + pair[2, 2])
        # d . (S_i x S_j) with d = (dx, dy, 0)
        dmi = params.D * (dx * (pair[1, 2] - pair[2, 1])
                          + dy * (pair[2, 0] - pair[0, 2]))
        e_bond = heis + dmi + k_bond * pair[2, 2]
        energies[i] += 0.5 * e_bond
        energies[j] += 0.5 * e_bond
    return energies


def skyrmion_radius(spin_field: SpinField, lattice: SpinLattice) -> float | None:
    """Radius where the angle-averaged radial S_z profile crosses zero.

    Linear interpolation between radial shells around the lattice
    center (the pi/2 criterion for the core boundary); None when the
    profile never changes sign.
    """
    if lattice.boundary != "OBC":
        raise ContractError("skyrmion radius needs an open patch with a center")
    center = lattice.positions[lattice.center_index]
    radii = np.linalg.norm(lattice.positions - center, axis=1)
    shells: dict[float, list[float]] = {}
    for r, sz in zip(radii, spin_field.sz):
        shells.setdefault(round(float(r), 9), []).append(float(sz))
    rs = np.array(sorted(shells))
    profile = np.array([np.mean(shells[r]) for r in rs])
    for a in range(len(rs) - 1):
        s0, s1 = profile[a], profile[a + 1]
        if s0 == 0.0:
            return float(rs[a])
        if s0 * s1 < 0.0:
            frac = s0 / (s0 - s1)
            return float(rs[a] + frac * (rs[a + 1] - rs[a]))
    if profile[-1] == 0.0:
        return float(rs[-1])
    return None
