"""Triangular spin-lattice geometry.

Hexagon-shaped patches of the triangular lattice are built shell by
shell around a central site: ``n_shells = 2`` gives the 19-site patch
(1 + 6 + 12).  Sites are indexed row-major over the patch (rows of
constant axial ``r`` bottom to top, ascending axial ``q`` within a row),
which puts the central spin of the 19-site patch at index 9 and makes
``1 - 4 - 9 - 14 - 18`` the diagonal path through the center.

Nearest-neighbor bonds carry a fixed orientation: each bond points along
one of the three global directions +x, +60 deg, +120 deg, so the
in-plane DMI axis ``d = z x r`` gets the same phase on every bond
(Neel convention, ``d`` perpendicular to the bond).

Periodic boundaries wrap the patch onto a triangular torus.  The
centered-hexagonal site count 1 + 3 n (n+1) equals a^2 + a b + b^2 with
(a, b) = (n+1, n), so the torus spanned by T1 = (n+1) a1 + n a2 and its
60-degree rotation tiles the plane with exactly one copy of the patch
and gives every site coordination 6.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .errors import ContractError

Boundary = Literal["PBC", "OBC"]

# triangular Bravais vectors, lattice constant 1
_A1 = np.array([1.0, 0.0])
_A2 = np.array([0.5, math.sqrt(3.0) / 2.0])

# axial displacements to the six nearest neighbors
_NEIGHBOR_STEPS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


@dataclass(frozen=True)
class Bond:
    """Oriented nearest-neighbor bond with its DMI axis."""

    i: int
    j: int
    direction: tuple[float, float]
    dmi: tuple[float, float, float]


@dataclass(frozen=True)
class SpinLattice:
    """Immutable triangular patch (or torus) with oriented bonds."""

    n_sites: int
    positions: np.ndarray          # (n_sites, 2) cartesian, lattice constant 1
    bonds: tuple[Bond, ...]
    boundary: Boundary
    center_index: int
    n_shells: int
    axial: np.ndarray = field(repr=False)           # (n_sites, 2) integer axial coords
    wrap_vectors: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.positions.setflags(write=False)
        self.axial.setflags(write=False)
        if self.wrap_vectors is not None:
            self.wrap_vectors.setflags(write=False)

    def neighbor_displacement(self, i: int, j: int) -> np.ndarray:
        """Shortest cartesian displacement from site i to site j.

        Under PBC this is the minimum-image displacement over the torus
        translations; under OBC just the coordinate difference.
        """
        d = self.positions[j] - self.positions[i]
        if self.boundary == "OBC":
            return d
        best = d
        best_n = d @ d
        t1, t2 = self.wrap_vectors
        for m in range(-2, 3):
            for k in range(-2, 3):
                cand = d + m * t1 + k * t2
                n2 = cand @ cand
                if n2 < best_n - 1e-12:
                    best, best_n = cand, n2
        return best

    def default_charge_path(self) -> list[int]:
        """Diagonal path through the center used for the winding angle.

        For the 19-site patch this is 1-4-9-14-18; the same construction
        (one off-axis edge site, then straight through the center along
        the q = 0 column) generalizes to other shell counts.
        """
        if self.n_shells < 1:
            raise ContractError("no diagonal path on a lattice without shells")
        lookup = {tuple(a): idx for idx, a in enumerate(self.axial)}
        n = self.n_shells
        path = [lookup[(1, -n)]]
        path.extend(lookup[(0, r)] for r in range(-n + 1, n + 1))
        return path

    def to_json(self) -> str:
        """Export geometry as JSON for debugging / external plotting."""
        payload = {
            "sites": [[float(x), float(y)] for x, y in self.positions],
            "bonds": [
                {
                    "i": b.i,
                    "j": b.j,
                    "dir": [float(c) for c in b.direction],
                    "dmi": [float(c) for c in b.dmi],
                }
                for b in self.bonds
            ],
            "boundary": self.boundary,
        }
        return json.dumps(payload, sort_keys=True)


def dmi_vector(bond_direction) -> np.ndarray:
    """In-plane DMI axis d = z x r for a unit bond direction r."""
    rx, ry = float(bond_direction[0]), float(bond_direction[1])
    norm = math.hypot(rx, ry)
    if abs(norm - 1.0) > 1e-9:
        raise ContractError(f"bond direction must be a unit vector, |r| = {norm}")
    return np.array([-ry, rx, 0.0])


def _hexagon_axial(n_shells: int) -> np.ndarray:
    """Axial coordinates of the centered hexagonal patch, row-major."""
    coords = []
    for r in range(-n_shells, n_shells + 1):
        q_lo = max(-n_shells, -n_shells - r)
        q_hi = min(n_shells, n_shells - r)
        coords.extend((q, r) for q in range(q_lo, q_hi + 1))
    return np.array(coords, dtype=np.int64)


def _axial_to_cart(axial: np.ndarray) -> np.ndarray:
    return axial[:, :1] * _A1 + axial[:, 1:] * _A2


def _canonical_step(step) -> bool:
    """True for the three retained orientations +x, +60, +120 deg."""
    dq, dr = step
    return dr > 0 or (dr == 0 and dq > 0)


def build_triangular(n_shells: int, boundary: Boundary = "OBC") -> SpinLattice:
    """Build the hexagonal triangular patch with oriented DMI bonds.

    The site count is 1 + 3*n_shells*(n_shells+1).  Under OBC only
    geometric neighbors are bonded; under PBC neighbors wrap around the
    matching triangular torus so every site reaches coordination 6.
    """
    if n_shells < 0:
        raise ContractError("n_shells must be non-negative")
    if boundary not in ("PBC", "OBC"):
        raise ContractError(f"unknown boundary {boundary!r}")

    axial = _hexagon_axial(n_shells)
    positions = _axial_to_cart(axial)
    n_sites = len(axial)
    lookup = {tuple(a): idx for idx, a in enumerate(axial)}
    center = lookup[(0, 0)]

    wrap = None
    images = {}
    if boundary == "PBC":
        t1 = np.array([n_shells + 1, n_shells], dtype=np.int64)
        t2 = np.array([-t1[1], t1[0] + t1[1]], dtype=np.int64)  # t1 rotated 60 deg
        wrap = np.vstack([_axial_to_cart(t1[None, :])[0], _axial_to_cart(t2[None, :])[0]])
        for idx, a in enumerate(axial):
            for m in range(-2, 3):
                for k in range(-2, 3):
                    images[tuple(a + m * t1 + k * t2)] = idx

    bonds = []
    seen = set()
    for i, a in enumerate(axial):
        for step in _NEIGHBOR_STEPS:
            if not _canonical_step(step):
                continue
            target = (a[0] + step[0], a[1] + step[1])
            if boundary == "OBC":
                j = lookup.get(target)
            else:
                j = images.get(target)
            if j is None or j == i:
                continue
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ContractError(
                    f"duplicate bond {key}: torus too small for single-bond wrap"
                )
            seen.add(key)
            direction = step[0] * _A1 + step[1] * _A2
            d_hat = dmi_vector(direction)
            bonds.append(Bond(i, j, (float(direction[0]), float(direction[1])),
                              (float(d_hat[0]), float(d_hat[1]), float(d_hat[2]))))

    return SpinLattice(
        n_sites=n_sites,
        positions=positions,
        bonds=tuple(bonds),
        boundary=boundary,
        center_index=center,
        n_shells=n_shells,
        axial=axial,
        wrap_vectors=wrap,
    )


def elementary_triangles(lattice: SpinLattice) -> list[tuple[int, int, int]]:
    """All elementary triangles, each ordered counterclockwise.

    Brute-force enumeration over site triples with pairwise unit
    distance (minimum-image under PBC).  Orientation uses the unwrapped
    displacements from the first vertex.
    """
    n = lattice.n_sites
    tris = []
    for i in range(n):
        for j in range(i + 1, n):
            dij = lattice.neighbor_displacement(i, j)
            if abs(dij @ dij - 1.0) > 1e-9:
                continue
            for k in range(j + 1, n):
                dik = lattice.neighbor_displacement(i, k)
                if abs(dik @ dik - 1.0) > 1e-9:
                    continue
                djk = dik - dij
                if abs(djk @ djk - 1.0) > 1e-9:
                    continue
                cross = dij[0] * dik[1] - dij[1] * dik[0]
                tris.append((i, j, k) if cross > 0 else (i, k, j))
    return tris
