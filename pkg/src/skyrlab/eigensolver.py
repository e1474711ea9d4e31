"""Lowest eigenpairs of Hermitian operators: Lanczos and a dense oracle.

The Lanczos driver converges one eigenpair per Krylov chain: each chain
starts from a fresh seeded random vector, deflated against everything
locked so far, and thick-restarts (carrying the lowest Ritz vectors and
their exact residual couplings) until its bottom Ritz pair passes an
explicit residual check.  One level per chain is what makes degenerate
multiplets reliable -- a single Krylov sequence only ever sees one copy
of a degenerate eigenvalue, so every copy must come from a fresh start
on the deflated operator.  All vectors stay in one buffer and
reorthogonalization runs through BLAS matrix products, applied twice.
Runs are deterministic for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ContractError, ConvergenceError, ResourceError
from .operators import SparseOperator

DENSE_DIM_LIMIT = 4096  # 12 sites


@dataclass
class EigenResult:
    """Ascending eigenvalues, matching vectors, residual norms."""

    eigenvalues: np.ndarray
    eigenvectors: list[np.ndarray]
    residuals: np.ndarray
    tol_degeneracy: float = 1e-6

    @property
    def degeneracy_groups(self) -> list[list[int]]:
        """Indices partitioned by chaining |E_a - E_b| < tol_degeneracy."""
        groups: list[list[int]] = []
        for idx, val in enumerate(self.eigenvalues):
            if groups and val - self.eigenvalues[groups[-1][-1]] < self.tol_degeneracy:
                groups[-1].append(idx)
            else:
                groups.append([idx])
        return groups

    @property
    def ground_degeneracy(self) -> int:
        return len(self.degeneracy_groups[0])


def dense_spectrum(op: SparseOperator, tol_degeneracy: float = 1e-6) -> EigenResult:
    """Full spectrum by dense Hermitian diagonalization (oracle path).

    Refuses dimensions above 4096; the matrix is assembled column by
    column from the operator's own matrix-free action.
    """
    if op.dim > DENSE_DIM_LIMIT:
        raise ResourceError(
            f"dense diagonalization refused for dim {op.dim} > {DENSE_DIM_LIMIT}"
        )
    if not op.hermitian:
        raise ContractError("dense_spectrum expects a Hermitian operator")
    mat = np.empty((op.dim, op.dim), dtype=np.complex128)
    unit = np.zeros(op.dim, dtype=np.complex128)
    for col in range(op.dim):
        unit[col] = 1.0
        mat[:, col] = op.apply(unit)
        unit[col] = 0.0
    vals, vecs = np.linalg.eigh(mat)
    vectors = [np.ascontiguousarray(vecs[:, k]) for k in range(op.dim)]
    residuals = np.zeros(op.dim)
    return EigenResult(vals, vectors, residuals, tol_degeneracy)


def _orthogonalize(w, blocks):
    """Project the rows of every block out of w, twice."""
    for _ in range(2):
        for rows in blocks:
            if rows is not None and len(rows):
                w -= rows.T @ (rows.conj() @ w)
    return w


def _converge_bottom(op, locked, rng, tol, max_m, max_cycles=30):
    """Lowest eigenpair of op restricted to the complement of `locked`.

    Thick-restarted Lanczos chain from a fresh random start; returns
    (value, vector, residual) with the explicit residual below tol, or
    raises ConvergenceError.
    """
    dim = op.dim
    budget = min(max_m, dim - len(locked))
    if budget < 1:
        raise ConvergenceError("no space left outside the locked subspace")

    start = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    start = _orthogonalize(start, (locked,))
    nrm = np.linalg.norm(start)
    if nrm < 1e-12:
        raise ConvergenceError("start vector vanished after deflation")
    start /= nrm

    basis = np.empty((budget + 1, dim), dtype=np.complex128)
    proj = np.zeros((budget + 1, budget + 1))
    kept_vecs: list[np.ndarray] = []
    kept_vals: list[float] = []
    couplings: list[float] = []
    best_res = None

    for _ in range(max_cycles):
        proj[:] = 0.0
        ell = len(kept_vals)
        for i in range(ell):
            basis[i] = kept_vecs[i]
            proj[i, i] = kept_vals[i]
            proj[i, ell] = proj[ell, i] = couplings[i]
        basis[ell] = start
        m = ell + 1

        invariant = False
        beta = 0.0
        w = None
        while True:
            idx = m - 1
            w = op.apply(basis[idx])
            proj[idx, idx] = float(np.vdot(basis[idx], w).real)
            w = _orthogonalize(w, (locked, basis[:m]))
            beta = float(np.linalg.norm(w))
            if beta < 1e-12 * max(1.0, abs(proj[idx, idx])):
                invariant = True
                break
            if m >= budget:
                break
            if m > 1 and m % 10 == 0:
                theta, s = np.linalg.eigh(proj[:m, :m])
                if beta * abs(s[m - 1, 0]) < 0.5 * tol:
                    break
            basis[m] = w / beta
            proj[m, idx] = proj[idx, m] = beta
            m += 1

        theta, s = np.linalg.eigh(proj[:m, :m])
        vec = basis[:m].T @ s[:, 0]
        nrm = np.linalg.norm(vec)
        if nrm < 1e-12:
            raise ConvergenceError("Ritz vector collapsed during restart")
        vec /= nrm
        res = float(np.linalg.norm(op.apply(vec) - theta[0] * vec))
        best_res = res if best_res is None else min(best_res, res)
        if res < tol or invariant:
            return float(theta[0]), vec, res

        # thick restart: keep the lowest few Ritz vectors plus the residual
        keep = min(4, m - 1, budget - 1)
        kept_vecs, kept_vals, couplings = [], [], []
        for col in range(keep):
            y = basis[:m].T @ s[:, col]
            ynorm = np.linalg.norm(y)
            if ynorm < 1e-12:
                continue
            kept_vecs.append(y / ynorm)
            kept_vals.append(float(theta[col]))
            couplings.append(float(beta * s[m - 1, col]))
        start = w / beta
    raise ConvergenceError(
        f"bottom eigenpair stuck at residual {best_res:.2e} > tol {tol:.1e}",
        residuals=[best_res],
    )


def lanczos_lowest(op: SparseOperator, k: int, tol: float = 1e-8, seed: int = 0,
                   max_krylov: int = 300, max_restarts: int = 30,
                   tol_degeneracy: float = 1e-6) -> EigenResult:
    """The k lowest eigenpairs of a Hermitian operator.

    k sequential bottom-of-spectrum chains, each deflated against the
    pairs already locked, each verified by an explicit residual
    ||H v - theta v|| < tol.  `max_restarts` bounds the thick-restart
    cycles within one chain.  Deterministic for a fixed seed.
    """
    if not op.hermitian:
        raise ContractError("lanczos_lowest expects a Hermitian operator")
    if not 1 <= k <= op.dim:
        raise ContractError(f"need 1 <= k <= dim, got k={k}, dim={op.dim}")
    if not tol > 0:
        raise ContractError("tol must be positive")

    rng = np.random.default_rng(seed)
    dim = op.dim
    max_m = max(2 * k + 2, min(max_krylov, dim))
    locked = np.empty((0, dim), dtype=np.complex128)
    vals: list[float] = []
    residuals: list[float] = []
    for _ in range(k):
        val, vec, res = _converge_bottom(op, locked, rng, tol, max_m,
                                         max_cycles=max_restarts)
        vals.append(val)
        residuals.append(res)
        locked = np.vstack([locked, vec[None, :]])

    order = np.argsort(vals)
    eigenvalues = np.array([vals[i] for i in order])
    vectors = [np.ascontiguousarray(locked[i]) for i in order]
    res_arr = np.array([residuals[i] for i in order])
    return EigenResult(eigenvalues, vectors, res_arr, tol_degeneracy)
