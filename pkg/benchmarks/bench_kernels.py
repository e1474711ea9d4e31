#!/usr/bin/env python3
"""Timing comparison of the numba and pure-numpy kernel backends.

Runs the Hamiltonian apply, a single-site Pauli apply, and a Pauli
string expectation on a PBC lattice at a few Hilbert-space sizes, once
per backend, and prints a table.  The backend is selected through
SKYRLAB_BACKEND, so each measurement runs in a subprocess with a clean
import.

    python benchmarks/bench_kernels.py [--sites 7 14 16] [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, os, sys, time
import numpy as np
import skyrlab as sk
from skyrlab import kernels

n_sites, repeat = json.loads(sys.argv[1])
# n_sites is a free site count here, not a hexagon shell count: benchmark the
# kernels on a synthetic chain-of-bonds operator of matching dimension.
shells = {7: 1, 19: 2}.get(n_sites)
if shells is not None:
    lat = sk.build_triangular(shells, "PBC")
else:
    import skyrlab.lattice as L
    bonds = tuple(
        L.Bond(i, (i + 1) % n_sites, (1.0, 0.0), (0.0, 1.0, 0.0))
        for i in range(n_sites)
    )
    lat = L.SpinLattice(
        n_sites=n_sites,
        positions=np.column_stack([np.arange(n_sites, dtype=float),
                                   np.zeros(n_sites)]),
        bonds=bonds, boundary="OBC", center_index=0, n_shells=0,
        axial=np.zeros((n_sites, 2), dtype=np.int64),
    )
params = sk.CouplingParams(J=0.5, B=(0.1, 0.0, 0.4))
ham = sk.build_hamiltonian(lat, params)
rng = np.random.default_rng(0)
psi = rng.standard_normal(ham.dim) + 1j * rng.standard_normal(ham.dim)
psi /= np.linalg.norm(psi)

ham.apply(psi)  # warm up / jit compile
out = np.empty_like(psi)
kernels.site_sigma_apply(psi, out, 0, 1)
kernels.pauli_string_expect(psi, np.int64(3), np.int64(1), 1.0 + 0j)

def best(fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)

result = {
    "backend": kernels.BACKEND,
    "dim": ham.dim,
    "ham_apply": best(lambda: ham.apply(psi)),
    "site_sigma": best(lambda: kernels.site_sigma_apply(psi, out, 0, 1)),
    "pauli_expect": best(lambda: kernels.pauli_string_expect(
        psi, np.int64(3), np.int64(1), 1.0 + 0j)),
}
print(json.dumps(result))
"""


def measure(backend: str, n_sites: int, repeat: int) -> dict:
    env = dict(os.environ, SKYRLAB_BACKEND=backend)
    proc = subprocess.run(
        [sys.executable, "-c", _WORKER, json.dumps([n_sites, repeat])],
        capture_output=True, text=True, env=env, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sites", type=int, nargs="+", default=[7, 14, 16])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rows = []
    for n in args.sites:
        for backend in ("numpy", "numba"):
            try:
                rows.append(measure(backend, n, args.repeat))
            except subprocess.CalledProcessError as exc:
                print(f"[skip] {backend} n={n}: {exc.stderr.strip().splitlines()[-1]}")
    header = f"{'backend':>8} {'dim':>9} {'ham_apply':>12} {'site_sigma':>12} {'pauli_expect':>13}"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(f"{r['backend']:>8} {r['dim']:>9} "
              f"{r['ham_apply'] * 1e3:>10.2f}ms {r['site_sigma'] * 1e3:>10.2f}ms "
              f"{r['pauli_expect'] * 1e3:>11.2f}ms")


if __name__ == "__main__":
    main()
