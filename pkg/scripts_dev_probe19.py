"""Dev: probe for the 19-site unique-ground-state (plateau) window."""
import time

import numpy as np

import skyrlab as sk
from skyrlab.observables import entropy_partition

lat = sk.build_triangular(2, "PBC")
for (j, b) in ((1.0, 1.6), (1.5, 2.4), (2.0, 3.25), (1.0, 2.0)):
    t0 = time.time()
    p = sk.CouplingParams(J=j, B=(0, 0, b))
    ham = sk.build_hamiltonian(lat, p)
    eig = sk.lanczos_lowest(ham, k=2, tol=1e-8, seed=0, max_krylov=200,
                            max_restarts=40)
    g = eig.eigenvectors[0]
    f = sk.onsite_spin_expectation(g, lat)
    q = sk.scalar_chirality(g, lat)
    ent = sk.entanglement_entropy_density(g, entropy_partition(lat, "half"), 19)
    gap = eig.eigenvalues[1] - eig.eigenvalues[0]
    uniform = np.max(np.abs(f.sz - f.sz[0]))
    print(f"J={j} B={b}: E0={eig.eigenvalues[0]:.8f} gap={gap:.3e} "
          f"Q={q:8.5f} mSz={f.mean_sz():8.5f} dSz={uniform:.2e} "
          f"S={ent:.4f} t={time.time()-t0:.0f}s", flush=True)
