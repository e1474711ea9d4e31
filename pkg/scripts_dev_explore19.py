"""Dev exploration: 19-site anchor points (run once, minutes-scale)."""
import time

import numpy as np

import skyrlab as sk

t0 = time.time()

# [1] PBC skyrmion-phase point from the phase diagram: J/D=0.5, B/D=0.4
lat = sk.build_triangular(2, "PBC")
p = sk.CouplingParams(J=0.5, B=(0, 0, 0.4))
H = sk.build_hamiltonian(lat, p)
eig = sk.lanczos_lowest(H, k=2, tol=1e-8, seed=0, max_krylov=220, max_restarts=40)
print(f"[PBC J=0.5 B=0.4] t={time.time()-t0:.0f}s E={eig.eigenvalues} resid={eig.residuals}")
g = eig.eigenvectors[0]
f = sk.onsite_spin_expectation(g, lat)
print("  Sz:", np.round(f.sz, 6))
print("  max|Sz_i - Sz_0| =", np.max(np.abs(f.sz - f.sz[0])))
print("  chirality =", sk.scalar_chirality(g, lat))
print("  mean_sz =", f.mean_sz())
np.save("/tmp/gs19_pbc_sk.npy", g)

# [2] OBC qubit point: J/D=0.04, K/D=0.02 (bond), B/D=0.01
t1 = time.time()
lat2 = sk.build_triangular(2, "OBC")
p2 = sk.CouplingParams(J=0.04, B=(0, 0, 0.01), K=0.02, anisotropy_mode="bond")
H2 = sk.build_hamiltonian(lat2, p2)
eig2 = sk.lanczos_lowest(H2, k=3, tol=1e-8, seed=0, max_krylov=220, max_restarts=40)
print(f"[OBC J=0.04 K=0.02 B=0.01] t={time.time()-t1:.0f}s E={eig2.eigenvalues} resid={eig2.residuals}")
g2 = eig2.eigenvectors[0]
f2 = sk.onsite_spin_expectation(g2, lat2)
print("  Sz:", np.round(f2.sz, 4))
print("  Qtopo(path) =", sk.topological_charge(f2, lat2.default_charge_path()))
print("  Qtopo(endpoints 0-9) =", sk.topological_charge(f2, [0, 9], mode="endpoints"))
print("  gaps:", np.diff(eig2.eigenvalues))
e_density = sk.onsite_energy_density(g2, lat2, p2)
print("  energy density path 1-4-9-14-18:", e_density[[1, 4, 9, 14, 18]])
np.save("/tmp/gs19_obc_sky.npy", g2)
print("total", time.time() - t0)
