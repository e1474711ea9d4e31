import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))  # make `oracles` importable

import skyrlab as sk


@pytest.fixture(scope="session")
def hex7_obc():
    return sk.build_triangular(1, "OBC")


@pytest.fixture(scope="session")
def hex7_pbc():
    return sk.build_triangular(1, "PBC")


@pytest.fixture()
def rng():
    return np.random.default_rng(20240809)


@pytest.fixture(scope="session")
def qubit_point_params():
    """7-site OBC point with a core-reversed winding-1 ground state."""
    return sk.CouplingParams(J=0.9, B=(0.0, 0.0, 0.4), K=0.02,
                             anisotropy_mode="bond")


@pytest.fixture(scope="session")
def qubit_point(hex7_obc, qubit_point_params):
    ham = sk.build_hamiltonian(hex7_obc, qubit_point_params)
    return sk.dense_spectrum(ham), ham
