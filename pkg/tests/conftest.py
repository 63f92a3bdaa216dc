import numpy as np
import pytest

import fermichain as fc


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # trigger JIT compilation up front so timed checks measure steady state
    basis = fc.product_basis(4, 1, 1)
    H = fc.build_hamiltonian(fc.HubbardParams(L=4, J=1.0, U=1.0, V=np.zeros(4)), basis)
    H.matvec(np.ones(basis.dim, dtype=np.complex128))
