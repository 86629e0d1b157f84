import numpy as np
import pytest

from mixflow.euler import SchemeConfig
from mixflow.field import EULERIAN, Grid1D, State
from mixflow.model import derive_matrices, make_params


@pytest.fixture
def params2():
    return make_params(
        N=2, K=1.0, gamma=1.4,
        M=[[0.12, 0.03], [0.03, 0.1]],
        A=[[0.0, 0.4], [0.4, 0.0]],
        T_final=2.0,
    )


@pytest.fixture
def derived2(params2):
    return derive_matrices(params2)


@pytest.fixture
def grid64():
    return Grid1D(domain_length=1.0, n_cells=64)


def smooth_state(grid, n_comp=2, rho_amp=0.3, u_amp=0.12):
    """Generic smooth Eulerian test state with active shear."""
    x = grid.nodes()
    rho = 1.0 + rho_amp * np.exp(-(((x - 0.4) / 0.15) ** 2))
    U = np.zeros((n_comp, x.size))
    for i in range(n_comp):
        sign = 1.0 if i % 2 == 0 else -0.7
        U[i] = sign * u_amp * np.sin(np.pi * x) + 0.25 * u_amp * np.sin(2 * np.pi * x) / (i + 1)
    U[:, 0] = 0.0
    U[:, -1] = 0.0
    return State(time=0.0, frame=EULERIAN, grid=grid, rho=rho, U=U)


@pytest.fixture
def shear_state(grid64):
    return smooth_state(grid64)


@pytest.fixture
def upwind_scheme():
    return SchemeConfig()


@pytest.fixture
def central_scheme():
    return SchemeConfig(advection="central-2")
