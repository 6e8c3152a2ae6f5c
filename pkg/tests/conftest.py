import numpy as np
import pytest

from dcesim import EffectiveParams, figure_base
from dcesim._kernels import relax_batch, spectrum_rows


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Compile the jit kernels once so timed tests measure work, not jit."""
    eff = EffectiveParams(delta=5e3, Omega_M=1e4, G0=50.0, kappa=500.0, F=1e4 + 0j)
    seeds = np.zeros((1, 3), np.complex128)
    relax_batch(seeds, eff.delta, eff.Omega_M, eff.G0, eff.kappa,
                eff.gamma_m, eff.F, 1e-5, 64, 1e-8)
    A = -np.eye(4)
    spectrum_rows(A, np.ones(4), np.linspace(-1.0, 1.0, 5))


@pytest.fixture()
def base_point():
    """Reference bistable operating point used across the suite."""
    return figure_base()
