import os
import subprocess
import sys

import numpy as np
import pytest

from dcesim import _kernels, classify_and_solve, mean_fields, relax_mean_field_batch
from dcesim.errors import ValidationError


@pytest.fixture
def restore_backend():
    yield
    _kernels.set_backend("auto")


def test_backend_selection(restore_backend):
    assert _kernels.set_backend("numpy") == "numpy"
    assert _kernels.get_backend() == "numpy"
    assert _kernels.set_backend("auto") in ("numba", "numpy")
    with pytest.raises(ValidationError):
        _kernels.set_backend("fortran")


def test_env_flag_selects_fallback():
    env = dict(os.environ, DCESIM_BACKEND="numpy")
    proc = subprocess.run(
        [sys.executable, "-c",
         "from dcesim import _kernels; print(_kernels.get_backend())"],
        capture_output=True, text=True, env=env)
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout.strip() == "numpy"


def test_backends_agree(base_point, restore_backend):
    if _kernels._try_load_numba() is None:
        pytest.skip("numba not importable")
    # upper-branch seed converges quickly on both backends; the lower
    # branch relaxes at the slow mechanical rate and is skipped for cost
    upper = classify_and_solve(base_point)[2]
    a2, b = mean_fields(upper.z, base_point)
    seeds = np.array([[1.02 * (upper.z - 1.0) / 2.0, a2, 0.98 * b],
                      [1e3, 3000 + 2000j, 80 - 60j]],  # divergent seed
                     dtype=np.complex128)

    results = {}
    for backend in ("numba", "numpy"):
        _kernels.set_backend(backend)
        results[backend] = relax_mean_field_batch(base_point, seeds, t_max=4.0)
    out_nb, conv_nb, steps_nb = results["numba"]
    out_np, conv_np, steps_np = results["numpy"]
    assert np.array_equal(conv_nb, conv_np)
    assert np.array_equal(steps_nb, steps_np)
    assert list(conv_nb) == [True, False]
    ok = conv_nb
    scale = np.abs(out_np[ok]).max()
    assert np.abs(out_nb[ok] - out_np[ok]).max() <= 1e-9 * scale


def test_spectrum_rows_agree(base_point, restore_backend):
    if _kernels._try_load_numba() is None:
        pytest.skip("numba not importable")
    from dcesim import build_drift, noise_matrix
    bp = classify_and_solve(base_point)[2]
    A = build_drift(bp, base_point)
    d4 = np.ascontiguousarray(np.diag(noise_matrix(base_point)))
    omegas = np.linspace(-5e4, 5e4, 257)
    _kernels.set_backend("numba")
    rows_nb = _kernels.spectrum_rows(A, d4, omegas)
    _kernels.set_backend("numpy")
    rows_np = _kernels.spectrum_rows(A, d4, omegas)
    assert np.abs(rows_nb - rows_np).max() <= 1e-12 * np.abs(rows_np).max()
