"""Backend dispatch for the two hot loops.

The package runs the mean-field relaxation and the spectral-row
evaluation either through numba-compiled kernels or through pure-numpy
twins.  The backend is picked once, lazily:

* environment variable ``DCESIM_BACKEND`` set to ``numba`` or ``numpy``
  forces that backend (``numba`` raises if numba is not importable);
* unset or ``auto`` tries numba and silently falls back to numpy.

:func:`set_backend` overrides the choice at runtime, which is what the
benchmark uses to time one implementation against the other.  Both
backends implement identical arithmetic; results agree to roundoff and
the test suite checks that parity.
"""

from __future__ import annotations

import os

import numpy as np

from .errors import ValidationError

_VALID = ("auto", "numba", "numpy")
_backend: str | None = None
_numba_mod = None


def _try_load_numba():
    """Import the compiled kernels, once.  Returns module or None."""
    global _numba_mod
    if _numba_mod is None:
        try:
            from . import _numba_impl
            _numba_mod = _numba_impl
        except ImportError:
            _numba_mod = False
    return _numba_mod or None


def set_backend(name: str) -> str:
    """Select the kernel backend: ``auto``, ``numba`` or ``numpy``."""
    global _backend
    if name not in _VALID:
        raise ValidationError(f"unknown backend {name!r}, expected one of {_VALID}")
    if name == "numpy":
        _backend = "numpy"
    elif name == "numba":
        if _try_load_numba() is None:
            raise ValidationError("backend 'numba' requested but numba is not importable")
        _backend = "numba"
    else:
        _backend = "numba" if _try_load_numba() is not None else "numpy"
    return _backend


def get_backend() -> str:
    """Return the active backend, resolving it on first call."""
    if _backend is None:
        set_backend(os.environ.get("DCESIM_BACKEND", "auto"))
    return _backend  # type: ignore[return-value]


# ---------------------------------------------------------------------------
# mean-field relaxation, pure-numpy twin
# ---------------------------------------------------------------------------

_WINDOW = 1024  # steps between convergence checks; averages out oscillations


def _relax_batch_numpy(seeds, delta, Omega_M, G0, kappa, gamma, F, dt, max_steps, tol):
    m = seeds.shape[0]
    n = seeds[:, 0].real.copy()
    a2 = seeds[:, 1].astype(np.complex128)
    b = seeds[:, 2].astype(np.complex128)
    active = np.ones(m, dtype=bool)
    converged = np.zeros(m, dtype=bool)
    steps = np.full(m, max_steps, dtype=np.int64)
    halfF = 0.5 * F

    def rhs(nn, aa, bb):
        z = 2.0 * nn + 1.0
        dn = -4.0 * G0 * (aa * bb.conj()).imag - 2.0 * kappa * nn
        da = -2.0j * delta * aa - 2.0j * (G0 * z) * bb - 2.0 * kappa * aa
        db = -1.0j * (Omega_M * bb + G0 * aa + halfF) - gamma * bb
        return dn, da, db

    done = 0
    n_ref, a2_ref, b_ref = n.copy(), a2.copy(), b.copy()
    # overflow on diverging trajectories is expected and reported via flags
    with np.errstate(all="ignore"):
        while done < max_steps and active.any():
            span = min(_WINDOW, max_steps - done)
            for _ in range(span):
                k1n, k1a, k1b = rhs(n, a2, b)
                k2n, k2a, k2b = rhs(n + 0.5 * dt * k1n, a2 + 0.5 * dt * k1a, b + 0.5 * dt * k1b)
                k3n, k3a, k3b = rhs(n + 0.5 * dt * k2n, a2 + 0.5 * dt * k2a, b + 0.5 * dt * k2b)
                k4n, k4a, k4b = rhs(n + dt * k3n, a2 + dt * k3a, b + dt * k3b)
                dn = (dt / 6.0) * (k1n + 2.0 * k2n + 2.0 * k3n + k4n)
                da = (dt / 6.0) * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
                db = (dt / 6.0) * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
                n = np.where(active, n + dn, n)
                a2 = np.where(active, a2 + da, a2)
                b = np.where(active, b + db, b)
            done += span

            # secular drift over the window, oscillation roundoff averaged out
            rate2 = np.maximum((n - n_ref) ** 2,
                               np.maximum(np.abs(a2 - a2_ref) ** 2,
                                          np.abs(b - b_ref) ** 2)) / (span * dt) ** 2
            scale2 = np.maximum(1.0, np.maximum(
                n * n, np.maximum(np.abs(a2) ** 2, np.abs(b) ** 2)))
            # nan compares false everywhere, so blown-up states fall through
            # to the divergence branch below instead of "converging"
            newly = active & (rate2 < tol * tol * scale2)
            converged |= newly
            steps[newly] = done
            active &= ~newly
            # blown-up trajectories (inf/nan included) never come back
            diverged = active & (~(scale2 < 1e32) | ~(rate2 < 1e64))
            steps[diverged] = done
            active &= ~diverged
            n_ref, a2_ref, b_ref = n.copy(), a2.copy(), b.copy()

    out = np.empty((m, 3), dtype=np.complex128)
    out[:, 0] = n
    out[:, 1] = a2
    out[:, 2] = b
    return out, converged, steps


# ---------------------------------------------------------------------------
# spectral rows, pure-numpy twin
# ---------------------------------------------------------------------------

def _spectrum_rows_numpy(A, d4, omegas):
    ident = np.eye(4, dtype=np.complex128)
    B = 1j * omegas[:, None, None] * ident + A[None, :, :]
    Minv = np.linalg.inv(B)
    rows = Minv[:, 2:4, :]                      # mechanical rows of the response
    w = rows * d4[None, None, :]
    h33 = np.einsum("nk,nk->n", w[:, 0, :], rows[:, 0, :].conj()).real
    h44 = np.einsum("nk,nk->n", w[:, 1, :], rows[:, 1, :].conj()).real
    h34 = np.einsum("nk,nk->n", w[:, 0, :], rows[:, 1, :].conj()).real
    return np.stack([h33, h44, h34], axis=1)


# ---------------------------------------------------------------------------
# public dispatchers
# ---------------------------------------------------------------------------

def relax_batch(seeds, delta, Omega_M, G0, kappa, gamma, F, dt, max_steps, tol):
    """Integrate the mean-field equations for a batch of seeds.

    Parameters
    ----------
    seeds : (m, 3) complex array
        Initial ``(n, a_sq, beta)`` per trajectory; the real part of the
        first column is used for the population.
    dt : float
        Fixed RK4 step.  Stability requires ``dt <~ 0.1 / max rate``.
    max_steps : int
        Step budget per trajectory.
    tol : float
        Convergence threshold on the state change per unit time,
        relative to ``max(1, |state|)``.  The rate is measured over a
        1024-step window so that roundoff-driven oscillation noise
        averages out and only the secular drift counts.

    Returns
    -------
    out : (m, 3) complex array
    converged : (m,) bool array
    steps : (m,) int array
        Steps taken until convergence (``max_steps`` if none).
    """
    seeds = np.ascontiguousarray(seeds, dtype=np.complex128)
    if get_backend() == "numba":
        mod = _try_load_numba()
        return mod.relax_batch(seeds, float(delta), float(Omega_M), float(G0),
                               float(kappa), float(gamma), complex(F),
                               float(dt), int(max_steps), float(tol))
    return _relax_batch_numpy(seeds, float(delta), float(Omega_M), float(G0),
                              float(kappa), float(gamma), complex(F),
                              float(dt), int(max_steps), float(tol))


def spectrum_rows(A, d4, omegas):
    """Mechanical-block spectral densities on a frequency grid.

    For each frequency builds ``M = (i w I + A)^-1`` and returns the
    three real numbers ``[H_33, H_44, Re H_34]`` of ``H = M diag(d) M^+``
    that fix the spectrum of any mechanical quadrature.

    Returns an ``(n, 3)`` float array.
    """
    A = np.ascontiguousarray(A, dtype=np.float64)
    d4 = np.ascontiguousarray(d4, dtype=np.float64)
    omegas = np.ascontiguousarray(omegas, dtype=np.float64)
    if get_backend() == "numba":
        mod = _try_load_numba()
        return mod.spectrum_rows(A, d4, omegas)
    return _spectrum_rows_numpy(A, d4, omegas)
