"""Numba-compiled kernels.  Imported lazily by :mod:`dcesim._kernels`.

Arithmetic here must stay in lockstep with the numpy twins in
``_kernels.py``; the test suite compares the two backends point by
point.

The relaxation is split in two: a fastmath stepping span, and a plain
wrapper that does the convergence checks.  Divergent trajectories reach
inf/nan inside a span, and only IEEE-faithful comparisons (no fastmath)
classify those reliably.
"""

import numpy as np
from numba import njit

WINDOW = 1024  # steps between convergence checks; averages out oscillations


@njit(cache=True, fastmath=True)
def _rk4_span(n, a2, b, delta, Omega_M, G0, kappa, gamma, halfF, dt, span):
    sixth = dt / 6.0
    for _ in range(span):
        z = 2.0 * n + 1.0
        k1n = -4.0 * G0 * (a2.imag * b.real - a2.real * b.imag) - 2.0 * kappa * n
        k1a = -2.0j * delta * a2 - 2.0j * (G0 * z) * b - 2.0 * kappa * a2
        k1b = -1.0j * (Omega_M * b + G0 * a2 + halfF) - gamma * b

        n2 = n + 0.5 * dt * k1n
        a22 = a2 + 0.5 * dt * k1a
        b2 = b + 0.5 * dt * k1b
        z = 2.0 * n2 + 1.0
        k2n = -4.0 * G0 * (a22.imag * b2.real - a22.real * b2.imag) - 2.0 * kappa * n2
        k2a = -2.0j * delta * a22 - 2.0j * (G0 * z) * b2 - 2.0 * kappa * a22
        k2b = -1.0j * (Omega_M * b2 + G0 * a22 + halfF) - gamma * b2

        n3 = n + 0.5 * dt * k2n
        a23 = a2 + 0.5 * dt * k2a
        b3 = b + 0.5 * dt * k2b
        z = 2.0 * n3 + 1.0
        k3n = -4.0 * G0 * (a23.imag * b3.real - a23.real * b3.imag) - 2.0 * kappa * n3
        k3a = -2.0j * delta * a23 - 2.0j * (G0 * z) * b3 - 2.0 * kappa * a23
        k3b = -1.0j * (Omega_M * b3 + G0 * a23 + halfF) - gamma * b3

        n4 = n + dt * k3n
        a24 = a2 + dt * k3a
        b4 = b + dt * k3b
        z = 2.0 * n4 + 1.0
        k4n = -4.0 * G0 * (a24.imag * b4.real - a24.real * b4.imag) - 2.0 * kappa * n4
        k4a = -2.0j * delta * a24 - 2.0j * (G0 * z) * b4 - 2.0 * kappa * a24
        k4b = -1.0j * (Omega_M * b4 + G0 * a24 + halfF) - gamma * b4

        n += sixth * (k1n + 2.0 * k2n + 2.0 * k3n + k4n)
        a2 += sixth * (k1a + 2.0 * k2a + 2.0 * k3a + k4a)
        b += sixth * (k1b + 2.0 * k2b + 2.0 * k3b + k4b)
    return n, a2, b


@njit(cache=True)
def relax_batch(seeds, delta, Omega_M, G0, kappa, gamma, F, dt, max_steps, tol):
    m = seeds.shape[0]
    out = np.empty((m, 3), np.complex128)
    converged = np.zeros(m, np.bool_)
    steps = np.full(m, max_steps, np.int64)
    halfF = 0.5 * F
    for s in range(m):
        n = seeds[s, 0].real
        a2 = seeds[s, 1]
        b = seeds[s, 2]
        done = 0
        while done < max_steps:
            n_ref = n
            a2_ref = a2
            b_ref = b
            span = min(WINDOW, max_steps - done)
            n, a2, b = _rk4_span(n, a2, b, delta, Omega_M, G0, kappa, gamma,
                                 halfF, dt, span)
            done += span

            # secular drift over the window, oscillation roundoff averaged out
            da = a2 - a2_ref
            db = b - b_ref
            ra = da.real * da.real + da.imag * da.imag
            rb = db.real * db.real + db.imag * db.imag
            rate2 = max((n - n_ref) ** 2, max(ra, rb)) / (span * dt) ** 2
            sa = a2.real * a2.real + a2.imag * a2.imag
            sb = b.real * b.real + b.imag * b.imag
            scale2 = max(1.0, max(n * n, max(sa, sb)))
            if rate2 < tol * tol * scale2:
                converged[s] = True
                steps[s] = done
                break
            if not (scale2 < 1e32) or not (rate2 < 1e64):
                # diverged (or already inf/nan); never coming back
                steps[s] = done
                break
        out[s, 0] = n
        out[s, 1] = a2
        out[s, 2] = b
    return out, converged, steps


@njit(cache=True, fastmath=True)
def spectrum_rows(A, d4, omegas):
    nw = omegas.shape[0]
    res = np.empty((nw, 3), np.float64)
    B = np.empty((4, 4), np.complex128)
    for i in range(nw):
        w = omegas[i]
        for r in range(4):
            for c in range(4):
                B[r, c] = A[r, c]
            B[r, r] = B[r, r] + 1j * w
        M = np.linalg.inv(B)
        h33 = 0.0
        h44 = 0.0
        h34 = 0.0
        for k in range(4):
            dk = d4[k]
            m2 = M[2, k]
            m3 = M[3, k]
            h33 += dk * (m2.real * m2.real + m2.imag * m2.imag)
            h44 += dk * (m3.real * m3.real + m3.imag * m3.imag)
            h34 += dk * (m2.real * m3.real + m2.imag * m3.imag)
        res[i, 0] = h33
        res[i, 1] = h44
        res[i, 2] = h34
    return res
