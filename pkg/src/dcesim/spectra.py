"""Frequency-domain fluctuation spectra and the variance cross-check.

The linearized Langevin equations solve in Fourier space through the
transfer matrix ``M(w) = (i w I + A)^{-1}``; white input noise with
diffusion matrix D then gives the spectral covariance
``Vt(w) = M(w) D M(w)^+``.  The noise spectrum of a mechanical
quadrature at angle theta reads off the 2x2 mechanical block:

    S(w) = cos^2 t * Vt_33 + sin^2 t * Vt_44 + sin(2 t) * Re Vt_34

and integrates back to the stationary variance,
``S_M = (1/2pi) int S(w) dw``, which must reproduce the Lyapunov
covariance.  That equivalence is the point of this module: it is the
independent numerical route against the algebraic one.

Spectra at paper-like parameters are extremely peaked (gamma_m-wide
resonances on a grid spanning tens of Omega_M), so integration uses
knots clustered geometrically around every drift resonance plus global
grid doubling until the integral settles.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import simpson

from . import _kernels
from .errors import (
    NumericalError,
    SingularAtFrequency,
    TailTruncationWarning,
    UnstableDrift,
    ValidationError,
)
from .linear_dynamics import drift_eigenvalues, is_stable

_COND_LIMIT = 1e12


def transfer_matrix(A: np.ndarray, omega: float) -> np.ndarray:
    """Frequency response ``(i w I + A)^{-1}`` of the fluctuations.

    For a strictly stable drift this exists at every real frequency;
    conditioning beyond 1e12 (possible only near marginal stability)
    raises :class:`SingularAtFrequency`.
    """
    A = np.asarray(A, dtype=float)
    B = 1j * omega * np.eye(4) + A
    if np.linalg.cond(B) > _COND_LIMIT:
        raise SingularAtFrequency(f"response ill conditioned at omega={omega}")
    return np.linalg.inv(B)


def spectral_covariance(A: np.ndarray, D: np.ndarray, omega: float) -> np.ndarray:
    """Hermitian spectral covariance ``M(w) D M(w)^+`` at one frequency."""
    M = transfer_matrix(A, omega)
    return M @ np.asarray(D, dtype=float) @ M.conj().T


@dataclass
class SpectrumScan:
    """A quadrature noise spectrum on a frequency grid.

    ``s_theta`` is real, non-negative and even in frequency.
    ``integrated_variance`` is filled by :func:`integrate_variance`.
    """

    omegas: np.ndarray
    s_theta: np.ndarray
    theta: float
    integrated_variance: float | None = field(default=None)


def frequency_grid(A: np.ndarray, span_factor: float = 50.0,
                   backbone: int = 129) -> np.ndarray:
    """Symmetric frequency knots adapted to the drift resonances.

    Every eigenvalue of A contributes a resonance at ``|Im|`` of width
    ``|Re|``; knots ladder geometrically from an eighth of each width
    out to the full span ``span_factor * max(|eigenvalue|)``, over a
    uniform backbone.  The result is the starting grid for adaptive
    refinement, not a converged quadrature grid by itself.
    """
    eigs = drift_eigenvalues(A)
    scale = float(np.abs(eigs).max())
    if scale == 0.0:
        raise ValidationError("drift matrix is zero")
    span = span_factor * scale
    knots = [np.linspace(-span, span, backbone)]
    for lam in eigs:
        center = abs(lam.imag)
        width = max(abs(lam.real), 1e-12 * scale)
        ladder = width * np.geomspace(0.125, max(2.0 * span / width, 0.25), 24)
        ladder = ladder[ladder <= span]
        for c in (center, -center):
            pts = np.concatenate([[c], c + ladder, c - ladder])
            knots.append(pts)
    grid = np.unique(np.concatenate(knots))
    grid = grid[(grid >= -span) & (grid <= span)]
    # exact symmetry of the grid, needed by the symmetrized spectrum
    grid = np.unique(np.concatenate([grid, -grid]))
    return grid


def quadrature_spectrum(A: np.ndarray, D: np.ndarray, theta: float,
                        omegas: np.ndarray) -> SpectrumScan:
    """Noise spectrum of the theta quadrature on a given grid.

    The grid must be symmetric about zero; the returned spectrum is
    symmetrized over +/- omega, which also removes roundoff asymmetry.
    """
    A = np.asarray(A, dtype=float)
    if not is_stable(A):
        raise UnstableDrift("spectrum requested for an unstable working point")
    omegas = np.asarray(omegas, dtype=float)
    span = max(1.0, float(np.abs(omegas).max()))
    if np.abs(omegas + omegas[::-1]).max() > 1e-9 * span:
        raise ValidationError("frequency grid must be symmetric about 0")
    d4 = np.ascontiguousarray(np.diag(np.asarray(D, dtype=float)))
    rows = _kernels.spectrum_rows(A, d4, omegas)
    c, s = math.cos(theta), math.sin(theta)
    raw = c * c * rows[:, 0] + s * s * rows[:, 1] + 2.0 * s * c * rows[:, 2]
    sym = 0.5 * (raw + raw[::-1])
    floor = -1e-10 * max(1.0, float(sym.max(initial=0.0)))
    if sym.min(initial=0.0) < floor:
        raise NumericalError(f"spectrum went negative: {sym.min():.3e}")
    return SpectrumScan(omegas=omegas, s_theta=np.maximum(sym, 0.0), theta=theta)


def integrate_variance(scan: SpectrumScan, tail_fraction: float = 0.01,
                       tail_tol: float = 1e-4) -> float:
    """Stationary variance ``(1/2pi) int S dw`` by composite Simpson.

    Warns with :class:`TailTruncationWarning` when the outermost
    ``tail_fraction`` of the grid span carries more than ``tail_tol``
    of the total, a sign the window is too narrow.  Stores the value
    on ``scan.integrated_variance``.
    """
    x, y = scan.omegas, scan.s_theta
    total = float(simpson(y, x=x)) / (2.0 * math.pi)
    span = x[-1] - x[0]
    lo = x[0] + 0.5 * tail_fraction * span
    hi = x[-1] - 0.5 * tail_fraction * span
    left = x <= lo
    right = x >= hi
    tail = 0.0
    if left.sum() >= 2:
        tail += abs(float(simpson(y[left], x=x[left])))
    if right.sum() >= 2:
        tail += abs(float(simpson(y[right], x=x[right])))
    tail /= 2.0 * math.pi
    if total != 0.0 and tail > tail_tol * abs(total):
        warnings.warn(
            f"outer {tail_fraction:.0%} of the grid holds {tail / abs(total):.2e} "
            "of the variance integral; widen the span",
            TailTruncationWarning, stacklevel=2)
    scan.integrated_variance = total
    return total


def _refine(x: np.ndarray) -> np.ndarray:
    mid = 0.5 * (x[1:] + x[:-1])
    return np.unique(np.concatenate([x, mid]))


def mechanical_variance_spectral(A: np.ndarray, D: np.ndarray, theta: float,
                                 rtol: float = 1e-6,
                                 span_factor: float = 50.0,
                                 max_doublings: int = 12) -> SpectrumScan:
    """Adaptively converged spectral estimate of the theta variance.

    Doubles the grid (midpoint insertion) until the integral changes by
    less than ``rtol`` relative, then returns the final scan with
    ``integrated_variance`` set.  Raises :class:`NumericalError` if the
    doubling budget runs out first.
    """
    grid = frequency_grid(A, span_factor=span_factor)
    scan = quadrature_spectrum(A, D, theta, grid)
    last = integrate_variance(scan)
    for _ in range(max_doublings):
        grid = _refine(grid)
        scan = quadrature_spectrum(A, D, theta, grid)
        value = integrate_variance(scan)
        if abs(value - last) <= rtol * max(abs(value), 1e-300):
            return scan
        last = value
    raise NumericalError(
        f"variance integral did not converge to rtol={rtol} "
        f"within {max_doublings} grid doublings")


def integrated_mech_block(A: np.ndarray, D: np.ndarray,
                          rtol: float = 1e-6,
                          span_factor: float = 50.0,
                          max_doublings: int = 12) -> np.ndarray:
    """Spectral-route mechanical covariance block.

    Integrates the three independent mechanical spectral densities on a
    shared adaptive grid and assembles the 2x2 block; one call prices
    S(theta) for every theta at once.
    """
    A = np.asarray(A, dtype=float)
    if not is_stable(A):
        raise UnstableDrift("spectral covariance requested for an unstable point")
    d4 = np.ascontiguousarray(np.diag(np.asarray(D, dtype=float)))
    grid = frequency_grid(A, span_factor=span_factor)

    def block(x):
        rows = _kernels.spectrum_rows(A, d4, x)
        rows = 0.5 * (rows + rows[::-1, :])
        v33 = float(simpson(rows[:, 0], x=x))
        v44 = float(simpson(rows[:, 1], x=x))
        v34 = float(simpson(rows[:, 2], x=x))
        return np.array([[v33, v34], [v34, v44]]) / (2.0 * math.pi)

    last = block(grid)
    for _ in range(max_doublings):
        grid = _refine(grid)
        value = block(grid)
        gap = np.abs(value - last).max()
        if gap <= rtol * max(float(np.abs(value).max()), 1e-300):
            return value
        last = value
    raise NumericalError(
        f"mechanical block integral did not converge to rtol={rtol} "
        f"within {max_doublings} grid doublings")
