"""Linearized fluctuation dynamics around a steady state.

Quadrature ordering is ``u = (X, Y, Q, P)``: cavity amplitude and phase
quadratures in the squeezed frame, then the mechanical pair.  With the
convention ``X = (a + a^+)/sqrt(2)`` the vacuum variance is 1/2.

Langevin equations ``du/dt = A u + noise`` define the drift matrix

        [ -k + 2 G0 bi    d - 2 G0 br    -2 G0 ai    2 G0 ar ]
    A = [ -d - 2 G0 br   -k - 2 G0 bi    -2 G0 ar   -2 G0 ai ]
        [  2 G0 ai        2 G0 ar        -g          W       ]
        [ -2 G0 ar        2 G0 ai        -W         -g       ]

with ``k = kappa``, ``g = gamma_m``, ``d = delta``, ``W = Omega_M``,
``ar + i ai = alpha`` the principal root of the pair amplitude and
``br + i bi = beta``.  The steady covariance V solves the Lyapunov
equation ``A V + V A^T = -D`` with the diffusion matrix
``D = diag(kappa, kappa, 2 gamma_m (n_m + 1/2), 2 gamma_m (n_m + 1/2))``.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from .errors import (
    EigenFailure,
    SingularSystem,
    UnphysicalCovariance,
    UnstableDrift,
)
from .model import EffectiveParams

if TYPE_CHECKING:  # pragma: no cover
    from .steady_state import BranchPoint

# default margin below zero required of every drift eigenvalue
_STABILITY_MARGIN = 1e-10
# symplectic eigenvalues may undershoot 1/2 by at most this much
_HEISENBERG_SLACK = 1e-9

_OMEGA_SYMPL = np.array([[0.0, 1.0, 0.0, 0.0],
                         [-1.0, 0.0, 0.0, 0.0],
                         [0.0, 0.0, 0.0, 1.0],
                         [0.0, 0.0, -1.0, 0.0]])


def build_drift(branch: "BranchPoint", eff: EffectiveParams) -> np.ndarray:
    """Drift matrix of the fluctuations around a branch point."""
    alpha = cmath.sqrt(complex(branch.a_sq))
    ar, ai = alpha.real, alpha.imag
    br, bi = branch.beta.real, branch.beta.imag
    g2 = 2.0 * eff.G0
    k, g = eff.kappa, eff.gamma_m
    d, W = eff.delta, eff.Omega_M
    return np.array([
        [-k + g2 * bi, d - g2 * br, -g2 * ai, g2 * ar],
        [-d - g2 * br, -k - g2 * bi, -g2 * ar, -g2 * ai],
        [g2 * ai, g2 * ar, -g, W],
        [-g2 * ar, g2 * ai, -W, -g],
    ])


def noise_matrix(eff: EffectiveParams) -> np.ndarray:
    """Diagonal diffusion matrix for vacuum cavity input and a thermal bath."""
    mech = 2.0 * eff.gamma_m * (eff.n_m + 0.5)
    return np.diag([eff.kappa, eff.kappa, mech, mech])


def drift_eigenvalues(A: np.ndarray) -> np.ndarray:
    """Eigenvalues of the drift matrix, sorted by descending real part."""
    try:
        ev = np.linalg.eigvals(np.asarray(A, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise EigenFailure("drift eigenvalue computation failed") from exc
    order = np.lexsort((ev.imag, -ev.real))
    return ev[order]


def is_stable(A: np.ndarray, margin: float = _STABILITY_MARGIN) -> bool:
    """True when every drift eigenvalue has real part below ``-margin``."""
    return bool(drift_eigenvalues(A)[0].real < -margin)


def stability_margin(A: np.ndarray) -> float:
    """Largest real part among drift eigenvalues (negative means stable)."""
    return float(drift_eigenvalues(A)[0].real)


@dataclass(frozen=True)
class CovarianceState:
    """Steady-state 4x4 quadrature covariance and its bookkeeping."""

    V: np.ndarray
    residual: float  # max |A V + V A^T + D| of the returned, symmetrized V

    @property
    def V_C(self) -> np.ndarray:
        """Cavity 2x2 block."""
        return self.V[:2, :2]

    @property
    def V_M(self) -> np.ndarray:
        """Mechanical 2x2 block."""
        return self.V[2:, 2:]

    @property
    def V_CM(self) -> np.ndarray:
        """Cavity-mechanics cross block."""
        return self.V[:2, 2:]

    def symplectic_eigenvalues(self) -> np.ndarray:
        """The two symplectic eigenvalues, ascending."""
        return symplectic_eigenvalues(self.V)


def symplectic_eigenvalues(V: np.ndarray) -> np.ndarray:
    """Symplectic spectrum of a 4x4 covariance matrix.

    Eigenvalues of ``Omega V`` come in pairs ``+/- i nu``; the returned
    array holds ``[nu_1, nu_2]`` ascending.  Physical states satisfy
    ``nu >= 1/2``.
    """
    try:
        ev = np.linalg.eigvals(_OMEGA_SYMPL @ np.asarray(V, dtype=float))
    except np.linalg.LinAlgError as exc:
        raise EigenFailure("symplectic eigenvalue computation failed") from exc
    nu = np.sort(np.abs(ev))
    return np.array([nu[0], nu[2]])


def solve_lyapunov(A: np.ndarray, D: np.ndarray) -> CovarianceState:
    """Steady covariance from ``A V + V A^T = -D``.

    The 4x4 equation is vectorized to a dense 16x16 linear system
    ``(A (x) I + I (x) A) vec(V) = -vec(D)`` and solved by LU with
    partial pivoting.  The result is symmetrized, then validated:
    residual against the equation, symmetry of the raw solution,
    positivity, and the Heisenberg bound on the symplectic spectrum.

    Raises
    ------
    UnstableDrift
        If ``A`` is not strictly stable (no stationary state exists).
    SingularSystem
        If the linear solve fails or validation of the residual or
        symmetry fails.
    UnphysicalCovariance
        If the solution is not positive definite or violates
        ``nu >= 1/2 - 1e-9``.
    """
    A = np.asarray(A, dtype=float)
    D = np.asarray(D, dtype=float)
    if not is_stable(A):
        raise UnstableDrift(
            f"drift matrix has eigenvalue with Re >= -{_STABILITY_MARGIN}; "
            "no steady covariance")
    ident = np.eye(4)
    system = np.kron(A, ident) + np.kron(ident, A)
    try:
        vec = np.linalg.solve(system, -D.reshape(16))
    except np.linalg.LinAlgError as exc:
        raise SingularSystem("Lyapunov system singular") from exc
    V = vec.reshape(4, 4)
    scale = max(1.0, float(np.abs(V).max()))
    asym = float(np.abs(V - V.T).max())
    if asym > 1e-10 * scale:
        raise SingularSystem(f"Lyapunov solution asymmetric: {asym:.3e}")
    V = 0.5 * (V + V.T)
    residual = float(np.abs(A @ V + V @ A.T + D).max())
    if residual > 1e-8 * max(1.0, float(np.abs(D).max())):
        raise SingularSystem(f"Lyapunov residual too large: {residual:.3e}")
    nu = symplectic_eigenvalues(V)
    if nu[0] < 0.5 - _HEISENBERG_SLACK:
        raise UnphysicalCovariance(f"symplectic eigenvalue {nu[0]} below 1/2")
    if np.linalg.eigvalsh(V).min() <= 0.0:
        raise UnphysicalCovariance("covariance not positive definite")
    return CovarianceState(V=V, residual=residual)


def steady_covariance(branch: "BranchPoint", eff: EffectiveParams) -> CovarianceState:
    """Drift, noise and Lyapunov solve in one step for a branch point."""
    return solve_lyapunov(build_drift(branch, eff), noise_matrix(eff))
