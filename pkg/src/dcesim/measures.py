"""Gaussian-state figures of merit from the steady covariance.

Everything here consumes covariance blocks in the 1/2-vacuum
convention.  The cavity-mechanics entanglement is the logarithmic
negativity of the 4x4 covariance; mechanical squeezing is judged
against the standard quantum limit ``SQL = 1/2``; the Wigner function
of the mechanical mode is the Gaussian fixed entirely by its 2x2
block.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SingularCovariance, UnphysicalCovariance, ValidationError
from .linear_dynamics import CovarianceState

#: vacuum quadrature variance, the standard quantum limit
SQL = 0.5
# eta within this distance of 1/2 reports exactly zero entanglement
_SEPARABLE_ATOL = 1e-12


@dataclass(frozen=True)
class NegativityResult:
    """Logarithmic negativity and the partial-transpose eigenvalue behind it."""

    eta_minus: float
    E_N: float


def log_negativity(cov: CovarianceState | np.ndarray) -> NegativityResult:
    """Logarithmic negativity of a two-mode Gaussian state.

    Uses the determinant form: with ``V = [[A, C], [C^T, B]]`` in 2x2
    blocks and ``Sigma = det A + det B - 2 det C``, the smaller
    symplectic eigenvalue of the partial transpose is

        eta_minus = sqrt((Sigma - sqrt(Sigma^2 - 4 det V)) / 2)

    and ``E_N = max(0, -ln(2 eta_minus))``.  Values of ``eta_minus``
    within 1e-12 of 1/2 are reported as exactly separable (``E_N = 0``)
    to avoid sign noise at the boundary.
    """
    V = cov.V if isinstance(cov, CovarianceState) else np.asarray(cov, dtype=float)
    if V.shape != (4, 4):
        raise ValidationError(f"need a 4x4 covariance, got shape {V.shape}")
    det_a = float(np.linalg.det(V[:2, :2]))
    det_b = float(np.linalg.det(V[2:, 2:]))
    det_c = float(np.linalg.det(V[:2, 2:]))
    det_v = float(np.linalg.det(V))
    sigma = det_a + det_b - 2.0 * det_c
    disc = sigma * sigma - 4.0 * det_v
    if disc < 0.0:
        if disc < -1e-12 * max(1.0, sigma * sigma):
            raise UnphysicalCovariance(f"negative discriminant {disc:.3e}")
        disc = 0.0
    eta_sq = 0.5 * (sigma - math.sqrt(disc))
    if eta_sq < 0.0:
        if eta_sq < -1e-12 * max(1.0, abs(sigma)):
            raise UnphysicalCovariance(f"negative eta^2 = {eta_sq:.3e}")
        eta_sq = 0.0
    eta = math.sqrt(eta_sq)
    if abs(eta - 0.5) <= _SEPARABLE_ATOL:
        return NegativityResult(eta_minus=eta, E_N=0.0)
    return NegativityResult(eta_minus=eta, E_N=max(0.0, -math.log(2.0 * eta)))


def quadrature_variance(V_M: np.ndarray, theta: float) -> float:
    """Variance of the rotated mechanical quadrature ``Q cos t + P sin t``."""
    V_M = np.asarray(V_M, dtype=float)
    c, s = math.cos(theta), math.sin(theta)
    return float(c * c * V_M[0, 0] + s * s * V_M[1, 1]
                 + 2.0 * s * c * V_M[0, 1])


@dataclass(frozen=True)
class QuadratureScan:
    """Variance versus quadrature angle, with the analytic extrema.

    ``theta_min`` / ``theta_max`` come from the closed-form extremum of
    the quadratic form, not from the sampled grid, and land in
    ``[0, pi)``.  ``S_min`` equals the smaller eigenvalue of ``V_M``.
    """

    thetas: np.ndarray
    variances: np.ndarray
    theta_min: float
    S_min: float
    theta_max: float
    S_max: float
    sql: float = SQL


def scan_quadratures(V_M: np.ndarray, n_theta: int = 181) -> QuadratureScan:
    """Sample S(theta) on ``[0, pi]`` and report the analytic extrema."""
    if n_theta < 2:
        raise ValidationError("n_theta must be at least 2")
    V_M = np.asarray(V_M, dtype=float)
    thetas = np.linspace(0.0, math.pi, n_theta)
    c, s = np.cos(thetas), np.sin(thetas)
    variances = (c * c * V_M[0, 0] + s * s * V_M[1, 1]
                 + 2.0 * s * c * V_M[0, 1])
    # extremum angle of the quadratic form; the other extremum is pi/2 away
    theta_star = 0.5 * math.atan2(2.0 * V_M[0, 1], V_M[0, 0] - V_M[1, 1])
    s0 = quadrature_variance(V_M, theta_star)
    s1 = quadrature_variance(V_M, theta_star + 0.5 * math.pi)
    if s0 <= s1:
        theta_min, s_min, theta_max, s_max = theta_star, s0, theta_star + 0.5 * math.pi, s1
    else:
        theta_min, s_min, theta_max, s_max = theta_star + 0.5 * math.pi, s1, theta_star, s0
    theta_min %= math.pi
    theta_max %= math.pi
    return QuadratureScan(thetas=thetas, variances=variances,
                          theta_min=theta_min, S_min=s_min,
                          theta_max=theta_max, S_max=s_max)


def below_sql(V_M: np.ndarray) -> bool:
    """True when some quadrature angle beats the standard quantum limit."""
    return scan_quadratures(V_M, n_theta=2).S_min < SQL


@dataclass(frozen=True)
class WignerGrid:
    """Gaussian Wigner function of the mechanical mode on a uniform grid.

    ``values[i, j]`` is W at ``(q_axis[i], p_axis[j])``.
    ``half_max_level`` is half the peak of this Gaussian;
    ``sql_radius = sqrt(ln 2)`` is the half-max radius of the vacuum
    comparison state, the circle marking the SQL in phase space.
    """

    q_axis: np.ndarray
    p_axis: np.ndarray
    values: np.ndarray
    half_max_level: float
    sql_radius: float

    def normalization_defect(self) -> float:
        """|1 - grid integral|, trapezoidal; small only if the grid spans the state."""
        integral = np.trapezoid(np.trapezoid(self.values, self.p_axis, axis=1),
                                self.q_axis)
        return abs(1.0 - float(integral))


def wigner_grid(V_M: np.ndarray,
                center: tuple[float, float] = (0.0, 0.0),
                half_widths: float | tuple[float, float] | None = None,
                n_points: int = 201) -> WignerGrid:
    """Evaluate the mechanical Wigner function on a grid.

        W(u) = exp(-u^T V_M^{-1} u / 2) / (2 pi sqrt(det V_M))

    in fluctuation coordinates ``u = (q, p)`` with the Gaussian at the
    origin; ``center`` only moves the grid window.  Default window is
    ``center +/- 5 sqrt(max eigenvalue)``, wide enough that the grid
    integral is 1 to better than 1e-3.
    """
    V_M = np.asarray(V_M, dtype=float)
    if V_M.shape != (2, 2):
        raise ValidationError(f"need a 2x2 mechanical block, got shape {V_M.shape}")
    if n_points < 3 or n_points % 2 == 0:
        raise ValidationError("n_points must be odd and >= 3 so the grid hits the center")
    det = float(np.linalg.det(V_M))
    if det < 1e-300:
        raise SingularCovariance(f"mechanical covariance nearly singular, det={det:.3e}")
    eigs = np.linalg.eigvalsh(V_M)
    if eigs[0] <= 0.0:
        raise SingularCovariance("mechanical covariance not positive definite")
    if half_widths is None:
        half_widths = 5.0 * math.sqrt(float(eigs[-1]))
    if np.isscalar(half_widths):
        hq = hp = float(half_widths)
    else:
        hq, hp = (float(h) for h in half_widths)
    if hq <= 0.0 or hp <= 0.0:
        raise ValidationError("half_widths must be positive")
    q = center[0] + np.linspace(-hq, hq, n_points)
    p = center[1] + np.linspace(-hp, hp, n_points)
    inv = np.linalg.inv(V_M)
    qq = q[:, None]
    pp = p[None, :]
    quad = inv[0, 0] * qq * qq + 2.0 * inv[0, 1] * qq * pp + inv[1, 1] * pp * pp
    norm = 1.0 / (2.0 * math.pi * math.sqrt(det))
    values = norm * np.exp(-0.5 * quad)
    return WignerGrid(q_axis=q, p_axis=p, values=values,
                      half_max_level=0.5 * norm,
                      sql_radius=math.sqrt(math.log(2.0)))


def wigner_lab_view(grid: WignerGrid, beta: complex) -> WignerGrid:
    """Displaced laboratory-frame rendering of a Wigner grid.

    Applies the affine map ``coords -> (Re beta, Im beta) + sqrt(2) * u``
    and doubles the density.  This is a display transform of the same
    Gaussian, not a renormalization.
    """
    root2 = math.sqrt(2.0)
    return WignerGrid(q_axis=beta.real + root2 * grid.q_axis,
                      p_axis=beta.imag + root2 * grid.p_axis,
                      values=2.0 * grid.values,
                      half_max_level=2.0 * grid.half_max_level,
                      sql_radius=grid.sql_radius)
