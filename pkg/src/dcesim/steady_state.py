"""Mean-field steady states of the effective model.

The semiclassical equations of motion for the slow variables
(cavity-pair population ``n``, pair amplitude ``a_sq = <a^2>`` and
mechanical amplitude ``beta``) are

    dn/dt    = -4 G0 Im(a_sq conj(beta)) - 2 kappa n
    da_sq/dt = -2i delta a_sq - 2i G0 (2n + 1) beta - 2 kappa a_sq
    dbeta/dt = -i (Omega_M beta + G0 a_sq + F/2) - gamma_m beta

Eliminating ``a_sq`` and ``beta`` at stationarity reduces the problem
to one real cubic in ``z = 2n + 1``:

    (z - 1) |Den(z)|^2 = |F|^2 G0^2 z,
    Den(z) = (gamma_m kappa - delta Omega_M + G0^2 z)
             + i (gamma_m delta + kappa Omega_M)

whose expanded coefficients are built by :func:`cubic_coefficients`.
Physical roots satisfy ``z >= 1``; one root means a single branch,
three mean optical bistability.  The drive window with three roots is
bounded by fold points, roots of the derivative-like cubic solved in
:func:`bistable_window`.

Two independent routes to the same answer are kept on purpose: the
algebraic root solve here, and direct time relaxation of the equations
above (:func:`relax_mean_field`).  Tests cross-check them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, linear_dynamics
from .errors import (
    NoConvergence,
    NumericalError,
    SingularDenominator,
    ValidationError,
)
from .model import EffectiveParams, validate_effective

# roots closer than this (relative) are treated as a fold tangency
_TANGENCY_RTOL = 1e-7
# imaginary part below this (relative) counts as a real root
_REAL_ATOL = 1e-8


@dataclass(frozen=True)
class BranchPoint:
    """One steady-state working point.

    Attributes
    ----------
    z : float
        Population variable ``2 n + 1``.
    n_cav : float
        Cavity pair population ``(z - 1) / 2``.
    a_sq : complex
        Stationary pair amplitude ``<a^2>``.
    beta : complex
        Stationary mechanical amplitude.
    branch : str
        ``lower``, ``middle`` or ``upper`` by population ordering.
    stable : bool or None
        Linear stability of the working point, ``None`` if not yet
        classified.
    """

    z: float
    n_cav: float
    a_sq: complex
    beta: complex
    branch: str
    stable: bool | None = None

    @property
    def alpha(self) -> complex:
        """Principal square root of the pair amplitude."""
        return cmath.sqrt(self.a_sq)

    @property
    def population_mismatch(self) -> float:
        """|a_sq| - n_cav; a diagnostic, zero only for a coherent pair state."""
        return abs(self.a_sq) - self.n_cav


def cubic_coefficients(eff: EffectiveParams) -> tuple[float, float, float, float]:
    """Coefficients ``(c3, c2, c1, c0)`` of the population cubic, highest first.

    The polynomial is ``p(z) = c3 z^3 + c2 z^2 + c1 z + c0`` with

        c3 = -G0^4
        c2 = G0^4 - 2 G0^2 K
        c1 = |F|^2 G0^2 + 2 G0^2 K - L
        c0 = L

    where ``K = gamma_m kappa - delta Omega_M`` and
    ``L = (gamma_m^2 + Omega_M^2)(delta^2 + kappa^2)``.  By construction
    ``p(1) = |F|^2 G0^2 >= 0``.
    """
    g2 = eff.G0 * eff.G0
    g4 = g2 * g2
    K = eff.gamma_m * eff.kappa - eff.delta * eff.Omega_M
    L = (eff.gamma_m ** 2 + eff.Omega_M ** 2) * (eff.delta ** 2 + eff.kappa ** 2)
    f2 = abs(eff.F) ** 2
    return (-g4, g4 - 2.0 * g2 * K, f2 * g2 + 2.0 * g2 * K - L, L)


def _real_roots_ge_one(coeffs: tuple[float, float, float, float]) -> list[float]:
    """Real roots >= 1 of a cubic given highest-first coefficients."""
    c3, c2, c1, c0 = coeffs
    # companion matrix of the monic cubic
    a = c2 / c3
    b = c1 / c3
    c = c0 / c3
    comp = np.array([[0.0, 0.0, -c],
                     [1.0, 0.0, -b],
                     [0.0, 1.0, -a]])
    try:
        roots = np.linalg.eigvals(comp)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - eig on 3x3 is robust
        raise NumericalError("companion eigenvalues failed") from exc
    out = []
    for root in roots:
        if abs(root.imag) > _REAL_ATOL * (1.0 + abs(root.real)):
            continue
        x = float(root.real)
        # two Newton polish steps on the original coefficients
        for _ in range(2):
            p = ((c3 * x + c2) * x + c1) * x + c0
            dp = (3.0 * c3 * x + 2.0 * c2) * x + c1
            if dp != 0.0:
                x -= p / dp
        if x >= 1.0 - 1e-9:
            out.append(max(x, 1.0))
    out.sort()
    # collapse near-degenerate pairs (fold tangency)
    dedup: list[float] = []
    for x in out:
        if dedup and abs(x - dedup[-1]) <= _TANGENCY_RTOL * (1.0 + abs(x)):
            continue
        dedup.append(x)
    return dedup


def population_cubic_roots(eff: EffectiveParams) -> list[float]:
    """All physical population roots ``z >= 1``, ascending.

    With no drive or no pair coupling the cubic degenerates and the only
    steady state is the vacuum, ``z = 1``.
    """
    validate_effective(eff)
    if eff.G0 == 0.0 or eff.F == 0:
        return [1.0]
    return _real_roots_ge_one(cubic_coefficients(eff))


def mean_fields(z: float, eff: EffectiveParams) -> tuple[complex, complex]:
    """Stationary ``(a_sq, beta)`` for a given population root ``z``."""
    K = eff.gamma_m * eff.kappa - eff.delta * eff.Omega_M
    den = 2.0 * complex(K + eff.G0 ** 2 * z,
                        eff.gamma_m * eff.delta + eff.kappa * eff.Omega_M)
    if abs(den) < 1e-300:
        raise SingularDenominator(f"steady-state denominator vanished at z={z}")
    a_sq = -eff.F * eff.G0 * z / den
    beta = eff.F * complex(eff.delta, -eff.kappa) / den
    return a_sq, beta


def mean_field_rhs(n: float, a_sq: complex, beta: complex,
                   eff: EffectiveParams) -> tuple[float, complex, complex]:
    """Time derivatives of ``(n, a_sq, beta)``; zero at a steady state."""
    z = 2.0 * n + 1.0
    dn = -4.0 * eff.G0 * (a_sq * beta.conjugate()).imag - 2.0 * eff.kappa * n
    da = -2.0j * eff.delta * a_sq - 2.0j * (eff.G0 * z) * beta - 2.0 * eff.kappa * a_sq
    db = -1.0j * (eff.Omega_M * beta + eff.G0 * a_sq + 0.5 * eff.F) - eff.gamma_m * beta
    return dn, da, db


_BRANCH_NAMES = {1: ("lower",), 2: ("lower", "upper"), 3: ("lower", "middle", "upper")}


def classify_and_solve(eff: EffectiveParams) -> list[BranchPoint]:
    """Solve, label and stability-classify every steady-state branch.

    Returns branch points ordered by increasing population.  Labels are
    ``lower`` / ``middle`` / ``upper``; a tangency (two coincident
    roots) yields two points labelled ``lower`` and ``upper``.
    """
    roots = population_cubic_roots(eff)
    names = _BRANCH_NAMES[len(roots)]
    points = []
    for z, name in zip(roots, names):
        a_sq, beta = mean_fields(z, eff)
        point = BranchPoint(z=z, n_cav=0.5 * (z - 1.0), a_sq=a_sq, beta=beta,
                            branch=name)
        drift = linear_dynamics.build_drift(point, eff)
        points.append(BranchPoint(z=point.z, n_cav=point.n_cav, a_sq=a_sq,
                                  beta=beta, branch=name,
                                  stable=linear_dynamics.is_stable(drift)))
    return points


def select_branch(points: list[BranchPoint], policy: str) -> list[BranchPoint]:
    """Pick branch points according to a policy.

    ``all`` returns everything, ``upper`` / ``lower`` the named branch
    if present, ``follow-stable`` prefers the upper branch when it is
    stable and falls back to the lower one otherwise.
    """
    if policy == "all":
        return list(points)
    if policy in ("upper", "lower"):
        return [p for p in points if p.branch == policy]
    if policy == "follow-stable":
        upper = [p for p in points if p.branch == "upper"]
        if upper and upper[0].stable:
            return upper
        return [p for p in points if p.branch == "lower"]
    raise ValidationError(f"unknown branch policy {policy!r}")


def bistable_window(eff: EffectiveParams) -> tuple[float, float] | None:
    """Drive-amplitude window ``(F_lo, F_hi)`` with three coexisting roots.

    Fold points are the ``z > 1`` roots of

        q(z) = 2 G0^4 z^3 + (2 G0^2 K - G0^4) z^2 + L

    each mapped back to a drive through
    ``F^2(z) = (z - 1)(G0^4 z^2 + 2 G0^2 K z + L) / (G0^2 z)``.
    Returns ``None`` when no window exists (monostable for every F).
    """
    validate_effective(eff)
    if eff.G0 == 0.0:
        return None
    g2 = eff.G0 ** 2
    g4 = g2 * g2
    K = eff.gamma_m * eff.kappa - eff.delta * eff.Omega_M
    L = (eff.gamma_m ** 2 + eff.Omega_M ** 2) * (eff.delta ** 2 + eff.kappa ** 2)
    folds = _real_roots_ge_one((2.0 * g4, 2.0 * g2 * K - g4, 0.0, L))
    folds = [z for z in folds if z > 1.0 + 1e-12]
    if len(folds) < 2:
        return None
    z_hi_fold, z_lo_fold = folds[0], folds[-1]
    # small-z fold carries the larger drive (upper edge of the window)
    f_of = lambda z: math.sqrt((z - 1.0) * (g4 * z * z + 2.0 * g2 * K * z + L) / (g2 * z))
    f_hi = f_of(z_hi_fold)
    f_lo = f_of(z_lo_fold)
    if f_lo > f_hi:
        f_lo, f_hi = f_hi, f_lo
    return f_lo, f_hi


def relax_mean_field(eff: EffectiveParams,
                     initial: tuple[float, complex, complex] = (0.0, 0j, 0j),
                     t_max: float = 60.0,
                     dt: float | None = None,
                     tol: float = 1e-10) -> tuple[float, complex, complex]:
    """Integrate the mean-field equations to stationarity.

    Fixed-step RK4 from ``initial`` until the state change per unit
    time drops below ``tol`` relative to ``max(1, |state|)``, or
    ``t_max`` is exhausted (then :class:`NoConvergence`).  The change
    rate is measured over ~1000-step windows: the secular drift toward
    the fixed point, with roundoff-scale oscillations averaged out.
    The default step is a tenth of the fastest timescale.

    This is the dynamical cross-check of the algebraic roots: it can
    only ever land on a stable branch.
    """
    validate_effective(eff)
    rate = max(eff.kappa, abs(eff.delta), abs(eff.Omega_M), eff.gamma_m)
    dt_cap = 0.1 / rate
    if dt is None:
        dt = dt_cap
    elif dt <= 0.0 or dt > dt_cap * (1.0 + 1e-12):
        raise ValidationError(f"dt must lie in (0, {dt_cap:.3e}] for this working point")
    seeds = np.array([[complex(initial[0]), complex(initial[1]), complex(initial[2])]],
                     dtype=np.complex128)
    out, ok, _ = _kernels.relax_batch(seeds, eff.delta, eff.Omega_M, eff.G0,
                                      eff.kappa, eff.gamma_m, complex(eff.F),
                                      dt, int(math.ceil(t_max / dt)), tol)
    if not bool(ok[0]):
        raise NoConvergence(f"relaxation did not settle within t_max={t_max}")
    return float(out[0, 0].real), complex(out[0, 1]), complex(out[0, 2])


def relax_mean_field_batch(eff: EffectiveParams, seeds,
                           t_max: float = 60.0,
                           dt: float | None = None,
                           tol: float = 1e-10):
    """Batched :func:`relax_mean_field`; returns ``(states, converged, steps)``.

    ``seeds`` is an ``(m, 3)`` complex array of ``(n, a_sq, beta)``
    triples.  Non-converged trajectories are reported, not raised.
    """
    validate_effective(eff)
    rate = max(eff.kappa, abs(eff.delta), abs(eff.Omega_M), eff.gamma_m)
    dt_cap = 0.1 / rate
    if dt is None:
        dt = dt_cap
    elif dt <= 0.0 or dt > dt_cap * (1.0 + 1e-12):
        raise ValidationError(f"dt must lie in (0, {dt_cap:.3e}] for this working point")
    seeds = np.ascontiguousarray(seeds, dtype=np.complex128)
    if seeds.ndim != 2 or seeds.shape[1] != 3:
        raise ValidationError("seeds must be an (m, 3) array")
    return _kernels.relax_batch(seeds, eff.delta, eff.Omega_M, eff.G0,
                                eff.kappa, eff.gamma_m, complex(eff.F),
                                dt, int(math.ceil(t_max / dt)), tol)
