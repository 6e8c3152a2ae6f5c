"""Parameter containers and the squeezed-frame transformation.

All rates and frequencies are expressed in units of the bare mechanical
linewidth, so ``gamma_m = 1.0`` is the conventional choice and every
other number is dimensionless.

A working point can be specified two ways:

* laboratory parameters (:class:`SystemParams`): cavity linewidth,
  mechanical frequency, pump detuning, two-photon drive amplitude,
  single-photon coupling, mechanical drive, drive frequency, bath
  occupancy.  :func:`squeeze_frame` maps these to the effective model.
* effective parameters (:class:`EffectiveParams`): the detunings and
  couplings of the squeezed frame given directly.  Useful because some
  regimes of interest are stated directly in these variables.

Everything downstream (steady states, covariances, spectra) consumes
:class:`EffectiveParams` only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .errors import NonPositiveRate, ParametricThreshold, ValidationError

# Relative margin kept between |E| and delta_s before we refuse to squeeze.
_THRESHOLD_MARGIN = 1e-9


@dataclass(frozen=True)
class SystemParams:
    """Laboratory-frame parameters of the driven cavity.

    Parameters
    ----------
    kappa : float
        Cavity amplitude decay rate.
    omega_m : float
        Bare mechanical frequency.
    delta_s : float
        Detuning of the cavity from half the two-photon pump frequency.
    E : float
        Two-photon (parametric) drive amplitude.  Must satisfy
        ``|E| < delta_s``.
    g0 : float
        Single-photon optomechanical coupling.
    F : complex
        Coherent mechanical drive amplitude.
    omega_d : float
        Frequency of the mechanical drive; also sets the rotating frame
        of the slow dynamics.
    gamma_m : float
        Mechanical amplitude decay rate (the unit, normally 1).
    n_m : float
        Thermal occupancy of the mechanical bath.
    """

    kappa: float
    omega_m: float
    delta_s: float
    E: float = 0.0
    g0: float = 0.0
    F: complex = 0j
    omega_d: float = 0.0
    gamma_m: float = 1.0
    n_m: float = 0.0


@dataclass(frozen=True)
class SqueezedFrame:
    """Derived quantities of the Bogoliubov (squeezed) frame."""

    r: float           # squeeze parameter
    omega_s: float     # dressed cavity frequency sqrt(delta_s^2 - E^2)
    delta: float       # dressed cavity detuning omega_s - omega_d / 2
    Omega_M: float     # mechanical detuning omega_m - omega_d
    g_OM: float        # dressed beam-splitter coupling g0 cosh(2r)
    G0: float          # two-photon (pair-creation) coupling g0 sinh(2r) / 2


@dataclass(frozen=True)
class EffectiveParams:
    """Effective model parameters, the common currency of the package."""

    delta: float
    Omega_M: float
    G0: float
    kappa: float
    F: complex = 0j
    gamma_m: float = 1.0
    n_m: float = 0.0


def validate(params: SystemParams) -> SystemParams:
    """Check a :class:`SystemParams` and return it unchanged.

    Raises
    ------
    NonPositiveRate
        If ``kappa``, ``gamma_m`` or ``omega_m`` is not positive.
    ParametricThreshold
        If ``|E|`` is not below ``delta_s`` by a relative margin of
        1e-9; at the threshold the squeeze parameter diverges.
    ValidationError
        If ``n_m`` is negative.
    """
    if params.kappa <= 0.0:
        raise NonPositiveRate(f"kappa must be positive, got {params.kappa}")
    if params.gamma_m <= 0.0:
        raise NonPositiveRate(f"gamma_m must be positive, got {params.gamma_m}")
    if params.omega_m <= 0.0:
        raise NonPositiveRate(f"omega_m must be positive, got {params.omega_m}")
    if params.n_m < 0.0:
        raise ValidationError(f"bath occupancy n_m must be >= 0, got {params.n_m}")
    if params.delta_s - abs(params.E) <= _THRESHOLD_MARGIN * abs(params.delta_s):
        raise ParametricThreshold(
            "two-photon drive too strong: need |E| < delta_s, got "
            f"E={params.E}, delta_s={params.delta_s}"
        )
    return params


def squeeze_frame(params: SystemParams) -> SqueezedFrame:
    """Bogoliubov-transform the parametric drive away.

    The transformation diagonalises the quadratic cavity Hamiltonian.
    It trades the two-photon drive ``E`` for a squeeze parameter

        r = (1/4) ln((delta_s + E) / (delta_s - E))

    and a dressed cavity frequency ``omega_s = sqrt(delta_s^2 - E^2)``.
    The optomechanical coupling splits into a beam-splitter part
    ``g_OM = g0 cosh(2r)`` and a pair-creation part
    ``G0 = g0 sinh(2r) / 2`` that converts squeezed-frame photon pairs
    into phonons and back.
    """
    validate(params)
    ratio = (params.delta_s + params.E) / (params.delta_s - params.E)
    r = 0.25 * math.log(ratio)
    omega_s = math.sqrt((params.delta_s - params.E) * (params.delta_s + params.E))
    return SqueezedFrame(
        r=r,
        omega_s=omega_s,
        delta=omega_s - 0.5 * params.omega_d,
        Omega_M=params.omega_m - params.omega_d,
        g_OM=params.g0 * math.cosh(2.0 * r),
        G0=0.5 * params.g0 * math.sinh(2.0 * r),
    )


def validate_effective(eff: EffectiveParams) -> EffectiveParams:
    """Check an :class:`EffectiveParams` and return it unchanged."""
    if eff.kappa <= 0.0:
        raise NonPositiveRate(f"kappa must be positive, got {eff.kappa}")
    if eff.gamma_m <= 0.0:
        raise NonPositiveRate(f"gamma_m must be positive, got {eff.gamma_m}")
    if eff.n_m < 0.0:
        raise ValidationError(f"bath occupancy n_m must be >= 0, got {eff.n_m}")
    return eff


def effective_params(params: SystemParams) -> EffectiveParams:
    """Collapse laboratory parameters into the effective model."""
    frame = squeeze_frame(params)
    return EffectiveParams(
        delta=frame.delta,
        Omega_M=frame.Omega_M,
        G0=frame.G0,
        kappa=params.kappa,
        F=complex(params.F),
        gamma_m=params.gamma_m,
        n_m=params.n_m,
    )


def with_drive(eff: EffectiveParams, F: complex) -> EffectiveParams:
    """Return a copy of ``eff`` with the mechanical drive replaced."""
    return replace(eff, F=complex(F))
