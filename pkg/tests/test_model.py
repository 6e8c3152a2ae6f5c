import math

import pytest

from dcesim import (EffectiveParams, SystemParams, effective_params,
                    squeeze_frame, validate, validate_effective, with_drive)
from dcesim.errors import NonPositiveRate, ParametricThreshold, ValidationError


def test_frame_identities_random():
    # omega_s^2 + E^2 = delta_s^2 and g_OM^2 - (2 G0)^2 = g0^2 hold exactly
    import random
    rng = random.Random(73)
    for _ in range(200):
        delta_s = rng.uniform(0.5, 2e4)
        e = delta_s * rng.uniform(0.0, 0.999)
        g0 = rng.uniform(0.0, 200.0)
        p = SystemParams(kappa=1.0, omega_m=1e4, delta_s=delta_s, E=e, g0=g0)
        fr = squeeze_frame(p)
        assert fr.omega_s ** 2 + e ** 2 == pytest.approx(delta_s ** 2, rel=1e-12)
        assert fr.g_OM ** 2 - (2.0 * fr.G0) ** 2 == pytest.approx(g0 ** 2, rel=1e-10, abs=1e-12)
        # r reproduces E through the inverse map E = delta_s tanh(2r)
        assert delta_s * math.tanh(2.0 * fr.r) == pytest.approx(e, rel=1e-10, abs=1e-12)


def test_frame_reference_ratios():
    for e_frac, expect in ((0.43, 0.9028), (0.87, 0.4931), (0.95, 0.3122)):
        p = SystemParams(kappa=500.0, omega_m=1e4, delta_s=1e4, E=e_frac * 1e4, g0=115.0)
        assert squeeze_frame(p).omega_s / 1e4 == pytest.approx(expect, rel=5e-4)


def test_frame_detunings():
    p = SystemParams(kappa=500.0, omega_m=1e4, delta_s=1e4, E=8.7e3,
                     g0=115.0, omega_d=2e3)
    fr = squeeze_frame(p)
    assert fr.Omega_M == pytest.approx(1e4 - 2e3)
    assert fr.delta == pytest.approx(fr.omega_s - 1e3)
    eff = effective_params(p)
    assert eff.delta == fr.delta and eff.Omega_M == fr.Omega_M
    assert eff.G0 == fr.G0 and eff.kappa == 500.0


def test_zero_drive_zero_coupling():
    p = SystemParams(kappa=1.0, omega_m=10.0, delta_s=5.0, E=0.0, g0=3.0)
    fr = squeeze_frame(p)
    assert fr.r == 0.0 and fr.G0 == 0.0 and fr.g_OM == 3.0
    assert fr.omega_s == pytest.approx(5.0)


def test_threshold_guard():
    with pytest.raises(ParametricThreshold):
        validate(SystemParams(kappa=1.0, omega_m=10.0, delta_s=5.0, E=5.0))
    with pytest.raises(ParametricThreshold):
        validate(SystemParams(kappa=1.0, omega_m=10.0, delta_s=5.0, E=5.0 * (1 - 1e-12)))
    validate(SystemParams(kappa=1.0, omega_m=10.0, delta_s=5.0, E=5.0 * (1 - 1e-6)))


def test_validate_rejects_bad_rates():
    with pytest.raises(NonPositiveRate):
        validate(SystemParams(kappa=0.0, omega_m=10.0, delta_s=5.0))
    with pytest.raises(NonPositiveRate):
        validate(SystemParams(kappa=1.0, omega_m=10.0, delta_s=5.0, gamma_m=-1.0))
    with pytest.raises(ValidationError):
        validate(SystemParams(kappa=1.0, omega_m=10.0, delta_s=5.0, n_m=-0.5))
    with pytest.raises(NonPositiveRate):
        validate_effective(EffectiveParams(delta=1.0, Omega_M=1.0, G0=0.0, kappa=-2.0))


def test_with_drive():
    eff = EffectiveParams(delta=1.0, Omega_M=2.0, G0=3.0, kappa=4.0)
    eff2 = with_drive(eff, 7.0 + 1.0j)
    assert eff2.F == 7.0 + 1.0j and eff.F == 0j
    assert eff2.delta == eff.delta
