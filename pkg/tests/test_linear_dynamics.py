import dataclasses

import numpy as np
import pytest

from dcesim import (EffectiveParams, build_drift, classify_and_solve,
                    drift_eigenvalues, is_stable, log_negativity, noise_matrix,
                    solve_lyapunov, stability_margin, steady_covariance,
                    symplectic_eigenvalues)
from dcesim.errors import UnstableDrift

_OMEGA = np.array([[0.0, 1.0, 0.0, 0.0],
                   [-1.0, 0.0, 0.0, 0.0],
                   [0.0, 0.0, 0.0, 1.0],
                   [0.0, 0.0, -1.0, 0.0]])


def _random_eff(rng):
    return EffectiveParams(
        delta=rng.uniform(5e2, 1e4),
        Omega_M=rng.uniform(2e3, 2e4),
        G0=rng.uniform(10.0, 180.0),
        kappa=rng.uniform(50.0, 2e3),
        F=complex(rng.uniform(5e4, 4e5)),
        gamma_m=1.0,
        n_m=rng.uniform(0.0, 5.0),
    )


def _stable_cases(rng, count):
    out = []
    while len(out) < count:
        eff = _random_eff(rng)
        for bp in classify_and_solve(eff):
            if bp.stable:
                out.append((bp, eff))
    return out[:count]


def test_drift_trace_and_hamiltonian_split(base_point):
    # drift = symplectic * symmetric + damping diag; trace fixes the damping
    for bp in classify_and_solve(base_point):
        A = build_drift(bp, base_point)
        assert np.trace(A) == pytest.approx(-2.0 * (base_point.kappa + base_point.gamma_m))
        damping = np.diag([base_point.kappa, base_point.kappa,
                           base_point.gamma_m, base_point.gamma_m])
        H = -_OMEGA @ (A + damping)
        assert np.allclose(H, H.T, atol=1e-9 * max(1.0, np.abs(H).max()))


def test_eigenvalues_sum_and_pairing(base_point):
    bp = classify_and_solve(base_point)[2]
    A = build_drift(bp, base_point)
    eig = drift_eigenvalues(A)
    assert eig.sum().real == pytest.approx(np.trace(A), rel=1e-9)
    assert abs(eig.sum().imag) < 1e-9 * np.abs(eig).max()


def test_noise_matrix_thermal_scaling():
    eff = EffectiveParams(delta=1.0, Omega_M=2.0, G0=0.0, kappa=3.0, n_m=4.0)
    D = noise_matrix(eff)
    assert np.allclose(np.diag(D), [3.0, 3.0, 2.0 * (4.0 + 0.5), 2.0 * (4.0 + 0.5)])
    assert np.count_nonzero(D - np.diag(np.diag(D))) == 0


def _lyapunov_eigen_oracle(A, D):
    # V = S X S^T with X_ij = -(S^-1 D S^-T)_ij / (lam_i + lam_j)
    lam, S = np.linalg.eig(A)
    Sinv = np.linalg.inv(S)
    C = Sinv @ D @ Sinv.T
    X = -C / (lam[:, None] + lam[None, :])
    return np.real(S @ X @ S.T)


def test_lyapunov_against_eigendecomposition(base_point):
    rng = np.random.default_rng(11)
    for bp, eff in _stable_cases(rng, 20):
        A = build_drift(bp, eff)
        D = noise_matrix(eff)
        V = solve_lyapunov(A, D).V
        V_ref = _lyapunov_eigen_oracle(A, D)
        assert np.allclose(V, V_ref, rtol=1e-7, atol=1e-9 * np.abs(V_ref).max())


def test_lyapunov_residual_and_symmetry(base_point):
    bp = classify_and_solve(base_point)[2]
    A = build_drift(bp, base_point)
    D = noise_matrix(base_point)
    cov = solve_lyapunov(A, D)
    res = A @ cov.V + cov.V @ A.T + D
    assert np.abs(res).max() <= 1e-8 * max(1.0, np.abs(D).max())
    assert np.array_equal(cov.V, cov.V.T)
    assert cov.residual <= 1e-8 * max(1.0, np.abs(D).max())


def test_unstable_drift_rejected(base_point):
    middle = classify_and_solve(base_point)[1]
    A = build_drift(middle, base_point)
    assert not is_stable(A)
    assert stability_margin(A) > 0
    with pytest.raises(UnstableDrift):
        solve_lyapunov(A, noise_matrix(base_point))


def test_symplectic_eigenvalues_known_state():
    # thermal state: V = (n + 1/2) I has both symplectic eigenvalues n + 1/2
    V = 3.5 * np.eye(4)
    nu = symplectic_eigenvalues(V)
    assert np.allclose(nu, [3.5, 3.5])
    # pure two-mode squeezed state: both eigenvalues exactly 1/2
    rho = 0.7
    c, s = np.cosh(2 * rho), np.sinh(2 * rho)
    V = 0.5 * np.array([[c, 0, s, 0], [0, c, 0, -s], [s, 0, c, 0], [0, -s, 0, c]])
    nu = symplectic_eigenvalues(V)
    assert np.allclose(nu, [0.5, 0.5], atol=1e-12)


def test_heisenberg_floor_random():
    rng = np.random.default_rng(12)
    for bp, eff in _stable_cases(rng, 30):
        cov = steady_covariance(bp, eff)
        nu = symplectic_eigenvalues(cov.V)
        assert nu.min() >= 0.5 - 1e-9


def _drift_with_alpha(alpha, beta, eff):
    ar, ai = alpha.real, alpha.imag
    br, bi = beta.real, beta.imag
    g2 = 2.0 * eff.G0
    k, g, d, W = eff.kappa, eff.gamma_m, eff.delta, eff.Omega_M
    return np.array([
        [-k + g2 * bi, d - g2 * br, -g2 * ai, g2 * ar],
        [-d - g2 * br, -k - g2 * bi, -g2 * ar, -g2 * ai],
        [g2 * ai, g2 * ar, -g, W],
        [-g2 * ar, g2 * ai, -W, -g],
    ])


def test_alpha_sign_invariance(base_point):
    # the two square roots of a_sq give similar drifts: S A' S = A with
    # S flipping the cavity quadratures, so V_M and E_N cannot change
    import cmath

    S = np.diag([-1.0, -1.0, 1.0, 1.0])
    for bp in classify_and_solve(base_point):
        alpha = cmath.sqrt(complex(bp.a_sq))
        A = build_drift(bp, base_point)
        assert np.allclose(A, _drift_with_alpha(alpha, bp.beta, base_point))
        A_flip = _drift_with_alpha(-alpha, bp.beta, base_point)
        assert np.allclose(S @ A_flip @ S, A, atol=1e-12 * np.abs(A).max())
        if bp.stable:
            cov = steady_covariance(bp, base_point)
            cov_flip = solve_lyapunov(A_flip, noise_matrix(base_point))
            assert np.allclose(cov_flip.V, S @ cov.V @ S,
                               atol=1e-9 * np.abs(cov.V).max())
            assert np.allclose(cov_flip.V_M, cov.V_M,
                               atol=1e-9 * np.abs(cov.V_M).max())
            e1 = log_negativity(cov.V).E_N
            e2 = log_negativity(cov_flip.V).E_N
            assert e1 == pytest.approx(e2, abs=1e-10)
