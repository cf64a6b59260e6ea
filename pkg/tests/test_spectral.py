"""Spectral basis, heat kernel, ball volumes: oracles and invariants."""

import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.stats import beta as beta_dist

from wfgem import (
    TruncationFloorError,
    WFParams,
    ball_volume,
    beta_moment,
    build_basis,
    chebyshev_grid,
    heat_kernel,
    kernel_deviation_diagonal,
    recurrence_coefficients,
    semigroup_apply,
    sup_kernel,
)

PARAMS = [WFParams(0.5, 0.5), WFParams(0.5, 1.0), WFParams(1.0, 2.0), WFParams(0.25, 0.25)]


# ---------------------------------------------------------------------------
# moments and recurrence


@pytest.mark.parametrize("p", PARAMS)
def test_beta_moment_matches_scipy(p):
    dist = beta_dist(2 * p.a, 2 * p.b)
    for k in range(7):
        assert beta_moment(p, k) == pytest.approx(float(dist.moment(k)), rel=1e-12)


def test_beta_moment_validation():
    with pytest.raises(ValueError):
        beta_moment(WFParams(0.5, 0.5), -1)


@pytest.mark.parametrize("p", PARAMS)
def test_recurrence_mean_and_variance(p):
    A, B = recurrence_coefficients(p, 5)
    dist = beta_dist(2 * p.a, 2 * p.b)
    assert A[0] == pytest.approx(float(dist.mean()), rel=1e-14)
    assert B[1] == pytest.approx(float(dist.var()), rel=1e-12)


def test_recurrence_norms_positive():
    A, B = recurrence_coefficients(WFParams(0.5, 0.5), 200)
    assert np.all(B > 0)
    assert np.all(np.isfinite(A))


# ---------------------------------------------------------------------------
# basis construction


@pytest.mark.parametrize("p", PARAMS)
def test_basis_residuals_and_eigenvalues(p):
    basis = build_basis(p, 60)
    assert basis.ortho_residual < 1e-10
    assert basis.eigen_residual < 1e-8
    n = np.arange(61, dtype=float)
    expected = 0.5 * n * (n - 1) + n * (p.a + p.b)
    assert np.allclose(basis.eigenvalues, expected, rtol=0, atol=0)


def test_basis_quadrature_integrates_polynomials_exactly():
    p = WFParams(0.5, 1.0)
    basis = build_basis(p, 20)
    for k in range(8):
        got = float(np.sum(basis.weights * basis.nodes**k))
        assert got == pytest.approx(beta_moment(p, k), rel=1e-12)


def test_basis_rejects_bad_sizes():
    with pytest.raises(ValueError):
        build_basis(WFParams(0.5, 0.5), 0)
    with pytest.raises(ValueError):
        build_basis(WFParams(0.5, 0.5), 10, n_quad=5)


def test_first_eigenfunction_is_affine():
    p = WFParams(0.5, 1.5)
    basis = build_basis(p, 10)
    x = np.linspace(0, 1, 7)
    q1 = basis.evaluate(x)[1]
    # Q_1 is affine with zero mean and unit variance under Beta(2a,2b)
    dist = beta_dist(2 * p.a, 2 * p.b)
    expected = (x - dist.mean()) / math.sqrt(dist.var())
    assert np.allclose(np.abs(q1), np.abs(expected), atol=1e-12)


# ---------------------------------------------------------------------------
# heat kernel


def test_semigroup_preserves_constants_and_eigenfunctions():
    p = WFParams(0.5, 0.5)
    basis = build_basis(p, 40)
    x = np.linspace(0, 1, 9)
    ones = semigroup_apply(basis, 0.7, lambda z: np.ones_like(z), x)
    assert np.allclose(ones, 1.0, atol=1e-12)
    # P_t Q_3 = e^{-lambda_3 t} Q_3
    coeffs_row = 3
    f = lambda z: basis.evaluate(z)[coeffs_row]
    lhs = semigroup_apply(basis, 0.3, f, x)
    rhs = math.exp(-basis.eigenvalues[coeffs_row] * 0.3) * basis.evaluate(x)[coeffs_row]
    assert np.allclose(lhs, rhs, atol=1e-10)


def test_semigroup_scalar_argument():
    basis = build_basis(WFParams(1.0, 1.0), 20)
    out = semigroup_apply(basis, 0.5, lambda z: z, 0.3)
    assert isinstance(out, float)


@pytest.mark.parametrize("p", PARAMS[:3])
def test_kernel_normalization(p):
    basis = build_basis(p, 60)
    t = 0.2
    ke = heat_kernel(basis, t, np.linspace(0, 1, 5), basis.nodes)
    masses = ke.value @ basis.weights
    assert np.allclose(masses, 1.0, atol=1e-10)


def test_kernel_symmetry_exact():
    basis = build_basis(WFParams(0.5, 1.0), 40)
    x = np.array([0.1, 0.6])
    y = np.array([0.3, 0.9, 1.0])
    a = heat_kernel(basis, 0.4, x, y).value
    b = heat_kernel(basis, 0.4, y, x).value
    assert np.allclose(a, b.T, rtol=0, atol=1e-13)


def test_chapman_kolmogorov_within_truncation():
    p = WFParams(0.5, 0.5)
    basis = build_basis(p, 60)
    s, t = 0.05, 0.08
    x = np.array([0.2])
    y = np.array([0.7])
    direct = heat_kernel(basis, s + t, x, y)
    ks = heat_kernel(basis, s, x, basis.nodes)
    kt = heat_kernel(basis, t, basis.nodes, y)
    composed = float((ks.value @ (basis.weights[:, None] * kt.value))[0, 0])
    budget = 10 * (ks.truncation_error + kt.truncation_error + direct.truncation_error) + 1e-10
    assert abs(direct.scalar - composed) <= budget


def test_kernel_positive_at_moderate_time():
    basis = build_basis(WFParams(0.5, 0.5), 60)
    g = np.linspace(0, 1, 21)
    ke = heat_kernel(basis, 0.5, g, g)
    assert ke.value.min() > 0


def test_kernel_long_time_convergence_to_one():
    basis = build_basis(WFParams(1.0, 1.0), 30)
    g = np.linspace(0, 1, 9)
    ke = heat_kernel(basis, 8.0, g, g)
    assert np.allclose(ke.value, 1.0, atol=1e-6)


def test_kernel_deviation_diagonal_consistent():
    basis = build_basis(WFParams(0.5, 1.0), 50)
    x = np.array([0.15, 0.5, 0.95])
    dev = kernel_deviation_diagonal(basis, 0.6, x)
    diag = np.array([heat_kernel(basis, 0.6, xi, xi).scalar for xi in x])
    assert np.allclose(dev, diag - 1.0, atol=1e-12)


def test_truncation_floor_error():
    basis = build_basis(WFParams(0.5, 0.5), 10)
    with pytest.raises(TruncationFloorError):
        heat_kernel(basis, 1e-4, 0.5, 0.5, tol=1e-8)


def test_kernel_rejects_bad_arguments():
    basis = build_basis(WFParams(0.5, 0.5), 10)
    with pytest.raises(ValueError):
        heat_kernel(basis, 0.0, 0.5, 0.5)
    with pytest.raises(ValueError):
        heat_kernel(basis, 0.5, 1.5, 0.5)


def test_truncation_bound_certifies_refinement():
    # coarse partial sum + its tail bound must cover the refined partial sum
    p = WFParams(0.5, 1.0)
    t = 0.05
    lo = build_basis(p, 40)
    hi = build_basis(p, 120)
    g = np.linspace(0, 1, 9)
    k_lo = heat_kernel(lo, t, g, g)
    k_hi = heat_kernel(hi, t, g, g)
    assert float(np.abs(k_hi.value - k_lo.value).max()) <= k_lo.truncation_error + 1e-12


# ---------------------------------------------------------------------------
# sup kernel and ball volume


def test_sup_kernel_dominates_grid_diagonal():
    basis = build_basis(WFParams(0.5, 0.5), 60)
    sk = sup_kernel(basis, 0.3)
    xs = chebyshev_grid(65)
    diag = np.array([heat_kernel(basis, 0.3, x, x).scalar for x in xs])
    assert sk.value >= diag.max() - 1e-12
    assert 0 <= sk.x <= 1


def test_sup_kernel_decreasing_in_time():
    basis = build_basis(WFParams(1.0, 0.5), 80)
    vals = [sup_kernel(basis, t).value for t in (0.05, 0.2, 1.0)]
    assert vals[0] > vals[1] > vals[2]


def test_chebyshev_grid_shape():
    g = chebyshev_grid(65)
    assert g.shape == (65,)
    assert g[0] == 0.0 and g[-1] == 1.0
    assert np.all(np.diff(g) > 0)


@pytest.mark.parametrize(
    "p,x,r",
    [
        (WFParams(0.5, 0.5), 0.3, 0.4),
        (WFParams(1.0, 2.0), 0.0, 0.2),
        (WFParams(2.0, 2.0), 1.0, 0.15),
        (WFParams(0.25, 1.0), 0.9, 0.6),
    ],
)
def test_ball_volume_quadrature_oracle(p, x, r):
    half = 0.5 * r
    th = math.asin(math.sqrt(x))
    lo = math.sin(max(th - half, 0.0)) ** 2
    hi = math.sin(min(th + half, 0.5 * math.pi)) ** 2
    ref, err = quad(beta_dist(2 * p.a, 2 * p.b).pdf, lo, hi, limit=200)
    assert ball_volume(p, x, r) == pytest.approx(ref, abs=max(1e-9, 10 * err))


def test_ball_volume_monotone_and_exhaustive():
    p = WFParams(0.5, 1.0)
    vols = [ball_volume(p, 0.4, r) for r in (0.1, 0.5, 1.0, 2.0, math.pi)]
    assert all(u < v or v == 1.0 for u, v in zip(vols, vols[1:]))
    assert vols[-1] == pytest.approx(1.0, abs=1e-14)


def test_ball_volume_tiny_interval_near_one():
    # upper-tail intervals must not cancel to zero mass
    vol = ball_volume(WFParams(2.0, 2.0), 1.0, 1e-2)
    assert vol > 0
    lo = math.sin(0.5 * math.pi - 0.5e-2) ** 2
    ref, err = quad(beta_dist(4, 4).pdf, lo, 1.0, limit=200)
    assert vol == pytest.approx(ref, rel=1e-6)


def test_ball_volume_validation():
    with pytest.raises(ValueError):
        ball_volume(WFParams(0.5, 0.5), 1.2, 0.1)
    with pytest.raises(ValueError):
        ball_volume(WFParams(0.5, 0.5), 0.5, 0.0)
