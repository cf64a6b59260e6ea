"""Path simulation, coupling dynamics, and change-of-measure weights."""

import math

import numpy as np
import pytest

from wfgem import (
    CouplingPath,
    WFParams,
    couple_ensemble,
    coupling_drift_rate,
    coupling_envelope,
    girsanov_bound,
    girsanov_moment,
    mc_expectation,
    path_generator,
    rho,
    simulate_coupling,
    simulate_ensemble,
    simulate_path,
    step_wf,
)

P_HALF = WFParams(0.5, 0.5)


# ---------------------------------------------------------------------------
# stepping


def test_step_wf_formula():
    x, dt, dW = 0.3, 0.01, 0.05
    expected = x + (0.5 - 1.0 * x) * dt + math.sqrt(x * (1 - x)) * dW
    assert step_wf(x, dt, dW, P_HALF) == pytest.approx(expected, rel=1e-15)


def test_step_wf_clamps_to_unit_interval():
    assert step_wf(0.999, 0.01, 5.0, P_HALF) == 1.0
    assert step_wf(0.001, 0.01, -5.0, P_HALF) == 0.0


def test_step_wf_vectorized_and_validated():
    out = step_wf(np.array([0.1, 0.5, 0.9]), 0.01, np.array([0.0, 0.1, -0.1]), P_HALF)
    assert out.shape == (3,)
    assert np.all((out >= 0) & (out <= 1))
    with pytest.raises(ValueError):
        step_wf(0.5, 0.0, 0.1, P_HALF)


# ---------------------------------------------------------------------------
# single paths


def test_simulate_path_deterministic():
    a = simulate_path(0.3, 1.0, 1e-3, P_HALF, seed=42)
    b = simulate_path(0.3, 1.0, 1e-3, P_HALF, seed=42)
    c = simulate_path(0.3, 1.0, 1e-3, P_HALF, seed=43)
    assert np.array_equal(a.states, b.states)
    assert not np.array_equal(a.states, c.states)


def test_simulate_path_grid_and_range():
    s = simulate_path(0.3, 1.0, 1e-3, P_HALF, seed=1, store_every=7)
    assert s.times[0] == 0.0
    assert s.times[-1] == pytest.approx(1.0)
    assert np.all((s.states >= 0) & (s.states <= 1))


def test_simulate_path_thinning_is_a_stride():
    # stored states are a stride of the dense path, not a re-simulation
    dense = simulate_path(0.3, 0.5, 1e-3, P_HALF, seed=9)
    thin = simulate_path(0.3, 0.5, 1e-3, P_HALF, seed=9, store_every=10)
    assert np.array_equal(dense.states[::10], thin.states)


def test_lamperti_scheme_stays_in_domain():
    s = simulate_path(0.05, 1.0, 1e-3, WFParams(0.3, 0.3), seed=5, scheme="lamperti")
    assert np.all((s.states >= 0) & (s.states <= 1))
    with pytest.raises(ValueError):
        simulate_path(0.5, 1.0, 1e-3, P_HALF, seed=1, scheme="milstein")


def test_mean_follows_the_drift_ode():
    # E x_t = a/s + (x0 - a/s) e^{-st}
    p = WFParams(1.0, 0.5)
    x0, T, dt, n = 0.2, 0.5, 1e-3, 4000
    res = simulate_ensemble(x0, T, dt, p, n, seed=7)
    s = p.a + p.b
    target = p.a / s + (x0 - p.a / s) * math.exp(-s * T)
    se = float(res.final.std(ddof=1) / math.sqrt(n))
    assert abs(float(res.final.mean()) - target) <= 4 * se + 5 * dt


def test_boundary_attracting_parameters_clamp():
    s = simulate_path(0.02, 2.0, 1e-3, WFParams(0.15, 0.15), seed=3)
    assert s.clamp_count > 0


# ---------------------------------------------------------------------------
# ensembles


def test_ensemble_snapshots_and_histogram():
    res = simulate_ensemble(
        0.3, 0.2, 1e-3, P_HALF, 50, seed=11, snapshot_times=(0.0, 0.1, 0.2), histogram_bins=32
    )
    assert np.all(res.snapshots[0] == 0.3)
    assert res.snapshots.shape == (3, 50)
    assert int(res.histogram.sum()) == res.n_steps * 50
    assert np.array_equal(res.snapshots[2], res.final)


def test_ensemble_stationary_start_mean():
    p = WFParams(1.0, 3.0)
    res = simulate_ensemble(0.0, 0.01, 0.01, p, 4000, seed=13, stationary_start=True)
    # a single step barely moves the Beta(2a,2b) initial law
    assert float(res.final.mean()) == pytest.approx(p.a / (p.a + p.b), abs=0.03)


def test_ensemble_per_path_starts():
    starts = np.linspace(0.1, 0.9, 5)
    res = simulate_ensemble(starts, 0.01, 0.01, P_HALF, 5, seed=17, snapshot_times=(0.0,))
    assert np.array_equal(res.snapshots[0], starts)
    with pytest.raises(ValueError):
        simulate_ensemble(np.array([0.5, 1.5]), 0.1, 0.01, P_HALF, 2, seed=1)


def test_mc_expectation_of_constant():
    est = mc_expectation(lambda x: np.ones_like(x), 0.3, 0.1, P_HALF, 200, 1e-2, seed=19)
    assert est.mean == 1.0
    assert est.std_error == 0.0
    with pytest.raises(ValueError):
        mc_expectation(lambda x: x, 0.3, 0.1, P_HALF, 50, 1e-2, seed=19)


# ---------------------------------------------------------------------------
# coupling


def test_envelope_and_drift_rate_endpoints():
    p = P_HALF
    rho0 = float(rho(0.1, 0.9))
    assert coupling_envelope(p, rho0, 2.0, 0.0) == pytest.approx(rho0, rel=1e-14)
    assert coupling_envelope(p, rho0, 2.0, 2.0) == pytest.approx(0.0, abs=1e-14)
    # K = 0: constant drift rate rho0/T and linear envelope
    flat = WFParams(0.2, 0.2)
    ts = np.linspace(0, 2, 5)
    assert np.allclose(coupling_drift_rate(flat, rho0, 2.0, ts), rho0 / 2.0)
    assert np.allclose(coupling_envelope(flat, rho0, 2.0, ts), rho0 * (2.0 - ts) / 2.0)


def test_envelope_decreasing():
    ts = np.linspace(0, 2, 40)
    env = coupling_envelope(P_HALF, 1.0, 2.0, ts)
    assert np.all(np.diff(env) < 0)


def test_trivial_coupling_from_equal_starts():
    cp = simulate_coupling(0.4, 0.4, 1.0, 1e-3, P_HALF, seed=23)
    assert cp.coupled and cp.tau == 0.0
    assert cp.girsanov_log == 0.0
    assert cp.violation_count == 0
    assert np.array_equal(cp.x, cp.y)


def test_coupling_orientation_canonical():
    a = simulate_coupling(0.1, 0.9, 1.0, 1e-2, P_HALF, seed=29)
    b = simulate_coupling(0.9, 0.1, 1.0, 1e-2, P_HALF, seed=29)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)
    assert a.rho0 == b.rho0


def test_coupling_merges_and_respects_envelope():
    cp = simulate_coupling(0.1, 0.9, 2.0, 1e-3, P_HALF, seed=31)
    assert cp.coupled and 0 < cp.tau <= 2.0
    merged = cp.times >= cp.tau
    assert np.array_equal(cp.x[merged], cp.y[merged])
    assert cp.violation_count <= max(1, cp.alive_count // 100)
    assert math.isfinite(cp.girsanov_log)


def test_couple_ensemble_matches_single_path_stream():
    kw = dict(x0=0.1, y0=0.9, T=1.0, dt=1e-3, seed=37)
    single = simulate_coupling(p=P_HALF, **kw)
    ens = couple_ensemble(p=P_HALF, n_paths=3, **kw)
    assert ens.tau[0] == single.tau
    assert ens.girsanov_log[0] == pytest.approx(single.girsanov_log, abs=1e-12)
    assert bool(ens.coupled[0]) == single.coupled


def test_couple_ensemble_fraction_and_moment():
    ens = couple_ensemble(0.2, 0.8, 2.0, 1e-2, P_HALF, 200, seed=41)
    assert ens.coupled_fraction > 0.95
    est = girsanov_moment(ens, 2.0)
    bound = girsanov_bound(P_HALF, ens.rho0, 2.0, 2.0)
    assert est.mean - 3 * est.std_error <= bound


def test_girsanov_bound_formulas():
    rho0, T = 1.2, 2.0
    # K = 0 convention: exp[p rho0^2 / (2T (p-1)^2)]
    flat = girsanov_bound(WFParams(0.2, 0.2), rho0, T, 2.0)
    assert flat == pytest.approx(math.exp(2 * rho0**2 / (2 * T)), rel=1e-14)
    curved = girsanov_bound(P_HALF, rho0, T, 3.0)
    expected = math.exp(3 * rho0**2 * 0.5 / ((math.exp(2 * 0.5 * T) - 1) * 4))
    assert curved == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        girsanov_bound(P_HALF, rho0, T, 1.0)


def _fake_coupling(girsanov_log, coupled):
    z = np.zeros(2)
    return CouplingPath(
        times=z, x=z, y=z, envelope=z, params=P_HALF, dt=0.1, seed=0, rho0=1.0, T=1.0,
        tau=0.5 if coupled else math.inf, coupled=coupled,
        girsanov_log=girsanov_log, violation_count=0, alive_count=1,
    )


def test_girsanov_moment_rejects_uncoupled_with_warning():
    paths = [_fake_coupling(0.0, True), _fake_coupling(0.1, True), _fake_coupling(9.9, False)]
    with pytest.warns(UserWarning):
        est = girsanov_moment(paths, 2.0)
    assert est.n == 2
    assert est.mean == pytest.approx(0.5 * (1.0 + math.exp(0.2)), rel=1e-12)


def test_girsanov_moment_validation():
    with pytest.raises(ValueError):
        girsanov_moment([_fake_coupling(0.0, True)], 2.0)
    with pytest.raises(ValueError):
        girsanov_moment([_fake_coupling(0.0, True)] * 2, 1.0)
    with pytest.raises(ValueError):
        girsanov_moment([], 2.0)


def test_path_generator_streams_are_independent():
    g0 = path_generator(5, 0).standard_normal(4)
    g0_again = path_generator(5, 0).standard_normal(4)
    g1 = path_generator(5, 1).standard_normal(4)
    assert np.array_equal(g0, g0_again)
    assert not np.array_equal(g0, g1)
