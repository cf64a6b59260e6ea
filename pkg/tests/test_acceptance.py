"""Full-scale verification battery.

Runs the complete check suite at acceptance scale (the same thing
``wfgem verify`` does) and re-asserts every stated tolerance directly
from the reports, so a regression in either the library or the check
harness is caught here.  Each test prints one ``[PASS]/[FAIL]`` line.

The two suite fixtures are session-scoped: the parallel one backs the
per-family assertions, the serial one exists to prove the report is
byte-identical regardless of worker count.
"""

import contextlib
import time

import pytest

from wfgem import checks
from wfgem.report import canonical_json, suite_report_dict

SEED = checks.DEFAULT_SEED


@pytest.fixture(scope="session")
def suite_parallel():
    t0 = time.perf_counter()
    reports = checks.run_suite(("all",), seed=SEED, workers=4, scale="acceptance")
    return reports, time.perf_counter() - t0


@pytest.fixture(scope="session")
def suite_serial():
    t0 = time.perf_counter()
    reports = checks.run_suite(("all",), seed=SEED, workers=1, scale="acceptance")
    return reports, time.perf_counter() - t0


def _family(reports, name):
    return [r for r in reports if r.name == name]


@contextlib.contextmanager
def _announce(capsys, label):
    try:
        yield
    except BaseException:
        with capsys.disabled():
            print(f"\n[FAIL] {label}")
        raise
    else:
        with capsys.disabled():
            print(f"\n[PASS] {label}")


def test_spectral_oracle_residuals_and_composition(capsys):
    label = "spectral oracle: residuals and composition, 16 parameter pairs, <30 s"
    with _announce(capsys, label):
        t0 = time.perf_counter()
        reports = checks.run_suite(("spectral",), seed=SEED, workers=4, scale="acceptance")
        wall = time.perf_counter() - t0
        assert len(reports) == 16
        combos = {(r.params["a"], r.params["b"]) for r in reports}
        assert combos == {(a, b) for a in (0.25, 0.5, 1.0, 2.0) for b in (0.25, 0.5, 1.0, 2.0)}
        for r in reports:
            assert r.status == "PASS", (r.params, r.failures)
            assert r.params["N"] == 60
            d = r.details
            assert d["ortho_residual"] < 1e-10
            assert d["eigen_residual"] < 1e-8
            assert d["normalization_err"] < 1e-8
            # composition error within ten times the truncation budget
            assert d["ck_err"] <= d["ck_tol"]
        assert wall < 30.0, f"spectral family took {wall:.1f} s"


def test_harnack_inequality_full_sweep(suite_parallel, capsys):
    label = "Harnack inequality: 18 (a,b,p,t) cells x 33^2 pairs x 12 witnesses, <2 min"
    with _announce(capsys, label):
        reports, _ = suite_parallel
        fam = _family(reports, "harnack1d")
        cells = {(r.params["a"], r.params["b"], r.params["p"], r.params["t"]) for r in fam}
        assert len(fam) == 18 and len(cells) == 18
        assert {c[:2] for c in cells} == {(0.5, 0.5), (0.5, 1.0)}
        assert {c[2] for c in cells} == {1.5, 2.0, 4.0}
        assert {c[3] for c in cells} == {0.1, 0.5, 2.0}
        for r in fam:
            assert r.status == "PASS", (r.params, r.failures)
            assert r.failures == []
            assert r.grid["grid_n"] == 33
            assert len(r.grid["witnesses"]) == 12
            # no margin below the computed evaluation slack
            assert r.details["worst_margin_with_slack"] >= 0.0
        assert sum(r.runtime_s for r in fam) < 120.0


def test_kernel_bounds_and_decay_slopes(suite_parallel, capsys):
    label = "kernel bounds pointwise + short/long-time decay slopes (10%/5%), <3 min"
    with _announce(capsys, label):
        reports, _ = suite_parallel
        kb = _family(reports, "kernel-bounds")
        assert len(kb) == 6
        assert {(r.params["a"], r.params["b"]) for r in kb} == {(0.5, 0.5), (0.5, 1.0)}
        assert {r.params["t"] for r in kb} == {0.1, 0.5, 2.0}
        for r in kb:
            assert r.status == "PASS", (r.params, r.failures)
            assert r.failures == []
            # no pointwise violation beyond the computed evaluation slack
            assert r.margin >= 0.0
            # raw margins can only graze zero by roundoff, never materially
            assert r.details["min_lower_margin"] >= -1e-12
            assert r.details["min_upper_margin"] >= -1e-12
        ks = _family(reports, "kernel-slopes")
        assert len(ks) == 3
        assert {(r.params["a"], r.params["b"]) for r in ks} == {
            (0.5, 0.5),
            (1.0, 0.5),
            (1.0, 1.0),
        }
        for r in ks:
            assert r.status == "PASS", (r.params, r.failures)
            assert r.details["short_rel_err"] <= 0.10
            assert r.details["long_rel_err"] <= 0.05
        assert sum(r.runtime_s for r in kb + ks) < 180.0


def test_coupling_fraction_envelope_and_weight_moment(suite_parallel, capsys):
    label = "coupling: fraction >= 0.99, violations <= 1%, E[R^2] within bound, <2 min"
    with _announce(capsys, label):
        reports, _ = suite_parallel
        [c] = _family(reports, "coupling")
        assert c.status == "PASS", (c.params, c.failures)
        assert (c.params["x0"], c.params["y0"]) == (0.1, 0.9)
        assert (c.params["T"], c.params["p"], c.params["n_paths"]) == (2.0, 2.0, 10_000)
        fine = c.details["per_dt"][-1]
        assert fine["dt"] == 1e-4
        assert fine["coupled_fraction"] >= 0.99
        assert fine["violation_fraction"] <= 0.01
        assert fine["girsanov_mean"] - 3 * fine["girsanov_se"] <= c.details["girsanov_bound"]
        assert c.runtime_s < 120.0


def test_stationary_law_and_mc_vs_spectral(suite_parallel, capsys):
    label = "stationarity KS < 0.01 + Monte Carlo vs spectral on 8 functions x 4 times"
    with _announce(capsys, label):
        reports, _ = suite_parallel
        [s] = _family(reports, "stationarity")
        assert s.status == "PASS", (s.params, s.failures)
        assert (s.params["a"], s.params["b"]) == (0.5, 0.5)
        assert (s.params["T"], s.params["dt"]) == (200.0, 1e-4)
        assert s.details["ks_distance"] < 0.01
        [m] = _family(reports, "mc-vs-spectral")
        assert m.status == "PASS", (m.params, m.failures)
        cases = m.details["cases"]
        assert len(cases) == 32
        assert all(row["margin"] >= 0.0 for row in cases)


def test_super_poincare_rate_and_moment_orders(suite_parallel, capsys):
    label = "super-Poincare: beta_min slope within 10%, witness moment orders within 5%"
    with _announce(capsys, label):
        reports, _ = suite_parallel
        fam = _family(reports, "super-poincare")
        assert len(fam) == 3
        assert {(r.params["a"], r.params["b"]) for r in fam} == {
            (0.5, 0.5),
            (0.125, 1.0),
            (1.0, 0.125),
        }
        for r in fam:
            assert r.status == "PASS", (r.params, r.failures)
            d = r.details
            kappa = -d["beta_min_target"]
            assert kappa == max(0.5, 2 * r.params["a"], 2 * r.params["b"])
            assert abs(-d["beta_min_slope"] - kappa) <= 0.10 * kappa
            assert abs(d["moment_sq_slope"] - d["moment_sq_target"]) <= 0.05 * d["moment_sq_target"]
            assert abs(d["moment_lin_slope"] - d["moment_lin_target"]) <= 0.05 * d["moment_lin_target"]


def test_infinite_dimensional_battery(suite_parallel, capsys):
    label = (
        "product Harnack + kernel envelopes + gamma*t^2 bound + coordinate-map "
        "roundtrip + ergodicity slope"
    )
    with _announce(capsys, label):
        reports, _ = suite_parallel
        [ph] = _family(reports, "product-harnack")
        assert ph.status == "PASS", (ph.params, ph.failures)
        [pk] = _family(reports, "product-kernel")
        assert pk.status == "PASS", (pk.params, pk.failures)
        assert pk.details["worst_bracket_margin"] >= 0.0
        assert pk.details["worst_factor_margin"] >= 0.0
        gq = _family(reports, "gamma-quadratic")
        assert len(gq) == 2
        for r in gq:
            assert r.status == "PASS", (r.params, r.failures)
            assert r.params["alpha"] == 0.5
            assert r.details["max_gamma_t2"] <= r.details["certified_c"]
        [pp] = _family(reports, "phi-psi")
        assert pp.status == "PASS", (pp.params, pp.failures)
        assert pp.grid["n_points"] == 10_000
        assert pp.details["worst_roundtrip_error"] < 1e-12
        [er] = _family(reports, "ergodicity")
        assert er.status == "PASS", (er.params, er.failures)
        assert er.details["rel_err"] <= 0.05


def test_suite_deterministic_across_worker_counts(suite_parallel, suite_serial, capsys):
    label = "verify-all twice: byte-identical reports across worker counts, <15 min each"
    with _announce(capsys, label):
        ra, wall_a = suite_parallel
        rb, wall_b = suite_serial
        ja = canonical_json(suite_report_dict(ra, SEED, "acceptance", ("all",)))
        jb = canonical_json(suite_report_dict(rb, SEED, "acceptance", ("all",)))
        assert ja == jb
        assert all(r.status == "PASS" for r in ra), [
            (r.name, r.params, r.status) for r in ra if r.status != "PASS"
        ]
        assert wall_a < 900.0, f"parallel suite took {wall_a:.0f} s"
        assert wall_b < 900.0, f"serial suite took {wall_b:.0f} s"
