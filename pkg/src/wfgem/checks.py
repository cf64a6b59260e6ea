"""Verification harness: inequality checks with margins and machine-readable reports.

Each check evaluates one family of bounds (Harnack, kernel two-sided bounds,
Poincare and super-Poincare rates, coupling envelopes, product-form bounds,
ergodic decay) on declared finite grids and witness families, and reports the
worst-case signed margin (bound minus observed, positive = pass) together
with the numerical slack that was granted.  Slack is computed from
truncation bounds, basis-refinement differences, and Monte-Carlo standard
errors; it is never tuned per run.  A margin below -slack is a FAIL; a slack
too large to resolve the inequality is INCONCLUSIVE, not a pass.

All checks are deterministic given (parameters, seed) and independent of the
worker count used to schedule them.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import betainc

from .constants import (
    ParamSequence,
    WFParams,
    gamma_quadratic_bound,
    gamma_series,
    k_ab,
    rho,
)
from .gem import (
    CubePoint,
    SimplexPoint,
    build_product_bases,
    phi,
    product_harnack_bound,
    product_kernel,
    psi,
    two_param_params,
)
from .sde import (
    couple_ensemble,
    girsanov_bound,
    girsanov_moment,
    path_generator,
    simulate_ensemble,
)
from .spectral import (
    build_basis,
    beta_moment,
    chebyshev_grid,
    heat_kernel,
    kernel_tail_bound,
    ball_volume,
    sup_kernel,
)

__all__ = [
    "CheckReport",
    "PASS",
    "FAIL",
    "INCONCLUSIVE",
    "check_spectral",
    "check_harnack_1d",
    "check_kernel_bounds_1d",
    "check_kernel_slopes",
    "check_ball_volume",
    "check_poincare",
    "check_super_poincare",
    "check_coupling",
    "check_stationarity",
    "check_mc_vs_spectral",
    "check_product_harnack",
    "check_product_kernel",
    "check_gamma_quadratic",
    "check_phi_psi",
    "check_ergodicity_decay",
    "list_checks",
    "build_jobs",
    "run_suite",
]

PASS = "PASS"
FAIL = "FAIL"
INCONCLUSIVE = "INCONCLUSIVE"

DEFAULT_SEED = 20240801


@dataclass
class CheckReport:
    """Outcome of one parameterized check.

    `margin` is the worst case over the check's grid of (bound - observed),
    signed so positive means pass; `failures` lists the offending locations
    (bounded count).  `runtime_s` is excluded from the canonical form so
    reports stay byte-comparable across runs.
    """

    name: str
    params: dict
    grid: dict
    tolerance: dict
    margin: float
    status: str
    failures: list = field(default_factory=list)
    details: dict = field(default_factory=dict)
    runtime_s: float = 0.0

    def canonical(self) -> dict:
        return {
            "name": self.name,
            "params": _jsonable(self.params),
            "grid": _jsonable(self.grid),
            "tolerance": _jsonable(self.tolerance),
            "margin": _jsonable(self.margin),
            "status": self.status,
            "failures": _jsonable(self.failures),
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if obj is None or isinstance(obj, str):
        return obj
    return repr(obj)


def _status(margin: float, slack_ok: bool, failed: bool) -> str:
    if failed:
        return FAIL
    if not slack_ok:
        return INCONCLUSIVE
    return PASS


@lru_cache(maxsize=64)
def _basis(a: float, b: float, N: int):
    return build_basis(WFParams(a, b), N)


def _fit_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of y against x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    return float(np.sum((x - xm) * (y - ym)) / np.sum((x - xm) ** 2))


def _semigroup_grid(basis, t: float, fvals: np.ndarray, Qgrid: np.ndarray) -> np.ndarray:
    """P_t f on a grid from node values of f and precomputed Q_n(grid)."""
    coeff = basis.project(fvals)
    return (np.exp(-basis.eigenvalues * t) * coeff) @ Qgrid


# ---------------------------------------------------------------------------
# exact Beta-moment machinery for witness functions


def _partial_moments(p: WFParams, kmax: int, lo: float, hi: float) -> np.ndarray:
    """M_k = int_lo^hi x^k dBeta(2a,2b) for k = 0..kmax, exact via betainc.

    Segments in the upper tail use the complementary form
    I_hi - I_lo = I_{1-lo}(B, A+k) - I_{1-hi}(B, A+k), which avoids the
    catastrophic cancellation of differencing values near 1; straddling
    segments split at 1/2.
    """
    A, B = 2 * p.a, 2 * p.b
    out = np.empty(kmax + 1)
    for k in range(kmax + 1):
        Ak = A + k
        if hi <= 0.5:
            v = betainc(Ak, B, hi) - betainc(Ak, B, lo)
        elif lo >= 0.5:
            v = betainc(B, Ak, 1.0 - lo) - betainc(B, Ak, 1.0 - hi)
        else:
            v = (betainc(Ak, B, 0.5) - betainc(Ak, B, lo)) + (
                betainc(B, Ak, 0.5) - betainc(B, Ak, 1.0 - hi)
            )
        out[k] = beta_moment(p, k) * v
    return out


def _full_moments(p: WFParams, kmax: int) -> np.ndarray:
    return np.array([beta_moment(p, k) for k in range(kmax + 1)])


class _PLWitness:
    """Nonnegative piecewise-linear witness with exact Beta moments.

    pieces: list of (lo, hi, alpha, beta), f = alpha + beta*x on [lo, hi]
    and 0 elsewhere; pieces must not overlap.
    """

    def __init__(self, name: str, pieces):
        self.name = name
        self.pieces = pieces

    def moments(self, p: WFParams):
        """(pi(f), pi(f^2), E(f,f)); f >= 0 so pi(|f|) = pi(f)."""
        m1 = m2 = en = 0.0
        for lo, hi, al, be in self.pieces:
            M = _partial_moments(p, 2, lo, hi)
            m1 += al * M[0] + be * M[1]
            m2 += al * al * M[0] + 2 * al * be * M[1] + be * be * M[2]
            en += 0.5 * be * be * (M[1] - M[2])
        return m1, m2, en


def _left_witness(eps: float) -> _PLWitness:
    return _PLWitness("left", [(0.0, eps, eps, -1.0)])


def _right_witness(eps: float) -> _PLWitness:
    return _PLWitness("right", [(1.0 - eps, 1.0, eps - 1.0, 1.0)])


def _tent_witness(eps: float) -> _PLWitness:
    return _PLWitness(
        "tent",
        [(0.5 - eps, 0.5, -(0.5 - eps), 1.0), (0.5, 0.5 + eps, 0.5 + eps, -1.0)],
    )


def _poly_mul(c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    return np.convolve(c1, c2)


def _poly_pi(p: WFParams, c: np.ndarray) -> float:
    M = _full_moments(p, len(c) - 1)
    return float(np.dot(c, M))


def _poly_energy(p: WFParams, c: np.ndarray) -> float:
    """E(f,f) = (1/2) int x(1-x) f'(x)^2 dBeta, exact for polynomial f."""
    if len(c) < 2:
        return 0.0
    d = c[1:] * np.arange(1, len(c))
    d2 = _poly_mul(d, d)
    # x(1-x) d2 = x*d2 - x^2*d2
    g = np.zeros(len(d2) + 2)
    g[1 : len(d2) + 1] += d2
    g[2 : len(d2) + 2] -= d2
    return 0.5 * _poly_pi(p, g)


def _poly_abs_pi(p: WFParams, c: np.ndarray) -> float:
    """pi(|f|) for polynomial f: exact sign-split over the real roots in (0,1)."""
    roots = np.roots(c[::-1]) if len(c) > 1 else np.array([])
    cuts = sorted(
        {0.0, 1.0}
        | {float(r.real) for r in roots if abs(r.imag) < 1e-12 and 1e-14 < r.real < 1 - 1e-14}
    )
    total = 0.0
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        M = _partial_moments(p, len(c) - 1, lo, hi)
        seg = float(np.dot(c, M))
        mid = 0.5 * (lo + hi)
        sgn = 1.0 if np.polyval(c[::-1], mid) >= 0 else -1.0
        total += sgn * seg
    return abs(total)


def _ortho_poly_coeffs(p: WFParams, nmax: int) -> list:
    """Monomial coefficients of the orthonormal polynomials Q_0..Q_nmax."""
    from .spectral import recurrence_coefficients

    A, B = recurrence_coefficients(p, nmax + 1)
    sb = np.sqrt(B)
    C = [np.array([1.0])]
    if nmax >= 1:
        C.append(np.array([-A[0], 1.0]) / sb[1])
    for k in range(1, nmax):
        shifted = np.concatenate(([0.0], C[k]))
        prev = np.concatenate((C[k - 1], [0.0, 0.0]))
        cur = np.concatenate((C[k], [0.0]))
        C.append((shifted - A[k] * cur - sb[k] * prev) / sb[k + 1])
    return C


def bern_step(c: float, m: int = 12, delta: float = 0.05) -> Callable:
    """Smoothed step: delta + P(Binomial(m, x) >= ceil(c*m)).

    A degree-m polynomial in x (Bernstein form), positive, increasing,
    transitioning near x = c; the identity P(Bin(m,x) >= k) = I_x(k, m-k+1)
    gives a stable evaluation.
    """
    k = max(1, min(m, math.ceil(c * m)))

    def f(x):
        return delta + betainc(k, m - k + 1, x)

    f.__name__ = f"bern_step_{c:g}"
    return f


def _harnack_witnesses(delta: float = 0.05):
    """Twelve positive witnesses: polynomials plus smoothed steps."""
    ws = [
        ("const", lambda x: np.ones_like(np.asarray(x, dtype=float))),
        ("0.1+x", lambda x: 0.1 + x),
        ("1.1-x", lambda x: 1.1 - x),
        ("0.1+x^2", lambda x: 0.1 + x**2),
        ("1.1-x^2", lambda x: 1.1 - x**2),
        ("0.1+x(1-x)", lambda x: 0.1 + x * (1 - x)),
        ("0.05+(x-1/2)^2", lambda x: 0.05 + (x - 0.5) ** 2),
    ]
    for c in (0.2, 0.35, 0.5, 0.65, 0.8):
        f = bern_step(c, m=12, delta=delta)
        ws.append((f.__name__, f))
    return ws


# ---------------------------------------------------------------------------
# 1. spectral oracle validity


def check_spectral(
    p_params: WFParams,
    N: int = 60,
    t_norm: Sequence[float] = (0.01, 0.1, 1.0),
    ck_times: Sequence[float] = (0.008, 0.012),
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """Basis orthonormality, eigen-residual, kernel normalization, and the
    Chapman-Kolmogorov composition law against its truncation budget."""
    t0 = time.perf_counter()
    basis = _basis(p_params.a, p_params.b, N)
    tol = {
        "ortho": 1e-10,
        "eigen": 1e-8,
        "normalization": 1e-8,
        "chapman_kolmogorov": "10 x truncation bound + 1e-12 x scale",
    }
    failures = []
    margins = {}
    margins["ortho"] = tol["ortho"] - basis.ortho_residual
    margins["eigen"] = tol["eigen"] - basis.eigen_residual

    xg = np.array([0.0, 0.3, 0.7, 1.0])
    worst_norm = 0.0
    for t in t_norm:
        ke = heat_kernel(basis, t, xg, basis.nodes)
        err = float(np.abs(ke.value @ basis.weights - 1.0).max())
        worst_norm = max(worst_norm, err)
    margins["normalization"] = tol["normalization"] - worst_norm

    s_, t_ = ck_times
    yg = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
    k1 = heat_kernel(basis, s_, yg, basis.nodes).value
    k2 = heat_kernel(basis, t_, basis.nodes, yg).value
    comp = (k1 * basis.weights) @ k2
    direct = heat_kernel(basis, s_ + t_, yg, yg).value
    ck_err = float(np.abs(comp - direct).max())
    trunc = (
        kernel_tail_bound(p_params, N, s_)
        + kernel_tail_bound(p_params, N, t_)
        + kernel_tail_bound(p_params, N, s_ + t_)
    )
    ck_tol = 10.0 * trunc + 1e-12 * float(np.abs(direct).max())
    margins["chapman_kolmogorov"] = ck_tol - ck_err

    for key, m in margins.items():
        if m < 0:
            failures.append({"part": key, "margin": m})
    margin = min(margins.values())
    return CheckReport(
        name="spectral",
        params={"a": p_params.a, "b": p_params.b, "N": N},
        grid={"t_norm": list(t_norm), "ck_times": list(ck_times), "x_grid": xg.tolist()},
        tolerance=tol,
        margin=margin,
        status=_status(margin, True, bool(failures)),
        failures=failures,
        details={
            "ortho_residual": basis.ortho_residual,
            "eigen_residual": basis.eigen_residual,
            "normalization_err": worst_norm,
            "ck_err": ck_err,
            "ck_tol": ck_tol,
            "truncation_budget": trunc,
        },
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# 2. one-dimensional Harnack inequality


def check_harnack_1d(
    p_params: WFParams,
    p: float,
    t: float,
    grid_n: int = 33,
    test_family: Optional[list] = None,
    n_basis: int = 60,
    n_basis_hi: int = 100,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """(P_t f)^p(x) <= (P_t f^p)(y) exp[p K rho(x,y)^2/((p-1)(e^{2Kt}-1))]
    over a grid of (x, y) pairs and a family of positive witnesses.

    Slack per pair combines basis refinement (N vs N_hi) and a relative
    floor; slack above 1% of the right side makes the check inconclusive.
    """
    t0 = time.perf_counter()
    if not p_params.harnack_regime:
        raise ValueError("check_harnack_1d requires min(a,b) >= 1/4")
    family = _harnack_witnesses() if test_family is None else test_family
    b_lo = _basis(p_params.a, p_params.b, n_basis)
    b_hi = _basis(p_params.a, p_params.b, n_basis_hi)
    grid = np.linspace(0.0, 1.0, grid_n)
    Q_lo = b_lo.evaluate(grid)
    Q_hi = b_hi.evaluate(grid)
    K = p_params.K
    rr = rho(grid[:, None], grid[None, :])
    if K == 0.0:
        expo = p * rr**2 / ((p - 1) * 2.0 * t)
    else:
        expo = p * K * rr**2 / ((p - 1) * math.expm1(2 * K * t))
    eH = np.exp(expo)

    worst = math.inf
    worst_raw = math.inf
    worst_rel_slack = 0.0
    jensen_worst = math.inf
    failures = []
    for fname, f in family:
        f_lo = np.asarray(f(b_lo.nodes), dtype=float)
        f_hi = np.asarray(f(b_hi.nodes), dtype=float)
        if np.any(f_lo <= 0):
            raise ValueError(f"witness {fname} is not positive on the quadrature nodes")
        ptf_lo = _semigroup_grid(b_lo, t, f_lo, Q_lo)
        ptf_hi = _semigroup_grid(b_hi, t, f_hi, Q_hi)
        ptfp_lo = _semigroup_grid(b_lo, t, f_lo**p, Q_lo)
        ptfp_hi = _semigroup_grid(b_hi, t, f_hi**p, Q_hi)

        lhs = ptf_lo**p                       # indexed by x
        rhs = eH * ptfp_lo[None, :]           # (x, y)
        marg = rhs - lhs[:, None]
        slack = (
            np.abs(ptf_lo**p - ptf_hi**p)[:, None]
            + eH * np.abs(ptfp_lo - ptfp_hi)[None, :]
            + 1e-13 * rhs
        )
        jensen = ptfp_lo - ptf_lo**p
        jensen_worst = min(jensen_worst, float(jensen.min()))
        bad = marg < -slack
        if bad.any():
            ii = np.argwhere(bad)
            for ix, iy in ii[:3]:
                failures.append(
                    {
                        "witness": fname,
                        "x": float(grid[ix]),
                        "y": float(grid[iy]),
                        "margin": float(marg[ix, iy]),
                        "slack": float(slack[ix, iy]),
                    }
                )
        worst = min(worst, float((marg + slack).min()))
        worst_raw = min(worst_raw, float(marg.min()))
        worst_rel_slack = max(worst_rel_slack, float((slack / rhs).max()))

    inconclusive = worst_rel_slack > 0.01
    status = _status(worst, not inconclusive, bool(failures))
    if not failures and jensen_worst < -1e-10:
        failures.append({"part": "jensen_baseline", "margin": jensen_worst})
        status = FAIL
    return CheckReport(
        name="harnack1d",
        params={"a": p_params.a, "b": p_params.b, "p": p, "t": t, "K": K},
        grid={"grid_n": grid_n, "witnesses": [w[0] for w in family]},
        tolerance={"slack": "basis refinement + 1e-13 rel", "inconclusive_above": "1% of rhs"},
        margin=worst,
        status=status,
        failures=failures,
        details={
            "worst_margin_with_slack": worst,
            "worst_margin_raw": worst_raw,
            "worst_relative_slack": worst_rel_slack,
            "jensen_min_margin": jensen_worst,
            "n_pairs": grid_n * grid_n,
            "n_witnesses": len(family),
        },
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# 3. kernel bounds: pointwise two-sided, and short/long-time slopes


def check_kernel_bounds_1d(
    p_params: WFParams,
    t: float,
    grid_n: int = 33,
    n_basis: int = 60,
    n_basis_hi: int = 100,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """Pointwise two-sided kernel bounds at one time:

    exp[-2 K rho(x,y)^2/(e^{Kt}-1)] <= p_t(x,y) <= exp[2 K rho(0,1)^2/(e^{Kt}-1)]
    with the K=0 convention K/(e^{Kt}-1) -> 1/t.
    """
    t0 = time.perf_counter()
    if not p_params.harnack_regime:
        raise ValueError("pointwise kernel bounds require min(a,b) >= 1/4")
    b_lo = _basis(p_params.a, p_params.b, n_basis)
    b_hi = _basis(p_params.a, p_params.b, n_basis_hi)
    grid = np.linspace(0.0, 1.0, grid_n)
    k_lo = heat_kernel(b_lo, t, grid, grid)
    k_hi = heat_kernel(b_hi, t, grid, grid)
    K = p_params.K
    factor = 1.0 / t if K == 0.0 else K / math.expm1(K * t)
    rr = rho(grid[:, None], grid[None, :])
    lower = np.exp(-2.0 * rr**2 * factor)
    upper = math.exp(2.0 * math.pi**2 * factor) if 2 * math.pi**2 * factor < 700 else math.inf
    # absolute roundoff floor: the spectral sum cancels O(diag) terms, so
    # values far below eps * sup p_t are below double resolution
    roundoff = 1e-13 * max(1.0, float(np.diag(k_lo.value).max()))
    slack = (
        np.abs(k_lo.value - k_hi.value)
        + k_lo.truncation_error
        + k_hi.truncation_error
        + roundoff
    )

    low_marg = k_lo.value - lower
    up_marg = upper - k_lo.value
    failures = []
    for name, marg in (("lower", low_marg), ("upper", up_marg)):
        bad = marg < -slack
        if bad.any():
            ii = np.argwhere(bad)
            for ix, iy in ii[:3]:
                failures.append(
                    {
                        "side": name,
                        "x": float(grid[ix]),
                        "y": float(grid[iy]),
                        "margin": float(marg[ix, iy]),
                        "slack": float(slack[ix, iy]),
                    }
                )
    margin = float(min((low_marg + slack).min(), np.min(up_marg + slack)))
    return CheckReport(
        name="kernel-bounds",
        params={"a": p_params.a, "b": p_params.b, "t": t, "K": K},
        grid={"grid_n": grid_n, "N": n_basis},
        tolerance={"slack": "basis refinement + truncation bounds"},
        margin=margin,
        status=_status(margin, True, bool(failures)),
        failures=failures,
        details={
            "min_lower_margin": float(low_marg.min()),
            "min_upper_margin": float(np.min(up_marg)),
            "uniform_upper": upper,
            "truncation": k_lo.truncation_error,
        },
        runtime_s=time.perf_counter() - t0,
    )


def check_kernel_slopes(
    p_params: WFParams,
    n_basis: int = 200,
    t_short: Optional[np.ndarray] = None,
    t_long: Optional[np.ndarray] = None,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """Short-time on-diagonal growth and long-time uniform decay rates.

    Fits log sup_x p_t(x,x) ~ -kappa log t with kappa = 2a v 2b v 1/2
    (tolerance 10%), and log sup_{x,y} |p_t - 1| ~ -(a+b) t (tolerance 5%).
    """
    t0 = time.perf_counter()
    t_short = np.logspace(-3, -1, 9) if t_short is None else np.asarray(t_short)
    t_long = np.linspace(2.0, 8.0, 6) if t_long is None else np.asarray(t_long)
    basis = _basis(p_params.a, p_params.b, n_basis)
    kappa = max(2 * p_params.a, 2 * p_params.b, 0.5)
    lam1 = p_params.a + p_params.b

    sups = []
    floors = []
    for t in t_short:
        sk = sup_kernel(basis, t)
        sups.append(sk.value)
        floors.append(sk.truncation_error)
    short_slope = _fit_slope(np.log(t_short), np.log(sups))
    short_rel = abs(-short_slope - kappa) / kappa

    grid = chebyshev_grid(129)
    Q = basis.evaluate(grid)[1:]
    lam = basis.eigenvalues[1:]
    devs = []
    for t in t_long:
        dev = np.einsum("n,ni,nj->ij", np.exp(-lam * t), Q, Q)
        devs.append(float(np.abs(dev).max()))
    long_slope = _fit_slope(t_long, np.log(devs))
    long_rel = abs(-long_slope - lam1) / lam1

    tol = {"short_rel": 0.10, "long_rel": 0.05}
    margins = {"short": tol["short_rel"] - short_rel, "long": tol["long_rel"] - long_rel}
    failures = [{"part": k, "margin": v} for k, v in margins.items() if v < 0]
    margin = min(margins.values())
    return CheckReport(
        name="kernel-slopes",
        params={"a": p_params.a, "b": p_params.b, "N": n_basis},
        grid={"t_short": t_short.tolist(), "t_long": t_long.tolist()},
        tolerance=tol,
        margin=margin,
        status=_status(margin, True, bool(failures)),
        failures=failures,
        details={
            "short_slope": short_slope,
            "short_target": -kappa,
            "short_rel_err": short_rel,
            "long_slope": long_slope,
            "long_target": -lam1,
            "long_rel_err": long_rel,
            "sup_kernel": list(map(float, sups)),
            "truncation_floors": list(map(float, floors)),
        },
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# 4. intrinsic ball volume


def check_ball_volume(
    p_params: WFParams,
    t_grid: Optional[np.ndarray] = None,
    x_grid: Optional[np.ndarray] = None,
    floor: float = 1e-3,
    ratio_cap: float = 50.0,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """inf_x pi(B_rho(x, sqrt(t))) >= c0 t^{2(a v b)} with a stable c0.

    Fits c0(t) = min_x vol/t^{2(a v b)} over the grid; asserts the fitted
    floor and that c0(t) moves by less than the stated ratio across t.
    """
    t0 = time.perf_counter()
    t_grid = np.logspace(-4, -1, 13) if t_grid is None else np.asarray(t_grid)
    x_grid = np.linspace(0.0, 1.0, 21) if x_grid is None else np.asarray(x_grid)
    expo = 2.0 * max(p_params.a, p_params.b)
    c0s = []
    mono_bad = 0
    prev_vols = None
    for t in t_grid:
        r = math.sqrt(t)
        vols = np.array([ball_volume(p_params, x, r) for x in x_grid])
        if prev_vols is not None and np.any(vols < prev_vols - 1e-14):
            mono_bad += 1
        prev_vols = vols
        c0s.append(float(vols.min()) / t**expo)
    c0s = np.array(c0s)
    ratio = float(c0s.max() / c0s.min())
    margins = {"floor": float(c0s.min()) - floor, "ratio": ratio_cap - ratio}
    failures = [{"part": k, "margin": v} for k, v in margins.items() if v < 0]
    if mono_bad:
        failures.append({"part": "monotone_in_t", "violations": mono_bad})
    margin = min(margins.values())
    return CheckReport(
        name="ball-volume",
        params={"a": p_params.a, "b": p_params.b, "exponent": expo},
        grid={"t_grid": t_grid.tolist(), "x_grid_n": int(x_grid.size)},
        tolerance={"floor": floor, "ratio_cap": ratio_cap},
        margin=margin,
        status=_status(margin, True, bool(failures)),
        failures=failures,
        details={"c0_min": float(c0s.min()), "c0_max": float(c0s.max()), "ratio": ratio},
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# 5. Poincare inequality


def check_poincare(
    p_params: WFParams,
    n_draws: int = 100,
    degree: int = 8,
    n_basis: int = 60,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """pi(f^2) - pi(f)^2 <= E(f,f)/(a+b), equality at the first eigenfunction.

    Both sides are evaluated by quadrature from values and derivative values
    (not by the coefficient identity, which would be circular).
    """
    t0 = time.perf_counter()
    basis = _basis(p_params.a, p_params.b, n_basis)
    lam1 = p_params.a + p_params.b
    Q, D = basis.evaluate_with_deriv(basis.nodes)
    w = basis.weights
    x = basis.nodes

    def both_sides(fvals, fpvals):
        mean = float(np.dot(w, fvals))
        var = float(np.dot(w, fvals**2)) - mean * mean
        en = 0.5 * float(np.dot(w, x * (1 - x) * fpvals**2))
        return var, en

    var1, en1 = both_sides(Q[1], D[1])
    eq_err = abs(en1 / lam1 - var1)

    gen = path_generator(seed, 0)
    worst = math.inf
    failures = []
    for i in range(n_draws):
        c = gen.standard_normal(degree)
        fvals = c @ Q[1 : degree + 1]
        fpvals = c @ D[1 : degree + 1]
        var, en = both_sides(fvals, fpvals)
        m = en / lam1 - var
        scale = max(var, 1.0)
        if m < -1e-10 * scale:
            failures.append({"draw": i, "margin": m})
        worst = min(worst, m / scale)
    margins = {"equality_witness": 1e-8 - eq_err, "draws": worst + 1e-10}
    margin = min(margins.values())
    failed = bool(failures) or eq_err > 1e-8
    return CheckReport(
        name="poincare",
        params={"a": p_params.a, "b": p_params.b, "lambda1": lam1},
        grid={"n_draws": n_draws, "degree": degree},
        tolerance={"equality": 1e-8, "draw_margin": -1e-10},
        margin=margin,
        status=_status(margin, True, failed),
        failures=failures,
        details={"equality_error": eq_err, "worst_scaled_margin": worst},
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# 6. super-Poincare inequality and sharpness


def check_super_poincare(
    p_params: WFParams,
    r_grid: Optional[np.ndarray] = None,
    eps_grid: Optional[np.ndarray] = None,
    slope_tol: float = 0.10,
    moment_tol: float = 0.05,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """Super-Poincare rate pi(f^2) <= r E(f,f) + beta(r) pi(|f|)^2.

    Upper direction: fits the single constant c making
    beta(r) = 1 v (c r^{-kappa}) work over every witness and r (reported).
    Lower direction: beta_min(r) = max over boundary witnesses of
    (pi(f^2) - r E)/pi(|f|)^2 must scale like r^{-kappa},
    kappa = 1/2 v 2a v 2b, fitted slope within the stated tolerance.
    Sharpness: the boundary witness moments reproduce the orders
    pi(f_eps^2) ~ eps^{2a+2} and E + pi(f_eps) ~ eps^{2a+1}.
    """
    t0 = time.perf_counter()
    r_grid = np.logspace(-4, -1, 13) if r_grid is None else np.asarray(r_grid)
    eps_grid = np.logspace(-5, math.log10(0.4), 48) if eps_grid is None else np.asarray(eps_grid)
    kappa = max(0.5, 2 * p_params.a, 2 * p_params.b)
    lam1 = p_params.a + p_params.b

    # precompute witness moments: three boundary families over the eps grid
    wit = []
    for eps in eps_grid:
        for mk in (_left_witness, _right_witness, _tent_witness):
            wobj = mk(float(eps))
            m1, m2, en = wobj.moments(p_params)
            if m1 > 0:
                wit.append((wobj.name, float(eps), m1, m2, en))
    # polynomial witnesses for the upper direction (exact moments)
    polys = [("one", np.array([1.0])), ("0.1+x", np.array([0.1, 1.0]))]
    for n, c in enumerate(_ortho_poly_coeffs(p_params, 3)[1:], start=1):
        polys.append((f"Q{n}", c))
    poly_moments = []
    for pname, c in polys:
        m1abs = _poly_abs_pi(p_params, c)
        m2 = _poly_pi(p_params, _poly_mul(c, c))
        en = _poly_energy(p_params, c)
        if m1abs > 0:
            poly_moments.append((pname, m1abs, m2, en))

    # lower direction: beta_min over the boundary witnesses
    beta_min = np.empty(r_grid.size)
    for j, r in enumerate(r_grid):
        best = 0.0
        for _, _, m1, m2, en in wit:
            v = (m2 - r * en) / (m1 * m1)
            if v > best:
                best = v
        beta_min[j] = best
    if np.any(beta_min <= 0):
        raise ValueError("beta_min fit needs positive best ratios; extend eps_grid")
    lo_slope = _fit_slope(np.log(r_grid), np.log(beta_min))
    lo_rel = abs(-lo_slope - kappa) / kappa

    # upper direction: fit c once over all witnesses and r
    c_fit = 0.0
    for j, r in enumerate(r_grid):
        for _, _, m1, m2, en in wit:
            need = (m2 - r * en) / (m1 * m1)
            if need > 1.0:
                c_fit = max(c_fit, need * r**kappa)
        for _, m1abs, m2, en in poly_moments:
            need = (m2 - r * en) / (m1abs * m1abs)
            if need > 1.0:
                c_fit = max(c_fit, need * r**kappa)

    # Poincare regime r >= 1/lambda1: beta = 1 suffices
    triv_worst = math.inf
    for r in (1.0 / lam1, 2.0 / lam1):
        for _, _, m1, m2, en in wit:
            triv_worst = min(triv_worst, (r * en + m1 * m1 - m2))
        for _, m1abs, m2, en in poly_moments:
            triv_worst = min(triv_worst, (r * en + m1abs * m1abs - m2))

    # sharpness: moment orders of the a-side witness
    small = eps_grid[eps_grid <= 1e-2]
    m2s, m1s = [], []
    for eps in small:
        m1, m2, en = _left_witness(float(eps)).moments(p_params)
        m2s.append(m2)
        m1s.append(en + m1)
    sq_slope = _fit_slope(np.log(small), np.log(m2s))
    lin_slope = _fit_slope(np.log(small), np.log(m1s))
    sq_target = 2 * p_params.a + 2
    lin_target = 2 * p_params.a + 1
    sq_rel = abs(sq_slope - sq_target) / sq_target
    lin_rel = abs(lin_slope - lin_target) / lin_target

    margins = {
        "beta_min_slope": slope_tol - lo_rel,
        "moment_sq": moment_tol - sq_rel,
        "moment_lin": moment_tol - lin_rel,
        "poincare_regime": triv_worst + 1e-12,
    }
    failures = [{"part": k, "margin": v} for k, v in margins.items() if v < 0]
    margin = min(margins.values())
    return CheckReport(
        name="super-poincare",
        params={"a": p_params.a, "b": p_params.b, "kappa": kappa},
        grid={
            "r_grid": [float(r) for r in r_grid],
            "eps_grid_n": int(eps_grid.size),
            "witnesses": ["left", "right", "tent"] + [pm[0] for pm in poly_moments],
        },
        tolerance={"slope_rel": slope_tol, "moment_rel": moment_tol},
        margin=margin,
        status=_status(margin, True, bool(failures)),
        failures=failures,
        details={
            "beta_min_slope": lo_slope,
            "beta_min_target": -kappa,
            "c_fit": c_fit,
            "beta_min_times_r_kappa_min": float(np.min(beta_min * r_grid**kappa)),
            "moment_sq_slope": sq_slope,
            "moment_sq_target": sq_target,
            "moment_lin_slope": lin_slope,
            "moment_lin_target": lin_target,
        },
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# 7. coupling by change of measures


def check_coupling(
    p_params: WFParams,
    x0: float = 0.1,
    y0: float = 0.9,
    T: float = 2.0,
    p: float = 2.0,
    dt_list: Sequence[float] = (1e-3, 1e-4),
    n_paths: int = 10_000,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """Coupling fraction, envelope violations, and the Girsanov moment bound.

    Asserts at the finest dt: coupled fraction >= 0.99, envelope-violation
    fraction <= 1%, and E[R^{p/(p-1)}] - 3 SE <= closed-form bound; also that
    refinement in dt does not degrade the first two.
    """
    t0 = time.perf_counter()
    if not p_params.harnack_regime:
        raise ValueError("check_coupling requires min(a,b) >= 1/4")
    dt_list = sorted(dt_list, reverse=True)
    q = p / (p - 1.0)
    rows = []
    for i, dt in enumerate(dt_list):
        ens = couple_ensemble(x0, y0, T, dt, p_params, n_paths, seed + i)
        gm = girsanov_moment(ens, q) if ens.coupled.sum() >= 2 else None
        rows.append(
            {
                "dt": dt,
                "coupled_fraction": ens.coupled_fraction,
                "violation_fraction": ens.violation_fraction,
                "girsanov_mean": gm.mean if gm else None,
                "girsanov_se": gm.std_error if gm else None,
                "rejected": int(np.count_nonzero(~ens.coupled)),
            }
        )
        rho0 = ens.rho0
    bound = girsanov_bound(p_params, rho0, T, p)
    fine = rows[-1]
    margins = {
        "coupled_fraction": fine["coupled_fraction"] - 0.99,
        "violation_fraction": 0.01 - fine["violation_fraction"],
        "girsanov_bound": bound - (fine["girsanov_mean"] - 3 * fine["girsanov_se"]),
    }
    if len(rows) > 1:
        margins["refinement_coupling"] = fine["coupled_fraction"] - rows[0]["coupled_fraction"] + 2e-3
        margins["refinement_violation"] = rows[0]["violation_fraction"] - fine["violation_fraction"] + 2e-3
    failures = [{"part": k, "margin": v} for k, v in margins.items() if v < 0]
    inconclusive = 3 * fine["girsanov_se"] > 0.5 * bound
    margin = min(margins.values())
    return CheckReport(
        name="coupling",
        params={
            "a": p_params.a,
            "b": p_params.b,
            "x0": x0,
            "y0": y0,
            "T": T,
            "p": p,
            "n_paths": n_paths,
        },
        grid={"dt_list": list(dt_list)},
        tolerance={
            "coupled_fraction_min": 0.99,
            "violation_fraction_max": 0.01,
            "girsanov": "mean - 3 SE <= bound",
        },
        margin=margin,
        status=_status(margin, not inconclusive, bool(failures)),
        failures=failures,
        details={"per_dt": rows, "girsanov_bound": bound, "rho0": rho0},
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# 8. stationarity of the long-run law


def check_stationarity(
    p_params: WFParams,
    T: float = 200.0,
    dt: float = 1e-4,
    n_paths: int = 384,
    bins: int = 4096,
    ks_tol: float = 0.01,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """Occupation law of an ensemble of stationary-start paths vs Beta(2a,2b).

    The Kolmogorov-Smirnov distance is computed from the binned occupation
    measure of every post-step state across all paths; a single path cannot
    resolve the stated tolerance (its effective sample count is ~T times the
    spectral gap), so the ensemble carries the statistical weight.
    """
    t0 = time.perf_counter()
    res = simulate_ensemble(
        0.5, T, dt, p_params, n_paths, seed, histogram_bins=bins, stationary_start=True
    )
    edges = np.linspace(0.0, 1.0, bins + 1)
    emp = np.cumsum(res.histogram) / res.histogram.sum()
    cdf = betainc(2 * p_params.a, 2 * p_params.b, edges[1:])
    ks = float(np.abs(emp - cdf).max())
    margin = ks_tol - ks
    failures = [] if margin >= 0 else [{"part": "ks", "ks": ks}]
    return CheckReport(
        name="stationarity",
        params={"a": p_params.a, "b": p_params.b, "T": T, "dt": dt, "n_paths": n_paths},
        grid={"bins": bins},
        tolerance={"ks": ks_tol},
        margin=margin,
        status=_status(margin, True, bool(failures)),
        failures=failures,
        details={"ks_distance": ks, "clamp_count": res.clamp_count, "n_samples": int(res.histogram.sum())},
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# 9. Monte Carlo vs spectral semigroup


def _mc_f_family(basis):
    """Eight polynomial test functions, first the extremal eigenfunction."""
    q1 = lambda x: basis.evaluate(np.atleast_1d(np.asarray(x, dtype=float)), nmax=1)[1]
    fam = [
        ("Q1", q1),
        ("x", lambda x: np.asarray(x, dtype=float)),
        ("x^2", lambda x: np.asarray(x) ** 2),
        ("x^3", lambda x: np.asarray(x) ** 3),
        ("x^4", lambda x: np.asarray(x) ** 4),
        ("x(1-x)", lambda x: np.asarray(x) * (1 - np.asarray(x))),
        ("x^2(1-x)", lambda x: np.asarray(x) ** 2 * (1 - np.asarray(x))),
        ("(1-x)^3", lambda x: (1 - np.asarray(x)) ** 3),
    ]
    return fam


def check_mc_vs_spectral(
    p_params: WFParams,
    x0: float = 0.3,
    t_list: Sequence[float] = (0.1, 0.3, 1.0, 3.0),
    dt: float = 1e-3,
    n_paths: int = 20_000,
    weak_error_c: float = 5.0,
    n_basis: int = 60,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """|MC estimate of E f(x_t) - spectral P_t f(x0)| <= 3 SE + C dt.

    One path ensemble is snapshotted at every requested time, so all
    functions at a given time share the same draws.  C is the frozen
    weak-error constant of the clamped Euler scheme (fitted once offline
    for this f family, not refitted per run).
    """
    t0 = time.perf_counter()
    basis = _basis(p_params.a, p_params.b, n_basis)
    fam = _mc_f_family(basis)
    res = simulate_ensemble(
        x0, max(t_list), dt, p_params, n_paths, seed, snapshot_times=tuple(t_list)
    )
    failures = []
    worst = math.inf
    rows = []
    Qx0 = basis.evaluate(np.array([x0]))
    decay_base = (np.exp(-basis.eigenvalues[:, None] * np.asarray(t_list)[None, :])).T
    for j, t in enumerate(t_list):
        states = res.snapshots[j]
        for fname, f in fam:
            vals = np.asarray(f(states), dtype=float)
            mc = float(vals.mean())
            se = float(vals.std(ddof=1) / math.sqrt(n_paths))
            coeff = basis.project(np.asarray(f(basis.nodes), dtype=float))
            spec = float((decay_base[j] * coeff) @ Qx0[:, 0])
            tol = 3 * se + weak_error_c * dt
            m = tol - abs(mc - spec)
            rows.append({"f": fname, "t": t, "mc": mc, "se": se, "spectral": spec, "margin": m})
            if m < 0:
                failures.append({"f": fname, "t": t, "margin": m})
            worst = min(worst, m)
    return CheckReport(
        name="mc-vs-spectral",
        params={"a": p_params.a, "b": p_params.b, "x0": x0, "dt": dt, "n_paths": n_paths},
        grid={"t_list": list(t_list), "f_family": [f[0] for f in fam]},
        tolerance={"bound": "3 SE + C dt", "C": weak_error_c},
        margin=worst,
        status=_status(worst, True, bool(failures)),
        failures=failures,
        details={"cases": rows},
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# 10. product-form Harnack inequality


def _product_witnesses():
    g_pos = lambda x: 0.1 + np.asarray(x, dtype=float)
    g_neg = lambda x: 1.1 - np.asarray(x, dtype=float)
    g_bump = lambda x: 0.1 + np.asarray(x) * (1 - np.asarray(x))
    g_step = bern_step(0.5)
    return [
        ("prod(0.1+x)", (g_pos, g_pos, g_pos)),
        ("prod(1.1-x)", (g_neg, g_neg, g_neg)),
        ("mixed", (g_pos, g_bump, g_neg)),
        ("steps", (g_step, g_step, g_step)),
    ]


def check_product_harnack(
    seq: Optional[ParamSequence] = None,
    N: int = 3,
    p: float = 2.0,
    t: float = 0.5,
    n_pairs: int = 5,
    n_basis: int = 60,
    n_basis_hi: int = 100,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """(P_t F)^p(x) <= (P_t F^p)(y) exp[sum_i exponent_i] for product witnesses
    F(x) = prod g_i(x_i) on the truncated stick-breaking semigroup."""
    t0 = time.perf_counter()
    seq = two_param_params(0.0, 1.0, N) if seq is None else seq
    ps = [seq.param(i) for i in range(1, N + 1)]
    if any(not q.harnack_regime for q in ps):
        raise ValueError("product Harnack requires min(a_i,b_i) >= 1/4 for i <= N")
    bases_lo = build_product_bases(seq, N, basis_n=n_basis)
    bases_hi = build_product_bases(seq, N, basis_n=n_basis_hi)
    gen = path_generator(seed, 0)
    pairs = [(gen.uniform(0, 1, N), gen.uniform(0, 1, N)) for _ in range(n_pairs)]
    witnesses = _product_witnesses()

    def pt_point(basis_list, gs, pt, power):
        out = 1.0
        for basis, g, xi in zip(basis_list, gs, pt):
            fvals = np.asarray(g(basis.nodes), dtype=float) ** power
            coeff = basis.project(fvals)
            Qx = basis.evaluate(np.array([xi]))
            out *= float((np.exp(-basis.eigenvalues * t) * coeff) @ Qx[:, 0])
        return out

    worst = math.inf
    worst_raw = math.inf
    worst_rel_slack = 0.0
    failures = []
    for wname, gs in witnesses:
        for k, (xv, yv) in enumerate(pairs):
            xc = CubePoint(coords=xv)
            yc = CubePoint(coords=yv)
            expo = product_harnack_bound(p, t, xc, yc, seq)
            lhs_lo = pt_point(bases_lo, gs, xv, 1.0) ** p
            lhs_hi = pt_point(bases_hi, gs, xv, 1.0) ** p
            rhs_base_lo = pt_point(bases_lo, gs, yv, p)
            rhs_base_hi = pt_point(bases_hi, gs, yv, p)
            rhs = rhs_base_lo * math.exp(expo)
            slack = (
                abs(lhs_lo - lhs_hi)
                + abs(rhs_base_lo - rhs_base_hi) * math.exp(expo)
                + 1e-13 * rhs
            )
            m = rhs - lhs_lo
            worst = min(worst, m + slack)
            worst_raw = min(worst_raw, m)
            worst_rel_slack = max(worst_rel_slack, slack / rhs)
            if m < -slack:
                failures.append(
                    {"witness": wname, "pair": k, "margin": m, "slack": slack}
                )
    inconclusive = worst_rel_slack > 0.01
    return CheckReport(
        name="product-harnack",
        params={"N": N, "p": p, "t": t, "a1": ps[0].a, "b1": ps[0].b},
        grid={"n_pairs": n_pairs, "witnesses": [w[0] for w in witnesses]},
        tolerance={"slack": "basis refinement + 1e-13 rel", "inconclusive_above": "1% of rhs"},
        margin=worst,
        status=_status(worst, not inconclusive, bool(failures)),
        failures=failures,
        details={
            "worst_margin_with_slack": worst,
            "worst_margin_raw": worst_raw,
            "worst_relative_slack": worst_rel_slack,
        },
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# 11. product-kernel envelopes vs brute-force extension


def check_product_kernel(
    seq: Optional[ParamSequence] = None,
    N: int = 3,
    n_extend: int = 10,
    t_list: Sequence[float] = (1.0, 2.0),
    n_points: int = 4,
    n_basis: int = 60,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """Certified tail envelopes of the truncated product kernel bracket a
    brute-force extension by `n_extend` stationarity-sampled coordinates;
    each added factor individually obeys its two-sided (H2) bounds."""
    t0 = time.perf_counter()
    seq = two_param_params(0.5, 1.0, N + n_extend) if seq is None else seq
    ps = [seq.param(i) for i in range(1, N + n_extend + 1)]
    bases = tuple(_basis(q.a, q.b, n_basis) for q in ps[:N])
    bases_ext = [_basis(q.a, q.b, 40) for q in ps[N:]]
    gen = path_generator(seed, 0)
    worst = math.inf
    worst_factor = math.inf
    failures = []
    for t in t_list:
        for k in range(n_points):
            xv = np.array([gen.beta(2 * q.a, 2 * q.b) for q in ps])
            yv = np.array([gen.beta(2 * q.a, 2 * q.b) for q in ps])
            pk = product_kernel(t, CubePoint(coords=xv[:N]), CubePoint(coords=yv[:N]), seq, bases)
            ext = pk.value
            trunc = pk.factor_truncation
            for j, basis in enumerate(bases_ext):
                i_coord = N + j
                ke = heat_kernel(basis, t, xv[i_coord], yv[i_coord])
                ext *= ke.scalar
                trunc += ke.truncation_error
                K = k_ab(ps[i_coord])
                factor = 1.0 / t if K == 0 else K / math.expm1(K * t)
                f_lo = math.exp(-2.0 * float(rho(xv[i_coord], yv[i_coord])) ** 2 * factor)
                f_hi = math.exp(2.0 * math.pi**2 * factor)
                fm = min(ke.scalar - f_lo, f_hi - ke.scalar) + ke.truncation_error
                worst_factor = min(worst_factor, fm)
                if fm < 0:
                    failures.append(
                        {"part": "h2_factor", "t": t, "coord": i_coord + 1, "margin": fm}
                    )
            lo_env = pk.value * pk.tail_lower
            hi_env = pk.value * pk.tail_upper
            m = min(ext - lo_env, hi_env - ext) + trunc
            worst = min(worst, m)
            if m < 0:
                failures.append({"part": "bracket", "t": t, "point": k, "margin": m})
    margin = min(worst, worst_factor)
    return CheckReport(
        name="product-kernel",
        params={"N": N, "n_extend": n_extend, "alpha_theta": "two-parameter"},
        grid={"t_list": list(t_list), "n_points": n_points},
        tolerance={"bracket": ">= 0 within truncation", "h2_factor": ">= 0 within truncation"},
        margin=margin,
        status=_status(margin, True, bool(failures)),
        failures=failures,
        details={"worst_bracket_margin": worst, "worst_factor_margin": worst_factor},
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# 12. quadratic gamma bound


def check_gamma_quadratic(
    alpha: float = 0.5,
    theta: float = 0.0,
    t_lo: float = 1e-2,
    t_hi: float = 1.0,
    n_t: int = 25,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """gamma(t) t^2 stays below the certified constant on [t_lo, t_hi]."""
    t0 = time.perf_counter()
    seq = two_param_params(alpha, theta, 8)
    c = gamma_quadratic_bound(seq, t_max=t_hi)
    ts = np.logspace(math.log10(t_lo), math.log10(t_hi), n_t)
    vals = []
    for t in ts:
        g, tail, _ = gamma_series(seq, float(t))
        vals.append((g + tail) * t * t)
    vals = np.array(vals)
    margin = float(c - vals.max())
    failures = [] if margin >= 0 else [{"t": float(ts[int(np.argmax(vals))]), "margin": margin}]
    return CheckReport(
        name="gamma-quadratic",
        params={"alpha": alpha, "theta": theta, "c": c},
        grid={"t_range": [t_lo, t_hi], "n_t": n_t},
        tolerance={"bound": "gamma * t^2 <= c"},
        margin=margin,
        status=_status(margin, True, bool(failures)),
        failures=failures,
        details={"max_gamma_t2": float(vals.max()), "certified_c": c},
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# 13. stick-breaking round trip


def check_phi_psi(
    n_points: int = 10_000,
    n_coords: int = 8,
    tol: float = 1e-12,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """psi(phi(x)) = x and phi(psi(s)) = s within 1e-12, plus the exhaustion
    convention landing in E."""
    t0 = time.perf_counter()
    gen = path_generator(seed, 0)
    worst = 0.0
    for _ in range(n_points):
        u = gen.uniform(0.0, 1.0, n_coords)
        cp = CubePoint(coords=u)
        sp = phi(cp)
        back = psi(sp)
        worst = max(worst, float(np.abs(back.coords - u).max()))
        m = gen.dirichlet(np.ones(n_coords + 1))
        sp2 = SimplexPoint(masses=m[:-1], remainder=float(m[-1]))
        rt = phi(psi(sp2))
        worst = max(
            worst,
            float(np.abs(rt.masses - sp2.masses).max()),
            abs(rt.remainder - sp2.remainder),
        )
    conv = psi(SimplexPoint(masses=np.array([0.5, 0.5, 0.0]), remainder=0.0))
    conv_ok = bool(np.allclose(conv.coords, [0.5, 1.0, 1.0]) and CubePoint(coords=conv.coords).in_E)
    margin = tol - worst
    failures = [] if margin >= 0 and conv_ok else [{"worst": worst, "convention_ok": conv_ok}]
    return CheckReport(
        name="phi-psi",
        params={"n_coords": n_coords},
        grid={"n_points": n_points},
        tolerance={"roundtrip": tol},
        margin=margin,
        status=_status(margin, True, bool(failures)),
        failures=failures,
        details={"worst_roundtrip_error": worst, "exhaustion_convention_ok": conv_ok},
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# 14. truncated ergodic decay


def check_ergodicity_decay(
    seq: Optional[ParamSequence] = None,
    N: int = 3,
    t_grid: Optional[np.ndarray] = None,
    grid_n: int = 17,
    n_basis: int = 60,
    slope_tol: float = 0.05,
    seed: int = DEFAULT_SEED,
) -> CheckReport:
    """sup over the product grid of |prod_i p_t^{(i)}(x_i,y_i) - 1| decays at
    the rate min_i (a_i + b_i), fitted on the t-grid within 5%.

    The product supremum factorizes: with every factor positive on the grid,
    the extremes of the product are the products of per-coordinate extremes.
    The fit window starts late enough that the product nonlinearity
    (1+d)^N - 1 ~ N d has decayed below the tolerance.
    """
    t0 = time.perf_counter()
    seq = two_param_params(0.0, 1.0, N) if seq is None else seq
    if N > 4:
        raise ValueError("product grid grows too fast beyond N = 4")
    t_grid = np.linspace(4.0, 10.0, 7) if t_grid is None else np.asarray(t_grid)
    ps = [seq.param(i) for i in range(1, N + 1)]
    bases = [_basis(q.a, q.b, n_basis) for q in ps]
    lam_min = min(q.a + q.b for q in ps)
    grid = chebyshev_grid(grid_n)
    sup_dev = []
    all_pos = True
    for t in t_grid:
        kmax, kmin = 1.0, 1.0
        for basis in bases:
            ke = heat_kernel(basis, float(t), grid, grid)
            kmax *= float(ke.value.max())
            kmin *= float(ke.value.min())
            if ke.value.min() <= 0:
                all_pos = False
        sup_dev.append(max(kmax - 1.0, 1.0 - kmin))
    slope = _fit_slope(t_grid, np.log(sup_dev))
    rel = abs(-slope - lam_min) / lam_min
    margin = slope_tol - rel
    failures = [] if margin >= 0 and all_pos else [{"slope": slope, "target": -lam_min, "all_factors_positive": all_pos}]
    return CheckReport(
        name="ergodicity",
        params={"N": N, "lambda_min": lam_min},
        grid={"t_grid": t_grid.tolist(), "grid_n": grid_n},
        tolerance={"slope_rel": slope_tol},
        margin=margin,
        status=_status(margin, True, bool(failures)),
        failures=failures,
        details={"slope": slope, "target": -lam_min, "rel_err": rel, "sup_dev": list(map(float, sup_dev))},
        runtime_s=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# suite assembly


_SWEEP_AB = [(0.5, 0.5), (0.5, 1.0)]
_SLOPE_AB = [(0.5, 0.5), (1.0, 0.5), (1.0, 1.0)]
_SP_AB = [(0.5, 0.5), (0.125, 1.0), (1.0, 0.125)]
_SPECTRAL_AB = [(a, b) for a in (0.25, 0.5, 1.0, 2.0) for b in (0.25, 0.5, 1.0, 2.0)]


def _desk(v_acc, v_desk, scale):
    return v_acc if scale == "acceptance" else v_desk


_DISPATCH = {}


def _register(fn):
    _DISPATCH[fn.__name__] = fn
    return fn


for _fn in (
    check_spectral,
    check_harnack_1d,
    check_kernel_bounds_1d,
    check_kernel_slopes,
    check_ball_volume,
    check_poincare,
    check_super_poincare,
    check_coupling,
    check_stationarity,
    check_mc_vs_spectral,
    check_product_harnack,
    check_product_kernel,
    check_gamma_quadratic,
    check_phi_psi,
    check_ergodicity_decay,
):
    _register(_fn)


def _run_job(job):
    """Execute one picklable job spec (family, label, fn_name, kwargs)."""
    _, _, fn_name, kwargs = job
    return _DISPATCH[fn_name](**kwargs)


def build_jobs(names: Sequence[str], seed: int = DEFAULT_SEED, scale: str = "acceptance"):
    """Expand check-family names into (family, label, fn_name, kwargs) specs.

    `names` may be ("all",) or any subset of list_checks().  Job seeds are
    derived from the base seed by fixed offsets, and each spec is a pure
    picklable description, so scheduling order and worker count cannot
    change any result.
    """
    if scale not in ("acceptance", "desk"):
        raise ValueError(f"unknown scale {scale!r}")
    known = list_checks()
    selected = list(known) if ("all" in names) else list(names)
    for n in selected:
        if n not in known:
            raise KeyError(f"unknown check {n!r}; known: {', '.join(known)}")
    jobs = []

    def add(family, label, fn_name, **kwargs):
        jobs.append((family, label, fn_name, kwargs))

    for name in selected:
        if name == "spectral":
            combos = _SPECTRAL_AB if scale == "acceptance" else _SPECTRAL_AB[:4]
            for i, (a, b) in enumerate(combos):
                add(
                    "spectral",
                    f"a={a:g},b={b:g}",
                    "check_spectral",
                    p_params=WFParams(a, b),
                    seed=seed + i,
                )
        elif name == "harnack1d":
            gn = _desk(33, 9, scale)
            i = 0
            for a, b in _SWEEP_AB:
                for p in (1.5, 2.0, 4.0):
                    for t in (0.1, 0.5, 2.0):
                        add(
                            "harnack1d",
                            f"a={a:g},b={b:g},p={p:g},t={t:g}",
                            "check_harnack_1d",
                            p_params=WFParams(a, b),
                            p=p,
                            t=t,
                            grid_n=gn,
                            seed=seed + i,
                        )
                        i += 1
        elif name == "kernel-bounds":
            gn = _desk(33, 9, scale)
            i = 0
            for a, b in _SWEEP_AB:
                for t in (0.1, 0.5, 2.0):
                    add(
                        "kernel-bounds",
                        f"a={a:g},b={b:g},t={t:g}",
                        "check_kernel_bounds_1d",
                        p_params=WFParams(a, b),
                        t=t,
                        grid_n=gn,
                        seed=seed + i,
                    )
                    i += 1
        elif name == "kernel-slopes":
            nb = _desk(200, 120, scale)
            for i, (a, b) in enumerate(_SLOPE_AB):
                add(
                    "kernel-slopes",
                    f"a={a:g},b={b:g}",
                    "check_kernel_slopes",
                    p_params=WFParams(a, b),
                    n_basis=nb,
                    seed=seed + i,
                )
        elif name == "ball-volume":
            for i, (a, b) in enumerate([(0.5, 0.5), (1.0, 0.5), (2.0, 2.0)]):
                add(
                    "ball-volume",
                    f"a={a:g},b={b:g}",
                    "check_ball_volume",
                    p_params=WFParams(a, b),
                    seed=seed + i,
                )
        elif name == "poincare":
            for i, (a, b) in enumerate([(0.5, 0.5), (0.5, 1.0), (1.0, 2.0), (0.125, 1.0)]):
                add(
                    "poincare",
                    f"a={a:g},b={b:g}",
                    "check_poincare",
                    p_params=WFParams(a, b),
                    seed=seed + i,
                )
        elif name == "super-poincare":
            for i, (a, b) in enumerate(_SP_AB):
                add(
                    "super-poincare",
                    f"a={a:g},b={b:g}",
                    "check_super_poincare",
                    p_params=WFParams(a, b),
                    seed=seed + i,
                )
        elif name == "coupling":
            add(
                "coupling",
                "a=0.5,b=0.5",
                "check_coupling",
                p_params=WFParams(0.5, 0.5),
                dt_list=_desk((1e-3, 1e-4), (1e-2, 1e-3), scale),
                n_paths=_desk(10_000, 1_000, scale),
                seed=seed,
            )
        elif name == "stationarity":
            # KS floor scales like 1/sqrt(n_paths * T); the desk smoke run
            # carries a tolerance matching its statistical power
            add(
                "stationarity",
                "a=0.5,b=0.5",
                "check_stationarity",
                p_params=WFParams(0.5, 0.5),
                T=_desk(200.0, 20.0, scale),
                n_paths=_desk(384, 96, scale),
                ks_tol=_desk(0.01, 0.05, scale),
                seed=seed,
            )
        elif name == "mc-vs-spectral":
            add(
                "mc-vs-spectral",
                "a=0.5,b=0.5",
                "check_mc_vs_spectral",
                p_params=WFParams(0.5, 0.5),
                n_paths=_desk(20_000, 4_000, scale),
                seed=seed,
            )
        elif name == "product-harnack":
            add("product-harnack", "alpha=0,theta=1,N=3", "check_product_harnack", seed=seed)
        elif name == "product-kernel":
            add("product-kernel", "alpha=0.5,theta=1,N=3", "check_product_kernel", seed=seed)
        elif name == "gamma-quadratic":
            # the dominant cost is the ~30/(c1*t_lo)-term series at the left edge
            t_lo = _desk(1e-2, 5e-2, scale)
            n_t = _desk(25, 9, scale)
            add(
                "gamma-quadratic",
                "alpha=0.5,theta=0",
                "check_gamma_quadratic",
                alpha=0.5,
                theta=0.0,
                t_lo=t_lo,
                n_t=n_t,
                seed=seed,
            )
            add(
                "gamma-quadratic",
                "alpha=0.5,theta=1",
                "check_gamma_quadratic",
                alpha=0.5,
                theta=1.0,
                t_lo=t_lo,
                n_t=n_t,
                seed=seed + 1,
            )
        elif name == "phi-psi":
            np_pts = _desk(10_000, 2_000, scale)
            add("phi-psi", f"n={np_pts}", "check_phi_psi", n_points=np_pts, seed=seed)
        elif name == "ergodicity":
            add("ergodicity", "alpha=0,theta=1,N=3", "check_ergodicity_decay", seed=seed)
    return jobs


def list_checks() -> list:
    return [
        "spectral",
        "harnack1d",
        "kernel-bounds",
        "kernel-slopes",
        "ball-volume",
        "poincare",
        "super-poincare",
        "coupling",
        "stationarity",
        "mc-vs-spectral",
        "product-harnack",
        "product-kernel",
        "gamma-quadratic",
        "phi-psi",
        "ergodicity",
    ]


def run_suite(
    names: Sequence[str] = ("all",),
    seed: int = DEFAULT_SEED,
    workers: int = 1,
    scale: str = "acceptance",
) -> list:
    """Run the named check families and return reports sorted by (name, label).

    Results are independent of `workers`: every job is a pure function of
    its picklable spec with a fixed derived seed, run in worker processes
    (threads would serialize on the interpreter lock during the
    tight simulation loops), so only wall time changes.
    """
    jobs = build_jobs(names, seed=seed, scale=scale)
    # long Monte Carlo jobs first so the pool tail stays short
    heavy = {"stationarity": 0, "coupling": 1, "gamma-quadratic": 2, "mc-vs-spectral": 3}
    run_order = sorted(range(len(jobs)), key=lambda i: (heavy.get(jobs[i][0], 9), i))
    if workers <= 1:
        results = {i: _run_job(jobs[i]) for i in run_order}
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as ex:
            out = ex.map(_run_job, [jobs[i] for i in run_order])
            results = dict(zip(run_order, out))
    reports = []
    for i, (fam, label, _, _) in enumerate(jobs):
        r = results[i]
        r.params = {"label": label, **r.params}
        reports.append((r.name, label, r))
    reports.sort(key=lambda x: (x[0], x[1]))
    return [r for _, _, r in reports]
