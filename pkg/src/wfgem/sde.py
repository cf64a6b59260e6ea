"""Path simulation for the Wright-Fisher SDE and its drift-forced coupling.

The base scheme is projected Euler-Maruyama for
dx = {a - (a+b)x} dt + sqrt(x(1-x)) dB on [0,1], with clamping events
counted.  An optional Lamperti-coordinate scheme (z = 2 arcsin sqrt(x),
unit diffusion) cross-validates boundary behavior.

The coupling runs two copies on a common noise; the second copy carries the
extra drift -sqrt(y(1-y)) xi(t) dt with
xi(t) = rho(x0,y0) e^{Kt} / int_0^T e^{2Ks} ds, which forces the intrinsic
distance under the deterministic envelope
rho0 e^{-Kt} (e^{2KT}-e^{2Kt})/(e^{2KT}-1) and couples the paths by time T.
The drift is compensated by a Girsanov weight accumulated in log space.

All randomness is counter-based: path i of one run draws from
Philox(key=(seed, i)), so results are bit-for-bit reproducible and
independent of how paths are distributed across workers.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .constants import WFParams, rho

__all__ = [
    "PathSample",
    "CouplingPath",
    "CouplingEnsemble",
    "EstimateCI",
    "EnsembleResult",
    "step_wf",
    "simulate_path",
    "simulate_ensemble",
    "simulate_coupling",
    "couple_ensemble",
    "coupling_envelope",
    "coupling_drift_rate",
    "mc_expectation",
    "girsanov_moment",
    "girsanov_bound",
    "path_generator",
]

_BLOCK_TARGET = 1 << 23  # Gaussian draws held in memory at once


def path_generator(seed: int, index: int) -> np.random.Generator:
    """Independent stream for one path: Philox keyed by (seed, path index)."""
    key = np.array([seed, index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def step_wf(x, dt: float, dW, p: WFParams):
    """One projected Euler-Maruyama step; total on [0,1], vectorized.

    x' = clamp(x + (a - (a+b)x) dt + sqrt(max(x(1-x),0)) dW, 0, 1).
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    x = np.asarray(x, dtype=float)
    s = p.a + p.b
    raw = x + (p.a - s * x) * dt + np.sqrt(np.maximum(x * (1.0 - x), 0.0)) * dW
    out = np.clip(raw, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


def _lamperti_step(z, dt, dW, p, cap):
    """Euler step in z = 2 arcsin sqrt(x) coordinates, unit diffusion."""
    a, s = p.a, p.a + p.b
    sz = np.maximum(np.sin(z), 1e-12)
    drift = (4 * a - 2 * s + (2 * s - 1) * np.cos(z)) / (2 * sz)
    move = np.clip(drift * dt, -cap, cap)
    return np.clip(z + move + dW, 0.0, np.pi)


@dataclass(frozen=True)
class PathSample:
    """One simulated trajectory on a uniform grid."""

    times: np.ndarray
    states: np.ndarray
    params: WFParams
    dt: float
    seed: int
    scheme: str
    clamp_count: int


def _stored_indices(n_steps: int, store_every: int) -> np.ndarray:
    idx = np.arange(0, n_steps + 1, store_every)
    if idx[-1] != n_steps:
        idx = np.append(idx, n_steps)
    return idx


def simulate_path(
    x0: float,
    T: float,
    dt: float,
    p: WFParams,
    seed: int,
    scheme: str = "euler",
    store_every: int = 1,
) -> PathSample:
    """Simulate one Wright-Fisher path to time T.

    Parameters
    ----------
    scheme : {"euler", "lamperti"}
        Projected Euler in x, or Euler in the unit-diffusion coordinate
        z = 2 arcsin sqrt(x) (used for cross-validation of boundary
        behavior; states are returned in x regardless).
    store_every : int
        Thinning for the stored grid; the final time T is always kept.
    """
    if not 0 <= x0 <= 1:
        raise ValueError("x0 must lie in [0,1]")
    if dt <= 0 or dt > T:
        raise ValueError("need 0 < dt <= T")
    if scheme not in ("euler", "lamperti"):
        raise ValueError(f"unknown scheme {scheme!r}")
    n_steps = max(1, int(round(T / dt)))
    gen = path_generator(seed, 0)
    keep = _stored_indices(n_steps, store_every)
    states = np.empty(keep.size)
    s = p.a + p.b
    sqrt_dt = math.sqrt(dt)
    cap = 10.0 * sqrt_dt
    clamp = 0
    lam = scheme == "lamperti"
    z = 2.0 * math.asin(math.sqrt(x0)) if lam else 0.0
    x = x0
    states[0] = x0
    pos = 1
    k = 0
    block = max(1, min(n_steps, _BLOCK_TARGET))
    while k < n_steps:
        blen = min(block, n_steps - k)
        dW = gen.standard_normal(blen) * sqrt_dt
        for j in range(blen):
            if lam:
                z_raw = z + np.clip(
                    (4 * p.a - 2 * s + (2 * s - 1) * math.cos(z))
                    / (2 * max(math.sin(z), 1e-12))
                    * dt,
                    -cap,
                    cap,
                ) + dW[j]
                z = min(max(z_raw, 0.0), math.pi)
                if z != z_raw:
                    clamp += 1
                x = math.sin(0.5 * z) ** 2
            else:
                raw = x + (p.a - s * x) * dt + math.sqrt(max(x * (1.0 - x), 0.0)) * dW[j]
                x = min(max(raw, 0.0), 1.0)
                if x != raw:
                    clamp += 1
            k += 1
            if pos < keep.size and k == keep[pos]:
                states[pos] = x
                pos += 1
    return PathSample(
        times=keep * dt,
        states=states,
        params=p,
        dt=dt,
        seed=seed,
        scheme=scheme,
        clamp_count=clamp,
    )


class EnsembleResult(NamedTuple):
    """Terminal and snapshot states of a batch of independent paths."""

    final: np.ndarray             # (n_paths,)
    snapshots: np.ndarray         # (len(snapshot_times), n_paths)
    snapshot_times: np.ndarray
    histogram: np.ndarray         # occupation counts over [0,1], post-step states
    clamp_count: int
    n_steps: int


def simulate_ensemble(
    x0,
    T: float,
    dt: float,
    p: WFParams,
    n_paths: int,
    seed: int,
    snapshot_times: Sequence[float] = (),
    histogram_bins: int = 0,
    stationary_start: bool = False,
    scheme: str = "euler",
) -> EnsembleResult:
    """Simulate n_paths independent Wright-Fisher paths, vectorized over paths.

    `x0` may be a scalar (common start), an array of per-path starts, or
    ignored when `stationary_start` is set, in which case path i starts from
    its own Beta(2a,2b) draw.  The optional histogram accumulates every
    post-step state into `histogram_bins` uniform bins on [0,1], which is
    what the stationarity check consumes.  `clamp_count` is tracked for the
    euler scheme (the lamperti scheme clips in z inside its step).
    """
    if dt <= 0 or dt > T:
        raise ValueError("need 0 < dt <= T")
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    if scheme not in ("euler", "lamperti"):
        raise ValueError(f"unknown scheme {scheme!r}")
    n_steps = max(1, int(round(T / dt)))
    gens = [path_generator(seed, i) for i in range(n_paths)]
    if stationary_start:
        x = np.array([g.beta(2 * p.a, 2 * p.b) for g in gens])
    elif np.ndim(x0) == 0:
        if not 0 <= float(x0) <= 1:
            raise ValueError("x0 must lie in [0,1]")
        x = np.full(n_paths, float(x0))
    else:
        x = np.asarray(x0, dtype=float).copy()
        if x.shape != (n_paths,) or np.any((x < 0) | (x > 1)):
            raise ValueError("x0 array must have shape (n_paths,) with entries in [0,1]")

    snap_steps = np.asarray([int(round(t / dt)) for t in snapshot_times], dtype=int)
    if np.any(snap_steps < 0) or np.any(snap_steps > n_steps):
        raise ValueError("snapshot times must lie in [0, T]")
    snap_of = {}
    for row, ks in enumerate(snap_steps):
        snap_of.setdefault(int(ks), []).append(row)
    snaps = np.empty((len(snapshot_times), n_paths))
    for row in snap_of.get(0, []):
        snaps[row] = x

    hist = np.zeros(histogram_bins, dtype=np.int64)
    s = p.a + p.b
    sqrt_dt = math.sqrt(dt)
    cap = 10.0 * sqrt_dt
    lam = scheme == "lamperti"
    if lam:
        z = 2.0 * np.arcsin(np.sqrt(x))
    clamp = 0
    block = max(1, min(n_steps, _BLOCK_TARGET // n_paths))
    buf = np.empty((block, n_paths)) if histogram_bins else None
    draws = np.empty((n_paths, block))
    k = 0
    while k < n_steps:
        blen = min(block, n_steps - k)
        for i, g in enumerate(gens):
            draws[i, :blen] = g.standard_normal(blen)
        for j in range(blen):
            dW = draws[:, j] * sqrt_dt
            if lam:
                z_raw = _lamperti_step(z, dt, dW, p, cap)
                z = z_raw  # _lamperti_step already clips
                x = np.sin(0.5 * z) ** 2
            else:
                raw = x + (p.a - s * x) * dt + np.sqrt(np.maximum(x * (1.0 - x), 0.0)) * dW
                x = np.clip(raw, 0.0, 1.0)
                clamp += int(np.count_nonzero(x != raw))
            k += 1
            if buf is not None:
                buf[j] = x
            for row in snap_of.get(k, []):
                snaps[row] = x
        if buf is not None:
            idx = np.minimum(
                (buf[:blen].ravel() * histogram_bins).astype(np.int64), histogram_bins - 1
            )
            hist += np.bincount(idx, minlength=histogram_bins)
    return EnsembleResult(
        final=x,
        snapshots=snaps,
        snapshot_times=np.asarray(snapshot_times, dtype=float),
        histogram=hist,
        clamp_count=clamp,
        n_steps=n_steps,
    )


class EstimateCI(NamedTuple):
    """Monte-Carlo estimate with its standard error."""

    mean: float
    std_error: float
    n: int
    seed: int


def mc_expectation(
    f: Callable[[np.ndarray], np.ndarray],
    x0: float,
    t: float,
    p: WFParams,
    n_paths: int,
    dt: float,
    seed: int,
    scheme: str = "euler",
) -> EstimateCI:
    """Estimate E[f(x(t)) | x(0)=x0] over independent paths.

    Deterministic for a fixed seed: per-path streams are keyed by path index
    and the reduction is numpy's pairwise mean, so the result does not
    depend on how paths would be scheduled across workers.
    """
    if n_paths < 100:
        raise ValueError("n_paths must be >= 100")
    res = simulate_ensemble(x0, t, dt, p, n_paths, seed, scheme=scheme)
    vals = np.asarray(f(res.final), dtype=float)
    if vals.shape != (n_paths,):
        vals = np.broadcast_to(vals, (n_paths,)).astype(float)
    mean = float(np.mean(vals))
    se = float(np.std(vals, ddof=1) / math.sqrt(n_paths))
    return EstimateCI(mean=mean, std_error=se, n=n_paths, seed=seed)


def coupling_drift_rate(p: WFParams, rho0: float, T: float, t) -> np.ndarray:
    """xi(t) = rho0 e^{Kt} / int_0^T e^{2Ks} ds, with the K=0 limit rho0/T."""
    K = p.K
    t = np.asarray(t, dtype=float)
    if K == 0.0:
        return np.broadcast_to(rho0 / T, t.shape).copy()
    denom = math.expm1(2 * K * T) / (2 * K)
    return rho0 * np.exp(K * t) / denom


def coupling_envelope(p: WFParams, rho0: float, T: float, t) -> np.ndarray:
    """Deterministic bound on rho(x(t),y(t)) under the forced coupling.

    rho0 e^{-Kt} (e^{2KT}-e^{2Kt})/(e^{2KT}-1); decreases to 0 at t = T.
    K=0 limit: rho0 (T-t)/T.
    """
    K = p.K
    t = np.asarray(t, dtype=float)
    if K == 0.0:
        return rho0 * (T - t) / T
    num = np.expm1(2 * K * T) - np.expm1(2 * K * t)
    return rho0 * np.exp(-K * t) * num / math.expm1(2 * K * T)


@dataclass(frozen=True)
class CouplingPath:
    """One realization of the two-copy coupling on a common noise grid.

    `x` and `y` follow the canonical orientation x0 <= y0 (inputs are
    swapped on entry otherwise).  After the coupling time `tau` the copies
    are merged exactly and `girsanov_log` is frozen.
    """

    times: np.ndarray
    x: np.ndarray
    y: np.ndarray
    envelope: np.ndarray
    params: WFParams
    dt: float
    seed: int
    rho0: float
    T: float
    tau: float                  # math.inf when not coupled by T
    coupled: bool
    girsanov_log: float
    violation_count: int        # pre-coupling points above envelope + slack
    alive_count: int            # pre-coupling path-time points


@dataclass(frozen=True)
class CouplingEnsemble:
    """Summary statistics of a batch of couplings from a common start."""

    params: WFParams
    x0: float
    y0: float
    T: float
    dt: float
    seed: int
    n_paths: int
    rho0: float
    tau: np.ndarray
    coupled: np.ndarray
    girsanov_log: np.ndarray
    violation_count: int
    alive_count: int

    @property
    def coupled_fraction(self) -> float:
        return float(np.mean(self.coupled))

    @property
    def violation_fraction(self) -> float:
        return self.violation_count / max(self.alive_count, 1)


def _coupling_setup(x0, y0, T, dt, p):
    if not (0 <= x0 <= 1 and 0 <= y0 <= 1):
        raise ValueError("x0, y0 must lie in [0,1]")
    if dt <= 0 or dt > T:
        raise ValueError("need 0 < dt <= T")
    if x0 > y0:
        x0, y0 = y0, x0
    n_steps = max(1, int(round(T / dt)))
    tgrid = np.arange(n_steps + 1) * dt
    rho0 = float(rho(x0, y0))
    xi = coupling_drift_rate(p, rho0, T, tgrid[:-1])
    env = coupling_envelope(p, rho0, T, tgrid)
    eps = max(10.0 * math.sqrt(dt), 1e-6)
    return x0, y0, n_steps, tgrid, rho0, xi, env, eps


def simulate_coupling(
    x0: float,
    y0: float,
    T: float,
    dt: float,
    p: WFParams,
    seed: int,
    store_every: int = 1,
) -> CouplingPath:
    """Run one coupled pair, storing both trajectories.

    The coupling is declared at the first grid time with
    rho(x,y) <= max(10 sqrt(dt), 1e-6), or when the discrete copies cross
    (continuous paths would have met in between); the copies are merged
    exactly from then on.  Violations count pre-coupling grid points with
    rho(x,y) above the envelope plus a 5 sqrt(dt) discretization slack.

    Parameters outside the curvature regime min(a,b) >= 1/4 are accepted
    (K = 0 is used throughout) but no envelope guarantee exists there.
    """
    x0, y0, n_steps, tgrid, rho0, xi, env, eps = _coupling_setup(x0, y0, T, dt, p)
    gen = path_generator(seed, 0)
    keep = _stored_indices(n_steps, store_every)
    xs = np.empty(keep.size)
    ys = np.empty(keep.size)
    xs[0], ys[0] = x0, y0
    s = p.a + p.b
    sqrt_dt = math.sqrt(dt)
    slack = 5.0 * sqrt_dt
    x, y = x0, y0
    alive = x0 != y0
    tau = 0.0 if not alive else math.inf
    logr = 0.0
    violations = 0
    alive_points = 0
    pos = 1
    k = 0
    block = max(1, min(n_steps, _BLOCK_TARGET))
    while k < n_steps:
        blen = min(block, n_steps - k)
        dWs = gen.standard_normal(blen) * sqrt_dt
        for j in range(blen):
            dW = dWs[j]
            sigx = math.sqrt(max(x * (1.0 - x), 0.0))
            xn = min(max(x + (p.a - s * x) * dt + sigx * dW, 0.0), 1.0)
            if alive:
                sigy = math.sqrt(max(y * (1.0 - y), 0.0))
                yn = y + (p.a - s * y) * dt - sigy * xi[k] * dt + sigy * dW
                yn = min(max(yn, 0.0), 1.0)
                logr += xi[k] * dW - 0.5 * xi[k] ** 2 * dt
                d = float(rho(xn, yn))
                if d <= eps or yn < xn:
                    alive = False
                    tau = tgrid[k + 1]
                    yn = xn
                else:
                    alive_points += 1
                    if d > env[k + 1] + slack:
                        violations += 1
            else:
                yn = xn
            x, y = xn, yn
            k += 1
            if pos < keep.size and k == keep[pos]:
                xs[pos], ys[pos] = x, y
                pos += 1
    return CouplingPath(
        times=keep * dt,
        x=xs,
        y=ys,
        envelope=env[keep],
        params=p,
        dt=dt,
        seed=seed,
        rho0=rho0,
        T=T,
        tau=tau,
        coupled=math.isfinite(tau),
        girsanov_log=logr,
        violation_count=violations,
        alive_count=alive_points,
    )


def couple_ensemble(
    x0: float,
    y0: float,
    T: float,
    dt: float,
    p: WFParams,
    n_paths: int,
    seed: int,
) -> CouplingEnsemble:
    """Run n_paths independent couplings, keeping per-path summaries only.

    Same dynamics and declarations as simulate_coupling; path i draws from
    the stream keyed (seed, i).
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    x0, y0, n_steps, tgrid, rho0, xi, env, eps = _coupling_setup(x0, y0, T, dt, p)
    gens = [path_generator(seed, i) for i in range(n_paths)]
    s = p.a + p.b
    sqrt_dt = math.sqrt(dt)
    slack = 5.0 * sqrt_dt
    x = np.full(n_paths, x0)
    y = np.full(n_paths, y0)
    alive = np.full(n_paths, x0 != y0)
    tau = np.where(alive, math.inf, 0.0)
    logr = np.zeros(n_paths)
    violations = 0
    alive_points = 0
    block = max(1, min(n_steps, _BLOCK_TARGET // n_paths))
    draws = np.empty((n_paths, block))
    k = 0
    while k < n_steps:
        blen = min(block, n_steps - k)
        for i, g in enumerate(gens):
            draws[i, :blen] = g.standard_normal(blen)
        for j in range(blen):
            dW = draws[:, j] * sqrt_dt
            sigx = np.sqrt(np.maximum(x * (1.0 - x), 0.0))
            xn = np.clip(x + (p.a - s * x) * dt + sigx * dW, 0.0, 1.0)
            sigy = np.sqrt(np.maximum(y * (1.0 - y), 0.0))
            drift_extra = np.where(alive, -sigy * xi[k] * dt, 0.0)
            yn = np.clip(y + (p.a - s * y) * dt + drift_extra + sigy * dW, 0.0, 1.0)
            yn = np.where(alive, yn, xn)
            logr += np.where(alive, xi[k] * dW - 0.5 * xi[k] ** 2 * dt, 0.0)
            d = rho(xn, yn)
            just = alive & ((d <= eps) | (yn < xn))
            tau[just] = tgrid[k + 1]
            yn = np.where(just, xn, yn)
            alive &= ~just
            n_alive = int(np.count_nonzero(alive))
            alive_points += n_alive
            if n_alive:
                violations += int(np.count_nonzero(alive & (d > env[k + 1] + slack)))
            x, y = xn, yn
            k += 1
    return CouplingEnsemble(
        params=p,
        x0=x0,
        y0=y0,
        T=T,
        dt=dt,
        seed=seed,
        n_paths=n_paths,
        rho0=rho0,
        tau=tau,
        coupled=np.isfinite(tau),
        girsanov_log=logr,
        violation_count=violations,
        alive_count=alive_points,
    )


def girsanov_bound(p: WFParams, rho0: float, T: float, p_exp: float) -> float:
    """Closed-form bound on E R^{p/(p-1)}:

    exp[p K rho0^2 / ((p-1)^2 (e^{2KT}-1))], with (e^{2KT}-1)/K -> 2T at K=0.
    """
    if p_exp <= 1:
        raise ValueError("p must be > 1")
    K = p.K
    factor = 1.0 / (2.0 * T) if K == 0.0 else K / math.expm1(2 * K * T)
    return math.exp(p_exp * rho0**2 * factor / (p_exp - 1.0) ** 2)


def girsanov_moment(couplings, q: float) -> EstimateCI:
    """MC estimate of E[R^q] from coupled paths, R the Girsanov weight.

    `couplings` is a CouplingEnsemble or an iterable of CouplingPath sharing
    (x0, y0, T, params).  Paths that failed to couple by T are rejected with
    a warning (the weight is only meaningful at the coupling time).
    """
    if q <= 1:
        raise ValueError("q must be > 1")
    if isinstance(couplings, CouplingEnsemble):
        logs = couplings.girsanov_log
        ok = couplings.coupled
        seed = couplings.seed
    else:
        cl = list(couplings)
        if not cl:
            raise ValueError("no couplings given")
        logs = np.array([c.girsanov_log for c in cl])
        ok = np.array([c.coupled for c in cl])
        seed = cl[0].seed
    rejected = int(np.count_nonzero(~ok))
    if rejected:
        warnings.warn(f"{rejected} uncoupled path(s) rejected from the moment estimate")
    vals = np.exp(q * logs[ok])
    n = vals.size
    if n < 2:
        raise ValueError("need at least two coupled paths")
    return EstimateCI(
        mean=float(np.mean(vals)),
        std_error=float(np.std(vals, ddof=1) / math.sqrt(n)),
        n=n,
        seed=seed,
    )
