"""Stick-breaking layer: cube/simplex spaces, GEM sampling, the truncated
infinite-dimensional diffusion, and product-form kernel and Harnack bounds.

The infinite process lives on the closed simplex {sum_n m_n <= 1}; it is the
image under the stick-breaking map Phi (phi_n = x_n prod_{i<n}(1-x_i)) of
countably many independent Wright-Fisher coordinates.  A truncation keeps N
explicit coordinates plus a remainder; every infinite sum or product carries
a certified tail bound (rho <= pi termwise, affine curvature growth, (H2)
kernel factors), so the truncated quantities bracket the untruncated ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .constants import (
    ParamSequence,
    WFParams,
    _affine_exp_tail,
    gamma_quadratic_bound,
    gamma_series,
    harnack_exponent_1d,
    k_ab,
    rho,
    stick_coords,
)
from .sde import path_generator
from .spectral import OrthoBasis, build_basis, heat_kernel

__all__ = [
    "CubePoint",
    "SimplexPoint",
    "GEMSample",
    "GEMPath",
    "ProductKernel",
    "UniformKernelBounds",
    "phi",
    "psi",
    "sample_gem",
    "two_param_params",
    "simulate_gem_path",
    "build_product_bases",
    "product_kernel",
    "product_harnack_bound",
    "kernel_uniform_bounds",
    "ergodicity_bound",
]

# Display constant of the uniform kernel bounds: c0 = 2*rho(0,1) = 2*pi.
C0_DISPLAY = 2.0 * math.pi
# Conservative constant from multiplying per-coordinate (H2) factors:
# each factor contributes 2*rho(0,1)^2 = 2*pi^2 per unit of gamma.
C0_H2 = 2.0 * math.pi**2

_SUM_TOL = 1e-12


@dataclass(frozen=True)
class CubePoint:
    """Point of the coordinate cube [0,1]^N (truncated from [0,1]^infinity).

    `tail_rule` declares how coordinates beyond the stored ones are treated
    by bound evaluators: "stationary" integrates them out (no distance
    contribution), "worst" charges the diameter rho = pi per coordinate.
    """

    coords: np.ndarray
    tail_rule: str = "stationary"

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coords, dtype=float))
        if c.ndim != 1 or c.size < 1:
            raise ValueError("coords must be a nonempty 1-D array")
        if np.any((c < 0) | (c > 1)) or not np.all(np.isfinite(c)):
            raise ValueError("cube coordinates must lie in [0,1]")
        if self.tail_rule not in ("stationary", "worst"):
            raise ValueError(f"unknown tail_rule {self.tail_rule!r}")
        object.__setattr__(self, "coords", c)

    def __len__(self) -> int:
        return self.coords.size

    @property
    def in_E(self) -> bool:
        """True iff any coordinate equal to 1 is followed only by ones."""
        ones = self.coords == 1.0
        if not ones.any():
            return True
        return bool(ones[np.argmax(ones):].all())


@dataclass(frozen=True)
class SimplexPoint:
    """Truncated point of the closed infinite simplex.

    Stores N nonnegative masses and the remainder 1 - sum(masses) carried by
    the unseen coordinates.  Entries within -1e-12 of zero are snapped to 0;
    the remainder must complete the masses to 1 within 1e-12.
    """

    masses: np.ndarray
    remainder: float

    def __post_init__(self):
        m = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if m.ndim != 1 or m.size < 1:
            raise ValueError("masses must be a nonempty 1-D array")
        if np.any(m < -_SUM_TOL) or not np.all(np.isfinite(m)):
            raise ValueError("masses must be nonnegative")
        r = float(self.remainder)
        if r < -_SUM_TOL:
            raise ValueError("remainder must be nonnegative")
        m = np.maximum(m, 0.0)
        r = max(r, 0.0)
        total = float(m.sum()) + r
        if abs(total - 1.0) > _SUM_TOL * max(1.0, m.size):
            raise ValueError(f"masses + remainder = {total}, expected 1")
        object.__setattr__(self, "masses", m)
        object.__setattr__(self, "remainder", r)

    def __len__(self) -> int:
        return self.masses.size


def phi(x: CubePoint) -> SimplexPoint:
    """Stick-breaking map: phi_n(x) = x_n prod_{i<n}(1-x_i).

    The remainder prod_{i<=N}(1-x_i) completes the masses to 1 exactly by
    telescoping.
    """
    u = x.coords
    left = np.concatenate(([1.0], np.cumprod(1.0 - u)))
    return SimplexPoint(masses=u * left[:-1], remainder=float(left[-1]))


def psi(s: SimplexPoint) -> CubePoint:
    """Inverse stick-breaking map psi_n = m_n/(1 - sum_{i<n} m_i), 0/0 = 1.

    When the masses exhaust 1 at some index, later coordinates are 1 by the
    convention, landing the image in the subspace E.
    """
    return CubePoint(coords=stick_coords(s.masses, s.remainder))


@dataclass(frozen=True)
class GEMSample:
    """A stick-breaking draw with its underlying beta sticks.

    `expected_remainder` is the dustless-decay certificate
    E prod(1-U_i) = prod b_i/(a_i+b_i) for the truncation depth used.
    """

    point: SimplexPoint
    sticks: np.ndarray
    seed: int
    expected_remainder: float


def _seq_params(seq: ParamSequence, N: int):
    if N < 1:
        raise ValueError("N must be >= 1")
    if not seq.infinite and N > seq.n_stored:
        raise ValueError(f"N={N} exceeds the {seq.n_stored} stored entries")
    return [seq.param(i) for i in range(1, N + 1)]


def sample_gem(seq: ParamSequence, N: int, seed: int) -> GEMSample:
    """Draw U_i ~ Beta(2a_i, 2b_i) independently and map through phi.

    The one-parameter GEM(theta) is the constant case a_i = 1/2,
    b_i = theta/2 (sticks Beta(1, theta)).
    """
    ps = _seq_params(seq, N)
    a = np.array([q.a for q in ps])
    b = np.array([q.b for q in ps])
    gen = path_generator(seed, 0)
    sticks = gen.beta(2 * a, 2 * b)
    expected = float(np.prod(b / (a + b)))
    return GEMSample(
        point=phi(CubePoint(coords=sticks)),
        sticks=sticks,
        seed=seed,
        expected_remainder=expected,
    )


def two_param_params(alpha: float, theta: float, N: int) -> ParamSequence:
    """Two-parameter GEM sequence: a_i = (1-alpha)/2, b_i = (theta+alpha*i)/2.

    Requires 0 <= alpha < 1 and theta + alpha > 0.  Stores N explicit entries
    and attaches the rule for all later coordinates.  When every coordinate
    sits in the curvature regime (alpha <= 1/2 and theta + alpha >= 1/2) and
    alpha > 0, the affine certificate K_i >= (theta-alpha)/4 + (alpha/4) i
    is declared, enabling certified gamma tails and the quadratic bound.

    Flags: "inf_b_below_half" when inf b_i < 1/2 (the uniform-ergodicity
    hypothesis on the b_i fails); "outside_harnack_regime" when some
    coordinate has min(a_i, b_i) < 1/4.
    """
    if not 0 <= alpha < 1:
        raise ValueError("alpha must lie in [0, 1)")
    if theta + alpha <= 0:
        raise ValueError("theta + alpha must be positive")
    if N < 1:
        raise ValueError("N must be >= 1")

    def rule(i: int) -> WFParams:
        return WFParams((1 - alpha) / 2, (theta + alpha * i) / 2)

    entries = tuple(rule(i) for i in range(1, N + 1))
    in_regime = alpha <= 0.5 and theta + alpha >= 0.5
    flags = []
    if (theta + alpha) / 2 < 0.5:
        flags.append("inf_b_below_half")
    if not in_regime:
        flags.append("outside_harnack_regime")
    k_affine = None
    tail_start = None
    if alpha > 0 and in_regime:
        # K_i = (sqrt((1-2alpha)(2 theta + 2 alpha i - 1)) + theta + alpha i - alpha)/4
        # >= (theta - alpha)/4 + (alpha/4) i, dropping the nonnegative root
        k_affine = ((theta - alpha) / 4.0, alpha / 4.0)
        tail_start = 1
    return ParamSequence(
        entries=entries,
        rule=rule,
        lambda_inf=(1 + theta) / 2.0,
        growth=alpha / 2.0 if alpha > 0 else None,
        k_affine=k_affine,
        tail_start=tail_start,
        flags=tuple(flags),
    )


@dataclass(frozen=True)
class GEMPath:
    """Truncated stick-breaking diffusion: simplex snapshots over time."""

    times: np.ndarray
    points: list                     # SimplexPoint per stored time
    coord_states: np.ndarray         # (len(times), N) underlying cube paths
    seq_params: tuple                # WFParams per coordinate
    dt: float
    seed: int
    clamp_count: int


def simulate_gem_path(
    s0: SimplexPoint,
    seq: ParamSequence,
    T: float,
    dt: float,
    N: int,
    seed: int,
    store_every: int = 1,
) -> GEMPath:
    """Simulate the truncated stick-breaking diffusion started from s0.

    The N cube coordinates psi(s0)_1..N evolve as independent Wright-Fisher
    paths (coordinate i draws from the stream keyed (seed, i-1), so N=1
    reproduces simulate_path bit-for-bit); each stored time is mapped
    through phi, hence mass conservation holds at every snapshot by
    construction.
    """
    ps = _seq_params(seq, N)
    if len(s0) < N:
        raise ValueError(f"s0 stores {len(s0)} masses, need at least N={N}")
    if dt <= 0 or dt > T:
        raise ValueError("need 0 < dt <= T")
    x = psi(s0).coords[:N].copy()
    a = np.array([q.a for q in ps])
    s = np.array([q.a + q.b for q in ps])
    n_steps = max(1, int(round(T / dt)))
    keep = np.arange(0, n_steps + 1, store_every)
    if keep[-1] != n_steps:
        keep = np.append(keep, n_steps)
    states = np.empty((keep.size, N))
    states[0] = x
    gens = [path_generator(seed, i) for i in range(N)]
    sqrt_dt = math.sqrt(dt)
    clamp = 0
    pos = 1
    k = 0
    block = max(1, min(n_steps, (1 << 23) // N))
    draws = np.empty((N, block))
    while k < n_steps:
        blen = min(block, n_steps - k)
        for i, g in enumerate(gens):
            draws[i, :blen] = g.standard_normal(blen)
        for j in range(blen):
            dW = draws[:, j] * sqrt_dt
            raw = x + (a - s * x) * dt + np.sqrt(np.maximum(x * (1.0 - x), 0.0)) * dW
            x = np.clip(raw, 0.0, 1.0)
            clamp += int(np.count_nonzero(x != raw))
            k += 1
            if pos < keep.size and k == keep[pos]:
                states[pos] = x
                pos += 1
    points = [phi(CubePoint(coords=row)) for row in states]
    return GEMPath(
        times=keep * dt,
        points=points,
        coord_states=states,
        seq_params=tuple(ps),
        dt=dt,
        seed=seed,
        clamp_count=clamp,
    )


def build_product_bases(seq: ParamSequence, N: int, basis_n: int = 60) -> tuple:
    """Per-coordinate spectral bases for the first N coordinates."""
    return tuple(build_basis(q, basis_n) for q in _seq_params(seq, N))


def _check_tail_regime(seq: ParamSequence, start: int) -> None:
    """Require the curvature regime for unseen coordinates i >= start.

    Probes stored entries and rule values through tail_start + 32; beyond
    that the affine certificate (verified termwise by gamma_series) forces
    K_i > 0, which only happens inside the regime.
    """
    if not seq.infinite:
        hi = seq.n_stored
    else:
        if seq.k_affine is None:
            raise ValueError(
                "infinite sequence without an affine curvature certificate: "
                "tail factors cannot be certified"
            )
        hi = max(seq.tail_start + 32, start)
    for i in range(start, hi + 1):
        q = seq.param(i)
        if not q.harnack_regime:
            raise ValueError(
                f"coordinate {i} has min(a,b) = {min(q.a, q.b)} < 1/4: "
                "two-sided kernel factors are not available outside the regime"
            )


class ProductKernel(NamedTuple):
    """Finite product of 1-D heat kernels with tail-factor envelopes.

    The untruncated product lies in
    [value * tail_lower, value * tail_upper] whenever the unseen
    coordinates coincide at worst rho = pi; coinciding tail coordinates
    tighten the lower factor toward exp(-...) with their true distances.
    """

    t: float
    value: float
    tail_lower: float
    tail_upper: float
    n_factors: int
    factor_truncation: float   # sum of the 1-D truncation-tail bounds


def product_kernel(
    t: float,
    x: CubePoint,
    y: CubePoint,
    seq: ParamSequence,
    bases: Sequence[OrthoBasis],
    tol: Optional[float] = None,
) -> ProductKernel:
    """prod_{i<=N} p_t^{a_i,b_i}(x_i, y_i) with certified tail factors.

    The factors for i > N are bracketed by the two-sided (H2) bounds
    exp[+-2 K_i rho(0,1)^2/(e^{K_i t}-1)] (zero-K convention 1/t), whose
    product over the unseen coordinates is exp[+-2 pi^2 G] with
    G = gamma_series(seq, t, start=N+1) plus its certified tail.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    N = len(bases)
    if len(x) < N or len(y) < N:
        raise ValueError("points store fewer coordinates than bases")
    ps = _seq_params(seq, N)
    for i, basis in enumerate(bases):
        if (basis.params.a, basis.params.b) != (ps[i].a, ps[i].b):
            raise ValueError(f"basis {i + 1} does not match sequence parameters")
    value = 1.0
    trunc = 0.0
    for i, basis in enumerate(bases):
        ke = heat_kernel(basis, t, x.coords[i], y.coords[i], tol=tol)
        value *= ke.scalar
        trunc += ke.truncation_error
    if seq.infinite or seq.n_stored > N:
        _check_tail_regime(seq, N + 1)
        g, g_tail, _ = gamma_series(seq, t, start=N + 1)
        G = g + g_tail
    else:
        G = 0.0
    return ProductKernel(
        t=t,
        value=value,
        tail_lower=math.exp(-C0_H2 * G),
        tail_upper=math.exp(C0_H2 * G) if C0_H2 * G < 700 else math.inf,
        n_factors=N,
        factor_truncation=trunc,
    )


def product_harnack_bound(
    p: float,
    t: float,
    x: CubePoint,
    y: CubePoint,
    seq: ParamSequence,
) -> float:
    """Dimension-free Harnack exponent for the stick-breaking semigroup:

    sum_i p K_i rho(x_i, y_i)^2 / ((p-1)(e^{2 K_i t} - 1)), K_i = 0 terms
    contributing p rho^2/((p-1) 2t).

    Stored coordinates contribute their exact exponents.  Coordinates beyond
    the stored ones contribute 0 under the "stationary" tail rule and a
    certified worst-case (rho = pi) tail under the "worst" rule, using
    K/(e^{2Kt}-1) <= e^{-Kt}/(2t) and the affine growth of K_i.

    Requires min(a_i, b_i) >= 1/4 for every coordinate.
    """
    if p <= 1:
        raise ValueError("p must be > 1")
    if t <= 0:
        raise ValueError("t must be positive")
    n = min(len(x), len(y))
    total = 0.0
    for i in range(1, n + 1):
        q = seq.param(i) if (seq.infinite or i <= seq.n_stored) else None
        if q is None:
            raise ValueError(f"sequence has no parameters for coordinate {i}")
        if not q.harnack_regime:
            raise ValueError(
                f"coordinate {i} has min(a,b) < 1/4, outside the Harnack hypothesis"
            )
        r = float(rho(x.coords[i - 1], y.coords[i - 1]))
        total += harnack_exponent_1d(p, t, r, k_ab(q)).value
    worst_tail = x.tail_rule == "worst" or y.tail_rule == "worst"
    if worst_tail and (seq.infinite or seq.n_stored > n):
        _check_tail_regime(seq, n + 1)
        if not seq.infinite:
            for i in range(n + 1, seq.n_stored + 1):
                total += harnack_exponent_1d(p, t, math.pi, k_ab(seq.param(i))).value
        else:
            c0, c1 = seq.k_affine
            ts = seq.tail_start
            i = n + 1
            # exact terms until the affine certificate covers the rest
            while i < max(ts, n + 1):
                total += harnack_exponent_1d(p, t, math.pi, k_ab(seq.param(i))).value
                i += 1
            # sum_{j>=i} K_j/(e^{2 K_j t}-1) <= (1/(2t)) sum e^{-K_j t}
            tail = _affine_exp_tail(c0, c1, i, t) / (2.0 * t)
            total += p * math.pi**2 * tail / (p - 1.0)
    return total


class UniformKernelBounds(NamedTuple):
    """Two-sided uniform heat-kernel bounds exp[+-const * gamma(t)].

    (lower, upper) use the display constant c0 = 2 rho(0,1) = 2 pi;
    (lower_h2, upper_h2) use the conservative product-of-(H2) constant
    2 rho(0,1)^2 = 2 pi^2.  `gamma` includes the certified tail.
    """

    t: float
    lower: float
    upper: float
    lower_h2: float
    upper_h2: float
    gamma: float
    gamma_tail: float


def kernel_uniform_bounds(t: float, seq: ParamSequence) -> UniformKernelBounds:
    """Uniform bounds exp[-c gamma(t)] <= p_t(x,y) <= exp[+c gamma(t)].

    Returned for both constants: the display form c0 = 2 pi and the
    conservative form 2 pi^2 obtained by multiplying per-coordinate (H2)
    bounds at worst-case distance.  Requires every coordinate in the
    curvature regime (C = 1 case); gamma carries its certified tail.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    _check_tail_regime(seq, 1)
    g, g_tail, _ = gamma_series(seq, t)
    G = g + g_tail

    def pair(c):
        e = c * G
        return math.exp(-e), math.exp(e) if e < 700 else math.inf

    lo, hi = pair(C0_DISPLAY)
    lo2, hi2 = pair(C0_H2)
    return UniformKernelBounds(
        t=t, lower=lo, upper=hi, lower_h2=lo2, upper_h2=hi2, gamma=g, gamma_tail=g_tail
    )


def ergodicity_bound(t: float, seq: ParamSequence, c: Optional[float] = None) -> float:
    """Uniform ergodicity bound exp[c/t^2 - lambda t], lambda = inf(a_i+b_i).

    With `c` omitted, the constant is derived from the certified quadratic
    gamma bound evaluated at t/2 (the bound splits the interval at t/2):
    c = 4 * c0 * gamma_quadratic_bound(seq), which certifies the formula for
    t/2 inside the quadratic bound's validity window (0, 1].
    """
    if t <= 0:
        raise ValueError("t must be positive")
    lam = seq.lambda_inf
    if lam <= 0:
        raise ValueError("sequence must declare a positive lambda_inf")
    if c is None:
        c = 4.0 * C0_DISPLAY * gamma_quadratic_bound(seq)
    e = c / (t * t) - lam * t
    return math.exp(e) if e < 700 else math.inf
