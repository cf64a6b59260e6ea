"""Spectral oracle for the one-dimensional Wright-Fisher semigroup.

The generator L = (1/2) x(1-x) d^2/dx^2 + (a - (a+b)x) d/dx is self-adjoint
in L^2(Beta(2a,2b)) and diagonalized by the orthonormal polynomials of that
weight, with eigenvalues lambda_n = n(n-1)/2 + n(a+b).  This module builds
the basis from exact rational recurrence coefficients, derives a Gauss
quadrature rule from the same recurrence (Golub-Welsch), and evaluates the
heat kernel and semigroup with certified truncation bounds.

The eigenvalue formula is machine-verified at build time by applying L to
each basis polynomial in monomial coefficient space and measuring the scaled
residual of L Q_n + lambda_n Q_n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import betainc

from .constants import WFParams

__all__ = [
    "OrthoBasis",
    "KernelEval",
    "SupKernel",
    "RecurrenceBreakdownError",
    "TruncationFloorError",
    "recurrence_coefficients",
    "beta_moment",
    "build_basis",
    "heat_kernel",
    "semigroup_apply",
    "ball_volume",
    "sup_kernel",
    "eigen_residual_monomial",
    "chebyshev_grid",
]


class RecurrenceBreakdownError(RuntimeError):
    """Loss of positivity in the recurrence norms (degree reported)."""


class TruncationFloorError(RuntimeError):
    """Requested time is below the resolvable floor for the basis size."""


def beta_moment(p: WFParams, k: int) -> float:
    """k-th raw moment of Beta(2a, 2b): prod_{j<k} (2a+j)/(2a+2b+j)."""
    if k < 0:
        raise ValueError("moment order must be >= 0")
    A, s2 = 2 * p.a, 2 * (p.a + p.b)
    out = 1.0
    for j in range(k):
        out *= (A + j) / (s2 + j)
    return out


def recurrence_coefficients(p: WFParams, n: int):
    """Monic three-term recurrence coefficients for Beta(2a,2b) on [0,1].

    pi_{k+1}(x) = (x - A_k) pi_k(x) - B_k pi_{k-1}(x), k = 0..n, with
    B_0 := 1 for the normalized weight.  Closed forms rational in (a, b),
    obtained from the classical Jacobi-weight coefficients by the affine map
    of [-1,1] onto [0,1]; B_1 reduces exactly to the Beta variance, which is
    also how the forms are cross-checked against beta_moment in the tests.

    Returns (A, B) with A[k], B[k] for k = 0..n.
    """
    a, b = p.a, p.b
    s = a + b
    k = np.arange(n + 1, dtype=float)
    A = np.empty(n + 1)
    B = np.empty(n + 1)
    A[0] = a / s
    if n >= 1:
        kk = k[1:]
        A[1:] = 0.5 + (a - b) * (s - 1.0) / (2.0 * (kk + s - 1.0) * (kk + s))
        B[1] = a * b / (s * s * (2 * s + 1))
    B[0] = 1.0
    if n >= 2:
        kk = k[2:]
        B[2:] = (
            kk * (kk + 2 * a - 1) * (kk + 2 * b - 1) * (kk + 2 * s - 2)
            / (4.0 * (kk + s - 1) ** 2 * (2 * kk + 2 * s - 1) * (2 * kk + 2 * s - 3))
        )
    if not np.all(np.isfinite(A)) or not np.all(np.isfinite(B)):
        raise RecurrenceBreakdownError("non-finite recurrence coefficient")
    bad = np.nonzero(B <= 0)[0]
    if bad.size:
        raise RecurrenceBreakdownError(f"recurrence norm lost positivity at degree {bad[0]}")
    return A, B


def _evaluate(A, sb, nmax, x, deriv=False):
    """Orthonormal values Q_0..Q_nmax at x via the normalized recurrence."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    Q = np.zeros((nmax + 1, x.size))
    Q[0] = 1.0
    if nmax >= 1:
        Q[1] = (x - A[0]) / sb[1]
    for k in range(1, nmax):
        Q[k + 1] = ((x - A[k]) * Q[k] - sb[k] * Q[k - 1]) / sb[k + 1]
    if not deriv:
        return Q
    D = np.zeros_like(Q)
    if nmax >= 1:
        D[1] = 1.0 / sb[1]
    for k in range(1, nmax):
        D[k + 1] = (Q[k] + (x - A[k]) * D[k] - sb[k] * D[k - 1]) / sb[k + 1]
    return Q, D


@dataclass(frozen=True)
class OrthoBasis:
    """Orthonormal polynomial eigenbasis of one Wright-Fisher generator.

    Immutable after construction; evaluations are pure.  `nodes`/`weights`
    form a Gauss rule with N+1 points, exact for polynomial integrands of
    degree <= 2N+1 against Beta(2a,2b).
    """

    params: WFParams
    N: int
    rec_a: np.ndarray        # monic diagonal A_k, k = 0..N+1
    rec_sqrt_b: np.ndarray   # sqrt(B_k), k = 0..N+1
    eigenvalues: np.ndarray  # lambda_n = n(n-1)/2 + n(a+b), n = 0..N
    nodes: np.ndarray
    weights: np.ndarray
    ortho_residual: float
    eigen_residual: float

    def evaluate(self, x, nmax=None):
        """Matrix Q[n, j] = Q_n(x_j) for n = 0..nmax (default N)."""
        nmax = self.N if nmax is None else nmax
        if nmax > self.N + 1:
            raise ValueError("nmax beyond stored recurrence; rebuild with larger N")
        return _evaluate(self.rec_a, self.rec_sqrt_b, nmax, x)

    def evaluate_with_deriv(self, x, nmax=None):
        nmax = self.N if nmax is None else nmax
        return _evaluate(self.rec_a, self.rec_sqrt_b, nmax, x, deriv=True)

    def project(self, fvals):
        """Quadrature coefficients <f, Q_n> from values of f at the nodes."""
        Qn = self.evaluate(self.nodes)
        return (Qn * self.weights) @ np.asarray(fvals, dtype=float)

    def dirichlet_form_values(self, fprime_vals, gprime_vals=None):
        """E(f,g) = (1/2) sum_j w_j x_j(1-x_j) f'(x_j) g'(x_j).

        Takes derivative values at the stored nodes; exact whenever the
        integrand x(1-x) f' g' has degree <= 2N+1.
        """
        gp = fprime_vals if gprime_vals is None else gprime_vals
        x = self.nodes
        return 0.5 * float(np.sum(self.weights * x * (1.0 - x) * np.asarray(fprime_vals) * np.asarray(gp)))


def eigen_residual_monomial(p: WFParams, N: int) -> float:
    """Scaled residual of L Q_n + lambda_n Q_n in monomial coefficient space.

    The basis polynomials are generated degree by degree in coefficient
    space; L acts exactly on coefficients (differentiation and shifts), so
    the residual measures the eigenvalue formula, not quadrature.  Scaling by
    max|coeff(lambda_n Q_n)| keeps the measure meaningful at degrees where
    raw coefficients reach 1e30.
    """
    a, b = p.a, p.b
    s = a + b
    A, B = recurrence_coefficients(p, N + 1)
    sb = np.sqrt(B)
    C = np.zeros((N + 1, N + 1))
    C[0, 0] = 1.0
    if N >= 1:
        C[1, 1] = 1.0 / sb[1]
        C[1, 0] = -A[0] / sb[1]
    for k in range(1, N):
        shifted = np.zeros(N + 1)
        shifted[1 : k + 2] = C[k, : k + 1]
        C[k + 1] = (shifted - A[k] * C[k] - sb[k] * C[k - 1]) / sb[k + 1]

    worst = 0.0
    for n in range(N + 1):
        c = C[n, : n + 1]
        lam = 0.5 * n * (n - 1) + n * s
        j = np.arange(n + 1, dtype=float)
        res = np.zeros(n + 2)
        d1 = c[1:] * j[1:]                 # f' coefficients (index = power)
        d2 = d1[1:] * j[1:n] if n >= 2 else np.zeros(0)
        if n >= 2:
            res[1:n] += 0.5 * d2           # (1/2) x f''
            res[2 : n + 1] -= 0.5 * d2     # -(1/2) x^2 f''
        res[0:n] += a * d1                 # a f'
        res[1 : n + 1] -= s * d1           # -(a+b) x f'
        res[: n + 1] += lam * c
        scale = max(float(np.abs(lam * c).max()) if n else 1.0, 1.0)
        worst = max(worst, float(np.abs(res).max()) / scale)
    return worst


def build_basis(p: WFParams, N: int, n_quad: int | None = None) -> OrthoBasis:
    """Construct the orthonormal eigenbasis of degree N with its Gauss rule.

    Verifies at build time: orthonormality under the stored quadrature and
    the eigenvalue formula via symbolic coefficient arithmetic; residuals are
    stored on the basis and must be below 1e-8.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    n_quad = N + 1 if n_quad is None else n_quad
    if n_quad < N + 1:
        raise ValueError("need at least N+1 quadrature nodes")
    A, B = recurrence_coefficients(p, max(N + 1, n_quad))
    sb = np.sqrt(B)
    nodes, vecs = eigh_tridiagonal(A[:n_quad], sb[1:n_quad])
    weights = vecs[0] ** 2
    weights = weights / weights.sum()
    n = np.arange(N + 1, dtype=float)
    lam = 0.5 * n * (n - 1) + n * (p.a + p.b)

    Qn = _evaluate(A, sb, N, nodes)
    gram = (Qn * weights) @ Qn.T
    ortho = float(np.abs(gram - np.eye(N + 1)).max())
    eres = eigen_residual_monomial(p, N)
    if ortho > 1e-8:
        raise RecurrenceBreakdownError(f"orthonormality residual {ortho:.2e} at N={N}")
    if eres > 1e-8:
        raise RecurrenceBreakdownError(f"eigenvalue residual {eres:.2e} at N={N}")
    return OrthoBasis(
        params=p,
        N=N,
        rec_a=A[: N + 2],
        rec_sqrt_b=sb[: N + 2],
        eigenvalues=lam,
        nodes=nodes,
        weights=weights,
        ortho_residual=ortho,
        eigen_residual=eres,
    )


class KernelEval(NamedTuple):
    """Heat-kernel values on the grid x cross y with a truncation-tail bound.

    `value[i, j]` approximates p_t(x_i, y_j); the true kernel differs from
    the partial sum by at most `truncation_error`, uniformly on [0,1]^2.
    """

    t: float
    x: np.ndarray
    y: np.ndarray
    value: np.ndarray
    truncation_error: float

    @property
    def scalar(self) -> float:
        if self.value.size != 1:
            raise ValueError("kernel was evaluated on a grid, not a point")
        return float(self.value[0, 0])


def _lam(n, s):
    n = np.asarray(n, dtype=float)
    return 0.5 * n * (n - 1) + n * s


def kernel_tail_bound(p: WFParams, N: int, t: float, grid: int = 65) -> float:
    """Bound on sum_{n>N} e^{-lambda_n t} sup|Q_n|^2.

    sup|Q_n| is taken as the larger endpoint value, which is the true
    supremum whenever max(a,b) >= 1/4 (the classical endpoint-dominance
    property of Jacobi polynomials with max(alpha,beta) >= -1/2); a Chebyshev
    grid maximum is folded in as a safeguard for the remaining corner.
    Terms are accumulated until the exponential factor underflows or the
    term ratios certify a geometric remainder.
    """
    s = p.a + p.b
    xs = np.concatenate(([0.0, 1.0], chebyshev_grid(grid)))
    # lambda_n t > 745 underflows double precision; n_cap sits past that index
    n_cap = int(math.sqrt(1500.0 / t) + 2 * s + 10) + N + 10
    A, B = recurrence_coefficients(p, n_cap + 1)
    sb = np.sqrt(B)
    q0 = np.ones_like(xs)
    q1 = (xs - A[0]) / sb[1]
    total = 0.0
    prev_term = None
    ratios = []
    qkm1, qk = q0, q1
    for n in range(1, n_cap + 1):
        if n > N:
            lam_n = 0.5 * n * (n - 1) + n * s
            e = lam_n * t
            if e > 745.0:
                return total
            term = math.exp(-e) * float(np.max(np.abs(qk))) ** 2
            total += term
            if prev_term is not None and prev_term > 0:
                r = term / prev_term
                ratios.append(r)
                if len(ratios) >= 3 and max(ratios[-3:]) < 0.7:
                    rmax = max(ratios[-3:])
                    return total + term * rmax / (1.0 - rmax)
            prev_term = term
        if n < n_cap:
            qnext = ((xs - A[n]) * qk - sb[n] * qkm1) / sb[n + 1]
            qkm1, qk = qk, qnext
    return total


def heat_kernel(basis: OrthoBasis, t: float, x, y, tol: float | None = None) -> KernelEval:
    """p_t(x, y) = sum_{n<=N} e^{-lambda_n t} Q_n(x) Q_n(y), density w.r.t. Beta(2a,2b).

    Exactly symmetric in (x, y).  `truncation_error` bounds the discarded
    tail uniformly over the requested points.  If `tol` is given and the
    bound exceeds it, a TruncationFloorError asks for a larger N.
    """
    if t <= 0:
        raise ValueError("t must be positive")
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if np.any((x < 0) | (x > 1)) or np.any((y < 0) | (y > 1)):
        raise ValueError("kernel arguments must lie in [0,1]")
    w = np.exp(-basis.eigenvalues * t)
    Qx = basis.evaluate(x)
    Qy = Qx if (y.shape == x.shape and np.array_equal(y, x)) else basis.evaluate(y)
    value = np.einsum("n,ni,nj->ij", w, Qx, Qy)
    trunc = kernel_tail_bound(basis.params, basis.N, t)
    if tol is not None and trunc > tol:
        raise TruncationFloorError(
            f"truncation bound {trunc:.3e} exceeds tol {tol:.3e} at t={t}: increase N"
        )
    return KernelEval(t=t, x=x, y=y, value=value, truncation_error=trunc)


def kernel_deviation_diagonal(basis: OrthoBasis, t: float, x) -> np.ndarray:
    """p_t(x,x) - 1 summed without the constant mode (no cancellation)."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    w = np.exp(-basis.eigenvalues[1:] * t)
    Q = basis.evaluate(x)[1:]
    return w @ (Q * Q)


def semigroup_apply(basis: OrthoBasis, t: float, f, x):
    """(P_t f)(x) via spectral projection: sum_n e^{-lambda_n t} <f,Q_n> Q_n(x).

    The projection uses the stored Gauss rule and is exact for polynomial f
    with deg f <= N+1 (integrand degree deg f + N <= 2N+1).  For f = 1 the
    result is 1 up to rounding.  Scalar x gives a scalar.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    scalar = np.isscalar(x) or (isinstance(x, np.ndarray) and x.ndim == 0)
    fvals = np.asarray(f(basis.nodes), dtype=float)
    coeff = basis.project(fvals)
    decay = np.exp(-basis.eigenvalues * t)
    Qx = basis.evaluate(np.atleast_1d(np.asarray(x, dtype=float)))
    out = (decay * coeff) @ Qx
    return float(out[0]) if scalar else out


def ball_volume(p: WFParams, x: float, r: float) -> float:
    """Beta(2a,2b)-measure of the intrinsic ball {y : rho(x,y) <= r}.

    The ball is the interval [sin^2(arcsin(sqrt x) - r/2), sin^2(arcsin(sqrt x) + r/2)]
    clamped to [0,1]; its measure is an exact difference of regularized
    incomplete beta functions, so no quadrature is involved.
    """
    if not 0 <= x <= 1:
        raise ValueError("x must lie in [0,1]")
    if r <= 0:
        raise ValueError("r must be positive")
    half = 0.5 * r
    th = math.asin(math.sqrt(x))
    lo = math.sin(max(th - half, 0.0)) ** 2 if th - half > 0 else 0.0
    hi = math.sin(min(th + half, 0.5 * math.pi)) ** 2 if th + half < 0.5 * math.pi else 1.0
    A, B = 2 * p.a, 2 * p.b
    # intervals in the upper tail difference the complementary form; values
    # near 1 would otherwise round to 1.0 and cancel to zero mass
    if hi <= 0.5:
        vol = betainc(A, B, hi) - betainc(A, B, lo)
    elif lo >= 0.5:
        vol = betainc(B, A, 1.0 - lo) - betainc(B, A, 1.0 - hi)
    else:
        vol = (betainc(A, B, 0.5) - betainc(A, B, lo)) + (
            betainc(B, A, 0.5) - betainc(B, A, 1.0 - hi)
        )
    return float(vol)


class SupKernel(NamedTuple):
    value: float
    x: float
    truncation_error: float


def chebyshev_grid(n: int) -> np.ndarray:
    """n Chebyshev points on [0,1], clustered at both endpoints, inclusive."""
    return (1.0 - np.cos(np.pi * np.arange(n) / (n - 1))) / 2.0


def sup_kernel(basis: OrthoBasis, t: float, grid: int = 129) -> SupKernel:
    """sup_{x,y} p_t(x,y): reduces to the diagonal by Cauchy-Schwarz.

    The truncated kernel is positive semidefinite, so
    p_t(x,y) <= sqrt(p_t(x,x) p_t(y,y)) holds exactly for the partial sum as
    well; the search runs over a Chebyshev grid of diagonal points with
    golden-section refinement around the best bracket.
    """
    if grid < 64:
        raise ValueError("grid must be >= 64")
    xs = chebyshev_grid(grid)
    w = np.exp(-basis.eigenvalues * t)

    def diag(xv):
        Q = basis.evaluate(np.atleast_1d(xv))
        return w @ (Q * Q)

    vals = diag(xs)
    j = int(np.argmax(vals))
    lo = xs[max(j - 1, 0)]
    hi = xs[min(j + 1, grid - 1)]
    invphi = (math.sqrt(5) - 1) / 2
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1 = float(diag(x1)[0])
    f2 = float(diag(x2)[0])
    for _ in range(50):
        if f1 > f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - invphi * (hi - lo)
            f1 = float(diag(x1)[0])
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + invphi * (hi - lo)
            f2 = float(diag(x2)[0])
    cands = [(float(vals[j]), float(xs[j])), (f1, float(x1)), (f2, float(x2))]
    best_v, best_x = max(cands)
    trunc = kernel_tail_bound(basis.params, basis.N, t)
    return SupKernel(value=best_v, x=best_x, truncation_error=trunc)
