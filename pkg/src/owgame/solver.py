"""Equilibrium vectors nu, omega (and normalised v, w) of the n-trader game.

Two independent routes are provided: an LU solve of the dense linear
systems, and an O(N) closed form for equidistant grids. The closed form is
evaluated entirely through ratios of the characteristic roots, so no power
m_+^N is ever formed.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg

from .matrices import KernelMatrices, build_halfgrid, build_kernel
from .model import GridSpec, ModelParams, NumericalError, ParameterError, derived_scalars

log = logging.getLogger(__name__)

SPECIAL_BRANCH_TOL = 1e-9
DENSE_FALLBACK_TOL = 1e-6
RESIDUAL_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class EquilibriumVectors:
    nu: np.ndarray
    omega: np.ndarray
    method: str = "dense"
    residual_nu: float = float("nan")
    residual_omega: float = float("nan")

    @property
    def sum_nu(self) -> float:
        return float(np.sum(self.nu))

    @property
    def sum_omega(self) -> float:
        return float(np.sum(self.omega))

    @property
    def v(self) -> np.ndarray:
        return self.nu / self.sum_nu

    @property
    def w(self) -> np.ndarray:
        return self.omega / self.sum_omega


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    xi: np.ndarray  # shape (n, N+1); row i is agent i's trade schedule

    @property
    def n(self) -> int:
        return self.xi.shape[0]


@dataclass(frozen=True)
class ClosedFormContext:
    """Scalars of the tridiagonal reduction for one (n, theta, rho, T, N)."""

    N: int
    n: int
    alpha: float
    kappa: float
    R: float
    m_plus: float
    m_minus: float
    c_plus: float
    c_minus: float
    d_plus: float
    d_minus: float

    @property
    def kappa_hat(self) -> float:
        return float(self.n - 1)

    @property
    def trace(self) -> float:
        a, k, n = self.alpha, self.kappa, self.n
        return 1.0 + a * a * (k - n) + k

    @property
    def product(self) -> float:
        a, k, n = self.alpha, self.kappa, self.n
        return a * a * k * (k + 1 - n)

    def minors(self) -> np.ndarray:
        """delta_0..delta_{N+1} by the three-term recursion (overflows for large N)."""
        a, k, n, N = self.alpha, self.kappa, self.n, self.N
        delta = np.empty(N + 2)
        delta[0] = 1.0
        delta[1] = 1.0 - n * a * a + k
        for j in range(2, N + 1):
            delta[j] = self.trace * delta[j - 1] - self.product * delta[j - 2]
        delta[N + 1] = (1.0 - a * a + k) * delta[N] - self.product * delta[N - 1]
        return delta

    def phi(self) -> np.ndarray:
        """phi_0..phi_{N+2}; entries 0 and 1 are unused and set to NaN."""
        a, k, N = self.alpha, self.kappa, self.N
        phi = np.full(N + 3, np.nan)
        phi[N + 2] = 1.0
        phi[N + 1] = 1.0 - a * a + k
        for j in range(N, 1, -1):
            phi[j] = self.trace * phi[j + 1] - self.product * phi[j + 2]
        return phi


def _ipow(base: float, k) -> np.ndarray:
    """base**k for non-negative integer k, with the sign handled by parity."""
    k = np.asarray(k, dtype=np.int64)
    mag = np.power(abs(base), k.astype(float))
    if base < 0:
        mag = np.where(k % 2 == 1, -mag, mag)
    return mag


def closed_form_context(p: ModelParams, grid: GridSpec) -> ClosedFormContext:
    if not grid.equidistant:
        raise ParameterError("the closed form needs an equidistant grid")
    ds = derived_scalars(p, grid)
    a, k, n = ds.alpha, ds.kappa, p.n
    a2 = a * a
    S = 1.0 + a2 * (k - n) + k
    P = a2 * k * (k + 1 - n)
    rad = a2 * a2 * (k - n) ** 2 - 2.0 * a2 * (k * (k + 1) + n * (1 - k)) + (k + 1) ** 2
    if rad < 0:
        raise NumericalError(f"characteristic roots not real (radicand {rad:.3e})")
    R = math.sqrt(rad)
    m_plus = 0.5 * (S + R)
    m_minus = P / m_plus  # avoids cancellation in (S - R)/2
    # c_+ and d_- vanish as alpha -> 1; use the rationalised forms
    X = 1.0 - a2 * (k + n) + k
    Y = 1.0 + (1.0 - a2) * k - a2 * (2 - n)
    c_minus = (R - X) / (2.0 * R)
    c_plus = 2.0 * n * a2 * k * (1.0 - a2) / (R * (R - X))
    d_plus = (R + Y) / (2.0 * R)
    d_minus = 2.0 * a2 * (k + 1 - n) * (1.0 - a2) / (R * (R + Y))
    return ClosedFormContext(
        N=grid.N, n=n, alpha=a, kappa=k, R=R, m_plus=m_plus, m_minus=m_minus,
        c_plus=c_plus, c_minus=c_minus, d_plus=d_plus, d_minus=d_minus,
    )


# ---------------------------------------------------------------------------
# dense route
# ---------------------------------------------------------------------------

def relative_residual(A: np.ndarray, x: np.ndarray, b: np.ndarray) -> float:
    r = A @ x - b
    scale = np.linalg.norm(A, np.inf) * np.linalg.norm(x, np.inf) + np.linalg.norm(b, np.inf)
    return float(np.linalg.norm(r, np.inf) / scale) if scale > 0 else 0.0


def solve_dense(A: np.ndarray, rhs: Optional[np.ndarray] = None) -> tuple[np.ndarray, float]:
    """LU (partial pivoting) solve of ``A x = rhs``; rhs defaults to ones.

    Returns the solution and its relative residual.
    """
    A = np.asarray(A, dtype=float)
    b = np.ones(A.shape[0]) if rhs is None else np.asarray(rhs, dtype=float)
    try:
        with warnings.catch_warnings():
            # singularity is reported below as NumericalError
            warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
            lu, piv = scipy.linalg.lu_factor(A, check_finite=True)
    except (ValueError, np.linalg.LinAlgError) as exc:
        raise NumericalError(f"LU factorisation failed: {exc}") from exc
    diag = np.abs(np.diag(lu))
    if diag.min() <= np.finfo(float).eps * max(diag.max(), 1.0) * A.shape[0]:
        raise NumericalError("matrix is singular to working precision")
    x = scipy.linalg.lu_solve((lu, piv), b)
    res = relative_residual(A, x, b)
    if not np.all(np.isfinite(x)) or res > RESIDUAL_TOL:
        raise NumericalError(f"dense solve residual {res:.3e} exceeds {RESIDUAL_TOL}")
    return x, res


def _solve_pair(gamma: np.ndarray, K: KernelMatrices, n: int, method: str) -> EquilibriumVectors:
    nu, rn = solve_dense(gamma + (n - 1) * K.gamma_tilde)
    omega, ro = solve_dense(gamma - K.gamma_tilde)
    return EquilibriumVectors(nu=nu, omega=omega, method=method, residual_nu=rn, residual_omega=ro)


def dense_equilibrium(p: ModelParams, grid: GridSpec) -> EquilibriumVectors:
    K = build_kernel(p, grid)
    return _solve_pair(K.gamma_theta, K, p.n, "dense")


def solve_halfgrid(p: ModelParams, grid: GridSpec, mode: str) -> EquilibriumVectors:
    """Equilibrium with instantaneous costs on one half of the grid (dense only)."""
    K = build_kernel(p, grid)
    return _solve_pair(build_halfgrid(p, grid, mode), K, p.n, f"dense-halfgrid-{mode}")


# ---------------------------------------------------------------------------
# closed-form route
# ---------------------------------------------------------------------------

def omega_closed_form(p: ModelParams, grid: GridSpec) -> np.ndarray:
    ds = derived_scalars(p, grid)
    a, kt, N = ds.alpha, ds.kappa_tilde, grid.N
    denom = kt * (kt - a * (kt - 1.0))
    if denom == 0.0:
        raise NumericalError("kappa_tilde - alpha (kappa_tilde - 1) vanishes")
    q = a * (kt - 1.0) / kt
    i = np.arange(1, N + 2)
    return ((1.0 - a) * kt + a * _ipow(q, N + 1 - i)) / denom


def _nu_special(p: ModelParams, grid: GridSpec) -> np.ndarray:
    # kappa = n - 1, i.e. theta = (n-1)/4
    n, N = p.n, grid.N
    a = derived_scalars(p, grid).alpha
    ratio = a * (n - 1) / (n - a * a)
    nu = np.empty(N + 1)
    nu[0] = 1.0 + (n - a * a) / (n * (n - 1)) * ratio ** (N + 1)
    i = np.arange(2, N + 2)
    nu[1:] = 1.0 - a + _ipow(ratio, N + 2 - i) * (1.0 - a * a) / (n - 1)
    return nu / (n + a)


def _nu_general(ctx: ClosedFormContext) -> np.ndarray:
    N, n, al = ctx.N, ctx.n, ctx.alpha
    k, kh = ctx.kappa, ctx.kappa_hat
    mp, mm = ctx.m_plus, ctx.m_minus
    cp, cm, dp, dm = ctx.c_plus, ctx.c_minus, ctx.d_plus, ctx.d_minus
    A = al * (k - kh)      # alpha (kappa - kappa_hat)
    Bk = al * k            # alpha kappa
    K = k + 1.0 - al * (k - n)
    C1 = al * (1.0 + al) / K
    psi1 = 1.0 - al * al + k
    r = mm / mp

    # m_+ - alpha kappa and m_- - alpha (kappa - kappa_hat) are O(1/N); both
    # come from (m_+ - z)(m_- - z) = -z (1 - alpha) K for z in {A, Bk}
    mm_minus_B = mm - Bk
    mp_minus_B = -Bk * (1.0 - al) * K / mm_minus_B
    mp_minus_A = mp - A
    mm_minus_A = -A * (1.0 - al) * K / mp_minus_A
    # psi1 - m_+ via the characteristic polynomial evaluated at psi1
    psi1_minus_mm = psi1 - mm
    psi1_minus_mp = -al * al * (k + 1 - n) * (1.0 - al * al) / psi1_minus_mm

    # delta_{N+1} / m_+^N
    det_scaled = cp * psi1_minus_mm + cm * float(_ipow(r, N)) * psi1_minus_mp
    if not math.isfinite(det_scaled) or abs(det_scaled) < 1e-300:
        raise NumericalError(
            f"normalised determinant underflow (n={n}, kappa={k}, alpha={al}, N={N})"
        )
    L = (1.0 - al) / det_scaled          # [m_+]^N
    rN = float(_ipow(r, N))
    bN = float(_ipow(Bk / mp, N))        # alpha^N [kappa]^N / L
    aN = float(_ipow(A / mp, N))         # alpha^N [kappa - kappa_hat]^N / L

    nu = np.empty(N + 1)
    nu[0] = L * (
        dp * (mp - al * Bk) / mp_minus_B
        + dm * (mm - al * Bk) / mm_minus_B * rN
        + C1 * bN
    )
    nu[N] = L * (
        cp * (mp - al * A) / mp_minus_A
        + cm * (mm - al * A) / mm_minus_A * rN
        + n * C1 * aN
    )
    if N >= 2:
        i = np.arange(2, N + 1)
        const = (1.0 - al) * (
            cp * dp * (A / mp_minus_A + mp / mp_minus_B)
            + cm * dm * (A / mm_minus_A + mm / mm_minus_B) * rN
        )
        a_pow = _ipow(A / mp, i - 1)
        boundary_end = n * C1 * (dp * a_pow + dm * _ipow(r, N - i + 1) * a_pow)
        b_pow = _ipow(Bk / mp, N - i + 1)
        boundary_start = C1 * (cp * b_pow + cm * b_pow * _ipow(r, i - 1))
        nu[1:N] = L * (const + boundary_end + boundary_start)
    return nu


def nu_closed_form(p: ModelParams, grid: GridSpec) -> np.ndarray:
    """nu = (Gamma^theta + (n-1) Gamma~)^{-1} 1 on an equidistant grid in O(N)."""
    if not grid.equidistant:
        raise ParameterError("the closed form needs an equidistant grid")
    ds = derived_scalars(p, grid)
    gap = abs(ds.kappa - ds.kappa_hat)
    scale = max(1.0, ds.kappa)
    if gap <= SPECIAL_BRANCH_TOL * scale:
        return _nu_special(p, grid)
    if gap < DENSE_FALLBACK_TOL * scale:
        log.info("kappa within %.1e of n-1; falling back to dense solve", gap)
        K = build_kernel(p, grid)
        return solve_dense(K.gamma_theta + (p.n - 1) * K.gamma_tilde)[0]
    nu = _nu_general(closed_form_context(p, grid))
    if not np.all(np.isfinite(nu)):
        raise NumericalError(f"closed form produced non-finite values (n={p.n}, theta={p.theta}, N={grid.N})")
    return nu


def nu_from_minors(p: ModelParams, grid: GridSpec) -> np.ndarray:
    """nu from the explicit Usmani-inverse sums with raw minors delta_k, phi_k.

    O(N^2) and overflow-prone beyond a few hundred steps; used as a check on
    the ratio-based closed form for small N.
    """
    ctx = closed_form_context(p, grid)
    N, n, al, k = ctx.N, ctx.n, ctx.alpha, ctx.kappa
    delta, phi = ctx.minors(), ctx.phi()
    up, lo = al * k, al * (k + 1 - n)
    pref = (1.0 - al) / delta[N + 1]
    nu = np.empty(N + 1)
    nu[0] = phi[2] + (1 - al) * sum(up ** (j - 1) * phi[j + 1] for j in range(2, N + 1)) + up**N
    nu[N] = lo**N + (1 - al) * sum(lo ** (N + 1 - j) * delta[j - 1] for j in range(2, N + 1)) + delta[N]
    for i in range(2, N + 1):
        s = lo ** (i - 1) * phi[i + 1]
        s += (1 - al) * sum(lo ** (i - j) * delta[j - 1] * phi[i + 1] for j in range(2, i))
        s += (1 - al) * sum(up ** (j - i) * delta[i - 1] * phi[j + 1] for j in range(i, N + 1))
        s += up ** (N + 1 - i) * delta[i - 1]
        nu[i - 1] = s
    return pref * nu


def closed_form_equilibrium(p: ModelParams, grid: GridSpec) -> EquilibriumVectors:
    return EquilibriumVectors(nu=nu_closed_form(p, grid), omega=omega_closed_form(p, grid), method="closed")


def solve_equilibrium(p: ModelParams, grid: GridSpec, method: str = "auto") -> EquilibriumVectors:
    """Solve for (nu, omega); ``auto`` uses the closed form on equidistant grids."""
    if method == "auto":
        method = "closed" if grid.equidistant else "dense"
    if method == "closed":
        return closed_form_equilibrium(p, grid)
    if method == "dense":
        return dense_equilibrium(p, grid)
    raise ParameterError(f"unknown method {method!r}")


def assemble_profile(p: ModelParams, vectors: EquilibriumVectors) -> StrategyProfile:
    xbar = p.xbar
    x = p.x
    xi = xbar * vectors.v[None, :] + (x - xbar)[:, None] * vectors.w[None, :]
    return StrategyProfile(xi=xi)
