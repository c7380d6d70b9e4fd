"""High-frequency behaviour of the discrete equilibrium.

Discrete inventories V^(N), W^(N) are compared with the continuous limits f, g
for theta > 0, and with the even/odd cluster points for theta = 0.
Every sweep returns results sorted by (N, t).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .continuous import continuous_cost, eval_f, eval_g
from .costs import cost_of_profile, cost_split, quadform_terms
from .matrices import build_kernel, normalize_mode
from .model import GridSpec, ModelParams, ParameterError, grid_index
from .solver import EquilibriumVectors, assemble_profile, solve_equilibrium, solve_halfgrid

DENSE_N_CAP = 2000
CLOSED_N_CAP = 20000


@dataclass(frozen=True, eq=False)
class InventoryPath:
    t: np.ndarray
    V: np.ndarray
    W: np.ndarray
    X: np.ndarray  # shape (n, len(t))
    n_t: np.ndarray
    N: int
    theta: float


def _tail_sums(u: np.ndarray) -> np.ndarray:
    # tail[k] = sum_{j >= k} u_j ; tail[N+1] = 0
    tail = np.zeros(u.size + 1)
    tail[:-1] = np.cumsum(u[::-1])[::-1]
    return tail


def path_from_vectors(p: ModelParams, grid: GridSpec, vectors: EquilibriumVectors, t_list) -> InventoryPath:
    t = np.atleast_1d(np.asarray(t_list, dtype=float))
    idx = np.array([grid_index(float(s), grid)[0] for s in t], dtype=int)
    # V_t = 1 - sum_{k <= n_t} v_k, evaluated as the tail sum beyond n_t
    V = np.where(idx == 0, 1.0, _tail_sums(vectors.v)[idx])
    W = np.where(idx == 0, 1.0, _tail_sums(vectors.w)[idx])
    xbar = p.xbar
    X = xbar * V[None, :] + (p.x - xbar)[:, None] * W[None, :]
    return InventoryPath(t=t, V=V, W=W, X=X, n_t=idx, N=grid.N, theta=p.theta)


def inventory_path(p: ModelParams, grid: GridSpec, t_list, method: str = "auto") -> InventoryPath:
    return path_from_vectors(p, grid, solve_equilibrium(p, grid, method), t_list)


def terminal_W_limit(p: ModelParams) -> float:
    return 1.0 / ((2.0 * p.theta + 0.5) * (p.rho * p.T + 1.0))


# ---------------------------------------------------------------------------
# theta > 0: rates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RateDiagnostic:
    t: float
    target: str
    errors: tuple[tuple[int, float], ...]
    scaled: tuple[tuple[int, float], ...]
    sup_scaled: float
    bounded: bool

    @property
    def verdict(self) -> str:
        return "bounded" if self.bounded else "unbounded"


def bounded_verdict(values: Sequence[float], factor: float = 1.1) -> bool:
    """Last value at most ``factor`` times the max over the first half."""
    vals = list(values)
    if len(vals) < 2:
        return True
    head = max(vals[: max(1, len(vals) // 2)])
    return vals[-1] <= factor * head


def rate_diagnostic(p: ModelParams, t: float, N_list: Iterable[int], target: str,
                    method: str = "closed") -> RateDiagnostic:
    """N |V_t - g(t)| (target 'g') or N |W_t - f(t)| (target 'f') over N_list."""
    if p.theta <= 0:
        raise ParameterError("rates are undefined for theta = 0; use oscillation_scan")
    if target not in ("f", "g"):
        raise ParameterError(f"target must be 'f' or 'g', got {target!r}")
    limit = eval_g(t, p) if target == "g" else eval_f(t, p)
    errors, scaled = [], []
    for N in sorted(set(int(N) for N in N_list)):
        path = inventory_path(p, GridSpec.uniform(N, p.T), [t], method)
        val = path.V[0] if target == "g" else path.W[0]
        err = abs(val - limit)
        errors.append((N, float(err)))
        scaled.append((N, float(N * err)))
    s = [v for _, v in scaled]
    return RateDiagnostic(
        t=float(t), target=target, errors=tuple(errors), scaled=tuple(scaled),
        sup_scaled=max(s), bounded=bounded_verdict(s),
    )


# ---------------------------------------------------------------------------
# theta = 0: cluster points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClusterPointSet:
    t: float
    beta_plus: float
    beta_minus: float
    gamma_plus: float
    gamma_minus: float
    phi_plus: float
    phi_minus: float
    psi_plus: float
    psi_minus: float
    d1: float
    d2: float
    a_plus: float
    a_minus: float
    b: float
    c: float

    def V_points(self, N: int) -> tuple[float, float]:
        return (self.beta_plus, self.beta_minus) if N % 2 == 0 else (self.gamma_plus, self.gamma_minus)

    def W_points(self, N: int) -> tuple[float, float]:
        return (self.phi_plus, self.phi_minus) if N % 2 == 0 else (self.psi_plus, self.psi_minus)


def oscillation_constants(p: ModelParams, t: float) -> dict[str, float]:
    """The denominators d1, d2 and the time-dependent a_+-, b, c."""
    n, rho, T = p.n, p.rho, p.T
    r = (n + 1) / (n - 1) * rho
    e1 = math.exp(r * T)
    e2 = math.exp(2 * r * T)
    d1 = n * e2 * ((n + 1) * rho * T + n + 3) + (n - 1) ** 2 * e1 + (n + 1) * rho * T + 3 * n + 1
    d2 = n * e2 * ((n + 1) * rho * T + n + 3) + (1 - n * n) * e1 - (n + 1) * rho * T - 3 * n - 1
    a = (n + 1) * math.exp(r * (T - t)) + n * (n + 1) * math.exp(r * (2 * T - t))
    b = e2 * (n * (n + 1) * rho * (T - t) + 2 * n) - 2 * n * math.exp(r * (T + t))
    c = (n + 1) * rho * (T - t) + n * (n - 1) * e1 + 2 * n * math.exp(r * t) + n + 1
    return dict(d1=d1, d2=d2, a_plus=a, a_minus=-a, b=b, c=c)


def cluster_points(p: ModelParams, t: float) -> ClusterPointSet:
    if not 0.0 <= t <= p.T:
        raise ParameterError(f"t must lie in [0, T={p.T}]")
    k = oscillation_constants(p, t)
    rho, T = p.rho, p.T
    base = 1.0 + rho * (T - t)
    ex = math.exp(-rho * (T - t))
    den_even = 1.0 + rho * T + math.exp(-rho * T)
    den_odd = 1.0 + rho * T - math.exp(-rho * T)
    return ClusterPointSet(
        t=float(t),
        beta_plus=(k["a_plus"] + k["b"] + k["c"]) / k["d1"],
        beta_minus=(k["a_minus"] + k["b"] + k["c"]) / k["d1"],
        gamma_plus=(k["a_plus"] + k["b"] - k["c"]) / k["d2"],
        gamma_minus=(k["a_minus"] + k["b"] - k["c"]) / k["d2"],
        phi_plus=(base + ex) / den_even,
        phi_minus=(base - ex) / den_even,
        psi_plus=(base + ex) / den_odd,
        psi_minus=(base - ex) / den_odd,
        **k,
    )


@dataclass(frozen=True)
class OscillationRecord:
    N: int
    t: float
    n_t: int
    V: float
    W: float
    V_residual: float  # distance to the nearest V cluster point of N's parity
    W_residual: float

    @property
    def label(self) -> str:
        return f"{'even' if self.N % 2 == 0 else 'odd'}N-{'even' if self.n_t % 2 == 0 else 'odd'}nt"


@dataclass(frozen=True)
class OscillationScan:
    t: float
    records: tuple[OscillationRecord, ...]
    clusters: ClusterPointSet
    # per class label: (largest N, V at that N, W at that N, V residual, W residual)
    classes: dict = field(default_factory=dict)


def oscillation_scan(p: ModelParams, t: float, N_range: Iterable[int], method: str = "closed") -> OscillationScan:
    """Record V_t, W_t for each N and group by (N parity, n_t parity)."""
    if p.theta != 0:
        raise ParameterError("oscillation_scan requires theta = 0")
    Ns = sorted(set(int(N) for N in N_range))
    if not Ns:
        raise ParameterError("N_range is empty")
    cp = cluster_points(p, t)
    recs = []
    for N in Ns:
        path = inventory_path(p, GridSpec.uniform(N, p.T), [t], method)
        V, W = float(path.V[0]), float(path.W[0])
        vp, wp = cp.V_points(N), cp.W_points(N)
        if path.n_t[0] == 0:
            vres = wres = 0.0  # V_0 = W_0 = 1, no oscillation at t = 0
        else:
            vres = min(abs(V - c) for c in vp)
            wres = min(abs(W - c) for c in wp)
        recs.append(OscillationRecord(N, float(t), int(path.n_t[0]), V, W, vres, wres))
    classes = {}
    for r in recs:  # sorted by N, so the last write per label is the largest N
        classes[r.label] = (r.N, r.V, r.W, r.V_residual, r.W_residual)
    return OscillationScan(t=float(t), records=tuple(recs), clusters=cp, classes=dict(sorted(classes.items())))


@dataclass(frozen=True)
class ThetaZeroCostLimits:
    even_limit: float
    odd_limit: float


def theta_zero_cost_limits(p: ModelParams, i: int) -> ThetaZeroCostLimits:
    n, rho, T = p.n, p.rho, p.T
    xbar = p.xbar
    dev = p.inventories[i] - xbar
    k = oscillation_constants(p, 0.0)
    e2 = math.exp(2 * rho * (n + 1) / (n - 1) * T)
    even = n * xbar**2 * ((n + 1) * n * e2 + n + 1) / k["d1"] + n * xbar * dev / (
        math.exp(-rho * T) + rho * T + 1
    )
    odd = n * xbar**2 * ((n + 1) * n * e2 - n - 1) / k["d2"] + n * xbar * dev / (
        rho * T + 1 - math.exp(-rho * T)
    )
    return ThetaZeroCostLimits(even_limit=even, odd_limit=odd)


# ---------------------------------------------------------------------------
# quadratic-form limits
# ---------------------------------------------------------------------------

def quadform_limits(p: ModelParams) -> dict[str, tuple[float, float, float]]:
    """Limits of (nu'G~nu, omega'(khat G~ - G~')nu, omega'G~omega).

    Returns {'all': ...} for theta > 0 and {'even': ..., 'odd': ...} for theta = 0.
    """
    n, rT = p.n, p.rho * p.T
    r = (n + 1) / (n - 1) * rT
    if p.theta > 0:
        q_nu = (n - 1) / (2 * n**2 * (n + 1) ** 3) * (
            -math.exp(-2 * r) - 4 * n * math.exp(-r) + 2 * n**2 * (n + 1) / (n - 1) * rT + n**2 * (n + 7) / (n - 1)
        )
        q_cross = (-(n - 1) * (2 * n - 1) * math.exp(-r) + n * (n + 4) * (n - 1) + n * (n + 1) * (n - 2) * rT) / (
            n * (n + 1) ** 2
        )
        return {"all": (q_nu, q_cross, (2 * rT + 1) / 2)}
    e1, e2 = math.exp(r), math.exp(2 * r)
    e3 = math.exp((n + 3) / (n - 1) * rT)
    em = math.exp(-rT)
    Dp = (n * e2 + 1) * (n + 1) ** 2
    Dm = (n * e2 - 1) * (n + 1) ** 2
    Sp, Sm = Dp / (n + 1), Dm / (n + 1)
    even = (
        (n * e2 * ((n + 1) * rT + n + 3) + (n - 1) ** 2 * e1 + (n + 1) * rT + 3 * n + 1) / ((n + 1) * Dp),
        (n**2 * e2 - n * (n + 1) * e3 + (2 * n**2 - 3 * n - 1) * e1 - (n + 1) * em + 3 * n - 2) / Sp
        + rT * (n - 2) * (n * e2 + 1) / Sp
        + 2 * n * (n - 2) * (e1 - 1) ** 2 / Dp,
        em + rT + 1,
    )
    odd = (
        (n * e2 * ((n + 1) * rT + n + 3) - (n**2 - 1) * e1 - (n + 1) * rT - (3 * n + 1)) / ((n + 1) * Dm),
        (n**2 * e2 + n * (n + 1) * e3 - (2 * n**2 - 3 * n + 1) * e1 - (n + 1) * em - 3 * n + 2) / Sm
        + rT * (n - 2) * (n * e2 - 1) / Sm
        + 2 * n * (n - 2) * (e2 - 1) / Dm,
        -em + rT + 1,
    )
    return {"even": even, "odd": odd}


@dataclass(frozen=True)
class QuadformRow:
    N: int
    values: tuple[float, float, float]
    limits: tuple[float, float, float]

    @property
    def rel_errors(self) -> tuple[float, ...]:
        return tuple(abs(v - l) / max(abs(l), 1e-300) for v, l in zip(self.values, self.limits))


def quadform_limit_check(p: ModelParams, N_list: Iterable[int], method: str = "closed") -> list[QuadformRow]:
    lims = quadform_limits(p)
    rows = []
    for N in sorted(set(int(N) for N in N_list)):
        grid = GridSpec.uniform(N, p.T)
        vec = solve_equilibrium(p, grid, method)
        vals = quadform_terms(p, vec, build_kernel(p, grid))
        lim = lims["all"] if "all" in lims else lims["even" if N % 2 == 0 else "odd"]
        rows.append(QuadformRow(N=N, values=vals, limits=lim))
    return rows


# ---------------------------------------------------------------------------
# costs along N
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CostRow:
    N: int
    agent: int
    total: float
    impact: float
    inst_front: float
    inst_back: float


def cost_sweep(p: ModelParams, N_list: Iterable[int], c: float = 0.5, method: str = "auto") -> list[CostRow]:
    rows = []
    for N in sorted(set(int(N) for N in N_list)):
        grid = GridSpec.uniform(N, p.T)
        K = build_kernel(p, grid)
        prof = assemble_profile(p, solve_equilibrium(p, grid, method))
        for i in range(p.n):
            b = cost_split(p, i, prof, K, c)
            rows.append(CostRow(N, i, b.total, b.impact, b.inst_front, b.inst_back))
    return rows


# ---------------------------------------------------------------------------
# half-grid instantaneous costs
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HalfGridRow:
    N: int
    sup_X_error: float      # sup over mesh of max_i |X^(N),i - X*_i|
    sup_V_first_half: float  # sup over [0, T/2] of |V - g|
    sup_V_second_half: float
    sup_W_first_half: float
    sup_W_second_half: float


def interior_mesh(T: float, points: int) -> np.ndarray:
    """Equispaced points j T / (points + 1), j = 1..points; excludes 0 and T."""
    return np.arange(1, points + 1) * (T / (points + 1))


def halfgrid_convergence(p: ModelParams, N_list: Iterable[int], mode: str, mesh: int = 101) -> list[HalfGridRow]:
    """Sup-distances of half-grid equilibrium inventories to f, g and to x_i f or x_i g.

    The agent reference is x_i f(t) in second-half mode and x_i g(t) in
    first-half mode, which are the continuous equilibria for zero net supply
    and for symmetric inventories respectively.
    """
    if p.theta <= 0:
        raise ParameterError("halfgrid_convergence requires theta > 0")
    mode = normalize_mode(mode)
    t = interior_mesh(p.T, mesh)
    f, g = eval_f(t, p), eval_g(t, p)
    ref = f if mode == "second" else g
    first = t <= p.T / 2
    second = t >= p.T / 2
    rows = []
    for N in sorted(set(int(N) for N in N_list)):
        grid = GridSpec.uniform(N, p.T)
        path = path_from_vectors(p, grid, solve_halfgrid(p, grid, mode), t)
        x_err = np.abs(path.X - p.x[:, None] * ref[None, :]).max()
        dv = np.abs(path.V - g)
        dw = np.abs(path.W - f)
        rows.append(HalfGridRow(
            N=N, sup_X_error=float(x_err),
            sup_V_first_half=float(dv[first].max()), sup_V_second_half=float(dv[second].max()),
            sup_W_first_half=float(dw[first].max()), sup_W_second_half=float(dw[second].max()),
        ))
    return rows
