"""Model parameters, trading grids and grid-index arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

# exp(rho*T*(n+1)/(n-1)) is evaluated directly; keep it inside float64 range
MAX_EXPONENT = 700.0
_GRID_TOL = 1e-12


class ParameterError(ValueError):
    """Raised when a model or grid invariant is violated."""


class NumericalError(ArithmeticError):
    """Raised on singular solves or overflow guards."""


@dataclass(frozen=True)
class ModelParams:
    """Economic parameters of one game instance.

    ``inventories`` holds the initial positions x_1..x_n (positive = to sell).
    The impact scale is fixed to one.
    """

    n: int
    rho: float
    T: float
    theta: float
    inventories: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "inventories", tuple(float(x) for x in self.inventories))
        validate_params(self)

    @classmethod
    def create(cls, rho: float, T: float, theta: float, inventories: Sequence[float]) -> "ModelParams":
        inv = tuple(inventories)
        return cls(n=len(inv), rho=rho, T=T, theta=theta, inventories=inv)

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.inventories, dtype=float)

    @property
    def xbar(self) -> float:
        return float(np.mean(self.inventories))

    def replace(self, **changes) -> "ModelParams":
        fields = dict(n=self.n, rho=self.rho, T=self.T, theta=self.theta, inventories=self.inventories)
        fields.update(changes)
        if "inventories" in changes and "n" not in changes:
            fields["n"] = len(tuple(changes["inventories"]))
        return ModelParams(**fields)


def validate_params(p: ModelParams) -> ModelParams:
    """Return ``p`` unchanged if every invariant holds, else raise ParameterError."""
    if isinstance(p.n, bool) or int(p.n) != p.n:
        raise ParameterError(f"n must be an integer, got {p.n!r}")
    if p.n < 2:
        raise ParameterError(f"n >= 2 required, got n={p.n}")
    for name in ("rho", "T"):
        value = getattr(p, name)
        if not (math.isfinite(value) and value > 0):
            raise ParameterError(f"{name} > 0 required, got {name}={value}")
    if not (math.isfinite(p.theta) and p.theta >= 0):
        raise ParameterError(f"theta >= 0 required, got theta={p.theta}")
    if len(p.inventories) != p.n:
        raise ParameterError(f"inventories must have length n={p.n}, got {len(p.inventories)}")
    if not all(math.isfinite(x) for x in p.inventories):
        raise ParameterError("inventories must be finite")
    if p.rho * p.T * (p.n + 1) / (p.n - 1) > MAX_EXPONENT:
        raise ParameterError(
            f"rho*T*(n+1)/(n-1) = {p.rho * p.T * (p.n + 1) / (p.n - 1):.6g} exceeds {MAX_EXPONENT}"
        )
    return p


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Trading dates t_0 < ... < t_N.

    Use :meth:`uniform` for the equidistant grid kT/N; :meth:`from_times`
    accepts any strictly increasing grid (dense solver only).
    """

    times: np.ndarray
    equidistant: bool = field(default=False)

    @classmethod
    def uniform(cls, N: int, T: float) -> "GridSpec":
        if isinstance(N, bool) or int(N) != N or N < 1:
            raise ParameterError(f"N >= 1 required, got N={N!r}")
        if not (math.isfinite(T) and T > 0):
            raise ParameterError(f"T > 0 required, got T={T}")
        N = int(N)
        times = np.arange(N + 1, dtype=float) * (T / N)
        times[-1] = T
        times.setflags(write=False)
        return cls(times=times, equidistant=True)

    @classmethod
    def from_times(cls, times: Sequence[float]) -> "GridSpec":
        t = np.array(times, dtype=float)
        if t.ndim != 1 or t.size < 1:
            raise ParameterError("times must be a non-empty 1-d sequence")
        if not np.all(np.isfinite(t)):
            raise ParameterError("times must be finite")
        if np.any(np.diff(t) <= 0):
            raise ParameterError("times must be strictly increasing")
        t.setflags(write=False)
        return cls(times=t, equidistant=False)

    @property
    def N(self) -> int:
        return self.times.size - 1

    @property
    def T(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> float:
        if not self.equidistant:
            raise ParameterError("grid is not equidistant")
        return self.T / self.N


@dataclass(frozen=True)
class DerivedScalars:
    alpha: float
    kappa: float
    kappa_tilde: float
    kappa_hat: float
    xbar: float


def grid_index(t: float, grid: GridSpec) -> tuple[int, float]:
    """Return ``(n_t, eta_t)`` with n_t = ceil(N t / T) and eta_t = n_t - N t / T.

    Values within 1e-12 (relative) of an integer are snapped to it so that
    grid-aligned times give eta_t = 0.
    """
    T = grid.T
    if not (0.0 <= t <= T):
        raise ParameterError(f"t must lie in [0, T={T}], got t={t}")
    x = grid.N * t / T
    k = round(x)
    if abs(x - k) <= _GRID_TOL * max(1.0, abs(x)):
        return int(k), 0.0
    k = math.ceil(x)
    return int(k), k - x


def derived_scalars(p: ModelParams, grid: GridSpec) -> DerivedScalars:
    return DerivedScalars(
        alpha=math.exp(-p.rho * grid.dt),
        kappa=2.0 * p.theta + (p.n - 1) / 2.0,
        kappa_tilde=2.0 * p.theta + 0.5,
        kappa_hat=float(p.n - 1),
        xbar=p.xbar,
    )
