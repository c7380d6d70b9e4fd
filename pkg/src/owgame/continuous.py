"""Continuous-time equilibrium with boundary block costs.

Inventories are X_t = f(t) (x_i - xbar) + g(t) xbar. The initial block cost
coefficient is (n-1)/2 and the terminal one is 1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, ParameterError


@dataclass(frozen=True)
class ContinuousCost:
    impact: float
    B0: float
    BT: float

    @property
    def total(self) -> float:
        return self.impact + self.B0 + self.BT


@dataclass(frozen=True)
class ContinuousLimit:
    params: ModelParams
    I_const: float
    B0: float
    BT: float
    theta0: float
    thetaT: float = 0.5

    def f(self, t, left: bool = False):
        return eval_f(t, self.params, left=left)

    def g(self, t, left: bool = False):
        return eval_g(t, self.params, left=left)

    @property
    def total(self) -> float:
        return self.I_const + self.B0 + self.BT


def _check_t(t, T):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > T * (1 + 1e-15)):
        raise ParameterError(f"t must lie in [0, T={T}]")
    return t


def _growth(p: ModelParams) -> float:
    # exponent rate rho (n+1)/(n-1)
    return p.rho * (p.n + 1) / (p.n - 1)


def eval_f(t, p: ModelParams, left: bool = False):
    """(rho(T-t)+1)/(rho T+1) on [0,T), 0 at T.

    ``left=True`` returns left limits: f(0-)=1 and f(T-)=1/(rho T+1).
    """
    t = _check_t(t, p.T)
    val = (p.rho * (p.T - t) + 1.0) / (p.rho * p.T + 1.0)
    if not left:
        val = np.where(t >= p.T, 0.0, val)
    return float(val) if val.ndim == 0 else val


def eval_g(t, p: ModelParams, left: bool = False):
    """Symmetric-case inventory fraction; g(T)=0, and g(0-)=1 when ``left``."""
    t = _check_t(t, p.T)
    n, rho, T = p.n, p.rho, p.T
    e_T = math.exp(_growth(p) * T)
    num = n * (rho * t + 1) * (n + 1) * e_T + 2 * n * np.exp(_growth(p) * t) - (n - 1)
    den = n * ((rho * T + 1) * (n + 1) + 2) * e_T - (n - 1)
    val = 1.0 - num / den
    if left:
        val = np.where(t <= 0, 1.0, val)
    return float(val) if val.ndim == 0 else val


def continuous_inventory(i: int, t, p: ModelParams):
    xbar = p.xbar
    return eval_f(t, p) * (p.inventories[i] - xbar) + eval_g(t, p) * xbar


def continuous_cost(i: int, p: ModelParams) -> ContinuousCost:
    n, rho, T = p.n, p.rho, p.T
    xbar = p.xbar
    dev = p.inventories[i] - xbar
    e1 = math.exp(_growth(p) * T)
    e2 = math.exp(2 * _growth(p) * T)
    den = n * ((rho * T + 1) * (n + 1) + 2) * e1 - (n - 1)
    impact = n / (rho * T + 1) * xbar * dev + (
        xbar**2 * n**3 * (n + 1)
        * (((rho * T + 0.5) * (n + 1) + 3) * e2 - 2 * (n - 1) / n**2 * (n * e1 + 0.25))
        / den**2
    )
    B0 = (n - 1) * (n + 1) ** 2 * (1 + n * e1) ** 2 * xbar**2 / (4 * den**2)
    BT = dev**2 / (4 * (rho * T + 1) ** 2)
    return ContinuousCost(impact=impact, B0=B0, BT=BT)


def continuous_limit(i: int, p: ModelParams) -> ContinuousLimit:
    c = continuous_cost(i, p)
    return ContinuousLimit(params=p, I_const=c.impact, B0=c.B0, BT=c.BT, theta0=(p.n - 1) / 2)
