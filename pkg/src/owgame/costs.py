"""Expected execution costs of deterministic strategy profiles.

The unaffected price is taken to be zero, so the expected cost of agent i is
the quadratic form 1/2 xi_i' Gamma^theta xi_i + xi_i' Gamma~ sum_{j != i} xi_j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .matrices import KernelMatrices
from .model import ModelParams, ParameterError
from .solver import EquilibriumVectors, StrategyProfile


@dataclass(frozen=True)
class CostBreakdown:
    total: float
    impact: float
    inst_front: float
    inst_back: float
    split_c: float
    split_index: int


def _others(xi: np.ndarray, i: int) -> np.ndarray:
    return xi.sum(axis=0) - xi[i]


def cost_of_trades(eta: np.ndarray, others: np.ndarray, K: KernelMatrices, gamma=None) -> float:
    """Cost of trading ``eta`` against the aggregate opponent schedule ``others``."""
    G = K.gamma_theta if gamma is None else gamma
    return float(0.5 * eta @ G @ eta + eta @ K.gamma_tilde @ others)


def cost_of_profile(i: int, profile: StrategyProfile, K: KernelMatrices, gamma=None) -> float:
    xi = profile.xi
    if xi.shape[1] != K.gamma_theta.shape[0]:
        raise ValueError(f"profile has {xi.shape[1]} dates, kernel has {K.gamma_theta.shape[0]}")
    if not 0 <= i < xi.shape[0]:
        raise IndexError(f"agent index {i} out of range")
    return cost_of_trades(xi[i], _others(xi, i), K, gamma)


def quadform_terms(p: ModelParams, vectors: EquilibriumVectors, K: KernelMatrices) -> tuple[float, float, float]:
    """(nu' G~ nu, omega' (khat G~ - G~') nu, omega' G~ omega)."""
    nu, om, Gt = vectors.nu, vectors.omega, K.gamma_tilde
    kh = p.n - 1
    return (
        float(nu @ Gt @ nu),
        float(kh * (om @ Gt @ nu) - om @ Gt.T @ nu),
        float(om @ Gt @ om),
    )


def cost_equilibrium_quadform(i: int, p: ModelParams, vectors: EquilibriumVectors, K: KernelMatrices) -> float:
    """Equilibrium cost of agent i from sums and bilinear forms of nu, omega."""
    xbar = p.xbar
    dev = p.inventories[i] - xbar
    sn, so = vectors.sum_nu, vectors.sum_omega
    q_nu, q_cross, q_om = quadform_terms(p, vectors, K)
    kh = p.n - 1
    return 0.5 * (
        xbar**2 / sn
        + xbar * dev * (sn + so) / (sn * so)
        + dev**2 / so
        + kh * (xbar / sn) ** 2 * q_nu
        + xbar * dev / (sn * so) * q_cross
        - (dev / so) ** 2 * q_om
    )


def cost_split(p: ModelParams, i: int, profile: StrategyProfile, K: KernelMatrices, c: float) -> CostBreakdown:
    """Split agent i's cost into impact and front/back instantaneous parts at ceil(cN)."""
    if not 0.0 < c < 1.0:
        raise ParameterError(f"split c must lie in (0, 1), got {c}")
    xi = profile.xi[i]
    N = xi.size - 1
    m = math.ceil(c * N)
    sq = p.theta * xi**2
    front = float(sq[:m].sum())
    back = float(sq[m:].sum())
    total = cost_of_profile(i, profile, K)
    return CostBreakdown(
        total=total, impact=total - front - back, inst_front=front, inst_back=back,
        split_c=c, split_index=m,
    )
