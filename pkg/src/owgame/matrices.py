"""Kernel matrices of the exponential-decay impact model.

All matrices are dense float64 arrays of shape (N+1, N+1), indexed by
trading date.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.signal

from .model import GridSpec, ModelParams, NumericalError, ParameterError

MAX_N = 20000


@dataclass(frozen=True, eq=False)
class KernelMatrices:
    gamma_theta: np.ndarray
    gamma_tilde: np.ndarray
    gamma_zero: np.ndarray


@dataclass(frozen=True, eq=False)
class HalfGridMatrices:
    H_theta: np.ndarray  # cost on the second half of the dates
    J_theta: np.ndarray  # cost on the first half of the dates
    split_index: int


def _check_grid(p: ModelParams, grid: GridSpec, cap: int) -> None:
    if grid.N > cap:
        raise NumericalError(f"N={grid.N} exceeds the matrix size cap {cap}")
    if not math.isclose(grid.T, p.T, rel_tol=1e-12, abs_tol=0.0):
        raise ParameterError(f"grid horizon {grid.T} does not match T={p.T}")


def build_kernel(p: ModelParams, grid: GridSpec, cap: int = MAX_N) -> KernelMatrices:
    _check_grid(p, grid, cap)
    t = grid.times
    if grid.equidistant:
        # Toeplitz: entry (i, j) is alpha^|i-j|
        gamma_zero = scipy.linalg.toeplitz(np.exp(-p.rho * (t - t[0])))
    else:
        gamma_zero = np.exp(-p.rho * np.abs(t[:, None] - t[None, :]))
    np.fill_diagonal(gamma_zero, 1.0)
    gamma_tilde = np.tril(gamma_zero, k=-1)
    np.fill_diagonal(gamma_tilde, 0.5)
    gamma_theta = gamma_zero + 2.0 * p.theta * np.eye(grid.N + 1)
    for a in (gamma_zero, gamma_tilde, gamma_theta):
        a.setflags(write=False)
    return KernelMatrices(gamma_theta=gamma_theta, gamma_tilde=gamma_tilde, gamma_zero=gamma_zero)


class KernelOperator:
    """Matrix-free products with the kernel matrices on an equidistant grid.

    The exponential kernel makes ``Gamma~ x`` a first-order recursion,
    s_k = alpha (s_{k-1} + x_{k-1}), so each product costs O(N). Inputs may be
    batched; the last axis indexes trading dates.
    """

    def __init__(self, p: ModelParams, grid: GridSpec):
        if not grid.equidistant:
            raise ParameterError("KernelOperator needs an equidistant grid")
        _check_grid(p, grid, 10 * MAX_N)
        self.alpha = math.exp(-p.rho * grid.dt)
        self.theta = p.theta
        self.size = grid.N + 1

    def _past(self, x: np.ndarray) -> np.ndarray:
        return scipy.signal.lfilter([0.0, self.alpha], [1.0, -self.alpha], x, axis=-1)

    def apply_tilde(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 0.5 * x + self._past(x)

    def apply_tilde_T(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return 0.5 * x + self._past(x[..., ::-1])[..., ::-1]

    def apply_zero(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return x + self._past(x) + self._past(x[..., ::-1])[..., ::-1]

    def apply_theta(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.apply_zero(x) + 2.0 * self.theta * x


class DenseKernelOperator:
    """Same interface as :class:`KernelOperator`, backed by dense matrices."""

    def __init__(self, K: KernelMatrices):
        self.K = K
        self.size = K.gamma_theta.shape[0]

    def apply_tilde(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.K.gamma_tilde.T

    def apply_tilde_T(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.K.gamma_tilde

    def apply_zero(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.K.gamma_zero

    def apply_theta(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float) @ self.K.gamma_theta


def kernel_operator(p: ModelParams, grid: GridSpec):
    """Matrix-free operator on equidistant grids, dense matrices otherwise."""
    if grid.equidistant:
        return KernelOperator(p, grid)
    return DenseKernelOperator(build_kernel(p, grid))


def inverse_gamma_zero(grid: GridSpec, p: ModelParams) -> np.ndarray:
    """Tridiagonal inverse of the Kac-Murdock-Szego matrix exp(-rho|t_i - t_j|)."""
    if not grid.equidistant:
        raise ParameterError("the tridiagonal inverse needs an equidistant grid")
    alpha = math.exp(-p.rho * grid.dt)
    size = grid.N + 1
    main = np.full(size, 1.0 + alpha**2)
    main[0] = main[-1] = 1.0
    inv = np.diag(main) - alpha * (np.eye(size, k=1) + np.eye(size, k=-1))
    return inv / (1.0 - alpha**2)


def positivity_check(A: np.ndarray) -> bool:
    """True iff x^T A x > 0 for all x != 0 (Cholesky of the symmetric part)."""
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"square matrix required, got shape {A.shape}")
    try:
        np.linalg.cholesky(0.5 * (A + A.T))
    except np.linalg.LinAlgError:
        return False
    return True


def split_index(N: int) -> int:
    # 1-based: positions split+1 .. N+1 form the second half
    return -(-(N + 1) // 2)


def halfgrid_matrices(p: ModelParams, grid: GridSpec) -> HalfGridMatrices:
    if grid.N < 2:
        raise ParameterError(f"half-grid costs need N >= 2, got N={grid.N}")
    K = build_kernel(p, grid)
    s = split_index(grid.N)
    second = np.zeros(grid.N + 1)
    second[s:] = 1.0
    H = K.gamma_zero + 2.0 * p.theta * np.diag(second)
    J = K.gamma_zero + 2.0 * p.theta * np.diag(1.0 - second)
    return HalfGridMatrices(H_theta=H, J_theta=J, split_index=s)


def normalize_mode(mode: str) -> str:
    m = mode.lower().replace("_", "-")
    if m in ("first", "first-half"):
        return "first"
    if m in ("second", "second-half"):
        return "second"
    raise ParameterError(f"mode must be 'first' or 'second', got {mode!r}")


def build_halfgrid(p: ModelParams, grid: GridSpec, mode: str) -> np.ndarray:
    """J^theta for ``mode='first'``, H^theta for ``mode='second'``."""
    hg = halfgrid_matrices(p, grid)
    return hg.J_theta if normalize_mode(mode) == "first" else hg.H_theta


def write_matrix_csv(path, A: np.ndarray) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in np.atleast_2d(A):
            writer.writerow([format(float(v), ".17g") for v in row])
