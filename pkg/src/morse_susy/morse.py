"""Morse oscillator model: parameters, Laguerre basis and the tridiagonal
matrix elements of the Hamiltonian in that basis.

Energies are in units where hbar = m = 1, so the Hamiltonian reads
-1/2 d^2/dx^2 + V0 (exp(-2 alpha x) - 2 exp(-alpha x)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class InvalidParameterError(ValueError):
    """Oscillator parameters outside the admissible region."""


# Factors like (n + gamma + 1/2 - D) that are zero in exact arithmetic can
# come out as ~1e-16 after the square root in D; snap them.
_SNAP = 1e-12


def _snap(x: float, scale: float = 1.0) -> float:
    return 0.0 if abs(x) <= _SNAP * max(1.0, scale) else x


@dataclass(frozen=True)
class MorseParams:
    V0: float
    alpha: float
    gamma: float
    D: float
    shift: float

    @property
    def s(self) -> float:
        """gamma + 1/2 - D, the recurring lower parameter."""
        return self.gamma + 0.5 - self.D

    def with_gamma(self, gamma: float) -> "MorseParams":
        return derive_params(self.V0, self.alpha, gamma)


def derive_params(V0: float, alpha: float, gamma: float) -> MorseParams:
    """Build :class:`MorseParams` with D = sqrt(2 V0)/alpha - 1/2.

    Raises
    ------
    InvalidParameterError
        If V0 <= 0, alpha <= 0, 2 gamma <= -1, or D <= 0 (no bound states).
    """
    if not (V0 > 0 and alpha > 0):
        raise InvalidParameterError("V0 and alpha must be positive")
    if not 2.0 * gamma > -1.0:
        raise InvalidParameterError("basis parameter must satisfy 2*gamma > -1")
    D = math.sqrt(2.0 * V0) / alpha - 0.5
    if abs(D) <= _SNAP:
        D = 0.0
    if D <= 0.0:
        raise InvalidParameterError(f"D = {D:g} <= 0: no bound states")
    return MorseParams(V0=V0, alpha=alpha, gamma=gamma, D=D, shift=0.5 * alpha**2 * D**2)


def xi(params: MorseParams, x):
    """Basis variable xi = sqrt(8 V0)/alpha * exp(-alpha x)."""
    return math.sqrt(8.0 * params.V0) / params.alpha * np.exp(-params.alpha * np.asarray(x, dtype=float))


def _laguerre(n: int, k: float, t: np.ndarray) -> np.ndarray:
    prev = np.ones_like(t)
    if n == 0:
        return prev
    cur = 1.0 + k - t
    for j in range(1, n):
        prev, cur = cur, ((2 * j + 1 + k - t) * cur - (j + k) * prev) / (j + 1)
    return cur


def basis_eval(params: MorseParams, n: int, x):
    """phi_n(x) of the orthonormal Laguerre basis.

    Works on scalars or arrays; values that would underflow are returned as 0.
    """
    if n < 0:
        raise ValueError("basis index must be nonnegative")
    g = params.gamma
    t = np.atleast_1d(xi(params, x))
    log_norm = 0.5 * (math.lgamma(n + 1) + math.log(params.alpha) - math.lgamma(n + 2 * g + 1))
    with np.errstate(divide="ignore", under="ignore", over="ignore", invalid="ignore"):
        log_env = log_norm + (g + 0.5) * np.log(t) - 0.5 * t
        env = np.where(log_env > -700.0, np.exp(np.maximum(log_env, -700.0)), 0.0)
        vals = np.where(env > 0.0, env * _laguerre(n, 2 * g, t), 0.0)
    if np.ndim(x) == 0:
        return float(vals[0])
    return vals


@dataclass(frozen=True)
class BasisFunction:
    params: MorseParams
    n: int

    def __call__(self, x):
        return basis_eval(self.params, self.n, x)

    def xi(self, x):
        return xi(self.params, x)


def h_tilde_coefficients(params: MorseParams, n: int) -> tuple[float, float]:
    """(a~_n, b~_n): matrix elements of the unshifted Hamiltonian."""
    g, D, half_a2 = params.gamma, params.D, 0.5 * params.alpha**2
    k = _snap(n + g + 0.5 - D, D)
    a = half_a2 * (k * k + n * (n + 2 * g) - D * D)
    b = -half_a2 * math.sqrt((n + 1) * (n + 2 * g + 1)) * k
    return a, b


@dataclass(frozen=True)
class TridiagonalOperator:
    """Symmetric Jacobi operator given by index -> value maps."""

    diag: Callable[[int], float]
    offdiag: Callable[[int], float]
    label: str = ""

    def a(self, n: int) -> float:
        return self.diag(n)

    def b(self, n: int) -> float:
        return self.offdiag(n)

    def natural_size(self, limit: int = 1000) -> Optional[int]:
        """Smallest N with b_{N-1} == 0, or None if none occurs below ``limit``."""
        for n in range(limit):
            if self.offdiag(n) == 0.0:
                return n + 1
        return None

    def bands(self, size: int) -> tuple[np.ndarray, np.ndarray]:
        d = np.array([self.diag(n) for n in range(size)], dtype=float)
        e = np.array([self.offdiag(n) for n in range(size - 1)], dtype=float)
        return d, e

    def matrix(self, size: int) -> np.ndarray:
        d, e = self.bands(size)
        return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


def tilde_operator(params: MorseParams) -> TridiagonalOperator:
    return TridiagonalOperator(
        diag=lambda n: h_tilde_coefficients(params, n)[0],
        offdiag=lambda n: h_tilde_coefficients(params, n)[1],
        label="H~",
    )


def shifted_operator(params: MorseParams) -> TridiagonalOperator:
    """Jacobi operator of H = H~ + alpha^2 D^2 / 2 (positive semi-definite)."""
    g, D, half_a2 = params.gamma, params.D, 0.5 * params.alpha**2

    def diag(n: int) -> float:
        k = _snap(n + g + 0.5 - D, D)
        return half_a2 * (k * k + n * (n + 2 * g))

    return TridiagonalOperator(
        diag=diag,
        offdiag=lambda n: h_tilde_coefficients(params, n)[1],
        label="H",
    )
