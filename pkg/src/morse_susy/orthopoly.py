"""Orthonormal polynomials of a Jacobi operator.

The three-term recursion

    E P_n = b_{n-1} P_{n-1} + a_n P_n + b_n P_{n+1},   P_0 = 1,

run on the operator coefficients is the ground truth. For the shifted Morse
operator the same polynomials are continuous dual Hahn polynomials,

    P_n(E) = (s)_n / sqrt(n! (2g+1)_n) * 3F2(-n, -D+il, -D-il; s, s | 1),

with s = g + 1/2 - D and l^2 = 2E/alpha^2 - D^2. The partner family is the
same expression with D -> D - 1 (l unchanged).

Sign convention: with b_n as produced by :mod:`morse_susy.morse`, no (-1)^n
factor appears in the closed forms. Flipping the sign of every b_n maps
P_n -> (-1)^n P_n and leaves the orthogonality measure unchanged.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

from .morse import MorseParams, TridiagonalOperator, shifted_operator
from .specfun import exact_terminating_sum
from .susy import partner_closed_operator


class TruncationError(ArithmeticError):
    """The recursion reached b_n = 0 before the requested order."""


class ProportionalityError(AssertionError):
    pass


@dataclass(frozen=True)
class PolyFamily:
    operator: TridiagonalOperator
    mode: Literal["recursion", "closed-form"] = "recursion"
    params: Optional[MorseParams] = None
    partner: bool = False

    def __call__(self, E, n_max: int) -> np.ndarray:
        if self.mode == "recursion":
            return eval_recursion(self, E, n_max)
        if self.params is None:
            raise ValueError("closed-form evaluation needs params")
        f = partner_closed_form if self.partner else eval_closed_form
        return np.array([f(self.params, E, n) for n in range(n_max + 1)])

    @property
    def natural_order(self) -> Optional[int]:
        """Highest order that exists, or None when the recursion never stops."""
        size = self.operator.natural_size()
        return None if size is None else size - 1


def morse_family(params: MorseParams, mode: str = "recursion") -> PolyFamily:
    return PolyFamily(shifted_operator(params), mode, params, partner=False)


def partner_family(params: MorseParams, mode: str = "recursion", op=None) -> PolyFamily:
    return PolyFamily(op or partner_closed_operator(params), mode, params, partner=True)


@dataclass(frozen=True)
class SpectralPoint:
    energy: float
    lam: complex

    @classmethod
    def at(cls, params: MorseParams, energy: float) -> "SpectralPoint":
        lam2 = 2.0 * energy / params.alpha**2 - params.D**2
        lam = math.sqrt(lam2) if lam2 >= 0 else 1j * math.sqrt(-lam2)
        return cls(energy, lam)


def _operator(fam) -> TridiagonalOperator:
    return fam.operator if isinstance(fam, PolyFamily) else fam


def eval_recursion(fam, E, n_max: int) -> np.ndarray:
    """P_0..P_{n_max} at E (scalar or array); result has shape (n_max+1, *E.shape).

    Raises
    ------
    TruncationError
        If some b_n with n < n_max is zero.
    """
    op = _operator(fam)
    E = np.asarray(E, dtype=float)
    out = np.empty((n_max + 1,) + E.shape)
    out[0] = 1.0
    prev_b = 0.0
    for n in range(n_max):
        b = op.b(n)
        if b == 0.0:
            raise TruncationError(f"b_{n} = 0: the family stops at order {n}")
        prev = out[n - 1] if n > 0 else 0.0
        out[n + 1] = ((E - op.a(n)) * out[n] - prev_b * prev) / b
        prev_b = b
    return out


def partner_eval_recursion(partner_op: TridiagonalOperator, E, n_max: int) -> np.ndarray:
    return eval_recursion(partner_op, E, n_max)


def _norm(params: MorseParams, n: int) -> float:
    g = params.gamma
    return math.exp(0.5 * (math.lgamma(n + 1) + math.lgamma(2 * g + 1 + n) - math.lgamma(2 * g + 1)))


def _dual_hahn_sum(n: int, depth: float, lower: float, E, params: MorseParams):
    # 3F2(-n, -depth+il, -depth-il; lower, lower | 1); each conjugate pair
    # gives (k-depth)^2 + l^2 with l^2 = 2E/alpha^2 - D^2
    E = np.asarray(E, dtype=float)
    lam2 = 2.0 * E / params.alpha**2 - params.D**2
    out = np.empty(E.shape)
    for idx, l2 in np.ndenumerate(lam2):
        out[idx] = exact_terminating_sum(n, pairs=(-depth,), lam2=float(l2), lower=(lower, lower))
    return out


def eval_closed_form(params: MorseParams, E, n: int):
    s = params.gamma + 0.5 - params.D
    pref = _poch_real(s, n) / _norm(params, n)
    val = pref * _dual_hahn_sum(n, params.D, s, E, params)
    return float(val) if np.ndim(val) == 0 else val


def partner_closed_form(params: MorseParams, E, n: int):
    s1 = params.gamma + 1.5 - params.D
    pref = _poch_real(s1, n) / _norm(params, n)
    val = pref * _dual_hahn_sum(n, params.D - 1.0, s1, E, params)
    return float(val) if np.ndim(val) == 0 else val


def _poch_real(x: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= x + j
    return out


def p_at_zero(params: MorseParams, n: int) -> float:
    """P_n(0) = (g+1/2-D)_n / sqrt(n! (2g+1)_n)."""
    return _poch_real(params.gamma + 0.5 - params.D, n) / _norm(params, n)


def kernel_poly(fam, E, n: int, p0: Optional[Sequence[float]] = None):
    """K_n(E, 0) = sum_{j<=n} P_j(E) P_j(0) with P_j(E) from the recursion.

    ``p0`` supplies P_0(0)..P_n(0); by default they come from the recursion
    too. E = 0 is a bound-state energy, where P_j(0) is the decaying solution
    and forward recursion loses relative accuracy as j grows, so callers that
    need more than ~1e-9 pass :func:`p_at_zero` values.
    """
    P = eval_recursion(fam, E, n)
    P0 = eval_recursion(fam, 0.0, n) if p0 is None else np.asarray(p0[: n + 1], dtype=float)
    val = np.tensordot(P0, P, axes=(0, 0))
    return float(val) if np.ndim(val) == 0 else val


def _lam2(params: MorseParams, E: float) -> float:
    return 2.0 * E / params.alpha**2 - params.D**2


def kernel_poly_closed(params: MorseParams, E: float, n: int) -> float:
    """K_n(E, 0) as a single terminating sum,

        (g+3/2-D)_n / n! * 3F2(-n, g+1/2-il, g+1/2+il; g+3/2-D, 2g+1 | 1),

    with (g+3/2-D)_n cancelled term-by-term so the value stays finite at a
    natural truncation.
    """
    g = params.gamma
    val = exact_terminating_sum(
        n, pairs=(g + 0.5,), lam2=_lam2(params, E), lower=(2 * g + 1,), lead=(g + 1.5 - params.D,)
    )
    return val / math.factorial(n)


def kernel_poly_termwise(params: MorseParams, E: float, n: int) -> float:
    """K_n(E, 0) summed term by term from the closed-form P_j(E) P_j(0):

        sum_j (s)_j^2 / (j! (2g+1)_j) * 3F2(-j, -D+il, -D-il; s, s | 1).
    """
    g, s = params.gamma, params.gamma + 0.5 - params.D
    l2 = _lam2(params, E)
    total = 0.0
    for j in range(n + 1):
        v = exact_terminating_sum(j, pairs=(-params.D,), lam2=l2, lead=(s, s))
        total += v / (math.factorial(j) * _poch_real(2 * g + 1, j))
    return total


def christoffel_darboux_residual(fam, E, n: int) -> float:
    """Max relative mismatch of E K_n(E,0) = b_n [P_{n+1}(E) P_n(0) - P_n(E) P_{n+1}(0)]."""
    E = np.atleast_1d(np.asarray(E, dtype=float))
    op = _operator(fam)
    P = eval_recursion(fam, E, n + 1)
    P0 = eval_recursion(fam, 0.0, n + 1)
    lhs = E * (P0[: n + 1] @ P[: n + 1])
    rhs = op.b(n) * (P[n + 1] * P0[n] - P[n] * P0[n + 1])
    scale = np.maximum(1.0, np.maximum(np.abs(lhs), np.abs(rhs)))
    return float(np.max(np.abs(lhs - rhs) / scale))


@dataclass(frozen=True)
class KernelRelationRow:
    n: int
    rho: float
    rho_expected_abs: float
    residual: float
    rho_error: float


def default_kernel_grid(params: MorseParams, points: int = 16) -> np.ndarray:
    """Energies spanning the bound-state range and the continuum."""
    edge = params.shift
    return np.linspace(0.05 * edge + 0.01, 3.0 * edge + 5.0 * params.alpha**2, points)


def kernel_relation_check(
    fam: PolyFamily,
    partner_fam: PolyFamily,
    n_max: int,
    energy_grid: Optional[Sequence[float]] = None,
    params: Optional[MorseParams] = None,
    res_tol: float = 1e-9,
    rho_tol: float = 1e-10,
) -> list[KernelRelationRow]:
    """Fit P+_n = rho_n K_n(., 0) on a grid and compare |rho_n| with
    sqrt|b_0 P_1(0) / (b_n P_n(0) P_{n+1}(0))|.

    With Morse ``params`` available the values P_j(0) come from
    :func:`p_at_zero`; otherwise from the recursion.

    Raises
    ------
    ProportionalityError
        On the first n whose fit residual or |rho_n| is out of tolerance.
    """
    params = params or fam.params
    if energy_grid is None:
        energy_grid = default_kernel_grid(params)
    E = np.asarray(energy_grid, dtype=float)
    op = fam.operator
    P = eval_recursion(fam, E, n_max)
    if params is not None and not fam.partner:
        P0 = np.array([p_at_zero(params, j) for j in range(n_max + 2)])
    else:
        P0 = eval_recursion(fam, 0.0, n_max + 1)
    Pp = eval_recursion(partner_fam, E, n_max)
    rows = []
    for n in range(n_max + 1):
        K = P0[: n + 1] @ P[: n + 1]
        keep = np.abs(K) > 1e-8 * np.max(np.abs(K))
        k, pp = K[keep], Pp[n][keep]
        rho = float(k @ pp / (k @ k))
        residual = float(np.linalg.norm(pp - rho * k) / np.linalg.norm(pp))
        expected = math.sqrt(abs(op.b(0) * P0[1] / (op.b(n) * P0[n] * P0[n + 1])))
        rho_err = abs(abs(rho) - expected) / expected
        row = KernelRelationRow(n, rho, expected, residual, rho_err)
        if residual > res_tol or rho_err > rho_tol:
            raise ProportionalityError(f"kernel relation fails at n={n}: {row}")
        rows.append(row)
    return rows
