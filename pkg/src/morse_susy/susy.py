"""Factorisation H = A^dagger A of a tridiagonal operator and its partner
H+ = A A^dagger.

A acts on the basis as A|n> = c_n|n> + d_n|n-1> (d_0 = 0), so
a_n = c_n^2 + d_n^2 and b_n = c_n d_{n+1}; the partner has
a+_n = c_n^2 + d_{n+1}^2 and b+_n = c_{n+1} d_{n+1}.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .morse import MorseParams, TridiagonalOperator, _snap, shifted_operator

log = logging.getLogger(__name__)

PSD_TOL = 1e-12


class FactorizationError(ArithmeticError):
    """The operator cannot be written as A^dagger A from the data given."""


@dataclass(frozen=True)
class FactorCoefficients:
    """Coefficient maps n -> c_n and n -> d_n (with d_0 = 0)."""

    c: Callable[[int], float]
    d: Callable[[int], float]
    n_max: Optional[int] = None  # largest n with c_n known; None = unbounded


def _from_arrays(c: Sequence[float], d: Sequence[float]) -> FactorCoefficients:
    c = tuple(float(v) for v in c)
    d = tuple(float(v) for v in d)

    def get(seq, name):
        def f(n: int) -> float:
            if n < 0 or n >= len(seq):
                raise IndexError(f"{name}_{n} not available (have {len(seq)} values)")
            return seq[n]

        return f

    return FactorCoefficients(c=get(c, "c"), d=get(d, "d"), n_max=len(c) - 1)


def closed_form_cd(params: MorseParams, n: int) -> tuple[float, float]:
    """(c_n, d_{n+1}) for the shifted Morse operator."""
    r = params.alpha / math.sqrt(2.0)
    c = r * _snap(n + params.gamma + 0.5 - params.D, params.D)
    d = -r * math.sqrt((n + 1) * (n + 1 + 2 * params.gamma))
    return c, d


def closed_form_factor(params: MorseParams) -> FactorCoefficients:
    def d(n: int) -> float:
        return 0.0 if n == 0 else closed_form_cd(params, n - 1)[1]

    return FactorCoefficients(c=lambda n: closed_form_cd(params, n)[0], d=d)


def _clamp_square(value: float, scale: float, what: str) -> float:
    if value >= 0.0:
        return value
    if value >= -PSD_TOL * max(1.0, scale):
        log.warning("%s = %.3e clamped to 0", what, value)
        return 0.0
    raise FactorizationError(f"{what} = {value:.6e} < 0: operator is not positive semi-definite")


def factor_from_polynomials(
    op: TridiagonalOperator,
    p0: Sequence[float],
    n_max: int,
    params: Optional[MorseParams] = None,
    rtol: float = 1e-12,
) -> FactorCoefficients:
    """Factor coefficients from b_n and consecutive values P_n(0).

    d_{n+1}^2 = -b_n P_n(0)/P_{n+1}(0) and c_n^2 = -b_n P_{n+1}(0)/P_n(0).
    Signs follow d_{n+1} <= 0, with c_n fixed by c_n d_{n+1} = b_n. Both
    relations a_n = c_n^2 + d_n^2 and b_n = c_n d_{n+1} are checked to
    ``rtol`` before returning.

    When b_0 = 0 (0 is an eigenvalue with eigenvector phi_0), P_1 does not
    exist; the n = 0 pair is then taken from the closed form, which needs
    ``params``.
    """
    if len(p0) < n_max + 2:
        raise ValueError(f"need P_0(0)..P_{n_max + 1}(0), got {len(p0)} values")
    c = np.zeros(n_max + 1)
    d = np.zeros(n_max + 2)
    for n in range(n_max + 1):
        a_n, b_n = op.a(n), op.b(n)
        if n == 0 and b_n == 0.0:
            if params is None:
                raise FactorizationError("b_0 = 0: pass params to use the closed form at n = 0")
            c[0], d[1] = closed_form_cd(params, 0)
            continue
        pn, pn1 = p0[n], p0[n + 1]
        if pn == 0.0 or pn1 == 0.0:
            raise FactorizationError(f"P_{n if pn == 0.0 else n + 1}(0) = 0: ratio undefined at n = {n}")
        scale = abs(a_n) + abs(b_n)
        d2 = _clamp_square(-b_n * pn / pn1, scale, f"d_{n + 1}^2")
        c2 = _clamp_square(-b_n * pn1 / pn, scale, f"c_{n}^2")
        d[n + 1] = -math.sqrt(d2)
        c[n] = b_n / d[n + 1] if d[n + 1] != 0.0 else 0.0
        if abs(c[n] ** 2 - c2) > rtol * max(1.0, c2):
            raise FactorizationError(f"c_{n}^2 inconsistent: {c[n] ** 2!r} vs {c2!r}")
    for n in range(n_max + 1):
        a_n, b_n = op.a(n), op.b(n)
        if abs(c[n] ** 2 + d[n] ** 2 - a_n) > rtol * max(1.0, abs(a_n)):
            raise FactorizationError(f"a_{n} = {a_n!r} not reproduced by c_n^2 + d_n^2")
        if abs(c[n] * d[n + 1] - b_n) > rtol * max(1.0, abs(b_n)):
            raise FactorizationError(f"b_{n} = {b_n!r} not reproduced by c_n d_(n+1)")
    return _from_arrays(c, d)


def reconstruct(fc: FactorCoefficients, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    """(a_n, b_n) for n <= n_max from c, d."""
    a = np.array([fc.c(n) ** 2 + fc.d(n) ** 2 for n in range(n_max + 1)])
    b = np.array([fc.c(n) * fc.d(n + 1) for n in range(n_max + 1)])
    return a, b


def apply_A(fc: FactorCoefficients, v: Sequence[float]) -> np.ndarray:
    """(A v)_n = c_n v_n + d_{n+1} v_{n+1}; same length as v."""
    v = np.asarray(v, dtype=float)
    out = np.array([fc.c(n) * v[n] for n in range(len(v))])
    for n in range(len(v) - 1):
        out[n] += fc.d(n + 1) * v[n + 1]
    return out


def apply_A_dagger(fc: FactorCoefficients, v: Sequence[float]) -> np.ndarray:
    """(A^dagger v)_n = c_n v_n + d_n v_{n-1}; one entry longer than v."""
    v = np.asarray(v, dtype=float)
    L = len(v)
    out = np.zeros(L + 1)
    for n in range(L):
        out[n] += fc.c(n) * v[n]
        out[n + 1] += fc.d(n + 1) * v[n]
    return out


def A_matrix(fc: FactorCoefficients, size: int) -> np.ndarray:
    """Truncated matrix of A acting on coefficient vectors (upper bidiagonal)."""
    M = np.diag([fc.c(n) for n in range(size)])
    for n in range(size - 1):
        M[n, n + 1] = fc.d(n + 1)
    return M


def partner_operator(fc: FactorCoefficients) -> TridiagonalOperator:
    return TridiagonalOperator(
        diag=lambda n: fc.c(n) ** 2 + fc.d(n + 1) ** 2,
        offdiag=lambda n: fc.c(n + 1) * fc.d(n + 1),
        label="H+",
    )


def partner_closed_operator(params: MorseParams) -> TridiagonalOperator:
    """Partner coefficients in closed form (no factorisation step)."""
    g, D, half_a2 = params.gamma, params.D, 0.5 * params.alpha**2

    def diag(n: int) -> float:
        k = _snap(n + g + 0.5 - D, D)
        return half_a2 * ((n + 1) * (n + 2 * g + 1) + k * k)

    def offdiag(n: int) -> float:
        return -half_a2 * math.sqrt((n + 1) * (n + 2 * g + 1)) * _snap(n + g + 1.5 - D, D)

    return TridiagonalOperator(diag=diag, offdiag=offdiag, label="H+")


def with_depth(params: MorseParams, D: float) -> MorseParams:
    """Same alpha and gamma with depth parameter D (may be <= 0).

    Only for coefficient formulas; V0 is left untouched and no longer matches.
    """
    return dataclasses.replace(params, D=D, shift=0.5 * params.alpha**2 * D**2)


def shape_invariance_residual(params: MorseParams, n_max: int) -> tuple[float, float]:
    """Max deviations of b+_n - b_n(D-1) and a+_n - a_n(D-1) - alpha^2 (2D-1)/2."""
    plus = partner_closed_operator(params)
    lower = shifted_operator(with_depth(params, params.D - 1.0))
    const = 0.5 * params.alpha**2 * (2.0 * params.D - 1.0)
    db = max(abs(plus.b(n) - lower.b(n)) for n in range(n_max + 1))
    da = max(abs(plus.a(n) - lower.a(n) - const) for n in range(n_max + 1))
    return db, da
