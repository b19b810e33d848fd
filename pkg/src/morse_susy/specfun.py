"""Scalar special functions: gamma machinery, Pochhammer symbols and
terminating hypergeometric sums at unit argument.

Everything here is a pure function of its arguments.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

Scalar = Union[float, complex]

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
_POLE_EPS = 1e-300


class PoleError(ArithmeticError):
    """A gamma function or a denominator Pochhammer symbol hit a pole."""


def _is_nonpositive_integer(z: Scalar) -> bool:
    z = complex(z)
    return z.imag == 0.0 and z.real <= 0.0 and z.real == math.floor(z.real)


def log_gamma_real(x: float) -> float:
    """ln Gamma(x) for real x > 0."""
    if not x > 0.0:
        raise ValueError(f"log_gamma_real needs x > 0, got {x!r}")
    return math.lgamma(x)


def _log_sin_pi_abs(z: complex) -> float:
    # log|sin(pi z)| via |sin(pi z)|^2 = sin^2(pi x) + sinh^2(pi y)
    x, y = z.real, abs(z.imag)
    r = math.fmod(x, 2.0)
    s = math.sin(math.pi * r)
    py = math.pi * y
    if py > 30.0:
        # sinh^2 dominates; the sin^2 correction is below double precision
        return py - math.log(2.0) + 0.5 * math.log1p((2.0 * s) ** 2 * math.exp(-2.0 * py))
    return 0.5 * math.log(s * s + math.sinh(py) ** 2)


def _lanczos_log_gamma(z: complex) -> complex:
    z = z - 1.0
    acc = complex(_LANCZOS_COEF[0])
    for i, coef in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += coef / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * cmath.log(t) - t + cmath.log(acc)


def log_gamma_abs(z: Scalar) -> float:
    """ln|Gamma(z)| for complex z, with reflection for Re z < 1/2.

    Raises
    ------
    PoleError
        If z is a nonpositive integer.
    """
    z = complex(z)
    if _is_nonpositive_integer(z):
        raise PoleError(f"Gamma has a pole at {z.real:g}")
    if z.real < 0.5:
        return math.log(math.pi) - _log_sin_pi_abs(z) - _lanczos_log_gamma(1.0 - z).real
    return _lanczos_log_gamma(z).real


def gamma_abs_complex(z: Scalar) -> float:
    """|Gamma(z)| for complex z."""
    return math.exp(log_gamma_abs(z))


def pochhammer(x: Scalar, k: int) -> Scalar:
    """Rising factorial (x)_k = x (x+1) ... (x+k-1), with (x)_0 = 1."""
    if k < 0:
        raise ValueError("pochhammer index must be nonnegative")
    out: Scalar = 1.0 if not isinstance(x, complex) else 1.0 + 0j
    for j in range(k):
        out *= x + j
    return out


def _realify(z: complex, tol: float = 0.0) -> Scalar:
    if abs(z.imag) <= tol * (1.0 + abs(z.real)):
        return z.real
    return z


@dataclass(frozen=True)
class Hyp3F2Params:
    """Parameters of 3F2(-n, b, c; d, e | 1)."""

    n: int
    b: Scalar
    c: Scalar
    d: Scalar
    e: Scalar

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("terminating index n must be nonnegative")

    @property
    def numerator(self) -> tuple:
        return (-self.n, self.b, self.c)

    @property
    def denominator(self) -> tuple:
        return (self.d, self.e)

    def _conjugate_pair(self) -> bool:
        b, c = complex(self.b), complex(self.c)
        return (
            abs(b - c.conjugate()) <= 1e-15 * (1.0 + abs(b))
            and complex(self.d).imag == 0.0
            and complex(self.e).imag == 0.0
        )


def _hyp_terms(n: int, upper: Sequence[Scalar], lower: Sequence[Scalar]):
    if n < 0:
        raise ValueError("n must be nonnegative")
    term = 1.0 + 0j
    yield term
    for k in range(n):
        num = complex(k - n)
        for a in upper:
            num *= a + k
        den = complex(k + 1)
        for b in lower:
            f = b + k
            if abs(f) < _POLE_EPS:
                raise PoleError(f"denominator parameter {b!r} vanishes at k={k}")
            den *= f
        term *= num / den
        yield term


def hyp_terminating(n: int, upper: Sequence[Scalar], lower: Sequence[Scalar]) -> complex:
    """Sum of p+1Fq(-n, *upper; *lower | 1), by forward term recursion.

    Raises
    ------
    PoleError
        When a denominator Pochhammer factor vanishes before the series
        terminates.
    """
    return sum(_hyp_terms(n, upper, lower), 0j)


def hyp_terminating_magnitude(n: int, upper: Sequence[Scalar], lower: Sequence[Scalar]) -> float:
    """Sum of the absolute values of the terms; the scale that bounds the
    rounding error of :func:`hyp_terminating`."""
    return sum(abs(t) for t in _hyp_terms(n, upper, lower))


def hyp3f2_terminating(p: Hyp3F2Params) -> Scalar:
    """3F2(-n, b, c; d, e | 1).

    Returns a float when b, c are complex conjugates and d, e are real;
    the imaginary residue is checked against 1e-12 of the magnitude.
    """
    val = hyp_terminating(p.n, (p.b, p.c), (p.d, p.e))
    if p._conjugate_pair():
        if abs(val.imag) > 1e-12 * (1.0 + abs(val.real)):
            raise ArithmeticError(f"conjugate-parameter 3F2 came out complex: {val}")
        return val.real
    return _realify(val)


def scaled_terminating_sum(
    n: int,
    upper: Sequence[Scalar],
    lower: Sequence[Scalar],
    lead: Sequence[Scalar],
) -> complex:
    """prod_l (l)_n * p+1Fq(-n, *upper; *lead, *lower | 1).

    Each ``lead`` parameter sits in the denominator and is cancelled
    term-by-term against its own (l)_n, so the sum stays finite when some
    (l)_k vanishes for k <= n.
    """
    total = 0.0 + 0j
    for k in range(n + 1):
        term = complex(pochhammer(float(-n), k)) / math.factorial(k)
        if term == 0:
            continue
        for a in upper:
            term *= pochhammer(a, k)
        for b in lower:
            f = pochhammer(complex(b), k)
            if abs(f) < _POLE_EPS:
                raise PoleError(f"denominator parameter {b!r} vanishes at k={k}")
            term /= f
        for lv in lead:
            term *= pochhammer(lv + k, n - k)
        total += term
    return total


def exact_terminating_sum(
    n: int,
    pairs: Sequence[float] = (),
    lam2: float = 0.0,
    upper: Sequence[float] = (),
    lower: Sequence[float] = (),
    lead: Sequence[float] = (),
) -> float:
    """Real terminating sum with conjugate numerator pairs, accumulated in
    exact rational arithmetic and rounded once.

    Computes prod_l (l)_n * p+1Fq(-n, u_1+il, u_1-il, ..., *upper; *lead, *lower | 1)
    where ``pairs`` lists the centres u_i and ``lam2`` = l^2 (negative below
    the continuum). A conjugate pair contributes (u+k)^2 + l^2 per step, so
    every factor is an exact binary rational. The alternating terms of these
    sums cancel by up to eight digits for n ~ 25, which double-precision
    accumulation cannot absorb.
    """
    lam2_q = Fraction(lam2)
    pairs_q = [Fraction(u) for u in pairs]
    upper_q = [Fraction(a) for a in upper]
    lower_q = [Fraction(b) for b in lower]
    lead_q = [Fraction(v) for v in lead]
    if lead_q:
        # term_k carries prod (l+k)_{n-k}; build it from k = n downward
        total = Fraction(0)
        for k in range(n + 1):
            term = Fraction(1)
            for j in range(k):
                num = (j - n) * Fraction(1)
                for u in pairs_q:
                    num *= (u + j) ** 2 + lam2_q
                for a in upper_q:
                    num *= a + j
                den = Fraction(j + 1)
                for b in lower_q:
                    den *= b + j
                if den == 0:
                    raise PoleError(f"denominator vanishes at k={j}")
                term *= num / den
            for lv in lead_q:
                for j in range(k, n):
                    term *= lv + j
            total += term
        return float(total)
    term = Fraction(1)
    total = Fraction(1)
    for k in range(n):
        num = (k - n) * Fraction(1)
        for u in pairs_q:
            num *= (u + k) ** 2 + lam2_q
        for a in upper_q:
            num *= a + k
        if num == 0:
            break
        den = Fraction(k + 1)
        for b in lower_q:
            den *= b + k
        if den == 0:
            raise PoleError(f"denominator vanishes at k={k}")
        term *= num / den
        total += term
    return float(total)


def thomae_transform(p: Hyp3F2Params) -> tuple[Hyp3F2Params, Scalar]:
    """Thomae relation for a terminating 3F2 at unit argument.

    3F2(a, b, c; d, e) = G * 3F2(a, d-b, d-c; d, d+e-b-c) with
    G = Gamma(e) Gamma(d+e-a-b-c) / [Gamma(e-a) Gamma(d+e-b-c)].
    For a = -n the gamma quotient is (d+e-b-c)_n / (e)_n, which is how it
    is evaluated here.
    """
    s = p.d + p.e - p.b - p.c
    transformed = Hyp3F2Params(n=p.n, b=p.d - p.b, c=p.d - p.c, d=p.d, e=s)
    den = pochhammer(complex(p.e), p.n)
    if abs(den) < _POLE_EPS:
        raise PoleError("Gamma(e - a) has a pole for this parameter set")
    pref = complex(pochhammer(complex(s), p.n)) / den
    return transformed, _realify(pref, 1e-14)


def thomae_sides(p: Hyp3F2Params) -> tuple[Scalar, Scalar]:
    """(original sum, prefactor * transformed sum)."""
    tp, pref = thomae_transform(p)
    lhs = hyp_terminating(p.n, (p.b, p.c), (p.d, p.e))
    rhs = pref * hyp_terminating(tp.n, (tp.b, tp.c), (tp.d, tp.e))
    return _realify(lhs, 1e-14), _realify(complex(rhs), 1e-14)


def thomae_check(p: Hyp3F2Params, rtol: float = 1e-11) -> tuple[bool, float]:
    """Compare both sides of the Thomae relation.

    The deviation is measured against the larger term-magnitude sum of the
    two sides, so alternating series that cancel are judged by what double
    precision can resolve. Returns (passed, scaled deviation).
    """
    tp, pref = thomae_transform(p)
    lhs, rhs = thomae_sides(p)
    scale = max(
        hyp_terminating_magnitude(p.n, (p.b, p.c), (p.d, p.e)),
        abs(pref) * hyp_terminating_magnitude(tp.n, (tp.b, tp.c), (tp.d, tp.e)),
    )
    dev = abs(lhs - rhs) / scale
    return dev <= rtol, dev


def kernel_sum_sides(
    sigma: float, n: int, upper: Sequence[Scalar], lower: Sequence[Scalar]
) -> tuple[Scalar, Scalar]:
    """Both sides of the partial-sum formula

        sum_{j<=n} (sigma)_j / j! * 3F2(-j, a1, a2; b1, b2 | 1)
            = (sigma+1)_n / n! * 4F3(-n, sigma, a1, a2; sigma+1, b1, b2 | 1).

    The right side cancels (sigma+1)_n against the matching denominator
    term-by-term.
    """
    lhs = 0.0 + 0j
    for j in range(n + 1):
        lhs += pochhammer(sigma, j) / math.factorial(j) * hyp_terminating(j, upper, lower)
    rhs = scaled_terminating_sum(n, (sigma, *upper), lower, lead=(sigma + 1.0,)) / math.factorial(n)
    return _realify(lhs, 1e-12), _realify(rhs, 1e-12)


def _kernel_sum_magnitude(sigma: float, n: int, upper, lower) -> float:
    lhs = sum(
        abs(pochhammer(sigma, j)) / math.factorial(j) * hyp_terminating_magnitude(j, upper, lower)
        for j in range(n + 1)
    )
    rhs = 0.0
    for k in range(n + 1):
        term = abs(pochhammer(float(-n), k)) / math.factorial(k) * abs(pochhammer(complex(sigma), k))
        for a in upper:
            term *= abs(pochhammer(complex(a), k))
        for b in lower:
            term /= abs(pochhammer(complex(b), k))
        term *= abs(pochhammer(sigma + 1.0 + k, n - k))
        rhs += term
    return max(lhs, rhs / math.factorial(n))


def kernel_sum_identity_check(
    sigma: float, n: int, inner: Hyp3F2Params, rtol: float = 1e-11
) -> tuple[bool, float]:
    """Evaluate both sides of the partial-sum formula for the inner sum
    3F2(-j, inner.b, inner.c; inner.d, inner.e) and compare them.

    ``inner.n`` is ignored; the sum index runs over j = 0..n. As in
    :func:`thomae_check` the deviation is scaled by the term magnitudes.
    Returns (passed, scaled deviation).
    """
    upper, lower = (inner.b, inner.c), (inner.d, inner.e)
    lhs, rhs = kernel_sum_sides(sigma, n, upper, lower)
    dev = abs(lhs - rhs) / _kernel_sum_magnitude(sigma, n, upper, lower)
    return dev <= rtol, dev
