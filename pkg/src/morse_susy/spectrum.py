"""Bound states, spectral measures and numerical orthogonality checks.

The polynomials P_n of the shifted operator are orthonormal with respect to
a measure with point masses at the bound energies

    E_m = (alpha^2 / 2) m (2D - m),   0 <= m < D,

and a density on E > alpha^2 D^2 / 2. Writing E = alpha^2 (D^2 + l^2) / 2,
the density in l is the continuous dual Hahn weight with parameters
(a, b, c) = (-D, g + 1/2, g + 1/2):

    w(l) = |G(a+il) G(b+il)^2 / G(2il)|^2 / (2 pi G(a+b)^2 G(2b)),

and Omega(E) = w(l) / (alpha^2 l). The partner measure is the same with
a = 1 - D; its point masses sit at E_1, E_2, ... and its continuum starts at
the same edge alpha^2 D^2 / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate
from scipy.linalg import eigh_tridiagonal

from .morse import InvalidParameterError, MorseParams, TridiagonalOperator, shifted_operator
from .specfun import PoleError, log_gamma_abs, log_gamma_real

_INTEGER_TOL = 1e-12
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(64)
TAIL_NATS = 40.0


class QuadratureError(ArithmeticError):
    """The continuum integral could not be truncated within the search range."""


class SpectrumMismatchError(ArithmeticError):
    """A truncation eigenvalue disagrees with the closed-form energy."""


def _near_integer(x: float) -> bool:
    return abs(x - round(x)) <= _INTEGER_TOL * max(1.0, abs(x))


def _count_below(depth: float) -> int:
    """Number of integers m >= 0 with m < depth (0 when depth <= 0)."""
    if depth <= 0.0:
        return 0
    if _near_integer(depth):
        return int(round(depth))
    return math.ceil(depth)


def bound_state_count(params: MorseParams) -> int:
    """floor(D + 1) for non-integer D; D itself when D is an integer."""
    return _count_below(params.D)


def bound_energy(params: MorseParams, m: int) -> float:
    return 0.5 * params.alpha**2 * m * (2.0 * params.D - m)


def truncation_eigenvalues(op: TridiagonalOperator, size: int) -> np.ndarray:
    d, e = op.bands(size)
    if size == 1:
        return d.copy()
    return eigh_tridiagonal(d, e, eigvals_only=True)


@dataclass(frozen=True)
class BoundStateSet:
    count: int
    energies: np.ndarray
    unshifted: np.ndarray
    eigenvectors: np.ndarray  # columns; coefficients in the basis with gamma = truncation_gamma
    truncation_gamma: float
    truncation_eigenvalues: np.ndarray


def truncation_gamma(params: MorseParams, size: Optional[int] = None) -> float:
    """gamma making b_{size-1} = 0, so the leading size x size block decouples."""
    size = bound_state_count(params) if size is None else size
    return params.D + 0.5 - size


def bound_energies(params: MorseParams, rtol: float = 1e-10) -> BoundStateSet:
    """Closed-form bound energies, checked against the eigenvalues of the
    naturally truncated N x N block.

    Raises
    ------
    SpectrumMismatchError
        If an eigenvalue differs from its closed form by more than ``rtol``
        relative to max(|E_m|, alpha^2).
    """
    n = bound_state_count(params)
    energies = np.array([bound_energy(params, m) for m in range(n)])
    g = truncation_gamma(params, n)
    tp = params if abs(params.gamma - g) <= _INTEGER_TOL else params.with_gamma(g)
    d, e = shifted_operator(tp).bands(n)
    if n == 1:
        w, v = d.copy(), np.ones((1, 1))
    else:
        w, v = eigh_tridiagonal(d, e)
    scale = np.maximum(np.abs(energies), params.alpha**2)
    if np.any(np.abs(w - energies) > rtol * scale):
        raise SpectrumMismatchError(f"truncation eigenvalues {w} vs closed form {energies}")
    for j in range(n):
        if v[np.argmax(np.abs(v[:, j])), j] < 0:
            v[:, j] = -v[:, j]
    return BoundStateSet(n, energies, energies - params.shift, v, g, w)


def ground_state_wavefunction(params: MorseParams, x):
    """sqrt(alpha / Gamma(2D)) xi^D exp(-xi/2); needs gamma = D - 1/2."""
    if abs(params.gamma - (params.D - 0.5)) > _INTEGER_TOL * max(1.0, params.D):
        raise InvalidParameterError("the ground state closed form needs gamma = D - 1/2")
    t = math.sqrt(8.0 * params.V0) / params.alpha * np.exp(-params.alpha * np.asarray(x, dtype=float))
    log_val = 0.5 * (math.log(params.alpha) - log_gamma_real(2.0 * params.D)) + params.D * np.log(t) - 0.5 * t
    with np.errstate(under="ignore"):
        val = np.exp(log_val)
    return float(val) if np.ndim(val) == 0 else val


# --- measures ---------------------------------------------------------------


def _poch(x: float, k: int) -> float:
    out = 1.0
    for j in range(k):
        out *= x + j
    return out


def hahn_discrete_weights(a: float, b: float, c: float) -> list[float]:
    """Point masses of the continuous dual Hahn measure for a < 0, at
    y = -(a+l)^2 for l = 0..K with a + K < 0 (strict)."""
    K = _count_below(-a)
    if K == 0:
        return []
    pref = math.exp(
        log_gamma_abs(b - a) + log_gamma_abs(c - a) - log_gamma_abs(-2.0 * a) - log_gamma_abs(b + c)
    )
    out = []
    for l in range(K):
        num = _poch(2 * a, l) * _poch(a + 1, l) * _poch(a + b, l) * _poch(a + c, l)
        den = _poch(a, l) * _poch(a - b + 1, l) * _poch(a - c + 1, l) * math.factorial(l)
        out.append(pref * num * (-1) ** l / den)
    return out


def morse_discrete_weights(depth: float, gamma: float) -> list[float]:
    """omega_m for m < depth in the specialised form with b = c = gamma + 1/2."""
    n = _count_below(depth)
    if n == 0:
        return []
    g = gamma
    pref = math.exp(
        2.0 * log_gamma_real(g + 0.5 + depth) - log_gamma_real(2.0 * depth) - log_gamma_real(2.0 * g + 1.0)
    )
    out = []
    for m in range(n):
        num = _poch(-2.0 * depth, m) * _poch(1.0 - depth, m) * _poch(g + 0.5 - depth, m) ** 2
        den = (-1) ** m * math.factorial(m) * _poch(-depth, m) * _poch(0.5 - depth - g, m) ** 2
        out.append(pref * num / den)
    return out


def discrete_weights(params: MorseParams) -> list[float]:
    return morse_discrete_weights(params.D, params.gamma)


@dataclass(frozen=True)
class MassPoint:
    energy: float
    weight: float
    index: int


@dataclass(frozen=True)
class SpectralMeasure:
    """Point masses plus a density on (continuous_edge, inf).

    The density is parametrised by the continuous dual Hahn parameters
    (a, b, b); energies map to l by E = edge + alpha^2 l^2 / 2.
    """

    discrete: tuple[MassPoint, ...]
    continuous_edge: float
    alpha: float
    a: float
    b: float
    label: str = ""
    _log_norm: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        try:
            log_norm = -math.log(2.0 * math.pi) - 2.0 * log_gamma_abs(self.a + self.b) - log_gamma_real(2.0 * self.b)
        except PoleError:
            log_norm = -math.inf  # 1/Gamma(a+b)^2 = 0: no continuum
        object.__setattr__(self, "_log_norm", log_norm)

    @property
    def has_continuum(self) -> bool:
        return self._log_norm > -math.inf

    @property
    def energies(self) -> np.ndarray:
        return np.array([p.energy for p in self.discrete])

    @property
    def weights(self) -> np.ndarray:
        return np.array([p.weight for p in self.discrete])

    def energy(self, lam):
        return self.continuous_edge + 0.5 * self.alpha**2 * np.asarray(lam, dtype=float) ** 2

    def lam(self, E: float) -> float:
        return math.sqrt(2.0 * (E - self.continuous_edge)) / self.alpha

    def log_lambda_density(self, lam: float) -> float:
        if not self.has_continuum or lam <= 0.0:
            return -math.inf
        z = 1j * lam
        try:
            lg = log_gamma_abs(self.a + z) + 2.0 * log_gamma_abs(self.b + z) - log_gamma_abs(2.0 * z)
        except PoleError:
            return -math.inf
        return 2.0 * lg + self._log_norm

    def lambda_density(self, lam):
        """Weight per unit l."""
        lam = np.asarray(lam, dtype=float)
        out = np.array([math.exp(self.log_lambda_density(float(v))) for v in lam.ravel()])
        return float(out[0]) if lam.ndim == 0 else out.reshape(lam.shape)

    def density(self, E: float) -> float:
        """Omega(E) per unit energy; defined strictly above the edge."""
        if not E > self.continuous_edge:
            raise ValueError(f"density is defined for E > {self.continuous_edge!r}, got {E!r}")
        lam = self.lam(E)
        return self.lambda_density(lam) / (self.alpha**2 * lam)


def measure(params: MorseParams) -> SpectralMeasure:
    w = discrete_weights(params)
    pts = tuple(MassPoint(bound_energy(params, m), w[m], m) for m in range(len(w)))
    return SpectralMeasure(pts, params.shift, params.alpha, -params.D, params.gamma + 0.5, "H")


def partner_measure(params: MorseParams) -> SpectralMeasure:
    """Measure of the partner family: D -> D - 1 in the weights, masses at
    E_{m+1}, continuum edge unchanged."""
    w = morse_discrete_weights(params.D - 1.0, params.gamma)
    pts = tuple(MassPoint(bound_energy(params, m + 1), w[m], m) for m in range(len(w)))
    return SpectralMeasure(pts, params.shift, params.alpha, 1.0 - params.D, params.gamma + 0.5, "H+")


def continuous_density(params: MorseParams, E: float) -> float:
    return measure(params).density(E)


def partner_continuous_density(params: MorseParams, E: float) -> float:
    return partner_measure(params).density(E)


# --- quadrature in l --------------------------------------------------------


def _panel_nodes(lo: float, hi: float) -> tuple[np.ndarray, np.ndarray]:
    half = 0.5 * (hi - lo)
    return lo + half * (_GL_NODES + 1.0), half * _GL_WEIGHTS


def _first_panels(levels: int = 6) -> list[tuple[float, float]]:
    # [0, 1/64], [1/64, 1/32], ..., [1/2, 1]: resolves structure near the edge
    edges = [0.0] + [2.0**-k for k in range(levels, -1, -1)]
    return list(zip(edges[:-1], edges[1:]))


def lambda_panels(measure: SpectralMeasure, envelope=None, max_lambda: float = 4000.0):
    """Yield (nodes, weights * density) panel by panel until the log of
    density * envelope falls TAIL_NATS below its running peak.

    ``envelope(lam_array)`` returns a nonnegative factor multiplying the
    density (e.g. the largest P_j^2); it defaults to 1.

    Raises
    ------
    QuadratureError
        If the cutoff is not reached by ``max_lambda``.
    """
    peak = -math.inf
    panels = iter(_first_panels())
    lo = 1.0
    while True:
        span = next(panels, None)
        if span is None:
            if lo >= max_lambda:
                raise QuadratureError(f"integrand still above cutoff at l = {lo:g}")
            span = (lo, lo + 1.0)
            lo += 1.0
        x, wq = _panel_nodes(*span)
        logw = np.array([measure.log_lambda_density(float(v)) for v in x])
        with np.errstate(divide="ignore"):
            env = np.zeros_like(x) if envelope is None else np.log(np.maximum(envelope(x), 1e-300))
        level = float(np.max(logw + env))
        peak = max(peak, level)
        yield x, wq * np.exp(logw)
        if span[0] >= 1.0 and level < peak - TAIL_NATS:
            return


def continuous_mass_lambda(measure: SpectralMeasure, lam_hi: Optional[float] = None) -> float:
    """Integral of the density over l in [0, lam_hi] (all of it by default)."""
    if not measure.has_continuum:
        return 0.0
    if lam_hi is None:
        return float(sum(np.sum(w) for _, w in lambda_panels(measure)))
    total = 0.0
    for lo, hi in _first_panels() + [(k, k + 1.0) for k in range(1, math.ceil(lam_hi))]:
        if lo >= lam_hi:
            break
        x, wq = _panel_nodes(lo, min(hi, lam_hi))
        total += float(np.sum(wq * measure.lambda_density(x)))
    return total


def continuous_mass_energy(measure: SpectralMeasure, E_hi: float) -> float:
    """Integral of Omega(E) dE over (edge, E_hi] by adaptive quadrature in E.

    Omega(E) sqrt(E - edge) is analytic at the edge (w is even in l), so the
    square-root factor is handed to QUADPACK as an algebraic end-point weight.
    """
    if not measure.has_continuum:
        return 0.0
    alpha = measure.alpha

    def smooth(u: float) -> float:
        # u = E - edge, kept as the variable to avoid cancellation near the edge
        if u <= 0.0:
            return 0.0
        lam = math.sqrt(2.0 * u) / alpha
        return measure.lambda_density(lam) / (alpha**2 * lam) * math.sqrt(u)

    val, err = integrate.quad(
        smooth, 0.0, E_hi - measure.continuous_edge, weight="alg", wvar=(-0.5, 0.0), epsabs=1e-15, epsrel=1e-13, limit=200
    )
    if err > 1e-11 * max(1.0, abs(val)):
        raise QuadratureError(f"energy-space integral error estimate {err:g}")
    return val


def total_mass(measure: SpectralMeasure) -> float:
    return float(np.sum(measure.weights)) + continuous_mass_lambda(measure)


@dataclass(frozen=True)
class OrthogonalityReport:
    gram: np.ndarray
    max_deviation: float
    discrete_part: np.ndarray
    continuous_part: np.ndarray

    @property
    def n_max(self) -> int:
        return self.gram.shape[0] - 1


def verify_orthogonality(
    measure: SpectralMeasure, fam, n_max: int, max_lambda: float = 4000.0
) -> OrthogonalityReport:
    """Gram matrix sum_m w_m P_j P_k + int Omega P_j P_k dE for j, k <= n_max.

    ``fam`` is any callable (E_array, n_max) -> (n_max+1, len(E)) array, such
    as a :class:`~morse_susy.orthopoly.PolyFamily`.
    """
    size = n_max + 1
    disc = np.zeros((size, size))
    if measure.discrete:
        P = np.asarray(fam(measure.energies, n_max))
        disc = (P * measure.weights) @ P.T
    cont = np.zeros((size, size))
    if measure.has_continuum:

        def envelope(lam):
            P = np.asarray(fam(measure.energy(lam), n_max))
            return np.max(P * P, axis=0)

        for x, w in lambda_panels(measure, envelope, max_lambda):
            P = np.asarray(fam(measure.energy(x), n_max))
            cont += (P * w) @ P.T
    gram = disc + cont
    dev = float(np.max(np.abs(gram - np.eye(size))))
    return OrthogonalityReport(gram, dev, disc, cont)
