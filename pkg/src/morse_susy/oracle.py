"""Brute-force validators that share no code with the closed forms.

``fd_bound_states`` diagonalises a central-difference discretisation of the
Morse Hamiltonian on a finite box; ``numeric_matrix_element`` integrates
<phi_n|H~|phi_m> by adaptive quadrature, with the kinetic term written as
1/2 <phi_n'|phi_m'>. Nothing in here imports the coefficient, polynomial or
measure code.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate, special
from scipy.linalg import eigh_tridiagonal

from .morse import MorseParams


class ConvergenceError(RuntimeError):
    pass


def _noise_floor(grid: "Grid1D") -> float:
    # eigenvalues of the discrete Laplacian carry ~eps * ||T|| ~ eps / h^2 of
    # absolute rounding noise, which dominates for weakly bound states
    return 8.0 * np.finfo(float).eps / grid.h**2


@dataclass(frozen=True)
class Grid1D:
    x_min: float
    x_max: float
    n_points: int

    @property
    def h(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points + 1)

    @property
    def x(self) -> np.ndarray:
        # interior nodes; the Dirichlet end points are excluded
        return self.x_min + self.h * np.arange(1, self.n_points + 1)

    def refined(self) -> "Grid1D":
        return Grid1D(self.x_min, self.x_max, 2 * self.n_points + 1)


def morse_potential(params: MorseParams, x):
    e = np.exp(-params.alpha * np.asarray(x, dtype=float))
    return params.V0 * (e * e - 2.0 * e)


def default_grid(params: MorseParams, x_max: float | None = None) -> Grid1D:
    """Box with the left end well up the repulsive wall (V ~ 1000) and
    spacing 0.002/alpha; ``x_max`` defaults to 14/alpha."""
    a = params.alpha
    x_min = -max(2.0, 0.5 * math.log(1000.0 / params.V0)) / a
    x_max = 14.0 / a if x_max is None else x_max
    h = 0.002 / a
    return Grid1D(x_min, x_max, int(round((x_max - x_min) / h)) - 1)


def _lowest_eigenpairs(params: MorseParams, grid: Grid1D, k: int):
    h = grid.h
    diag = 1.0 / h**2 + morse_potential(params, grid.x)
    off = np.full(grid.n_points - 1, -0.5 / h**2)
    w, v = eigh_tridiagonal(diag, off, select="i", select_range=(0, k - 1))
    return w, v


def _count_bound(params: MorseParams, grid: Grid1D) -> int:
    w = eigh_tridiagonal(
        1.0 / grid.h**2 + morse_potential(params, grid.x),
        np.full(grid.n_points - 1, -0.5 / grid.h**2),
        eigvals_only=True,
        select="v",
        select_range=(-2.0 * params.V0, -1e-9),
    )
    return len(w)


def _richardson(params: MorseParams, grid: Grid1D, k: Optional[int], rtol: float):
    # second-order scheme, error ~ h^2: extrapolate (h, h/2) and (h/2, h/4)
    # and use their difference as the error estimate of the latter
    grids = [grid, grid.refined(), grid.refined().refined()]
    if k is None:
        k = _count_bound(params, grids[-1])
    if k == 0:
        return np.empty(0), np.empty((grids[-1].n_points, 0)), grids[-1].x
    ws = []
    for g in grids:
        w, v = _lowest_eigenpairs(params, g, k)
        if np.any(w >= -1e-9):
            raise ConvergenceError("requested more states than the box binds")
        ws.append(w)
    coarse = (4.0 * ws[1] - ws[0]) / 3.0
    energies = (4.0 * ws[2] - ws[1]) / 3.0
    est = np.abs(energies - coarse)
    if np.any(est > rtol * np.abs(energies) + _noise_floor(grids[-1])):
        raise ConvergenceError(f"extrapolated energies move by {est} under refinement")
    fine = grids[-1]
    v = v / math.sqrt(fine.h)
    for j in range(k):
        if v[np.argmax(np.abs(v[:, j])), j] < 0:
            v[:, j] = -v[:, j]
    return energies, v, fine.x


def fd_bound_states(
    params: MorseParams,
    grid: Optional[Grid1D] = None,
    k: Optional[int] = None,
    rtol: float = 1e-7,
    box_rtol: float = 1e-8,
):
    """Lowest bound states of the central-difference Hamiltonian with
    Dirichlet ends.

    Energies are Richardson-extrapolated from spacings h/2 and h/4; the
    same extrapolation from h and h/2 must agree to ``rtol`` (relative).
    Vectors come from the finest grid, normalised so that sum |psi|^2 h = 1, with positive
    maximum. Without an explicit ``grid`` the right end of the box starts at
    14/alpha and is doubled until the energies move by less than
    ``box_rtol`` (relative), since the weakest state sets the tail length.
    Both tolerances are widened by the eigensolver's absolute rounding
    floor, about 8 eps / h^2 on the finest grid.

    Parameters
    ----------
    k : int, optional
        Number of states. Default: every eigenvalue below -1e-9.

    Returns
    -------
    energies, vectors, x
    """
    if grid is not None:
        return _richardson(params, grid, k, rtol)
    x_max = 14.0 / params.alpha
    prev = _richardson(params, default_grid(params, x_max), k, rtol)
    for _ in range(8):
        x_max *= 2.0
        grid = default_grid(params, x_max)
        cur = _richardson(params, grid, k, rtol)
        e0, e1 = prev[0], cur[0]
        floor = _noise_floor(grid.refined().refined())
        if len(e0) == len(e1) and np.all(np.abs(e1 - e0) <= box_rtol * np.abs(e1) + floor):
            return cur
        prev = cur
    raise ConvergenceError("bound energies did not settle as the box grew")


def _phi_and_derivative(params: MorseParams, n: int, x: float) -> tuple[float, float]:
    a, g = params.alpha, params.gamma
    t = math.sqrt(8.0 * params.V0) / a * math.exp(-a * x)
    log_pre = 0.5 * (special.gammaln(n + 1) + math.log(a) - special.gammaln(n + 2 * g + 1))
    log_env = log_pre + (g + 0.5) * math.log(t) - 0.5 * t
    if log_env < -700.0:
        return 0.0, 0.0
    env = math.exp(log_env)
    lag = special.eval_genlaguerre(n, 2 * g, t)
    dlag = -special.eval_genlaguerre(n - 1, 2 * g + 1, t) if n > 0 else 0.0
    phi = env * lag
    dphi_dt = env * (((g + 0.5) / t - 0.5) * lag + dlag)
    return phi, -a * t * dphi_dt


def _x_range(params: MorseParams) -> tuple[float, float]:
    a = params.alpha
    t0 = math.sqrt(8.0 * params.V0) / a
    x_lo = -math.log(800.0 / t0) / a
    x_hi = (80.0 / (2.0 * params.gamma + 1.0) + math.log(t0)) / a
    return x_lo, x_hi


def numeric_matrix_element(params: MorseParams, n: int, m: int, grid=None) -> float:
    """<phi_n|H~|phi_m> by adaptive quadrature.

    ``grid`` is accepted for interface symmetry and ignored: the integrand is
    evaluated pointwise with analytic first derivatives.
    """

    def integrand(x: float) -> float:
        pn, dn = _phi_and_derivative(params, n, x)
        pm, dm = _phi_and_derivative(params, m, x)
        v = float(morse_potential(params, x))
        return 0.5 * dn * dm + pn * v * pm

    x_lo, x_hi = _x_range(params)
    # split at the potential minimum and a few widths either side
    pts = sorted({x_lo, -2.0 / params.alpha, 0.0, 2.0 / params.alpha, 8.0 / params.alpha, x_hi})
    pts = [p for p in pts if x_lo <= p <= x_hi]
    total = 0.0
    for lo, hi in zip(pts[:-1], pts[1:]):
        with warnings.catch_warnings():
            # roundoff warnings at the 1e-13 floor; the error estimate is checked below
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            val, err = integrate.quad(integrand, lo, hi, epsabs=1e-13, epsrel=1e-12, limit=400)
        if err > 1e-9:
            raise ConvergenceError(f"quadrature error estimate {err:g} on [{lo:g}, {hi:g}]")
        total += val
    return total


def numeric_overlap(params: MorseParams, n: int, m: int) -> float:
    """<phi_n|phi_m> by adaptive quadrature."""
    x_lo, x_hi = _x_range(params)
    val, _ = integrate.quad(
        lambda x: _phi_and_derivative(params, n, x)[0] * _phi_and_derivative(params, m, x)[0],
        x_lo,
        x_hi,
        points=[0.0],
        epsabs=1e-13,
        epsrel=1e-12,
        limit=400,
    )
    return val
