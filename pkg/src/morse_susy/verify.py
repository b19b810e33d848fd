"""Verification suite: every cross-check between closed forms, recursions,
factorisation, measures and (optionally) the brute-force oracles, returned
as a list of pass/fail records."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import oracle
from .morse import MorseParams, TridiagonalOperator, h_tilde_coefficients, shifted_operator
from .orthopoly import (
    PolyFamily,
    christoffel_darboux_residual,
    default_kernel_grid,
    eval_closed_form,
    kernel_poly,
    kernel_poly_closed,
    kernel_relation_check,
    p_at_zero,
    partner_closed_form,
    partner_family,
    ProportionalityError,
)
from .specfun import Hyp3F2Params, kernel_sum_identity_check, thomae_check
from .spectrum import (
    bound_energies,
    bound_state_count,
    bound_energy,
    measure,
    partner_measure,
    total_mass,
    truncation_eigenvalues,
    truncation_gamma,
    verify_orthogonality,
)
from .susy import (
    closed_form_cd,
    factor_from_polynomials,
    partner_closed_operator,
    partner_operator,
    reconstruct,
    shape_invariance_residual,
)

KERNEL_MAX_ORDER = 10
ORACLE_MAX_INDEX = 10
IDENTITY_DRAWS = 120


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    max_deviation: float
    tolerance: float
    detail: str = ""


@dataclass(frozen=True)
class VerifyContext:
    params: MorseParams
    n_max: int = 12
    operator: Optional[TridiagonalOperator] = None
    seed: int = 20240101

    @property
    def op(self) -> TridiagonalOperator:
        return self.operator or shifted_operator(self.params)

    @property
    def family(self) -> PolyFamily:
        return PolyFamily(self.op, "recursion", self.params)

    @property
    def partner(self) -> PolyFamily:
        return partner_family(self.params)

    def order(self, fam: PolyFamily) -> int:
        nat = fam.natural_order
        return self.n_max if nat is None else min(self.n_max, nat)

    def energy_grid(self, points: int = 31) -> np.ndarray:
        return np.linspace(0.0, 30.0 * self.params.alpha**2, points)


def corrupted_operator(params: MorseParams, index: int = 1, factor: float = 1.0 + 1e-6) -> TridiagonalOperator:
    """Shifted operator with b_index scaled by ``factor``; a negative test hook."""
    base = shifted_operator(params)
    return TridiagonalOperator(
        diag=base.diag,
        offdiag=lambda n: base.offdiag(n) * (factor if n == index else 1.0),
        label="H (corrupted)",
    )


def _result(name: str, dev: float, tol: float, detail: str = "") -> CheckResult:
    dev = float(dev)
    return CheckResult(name, bool(dev <= tol), dev, tol, detail)


def _guard(name: str, tol: float, fn: Callable[[], CheckResult]) -> CheckResult:
    try:
        return fn()
    except (ArithmeticError, AssertionError, ValueError) as exc:
        return CheckResult(name, False, float("inf"), tol, f"{type(exc).__name__}: {exc}")


def check_truncation_spectrum(ctx: VerifyContext) -> CheckResult:
    bs = bound_energies(ctx.params, rtol=np.inf)
    scale = np.maximum(np.abs(bs.energies), ctx.params.alpha**2)
    dev = np.max(np.abs(bs.truncation_eigenvalues - bs.energies) / scale)
    return _result("truncation_spectrum", dev, 1e-10, f"N = {bs.count} at gamma = {bs.truncation_gamma:.15g}")


def check_partner_spectrum(ctx: VerifyContext) -> CheckResult:
    p = ctx.params
    n = bound_state_count(p)
    if n < 2:
        return _result("partner_spectrum", 0.0, 1e-10, "no partner bound states")
    tp = p.with_gamma(truncation_gamma(p, n))
    w = truncation_eigenvalues(partner_closed_operator(tp), n - 1)
    want = np.array([bound_energy(p, m) for m in range(1, n)])
    dev = np.max(np.abs(w - want) / np.maximum(np.abs(want), p.alpha**2))
    return _result("partner_spectrum", dev, 1e-10, f"{n - 1} x {n - 1} block")


def factor_order(ctx: VerifyContext) -> int:
    """Largest n for which c_n, d_{n+1} follow from P_n(0), P_{n+1}(0)."""
    nat = ctx.family.natural_order
    return ctx.n_max if nat is None else min(ctx.n_max, nat - 1)


def check_factorization(ctx: VerifyContext) -> CheckResult:
    n = factor_order(ctx)
    if n < 0:
        return _result("factorization", 0.0, 1e-12, "1 x 1 block: nothing to factor")
    p0 = [p_at_zero(ctx.params, j) for j in range(n + 2)]
    fc = factor_from_polynomials(ctx.op, p0, n, params=ctx.params, rtol=np.inf)
    dev = 0.0
    for j in range(n + 1):
        c, d = closed_form_cd(ctx.params, j)
        dev = max(dev, abs(fc.c(j) - c) / max(1.0, abs(c)), abs(fc.d(j + 1) - d) / max(1.0, abs(d)))
    a, b = reconstruct(fc, n)
    want_a, want_b = ctx.op.bands(n + 2)
    dev = max(dev, np.max(np.abs(a - want_a[: n + 1]) / np.maximum(1.0, np.abs(want_a[: n + 1]))))
    dev = max(dev, np.max(np.abs(b - want_b[: n + 1]) / np.maximum(1.0, np.abs(want_b[: n + 1]))))
    plus, closed_plus = partner_operator(fc), partner_closed_operator(ctx.params)
    for j in range(n):
        dev = max(dev, abs(plus.a(j) - closed_plus.a(j)) / max(1.0, abs(closed_plus.a(j))))
        dev = max(dev, abs(plus.b(j) - closed_plus.b(j)) / max(1.0, abs(closed_plus.b(j))))
    return _result("factorization", dev, 1e-12, f"n <= {n}")


def check_shape_invariance(ctx: VerifyContext) -> CheckResult:
    db, da = shape_invariance_residual(ctx.params, ctx.n_max)
    scale = ctx.params.alpha**2 * (ctx.n_max + 1) ** 2
    return _result("shape_invariance", max(db, da) / scale, 1e-12)


def _max_rel(x: np.ndarray, y: np.ndarray) -> float:
    return float(np.max(np.abs(x - y) / np.maximum(1.0, np.abs(y))))


def check_closed_forms(ctx: VerifyContext) -> CheckResult:
    E = ctx.energy_grid()
    n = ctx.order(ctx.family)
    rec = ctx.family(E, n)
    dev = max(_max_rel(eval_closed_form(ctx.params, E, j), rec[j]) for j in range(n + 1))
    m = ctx.order(ctx.partner)
    prec = ctx.partner(E, m)
    dev = max(dev, max(_max_rel(partner_closed_form(ctx.params, E, j), prec[j]) for j in range(m + 1)))
    return _result("closed_forms", dev, 1e-10, f"P_n for n <= {n}, P+_n for n <= {m}")


def kernel_order(ctx: VerifyContext) -> int:
    return min(KERNEL_MAX_ORDER, ctx.order(ctx.partner), ctx.order(ctx.family) - 1)


def check_kernel_relation(ctx: VerifyContext) -> CheckResult:
    n = kernel_order(ctx)
    try:
        rows = kernel_relation_check(ctx.family, ctx.partner, n, params=ctx.params)
    except ProportionalityError as exc:
        return CheckResult("kernel_relation", False, float("inf"), 1e-10, str(exc))
    res = max(r.residual for r in rows)
    rho = max(r.rho_error for r in rows)
    # residual tolerance is 1e-9, rho tolerance 1e-10; report the rho error
    passed = res <= 1e-9 and rho <= 1e-10
    return CheckResult("kernel_relation", passed, rho, 1e-10, f"n <= {n}, fit residual {res:.3g}")


def check_christoffel_darboux(ctx: VerifyContext) -> CheckResult:
    n = kernel_order(ctx)
    E = default_kernel_grid(ctx.params)
    dev = max(christoffel_darboux_residual(ctx.family, E, j) for j in range(n + 1))
    return _result("christoffel_darboux", dev, 1e-9, f"n <= {n}")


def check_kernel_forms(ctx: VerifyContext) -> CheckResult:
    n = kernel_order(ctx)
    E = ctx.energy_grid(16)
    p0 = [p_at_zero(ctx.params, j) for j in range(n + 1)]
    dev = 0.0
    for j in range(n + 1):
        direct = kernel_poly(ctx.family, E, j, p0)
        closed = np.array([kernel_poly_closed(ctx.params, e, j) for e in E])
        dev = max(dev, _max_rel(direct, closed))
    return _result("kernel_forms", dev, 1e-10, f"n <= {n}")


def identity_draws(rng: np.random.Generator, count: int):
    """Yield (sigma, Hyp3F2Params) with no pole in either side of the Thomae
    relation or in the partial-sum formula."""
    made = 0
    while made < count:
        n = int(rng.integers(0, 11))
        if rng.random() < 0.5:
            u, v = rng.uniform(-3, 3), rng.uniform(0, 3)
            b, c = complex(u, v), complex(u, -v)
        else:
            b, c = float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3))
        d, e = float(rng.uniform(0.5, 5)), float(rng.uniform(0.5, 5))
        s = complex(d + e - b - c)
        if min(abs(s + j) for j in range(max(n, 1))) < 0.1:
            continue
        sigma = float(rng.uniform(-2, 3))
        made += 1
        yield sigma, Hyp3F2Params(n, b, c, d, e)


def check_identities(ctx: VerifyContext) -> list[CheckResult]:
    rng = np.random.default_rng(ctx.seed)
    thomae, summation = 0.0, 0.0
    for sigma, p in identity_draws(rng, IDENTITY_DRAWS):
        thomae = max(thomae, thomae_check(p)[1])
        summation = max(summation, kernel_sum_identity_check(sigma, p.n, p)[1])
    detail = f"{IDENTITY_DRAWS} random draws"
    return [_result("thomae_identity", thomae, 1e-11, detail), _result("summation_identity", summation, 1e-11, detail)]


def check_mass(ctx: VerifyContext) -> CheckResult:
    dev = max(abs(total_mass(measure(ctx.params)) - 1.0), abs(total_mass(partner_measure(ctx.params)) - 1.0))
    return _result("measure_mass", dev, 1e-8)


def check_gram(ctx: VerifyContext) -> CheckResult:
    n, m = ctx.order(ctx.family), ctx.order(ctx.partner)
    dev = max(
        verify_orthogonality(measure(ctx.params), ctx.family, n).max_deviation,
        verify_orthogonality(partner_measure(ctx.params), ctx.partner, m).max_deviation,
    )
    return _result("gram", dev, 1e-8, f"orders <= {n} (H), <= {m} (H+)")


def check_oracle_energies(ctx: VerifyContext) -> CheckResult:
    want = bound_energies(ctx.params, rtol=np.inf).unshifted
    got, _, _ = oracle.fd_bound_states(ctx.params)
    if len(got) != len(want):
        return CheckResult("oracle_energies", False, float("inf"), 1e-6, f"{len(got)} states vs {len(want)}")
    return _result("oracle_energies", np.max(np.abs(got - want) / np.abs(want)), 1e-6, f"{len(got)} bound states")


def check_oracle_matrix_elements(ctx: VerifyContext) -> CheckResult:
    n = min(ORACLE_MAX_INDEX, ctx.n_max)
    dev = 0.0
    for i in range(n + 1):
        for j in range(i, n + 1):
            got = oracle.numeric_matrix_element(ctx.params, i, j)
            if i == j:
                want, tol = h_tilde_coefficients(ctx.params, i)[0], 1e-6
            elif j == i + 1:
                want, tol = h_tilde_coefficients(ctx.params, i)[1], 1e-6
            else:
                want, tol = 0.0, 1e-8
            # both tolerances expressed as a fraction of the 1e-6 budget
            dev = max(dev, abs(got - want) / ctx.params.alpha**2 * 1e-6 / tol)
    return _result("oracle_matrix_elements", dev, 1e-6, f"n, m <= {n}")


def run_checks(ctx: VerifyContext, with_oracle: bool = False) -> list[CheckResult]:
    single = [
        ("truncation_spectrum", 1e-10, check_truncation_spectrum),
        ("partner_spectrum", 1e-10, check_partner_spectrum),
        ("factorization", 1e-12, check_factorization),
        ("shape_invariance", 1e-12, check_shape_invariance),
        ("closed_forms", 1e-10, check_closed_forms),
        ("kernel_relation", 1e-10, check_kernel_relation),
        ("christoffel_darboux", 1e-9, check_christoffel_darboux),
        ("kernel_forms", 1e-10, check_kernel_forms),
        ("measure_mass", 1e-8, check_mass),
        ("gram", 1e-8, check_gram),
    ]
    if with_oracle:
        single += [
            ("oracle_energies", 1e-6, check_oracle_energies),
            ("oracle_matrix_elements", 1e-6, check_oracle_matrix_elements),
        ]
    out = [_guard(name, tol, lambda fn=fn: fn(ctx)) for name, tol, fn in single]
    try:
        out[4:4] = check_identities(ctx)
    except (ArithmeticError, ValueError) as exc:
        out.insert(4, CheckResult("identities", False, float("inf"), 1e-11, str(exc)))
    return out


def all_passed(results: list[CheckResult]) -> bool:
    return all(r.passed for r in results)
