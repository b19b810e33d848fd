"""Command-line interface.

    morse-susy spectrum --V0 8 --alpha 1 --gamma 0
    morse-susy coefficients --nmax 5 --format json
    morse-susy verify --oracle

Exit codes: 0 success, 1 verification failure, 2 invalid parameters.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .morse import InvalidParameterError, MorseParams, derive_params, h_tilde_coefficients, shifted_operator
from .orthopoly import (
    eval_closed_form,
    kernel_poly,
    kernel_poly_closed,
    morse_family,
    p_at_zero,
    partner_closed_form,
    partner_family,
)
from .spectrum import (
    bound_energies,
    discrete_weights,
    measure,
    partner_measure,
    total_mass,
)
from .susy import closed_form_cd, factor_from_polynomials, partner_closed_operator, reconstruct
from .verify import VerifyContext, all_passed, corrupted_operator, factor_order, run_checks

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


@dataclass
class RunConfig:
    V0: float = 8.0
    alpha: float = 1.0
    gamma: float = 0.0
    nmax: int = 12
    emin: float = 0.0
    emax: float = 30.0
    esteps: int = 7
    format: str = "csv"

    @property
    def energy_grid(self) -> np.ndarray:
        return np.linspace(self.emin, self.emax, self.esteps)


_CASTS = {f.name: f.type for f in fields(RunConfig)}
_TYPES = {"float": float, "int": int, "str": str}


def read_config_file(path: str) -> dict[str, Any]:
    """key=value lines; blank lines and '#' comments are ignored."""
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in _CASTS:
            raise ValueError(f"{path}:{lineno}: expected one of {sorted(_CASTS)} as key=value")
        out[key] = _TYPES[_CASTS[key]](value)
    return out


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Flags override the config file, which overrides the defaults."""
    values: dict[str, Any] = {}
    if args.config:
        values.update(read_config_file(args.config))
    for name in _CASTS:
        flag = getattr(args, name, None)
        if flag is not None:
            values[name] = flag
    cfg = RunConfig(**values)
    if cfg.format not in ("csv", "json"):
        raise ValueError(f"unknown format {cfg.format!r}")
    if cfg.nmax < 0 or cfg.esteps < 1:
        raise ValueError("nmax must be >= 0 and esteps >= 1")
    return cfg


# --- output -----------------------------------------------------------------


def fmt(x: Any) -> Any:
    """15 significant digits for floats; None for missing or non-finite."""
    if x is None:
        return None
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        return None
    return float(f"{x:.15g}") + 0.0  # folds -0.0 into 0.0


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, str):
        return obj
    return fmt(obj)


def _csv_cell(v: Any) -> str:
    v = fmt(v) if not isinstance(v, str) else v
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.15g}"
    return str(v)


def render(tables: dict[str, list[dict]], cfg: RunConfig, extra: Optional[dict] = None) -> str:
    if cfg.format == "json":
        payload = {k: _clean(v) for k, v in tables.items()}
        if extra:
            payload.update(_clean(extra))
        return json.dumps(payload, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    for i, rows in enumerate(tables.values()):
        if i:
            buf.write("\n")
        if not rows:
            continue
        writer = csv.writer(buf, lineterminator="\n")
        header = list(rows[0].keys())
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(row.get(h)) for h in header])
    return buf.getvalue()


# --- commands ---------------------------------------------------------------


def cmd_spectrum(params: MorseParams, cfg: RunConfig) -> tuple[dict, dict, int]:
    bs = bound_energies(params)
    w = discrete_weights(params)
    pm = partner_measure(params)
    bound = [
        {"m": m, "energy": bs.energies[m], "unshifted_energy": bs.unshifted[m], "weight": w[m]}
        for m in range(bs.count)
    ]
    partner = [{"m": p.index, "energy": p.energy, "weight": p.weight} for p in pm.discrete]
    if cfg.format == "json":
        return {"bound_states": bound, "partner": partner}, {}, EXIT_OK
    rows = []
    for row in bound:
        m = row["m"]
        p = partner[m] if m < len(partner) else {}
        rows.append({**row, "partner_energy": p.get("energy"), "partner_weight": p.get("weight")})
    return {"spectrum": rows}, {}, EXIT_OK


def cmd_coefficients(params: MorseParams, cfg: RunConfig) -> tuple[dict, dict, int]:
    op, plus = shifted_operator(params), partner_closed_operator(params)
    rows = []
    for n in range(cfg.nmax + 1):
        c, d = closed_form_cd(params, n)
        b = op.b(n)
        rows.append(
            {
                "n": n,
                "a_tilde": h_tilde_coefficients(params, n)[0],
                "a": op.a(n),
                "b": b,
                "c": c,
                "d_next": d,
                "a_plus": plus.a(n),
                "b_plus": plus.b(n),
                "truncates": b == 0.0,
            }
        )
    return {"coefficients": rows}, {}, EXIT_OK


def _capped(order: Optional[int], nmax: int) -> int:
    return nmax if order is None else min(order, nmax)


def cmd_poly(params: MorseParams, cfg: RunConfig) -> tuple[dict, dict, int]:
    E = cfg.energy_grid
    fam, pfam = morse_family(params), partner_family(params)
    n, m = _capped(fam.natural_order, cfg.nmax), _capped(pfam.natural_order, cfg.nmax)
    P, Pp = fam(E, n), pfam(E, m)
    p0 = [p_at_zero(params, j) for j in range(n + 1)]
    rows = []
    worst = {"P": 0.0, "P_plus": 0.0, "K": 0.0}
    for j in range(n + 1):
        closed = eval_closed_form(params, E, j)
        pclosed = partner_closed_form(params, E, j) if j <= m else None
        K = kernel_poly(fam, E, j, p0)
        Kc = np.array([kernel_poly_closed(params, e, j) for e in E])
        for i, e in enumerate(E):
            row = {
                "E": e,
                "n": j,
                "P_recursion": P[j, i],
                "P_closed": closed[i],
                "P_plus_recursion": Pp[j, i] if j <= m else None,
                "P_plus_closed": pclosed[i] if j <= m else None,
                "K_recursion": K[i],
                "K_closed": Kc[i],
            }
            worst["P"] = max(worst["P"], abs(row["P_recursion"] - row["P_closed"]))
            if j <= m:
                worst["P_plus"] = max(worst["P_plus"], abs(row["P_plus_recursion"] - row["P_plus_closed"]))
            worst["K"] = max(worst["K"], abs(row["K_recursion"] - row["K_closed"]))
            rows.append(row)
    rows.sort(key=lambda r: (r["E"], r["n"]))
    summary = [{"quantity": k, "max_abs_discrepancy": v} for k, v in worst.items()]
    return {"polynomials": rows, "max_discrepancy": summary}, {}, EXIT_OK


def cmd_factor(params: MorseParams, cfg: RunConfig, operator=None) -> tuple[dict, dict, int]:
    ctx = VerifyContext(params, cfg.nmax, operator)
    n = factor_order(ctx)
    rows = []
    if n >= 0:
        p0 = [p_at_zero(params, j) for j in range(n + 2)]
        fc = factor_from_polynomials(ctx.op, p0, n, params=params, rtol=np.inf)
        a, b = reconstruct(fc, n)
        for j in range(n + 1):
            c, d = closed_form_cd(params, j)
            rows.append(
                {
                    "n": j,
                    "c": fc.c(j),
                    "d_next": fc.d(j + 1),
                    "c_closed": c,
                    "d_next_closed": d,
                    "a_reconstructed": a[j],
                    "b_reconstructed": b[j],
                    "a": ctx.op.a(j),
                    "b": ctx.op.b(j),
                }
            )
    return {"factorization": rows}, {}, EXIT_OK


def cmd_measure(params: MorseParams, cfg: RunConfig) -> tuple[dict, dict, int]:
    rows, totals = [], []
    for label, mu in (("H", measure(params)), ("H+", partner_measure(params))):
        for p in mu.discrete:
            rows.append({"family": label, "kind": "discrete", "index": p.index, "energy": p.energy, "value": p.weight})
        for e in cfg.energy_grid:
            if e > mu.continuous_edge:
                rows.append({"family": label, "kind": "density", "index": None, "energy": e, "value": mu.density(e)})
        totals.append(
            {
                "family": label,
                "continuous_edge": mu.continuous_edge,
                "discrete_mass": float(np.sum(mu.weights)) if mu.discrete else 0.0,
                "total_mass": total_mass(mu),
            }
        )
    return {"measure": rows, "totals": totals}, {}, EXIT_OK


def cmd_verify(params: MorseParams, cfg: RunConfig, oracle: bool = False, operator=None) -> tuple[dict, dict, int]:
    results = run_checks(VerifyContext(params, cfg.nmax, operator), with_oracle=oracle)
    rows = [
        {"check": r.name, "passed": r.passed, "max_deviation": r.max_deviation, "tolerance": r.tolerance, "detail": r.detail}
        for r in results
    ]
    ok = all_passed(results)
    return {"checks": rows}, {"all_passed": ok}, EXIT_OK if ok else EXIT_FAIL


# --- entry point ------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--V0", type=float, help="well depth (default 8)")
    common.add_argument("--alpha", type=float, help="range parameter (default 1)")
    common.add_argument("--gamma", type=float, help="basis parameter, 2*gamma > -1 (default 0)")
    common.add_argument("--nmax", type=int, help="highest order (default 12)")
    common.add_argument("--emin", type=float, help="energy grid start (default 0)")
    common.add_argument("--emax", type=float, help="energy grid end (default 30)")
    common.add_argument("--esteps", type=int, help="energy grid points (default 7)")
    common.add_argument("--format", choices=("csv", "json"), help="output format (default csv)")
    common.add_argument("--config", help="file of key=value lines")

    parser = argparse.ArgumentParser(prog="morse-susy", description="Morse oscillator tridiagonal/SUSY toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (
        ("spectrum", "bound and partner energies with weights"),
        ("coefficients", "tridiagonal and factorisation coefficients"),
        ("poly", "polynomials and kernel on the energy grid"),
        ("factor", "factorisation from the polynomial values at 0"),
        ("measure", "spectral measures of both families"),
        ("verify", "run the verification suite"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        if name == "verify":
            p.add_argument("--oracle", action="store_true", help="add finite-difference and quadrature checks")
        if name in ("verify", "factor"):
            p.add_argument("--corrupt-b", type=int, default=None, help=argparse.SUPPRESS)
    return parser


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "coefficients": cmd_coefficients,
    "poly": cmd_poly,
    "factor": cmd_factor,
    "measure": cmd_measure,
    "verify": cmd_verify,
}


def main(argv: Optional[Sequence[str]] = None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        params = derive_params(cfg.V0, cfg.alpha, cfg.gamma)
    except (InvalidParameterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    kwargs: dict[str, Any] = {}
    if getattr(args, "corrupt_b", None) is not None:
        kwargs["operator"] = corrupted_operator(params, args.corrupt_b)
    if args.command == "verify":
        kwargs["oracle"] = args.oracle
    try:
        tables, extra, code = _COMMANDS[args.command](params, cfg, **kwargs)
    except ArithmeticError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    stdout.write(render(tables, cfg, extra))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
