"""Command-line interface.

Matrices are written as CSV (rows ``x``, columns ``y``, header of ``y``
indices; rationals as ``num/den``, floats as shortest round-trip decimals).
Spectra, evolutions, samples and verification reports are JSON documents
with at least the fields ``case, params, lambda, kappa, provenance, checks``.

Exit status: 0 on success, 1 when a check fails, 2 on invalid input or a
domain error (reported as JSON on stderr).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import List, Optional

from . import __version__
from .bd import bd_rates, build_K_bd, build_L, kappa_bd, tune_weights
from .cases import CASES, get_case
from .chains import (
    build_dual,
    build_finite,
    build_multiple,
    build_semi_infinite,
    case_params,
    deformed_params,
    kappa_closed,
    kappa_minus,
)
from .errors import ConvChainError
from .families import Lattice, measure
from .numerics import EXACT, FLOAT, format_scalar
from .spectral import (
    check_balance,
    closed_spectrum,
    eigendecompose,
    evolve,
    evolve_matrix,
    kappa_sum,
    sample_paths,
    semi_residual,
    symmetrize,
    total_variation,
)
from .suites import SUITES
from .tolerances import COLUMN_TOL, EIGEN_TOL, RESIDUAL_TOL, TAIL_TOL

CONFIG_KEYS = {"case", "params", "N", "trunc_tol", "backend", "pattern", "t", "l", "count", "seed",
               "out", "p0", "family", "m", "t_S", "suite", "grid", "format", "n_max"}


class CLIError(Exception):
    pass


# ---------------------------------------------------------------- parsing

def parse_value(text, backend: Optional[str] = None):
    """``"num/den"`` and integers are exact; decimals are floats unless the exact backend is forced."""
    if isinstance(text, (int, Fraction)) and not isinstance(text, bool):
        value = Fraction(text)
    elif isinstance(text, float):
        value = text
    else:
        s = str(text).strip()
        try:
            value = float(s) if any(ch in s for ch in ".eE") else Fraction(s)
        except ValueError:
            raise CLIError(f"cannot parse number {text!r}") from None
    if backend == EXACT:
        return Fraction(value)
    if backend == FLOAT:
        return float(value)
    return value


def parse_params(items, backend=None) -> dict:
    if items is None:
        return {}
    if isinstance(items, dict):
        return {k: parse_value(v, backend) for k, v in items.items()}
    out = {}
    for item in items:
        if "=" not in item:
            raise CLIError(f"parameter {item!r} is not of the form name=value")
        k, v = item.split("=", 1)
        out[k.strip()] = parse_value(v, backend)
    return out


def load_config(args) -> dict:
    """Merge a JSON config document with command-line flags (flags win)."""
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            doc = json.load(fh)
        if not isinstance(doc, dict):
            raise CLIError("config document must be a JSON object")
        unknown = set(doc) - CONFIG_KEYS
        if unknown:
            raise CLIError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(doc)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    backend = cfg.get("backend")
    if backend not in (None, EXACT, FLOAT):
        raise CLIError(f"backend must be 'exact' or 'float', not {backend!r}")
    cfg["params"] = parse_params(cfg.get("params"), backend)
    return cfg


def _require(cfg, *keys):
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise CLIError(f"missing required settings: {missing}")


def _p0(cfg, size):
    if cfg.get("p0") is None:
        return [Fraction(1)] + [Fraction(0)] * (size - 1)
    raw = cfg["p0"]
    items = raw.split(",") if isinstance(raw, str) else raw
    values = [parse_value(v, cfg.get("backend")) for v in items]
    if len(values) != size:
        raise CLIError(f"initial distribution needs {size} entries, got {len(values)}")
    return values


# ---------------------------------------------------------------- output

def matrix_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    n = len(rows[0])
    w.writerow(["x\\y"] + [str(y) for y in range(n)])
    for x, row in enumerate(rows):
        w.writerow([str(x)] + [format_scalar(v) for v in row])
    return buf.getvalue()


def parse_matrix_csv(text: str) -> list:
    """Inverse of :func:`matrix_csv`; rationals come back as Fractions, decimals as floats."""
    reader = csv.reader(io.StringIO(text))
    next(reader)
    return [[parse_value(v) for v in row[1:]] for row in reader if row]


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return format_scalar(value)
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value
    try:
        return float(value)
    except (TypeError, ValueError):
        return str(value)


def emit(text: str, cfg: dict):
    out = cfg.get("out")
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def emit_json(doc: dict, cfg: dict):
    emit(json.dumps(_jsonable(doc), indent=2) + "\n", cfg)


def _check(name, ok, detail=""):
    return {"name": name, "ok": bool(ok), "detail": detail}


def _status(checks) -> int:
    return 0 if all(c["ok"] for c in checks) else 1


# ---------------------------------------------------------------- chain construction

def _lattice(cfg, spec):
    if spec.finite:
        _require(cfg, "N")
        return Lattice.finite(int(cfg["N"]))
    return Lattice.semi_infinite(float(cfg.get("trunc_tol") or TAIL_TOL))


def _chain(cfg):
    """Build the configured chain; returns ``(matrix, case_label, params, lambda, pi)``."""
    _require(cfg, "case")
    case = cfg["case"]
    params = dict(cfg["params"])
    if case == "MULTI":
        _require(cfg, "pattern", "N")
        signs = list(cfg["pattern"].replace(",", "")) if isinstance(cfg["pattern"], str) else cfg["pattern"]
        ps = [params[f"p{j + 1}"] for j in range(len(signs))]
        mc = build_multiple(signs, ps, int(cfg["N"]))
        lam = {"p": mc.p}
        pi = measure("krawtchouk", lam, Lattice.finite(int(cfg["N"]))).values
        return mc.matrix, mc, params, lam, pi
    spec = get_case(case)
    if cfg.get("t") is not None:
        params = deformed_params(case, params, parse_value(cfg["t"], cfg.get("backend")))
    lattice = _lattice(cfg, spec)
    v = case_params(case, params)
    lam = spec.resolve(v)
    if spec.finite:
        K = build_finite(case, params, lattice.N, cfg.get("backend"))
        pi = measure(spec.family, lam, lattice).values
    else:
        K = build_semi_infinite(case, params, lattice, n_max=int(cfg.get("n_max") or 10))
        pi = None
    return K, spec, params, lam, pi


# ---------------------------------------------------------------- commands

def cmd_build(cfg) -> int:
    K, _, _, _, _ = _chain(cfg)
    text = matrix_csv(K.rows())
    if parse_matrix_csv(text) != [[parse_value(format_scalar(v)) for v in r] for r in K.rows()]:
        raise CLIError("matrix failed its CSV round trip")
    emit(text, cfg)
    return 0


def cmd_spectrum(cfg) -> int:
    K, spec, params, lam, pi = _chain(cfg)
    checks = []
    doc = {"case": cfg["case"], "params": params, "lambda": lam}
    if cfg["case"] == "MULTI":
        N = int(cfg["N"])
        kappa = [spec.kappa(n) for n in range(N + 1)]
        numeric = eigendecompose(symmetrize(K, pi), expected=kappa).kappa
        err = max(abs(a - float(b)) for a, b in zip(numeric, kappa))
        checks.append(_check("numeric spectrum", err < EIGEN_TOL, f"max error {err:.3e}"))
        doc.update(kappa=kappa, provenance="closed-form", checks=checks)
    elif spec.finite:
        N = K.lattice.N
        kappa = [kappa_closed(spec.case, params, n) for n in range(N + 1)]
        rows = K.rows()
        summed = [kappa_sum(None, spec.family, lam, n, N, row0=rows[0]) for n in range(N + 1)]
        checks.append(_check("stochastic", all(v >= 0 for r in rows for v in r)
                             and all(abs(s - 1) <= (0 if K.backend == EXACT else 1e-12)
                                     for s in K.column_sums())))
        bal = check_balance(K, pi)
        checks.append(_check("detailed balance", bal == 0 if K.backend == EXACT else bal < 1e-12))
        same = (kappa == summed) if K.backend == EXACT else max(
            abs(float(a) - float(b)) for a, b in zip(kappa, summed)) < EIGEN_TOL
        checks.append(_check("closed form = sum formula", same))
        numeric = eigendecompose(symmetrize(K, pi), expected=kappa).kappa
        err = max(abs(a - float(b)) for a, b in zip(numeric, kappa))
        checks.append(_check("numeric spectrum", err < EIGEN_TOL, f"max error {err:.3e}"))
        doc.update(kappa=kappa, provenance="closed-form", checks=checks)
    else:
        n_max = int(cfg.get("n_max") or 10)
        kappa = [kappa_closed(spec.case, params, n) for n in range(n_max + 1)]
        d = K.meta["deficiency"]
        checks.append(_check("column deficiency", d < COLUMN_TOL, f"{d:.3e}"))
        r = semi_residual(K, n_max)
        checks.append(_check("eigen-relation residual", r < RESIDUAL_TOL, f"{r:.3e}"))
        doc.update(kappa=kappa, provenance="closed-form", checks=checks,
                   x_max=K.meta["x_max"], size=K.size - 1)
        if spec.kappa_minus is not None:
            doc["kappa_minus"] = [kappa_minus(spec.case, params, n) for n in range(n_max + 1)]
    emit_json(doc, cfg)
    return _status(checks)


def _finite_only(K, what):
    if not K.lattice.is_finite:
        raise CLIError(f"{what} needs a finite-lattice chain")


def cmd_evolve(cfg) -> int:
    _require(cfg, "l")
    K, spec, params, lam, pi = _chain(cfg)
    _finite_only(K, "evolve")
    steps = int(cfg["l"])
    P0 = _p0(cfg, K.size)
    direct = evolve_matrix(K, P0, steps)
    checks = []
    doc = {"case": cfg["case"], "params": params, "lambda": lam, "l": steps}
    if cfg["case"] != "MULTI" and K.backend == EXACT:
        res = evolve(closed_spectrum(spec.case, params, K.lattice.N), P0, steps)
        checks.append(_check("spectral = matrix power", res.distribution == direct))
        doc.update(kappa=[kappa_closed(spec.case, params, n) for n in range(K.size)],
                   coefficients=res.coefficients)
    doc.update(distribution=direct, provenance="matrix-power", checks=checks)
    emit_json(doc, cfg)
    return _status(checks)


def cmd_sample(cfg) -> int:
    _require(cfg, "l", "count", "seed")
    K, spec, params, lam, pi = _chain(cfg)
    _finite_only(K, "sample")
    steps, count, seed = int(cfg["l"]), int(cfg["count"]), int(cfg["seed"])
    P0 = _p0(cfg, K.size)
    empirical = sample_paths(K, P0, steps, count, seed)
    exact = evolve_matrix(K, P0, steps)
    tv = total_variation(empirical, exact)
    doc = {"case": cfg["case"], "params": params, "lambda": lam, "l": steps, "count": count,
           "seed": seed, "empirical": empirical, "exact": exact, "total_variation": tv,
           "provenance": "monte-carlo", "checks": []}
    emit_json(doc, cfg)
    return 0


def cmd_dual(cfg) -> int:
    _require(cfg, "case", "N")
    case = cfg["case"]
    N = int(cfg["N"])
    params = cfg["params"]
    Kd = build_dual(case, params, N, cfg.get("backend"))
    K = build_finite(case, params, N, cfg.get("backend")).rows()
    rows = Kd.rows()
    ok = all(rows[x][y] == K[N - x][N - y] for x in range(N + 1) for y in range(N + 1))
    if not ok:
        sys.stderr.write(json.dumps({"error": "CheckFailed", "case": case,
                                     "message": "dual matrix differs from the index reversal"}) + "\n")
    emit(matrix_csv(rows), cfg)
    return 0 if ok else 1


def cmd_bd(cfg) -> int:
    _require(cfg, "family", "N", "m")
    family, N, m = cfg["family"], int(cfg["N"]), int(cfg["m"])
    rates = bd_rates(family, cfg["params"], N)
    op = build_L(rates)
    t_S = parse_value(cfg["t_S"], cfg.get("backend")) if cfg.get("t_S") is not None else None
    w = tune_weights(op, m, t_S)
    K = build_K_bd(op, m, w)
    if cfg.get("format") == "json":
        emit_json({"family": family, "params": cfg["params"], "N": N, "m": m, "c": w.c,
                   "t_S": w.t_S, "kappa": [kappa_bd(m, w, rates.E, n) for n in range(N + 1)],
                   "matrix": [[format_scalar(v) for v in r] for r in K.rows()],
                   "provenance": "closed-form", "checks": []}, cfg)
    else:
        emit(matrix_csv(K.rows()), cfg)
    return 0


def cmd_verify(cfg) -> int:
    suite = cfg.get("suite") or "all"
    grid = int(cfg.get("grid") or 2)
    names = list(SUITES) if suite == "all" else [suite]
    checks = []
    for name in names:
        if name not in SUITES:
            raise CLIError(f"unknown suite {name!r}; choose from {sorted(SUITES)} or 'all'")
        checks += [c.as_dict() for c in SUITES[name](grid)]
    failed = [c for c in checks if not c["ok"]]
    doc = {"suite": suite, "grid": grid, "checked": len(checks), "failed": len(failed),
           "checks": failed if failed else [], "provenance": "verification"}
    emit_json(doc, cfg)
    return 1 if failed else 0


COMMANDS = {"build": cmd_build, "spectrum": cmd_spectrum, "evolve": cmd_evolve, "sample": cmd_sample,
            "verify": cmd_verify, "dual": cmd_dual, "bd": cmd_bd}


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="convchains",
                                     description="Exactly solvable Markov chains built by convolutions.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config document; flags override its values")
    common.add_argument("--case", help=f"case id ({', '.join(k for k, s in CASES.items() if not s.rejected)}, MULTI)")
    common.add_argument("--params", nargs="+", metavar="K=V", help="parameters, e.g. a=1/2 b=0.25")
    common.add_argument("--N", type=int, help="lattice size of finite chains")
    common.add_argument("--trunc-tol", dest="trunc_tol", type=float, help="tail tolerance of semi-infinite chains")
    common.add_argument("--backend", choices=[EXACT, FLOAT])
    common.add_argument("--pattern", help="sign pattern of a MULTI chain, e.g. +-+ (p1, p2, ... in --params)")
    common.add_argument("--t", help="deformation parameter of a commuting family")
    common.add_argument("--l", type=int, help="number of steps")
    common.add_argument("--count", type=int, help="number of sampled trajectories")
    common.add_argument("--seed", type=int, help="sampler seed")
    common.add_argument("--p0", help="initial distribution as comma-separated values (default: delta at 0)")
    common.add_argument("--out", help="write output to this file instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("build", "spectrum", "evolve", "sample", "dual"):
        sub.add_parser(name, parents=[common])
    p = sub.add_parser("verify", parents=[common])
    p.add_argument("suite", nargs="?", choices=list(SUITES) + ["all"])
    p.add_argument("--grid", type=int, help="parameter points per case (default 2)")
    p = sub.add_parser("bd", parents=[common])
    p.add_argument("--family", choices=["krawtchouk", "hahn"])
    p.add_argument("--m", type=int, help="band width")
    p.add_argument("--t-S", dest="t_S", help="time scale (default 1/(2 max(-X(x,x))))")
    p.add_argument("--format", choices=["csv", "json"])
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = load_config(args)
        return COMMANDS[args.command](cfg)
    except (CLIError, ConvChainError, ValueError, ZeroDivisionError, ArithmeticError, KeyError, OSError) as exc:
        err = {"error": type(exc).__name__, "message": str(exc)}
        if getattr(args, "case", None):
            err["case"] = args.case
        if getattr(args, "params", None):
            err["params"] = args.params
        sys.stderr.write(json.dumps(err) + "\n")
        return 2
