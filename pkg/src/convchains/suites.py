"""Verification suites over deterministic parameter grids (used by the CLI and tests)."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import List

from .bd import BD_FAMILIES, bd_rates, build_K_bd, build_L, kappa_bd, tune_weights
from .cases import CASES, FINITE_CASES, SEMI_INFINITE_CASES, case_params
from .chains import build_finite, build_semi_infinite, kappa_closed
from .errors import ConvChainError
from .families import Lattice, measure, poly_table
from .selfsim import IDENTITIES, IDENTITY_IDS, verify_identity
from .spectral import check_balance, eigendecompose, kappa_sum, semi_residual, symmetrize
from .tolerances import COLUMN_TOL, EIGEN_TOL, RESIDUAL_TOL

# rational pools cycled through to form parameter points
_UNIT = [Fraction(1, 2), Fraction(1, 3), Fraction(2, 5), Fraction(3, 7), Fraction(5, 8),
         Fraction(2, 9), Fraction(3, 4), Fraction(4, 11)]
_POSITIVE = [Fraction(1, 2), Fraction(3, 2), Fraction(2, 5), Fraction(7, 3), Fraction(1),
             Fraction(5, 4), Fraction(2, 7), Fraction(3)]
_Q = [Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(3, 5)]


@dataclass
class Check:
    name: str
    ok: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return asdict(self)


# parameters restricted to (0, 1) in cases whose other parameters are merely positive
_UNIT_ONLY = {("C-conv1", "a"), ("C-conv3", "b"), ("C-iv", "a"), ("C-iv", "c"), ("C-v", "a"),
              ("C-v", "c"), ("M-i", "c"), ("M-iii", "b"), ("M-iv", "b2")}


def _pool(case: str, name: str):
    if name == "q":
        return _Q
    if CASES[case].family in ("krawtchouk", "qhahn", "qmeixner") or (case, name) in _UNIT_ONLY:
        return _UNIT
    return _POSITIVE


def parameter_grid(case: str, size: int) -> List[dict]:
    """``size`` valid rational parameter points for a case, deterministic."""
    spec = CASES[case]
    points = []
    shift = 0
    while len(points) < size and shift < 8 * size + 16:
        point = {name: _pool(case, name)[(shift + 3 * i) % len(_pool(case, name))]
                 for i, name in enumerate(spec.param_names)}
        shift += 1
        try:
            case_params(case, point)
        except ConvChainError:
            continue
        if point not in points:
            points.append(point)
    return points


def _fmt(params):
    return ",".join(f"{k}={v}" for k, v in params.items())


def verify_chains(grid: int = 2, N_max: int = 4, semi: bool = True) -> List[Check]:
    """Stochasticity, detailed balance and eigenvalue agreement for every registered case."""
    out: List[Check] = []
    for case in FINITE_CASES:
        spec = CASES[case]
        for params in parameter_grid(case, grid):
            tag = f"{case}[{_fmt(params)}]"
            lam = spec.resolve(case_params(case, params))
            for N in range(1, N_max + 1):
                K = build_finite(case, params, N)
                rows = K.rows()
                pi = measure(spec.family, lam, Lattice.finite(N)).values
                stoch = all(v >= 0 for r in rows for v in r) and all(s == 1 for s in K.column_sums())
                out.append(Check(f"{tag} N={N} stochastic", stoch))
                out.append(Check(f"{tag} N={N} detailed balance", check_balance(K, pi) == 0))
                closed = [kappa_closed(case, params, n) for n in range(N + 1)]
                summed = [kappa_sum(None, spec.family, lam, n, N, row0=rows[0]) for n in range(N + 1)]
                out.append(Check(f"{tag} N={N} closed = sum formula", closed == summed))
                numeric = eigendecompose(symmetrize(K, pi), expected=closed).kappa
                err = max(abs(a - float(b)) for a, b in zip(numeric, closed))
                out.append(Check(f"{tag} N={N} numeric spectrum", err < EIGEN_TOL, f"max error {err:.2e}"))
    if semi:
        for case in SEMI_INFINITE_CASES:
            params = parameter_grid(case, 1)[0]
            tag = f"{case}[{_fmt(params)}]"
            T = build_semi_infinite(case, params)
            d = T.meta["deficiency"]
            out.append(Check(f"{tag} column deficiency", d < COLUMN_TOL, f"{d:.2e}"))
            r = semi_residual(T)
            out.append(Check(f"{tag} eigen-relation residual", r < RESIDUAL_TOL, f"{r:.2e}"))
    return out


def verify_identities(grid: int = 2, N_max: int = 10) -> List[Check]:
    out: List[Check] = []
    for ident in IDENTITY_IDS:
        row = IDENTITIES[ident]
        for i in range(grid):
            params = {}
            for j, name in enumerate(row.param_names):
                pool = _Q if name == "q" else (_POSITIVE if row.family in ("hahn", "charlier")
                                               or (row.family == "meixner" and name != "b") else _UNIT)
                params[name] = pool[(i + 2 * j) % len(pool)]
            if row.family == "little-qjacobi":
                params["b2"] = -params["b2"]  # b < 1 allows negative values
            rep = verify_identity(ident, params, N_max)
            out.append(Check(f"{ident}[{_fmt(params)}]", rep.ok, rep.verdict))
            if row.swappable:
                rep = verify_identity(ident, params, N_max, swap=True)
                out.append(Check(f"{ident}[{_fmt(params)}] swapped", rep.ok, rep.verdict))
    return out


def verify_bd(grid: int = 2, N_max: int = 6, m_max: int = 3) -> List[Check]:
    out: List[Check] = []
    pools = {"krawtchouk": [{"p": p} for p in _UNIT],
             "hahn": [{"a": a, "b": b} for a, b in zip(_POSITIVE, _POSITIVE[3:] + _POSITIVE[:3])]}
    for family in BD_FAMILIES:
        for params in pools[family][:grid]:
            for N in range(1, N_max + 1):
                rates = bd_rates(family, params, N)
                op = build_L(rates)
                pi = measure(family, params, Lattice.finite(N)).values
                P = poly_table(family, params, N, N, N)
                for m in range(1, min(m_max, N) + 1):
                    w = tune_weights(op, m)
                    K = build_K_bd(op, m, w).rows()
                    ok = all(
                        sum(K[x][y] * pi[y] * P[n][y] for y in range(N + 1))
                        == kappa_bd(m, w, rates.E, n) * pi[x] * P[n][x]
                        for n in range(N + 1) for x in range(N + 1))
                    out.append(Check(f"BD {family}[{_fmt(params)}] N={N} m={m} eigen-relation", ok))
    return out


SUITES = {"chains": verify_chains, "identities": verify_identities, "bd": verify_bd}
