"""Banded chains from powers of a birth-death generator.

``L`` is the tridiagonal generator with ``L(x+1, x) = B(x)``,
``L(x-1, x) = D(x)`` and zero column sums. Its eigenvectors are
``pi(x) P_n(x)`` with eigenvalue ``-E(n)``. For ``m >= 1`` the matrix

    X = sum_{j=0}^{m-1} c_j L^{m-j},   c_0 = 1,

is banded with width ``m`` and shares those eigenvectors. With weights
chosen so that every off-diagonal entry of ``X`` inside the band is positive,
``K = I + t_S X`` is a column-stochastic matrix for small enough ``t_S``, and

    kappa(n) = 1 + t_S sum_j (-1)^{m-j} c_j E(n)^{m-j}.

All quantities stay rational for rational parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List

from .chains import TransitionMatrix
from .errors import DomainError, RatesError, TuningError
from .families import Lattice, _poly, validate
from .linalg import matmul
from .numerics import EXACT, backend_of, one_like

BD_FAMILIES = ("krawtchouk", "hahn")
SAFETY = 2  # factor applied to the smallest feasible weight


@dataclass
class BDRates:
    family: str
    params: dict
    N: int
    B: list
    D: list
    eigfun: Callable[[int], object]

    def E(self, n: int):
        return self.eigfun(n)


@dataclass
class BDOperator:
    L: list
    rates: BDRates

    @property
    def N(self) -> int:
        return self.rates.N

    def power(self, m: int) -> list:
        out = self.L
        for _ in range(m - 1):
            out = matmul(self.L, out)
        return out


@dataclass
class WeightVector:
    c: List
    t_S: object
    X: list = field(repr=False, default=None)

    @property
    def m(self) -> int:
        return len(self.c)


def _rates(family, v, N):
    if family == "krawtchouk":
        p = v["p"]
        B = [p * (N - x) for x in range(N + 1)]
        D = [(1 - p) * x for x in range(N + 1)]
        return B, D, lambda n: n * one_like(p)
    a, b = v["a"], v["b"]
    B = [(x + a) * (N - x) for x in range(N + 1)]
    D = [x * (b + N - x) for x in range(N + 1)]
    return B, D, lambda n: n * (n + a + b - 1)


def check_difference_equation(rates: BDRates) -> list:
    """``(n, x)`` points where ``B(x)(P_n(x) - P_n(x+1)) + D(x)(P_n(x) - P_n(x-1)) != E(n) P_n(x)``."""
    v, N = rates.params, rates.N
    P = [[_poly(rates.family, v, n, x, N) for x in range(N + 1)] for n in range(N + 1)]
    exact = backend_of(*v.values()) == EXACT
    bad = []
    for n in range(N + 1):
        row = P[n]
        for x in range(N + 1):
            up = row[x + 1] if x < N else 0
            down = row[x - 1] if x > 0 else 0
            lhs = rates.B[x] * (row[x] - up) + rates.D[x] * (row[x] - down)
            rhs = rates.E(n) * row[x]
            ok = lhs == rhs if exact else abs(float(lhs - rhs)) <= 1e-10 * max(1.0, abs(float(rhs)))
            if not ok:
                bad.append((n, x))
    return bad


def bd_rates(family: str, params: dict, N: int) -> BDRates:
    """Birth and death rates and the eigenvalue function for Krawtchouk or Hahn.

    The difference equation is checked at every ``(n, x)`` before returning;
    a mismatch raises :class:`RatesError`.
    """
    if family not in BD_FAMILIES:
        raise DomainError(f"birth-death rates available for {BD_FAMILIES}, not {family!r}")
    if N < 1:
        raise DomainError("N must be at least 1")
    v = validate(family, params)
    B, D, E = _rates(family, v, N)
    rates = BDRates(family, v, N, B, D, E)
    bad = check_difference_equation(rates)
    if bad:
        raise RatesError(f"{family}: difference equation fails at (n, x) = {bad[0]}")
    return rates


def build_L(rates: BDRates) -> BDOperator:
    """Tridiagonal generator ``L(x+1,x) = B(x)``, ``L(x-1,x) = D(x)``, ``L(x,x) = -B(x) - D(x)``."""
    N = rates.N
    zero = 0 * rates.B[0]
    L = [[zero] * (N + 1) for _ in range(N + 1)]
    for x in range(N + 1):
        L[x][x] = -rates.B[x] - rates.D[x]
        if x < N:
            L[x + 1][x] = rates.B[x]
        if x > 0:
            L[x - 1][x] = rates.D[x]
    return BDOperator(L, rates)


def sign_pattern_violations(op: BDOperator, m: int) -> list:
    """Entries of ``L^m`` breaking ``L^m(x+k, x) = (-1)^{m-k} a_k(x)``, ``a_k(x) > 0``.

    Strict positivity is required only at interior columns ``m <= x <= N - m``;
    elsewhere the entry may vanish but must not have the wrong sign.
    Entries beyond the band must be zero.
    """
    N = op.N
    Lm = op.power(m)
    bad = []
    for x in range(N + 1):
        interior = m <= x <= N - m
        for y in range(N + 1):
            k = y - x
            value = Lm[y][x]
            if abs(k) > m:
                if value != 0:
                    bad.append((y, x))
                continue
            a = value * (-1) ** (m - k)
            if a < 0 or (interior and a == 0):
                bad.append((y, x))
    return bad


def _band(M, offset, N):
    """Entries ``M(x + offset, x)`` inside the lattice, as ``(row, col)`` pairs."""
    return [(x + offset, x) for x in range(N + 1) if 0 <= x + offset <= N]


def tune_weights(op: BDOperator, m: int, t_S=None) -> WeightVector:
    """Greedy weights ``c_1..c_{m-1}`` making ``X`` a valid generator with band ``m``.

    At stage ``k`` only ``c_k L^{m-k}`` touches the entries at offsets
    ``+-(m-k)``, and there ``L^{m-k}`` is positive. ``c_k`` is set to
    ``SAFETY`` times the smallest value making those entries positive (or to
    0 when they already are). The last stage also enforces a negative
    diagonal. ``t_S`` defaults to ``1 / (2 max(-X(x, x)))``.
    """
    N = op.N
    if m < 1:
        raise TuningError("band width m must be at least 1", k=0)
    if m > N:
        raise TuningError(f"band width m = {m} does not fit on a lattice of {N + 1} points", k=0)
    one = one_like(*op.rates.params.values())
    powers = {j: op.power(j) for j in range(1, m + 1)}
    c = [one]
    X = [list(r) for r in powers[m]]
    for k in range(1, m):
        P = powers[m - k]
        offsets = (m - k, -(m - k))
        entries = [e for off in offsets for e in _band(P, off, N)]
        need = []
        for (r, s) in entries:
            slope = P[r][s]
            if slope <= 0:
                raise TuningError(f"L^{m - k} vanishes at ({r}, {s})", k=k)
            need.append(-X[r][s] / slope)
        if k == m - 1:
            for x in range(N + 1):
                slope = -P[x][x]
                if slope <= 0:
                    raise TuningError(f"diagonal of L vanishes at {x}", k=k)
                need.append(X[x][x] / slope)
        lower = max(need)
        if lower > 0:
            ck = SAFETY * lower
        elif lower < 0:
            ck = 0 * one  # already strictly positive
        else:
            ck = one
        c.append(ck)
        X = [[X[i][j] + ck * P[i][j] for j in range(N + 1)] for i in range(N + 1)]
    _check_generator(X, m, N)
    diag = max(-X[x][x] for x in range(N + 1))
    if t_S is None:
        t_S = one / (2 * diag)
    if not (0 < t_S and t_S * diag < 1):
        raise TuningError(f"time scale t_S = {t_S} violates 0 < t_S max(-X(x,x)) < 1", k=m - 1)
    return WeightVector(c, t_S, X)


def _check_generator(X, m, N):
    for y in range(N + 1):
        if not X[y][y] < 0:
            raise TuningError(f"X({y}, {y}) is not negative", k=m - 1)
        for x in range(N + 1):
            d = abs(x - y)
            if d > m and X[x][y] != 0:
                raise TuningError(f"X({x}, {y}) outside band {m}", k=m - 1)
            if 1 <= d <= m and not X[x][y] > 0:
                raise TuningError(f"X({x}, {y}) is not positive", k=m - d)
        if sum(X[x][y] for x in range(N + 1)) != 0:
            raise TuningError(f"column {y} of X does not sum to zero", k=m - 1)


def build_K_bd(op: BDOperator, m: int, weights: WeightVector) -> TransitionMatrix:
    """``K = I + t_S X`` from tuned weights; nonnegative, banded, column-stochastic."""
    if weights.m != m:
        raise TuningError(f"weights are for band {weights.m}, not {m}", k=0)
    N = op.N
    X = weights.X
    if X is None:
        zero = 0 * op.L[0][0]
        X = [[zero] * (N + 1) for _ in range(N + 1)]
        for j, cj in enumerate(weights.c):
            P = op.power(m - j)
            X = [[X[r][s] + cj * P[r][s] for s in range(N + 1)] for r in range(N + 1)]
    _check_generator(X, m, N)
    t = weights.t_S
    K = [[(1 if r == s else 0) + t * X[r][s] for s in range(N + 1)] for r in range(N + 1)]
    if any(v < 0 for row in K for v in row):
        raise TuningError("t_S too large: negative transition probability", k=m - 1)
    meta = {"m": m, "c": list(weights.c), "t_S": t, "family": op.rates.family,
            "params": dict(op.rates.params)}
    backend = backend_of(t, *weights.c)
    return TransitionMatrix(K, backend, f"BD-{op.rates.family}", Lattice.finite(N), meta)


def kappa_bd(m: int, weights: WeightVector, eigfun: Callable[[int], object], n: int):
    """``1 + t_S sum_{j<m} (-1)^{m-j} c_j E(n)^{m-j}``."""
    E = eigfun(n)
    total = sum((-1) ** (m - j) * cj * E ** (m - j) for j, cj in enumerate(weights.c))
    return 1 + weights.t_S * total
