"""Orthogonality measures, polynomials and normalization constants.

Every family uses the universal normalization ``P_n(0) = 1`` and ``P_0 = 1``;
``d_n^2`` is fixed by ``sum_x pi(x) P_m(x) P_n(x) = delta_{mn} / d_n^2``.

Hahn and q-Hahn use the parametrization in which ``pi(x, N, a, b)`` carries
``(a)_x (b)_{N-x}``; this differs from the Koekoek-Lesky-Swarttouw tables.

Families (``FamilyId`` strings) and parameters:

================== ============ =========================================
id                 parameters   constraints
================== ============ =========================================
krawtchouk         p            0 < p < 1
charlier           a            a > 0
hahn               a, b         a, b > 0
meixner            a, b         a > 0, 0 < b < 1
qhahn              a, b, q      0 < a, b < 1
qmeixner           b, c, q      0 <= b < 1/q, c > 0 (b = 0 is q-Charlier)
qmeixner-second    b, c, q      same as qmeixner; the involuted family
little-qjacobi     a, b, q      0 < a < 1, b < 1 (measure only)
================== ============ =========================================
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional

from .errors import DomainError, TruncationError
from .numerics import (
    EXACT,
    FLOAT,
    INFINITY,
    backend_of,
    binomial,
    hyper,
    one_like,
    parse_scalar,
    pochhammer,
    q_binomial,
    q_pochhammer,
    q_power,
    qhyper,
)
from .tolerances import TAIL_TOL, TRUNCATION_CAP

FINITE_FAMILIES = ("krawtchouk", "hahn", "qhahn")
SEMI_INFINITE_FAMILIES = ("charlier", "meixner", "qmeixner", "qmeixner-second", "little-qjacobi")
FAMILY_IDS = FINITE_FAMILIES + SEMI_INFINITE_FAMILIES

PARAM_NAMES = {
    "krawtchouk": ("p",),
    "charlier": ("a",),
    "hahn": ("a", "b"),
    "meixner": ("a", "b"),
    "qhahn": ("a", "b", "q"),
    "qmeixner": ("b", "c", "q"),
    "qmeixner-second": ("b", "c", "q"),
    "little-qjacobi": ("a", "b", "q"),
}


# ---------------------------------------------------------------- lattices

@dataclass(frozen=True)
class Lattice:
    """Either ``{0..N}`` or ``Z_{>=0}`` truncated where the measure tail drops below ``tail_tol``."""

    kind: str
    N: Optional[int] = None
    tail_tol: float = TAIL_TOL

    @classmethod
    def finite(cls, N: int) -> "Lattice":
        if N < 0:
            raise DomainError("lattice size N must be nonnegative")
        return cls("finite", int(N))

    @classmethod
    def semi_infinite(cls, tail_tol: float = TAIL_TOL) -> "Lattice":
        if not 0 < tail_tol < 1:
            raise DomainError("tail tolerance must lie in (0, 1)")
        return cls("semi-infinite", None, float(tail_tol))

    @property
    def is_finite(self) -> bool:
        return self.kind == "finite"


@dataclass
class MeasureVector:
    values: list
    backend: str
    lattice: Lattice
    tail: float = 0.0

    @property
    def x_max(self) -> int:
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)

    def __getitem__(self, x):
        return self.values[x]


# ---------------------------------------------------------------- validation

def _check(cond, family, message):
    if not cond:
        raise DomainError(f"{family}: {message}")


def validate(family: str, params: dict, backend: Optional[str] = None) -> Dict[str, object]:
    """Check the family constraints and return the parameters as backend scalars."""
    if family not in PARAM_NAMES:
        raise DomainError(f"unknown family {family!r}")
    names = PARAM_NAMES[family]
    missing = [n for n in names if n not in params]
    extra = [n for n in params if n not in names]
    if missing or extra:
        raise DomainError(f"{family}: expected parameters {names}, got {tuple(params)}")
    values = {}
    for n in names:
        v = params[n]
        if backend is not None:
            values[n] = parse_scalar(v, backend)
        elif isinstance(v, (str, int)):
            values[n] = parse_scalar(v, EXACT)
        else:
            values[n] = v
    v = values
    if family == "krawtchouk":
        _check(0 < v["p"] < 1, family, "need 0 < p < 1")
    elif family == "charlier":
        _check(v["a"] > 0, family, "need a > 0")
    elif family == "hahn":
        _check(v["a"] > 0 and v["b"] > 0, family, "need a, b > 0")
    elif family == "meixner":
        _check(v["a"] > 0 and 0 < v["b"] < 1, family, "need a > 0, 0 < b < 1")
    else:
        _check(0 < v["q"] < 1, family, "need 0 < q < 1")
        if family == "qhahn":
            _check(0 < v["a"] < 1 and 0 < v["b"] < 1, family, "need 0 < a, b < 1")
        elif family in ("qmeixner", "qmeixner-second"):
            _check(0 <= v["b"] and v["b"] * v["q"] < 1 and v["c"] > 0, family,
                   "need 0 <= b < 1/q, c > 0")
        elif family == "little-qjacobi":
            _check(0 < v["a"] < 1 and v["b"] < 1, family, "need 0 < a < 1, b < 1")
    return values


# ---------------------------------------------------------------- measures

def _ratio(family, v, x, N):
    """``pi(x+1) / pi(x)``."""
    if family == "krawtchouk":
        p = v["p"]
        return (N - x) * p / ((x + 1) * (1 - p))
    if family == "charlier":
        return v["a"] / (x + 1)
    if family == "hahn":
        a, b = v["a"], v["b"]
        return (N - x) * (a + x) / ((x + 1) * (b + N - x - 1))
    if family == "meixner":
        a, b = v["a"], v["b"]
        return (a + x) * b / (x + 1)
    q = v["q"]
    qx = q ** x
    if family == "qhahn":
        a, b = v["a"], v["b"]
        return ((1 - q ** (N - x)) * (1 - a * qx)
                / ((1 - qx * q) * (1 - b * q ** (N - x - 1)) * a))
    if family == "qmeixner":
        b, c = v["b"], v["c"]
        return (1 - b * qx * q) * c * qx / ((1 - qx * q) * (1 + b * c * qx * q))
    if family == "qmeixner-second":
        b, c = v["b"], v["c"]
        return (1 + b * c * qx * q) * qx / ((1 - qx * q) * (1 - b * qx * q) * c)
    if family == "little-qjacobi":
        a, b = v["a"], v["b"]
        return (1 - b * qx) * a / (1 - qx * q)
    raise DomainError(f"unknown family {family!r}")


def _pi_zero(family, v, N):
    """``pi(0)``; exact for finite families, float (transcendental) otherwise."""
    if family == "krawtchouk":
        return (1 - v["p"]) ** N
    if family == "hahn":
        a, b = v["a"], v["b"]
        return pochhammer(b, N) / pochhammer(a + b, N)
    if family == "qhahn":
        a, b, q = v["a"], v["b"], v["q"]
        return q_pochhammer(b, q, N) * a ** N / q_pochhammer(a * b, q, N)
    if family == "charlier":
        return math.exp(-float(v["a"]))
    if family == "meixner":
        return (1 - float(v["b"])) ** float(v["a"])
    q = float(v["q"])
    if family == "qmeixner":
        b, c = float(v["b"]), float(v["c"])
        return q_pochhammer(-b * c * q, q, INFINITY) / q_pochhammer(-c, q, INFINITY)
    if family == "qmeixner-second":
        b, c = float(v["b"]), float(v["c"])
        return q_pochhammer(b * q, q, INFINITY) / q_pochhammer(-1 / c, q, INFINITY)
    if family == "little-qjacobi":
        a, b = float(v["a"]), float(v["b"])
        return q_pochhammer(a, q, INFINITY) / q_pochhammer(a * b, q, INFINITY)
    raise DomainError(f"unknown family {family!r}")


def measure_ratio(family: str, params: dict, x: int, N: Optional[int] = None):
    """``pi(x) / pi(0)``: rational in the parameters, exact under the exact backend."""
    v = validate(family, params)
    if x < 0 or (N is not None and x > N):
        return 0 * one_like(*v.values())
    r = one_like(*v.values())
    for j in range(x):
        r = r * _ratio(family, v, j, N)
    return r


def pi_value(family: str, params: dict, x: int, N: Optional[int] = None):
    """Single measure value ``pi(x, N, params)``; zero outside the lattice.

    Finite families are evaluated by their closed formulas (exact for rational
    input); semi-infinite ones as ``pi(0) * ratio`` in floats.
    """
    v = validate(family, params)
    if family in FINITE_FAMILIES:
        if N is None:
            raise DomainError(f"{family} needs a lattice size N")
        if x < 0 or x > N:
            return 0 * one_like(*v.values())
        if family == "krawtchouk":
            p = v["p"]
            return binomial(N, x) * p ** x * (1 - p) ** (N - x)
        if family == "hahn":
            a, b = v["a"], v["b"]
            return binomial(N, x) * pochhammer(a, x) * pochhammer(b, N - x) / pochhammer(a + b, N)
        a, b, q = v["a"], v["b"], v["q"]
        return (q_binomial(N, x, q) * q_pochhammer(a, q, x) * q_pochhammer(b, q, N - x)
                * a ** (N - x) / q_pochhammer(a * b, q, N))
    if x < 0:
        return 0.0
    return _pi_zero(family, v, None) * float(measure_ratio(family, v, x))


class MeasureTable:
    """Cached ``pi(x, M)`` for a fixed parameter set, any ``0 <= x <= M``.

    Rows are produced by the ratio recurrence, so a full row costs ``O(M)``.
    Used by the convolution builders, which need the measure at many lattice
    sizes. Out-of-support arguments give zero.
    """

    def __init__(self, family: str, params: dict, backend: Optional[str] = None):
        self.family = family
        self.params = validate(family, params, backend)
        self.backend = backend or backend_of(*self.params.values())
        if family not in FINITE_FAMILIES:
            self.backend = FLOAT
        self._zero = 0 * one_like(*self.params.values()) if self.backend == EXACT else 0.0
        self._rows: Dict[int, list] = {}
        self._semi: list = []
        self._pi0 = None

    def row(self, M: int) -> list:
        if self.family not in FINITE_FAMILIES:
            raise DomainError(f"{self.family} lives on a semi-infinite lattice")
        if M not in self._rows:
            v = self.params
            value = _pi_zero(self.family, v, M)
            if self.backend == FLOAT:
                value = float(value)
            row = [value]
            for x in range(M):
                value = value * _ratio(self.family, v, x, M)
                row.append(value)
            self._rows[M] = row
        return self._rows[M]

    def semi(self, x: int):
        if self._pi0 is None:
            self._pi0 = _pi_zero(self.family, self.params, None)
            self._semi = [self._pi0]
        while len(self._semi) <= x:
            j = len(self._semi) - 1
            self._semi.append(self._semi[-1] * float(_ratio(self.family, self.params, j, None)))
        return self._semi[x]

    def __call__(self, x: int, M: Optional[int] = None):
        if x < 0:
            return self._zero
        if self.family in FINITE_FAMILIES:
            if M is None or M < 0 or x > M:
                return self._zero
            return self.row(M)[x]
        return self.semi(x)


def truncation_point(family: str, params: dict, tail_tol: float = TAIL_TOL,
                     cap: int = TRUNCATION_CAP) -> tuple:
    """Smallest ``x_max`` with ``sum_{x > x_max} pi(x) < tail_tol``, and that tail.

    The tail is accumulated backwards from far beyond the mode, where terms
    have fallen below ``1e-40`` and keep decreasing, so it is not polluted by
    the rounding of ``1 - cumulative sum``.
    """
    table = MeasureTable(family, params)
    x = 0
    limit = 4 * cap
    while True:
        value = table(x)
        nxt = table(x + 1)
        if value < 1e-40 * tail_tol and nxt <= value:
            break
        x += 1
        if x > limit:
            raise TruncationError(f"{family}: measure tail does not decay before x = {limit}")
    end = x
    tail = 0.0
    tails = [0.0] * (end + 1)
    for y in range(end, -1, -1):
        tails[y] = tail
        tail += table(y)
    for y in range(end + 1):
        if tails[y] < tail_tol:
            if y > cap:
                raise TruncationError(f"{family}: truncation point {y} exceeds cap {cap}")
            return y, tails[y]
    raise TruncationError(f"{family}: could not reach tail tolerance {tail_tol}")


def measure(family: str, params: dict, lattice: Lattice) -> MeasureVector:
    """Measure vector over a finite lattice or the truncated semi-infinite lattice."""
    table = MeasureTable(family, params)
    if lattice.is_finite:
        if family not in FINITE_FAMILIES:
            raise DomainError(f"{family} is defined on the semi-infinite lattice")
        return MeasureVector(list(table.row(lattice.N)), table.backend, lattice)
    if family in FINITE_FAMILIES:
        raise DomainError(f"{family} is defined on a finite lattice")
    x_max, tail = truncation_point(family, params, lattice.tail_tol)
    return MeasureVector([table(x) for x in range(x_max + 1)], FLOAT, lattice, tail)


# ---------------------------------------------------------------- polynomials

def eta(x: int, q):
    """``q^{-x} - 1``."""
    if x < 0:
        raise DomainError("eta needs x >= 0")
    return q_power(q, -x) - 1


def _poly(family, v, n, x, N):
    if family == "krawtchouk":
        return hyper([-n, -x], [-N], 1 / v["p"], n)
    if family == "charlier":
        return hyper([-n, -x], [], -1 / v["a"], n)
    if family == "hahn":
        a, b = v["a"], v["b"]
        return hyper([-n, n + a + b - 1, -x], [a, -N], 1, n)
    if family == "meixner":
        a, b = v["a"], v["b"]
        return hyper([-n, -x], [a], 1 - 1 / b, n)
    q = v["q"]
    if family == "qhahn":
        a, b = v["a"], v["b"]
        return qhyper([q_power(q, -n), a * b * q_power(q, n - 1), q_power(q, -x)],
                      [a, q_power(q, -N)], q, q, n)
    if family == "qmeixner":
        b, c = v["b"], v["c"]
        return qhyper([q_power(q, -n), q_power(q, -x)], [b * q], q, -q_power(q, n + 1) / c, n)
    if family == "qmeixner-second":
        b, c = v["b"], v["c"]
        return qhyper([q_power(q, -n), q_power(q, -x)], [-b * c * q], q, -c * q_power(q, n + 1), n)
    raise DomainError(f"{family} has no polynomial system here")


def poly(family: str, params: dict, n: int, x: int, N: Optional[int] = None):
    """``P_n(x)`` in the universal normalization ``P_n(0) = P_0(x) = 1``."""
    v = validate(family, params)
    if n < 0 or x < 0:
        raise DomainError("n and x must be nonnegative")
    if family in FINITE_FAMILIES:
        if N is None or n > N or x > N:
            raise DomainError(f"{family}: need n, x <= N")
    return _poly(family, v, n, x, N)


def poly_table(family: str, params: dict, n_max: int, x_max: int, N: Optional[int] = None) -> list:
    """``table[n][x] = P_n(x)`` for ``n <= n_max``, ``x <= x_max``."""
    v = validate(family, params)
    return [[_poly(family, v, n, x, N) for x in range(x_max + 1)] for n in range(n_max + 1)]


def _norm_sq(family, v, n, N):
    if n == 0:
        return one_like(*v.values())
    if family == "krawtchouk":
        p = v["p"]
        return binomial(N, n) * (p / (1 - p)) ** n
    if family == "charlier":
        return v["a"] ** n / math.factorial(n)
    if family == "hahn":
        a, b = v["a"], v["b"]
        return (binomial(N, n) * pochhammer(a, n) * (2 * n + a + b - 1) * pochhammer(a + b, N)
                / (pochhammer(b, n) * pochhammer(n + a + b - 1, N + 1)))
    if family == "meixner":
        a, b = v["a"], v["b"]
        return pochhammer(a, n) * b ** n / math.factorial(n)
    q = v["q"]
    if family == "qhahn":
        a, b = v["a"], v["b"]
        ab = a * b
        # (a, ab/q; q)_n (1 - ab q^{2n-1}) / (1 - ab/q) with the removable factor cancelled
        return (q_binomial(N, n, q) * q_pochhammer(a, q, n) * q_pochhammer(ab, q, n - 1)
                * (1 - ab * q ** (2 * n - 1))
                / (q_pochhammer(ab * q ** N, q, n) * q_pochhammer(b, q, n) * a ** n))
    if family == "qmeixner":
        b, c = v["b"], v["c"]
        return q ** n * q_pochhammer(b * q, q, n) / (q_pochhammer(q, q, n) * q_pochhammer(-q / c, q, n))
    if family == "qmeixner-second":
        b, c = v["b"], v["c"]
        return q ** n * q_pochhammer(-b * c * q, q, n) / (q_pochhammer(q, q, n) * q_pochhammer(-c * q, q, n))
    raise DomainError(f"{family} has no polynomial system here")


def norm_sq(family: str, params: dict, n: int, N: Optional[int] = None):
    """Closed-form ``d_n^2``."""
    v = validate(family, params)
    if n < 0 or (family in FINITE_FAMILIES and (N is None or n > N)):
        raise DomainError(f"{family}: need 0 <= n <= N")
    return _norm_sq(family, v, n, N)


def weighted_truncation(family: str, params: dict, n_max: int, tail_tol: float = TAIL_TOL,
                        cap: int = TRUNCATION_CAP) -> int:
    """Truncation point for sums weighted by ``pi(x) P_n(x)^2``, ``n <= n_max``.

    Polynomials grow with ``x`` (like ``q^{-n x}`` for the q-families), so the
    measure tail alone does not bound the tail of ``phi_n(x)^2``. The lattice
    is scanned until every ``phi_n(x)^2`` has fallen far below ``tail_tol``
    and is decreasing; the returned ``x_max`` is the smallest point whose
    remaining weighted tail is below ``tail_tol`` for every ``n``.
    """
    v = validate(family, params)
    x0, _ = truncation_point(family, v, tail_tol, cap)
    table = MeasureTable(family, v)
    d2 = [float(_norm_sq(family, v, n, None)) for n in range(n_max + 1)]

    def weights(x):
        pix = table(x)
        return [d2[n] * pix * float(_poly(family, v, n, x, None)) ** 2 for n in range(n_max + 1)]

    rows = []
    x = 0
    quiet = 0
    while True:
        w = weights(x)
        rows.append(w)
        if x > x0 and max(w) < 1e-6 * tail_tol and all(a <= b for a, b in zip(w, rows[-2])):
            quiet += 1
            if quiet >= 4:
                break
        else:
            quiet = 0
        x += 1
        if x > 4 * cap:
            raise TruncationError(f"{family}: weighted tail does not decay")
    tails = [0.0] * (n_max + 1)
    best = len(rows) - 1
    for y in range(len(rows) - 1, -1, -1):
        if max(tails) < tail_tol:
            best = y
        tails = [t + w for t, w in zip(tails, rows[y])]
    best = max(best, x0)
    if best > cap:
        raise TruncationError(f"{family}: truncation point {best} exceeds cap {cap}")
    return best


def orthonormal(family: str, params: dict, n: int, lattice: Lattice, x_max: Optional[int] = None) -> list:
    """``phi_n(x) = d_n sqrt(pi(x)) P_n(x)`` in floats (the q-Meixner second family carries ``(-1)^x``).

    On a semi-infinite lattice the vector runs to ``x_max`` (default: the
    weighted truncation point for ``n``).
    """
    v = validate(family, params)
    N = lattice.N
    if lattice.is_finite:
        pis = measure(family, v, lattice).values
    else:
        if x_max is None:
            x_max = weighted_truncation(family, v, n, lattice.tail_tol)
        table = MeasureTable(family, v)
        pis = [table(x) for x in range(x_max + 1)]
    d = math.sqrt(float(_norm_sq(family, v, n, N)))
    out = []
    for x, pix in enumerate(pis):
        value = d * math.sqrt(float(pix)) * float(_poly(family, v, n, x, N))
        if family == "qmeixner-second" and x % 2:
            value = -value
        out.append(value)
    return out


# ---------------------------------------------------------------- q-Meixner second family

def involution(params: dict) -> dict:
    """``(b, c) -> (-b c, 1/c)``; applying it twice is the identity."""
    return {"b": -params["b"] * params["c"], "c": 1 / params["c"], "q": params["q"]}


def qm_second_family(params: dict, n: int, x: int) -> tuple:
    """``(pi_-(x), P_-n(x), d_-n^2)`` of the second q-Meixner family.

    ``pi_-`` is a float (infinite products); the polynomial and ``d^2`` are
    exact for rational parameters.
    """
    v = validate("qmeixner-second", params)
    pix = pi_value("qmeixner-second", v, x)
    return pix, _poly("qmeixner-second", v, n, x, None), _norm_sq("qmeixner-second", v, n, None)


# ---------------------------------------------------------------- limits

LIMITS = ("K->C", "H->M", "M->C", "qH->qM")


def limit_map(source: str, params: dict, N) -> dict:
    """Parameters of the finite (or larger) family approximating a limit family.

    * ``K->C``: Charlier ``a`` -> Krawtchouk ``p = a / N``.
    * ``H->M``: Meixner ``(a, b)`` -> Hahn ``(a, N (1 - b) / b)``.
    * ``M->C``: Charlier ``a`` -> Meixner ``(N, a / (N + a))``, ``N`` playing the large shape.
    * ``qH->qM``: q-Meixner ``(b, c)`` -> q-Hahn ``(b q, -1 / (b c q^N))``.
      The second q-Hahn parameter is negative, outside the probabilistic range,
      so the result is not validated against the q-Hahn constraints.
    """
    if source == "K->C":
        a = params["a"]
        out = {"p": a / N}
        validate("krawtchouk", out)
        return out
    if source == "H->M":
        a, b = params["a"], params["b"]
        out = {"a": a, "b": N * (1 - b) / b}
        validate("hahn", out)
        return out
    if source == "M->C":
        a = params["a"]
        out = {"a": N, "b": a / (N + a)}
        validate("meixner", out)
        return out
    if source == "qH->qM":
        b, c, q = params["b"], params["c"], params["q"]
        validate("qmeixner", params)
        if b == 0:
            raise DomainError("qH->qM: b = 0 has no q-Hahn preimage")
        return {"a": b * q, "b": -1 / (b * c * q ** N), "q": q}
    raise DomainError(f"unknown limit {source!r}; expected one of {LIMITS}")
