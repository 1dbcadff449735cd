"""Transition matrices for every registered case, plus duals, multiple
convolutions and commuting deformations.

Finite chains are built entry by entry from the literal convolution sums and
stay exact for rational parameters. Semi-infinite chains are built in floats
on a truncated lattice whose size is grown until the columns inside the
reliable window ``y <= x_max`` sum to one within ``COLUMN_TOL``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from . import convolutions as conv
from .cases import QM_PRIMED, QM_PRIMED_UP, CaseSpec, case_params, get_case
from .errors import CaseError, DomainError, PatternError, TruncationError
from .families import (
    FINITE_FAMILIES,
    Lattice,
    MeasureTable,
    truncation_point,
    weighted_truncation,
)
from .linalg import matmul
from .numerics import EXACT, FLOAT, backend_of, binomial, one_like, to_backend
from .tolerances import COLUMN_TOL, TRUNCATION_CAP


@dataclass
class TransitionMatrix:
    """Column-stochastic ``K[x][y]`` (rows ``x``, columns ``y``).

    ``entries`` is a list of rows (exact or float scalars) for finite chains
    and a float ``numpy`` array for truncated semi-infinite ones.
    """

    entries: object
    backend: str
    case: str
    lattice: Lattice
    meta: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.entries)

    def __getitem__(self, xy):
        x, y = xy
        return self.entries[x][y]

    def array(self) -> np.ndarray:
        return np.array([[float(v) for v in row] for row in self.entries], dtype=float) \
            if not isinstance(self.entries, np.ndarray) else self.entries

    def rows(self) -> list:
        if isinstance(self.entries, np.ndarray):
            return self.entries.tolist()
        return self.entries

    def column_sums(self) -> list:
        rows = self.rows()
        n = len(rows)
        return [sum((rows[x][y] for x in range(n)), rows[0][0] * 0) for y in range(n)]


@dataclass(frozen=True)
class ChainSpec:
    case: str
    params: dict
    lam: dict
    lattice: Lattice
    backend: str


# ---------------------------------------------------------------- parameters, lambda, kappa

def resolve_lambda(case: str, params: dict) -> dict:
    """Stationary family parameters for the case."""
    spec = get_case(case)
    v = case_params(case, params)
    return spec.resolve(v)


def kappa_closed(case: str, params: dict, n: int):
    """Closed-form eigenvalue ``kappa(n)``."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    spec = get_case(case)
    v = case_params(case, params)
    return spec.kappa(v, n)


def kappa_minus(case: str, params: dict, n: int) -> float:
    """Eigenvalue of the second q-Meixner eigenvector family (q-Meixner cases only)."""
    spec = get_case(case)
    if spec.kappa_minus is None:
        raise CaseError(f"{case} has no second eigenvector family")
    return spec.kappa_minus(case_params(case, params), n)


def chain_spec(case: str, params: dict, lattice: Lattice, backend: Optional[str] = None) -> ChainSpec:
    spec = get_case(case)
    v = case_params(case, params)
    if spec.finite != lattice.is_finite:
        raise DomainError(f"{case} lives on a {'finite' if spec.finite else 'semi-infinite'} lattice")
    backend = backend or (backend_of(*v.values()) if spec.finite else FLOAT)
    return ChainSpec(case, v, spec.resolve(v), lattice, backend)


def _backend_params(v: dict, backend: str) -> dict:
    return {k: to_backend(x, backend) for k, x in v.items()}


# ---------------------------------------------------------------- finite chains

def kernels(case: str, params: dict, backend: Optional[str] = None) -> tuple:
    """Slot kernels ``k_j(i, M)`` of a finite case."""
    spec = get_case(case)
    if not spec.finite:
        raise CaseError(f"{case} is semi-infinite")
    v = case_params(case, params)
    backend = backend or backend_of(*v.values())
    v = _backend_params(v, backend)
    return tuple(MeasureTable(s.family, s.wiring(v), backend) for s in spec.slots), backend


def _zero(backend):
    return Fraction(0) if backend == EXACT else 0.0


def build_finite(case: str, params: dict, N: int, backend: Optional[str] = None) -> TransitionMatrix:
    """Literal convolution sum for every ``(x, y)`` on ``{0..N}``."""
    if N < 1:
        raise DomainError("N must be at least 1")
    spec = get_case(case)
    ks, backend = kernels(case, params, backend)
    entries = conv.build(spec.conv, ks, N, _zero(backend))
    return TransitionMatrix(entries, backend, case, Lattice.finite(N), {"conv": spec.conv})


def build_first_row(case: str, params: dict, N: int, backend: Optional[str] = None) -> list:
    """``K(0, y)`` only; cheap enough for large ``N`` in exact arithmetic."""
    spec = get_case(case)
    ks, backend = kernels(case, params, backend)
    return conv.first_row(spec.conv, ks, N, _zero(backend))


def build_dual(case: str, params: dict, N: int, backend: Optional[str] = None) -> TransitionMatrix:
    """Dual chain from the dual convolution shapes; equals ``K(N-x, N-y)``."""
    spec = get_case(case)
    if not spec.finite:
        raise CaseError(f"{case} is semi-infinite; duals need a finite lattice")
    ks, backend = kernels(case, params, backend)
    entries = conv.build(conv.DUAL_TYPES[spec.conv], ks, N, _zero(backend))
    return TransitionMatrix(entries, backend, case + "^d", Lattice.finite(N),
                            {"conv": conv.DUAL_TYPES[spec.conv]})


def dual_measure(case: str, params: dict, N: int) -> list:
    """Stationary measure of the dual chain, ``pi(N - x)``."""
    spec = get_case(case)
    v = case_params(case, params)
    table = MeasureTable(spec.family, spec.resolve(v))
    row = table.row(N)
    return row[::-1]


# ---------------------------------------------------------------- semi-infinite chains

def _log_qpoch_table(a: float, q: float, n: int) -> np.ndarray:
    """``log (a;q)_k`` for ``k = 0..n``; needs every factor positive."""
    ks = np.arange(n)
    factors = 1.0 - a * q ** ks
    if np.any(factors <= 0):
        raise DomainError("q-Pochhammer factor is not positive")
    return np.concatenate([[0.0], np.cumsum(np.log(factors))])


def _log_qinf(a: float, q: float) -> float:
    from .numerics import INFINITY, q_pochhammer
    return math.log(q_pochhammer(a, q, INFINITY))


def _finite_table(family: str, v: dict, size: int) -> np.ndarray:
    """``T[i, M] = pi(i, M)`` for ``0 <= i <= M <= size`` in floats, via logarithms."""
    i = np.arange(size + 1)[:, None]
    Mv = np.arange(size + 1)[None, :]
    mask = i <= Mv
    ii = np.where(mask, i, 0)
    jj = np.where(mask, Mv - i, 0)
    lg = np.vectorize(math.lgamma)
    if family == "krawtchouk":
        p = float(v["p"])
        logt = (lg(Mv + 1.0) - lg(ii + 1.0) - lg(jj + 1.0) + ii * math.log(p) + jj * math.log1p(-p))
    elif family == "hahn":
        a, b = float(v["a"]), float(v["b"])
        logt = (lg(Mv + 1.0) - lg(ii + 1.0) - lg(jj + 1.0)
                + lg(a + ii) - math.lgamma(a) + lg(b + jj) - math.lgamma(b)
                - lg(a + b + Mv) + math.lgamma(a + b))
    elif family == "qhahn":
        a, b, q = float(v["a"]), float(v["b"]), float(v["q"])
        La, Lb = _log_qpoch_table(a, q, size), _log_qpoch_table(b, q, size)
        Lab, Lq = _log_qpoch_table(a * b, q, size), _log_qpoch_table(q, q, size)
        logt = (Lq[Mv] - Lq[ii] - Lq[jj] + La[ii] + Lb[jj] + jj * math.log(a) - Lab[Mv])
    else:
        raise DomainError(f"{family} is not a finite family")
    return np.where(mask, np.exp(np.where(mask, logt, 0.0)), 0.0)


def _log_semi_weights(family: str, v: dict, n: int) -> np.ndarray:
    """``log pi(k)`` for ``k = 0..n`` of a Toeplitz slot measure."""
    k = np.arange(n + 1, dtype=float)
    lg = np.vectorize(math.lgamma)
    if family == "charlier":
        a = float(v["a"])
        return k * math.log(a) - a - lg(k + 1.0)
    if family == "meixner":
        a, b = float(v["a"]), float(v["b"])
        return lg(a + k) - math.lgamma(a) - lg(k + 1.0) + k * math.log(b) + a * math.log1p(-b)
    raise DomainError(f"{family} is not a Toeplitz slot")


def _toeplitz_lower(w: np.ndarray, size: int) -> np.ndarray:
    """``T[x, z] = w[x - z]`` for ``x >= z``."""
    idx = np.arange(size + 1)
    d = idx[:, None] - idx[None, :]
    return np.where(d >= 0, w[np.clip(d, 0, None)], 0.0)


def _triangle(size):
    idx = np.arange(size + 1)
    return idx[:, None], idx[None, :]


def _primed_down(v: dict, size: int) -> np.ndarray:
    """``pi'(x, z)`` (``x >= z``) of the type-I q-Meixner chain, parameters ``(b, c)``."""
    b, c, q = float(v["b"]), float(v["c"]), float(v["q"])
    Lb, Lq = _log_qpoch_table(b, q, size), _log_qpoch_table(q, q, size)
    Lmc, Lmcb = _log_qpoch_table(-c, q, size), _log_qpoch_table(-c / b, q, size)
    x, z = _triangle(size)
    mask = x >= z
    d = np.where(mask, x - z, 0)
    logt = (Lb[d] + d * math.log(c / b) + ((x * (x - 1) - z * (z - 1)) // 2) * math.log(q) - Lq[d]
            + _log_qinf(-c, q) + Lmcb[z] - Lmc[x] - _log_qinf(-c / b, q))
    return np.where(mask, np.exp(np.where(mask, logt, 0.0)), 0.0)


def _primed_up(v: dict, size: int) -> np.ndarray:
    """``pi'(z, y)`` (``z >= y``) of the type-III / IV q-Meixner chains, parameters ``(a, b)``."""
    a, b, q = float(v["a"]), float(v["b"]), float(v["q"])
    La, Lq = _log_qpoch_table(a, q, size), _log_qpoch_table(q, q, size)
    Lmb, Lmba = _log_qpoch_table(-b, q, size), _log_qpoch_table(-b / a, q, size)
    z, y = _triangle(size)
    mask = z >= y
    d = np.where(mask, z - y, 0)
    logt = (Lmba[y] + La[d] + d * math.log(b / a) + ((z * (z - 1) - y * (y - 1)) // 2) * math.log(q)
            - Lmb[z] - Lq[d] + _log_qinf(-b, q) - _log_qinf(-b / a, q))
    return np.where(mask, np.exp(np.where(mask, logt, 0.0)), 0.0)


def _slot_array(slot, v: dict, size: int, role: str) -> np.ndarray:
    """Kernel of a slot as an absolute-coordinate array.

    ``role`` says how a finite measure enters: ``"pi(z,y)"`` (``T[z, y]``),
    ``"pi(x,z)"`` (same table), ``"relative"`` (``T[i, M]`` for slot 3), and
    Toeplitz measures become ``pi(x - z)`` either below (``"down"``) or as
    ``pi(z - y)`` (``"up"``) the diagonal, which is the same lower-triangular array.
    """
    w = slot.wiring(v)
    if slot.family in FINITE_FAMILIES:
        return _finite_table(slot.family, w, size)
    if slot.family == QM_PRIMED:
        return _primed_down(w, size)
    if slot.family == QM_PRIMED_UP:
        return _primed_up(w, size)
    return _toeplitz_lower(np.exp(_log_semi_weights(slot.family, w, size)), size)


def _slot_tail(slot, v: dict, threshold: float = 1e-22) -> int:
    """Length beyond which the infinite-support slot kernel is negligible in every column."""
    w = slot.wiring(v)
    n = 64
    while True:
        if slot.family == QM_PRIMED:
            col = _primed_down(w, n)[:, 0]
        elif slot.family == QM_PRIMED_UP:
            col = _primed_up(w, n)[:, 0]
        else:
            col = np.exp(_log_semi_weights(slot.family, w, n))
        peak = int(np.argmax(col))
        beyond = np.nonzero(col[peak:] < threshold)[0]
        if beyond.size:
            return peak + int(beyond[0]) + 1
        n *= 2
        if n > 4 * TRUNCATION_CAP:
            raise TruncationError("slot kernel does not decay")


def _semi_matrix(spec: CaseSpec, v: dict, size: int) -> tuple:
    if spec.conv == "I":
        inner = size
        A1 = _slot_array(spec.slots[0], v, inner, "pi(z,y)")
        A2 = _slot_array(spec.slots[1], v, inner, "down")
        return conv.build_semi("I", A1, A2, None, size, inner), inner
    if spec.conv == "III":
        inner = size + _slot_tail(spec.slots[0], v)
        A1 = _slot_array(spec.slots[0], v, inner, "up")
        A2 = _slot_array(spec.slots[1], v, inner, "pi(x,z)")
        return conv.build_semi("III", A1, A2, None, size, inner), inner
    inner = size + _slot_tail(spec.slots[1], v)
    A1 = _slot_array(spec.slots[0], v, inner, "pi(z,y)")
    A2 = _slot_array(spec.slots[1], v, inner, "up")
    A3 = _slot_array(spec.slots[2], v, inner, "relative")
    return conv.build_semi(spec.conv, A1, A2, A3, size, inner), inner


def build_semi_infinite(case: str, params: dict, lattice: Optional[Lattice] = None,
                        n_max: int = 10, size: Optional[int] = None) -> TransitionMatrix:
    """Truncated float matrix of a semi-infinite case.

    ``x_max`` is the stationary-measure truncation point at the lattice tail
    tolerance; the matrix is built on ``{0..size}`` with ``size`` at least
    ``2 x_max`` and the weighted truncation point for eigenvectors up to
    ``n_max``. ``size`` grows by half until every column ``y <= x_max`` sums
    to one within ``COLUMN_TOL``. Columns beyond ``x_max`` leak mass past the
    truncation edge and are not meant to be used.
    """
    lattice = lattice or Lattice.semi_infinite()
    if lattice.is_finite:
        raise DomainError("semi-infinite chains need a semi-infinite lattice")
    spec = get_case(case)
    if spec.finite:
        raise CaseError(f"{case} is a finite case; use build_finite")
    v = case_params(case, params)
    vf = {k: float(x) for k, x in v.items()}
    lam = spec.resolve(v)
    x_max, tail = truncation_point(spec.family, lam, lattice.tail_tol)
    if size is None:
        size = max(2 * x_max, weighted_truncation(spec.family, lam, n_max, lattice.tail_tol))
    while True:
        if size > TRUNCATION_CAP:
            raise TruncationError(f"{case}: truncated lattice would exceed {TRUNCATION_CAP}")
        K, inner = _semi_matrix(spec, vf, size)
        deficiency = float(np.max(np.abs(1.0 - K[:, : x_max + 1].sum(axis=0))))
        if deficiency < COLUMN_TOL:
            break
        size = int(math.ceil(size * 1.5))
    meta = {"conv": spec.conv, "x_max": x_max, "tail": tail, "deficiency": deficiency,
            "inner": inner, "lambda": lam, "params": dict(v)}
    return TransitionMatrix(K, FLOAT, case, lattice, meta)


# ---------------------------------------------------------------- multiple convolutions

def normalize_pattern(pattern: Sequence[str]) -> tuple:
    """Validate an alternating sign pattern such as ``("+", "-", "+")``."""
    signs = tuple(pattern)
    if len(signs) < 2:
        raise PatternError("a pattern needs at least two signs")
    if any(s not in ("+", "-") for s in signs):
        raise PatternError(f"signs must be '+' or '-': {signs}")
    for s, t in zip(signs, signs[1:]):
        if s == t:
            raise PatternError(f"adjacent equal signs {signs}; merge them into one factor first")
    return signs


def pi_sign(sign: str, x: int, y: int, N: int, p):
    """``pi^+(x, y) = pi_K(x - y, N - y)`` (``y <= x``), ``pi^-(x, y) = pi_K(x, y)`` (``x <= y``)."""
    if sign == "+":
        if not 0 <= y <= x <= N:
            return 0 * p
        return binomial(N - y, x - y) * p ** (x - y) * (1 - p) ** (N - x)
    if not 0 <= x <= y <= N:
        return 0 * p
    return binomial(y, x) * p ** x * (1 - p) ** (y - x)


def multiple_kappa1(signs, ps):
    k = one_like(*ps)
    for s, p in zip(signs, ps):
        k = k * ((1 - p) if s == "+" else p)
    return k


def multiple_p(signs, ps):
    """Stationary Krawtchouk ``p`` of an alternating product from the closed sums."""
    m = len(signs)
    k1 = multiple_kappa1(signs, ps)

    def eff(j):  # p_j^{(eps_j)}, j 1-based
        return (1 - ps[j - 1]) if signs[j - 1] == "+" else ps[j - 1]

    total = 0 * k1
    if signs[0] == "+":
        for k in range((m - 1) // 2 + 1):
            prod = one_like(*ps)
            for j in range(1, 2 * k + 1):
                prod = prod * eff(j)
            total = total + prod * ps[2 * k]
    else:
        for k in range(1, m // 2 + 1):
            prod = one_like(*ps)
            for j in range(1, 2 * k):
                prod = prod * eff(j)
            total = total + prod * ps[2 * k - 1]
    return total / (1 - k1)


@dataclass
class MultipleChain:
    matrix: TransitionMatrix
    p: object
    signs: tuple
    ps: tuple

    def kappa(self, n: int):
        return multiple_kappa1(self.signs, self.ps) ** n


def build_multiple(pattern: Sequence[str], ps: Sequence, N: int) -> MultipleChain:
    """Ordered product of triangular Krawtchouk kernels ``pi^{(eps_j)}(., ., N, p_j)``.

    The stationary ``p`` comes from the closed alternating sums and is
    cross-checked against ``K(0, N) p^N = K(N, 0) (1 - p)^N``.
    """
    signs = normalize_pattern(pattern)
    if len(ps) != len(signs):
        raise PatternError("need one p per sign")
    ps = tuple(Fraction(p) if isinstance(p, (int, str)) else p for p in ps)
    for p in ps:
        if not 0 < p < 1:
            raise DomainError("every p_j must lie in (0, 1)")
    if N < 1:
        raise DomainError("N must be at least 1")
    mats = [[[pi_sign(s, x, y, N, p) for y in range(N + 1)] for x in range(N + 1)]
            for s, p in zip(signs, ps)]
    K = mats[0]
    for Mj in mats[1:]:
        K = matmul(K, Mj)
    p = multiple_p(signs, ps)
    lhs, rhs = K[0][N] * p ** N, K[N][0] * (1 - p) ** N
    exact = backend_of(*ps) == EXACT
    if (exact and lhs != rhs) or (not exact and abs(float(lhs) - float(rhs)) > 1e-12 * max(1.0, abs(float(rhs)))):
        raise ArithmeticError("closed-form p disagrees with the corner equation")
    label = "(" + ",".join(signs) + ")"
    tm = TransitionMatrix(K, backend_of(*ps), "MULTI" + label, Lattice.finite(N), {"pattern": signs})
    return MultipleChain(tm, p, signs, ps)


# ---------------------------------------------------------------- commuting families

DEFORMABLE = ("K-i", "C-conv1", "H-i", "qH-i", "qM-i")


def deformed_params(case: str, params: dict, t) -> dict:
    """Parameters of the one-parameter deformation at ``t``; same stationary measure."""
    v = case_params(case, params)
    if isinstance(t, (int, str)):
        t = Fraction(t)
    if case == "K-i":
        a, b = v["a"], v["b"]
        if not 0 < t <= 1:
            raise DomainError("K-i deformation needs 0 < t <= 1")
        out = {"a": a * t, "b": (1 - a * t) * b / (1 - a * (1 - b * (1 - t)))}
    elif case == "C-conv1":
        a, b = v["a"], v["b"]
        if not 0 < t <= 1:
            raise DomainError("C-conv1 deformation needs 0 < t <= 1")
        out = {"a": a * t, "b": (1 - a * t) * b / (1 - a)}
    elif case == "H-i":
        a, b, c = v["a"], v["b"], v["c"]
        if not -a < t < b:
            raise DomainError("H-i deformation needs -a < t < b")
        out = {"a": a + t, "b": b - t, "c": c}
    elif case in ("qH-i", "qM-i"):
        a, b = v["a"], v["b"]
        if not b < t < 1 / a:
            raise DomainError(f"{case} deformation needs b < t < 1/a")
        out = dict(v, a=a * t, b=b / t)
    else:
        raise CaseError(f"{case} has no registered commuting deformation; choose from {DEFORMABLE}")
    case_params(case, out)
    return out


def commuting_family(case: str, params: dict, t, lattice: Optional[Lattice] = None) -> ChainSpec:
    """Chain spec of the deformed chain; its resolved stationary parameters equal the original ones."""
    spec = get_case(case)
    new = deformed_params(case, params, t)
    if lattice is None:
        lattice = Lattice.finite(1) if spec.finite else Lattice.semi_infinite()
    out = chain_spec(case, new, lattice)
    original = spec.resolve(case_params(case, params))
    for k, val in original.items():
        exact = backend_of(val, out.lam[k]) == EXACT
        same = (val == out.lam[k]) if exact else math.isclose(float(val), float(out.lam[k]), rel_tol=1e-13)
        if not same:
            raise ArithmeticError(f"deformation changed the stationary parameter {k}")
    return out
