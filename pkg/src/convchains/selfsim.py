"""Convolutional self-similarity of the stationary measures.

Two measures of one family, combined by one of three summation shapes,
reproduce a single measure of that family with transformed parameters:

* ``prefix-sum``: ``sum_{z=0}^{x} L(x-z, N-z) R(z, N) = pi(x, N)``
* ``window-sum``: ``sum_{z=x}^{y} L(x, z) R(z, y) = pi(x, y)``
* ``suffix-sum``: ``sum_{z=y}^{x} L(x-z, N-z) R(z-y, N-y) = pi(x-y, N-y)``

On semi-infinite lattices the size arguments are dropped. Each identity is
a data row (shape, family, wiring of ``L``, ``R`` and the right side).

For the Charlier, Meixner and little q-Jacobi measures the value at 0 is
transcendental but factorizes: ``pi_L(0) pi_R(0) = pi(0)``. Dividing it out
leaves an identity between rational functions (``pi(x) / pi(0)``), which is
checked exactly; the full float form is checked as well.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

from .errors import DomainError
from .families import FINITE_FAMILIES, MeasureTable, _ratio, validate
from .numerics import IdentityReport, is_exact, one_like, parse_scalar, EXACT
from .tolerances import FLOAT_RTOL

SHAPES = ("prefix-sum", "window-sum", "suffix-sum")


@dataclass(frozen=True)
class SelfSimilarity:
    ident: str
    shape: str
    family: str
    param_names: Tuple[str, ...]
    left: Callable[[dict], dict]
    right: Callable[[dict], dict]
    rhs: Callable[[dict], dict]
    swappable: bool = False  # identity also holds with the two parameter sets exchanged


IDENTITIES: Dict[str, SelfSimilarity] = {}


def _register(row: SelfSimilarity):
    IDENTITIES[row.ident] = row


# Charlier and Meixner ------------------------------------------------------
for _shape, _suffix in (("prefix-sum", "1"), ("suffix-sum", "2")):
    _register(SelfSimilarity(
        "CC" + _suffix, _shape, "charlier", ("a1", "a2"),
        lambda v: {"a": v["a2"]}, lambda v: {"a": v["a1"]},
        lambda v: {"a": v["a1"] + v["a2"]}, swappable=True))
    _register(SelfSimilarity(
        "MM" + _suffix, _shape, "meixner", ("a1", "a2", "b"),
        lambda v: {"a": v["a2"], "b": v["b"]}, lambda v: {"a": v["a1"], "b": v["b"]},
        lambda v: {"a": v["a1"] + v["a2"], "b": v["b"]}, swappable=True))

# Krawtchouk ----------------------------------------------------------------
_register(SelfSimilarity(
    "K-thconK", "prefix-sum", "krawtchouk", ("a1", "a2"),
    lambda v: {"p": v["a2"]}, lambda v: {"p": v["a1"]},
    lambda v: {"p": 1 - (1 - v["a1"]) * (1 - v["a2"])}, swappable=True))
_register(SelfSimilarity(
    "K-pipi-i", "window-sum", "krawtchouk", ("a1", "a2"),
    lambda v: {"p": v["a2"]}, lambda v: {"p": v["a1"]},
    lambda v: {"p": v["a1"] * v["a2"]}, swappable=True))
_register(SelfSimilarity(
    "K-pipi-ii", "suffix-sum", "krawtchouk", ("a1", "a2"),
    lambda v: {"p": v["a2"]}, lambda v: {"p": v["a1"]},
    lambda v: {"p": 1 - (1 - v["a1"]) * (1 - v["a2"])}, swappable=True))


# Hahn and q-Hahn -----------------------------------------------------------
def _hahn_rows(prefix, family, plus, extra=()):
    """The five Hahn-type identities; ``plus`` combines parameters (sum or product)."""

    def w(a, b):
        return lambda v: dict({"a": a(v), "b": b(v)}, **{k: v[k] for k in extra})

    def a1(v):
        return v["a1"]

    def b1(v):
        return v["b1"]

    def a2(v):
        return v["a2"]

    def b2(v):
        return v["b2"]

    names = ("a1", "b1", "a2", "b2") + tuple(extra)

    def ab(v):
        return plus(v["a1"], v["b1"])

    rows = [
        ("1", "prefix-sum", w(a1, b1), w(a2, ab), w(lambda v: plus(v["a1"], v["a2"]), b1)),
        ("2", "window-sum", w(a1, b1), w(ab, b2), w(a1, lambda v: plus(v["b1"], v["b2"]))),
        ("3", "suffix-sum", w(a1, b1), w(a2, ab), w(lambda v: plus(v["a1"], v["a2"]), b1)),
        ("4", "window-sum", w(ab, b2), w(a1, b1), w(a1, lambda v: plus(v["b1"], v["b2"]))),
        ("5", "suffix-sum", w(a2, ab), w(a1, b1), w(lambda v: plus(v["a1"], v["a2"]), b1)),
    ]
    for tag, shape, left, right, rhs in rows:
        _register(SelfSimilarity(f"{prefix}-{tag}", shape, family, names, left, right, rhs))


_hahn_rows("H", "hahn", lambda s, t: s + t)
_hahn_rows("qH", "qhahn", lambda s, t: s * t, extra=("q",))

# little q-Jacobi -------------------------------------------------------------
for _shape, _suffix in (("prefix-sum", "1"), ("suffix-sum", "2")):
    _register(SelfSimilarity(
        "LqJ-" + _suffix, _shape, "little-qjacobi", ("a1", "b1", "b2", "q"),
        lambda v: {"a": v["a1"], "b": v["b1"], "q": v["q"]},
        lambda v: {"a": v["a1"] * v["b1"], "b": v["b2"], "q": v["q"]},
        lambda v: {"a": v["a1"], "b": v["b1"] * v["b2"], "q": v["q"]}))

IDENTITY_IDS = tuple(IDENTITIES)


# ---------------------------------------------------------------- evaluation

class _Ratio:
    """Exact ``pi(x) / pi(0)`` for a semi-infinite family, cached by ``x``."""

    def __init__(self, family, params):
        self.family = family
        self.v = validate(family, params)
        self.values = [one_like(*self.v.values())]

    def __call__(self, x, M=None):
        if x < 0:
            return 0 * self.values[0]
        while len(self.values) <= x:
            j = len(self.values) - 1
            self.values.append(self.values[-1] * _ratio(self.family, self.v, j, None))
        return self.values[x]


def _measure(family: str, params: dict, ratio: bool):
    if family in FINITE_FAMILIES:
        return MeasureTable(family, params)
    if ratio:
        return _Ratio(family, params)
    return MeasureTable(family, params)


def _lhs(shape, L, R, x, y, N, zero):
    finite = N is not None
    if shape == "prefix-sum":
        terms = (L(x - z, N - z if finite else None) * R(z, N) for z in range(x + 1))
    elif shape == "window-sum":
        terms = (L(x, z) * R(z, y) for z in range(x, y + 1))
    elif shape == "suffix-sum":
        terms = (L(x - z, N - z if finite else None) * R(z - y, N - y if finite else None)
                 for z in range(y, x + 1))
    else:
        raise DomainError(f"unknown shape {shape!r}; expected one of {SHAPES}")
    total = zero
    for t in terms:
        total = total + t
    return total


def convolve_measures(shape: str, left: tuple, right: tuple, x: int, y: Optional[int] = None,
                      N: Optional[int] = None, ratio: bool = False):
    """Literal value of one convolution shape applied to two measures.

    ``left`` and ``right`` are ``(family, params)`` pairs. ``y`` is needed by
    the window and suffix shapes, ``N`` by prefix and suffix shapes on finite
    families. ``ratio=True`` replaces semi-infinite measures by ``pi(x)/pi(0)``.
    """
    if x < 0 or (y is not None and y < 0):
        raise DomainError("lattice indices must be nonnegative")
    if shape in ("window-sum", "suffix-sum") and y is None:
        raise DomainError(f"{shape} needs y")
    if shape == "window-sum" and x > y:
        raise DomainError("window-sum needs x <= y")
    if shape == "suffix-sum" and y > x:
        raise DomainError("suffix-sum needs y <= x")
    finite = left[0] in FINITE_FAMILIES
    if finite and shape != "window-sum" and (N is None or x > N):
        raise DomainError("finite families need N >= x")
    L = _measure(left[0], left[1], ratio)
    R = _measure(right[0], right[1], ratio)
    zero = L(0, 0) * 0 if finite else L(0) * 0
    return _lhs(shape, L, R, x, y, N if finite else None, zero)


def _points(shape, finite, N_max):
    """Index tuples ``(x, y, N)`` covering the lattice up to ``N_max``."""
    if shape == "window-sum":
        return [(x, y, None) for y in range(N_max + 1) for x in range(y + 1)]
    if finite:
        if shape == "prefix-sum":
            return [(x, None, N) for N in range(N_max + 1) for x in range(N + 1)]
        return [(x, y, N) for N in range(N_max + 1) for x in range(N + 1) for y in range(x + 1)]
    if shape == "prefix-sum":
        return [(x, None, None) for x in range(N_max + 1)]
    return [(x, y, None) for x in range(N_max + 1) for y in range(x + 1)]


def _rhs_value(shape, table, x, y, N):
    if shape == "prefix-sum":
        return table(x, N)
    if shape == "window-sum":
        return table(x, y)
    return table(x - y, None if N is None else N - y)


def _prepare(ident: str, params: dict, swap: bool):
    try:
        row = IDENTITIES[ident]
    except KeyError:
        raise DomainError(f"unknown identity {ident!r}; expected one of {IDENTITY_IDS}") from None
    if set(params) != set(row.param_names):
        raise DomainError(f"{ident}: expected parameters {row.param_names}, got {tuple(params)}")
    v = {k: parse_scalar(x, EXACT) if isinstance(x, (str, int)) else x for k, x in params.items()}
    if swap:
        if not row.swappable:
            raise DomainError(f"{ident} has no swapped form; the exchanged orders are separate identities")
        v = dict(v, a1=v["a2"], a2=v["a1"])
    left, right, rhs = row.left(v), row.right(v), row.rhs(v)
    for p in (left, right, rhs):
        validate(row.family, p)
    return row, v, left, right, rhs


def verify_identity(ident: str, params: dict, N_max: int = 10, swap: bool = False,
                    rtol: float = FLOAT_RTOL) -> IdentityReport:
    """Check ``LHS = RHS`` at every lattice point up to ``N_max``.

    Finite families with rational parameters give an exact verdict. Semi-
    infinite families are compared in ratio form (exact for rational
    parameters) and, in addition, in full float form within ``rtol``.
    ``swap`` exchanges ``a1`` and ``a2`` for the identities symmetric in the
    two measures. Parameters outside the validity region give a
    ``domain-error`` report.
    """
    try:
        row, v, left, right, rhs = _prepare(ident, params, swap)
    except DomainError as exc:
        return IdentityReport(ident, dict(params), N_max, "domain-error", failures=[str(exc)])
    finite = row.family in FINITE_FAMILIES
    exact = all(is_exact(x) for x in v.values())
    report = IdentityReport(ident, dict(params), N_max, "exact" if exact else "max-error")

    forms = [True] if finite else [True, False]  # ratio form, then full float form
    for ratio in forms:
        L = _measure(row.family, left, ratio)
        R = _measure(row.family, right, ratio)
        T = _measure(row.family, rhs, ratio)
        zero = 0 * one_like(*v.values()) if (finite or ratio) else 0.0
        compare_exact = exact and (finite or ratio)
        for x, y, N in _points(row.shape, finite, N_max):
            lhs = _lhs(row.shape, L, R, x, y, N, zero)
            target = _rhs_value(row.shape, T, x, y, N)
            report.checked += 1
            if compare_exact:
                if lhs != target:
                    report.verdict = "max-error"
                    report.failures.append(((x, y, N), lhs, target))
                    report.max_error = max(report.max_error, abs(float(lhs - target)))
            else:
                err = abs(float(lhs) - float(target)) / max(1.0, abs(float(target)))
                report.max_error = max(report.max_error, err)
                if err > rtol:
                    report.failures.append(((x, y, N), lhs, target))
    if report.failures:
        report.verdict = "max-error"
    return report
