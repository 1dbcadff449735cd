"""Scalar backends, Pochhammer symbols and terminating (q-)hypergeometric sums.

Two scalar backends are used throughout the package:

* ``"exact"``: :class:`fractions.Fraction` (ints are accepted as well). Every
  finite-lattice quantity with rational parameters stays exact.
* ``"float"``: Python floats, needed whenever an infinite product or an
  exponential normalizes a measure.

Functions here are generic: they only use ``+ - * /`` and comparisons with
zero, so they return whatever scalar type they are given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import DomainError, PoleError
from .tolerances import FLOAT_RTOL, QPROD_STOP

INFINITY = math.inf

EXACT = "exact"
FLOAT = "float"
BACKENDS = (EXACT, FLOAT)


# ---------------------------------------------------------------- scalars

def parse_scalar(value, backend=EXACT):
    """Convert ``value`` (str ``"num/den"``, int, float or Fraction) to a backend scalar."""
    if backend not in BACKENDS:
        raise DomainError(f"unknown backend {backend!r}")
    if isinstance(value, str):
        value = value.strip()
        value = Fraction(value)
    if backend == EXACT:
        if isinstance(value, float):
            return Fraction(value)
        return Fraction(value)
    return float(value)


def is_exact(value) -> bool:
    return isinstance(value, (int, Fraction)) and not isinstance(value, bool)


def backend_of(*values) -> str:
    """``"exact"`` when every value is rational, ``"float"`` otherwise."""
    return EXACT if all(is_exact(v) for v in values) else FLOAT


def one_like(*values):
    """Multiplicative unit in the backend implied by ``values``."""
    return Fraction(1) if all(is_exact(v) for v in values) else 1.0


def to_backend(value, backend):
    return Fraction(value) if backend == EXACT else float(value)


def format_scalar(value) -> str:
    """Rationals as ``num/den``, floats as the shortest round-trip repr."""
    if is_exact(value):
        value = Fraction(value)
        if value.denominator == 1:
            return str(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    return repr(float(value))


# ---------------------------------------------------------------- Pochhammer

def pochhammer(a, k: int):
    """Rising factorial ``(a)_k = a (a+1) ... (a+k-1)``."""
    if k < 0:
        raise DomainError("pochhammer order must be nonnegative")
    result = one_like(a)
    for j in range(k):
        result = result * (a + j)
    return result


def pochhammer_prod(params: Sequence, k: int):
    result = one_like(*params)
    for a in params:
        result = result * pochhammer(a, k)
    return result


def q_pochhammer(a, q, k):
    """``(a;q)_k``; ``k=INFINITY`` gives the truncated infinite product (float only).

    The infinite product multiplies factors until ``|a q^j| < 1e-18``; for
    ``|a| <= 10`` and ``q <= 0.9`` the neglected tail changes the value by a
    relative amount below ``1e-15``.
    """
    if k == INFINITY:
        if is_exact(a) and is_exact(q):
            raise DomainError("infinite q-Pochhammer is transcendental; use the float backend")
        a, q = float(a), float(q)
        if not abs(q) < 1.0:
            raise DomainError("infinite q-Pochhammer needs |q| < 1")
        result = 1.0
        term = a
        while abs(term) >= QPROD_STOP:
            result *= 1.0 - term
            term *= q
        return result
    if k < 0:
        raise DomainError("q-Pochhammer order must be nonnegative")
    result = one_like(a, q)
    qj = 1
    for _ in range(int(k)):
        result = result * (1 - a * qj)
        qj = qj * q
    return result


def q_pochhammer_prod(params: Sequence, q, k):
    result = one_like(q, *params) if k != INFINITY else 1.0
    for a in params:
        result = result * q_pochhammer(a, q, k)
    return result


def binomial(N: int, x: int) -> int:
    if x < 0 or x > N:
        return 0
    return math.comb(N, x)


def q_binomial(N: int, x: int, q):
    """Gaussian binomial ``(q;q)_N / ((q;q)_x (q;q)_{N-x})``; zero outside ``0..N``."""
    if x < 0 or x > N:
        return 0 * one_like(q)
    if x == 0 or x == N:
        return one_like(q)
    return q_pochhammer(q, q, N) / (q_pochhammer(q, q, x) * q_pochhammer(q, q, N - x))


def q_power(q, e: int):
    """``q**e`` for possibly negative integer ``e`` without leaving the backend."""
    if e >= 0:
        return q ** e
    return 1 / (q ** (-e))


def triangular(x: int) -> int:
    """``binom(x, 2)``."""
    return x * (x - 1) // 2


# ---------------------------------------------------------------- series

@dataclass(frozen=True)
class SeriesSpec:
    """A terminating ``pFq`` or ``p phi q`` series.

    ``numerator[0]`` is ``-n`` (or ``q^{-n}``) so the sum stops after
    ``order + 1`` terms.
    """

    numerator: tuple
    denominator: tuple
    argument: object
    order: int
    kind: str = "hypergeometric"

    def __post_init__(self):
        object.__setattr__(self, "numerator", tuple(self.numerator))
        object.__setattr__(self, "denominator", tuple(self.denominator))
        if self.order < 0:
            raise DomainError("series order must be nonnegative")
        if self.kind not in ("hypergeometric", "basic-hypergeometric"):
            raise DomainError(f"unknown series kind {self.kind!r}")


def _series_terms(spec: SeriesSpec):
    term = one_like(spec.argument, *spec.numerator, *spec.denominator)
    terms = [term]
    z = spec.argument
    for k in range(spec.order):
        num = 1
        for a in spec.numerator:
            num = num * (a + k)
        den = k + 1
        for b in spec.denominator:
            factor = b + k
            if factor == 0:
                raise PoleError(k + 1)
            den = den * factor
        term = term * num * z / den
        terms.append(term)
    return terms


def hyper_terminating(spec: SeriesSpec):
    """Sum of the first ``order + 1`` terms of ``pFq(num; den; z)``.

    Exact for rational input; float input is summed with :func:`math.fsum`.
    """
    terms = _series_terms(spec)
    if all(is_exact(t) for t in terms):
        return sum(terms, Fraction(0))
    return math.fsum(float(t) for t in terms)


def hyper(numerator, denominator, z, n: int):
    return hyper_terminating(SeriesSpec(tuple(numerator), tuple(denominator), z, n))


def _qseries_terms(spec: SeriesSpec, q):
    r, s = len(spec.numerator), len(spec.denominator)
    extra = 1 + s - r
    term = one_like(q, spec.argument, *spec.numerator, *spec.denominator)
    terms = [term]
    z = spec.argument
    qk = 1
    for k in range(spec.order):
        num = 1
        for a in spec.numerator:
            num = num * (1 - a * qk)
        den = 1 - qk * q
        for b in spec.denominator:
            factor = 1 - b * qk
            if factor == 0:
                raise PoleError(k + 1)
            den = den * factor
        step = num * z / den
        if extra:
            step = step * ((-qk) ** extra)
        term = term * step
        terms.append(term)
        qk = qk * q
    return terms


def qhyper_terminating(spec: SeriesSpec, q):
    """Sum of the first ``order + 1`` terms of ``r phi s(num; den; q, z)``.

    Includes the ``((-1)^k q^{k(k-1)/2})^{1+s-r}`` factor so ``r != s+1`` works.
    """
    terms = _qseries_terms(spec, q)
    if all(is_exact(t) for t in terms) and is_exact(q):
        return sum(terms, Fraction(0))
    return math.fsum(float(t) for t in terms)


def qhyper(numerator, denominator, q, z, n: int):
    spec = SeriesSpec(tuple(numerator), tuple(denominator), z, n, "basic-hypergeometric")
    return qhyper_terminating(spec, q)


def qhyper_series(numerator, denominator, q, z, tol=1e-17, max_terms=100000):
    """Non-terminating ``r phi r-1`` sum in floats, for ``|z| < 1``.

    Only used to evaluate inner sums of closed-form eigenvalues; stops once a
    term drops below ``tol`` times the running sum magnitude.
    """
    q, z = float(q), float(z)
    numerator = [float(a) for a in numerator]
    denominator = [float(b) for b in denominator]
    total = [1.0]
    term = 1.0
    qk = 1.0
    for k in range(max_terms):
        num = 1.0
        for a in numerator:
            num *= 1.0 - a * qk
        den = 1.0 - qk * q
        for b in denominator:
            factor = 1.0 - b * qk
            if factor == 0.0:
                raise PoleError(k + 1)
            den *= factor
        term *= num * z / den
        total.append(term)
        qk *= q
        if term == 0.0 or abs(term) < tol * abs(math.fsum(total)):
            if k > 4:
                return math.fsum(total)
    raise DomainError("non-terminating q-series did not converge")


def series_scale(spec: SeriesSpec, q=None):
    """``sum_k |term_k|``, the natural scale for float round-off in a series."""
    terms = _series_terms(spec) if q is None else _qseries_terms(spec, q)
    return math.fsum(abs(float(t)) for t in terms)


# ---------------------------------------------------------------- identity oracles

@dataclass
class IdentityReport:
    """Outcome of checking one identity over a range of orders or lattice sizes."""

    identity: str
    params: dict
    n_max: int
    verdict: str
    max_error: float = 0.0
    checked: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.verdict == "exact" or (self.verdict == "max-error" and not self.failures)


def _require(cond, message):
    if not cond:
        raise DomainError(message)


def _nonvanishing(params, n, what):
    for b in params:
        for k in range(n):
            if b + k == 0:
                raise DomainError(f"{what} Pochhammer ({b})_{k + 1} vanishes")


def _q_nonvanishing(params, q, n, what):
    for b in params:
        qk = 1
        for k in range(n):
            if 1 - b * qk == 0:
                raise DomainError(f"{what} q-Pochhammer ({b};q)_{k + 1} vanishes")
            qk = qk * q


def _check_q(q):
    _require(0 < q < 1, "q must lie in (0, 1)")


def _chu_vandermonde(p, n):
    b, c = p["b"], p["c"]
    _nonvanishing([c], n, "denominator")
    lhs = hyper([-n, b], [c], 1, n)
    rhs = pochhammer(c - b, n) / pochhammer(c, n)
    return lhs, rhs


def _pfaff_saalschutz(p, n):
    a, b, c = p["a"], p["b"], p["c"]
    d = 1 + a + b - c - n
    _nonvanishing([c, c - a - b, d], n, "denominator")
    lhs = hyper([-n, a, b], [c, d], 1, n)
    rhs = pochhammer_prod([c - a, c - b], n) / pochhammer_prod([c, c - a - b], n)
    return lhs, rhs


def _q_chu_vandermonde(p, n):
    b, c, q = p["b"], p["c"], p["q"]
    _check_q(q)
    _require(b != 0, "b must be nonzero")
    _q_nonvanishing([c], q, n, "denominator")
    lhs = qhyper([q_power(q, -n), b], [c], q, c * q_power(q, n) / b, n)
    rhs = q_pochhammer(c / b, q, n) / q_pochhammer(c, q, n)
    return lhs, rhs


def _q_pfaff_saalschutz(p, n):
    a, b, c, q = p["a"], p["b"], p["c"], p["q"]
    _check_q(q)
    _require(a != 0 and b != 0 and c != 0, "a, b, c must be nonzero")
    d = a * b * q_power(q, 1 - n) / c
    _q_nonvanishing([c, c / (a * b), d], q, n, "denominator")
    lhs = qhyper([q_power(q, -n), a, b], [c, d], q, q, n)
    rhs = q_pochhammer_prod([c / a, c / b], q, n) / q_pochhammer_prod([c, c / (a * b)], q, n)
    return lhs, rhs


def _hahn_normalization(p, n):
    a, b = p["a"], p["b"]
    _nonvanishing([a + b], n, "right-hand")
    lhs = sum(binomial(n, k) * pochhammer(a, k) * pochhammer(b, n - k) for k in range(n + 1))
    return lhs, pochhammer(a + b, n)


def _hahn_shifted_sum(p, n):
    a, b1, b2, m = p["a"], p["b1"], p["b2"], int(p["m"])
    s = a + b1 + b2
    _nonvanishing([s, a + b1], m + n, "denominator")
    lhs = sum(
        binomial(n, k) * pochhammer(b1, n - k) * pochhammer(b2, k)
        * pochhammer(a, m + k) / pochhammer(s, m + k)
        for k in range(n + 1)
    )
    rhs = (pochhammer(a, m) * pochhammer(b1 + b2, n) / pochhammer(s, m + n)
           * pochhammer(a + b1, m + n) / pochhammer(a + b1, m))
    return lhs, rhs


def _qhahn_normalization(p, n):
    a, b, q = p["a"], p["b"], p["q"]
    _check_q(q)
    lhs = sum(q_binomial(n, k, q) * q_pochhammer(a, q, k) * q_pochhammer(b, q, n - k) * a ** (n - k)
              for k in range(n + 1))
    return lhs, q_pochhammer(a * b, q, n)


def _qhahn_shifted_sum(p, n):
    a, b1, b2, q, m = p["a"], p["b1"], p["b2"], p["q"], int(p["m"])
    _check_q(q)
    s = a * b1 * b2
    _q_nonvanishing([s, a * b1], q, m + n, "denominator")
    lhs = sum(
        q_binomial(n, k, q) * q_pochhammer(b1, q, n - k) * q_pochhammer(b2, q, k)
        * b1 ** k * q_pochhammer(a, q, m + k) / q_pochhammer(s, q, m + k)
        for k in range(n + 1)
    )
    rhs = (q_pochhammer(a, q, m) * q_pochhammer(b1 * b2, q, n) / q_pochhammer(s, q, m + n)
           * q_pochhammer(a * b1, q, m + n) / q_pochhammer(a * b1, q, m))
    return lhs, rhs


def _falling_moment(p, k):
    N, b = int(p["N"]), p["b"]
    _require(0 < b < 1, "b must lie in (0, 1)")
    lhs = sum(binomial(N, y) * b ** y * (1 - b) ** (N - y) * pochhammer(-y, k) for y in range(N + 1))
    return lhs, pochhammer(-N, k) * b ** k


def _krawtchouk_generating_function(p, N):
    """Coefficientwise in t: returns the list of (lhs, rhs) over x and t-powers."""
    prob = p["p"]
    _require(0 < prob < 1, "p must lie in (0, 1)")
    ratio = -(1 - prob) / prob
    pairs = []
    for x in range(N + 1):
        for j in range(N + 1):
            lhs = binomial(N, j) * hyper([-j, -x], [-N], 1 / prob, j)
            rhs = sum(binomial(x, i) * ratio ** i * binomial(N - x, j - i) for i in range(j + 1))
            pairs.append((lhs, rhs))
    return pairs


# name -> (evaluator, smallest order)
IDENTITIES = {
    "chu-vandermonde": _chu_vandermonde,
    "pfaff-saalschutz": _pfaff_saalschutz,
    "q-chu-vandermonde": _q_chu_vandermonde,
    "q-pfaff-saalschutz": _q_pfaff_saalschutz,
    "hahn-normalization": _hahn_normalization,
    "hahn-shifted-sum": _hahn_shifted_sum,
    "qhahn-normalization": _qhahn_normalization,
    "qhahn-shifted-sum": _qhahn_shifted_sum,
    "falling-moment": _falling_moment,
    "krawtchouk-generating-function": _krawtchouk_generating_function,
}


def identity_oracle(identity: str, params: dict, n_max: int, rtol=FLOAT_RTOL) -> IdentityReport:
    """Evaluate both sides of a summation identity for every order ``n <= n_max``.

    The left side is always a direct sum (or a terminating series evaluated
    term by term); the right side is the product closed form. Rational
    parameters give an exact verdict, float parameters a max relative error.
    """
    try:
        evaluate = IDENTITIES[identity]
    except KeyError:
        raise DomainError(f"unknown identity {identity!r}") from None
    exact = all(is_exact(v) for v in params.values())
    report = IdentityReport(identity, dict(params), n_max, "exact" if exact else "max-error")
    for n in range(n_max + 1):
        result = evaluate(params, n)
        pairs = result if isinstance(result, list) else [result]
        for lhs, rhs in pairs:
            report.checked += 1
            if exact:
                if lhs != rhs:
                    report.failures.append((n, lhs, rhs))
                    report.verdict = "max-error"
                    report.max_error = max(report.max_error, abs(float(lhs - rhs)))
            else:
                scale = max(1.0, abs(float(rhs)))
                err = abs(float(lhs) - float(rhs)) / scale
                report.max_error = max(report.max_error, err)
                if err > rtol:
                    report.failures.append((n, lhs, rhs))
    return report
