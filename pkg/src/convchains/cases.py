"""Catalog of registered chains.

Each :class:`CaseSpec` row is data: the convolution shape, the measure in each
kernel slot with its parameter wiring, the stationary family with its
parameter resolver, and the closed-form eigenvalue. Chain builders in
:mod:`convchains.chains` only interpret these rows.

Finite cases (rational arithmetic): K-i..K-v, H-i..H-iv, qH-i, qH-iii, qH-iv.
qH-ii is registered as rejected: the type-II shape with q-Hahn measures does
not satisfy detailed balance for any stationary q-Hahn parameters.

Semi-infinite cases (floats): C-conv1, C-conv3, C-iv, C-v, M-i, M-iii, M-iv,
qM-i, qM-iii, qM-iv. The q-Meixner kernels ``pi'`` are literal formulas, not
orthogonality measures.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional, Tuple

from .errors import CaseError, DomainError
from .families import validate
from .numerics import (
    INFINITY,
    hyper,
    pochhammer,
    q_pochhammer,
    q_power,
    qhyper,
    qhyper_series,
)


@dataclass(frozen=True)
class Slot:
    """A kernel slot: a family and the map from case parameters to its parameters."""

    family: str
    wiring: Callable[[dict], dict]


@dataclass(frozen=True)
class CaseSpec:
    case: str
    conv: str
    finite: bool
    family: str
    param_names: Tuple[str, ...]
    slots: Tuple[Slot, ...]
    resolve: Callable[[dict], dict]
    kappa: Callable[[dict, int], object]
    series: Optional[Callable[[dict, int], object]] = None
    kappa_minus: Optional[Callable[[dict, int], float]] = None
    rejected: Optional[str] = None
    note: str = ""


def _k(p):
    return lambda v: {"p": p(v)}


def _h(a, b):
    return lambda v: {"a": a(v), "b": b(v)}


def _qh(a, b):
    return lambda v: {"a": a(v), "b": b(v), "q": v["q"]}


def _get(name):
    return lambda v: v[name]


a_, b_, c_ = _get("a"), _get("b"), _get("c")
a1_, b1_, a2_, b2_ = _get("a1"), _get("b1"), _get("a2"), _get("b2")


def _qp(x, v, n):
    return q_pochhammer(x, v["q"], n)


def _qinf(*xs, q):
    out = 1.0
    for x in xs:
        out *= q_pochhammer(float(x), float(q), INFINITY)
    return out


# ---------------------------------------------------------------- closed-form eigenvalues

def _kappa_H_ii(v, n):
    a, b, c = v["a"], v["b"], v["c"]
    return hyper([-n, n + a + 2 * b + c - 1, b], [a + b, b + c], 1, n)


def _kappa_H_iv(v, n):
    a1, b1, a2, b2 = v["a1"], v["b1"], v["a2"], v["b2"]
    return hyper([-n, n + a1 + b1 + a2 + b2 - 1, b1, a2], [a1 + b1, b1 + a2, a2 + b2], 1, n)


def _kappa_qH_iv(v, n):
    a1, b1, a2, b2, q = v["a1"], v["b1"], v["a2"], v["b2"], v["q"]
    return qhyper([q_power(q, -n), a1 * b1 * a2 * b2 * q_power(q, n - 1), b1, a2],
                  [a1 * b1, b1 * a2, a2 * b2], q, q, n)


def _kappa_M_iv(v, n):
    a1, b1, a2 = v["a1"], v["b1"], v["a2"]
    return hyper([-n, b1, a2], [a1 + b1, b1 + a2], 1, n)


def _kappa_qM_iv(v, n):
    a1, b1, a2, q = v["a1"], v["b1"], v["a2"], v["q"]
    return qhyper([q_power(q, -n), b1, a2], [a1 * b1, b1 * a2], q, a1 * b1 * q_power(q, n), n)


def _kappa_minus_qM_i(v, n):
    a, b, c, q = (float(v[k]) for k in ("a", "b", "c", "q"))
    pre = _qinf(a, -c, q=q) / _qinf(a * b, -c / b, q=q)
    return pre * q_pochhammer(-c / b, q, n) / q_pochhammer(-c, q, n)


def _kappa_minus_qM_iii(v, n):
    a, b, c, q = (float(v[k]) for k in ("a", "b", "c", "q"))
    pre = _qinf(c, -b, q=q) / _qinf(a * c, -b / a, q=q)
    return pre * q_pochhammer(-b / a, q, n) / q_pochhammer(-b, q, n)


def _kappa_minus_qM_iv(v, n):
    """Finite sum over ``k`` of non-terminating ``3phi2`` sums at argument ``b1``."""
    a1, b1, a2, b2, q = (float(v[k]) for k in ("a1", "b1", "a2", "b2", "q"))
    pre = _qinf(b1, -b2, q=q) / _qinf(b1 * a2, -b2 / a2, q=q)
    total = []
    for k in range(n + 1):
        qk = q ** k
        coeff = (q_pochhammer(q ** (-n), q, k) * q_pochhammer(b1, q, k) * q_pochhammer(a2, q, k)
                 / (q_pochhammer(-b2, q, k) * q_pochhammer(a1 * b1, q, k) * q_pochhammer(q, q, k))
                 * (-b2 * q ** n / a2) ** k)
        inner = qhyper_series([a1, a2 * qk, -b2 * qk / a2], [-b2 * qk, a1 * b1 * qk], q, b1)
        total.append(coeff * inner)
    return pre * math.fsum(total)


# ---------------------------------------------------------------- registry

CASES: Dict[str, CaseSpec] = {}


def _register(spec: CaseSpec):
    CASES[spec.case] = spec


K, H, QH = "krawtchouk", "hahn", "qhahn"

_register(CaseSpec(
    "K-i", "I", True, K, ("a", "b"),
    (Slot(K, _k(a_)), Slot(K, _k(b_))),
    lambda v: {"p": v["b"] / (1 - v["a"] + v["a"] * v["b"])},
    lambda v, n: v["a"] ** n * (1 - v["b"]) ** n,
    series=lambda v, n: hyper([-n], [], 1 - v["a"] * (1 - v["b"]), n),
))
_register(CaseSpec(
    "K-ii", "II", True, K, ("a", "b"),
    (Slot(K, _k(a_)), Slot(K, _k(b_))),
    lambda v: {"p": v["b"] / (1 - v["a"] + v["b"])},
    lambda v, n: (v["a"] - v["b"]) ** n,
    series=lambda v, n: hyper([-n], [], 1 - v["a"] + v["b"], n),
))
_register(CaseSpec(
    "K-iii", "III", True, K, ("a", "b"),
    (Slot(K, _k(a_)), Slot(K, _k(b_))),
    lambda v: {"p": v["a"] * v["b"] / (1 - v["b"] + v["a"] * v["b"])},
    lambda v, n: (1 - v["a"]) ** n * v["b"] ** n,
    series=lambda v, n: hyper([-n], [], 1 - (1 - v["a"]) * v["b"], n),
))
_register(CaseSpec(
    "K-iv", "IV", True, K, ("a", "b", "c"),
    (Slot(K, _k(a_)), Slot(K, _k(b_)), Slot(K, _k(c_))),
    lambda v: {"p": v["b"] * v["c"] / (v["b"] * v["c"] + (1 - v["a"]) * (1 - v["c"]))},
    lambda v, n: (v["a"] + v["c"] - v["a"] * v["c"] - v["b"] * v["c"]) ** n,
))
_register(CaseSpec(
    "K-v", "V", True, K, ("a", "b", "c"),
    (Slot(K, _k(a_)), Slot(K, _k(b_)), Slot(K, _k(c_))),
    lambda v: {"p": v["b"] * v["c"] / (1 - v["a"] + v["b"] * v["c"])},
    lambda v, n: (v["a"] - v["b"] * v["c"]) ** n,
))
_register(CaseSpec(
    "H-i", "I", True, H, ("a", "b", "c"),
    (Slot(H, _h(a_, b_)), Slot(H, _h(b_, c_))),
    lambda v: {"a": v["a"] + v["b"], "b": v["c"]},
    lambda v, n: (pochhammer(v["a"], n) * pochhammer(v["c"], n)
                  / (pochhammer(v["a"] + v["b"], n) * pochhammer(v["b"] + v["c"], n))),
))
_register(CaseSpec(
    "H-ii", "II", True, H, ("a", "b", "c"),
    (Slot(H, _h(a_, b_)), Slot(H, _h(b_, c_))),
    lambda v: {"a": v["a"] + v["b"], "b": v["b"] + v["c"]},
    _kappa_H_ii,
))
_register(CaseSpec(
    "H-iii", "III", True, H, ("a", "b", "c"),
    (Slot(H, _h(a_, b_)), Slot(H, _h(c_, a_))),
    lambda v: {"a": v["c"], "b": v["a"] + v["b"]},
    lambda v, n: (pochhammer(v["b"], n) * pochhammer(v["c"], n)
                  / (pochhammer(v["a"] + v["b"], n) * pochhammer(v["a"] + v["c"], n))),
))
_register(CaseSpec(
    "H-iv", "IV", True, H, ("a1", "b1", "a2", "b2"),
    (Slot(H, _h(a1_, b1_)), Slot(H, _h(a2_, b2_)), Slot(H, _h(b1_, a2_))),
    lambda v: {"a": v["a1"] + v["b1"], "b": v["a2"] + v["b2"]},
    _kappa_H_iv,
))
_register(CaseSpec(
    "qH-i", "I", True, QH, ("a", "b", "c", "q"),
    (Slot(QH, _qh(a_, b_)), Slot(QH, _qh(b_, c_))),
    lambda v: {"a": v["a"] * v["b"], "b": v["c"], "q": v["q"]},
    lambda v, n: (v["b"] ** n * _qp(v["a"], v, n) * _qp(v["c"], v, n)
                  / (_qp(v["a"] * v["b"], v, n) * _qp(v["b"] * v["c"], v, n))),
))
_register(CaseSpec(
    "qH-ii", "II", True, QH, ("a", "b", "c", "q"),
    (Slot(QH, _qh(a_, b_)), Slot(QH, _qh(b_, c_))),
    lambda v: {},
    lambda v, n: None,
    rejected="the type-II shape with q-Hahn measures has no stationary q-Hahn measure",
))
_register(CaseSpec(
    "qH-iii", "III", True, QH, ("a", "b", "c", "q"),
    (Slot(QH, _qh(a_, b_)), Slot(QH, _qh(c_, a_))),
    lambda v: {"a": v["c"], "b": v["a"] * v["b"], "q": v["q"]},
    lambda v, n: (v["a"] ** n * _qp(v["b"], v, n) * _qp(v["c"], v, n)
                  / (_qp(v["a"] * v["b"], v, n) * _qp(v["a"] * v["c"], v, n))),
))
_register(CaseSpec(
    "qH-iv", "IV", True, QH, ("a1", "b1", "a2", "b2", "q"),
    (Slot(QH, _qh(a1_, b1_)), Slot(QH, _qh(a2_, b2_)), Slot(QH, _qh(b1_, a2_))),
    lambda v: {"a": v["a1"] * v["b1"], "b": v["a2"] * v["b2"], "q": v["q"]},
    _kappa_qH_iv,
))

# semi-infinite ------------------------------------------------------------

C, M, QM = "charlier", "meixner", "qmeixner"
QM_PRIMED = "qmeixner-primed"       # pi'(x, z): slot acting as lambda_2 of type I
QM_PRIMED_UP = "qmeixner-primed-up"  # pi'(z, y): slot lambda_2 of types III / IV

_register(CaseSpec(
    "C-conv1", "I", False, C, ("a", "b"),
    (Slot(K, _k(a_)), Slot(C, lambda v: {"a": v["b"]})),
    lambda v: {"a": v["b"] / (1 - v["a"])},
    lambda v, n: v["a"] ** n,
))
_register(CaseSpec(
    "C-conv3", "III", False, C, ("a", "b"),
    (Slot(C, lambda v: {"a": v["a"]}), Slot(K, _k(b_))),
    lambda v: {"a": v["a"] * v["b"] / (1 - v["b"])},
    lambda v, n: v["b"] ** n,
))
_register(CaseSpec(
    "C-iv", "IV", False, C, ("a", "b", "c"),
    (Slot(K, _k(a_)), Slot(C, lambda v: {"a": v["b"]}), Slot(K, _k(c_))),
    lambda v: {"a": v["b"] * v["c"] / ((1 - v["a"]) * (1 - v["c"]))},
    lambda v, n: (v["a"] + v["c"] - v["a"] * v["c"]) ** n,
))
_register(CaseSpec(
    "C-v", "V", False, C, ("a", "b", "c"),
    (Slot(K, _k(a_)), Slot(C, lambda v: {"a": v["b"]}), Slot(K, _k(c_))),
    lambda v: {"a": v["b"] * v["c"] / (1 - v["a"])},
    lambda v, n: v["a"] ** n,
))
_register(CaseSpec(
    "M-i", "I", False, M, ("a", "b", "c"),
    (Slot(H, _h(a_, b_)), Slot(M, lambda v: {"a": v["b"], "b": v["c"]})),
    lambda v: {"a": v["a"] + v["b"], "b": v["c"]},
    lambda v, n: pochhammer(v["a"], n) / pochhammer(v["a"] + v["b"], n),
))
_register(CaseSpec(
    "M-iii", "III", False, M, ("a", "b", "c"),
    (Slot(M, lambda v: {"a": v["a"], "b": v["b"]}), Slot(H, _h(c_, a_))),
    lambda v: {"a": v["c"], "b": v["b"]},
    lambda v, n: pochhammer(v["c"], n) / pochhammer(v["a"] + v["c"], n),
))
_register(CaseSpec(
    "M-iv", "IV", False, M, ("a1", "b1", "a2", "b2"),
    (Slot(H, _h(a1_, b1_)), Slot(M, lambda v: {"a": v["a2"], "b": v["b2"]}), Slot(H, _h(b1_, a2_))),
    lambda v: {"a": v["a1"] + v["b1"], "b": v["b2"]},
    _kappa_M_iv,
))
_register(CaseSpec(
    "qM-i", "I", False, QM, ("a", "b", "c", "q"),
    (Slot(QH, _qh(a_, b_)), Slot(QM_PRIMED, lambda v: {"b": v["b"], "c": v["c"], "q": v["q"]})),
    lambda v: {"b": v["a"] * v["b"] / v["q"], "c": v["c"] / (v["a"] * v["b"]), "q": v["q"]},
    lambda v, n: _qp(v["a"], v, n) / _qp(v["a"] * v["b"], v, n),
    kappa_minus=_kappa_minus_qM_i,
))
_register(CaseSpec(
    "qM-iii", "III", False, QM, ("a", "b", "c", "q"),
    (Slot(QM_PRIMED_UP, lambda v: {"a": v["a"], "b": v["b"], "q": v["q"]}), Slot(QH, _qh(c_, a_))),
    lambda v: {"b": v["c"] / v["q"], "c": v["b"] / (v["a"] * v["c"]), "q": v["q"]},
    lambda v, n: _qp(v["c"], v, n) / _qp(v["a"] * v["c"], v, n),
    kappa_minus=_kappa_minus_qM_iii,
))
_register(CaseSpec(
    "qM-iv", "IV", False, QM, ("a1", "b1", "a2", "b2", "q"),
    (Slot(QH, _qh(a1_, b1_)), Slot(QM_PRIMED_UP, lambda v: {"a": v["a2"], "b": v["b2"], "q": v["q"]}),
     Slot(QH, _qh(b1_, a2_))),
    lambda v: {"b": v["a1"] * v["b1"] / v["q"], "c": v["b2"] / (v["a1"] * v["b1"] * v["a2"]),
               "q": v["q"]},
    _kappa_qM_iv,
    kappa_minus=_kappa_minus_qM_iv,
))

FINITE_CASES = tuple(k for k, s in CASES.items() if s.finite and not s.rejected)
SEMI_INFINITE_CASES = tuple(k for k, s in CASES.items() if not s.finite)


def get_case(case: str) -> CaseSpec:
    try:
        spec = CASES[case]
    except KeyError:
        raise CaseError(f"unregistered case {case!r}") from None
    if spec.rejected:
        raise CaseError(f"case {case!r} is rejected: {spec.rejected}")
    return spec


def case_params(case: str, params: dict) -> dict:
    """Validate case parameters: names, per-slot family constraints and the resolved stationary family."""
    from .numerics import EXACT, parse_scalar

    spec = get_case(case)
    missing = [n for n in spec.param_names if n not in params]
    extra = [n for n in params if n not in spec.param_names]
    if missing or extra:
        raise DomainError(f"{case}: expected parameters {spec.param_names}, got {tuple(params)}")
    v = {}
    for n in spec.param_names:
        x = params[n]
        v[n] = parse_scalar(x, EXACT) if isinstance(x, (str, int)) else x
    for slot in spec.slots:
        if slot.family in (QM_PRIMED, QM_PRIMED_UP):
            w = slot.wiring(v)
            if not (w["b"] > 0 and 0 < w["q"] < 1 and ("c" not in w or w["c"] > 0)
                    and ("a" not in w or 0 < w["a"] < 1)):
                raise DomainError(f"{case}: primed q-Meixner kernel parameters out of range: {w}")
            if "c" in w and not w["b"] < 1:
                raise DomainError(f"{case}: need b < 1")
            continue
        validate(slot.family, slot.wiring(v))
    validate(spec.family, spec.resolve(v))
    return v
