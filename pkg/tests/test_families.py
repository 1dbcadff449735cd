import math
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from convchains.errors import DomainError
from convchains.families import (
    FINITE_FAMILIES,
    Lattice,
    eta,
    involution,
    limit_map,
    measure,
    norm_sq,
    orthonormal,
    pi_value,
    poly,
    qm_second_family,
    truncation_point,
)
from convchains.tolerances import QM_ORTHO_TOL

unit = st.fractions(min_value=F(1, 20), max_value=F(19, 20), max_denominator=20)
positive = st.fractions(min_value=F(1, 10), max_value=5, max_denominator=10)

FINITE_GRID = {
    "krawtchouk": [{"p": p} for p in (F(1, 2), F(1, 3), F(2, 5), F(3, 4), F(5, 8))],
    "hahn": [{"a": a, "b": b} for a, b in ((1, 1), (F(1, 2), F(3, 2)), (F(7, 3), F(2, 5)),
                                            (3, F(1, 4)), (F(5, 4), 2))],
    "qhahn": [{"a": a, "b": b, "q": q} for a, b, q in ((F(1, 2), F(1, 3), F(1, 2)),
                                                       (F(2, 5), F(3, 4), F(1, 3)),
                                                       (F(1, 4), F(1, 4), F(2, 3)),
                                                       (F(5, 8), F(1, 7), F(3, 5)),
                                                       (F(3, 4), F(2, 3), F(1, 2)))],
}


def test_measure_examples():
    assert measure("krawtchouk", {"p": F(1, 2)}, Lattice.finite(2)).values == [F(1, 4), F(1, 2), F(1, 4)]
    assert measure("hahn", {"a": 1, "b": 1}, Lattice.finite(1)).values == [F(1, 2), F(1, 2)]
    assert pi_value("charlier", {"a": 1}, 0) == pytest.approx(0.3678794412, abs=1e-9)


def test_invalid_parameters():
    with pytest.raises(DomainError):
        measure("krawtchouk", {"p": F(3, 2)}, Lattice.finite(2))
    with pytest.raises(DomainError):
        measure("meixner", {"a": 1, "b": 1}, Lattice.semi_infinite())
    with pytest.raises(DomainError):
        measure("qhahn", {"a": F(1, 2), "b": F(1, 2)}, Lattice.finite(2))


def test_polynomial_examples():
    assert poly("krawtchouk", {"p": F(1, 2)}, 1, 1, 2) == 0
    assert norm_sq("krawtchouk", {"p": F(1, 2)}, 1, 2) == 2
    assert norm_sq("hahn", {"a": F(1, 3), "b": 2}, 0, 4) == 1
    for fam, params, N in (("krawtchouk", {"p": F(1, 3)}, 4), ("charlier", {"a": F(3, 2)}, None),
                           ("meixner", {"a": 2, "b": F(1, 3)}, None),
                           ("qmeixner", {"b": F(1, 4), "c": F(1, 2), "q": F(1, 2)}, None)):
        for n in range(4):
            assert poly(fam, params, n, 0, N) == 1
            assert poly(fam, params, 0, n, N) == 1


def test_orthonormal_examples():
    phi = orthonormal("krawtchouk", {"p": F(1, 2)}, 1, Lattice.finite(1))
    assert phi == pytest.approx([math.sqrt(0.5), -math.sqrt(0.5)])
    phi = orthonormal("hahn", {"a": 1, "b": 1}, 1, Lattice.finite(4))
    assert sum(v * v for v in phi) == pytest.approx(1.0, abs=1e-14)
    pis = measure("hahn", {"a": 1, "b": 1}, Lattice.finite(4)).values
    phi0 = orthonormal("hahn", {"a": 1, "b": 1}, 0, Lattice.finite(4))
    assert phi0 == pytest.approx([math.sqrt(p) for p in pis])


def test_eta():
    assert eta(0, F(1, 2)) == 0
    assert eta(1, F(1, 2)) == 1
    assert eta(2, F(1, 2)) == 3


@pytest.mark.parametrize("family", FINITE_FAMILIES)
def test_finite_measures_sum_to_one(family):
    for params in FINITE_GRID[family]:
        for N in range(13):
            values = measure(family, params, Lattice.finite(N)).values
            assert sum(values) == 1 and all(v > 0 for v in values)


@pytest.mark.parametrize("family", FINITE_FAMILIES)
def test_exact_orthogonality(family):
    for params in FINITE_GRID[family][:3]:
        for N in range(1, 9):
            pis = measure(family, params, Lattice.finite(N)).values
            P = [[poly(family, params, n, x, N) for x in range(N + 1)] for n in range(N + 1)]
            for m in range(N + 1):
                for n in range(m, N + 1):
                    s = sum(pis[x] * P[m][x] * P[n][x] for x in range(N + 1))
                    assert s == (1 / norm_sq(family, params, n, N) if m == n else 0)


@given(p=unit, N=st.integers(1, 10), n=st.integers(0, 10), x=st.integers(0, 10))
def test_krawtchouk_self_duality(p, N, n, x):
    n, x = min(n, N), min(x, N)
    assert poly("krawtchouk", {"p": p}, n, x, N) == poly("krawtchouk", {"p": p}, x, n, N)


@given(a=positive, n=st.integers(0, 10), x=st.integers(0, 10))
def test_charlier_self_duality(a, n, x):
    assert poly("charlier", {"a": a}, n, x) == poly("charlier", {"a": a}, x, n)


@given(a=positive, b=unit, n=st.integers(0, 10), x=st.integers(0, 10))
def test_meixner_self_duality(a, b, n, x):
    assert poly("meixner", {"a": a, "b": b}, n, x) == poly("meixner", {"a": a, "b": b}, x, n)


@given(p=unit, N=st.integers(1, 10))
def test_krawtchouk_reflections(p, N):
    for x in range(N + 1):
        assert pi_value("krawtchouk", {"p": p}, N - x, N) == pi_value("krawtchouk", {"p": 1 - p}, x, N)
        for n in range(N + 1):
            lhs = poly("krawtchouk", {"p": p}, n, N - x, N)
            rhs = (-(1 - p) / p) ** n * poly("krawtchouk", {"p": 1 - p}, n, x, N)
            assert lhs == rhs


@given(a=positive, b=positive, N=st.integers(1, 8))
def test_hahn_reflections(a, b, N):
    for x in range(N + 1):
        assert pi_value("hahn", {"a": a, "b": b}, N - x, N) == pi_value("hahn", {"a": b, "b": a}, x, N)
    for n in range(N + 1):
        ratios = {poly("hahn", {"a": a, "b": b}, n, N - x, N) / poly("hahn", {"a": b, "b": a}, n, x, N)
                  for x in range(N + 1) if poly("hahn", {"a": b, "b": a}, n, x, N) != 0}
        assert len(ratios) <= 1  # P_n(N - x; a, b) is a constant multiple of P_n(x; b, a)


@given(a=unit, b=unit, q=unit, N=st.integers(1, 8))
def test_qhahn_measure_reflection(a, b, q, N):
    for x in range(N + 1):
        lhs = pi_value("qhahn", {"a": a, "b": b, "q": q}, N - x, N)
        rhs = (a * b) ** x * b ** (-N) * pi_value("qhahn", {"a": b, "b": a, "q": q}, x, N)
        assert lhs == rhs


@given(a=unit, b=unit, q=unit, N=st.integers(1, 6), n=st.integers(0, 6))
def test_qhahn_polynomial_degree_in_eta(a, b, q, N, n):
    n = min(n, N)
    if n + 1 > N:
        return
    params = {"a": a, "b": b, "q": q}
    # divided differences of order n + 1 in eta vanish
    nodes = [eta(x, q) for x in range(n + 2)]
    values = [poly("qhahn", params, n, x, N) for x in range(n + 2)]
    table = list(values)
    for level in range(1, n + 2):
        table = [(table[i + 1] - table[i]) / (nodes[i + level] - nodes[i]) for i in range(len(table) - 1)]
    assert table == [0]


def test_qmeixner_second_family_examples():
    params = {"b": F(1, 4), "c": F(1, 2), "q": F(1, 2)}
    _, p0, d0 = qm_second_family(params, 0, 3)
    assert p0 == 1 and d0 == 1
    _, pn0, _ = qm_second_family(params, 3, 0)
    assert pn0 == 1
    lam = {k: float(v) for k, v in params.items()}
    x_max = truncation_point("qmeixner", lam)[0] + 20
    phi = orthonormal("qmeixner", lam, 0, Lattice.semi_infinite(), x_max)
    phim = orthonormal("qmeixner-second", lam, 0, Lattice.semi_infinite(), x_max)
    assert abs(sum(u * v for u, v in zip(phi, phim))) < QM_ORTHO_TOL


def test_involution_is_an_involution():
    params = {"b": F(1, 4), "c": F(3, 2), "q": F(1, 3)}
    assert involution(involution(params)) == params


def test_limit_maps():
    assert limit_map("K->C", {"a": F(1, 2)}, 100) == {"p": F(1, 200)}
    assert limit_map("H->M", {"a": 2, "b": F(1, 2)}, 10)["b"] == 10
    N = 10 ** 4
    kp = limit_map("K->C", {"a": 1.0}, N)
    diff = max(abs(pi_value("krawtchouk", kp, x, N) - pi_value("charlier", {"a": 1.0}, x)) for x in range(9))
    assert diff < 1e-3
    with pytest.raises(DomainError):
        limit_map("K->C", {"a": 5}, 2)
    with pytest.raises(DomainError):
        limit_map("X->Y", {}, 2)
