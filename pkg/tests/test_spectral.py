import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from convchains.cases import FINITE_CASES
from convchains.chains import build_finite, build_semi_infinite, kappa_closed, resolve_lambda
from convchains.errors import BalanceError, CompletenessError, DomainError, NumericError
from convchains.families import Lattice, measure
from convchains.linalg import trace
from convchains.spectral import (
    closed_spectrum,
    convergence_bound,
    eigendecompose,
    evolve,
    evolve_matrix,
    kappa_minus_sum,
    kappa_sum,
    qm_extra_kappa,
    qm_orthogonality_error,
    qm_union_reconstruct,
    qmeixner_spectrum,
    reconstruct_from_vectors,
    sample_paths,
    semi_residual,
    spectral_reconstruct,
    symmetrize,
    total_variation,
)
from convchains.suites import parameter_grid

half = F(1, 2)
KI = {"a": half, "b": half}


def _pi(case, params, N):
    from convchains.cases import CASES

    return measure(CASES[case].family, resolve_lambda(case, params), Lattice.finite(N)).values


def test_symmetrize_example():
    sym = symmetrize(build_finite("K-i", KI, 1), [F(1, 3), F(2, 3)])
    r = math.sqrt(2) / 4
    np.testing.assert_allclose(sym.H, [[0.5, r], [r, 0.75]], atol=1e-15)
    assert sym.is_symmetric()
    assert symmetrize(build_finite("H-i", {"a": 1, "b": 1, "c": 1}, 3), _pi("H-i", {"a": 1, "b": 1, "c": 1}, 3)).is_symmetric()
    eye = [[F(int(i == j)) for j in range(3)] for i in range(3)]
    np.testing.assert_array_equal(symmetrize(eye, [F(1, 3)] * 3).H, np.eye(3))


def test_symmetrize_detects_wrong_measure():
    with pytest.raises(BalanceError):
        symmetrize(build_finite("K-i", KI, 2), [F(1, 4), F(1, 2), F(1, 4)])


def test_kappa_sum_examples():
    K = build_finite("K-i", KI, 4)
    lam = resolve_lambda("K-i", KI)
    assert kappa_sum(K, "krawtchouk", lam, 0) == 1
    assert kappa_sum(K, "krawtchouk", lam, 2) == F(1, 16)
    params = {"a": half, "b": half, "c": half}
    K = build_finite("H-ii", params, 3)
    assert kappa_sum(K, "hahn", resolve_lambda("H-ii", params), 1) == kappa_closed("H-ii", params, 1)


def test_eigendecompose_examples():
    sym = symmetrize(build_finite("K-i", KI, 1), [F(1, 3), F(2, 3)])
    spec = eigendecompose(sym)
    assert spec.kappa == pytest.approx([1.0, 0.25], abs=1e-14)
    assert spec.sign_changes[0] == 0
    K = build_finite("K-i", KI, 8)
    spec = eigendecompose(symmetrize(K, _pi("K-i", KI, 8)))
    assert max(abs(k - 0.25 ** n) for n, k in enumerate(spec.kappa)) < 1e-10


def test_eigendecompose_needs_expected_values_for_clusters():
    sym = symmetrize([[F(1), F(0)], [F(0), F(1)]], [half, half])
    with pytest.raises(NumericError):
        eigendecompose(sym)
    assert eigendecompose(sym, expected=[1, 1]).kappa == [1.0, 1.0]


def test_reconstruction_examples():
    spec = closed_spectrum("K-i", KI, 3)
    assert spectral_reconstruct(spec) == build_finite("K-i", KI, 3).rows()
    spec.kappa = [F(1)] * 4
    assert spectral_reconstruct(spec) == [[F(int(x == y)) for y in range(4)] for x in range(4)]
    with pytest.raises(CompletenessError):
        spectral_reconstruct(qmeixner_spectrum("qM-i", {"a": half, "b": half, "c": half, "q": half}))


@pytest.mark.parametrize("case", FINITE_CASES)
def test_trace_is_sum_of_eigenvalues(case):
    params = parameter_grid(case, 1)[0]
    for N in (2, 5):
        assert trace(build_finite(case, params, N).rows()) == sum(kappa_closed(case, params, n) for n in range(N + 1))


def test_float_reconstruction_from_numeric_vectors():
    K = build_finite("H-iii", {"a": F(3, 2), "b": F(2, 5), "c": 2}, 5)
    pi = _pi("H-iii", {"a": F(3, 2), "b": F(2, 5), "c": 2}, 5)
    spec = eigendecompose(symmetrize(K, pi))
    np.testing.assert_allclose(reconstruct_from_vectors(spec.kappa, spec.vectors, pi), K.array(), atol=1e-12)


def test_evolution_examples():
    spec = closed_spectrum("K-i", KI, 1)
    res = evolve(spec, [F(1), F(0)], 0)
    assert res.distribution == [1, 0] and res.coefficients[0] == 1
    assert evolve(spec, [F(1), F(0)], 1).distribution == [half, half]
    far = evolve(spec, [F(1), F(0)], 64).distribution
    assert max(abs(p - q) for p, q in zip(far, [F(1, 3), F(2, 3)])) < 2 * F(1, 4) ** 64
    with pytest.raises(DomainError):
        evolve(spec, [F(1), F(1)], 1)
    with pytest.raises(DomainError):
        evolve_matrix(build_finite("K-i", KI, 1), [F(1), F(0)], -1)


@given(case=st.sampled_from(FINITE_CASES), N=st.integers(1, 5), steps=st.integers(0, 8),
       start=st.integers(0, 5))
def test_spectral_evolution_equals_matrix_power(case, N, steps, start):
    params = parameter_grid(case, 1)[0]
    P0 = [F(int(x == min(start, N))) for x in range(N + 1)]
    spec = closed_spectrum(case, params, N)
    exact = evolve(spec, P0, steps).distribution
    assert exact == evolve_matrix(build_finite(case, params, N), P0, steps)
    pi = _pi(case, params, N)
    gap = max(abs(float(x - y)) for x, y in zip(exact, pi))
    assert gap <= convergence_bound(spec, P0, steps) * (1 + 1e-12) + 1e-300


def test_sampler_examples():
    K = build_finite("K-i", KI, 8)
    P0 = [F(1, 9)] * 9
    a = sample_paths(K, P0, 20, 1000, seed=7)
    assert a == sample_paths(K, P0, 20, 1000, seed=7)
    assert a != sample_paths(K, P0, 20, 1000, seed=8)
    # zero steps returns an empirical draw of the initial distribution
    delta = [F(0)] * 3 + [F(1)] + [F(0)] * 5
    assert sample_paths(K, delta, 0, 50, seed=1)[3] == 1


def test_qmeixner_extras():
    params = {"a": half, "b": half, "c": half, "q": half}
    k0 = qm_extra_kappa("qM-i", params, 0)
    assert 0 < k0 < 1
    for case in ("qM-i", "qM-iii", "qM-iv"):
        for params in parameter_grid(case, 3):
            for n in range(9):
                r = qm_extra_kappa(case, params, n) / float(kappa_closed(case, params, n))
                assert 0 < r < 1


def test_qmeixner_iv_extra_kappa_by_double_sum():
    params = parameter_grid("qM-iv", 1)[0]
    T = build_semi_infinite("qM-iv", params)
    lam = T.meta["lambda"]
    lam = {k: float(v) for k, v in lam.items()}
    for n in range(4):
        assert kappa_minus_sum(T, lam, n) == pytest.approx(qm_extra_kappa("qM-iv", params, n), rel=1e-9, abs=1e-12)


def test_qmeixner_union_reconstruction():
    params = {"a": half, "b": half, "c": half, "q": half}
    T = build_semi_infinite("qM-i", params)
    R = qm_union_reconstruct("qM-i", params, 6)
    from convchains.families import MeasureTable

    table = MeasureTable("qmeixner", {k: float(v) for k, v in T.meta["lambda"].items()})
    pi = [table(x) for x in range(7)]
    H = symmetrize(T.entries[:7, :7], pi).H
    assert np.max(np.abs(R - H)) < 1e-9
    assert qm_orthogonality_error({"b": 0.5, "c": 0.5, "q": 0.5}) < 1e-10


def test_semi_infinite_residual_small():
    T = build_semi_infinite("M-i", {"a": 1, "b": 1, "c": half})
    assert semi_residual(T) < 1e-10


def test_total_variation():
    assert total_variation([0.5, 0.5], [1.0, 0.0]) == 0.5
