"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` and look for the
"acceptance criteria" section at the end of the report.
"""

import itertools
import time
from fractions import Fraction as F

import numpy as np

from convchains.bd import BD_FAMILIES, bd_rates, build_K_bd, build_L, kappa_bd, tune_weights
from convchains.cases import CASES, FINITE_CASES, SEMI_INFINITE_CASES, case_params
from convchains.chains import (
    DEFORMABLE,
    build_dual,
    build_finite,
    build_first_row,
    build_multiple,
    build_semi_infinite,
    commuting_family,
    deformed_params,
    dual_measure,
    kappa_closed,
    kappa_minus,
)
from convchains.families import Lattice, measure, poly_table
from convchains.linalg import det, matmul
from convchains.numerics import IDENTITIES as LEMMAS
from convchains.numerics import identity_oracle
from convchains.selfsim import IDENTITIES, IDENTITY_IDS, verify_identity
from convchains.spectral import (
    check_balance,
    closed_spectrum,
    convergence_bound,
    eigendecompose,
    evolve,
    evolve_matrix,
    kappa_sum,
    qm_orthogonality_error,
    sample_paths,
    semi_residual,
    spectral_reconstruct,
    symmetrize,
    total_variation,
)
from convchains.suites import parameter_grid
from convchains.tolerances import COLUMN_TOL, EIGEN_TOL, QM_ORTHO_TOL, RESIDUAL_TOL, TAIL_TOL

TYPE_I_III = ("K-i", "K-iii", "H-i", "H-iii", "qH-i", "qH-iii")


def _pi(case, params, N):
    spec = CASES[case]
    return measure(spec.family, spec.resolve(case_params(case, params)), Lattice.finite(N)).values


def _first(failures, limit=3):
    return "; ".join(str(f) for f in failures[:limit])


# ---------------------------------------------------------------- 1

def test_criterion_01_stochastic_and_reversible(criterion):
    failures, checked = [], 0
    for case in FINITE_CASES:
        grid = parameter_grid(case, 5)
        assert len(grid) >= 5, case
        for params in grid:
            for N in range(1, 9):
                K = build_finite(case, params, N).rows()
                pi = _pi(case, params, N)
                checked += 1
                if any(v < 0 for row in K for v in row):
                    failures.append((case, params, N, "negative entry"))
                if any(sum(K[x][y] for x in range(N + 1)) != 1 for y in range(N + 1)):
                    failures.append((case, params, N, "column sum"))
                if check_balance(K, pi) != 0:
                    failures.append((case, params, N, "detailed balance"))
    ok = criterion(1, "stochasticity + detailed balance (exact)", not failures,
                   f"{checked} matrices, 12 cases x 5 points x N=1..8" + (f"; {_first(failures)}" if failures else ""))
    assert ok


# ---------------------------------------------------------------- 2

def test_criterion_02_eigenvalue_triple_agreement(criterion):
    failures, worst = [], 0.0
    sizes = list(range(1, 9)) + [12, 16, 24, 32]
    for case in FINITE_CASES:
        spec = CASES[case]
        for params in parameter_grid(case, 2):
            lam = spec.resolve(case_params(case, params))
            for N in sizes:
                closed = [kappa_closed(case, params, n) for n in range(N + 1)]
                row0 = build_first_row(case, params, N)
                summed = [kappa_sum(None, spec.family, lam, n, N, row0=row0) for n in range(N + 1)]
                if closed != summed:
                    failures.append((case, params, N, "closed != sum"))
                Kf = build_finite(case, params, N, backend="float")
                pif = [float(p) for p in _pi(case, params, N)]
                numeric = eigendecompose(symmetrize(Kf, pif), expected=closed).kappa
                err = max(abs(a - float(b)) for a, b in zip(numeric, closed))
                worst = max(worst, err)
                if err >= EIGEN_TOL:
                    failures.append((case, params, N, f"numeric error {err:.2e}"))
    ok = criterion(2, "closed = sum formula (exact) = numeric (1e-10), N <= 32", not failures,
                   f"max numeric error {worst:.1e}" + (f"; {_first(failures)}" if failures else ""))
    assert ok


# ---------------------------------------------------------------- 3

def test_criterion_03_determinant(criterion):
    failures = []
    for case in TYPE_I_III:
        for params in parameter_grid(case, 3):
            for N in range(1, 9):
                prod = F(1)
                for n in range(N + 1):
                    prod *= kappa_closed(case, params, n)
                if det(build_finite(case, params, N).rows()) != prod:
                    failures.append((case, params, N))
    ok = criterion(3, "det K = prod kappa(n) for types (i)/(iii), N <= 8", not failures, _first(failures))
    assert ok


# ---------------------------------------------------------------- 4

def test_criterion_04_kappa_independent_of_N(criterion):
    failures = []
    for case in FINITE_CASES:
        spec = CASES[case]
        for params in parameter_grid(case, 2):
            lam = spec.resolve(case_params(case, params))
            previous = None
            for N in range(1, 10):
                row0 = build_first_row(case, params, N)
                current = [kappa_sum(None, spec.family, lam, n, N, row0=row0) for n in range(min(N, 6) + 1)]
                if previous is not None and current[:len(previous)] != previous[:len(current)]:
                    failures.append((case, params, N))
                if current != [kappa_closed(case, params, n) for n in range(len(current))]:
                    failures.append((case, params, N, "closed"))
                previous = current
    ok = criterion(4, "kappa(n) at N equals kappa(n) at N+1 (exact), n <= min(N, 6)", not failures, _first(failures))
    assert ok


# ---------------------------------------------------------------- 5

def test_criterion_05_reconstruction_and_evolution(criterion):
    failures = []
    for case in FINITE_CASES:
        for params in parameter_grid(case, 2):
            for N in (2, 5, 8):
                spec = closed_spectrum(case, params, N)
                K = build_finite(case, params, N)
                if spectral_reconstruct(spec) != K.rows():
                    failures.append((case, params, N, "reconstruction"))
                pi = _pi(case, params, N)
                for start in (0, N):
                    P0 = [F(int(x == start)) for x in range(N + 1)]
                    res = evolve(spec, P0, 0)
                    if res.coefficients[0] != 1:
                        failures.append((case, N, "c0"))
                    P = P0
                    for step in range(1, 17):
                        P = evolve_matrix(K, P, 1)
                        if evolve(spec, P0, step).distribution != P:
                            failures.append((case, params, N, f"evolution l={step}"))
                            break
                    for steps in (8, 16, 32):
                        dist = evolve(spec, P0, steps).distribution
                        gap = max(abs(a - b) for a, b in zip(dist, pi))
                        if float(gap) > convergence_bound(spec, P0, steps) * (1 + 1e-12):
                            failures.append((case, params, N, f"bound l={steps}"))
    ok = criterion(5, "spectral reconstruction, evolution (l <= 16) and convergence bound (l = 8, 16, 32)",
                   not failures, _first(failures))
    assert ok


# ---------------------------------------------------------------- 6

def _identity_grid(ident, size=5):
    row = IDENTITIES[ident]
    unit = [F(1, 2), F(1, 3), F(2, 5), F(3, 4), F(5, 8), F(2, 7)]
    positive = [F(1, 2), F(3, 2), F(2, 5), F(7, 3), F(1), F(5, 4)]
    qs = [F(1, 2), F(1, 3), F(2, 3), F(3, 5)]
    points = []
    for i in range(size):
        params = {}
        for j, name in enumerate(row.param_names):
            if name == "q":
                pool = qs
            elif row.family in ("hahn", "charlier") or (row.family == "meixner" and name != "b"):
                pool = positive
            else:
                pool = unit
            params[name] = pool[(i + 2 * j) % len(pool)]
        if row.family == "little-qjacobi" and i % 2:
            params["b2"] = -params["b2"]
        points.append(params)
    return points


def test_criterion_06_self_similarity(criterion):
    failures, reports = [], 0
    for ident in IDENTITY_IDS:
        row = IDENTITIES[ident]
        for params in _identity_grid(ident):
            for swap in ((False, True) if row.swappable else (False,)):
                rep = verify_identity(ident, params, 10, swap=swap)
                reports += 1
                if rep.verdict != "exact":
                    failures.append((ident, params, swap, rep.verdict))
    ok = criterion(6, "19 self-similarity identities exact (ratio form for C/M), N <= 10", not failures,
                   f"{reports} reports" + (f"; {_first(failures)}" if failures else ""))
    assert ok


# ---------------------------------------------------------------- 7

def _lemma_grid(name):
    unit = [F(1, 2), F(1, 3), F(2, 5), F(3, 4), F(5, 8)]
    wide = [F(1, 3), F(5, 2), F(-7, 4), F(9, 5), F(11, 3)]
    qs = [F(1, 2), F(1, 3), F(2, 3), F(3, 5), F(1, 4)]
    points = []
    for i in range(5):
        base = {
            "a": wide[i], "b": wide[(i + 2) % 5], "c": wide[(i + 4) % 5] + F(1, 7),
            "b1": wide[(i + 1) % 5], "b2": wide[(i + 3) % 5], "m": i % 3,
        }
        if name.startswith("q") and name != "qhahn-shifted-sum":
            base.update(a=unit[i], b=unit[(i + 2) % 5], c=unit[(i + 4) % 5] / 3, q=qs[i])
        if name == "qhahn-shifted-sum":
            base.update(a=unit[i], b1=unit[(i + 1) % 5], b2=unit[(i + 3) % 5], q=qs[i])
        if name == "qhahn-normalization":
            base.update(q=qs[i])
        if name == "falling-moment":
            base = {"N": 3 + 2 * i, "b": unit[i]}
        if name == "krawtchouk-generating-function":
            base = {"p": unit[i]}
        points.append(base)
    return points


def test_criterion_07_summation_lemmas(criterion):
    failures, checked = [], 0
    for name in LEMMAS:
        for params in _lemma_grid(name):
            n_max = 12
            if name == "falling-moment":
                n_max = min(12, params["N"] + 1)
            needed = {
                "chu-vandermonde": ("b", "c"), "pfaff-saalschutz": ("a", "b", "c"),
                "q-chu-vandermonde": ("b", "c", "q"), "q-pfaff-saalschutz": ("a", "b", "c", "q"),
                "hahn-normalization": ("a", "b"), "hahn-shifted-sum": ("a", "b1", "b2", "m"),
                "qhahn-normalization": ("a", "b", "q"), "qhahn-shifted-sum": ("a", "b1", "b2", "q", "m"),
                "falling-moment": ("N", "b"), "krawtchouk-generating-function": ("p",),
            }[name]
            point = {k: params[k] for k in needed}
            rep = identity_oracle(name, point, n_max)
            checked += rep.checked
            if rep.verdict != "exact":
                failures.append((name, point))
    ok = criterion(7, "summation lemmas exact for n <= 12 on rational grids", not failures,
                   f"{checked} equalities" + (f"; {_first(failures)}" if failures else ""))
    assert ok


# ---------------------------------------------------------------- 8

def test_criterion_08_semi_infinite(criterion):
    failures, worst_def, worst_res, worst_orth = [], 0.0, 0.0, 0.0
    for case in SEMI_INFINITE_CASES:
        for params in parameter_grid(case, 2):
            T = build_semi_infinite(case, params, Lattice.semi_infinite(TAIL_TOL))
            d = T.meta["deficiency"]
            r = semi_residual(T, n_max=10)
            worst_def, worst_res = max(worst_def, d), max(worst_res, r)
            if not d < COLUMN_TOL:
                failures.append((case, params, f"deficiency {d:.1e}"))
            if not r < RESIDUAL_TOL:
                failures.append((case, params, f"residual {r:.1e}"))
            if CASES[case].family == "qmeixner":
                lam = {k: float(v) for k, v in T.meta["lambda"].items()}
                e = qm_orthogonality_error(lam)
                worst_orth = max(worst_orth, e)
                if not e < QM_ORTHO_TOL:
                    failures.append((case, params, f"orthogonality {e:.1e}"))
    for case in ("qM-i", "qM-iii", "qM-iv"):
        for params in parameter_grid(case, 4):
            for n in range(11):
                ratio = kappa_minus(case, params, n) / float(kappa_closed(case, params, n))
                if not 0 < ratio < 1:
                    failures.append((case, params, n, "kappa_minus bound"))
    ok = criterion(8, "semi-infinite deficiency, residual, q-Meixner orthogonality, kappa_minus bounds",
                   not failures,
                   f"deficiency {worst_def:.1e}, residual {worst_res:.1e}, orthogonality {worst_orth:.1e}"
                   + (f"; {_first(failures)}" if failures else ""))
    assert ok


# ---------------------------------------------------------------- 9

def test_criterion_09_multiple_convolutions(criterion):
    failures, worst = [], 0.0
    pool = [F(1, 2), F(1, 3), F(2, 5), F(3, 4)]
    for m in (2, 3, 4):
        for first in "+-":
            signs = tuple(first if j % 2 == 0 else ("-" if first == "+" else "+") for j in range(m))
            for ps in itertools.islice(itertools.product(pool, repeat=m), 0, None, 7 if m == 4 else 3):
                for N in range(1, 7):
                    chain = build_multiple(signs, ps, N)
                    K = chain.matrix.rows()
                    pi = measure("krawtchouk", {"p": chain.p}, Lattice.finite(N)).values
                    if check_balance(K, pi) != 0:
                        failures.append((signs, ps, N, "symmetry"))
                        continue
                    closed = [chain.kappa(n) for n in range(N + 1)]
                    numeric = eigendecompose(symmetrize(K, pi), expected=closed).kappa
                    err = max(abs(a - float(b)) for a, b in zip(numeric, closed))
                    worst = max(worst, err)
                    if err >= EIGEN_TOL:
                        failures.append((signs, ps, N, f"spectrum {err:.1e}"))
                    flipped = tuple("-" if s == "+" else "+" for s in signs)
                    R = build_multiple(flipped, [1 - p for p in ps], N).matrix.rows()
                    if any(K[x][y] != R[N - x][N - y] for x in range(N + 1) for y in range(N + 1)):
                        failures.append((signs, ps, N, "reflection"))
                    if m == 2:
                        case = "K-i" if signs == ("+", "-") else "K-iii"
                        if K != build_finite(case, {"a": ps[1], "b": ps[0]}, N).rows():
                            failures.append((signs, ps, N, "m=2 equivalence"))
    ok = criterion(9, "multiple convolutions m <= 4, N <= 6: symmetry, spectrum, reflection, m=2 cases",
                   not failures, f"max spectrum error {worst:.1e}" + (f"; {_first(failures)}" if failures else ""))
    assert ok


# ---------------------------------------------------------------- 10

_T_VALUES = {
    "K-i": [F(1, 2), F(1, 3), F(3, 4)],
    "C-conv1": [F(1, 2), F(1, 4)],
    "H-i": [F(-1, 4), F(1, 3), F(1, 5)],
    "qH-i": [F(3, 5), F(4, 5), F(7, 6)],
    "qM-i": [F(3, 5), F(4, 5), F(7, 6)],
}
_DEFORM_PARAMS = {
    "K-i": {"a": F(1, 2), "b": F(1, 3)},
    "C-conv1": {"a": F(1, 2), "b": F(3, 4)},
    "H-i": {"a": F(1, 2), "b": F(3, 2), "c": 2},
    "qH-i": {"a": F(1, 2), "b": F(1, 2), "c": F(1, 3), "q": F(1, 2)},
    "qM-i": {"a": F(1, 2), "b": F(1, 2), "c": F(1, 2), "q": F(1, 2)},
}


def test_criterion_10_commuting_families(criterion):
    failures, worst = [], 0.0
    for case in DEFORMABLE:
        params = _DEFORM_PARAMS[case]
        for t in _T_VALUES[case]:
            new = deformed_params(case, params, t)
            commuting_family(case, params, t)  # raises if the stationary parameters move
            if CASES[case].finite:
                if CASES[case].resolve(case_params(case, new)) != CASES[case].resolve(case_params(case, params)):
                    failures.append((case, t, "lambda"))
                for N in range(1, 7):
                    K = build_finite(case, params, N).rows()
                    Kt = build_finite(case, new, N).rows()
                    if matmul(K, Kt) != matmul(Kt, K):
                        failures.append((case, t, N))
            else:
                A = build_semi_infinite(case, params)
                B = build_semi_infinite(case, new, size=A.size - 1)
                w = min(A.meta["x_max"], B.meta["x_max"]) // 2
                AB = (A.entries @ B.entries)[: w + 1, : w + 1]
                BA = (B.entries @ A.entries)[: w + 1, : w + 1]
                err = float(np.max(np.abs(AB - BA)))
                worst = max(worst, err)
                if err > 1e-12:
                    failures.append((case, t, f"float commutator {err:.1e}"))
    ok = criterion(10, "commuting deformations: exact for finite cases (N <= 6), float window for C/qM",
                   not failures, f"semi-infinite commutator {worst:.1e}" + (f"; {_first(failures)}" if failures else ""))
    assert ok


# ---------------------------------------------------------------- 11

def test_criterion_11_duals(criterion):
    failures, worst = [], 0.0
    for case in FINITE_CASES:
        for params in parameter_grid(case, 2):
            for N in (1, 3, 6):
                K = build_finite(case, params, N).rows()
                Kd = build_dual(case, params, N).rows()
                if any(Kd[x][y] != K[N - x][N - y] for x in range(N + 1) for y in range(N + 1)):
                    failures.append((case, params, N, "reversal"))
                pid = dual_measure(case, params, N)
                if check_balance(Kd, pid) != 0:
                    failures.append((case, params, N, "dual balance"))
                closed = [kappa_closed(case, params, n) for n in range(N + 1)]
                dual_numeric = sorted(eigendecompose(symmetrize(Kd, pid), expected=closed).kappa)
                primal_numeric = sorted(eigendecompose(symmetrize(K, _pi(case, params, N)), expected=closed).kappa)
                err = max(abs(a - b) for a, b in zip(dual_numeric, primal_numeric))
                worst = max(worst, err)
                if err >= EIGEN_TOL:
                    failures.append((case, params, N, f"spectrum {err:.1e}"))
    ok = criterion(11, "duals: K^d(x,y) = K(N-x,N-y) exact, spectra within 1e-10", not failures,
                   f"max spectrum difference {worst:.1e}" + (f"; {_first(failures)}" if failures else ""))
    assert ok


# ---------------------------------------------------------------- 12

def test_criterion_12_birth_death(criterion):
    failures, chains = [], 0
    grids = {"krawtchouk": [{"p": p} for p in (F(1, 2), F(1, 3), F(3, 4))],
             "hahn": [{"a": a, "b": b} for a, b in ((1, 1), (F(3, 2), F(2, 5)), (F(7, 3), 3))]}
    for family in BD_FAMILIES:
        for params in grids[family]:
            for N in range(1, 9):
                rates = bd_rates(family, params, N)  # checks the difference equation exactly
                op = build_L(rates)
                pi = measure(family, params, Lattice.finite(N)).values
                P = poly_table(family, params, N, N, N)
                for m in range(1, min(3, N) + 1):
                    w = tune_weights(op, m)
                    K = build_K_bd(op, m, w).rows()
                    chains += 1
                    size = range(N + 1)
                    if any(K[x][y] < 0 for x in size for y in size):
                        failures.append((family, params, N, m, "negative"))
                    if any(sum(K[x][y] for x in size) != 1 for y in size):
                        failures.append((family, params, N, m, "column sum"))
                    if any(K[x][y] != 0 for x in size for y in size if abs(x - y) > m):
                        failures.append((family, params, N, m, "band"))
                    if check_balance(K, pi) != 0:
                        failures.append((family, params, N, m, "reversibility"))
                    for n in size:
                        kap = kappa_bd(m, w, rates.E, n)
                        if any(sum(K[x][y] * pi[y] * P[n][y] for y in size) != kap * pi[x] * P[n][x] for x in size):
                            failures.append((family, params, N, m, f"eigen-relation n={n}"))
    ok = criterion(12, "birth-death chains: difference equation, stochastic, banded, reversible, exact kappa",
                   not failures, f"{chains} tuned chains" + (f"; {_first(failures)}" if failures else ""))
    assert ok


# ---------------------------------------------------------------- 13

def test_criterion_13_sampler(criterion):
    params = {"a": F(1, 2), "b": F(1, 2)}
    N, steps, count = 8, 20, 100_000
    K = build_finite("K-i", params, N)
    P0 = [F(int(x == 0)) for x in range(N + 1)]
    start = time.perf_counter()
    empirical = sample_paths(K, P0, steps, count, seed=2024)
    elapsed = time.perf_counter() - start
    exact = evolve(closed_spectrum("K-i", params, N), P0, steps).distribution
    tv = total_variation(empirical, [float(p) for p in exact])
    ok = criterion(13, "sampler total variation < 0.01 (1e5 paths, K-i N=8, l=20)", tv < 0.01,
                   f"TV {tv:.4f}, {elapsed:.2f}s")
    assert ok
