"""Symmetrization, eigenvalues, spectral reconstruction, evolution and sampling.

For a chain ``K`` reversible with respect to ``pi``,
``H = Phi^{-1} K Phi`` with ``Phi = diag(sqrt(pi))`` is symmetric, its
eigenvectors are ``phi_n(x) = d_n sqrt(pi(x)) P_n(x)`` and

    K(x, y) = sum_n kappa(n) d_n^2 pi(x) P_n(x) P_n(y).

Quantities built from ``pi``, ``d_n^2`` and ``P_n`` stay exact; square roots
only enter ``H`` and the orthonormal vectors, which are floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .chains import TransitionMatrix, case_params, get_case
from .errors import BalanceError, CompletenessError, DomainError, NumericError
from .families import (
    Lattice,
    MeasureTable,
    measure,
    norm_sq,
    poly_table,
)
from .linalg import matvec
from .numerics import is_exact
from .tolerances import EIGEN_CLUSTER, FLOAT_ATOL, FLOAT_RTOL


@dataclass
class SymmetricForm:
    """``H = Phi^{-1} K Phi`` as floats, plus the exact squares ``H(x, y)^2`` when available."""

    H: np.ndarray
    pi: list
    squares: Optional[list] = None

    def is_symmetric(self) -> bool:
        if self.squares is not None:
            n = len(self.squares)
            return all(self.squares[x][y] == self.squares[y][x] for x in range(n) for y in range(n))
        return bool(np.allclose(self.H, self.H.T, rtol=FLOAT_RTOL, atol=FLOAT_ATOL))


@dataclass
class Spectrum:
    """Eigenvalues ``kappa[n]``, ``d2[n] = d_n^2`` and orthonormal eigenvectors (columns of ``vectors``).

    ``complete`` is False when the eigenvectors do not span the space; for
    the q-Meixner chains the polynomial family alone misses the second family.
    """

    kappa: list
    d2: list
    vectors: Optional[np.ndarray]
    provenance: str
    family: Optional[str] = None
    lam: Optional[dict] = None
    lattice: Optional[Lattice] = None
    complete: bool = True
    sign_changes: Optional[list] = None


@dataclass
class EvolutionResult:
    distribution: list
    coefficients: list
    steps: int
    weights: Optional[list] = None


# ---------------------------------------------------------------- symmetrization

def _rows(K):
    if isinstance(K, TransitionMatrix):
        return K.rows()
    if isinstance(K, np.ndarray):
        return K.tolist()
    return K


def check_balance(K, pi, window: Optional[int] = None) -> float:
    """Largest ``|K(x,y) pi(y) - K(y,x) pi(x)|`` (exactly 0 for a reversible exact chain)."""
    rows = _rows(K)
    n = len(rows) if window is None else window + 1
    worst = 0
    for x in range(n):
        for y in range(x + 1, n):
            d = rows[x][y] * pi[y] - rows[y][x] * pi[x]
            worst = max(worst, abs(d))
    return worst


def symmetrize(K, pi, window: Optional[int] = None) -> SymmetricForm:
    """Conjugate ``K`` by ``diag(sqrt(pi))``; raise :class:`BalanceError` if ``K`` is not reversible.

    Exact input is checked exactly; float input within ``1e-12`` relative to
    the entry scale. ``window`` restricts a truncated chain to its reliable
    leading block.
    """
    rows = _rows(K)
    n = len(rows) if window is None else window + 1
    pi = list(pi)[:n]
    exact = all(is_exact(v) for v in pi) and all(is_exact(rows[x][y]) for x in range(n) for y in range(n))
    squares = None
    if exact:
        squares = [[rows[x][y] ** 2 * pi[y] / pi[x] for y in range(n)] for x in range(n)]
        for x in range(n):
            for y in range(x + 1, n):
                if squares[x][y] != squares[y][x] or (rows[x][y] == 0) != (rows[y][x] == 0):
                    raise BalanceError(f"detailed balance fails at (x, y) = ({x}, {y})")
    sq = np.sqrt(np.array([float(v) for v in pi]))
    Kf = np.array([[float(rows[x][y]) for y in range(n)] for x in range(n)])
    H = Kf * sq[None, :] / sq[:, None]
    if not exact:
        scale = max(1.0, float(np.max(np.abs(H))))
        err = float(np.max(np.abs(H - H.T)))
        if err > FLOAT_RTOL * scale:
            raise BalanceError(f"symmetrized matrix is not symmetric (max asymmetry {err:.3e})")
    H = 0.5 * (H + H.T)
    return SymmetricForm(H, pi, squares)


# ---------------------------------------------------------------- eigenvalues

def kappa_sum(K, family: str, lam: dict, n: int, N: Optional[int] = None, row0: Optional[list] = None):
    """``sum_y K(0, y) pi(y) / pi(0) P_n(y)``; exact when ``K`` and ``lam`` are.

    Pass ``row0`` to supply ``K(0, .)`` directly (e.g. from a first-row build).
    ``N`` defaults to the lattice size of a finite ``TransitionMatrix``.
    """
    from .families import measure_ratio, _poly, validate

    if N is None and isinstance(K, TransitionMatrix) and K.lattice.is_finite:
        N = K.lattice.N
    row = row0 if row0 is not None else _rows(K)[0]
    v = validate(family, lam)
    total = 0
    for y, k0y in enumerate(row):
        if k0y == 0:
            continue
        total = total + k0y * measure_ratio(family, v, y, N) * _poly(family, v, n, y, N)
    return total


def _sign_changes(vec: np.ndarray) -> int:
    scale = float(np.max(np.abs(vec))) or 1.0
    signs = [np.sign(v) for v in vec if abs(v) > 1e-9 * scale]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def eigendecompose(sym: SymmetricForm, expected: Optional[Sequence] = None) -> Spectrum:
    """Numeric eigenpairs of ``H`` ordered so that index ``n`` has ``n`` sign changes.

    If the sign-change counts do not form a permutation of ``0..N`` (clustered
    eigenvalues make eigenvectors ill defined), fall back to matching each
    eigenvalue to the nearest entry of ``expected``.
    """
    try:
        values, vectors = np.linalg.eigh(sym.H)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise NumericError(str(exc)) from exc
    n = len(values)
    changes = [_sign_changes(vectors[:, j]) for j in range(n)]
    clustered = any(abs(values[i] - values[j]) < EIGEN_CLUSTER
                    for i in range(n) for j in range(i + 1, n))
    if sorted(changes) == list(range(n)) and not clustered:
        order = [changes.index(k) for k in range(n)]
        provenance = "numeric"
    elif expected is not None:
        remaining = list(range(n))
        order = []
        for target in expected:
            j = min(remaining, key=lambda i: abs(values[i] - float(target)))
            remaining.remove(j)
            order.append(j)
        provenance = "numeric (matched by value)"
    else:
        raise NumericError("cannot order eigenpairs: sign-change counts are ambiguous")
    vecs = vectors[:, order]
    for j in range(n):  # sign convention: positive at x = 0 as P_n(0) = 1
        if vecs[0, j] < 0:
            vecs[:, j] = -vecs[:, j]
    return Spectrum([float(values[j]) for j in order], [None] * n, vecs, provenance,
                    sign_changes=[changes[j] for j in order])


def closed_spectrum(case: str, params: dict, N: int) -> Spectrum:
    """Closed-form eigenvalues with exact ``d_n^2`` and float orthonormal vectors of a finite case."""
    spec = get_case(case)
    v = case_params(case, params)
    lam = spec.resolve(v)
    lattice = Lattice.finite(N)
    kappas = [spec.kappa(v, n) for n in range(N + 1)]
    d2 = [norm_sq(spec.family, lam, n, N) for n in range(N + 1)]
    pi = measure(spec.family, lam, lattice).values
    P = poly_table(spec.family, lam, N, N, N)
    vecs = np.array([[math.sqrt(float(d2[n]) * float(pi[x])) * float(P[n][x]) for n in range(N + 1)]
                     for x in range(N + 1)])
    return Spectrum(kappas, d2, vecs, "closed-form", spec.family, lam, lattice)


def qmeixner_spectrum(case: str, params: dict, n_max: int = 10) -> Spectrum:
    """First-family (polynomial) spectrum of a q-Meixner chain; marked incomplete."""
    spec = get_case(case)
    if spec.family != "qmeixner":
        raise DomainError(f"{case} is not a q-Meixner chain")
    v = case_params(case, params)
    lam = spec.resolve(v)
    kappas = [spec.kappa(v, n) for n in range(n_max + 1)]
    d2 = [norm_sq("qmeixner", lam, n) for n in range(n_max + 1)]
    return Spectrum(kappas, d2, None, "closed-form", "qmeixner", lam, Lattice.semi_infinite(),
                    complete=False)


def qm_extra_kappa(case: str, params: dict, n: int) -> float:
    """Eigenvalue belonging to the second q-Meixner eigenvector family."""
    from .chains import kappa_minus

    return kappa_minus(case, params, n)


def kappa_minus_sum(K, lam: dict, n: int, size: Optional[int] = None) -> float:
    """``sum_y K(0,y) (-1)^y sqrt(pi(y) pi_-(y) / (pi(0) pi_-(0))) P_-n(y)`` over the truncated lattice."""
    from .families import _poly, validate

    rows = _rows(K)
    size = len(rows[0]) - 1 if size is None else size
    t1 = MeasureTable("qmeixner", lam)
    t2 = MeasureTable("qmeixner-second", lam)
    v = validate("qmeixner-second", lam)
    terms = []
    for y in range(size + 1):
        w = math.sqrt(t1(y) * t2(y) / (t1(0) * t2(0)))
        terms.append(rows[0][y] * (-1) ** y * w * float(_poly("qmeixner-second", v, n, y, None)))
    return math.fsum(terms)


# ---------------------------------------------------------------- reconstruction

def spectral_reconstruct(spec: Spectrum, pi: Optional[list] = None) -> list:
    """``K(x, y) = sum_n kappa(n) d_n^2 pi(x) P_n(x) P_n(y)``; exact for exact spectra."""
    if not spec.complete:
        raise CompletenessError("the eigenvectors of this spectrum are not complete; "
                                "the polynomial family alone cannot reconstruct K")
    if spec.family is None or spec.lattice is None or not spec.lattice.is_finite:
        raise CompletenessError("reconstruction needs a closed-form spectrum on a finite lattice")
    N = spec.lattice.N
    if pi is None:
        pi = measure(spec.family, spec.lam, spec.lattice).values
    P = poly_table(spec.family, spec.lam, N, N, N)
    weights = [spec.kappa[n] * spec.d2[n] for n in range(N + 1)]
    return [[pi[x] * sum((weights[n] * P[n][x] * P[n][y] for n in range(N + 1)), 0 * pi[0])
             for y in range(N + 1)] for x in range(N + 1)]


def reconstruct_from_vectors(kappa: Sequence, vectors: np.ndarray, pi: Sequence) -> np.ndarray:
    """Float reconstruction ``K = Phi (sum_n kappa_n phi_n phi_n^T) Phi^{-1}`` from orthonormal vectors."""
    sq = np.sqrt(np.asarray(pi, dtype=float))
    H = (vectors * np.asarray(kappa, dtype=float)[None, :]) @ vectors.T
    return H * sq[:, None] / sq[None, :]


# ---------------------------------------------------------------- evolution

def _check_distribution(P0, n):
    if len(P0) != n:
        raise DomainError(f"initial distribution has length {len(P0)}, expected {n}")
    if any(p < 0 for p in P0):
        raise DomainError("initial distribution has negative entries")
    total = sum(P0)
    exact = all(is_exact(p) for p in P0)
    if (exact and total != 1) or (not exact and abs(float(total) - 1.0) > 1e-12):
        raise DomainError("initial distribution does not sum to 1")


def evolve_matrix(K, P0: Sequence, steps: int) -> list:
    """``K^l P0`` by repeated multiplication."""
    if steps < 0:
        raise DomainError("number of steps must be nonnegative")
    rows = _rows(K)
    _check_distribution(P0, len(rows))
    P = list(P0)
    for _ in range(steps):
        P = matvec(rows, P)
    return P


def evolve(spec: Spectrum, P0: Sequence, steps: int) -> EvolutionResult:
    """Spectral solution ``P(x; l) = pi(x) sum_n kappa(n)^l d_n^2 w_n P_n(x)``.

    ``w_n = sum_x P_n(x) P0(x)`` and the expansion coefficients are
    ``c_n = d_n w_n`` (``c_0 = 1``). Exact for exact spectra and inputs.
    """
    if steps < 0:
        raise DomainError("number of steps must be nonnegative")
    if not spec.complete or spec.lattice is None or not spec.lattice.is_finite:
        raise CompletenessError("spectral evolution needs a complete spectrum on a finite lattice")
    N = spec.lattice.N
    _check_distribution(P0, N + 1)
    pi = measure(spec.family, spec.lam, spec.lattice).values
    P = poly_table(spec.family, spec.lam, N, N, N)
    w = [sum((P[n][x] * P0[x] for x in range(N + 1)), 0 * pi[0]) for n in range(N + 1)]
    amp = [spec.kappa[n] ** steps * spec.d2[n] * w[n] for n in range(N + 1)]
    dist = [pi[x] * sum((amp[n] * P[n][x] for n in range(N + 1)), 0 * pi[0]) for x in range(N + 1)]
    coeffs = [math.sqrt(float(spec.d2[n])) * float(w[n]) for n in range(N + 1)]
    return EvolutionResult(dist, coeffs, steps, w)


def convergence_bound(spec: Spectrum, P0: Sequence, steps: int) -> float:
    """``C max_{n>=1} |kappa(n)|^l`` bounding ``max_x |P(x; l) - pi(x)|``.

    ``C = max_x pi(x) sum_{n>=1} |d_n^2 w_n P_n(x)|`` depends only on ``P0``.
    """
    N = spec.lattice.N
    pi = measure(spec.family, spec.lam, spec.lattice).values
    P = poly_table(spec.family, spec.lam, N, N, N)
    w = [sum(P[n][x] * P0[x] for x in range(N + 1)) for n in range(N + 1)]
    C = max(float(pi[x]) * sum(abs(float(spec.d2[n] * w[n] * P[n][x])) for n in range(1, N + 1))
            for x in range(N + 1))
    gap = max(abs(float(k)) for k in spec.kappa[1:])
    return C * gap ** steps


# ---------------------------------------------------------------- sampling

def _uniforms(seed: int, step: int, count: int) -> np.ndarray:
    """Uniforms for all trajectories at one step, keyed by ``(seed, step)``; trajectory = stream position."""
    gen = np.random.Generator(np.random.Philox(key=[seed & (2 ** 64 - 1), step]))
    return gen.random(count)


def sample_paths(K, P0: Sequence, steps: int, count: int, seed: int) -> list:
    """Empirical distribution of ``X_l`` over ``count`` independent trajectories.

    Every draw is a pure function of ``(seed, step, trajectory index)``
    through a counter-based Philox generator, so results do not depend on how
    trajectories are split across workers.
    """
    if count < 1:
        raise DomainError("count must be at least 1")
    if steps < 0:
        raise DomainError("number of steps must be nonnegative")
    Kf = np.array(_rows(K), dtype=float) if not isinstance(K, np.ndarray) else K
    n = Kf.shape[0]
    p0 = np.array([float(p) for p in P0])
    if p0.shape[0] != n:
        raise DomainError("initial distribution has the wrong length")
    cdf0 = np.cumsum(p0)
    state = np.minimum(np.searchsorted(cdf0, _uniforms(seed, 0, count), side="right"), n - 1)
    cdf = np.cumsum(Kf, axis=0)  # column y: cumulative distribution of the next state
    for s in range(1, steps + 1):
        u = _uniforms(seed, s, count)
        nxt = np.empty_like(state)
        for y in range(n):
            sel = state == y
            if sel.any():
                nxt[sel] = np.searchsorted(cdf[:, y], u[sel], side="right")
        state = np.minimum(nxt, n - 1)
    counts = np.bincount(state, minlength=n)
    return (counts / count).tolist()


def total_variation(p: Sequence, q: Sequence) -> float:
    return 0.5 * float(sum(abs(float(a) - float(b)) for a, b in zip(p, q)))


def qm_union_reconstruct(case: str, params: dict, window: int, n_terms: int = 40) -> np.ndarray:
    """Float ``H`` on ``{0..window}`` rebuilt from both q-Meixner eigenvector families.

    ``H = sum_n kappa(n) phi_n phi_n^T + sum_n kappa_-(n) phi_-n phi_-n^T``,
    truncated at ``n_terms`` terms per family. Whether the union is complete
    is not established in general; this is an empirical probe.
    """
    from .families import orthonormal

    spec = get_case(case)
    if spec.kappa_minus is None:
        raise DomainError(f"{case} is not a q-Meixner chain")
    v = case_params(case, params)
    lam = spec.resolve(v)
    lat = Lattice.semi_infinite()
    H = np.zeros((window + 1, window + 1))
    for n in range(n_terms):
        phi = np.array(orthonormal("qmeixner", lam, n, lat, x_max=window))
        H += float(spec.kappa(v, n)) * np.outer(phi, phi)
        psi = np.array(orthonormal("qmeixner-second", lam, n, lat, x_max=window))
        H += spec.kappa_minus(v, n) * np.outer(psi, psi)
    return H


def qm_orthogonality_error(lam: dict, n_max: int = 10) -> float:
    """Largest deviation of the joint Gram matrix of both q-Meixner families from the identity."""
    from .families import orthonormal, weighted_truncation

    lat = Lattice.semi_infinite()
    x_max = max(weighted_truncation("qmeixner", lam, n_max, lat.tail_tol),
                weighted_truncation("qmeixner-second", lam, n_max, lat.tail_tol))
    vecs = [orthonormal("qmeixner", lam, n, lat, x_max=x_max) for n in range(n_max + 1)]
    vecs += [orthonormal("qmeixner-second", lam, n, lat, x_max=x_max) for n in range(n_max + 1)]
    V = np.array(vecs)
    return float(np.max(np.abs(V @ V.T - np.eye(len(vecs)))))


def semi_residual(K: TransitionMatrix, n_max: int = 10, normalized: bool = False) -> float:
    """``max_{x <= x_max/2} |sum_y K(x,y) pi(y) P_n(y) - kappa(n) pi(x) P_n(x)|`` over ``n <= n_max``.

    ``normalized=True`` divides by ``sqrt(pi(x)) / d_n``, i.e. measures the
    residual of the orthonormal eigenvector ``phi_n`` instead of ``pi P_n``.
    """
    from .families import poly

    spec = get_case(K.case)
    lam = K.meta["lambda"]
    x_max = K.meta["x_max"]
    A = K.array()
    S = A.shape[0] - 1
    table = MeasureTable(spec.family, lam)
    pi = np.array([table(x) for x in range(S + 1)])
    kappa = [float(spec.kappa(_case_values(K), n)) for n in range(n_max + 1)]
    window = x_max // 2 + 1
    worst = 0.0
    for n in range(n_max + 1):
        P = np.array([float(poly(spec.family, lam, n, x)) for x in range(S + 1)])
        r = np.abs(A @ (pi * P) - kappa[n] * pi * P)[:window]
        if normalized:
            r = r * math.sqrt(float(norm_sq(spec.family, lam, n))) / np.sqrt(pi[:window])
        worst = max(worst, float(r.max()))
    return worst


def _case_values(K: TransitionMatrix) -> dict:
    return case_params(K.case, K.meta["params"])
