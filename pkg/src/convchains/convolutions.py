"""Convolution shapes that turn measures into transition matrices.

Kernels are callables ``k(i, M)`` returning ``pi(i, M, lambda_j)`` and zero
outside ``0 <= i <= M``. The slot numbering follows the parameter roles
``lambda_1, lambda_2, lambda_3`` of the chain catalog:

* I:   ``sum_{z <= min(x,y)} k2(x-z, N-z) k1(z, y)``
* II:  ``sum_{max(0,x+y-N) <= z <= min(x,y)} k2(x-z, N-y) k1(z, y)``
* III: ``sum_{max(x,y) <= z <= N} k2(x, z) k1(z-y, N-y)``
* IV:  ``sum_{z2 <= min(x,y)} k1(z2, y) sum_{max(x,y) <= z1 <= N} k3(x-z2, z1-z2) k2(z1-y, N-y)``
* V:   ``sum_{z2 <= min(x,y)} k1(z2, y) sum_{x+y-z2 <= z1 <= N} k3(x-z2, z1-y) k2(z1-y, N-y)``

The dual shapes ``DI``..``DV`` are written out independently (not as an index
reversal) so that ``K^d(x, y) = K(N-x, N-y)`` is a genuine check.
"""

from __future__ import annotations

import numpy as np

FINITE_TYPES = ("I", "II", "III", "IV", "V")
DUAL_TYPES = {"I": "DI", "II": "DII", "III": "DIII", "IV": "DIV", "V": "DV"}


def _sum(terms, zero):
    total = zero
    for t in terms:
        total = total + t
    return total


def entry(conv: str, kernels, N: int, x: int, y: int, zero=0):
    """One matrix element ``K(x, y)`` of the given convolution shape."""
    k1, k2 = kernels[0], kernels[1]
    k3 = kernels[2] if len(kernels) > 2 else None
    lo, hi = min(x, y), max(x, y)
    if conv == "I":
        return _sum((k2(x - z, N - z) * k1(z, y) for z in range(lo + 1)), zero)
    if conv == "II":
        return _sum((k2(x - z, N - y) * k1(z, y) for z in range(max(0, x + y - N), lo + 1)), zero)
    if conv == "III":
        return _sum((k2(x, z) * k1(z - y, N - y) for z in range(hi, N + 1)), zero)
    if conv == "IV":
        return _sum((k1(z2, y) * _sum((k3(x - z2, z1 - z2) * k2(z1 - y, N - y)
                                       for z1 in range(hi, N + 1)), zero)
                     for z2 in range(lo + 1)), zero)
    if conv == "V":
        return _sum((k1(z2, y) * _sum((k3(x - z2, z1 - y) * k2(z1 - y, N - y)
                                       for z1 in range(x + y - z2, N + 1)), zero)
                     for z2 in range(lo + 1)), zero)
    if conv == "DI":
        return _sum((k2(z - x, z) * k1(N - z, N - y) for z in range(hi, N + 1)), zero)
    if conv == "DII":
        return _sum((k2(z - x, y) * k1(N - z, N - y) for z in range(hi, min(x + y, N) + 1)), zero)
    if conv == "DIII":
        return _sum((k2(N - x, N - z) * k1(y - z, y) for z in range(lo + 1)), zero)
    if conv == "DIV":
        return _sum((k1(N - z2, N - y) * _sum((k3(z2 - x, z2 - z1) * k2(y - z1, y)
                                               for z1 in range(lo + 1)), zero)
                     for z2 in range(hi, N + 1)), zero)
    if conv == "DV":
        return _sum((k1(N - z2, N - y) * _sum((k3(z2 - x, y - z1) * k2(y - z1, y)
                                               for z1 in range(x + y - z2 + 1)), zero)
                     for z2 in range(hi, N + 1)), zero)
    raise ValueError(f"unknown convolution type {conv!r}")


def build(conv: str, kernels, N: int, zero=0) -> list:
    """Dense ``(N+1) x (N+1)`` matrix as a list of rows ``K[x][y]``."""
    return [[entry(conv, kernels, N, x, y, zero) for y in range(N + 1)] for x in range(N + 1)]


def first_row(conv: str, kernels, N: int, zero=0) -> list:
    """``K(0, y)`` for all ``y``: the only row the eigenvalue sum formula needs."""
    return [entry(conv, kernels, N, 0, y, zero) for y in range(N + 1)]


# ---------------------------------------------------------------- semi-infinite (float)

def build_semi(conv: str, A1, A2, A3, size: int, inner: int) -> np.ndarray:
    """Truncated semi-infinite matrix on ``{0..size}`` from kernel arrays.

    All kernels are given in absolute lattice coordinates as arrays of shape
    ``(inner+1, inner+1)`` (``inner >= size``), zero outside their support, so
    the summation ranges of each shape are implied by the supports:

    * I:   ``K = A2 @ A1`` with ``A2[x, z]`` (``z <= x``), ``A1[z, y] = pi(z, y)``
    * III: ``K = A2 @ A1`` with ``A2[x, z] = pi(x, z)``, ``A1[z, y]`` (``z >= y``)
    * IV:  ``K[x, y] = sum_{z2, z1} A1[z2, y] A3[x - z2, z1 - z2] A2[z1, y]``
    * V:   ``K[x, y] = sum_{z2, z1} A1[z2, y] A3[x - z2, z1 - y] A2[z1, y]``

    ``A3`` is indexed by relative arguments ``A3[i, M] = pi(i, M)``.
    Sums over ``z1`` run to ``inner``; the caller picks ``inner`` so the
    neglected terms are below double precision.
    """
    n = size + 1
    if conv in ("I", "III"):
        return A2[:n, :] @ A1[:, :n]
    K = np.zeros((n, n))
    z1 = np.arange(inner + 1)
    for y in range(n):
        col = np.zeros(n)
        for z2 in range(y + 1):
            w = A1[z2, y]
            if w == 0.0:
                continue
            xs = np.arange(z2, n)
            if conv == "IV":
                # A3[x - z2, z1 - z2] for z1 >= z2
                block = A3[np.ix_(xs - z2, z1[z2:] - z2)]
                col[z2:] += w * (block @ A2[z2:, y])
            else:
                # A3[x - z2, z1 - y] for z1 >= y
                block = A3[np.ix_(xs - z2, z1[y:] - y)]
                col[z2:] += w * (block @ A2[y:, y])
        K[:, y] = col
    return K
