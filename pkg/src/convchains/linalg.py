"""Small dense linear algebra over any field of Python scalars (Fractions included)."""

from __future__ import annotations

from fractions import Fraction


def zeros(n: int, m: int, zero=0) -> list:
    return [[zero] * m for _ in range(n)]


def identity(n: int, one=Fraction(1)) -> list:
    zero = one - one
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def matmul(A: list, B: list) -> list:
    n, k, m = len(A), len(B), len(B[0])
    Bt = list(zip(*B))
    out = []
    for i in range(n):
        row = A[i]
        out.append([sum((row[t] * Bt[j][t] for t in range(k)), row[0] * 0) for j in range(m)])
    return out


def matvec(A: list, v: list) -> list:
    return [sum((a * b for a, b in zip(row, v)), row[0] * 0) for row in A]


def transpose(A: list) -> list:
    return [list(r) for r in zip(*A)]


def det(A: list):
    """Determinant by fraction-exact Gaussian elimination with row pivoting."""
    M = [list(r) for r in A]
    n = len(M)
    result = M[0][0] * 0 + 1
    for c in range(n):
        pivot = next((r for r in range(c, n) if M[r][c] != 0), None)
        if pivot is None:
            return result * 0
        if pivot != c:
            M[c], M[pivot] = M[pivot], M[c]
            result = -result
        p = M[c][c]
        result = result * p
        for r in range(c + 1, n):
            f = M[r][c] / p
            if f != 0:
                M[r] = [x - f * y for x, y in zip(M[r], M[c])]
    return result


def trace(A: list):
    return sum((A[i][i] for i in range(len(A))), A[0][0] * 0)


def matpow(A: list, k: int) -> list:
    n = len(A)
    one = A[0][0] * 0 + 1
    result = identity(n, one)
    base = A
    while k:
        if k & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        k >>= 1
    return result
