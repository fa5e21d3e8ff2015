"""Reference constructions used to cross-check the library.

These take different routes from the package: dense Kronecker products
instead of Koszul bookkeeping, Lagrange interpolation instead of operator
expansions, and breadth-first swap walks instead of closed-form signs.
"""

import itertools
from collections import deque
from fractions import Fraction


def kron(A, B):
    n, m = len(A), len(B)
    return [
        [A[i // m][j // m] * B[i % m][j % m] for j in range(n * m)]
        for i in range(n * m)
    ]


def eye(d):
    return [[Fraction(int(i == j)) for j in range(d)] for i in range(d)]


def matmul(A, B):
    return [[sum(A[i][k] * B[k][j] for k in range(len(B))) for j in range(len(B[0]))] for i in range(len(A))]


def unit_matrix(K, a, b, c=1):
    M = [[Fraction(0)] * K for _ in range(K)]
    M[a - 1][b - 1] = Fraction(c)
    return M


def grading_matrix(parity):
    return [[Fraction((-1) ** parity[i]) if i == j else Fraction(0) for j in range(len(parity))] for i in range(len(parity))]


def site_operator(X, parity_of_X, k, n, parity):
    """``Sigma^pi (x) ... (x) Sigma^pi (x) X (x) 1 ... 1`` with ``X`` in slot ``k`` (0-based)."""
    K = len(parity)
    S = grading_matrix(parity) if parity_of_X else eye(K)
    out = [[Fraction(1)]]
    for m in range(n):
        out = kron(out, X if m == k else (S if m < k else eye(K)))
    return out


def dense_local(local, slots, n):
    """Dense matrix of a matrix-unit expansion placed on 0-based ``slots``."""
    parity = local.grading.parity
    K = len(parity)
    total = [[Fraction(0)] * K**n for _ in range(K**n)]
    for mono, c in local.terms.items():
        M = eye(K**n)
        for (a, b), k in zip(mono, slots):
            p = (parity[a - 1] + parity[b - 1]) % 2
            M = matmul(M, site_operator(unit_matrix(K, a, b), p, k, n, parity))
        total = [[x + c * y for x, y in zip(rt, rm)] for rt, rm in zip(total, M)]
    return total


def dense(op):
    d = op.dim
    return [[op.rows.get(r, {}).get(c, 0) for c in range(d)] for r in range(d)]


def super_swap(J, i, j, parity):
    """Graded swap of letters at positions ``i < j`` of the ket ``e_J`` (0-based).

    Moving ``e_{J_i}`` past the letters between and ``e_{J_j}`` back gives
    the Koszul sign of passing odd vectors across each other.
    """
    J = list(J)
    a, b = J[i], J[j]
    middle = sum(parity[x - 1] for x in J[i + 1 : j])
    s = parity[a - 1] * parity[b - 1] + (parity[a - 1] + parity[b - 1]) * middle
    J[i], J[j] = b, a
    return tuple(J), (-1) ** (s % 2)


def lagrange_eval(xs, ys, x):
    total = 0
    for k, (xk, yk) in enumerate(zip(xs, ys)):
        term = yk
        for m, xm in enumerate(xs):
            if m != k:
                term = term * (x - xm) / (xk - xm)
        total = total + term
    return total


def swap_walk_coefficients(states, parity, sign, q=None):
    """Coefficients obtained by adjacent swaps from the sorted state.

    Swapping neighbours ``a, b`` multiplies by ``sign * (-1)^{p(a)p(b)}`` and,
    when ``q`` is given, by ``q`` if the swap creates an inversion and ``1/q``
    if it removes one.  Returns ``(coefficients, consistent)`` where
    ``consistent`` is False if two paths disagree.
    """
    start = tuple(sorted(states[0]))
    coeff = {start: Fraction(1) if q is None else q ** 0}
    consistent = True
    queue = deque([start])
    while queue:
        J = queue.popleft()
        for k in range(len(J) - 1):
            a, b = J[k], J[k + 1]
            if a == b:
                continue
            Jn = J[:k] + (b, a) + J[k + 2 :]
            factor = sign * (-1) ** (parity[a - 1] * parity[b - 1])
            if q is not None:
                factor = factor * (q if a < b else 1 / q)
            value = coeff[J] * factor
            if Jn in coeff:
                consistent = consistent and coeff[Jn] == value
            else:
                coeff[Jn] = value
                queue.append(Jn)
    return coeff, consistent


def elementary_by_expansion(values, d):
    """Coefficient of ``t^d`` in ``prod (1 + v t)``."""
    poly = [Fraction(1)]
    for v in values:
        nxt = poly + [Fraction(0)]
        for k in range(len(poly)):
            nxt[k + 1] += v * poly[k]
        poly = nxt
    return poly[d] if d < len(poly) else Fraction(0)


def all_multi_indices(K, n):
    return list(itertools.product(range(1, K + 1), repeat=n))
