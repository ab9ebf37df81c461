"""Independent reference computations used by the tests."""

from fractions import Fraction
from itertools import permutations


def tree_closed_walks(degree, length):
    """Closed walks of each length ``0..length-1`` at a vertex of the ``degree``-regular tree."""
    # state: distance from the start
    counts = {0: 1}
    out = []
    for _ in range(length):
        out.append(counts.get(0, 0))
        nxt = {}
        for d, c in counts.items():
            up = degree if d == 0 else degree - 1
            nxt[d + 1] = nxt.get(d + 1, 0) + c * up
            if d > 0:
                nxt[d - 1] = nxt.get(d - 1, 0) + c
        counts = nxt
    return out


def line_closed_walks(length):
    """Closed +-1 walks on the integers, lengths ``0..length-1``."""
    counts = {0: 1}
    out = []
    for _ in range(length):
        out.append(counts.get(0, 0))
        nxt = {}
        for d, c in counts.items():
            for s in (-1, 1):
                nxt[d + s] = nxt.get(d + s, 0) + c
        counts = nxt
    return out


def _sign(perm):
    s = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j = i
        cyc = 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            cyc += 1
        if cyc % 2 == 0:
            s = -s
    return s


def leibniz_det(M):
    """Determinant by summing over permutations (entries may be any ring elements)."""
    n = len(M)
    total = None
    for perm in permutations(range(n)):
        term = None
        for i in range(n):
            term = M[i][perm[i]] if term is None else term * M[i][perm[i]]
        term = term if _sign(perm) > 0 else -term
        total = term if total is None else total + term
    return total


def charpoly_by_cofactors(A):
    """Coefficients of ``det(tI - A)`` (highest first) for a rational matrix, via interpolation of Leibniz determinants."""
    n = len(A)
    pts = list(range(n + 1))
    vals = []
    for t in pts:
        M = [[(Fraction(t) if i == j else Fraction(0)) - A[i][j] for j in range(n)] for i in range(n)]
        vals.append(leibniz_det(M))
    coeffs = [Fraction(0)] * (n + 1)
    for k, (xk, yk) in enumerate(zip(pts, vals)):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for m, xm in enumerate(pts):
            if m == k:
                continue
            basis = [b - xm * a for a, b in zip(basis + [Fraction(0)], [Fraction(0)] + basis)]
            denom *= xk - xm
        for i, b in enumerate(basis):
            coeffs[i] += yk * b / denom
    return coeffs[::-1]

