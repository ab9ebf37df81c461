"""
Linear realizations ``f = b d^{-1} c`` of matrix noncommutative polynomials,
and the Schwinger-Dyson data assembled from them.

Every realization built here has ``d = d0 + sum_theta d_theta x_theta`` with
``d0 - I`` and each ``d_theta`` strictly upper triangular, so ``d^{-1}`` is the
finite Neumann sum ``sum_{k<N} (I - d)^k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import DimensionMismatch, InsufficientOrder, NotAffine
from .ncpoly import MatNCPoly, NCPoly
from .series import MatSeries, as_scalar

__all__ = [
    "Realization",
    "SDData",
    "atom_realization",
    "sum_realization",
    "prod_realization",
    "realize",
    "verify_realization",
    "build_sd_data",
    "kappa_order_needed",
]


def _zeros(r, c):
    return [[Fraction(0)] * c for _ in range(r)]


def _eye(n):
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def _place(dst, src, r0, c0, sign=1):
    for i, row in enumerate(src):
        for j, v in enumerate(row):
            if v:
                dst[r0 + i][c0 + j] = sign * v


@dataclass(frozen=True)
class Realization:
    """``f = b (d0 + sum_theta d[theta] x_theta)^{-1} c`` with scalar blocks."""

    p: int
    N: int
    b: list
    c: list
    d0: list
    d: list  # one N x N matrix per generator x1..xq

    @property
    def q(self):
        return len(self.d)

    def with_q(self, q):
        """Pad (never truncate) the generator list to ``q`` entries."""
        if q < self.q:
            if any(any(v for row in m for v in row) for m in self.d[q:]):
                raise DimensionMismatch(f"realization uses more than {q} generators")
            return Realization(self.p, self.N, self.b, self.c, self.d0, self.d[:q])
        return Realization(self.p, self.N, self.b, self.c, self.d0,
                           self.d + [_zeros(self.N, self.N) for _ in range(q - self.q)])

    def is_triangular(self):
        """``d0 - I`` and every ``d_theta`` strictly upper triangular."""
        N = self.N
        for i in range(N):
            if self.d0[i][i] != 1:
                return False
            for j in range(i):
                if self.d0[i][j] or any(m[i][j] for m in self.d):
                    return False
            if any(m[i][i] for m in self.d):
                return False
        return True


def atom_realization(f, q=None):
    """
    Realization of an entrywise-affine ``f``:
    ``b = [I 0]``, ``d = [[I, -f], [0, I]]``, ``c = [0; I]``.
    """
    if isinstance(f, NCPoly):
        f = MatNCPoly.scalar(f)
    if not f.is_affine():
        raise NotAffine("atom realization needs every entry in span{1, x1, ..., xq}")
    p = f.p
    q = max(f.num_vars(), q or 0)
    N = 2 * p
    b = _zeros(p, N)
    _place(b, _eye(p), 0, 0)
    c = _zeros(N, p)
    _place(c, _eye(p), p, 0)
    d0 = _eye(N)
    d = [_zeros(N, N) for _ in range(q)]
    for i in range(p):
        for j in range(p):
            for w, v in f.entries[i][j].terms.items():
                if not w:
                    d0[i][p + j] = -v
                else:
                    d[w[0] - 1][i][p + j] = -v
    return Realization(p, N, b, c, d0, d)


def _align(r1, r2):
    if r1.p != r2.p:
        raise DimensionMismatch(f"realizations of sizes {r1.p} and {r2.p}")
    q = max(r1.q, r2.q)
    return r1.with_q(q), r2.with_q(q), q


def sum_realization(r1, r2):
    """Direct sum: realizes ``f1 + f2``."""
    r1, r2, q = _align(r1, r2)
    p, N1, N2 = r1.p, r1.N, r2.N
    N = N1 + N2
    b = _zeros(p, N)
    _place(b, r1.b, 0, 0)
    _place(b, r2.b, 0, N1)
    c = _zeros(N, p)
    _place(c, r1.c, 0, 0)
    _place(c, r2.c, N1, 0)

    def diag(m1, m2):
        m = _zeros(N, N)
        _place(m, m1, 0, 0)
        _place(m, m2, N1, N1)
        return m

    return Realization(p, N, b, c, diag(r1.d0, r2.d0),
                       [diag(m1, m2) for m1, m2 in zip(r1.d, r2.d)])


def prod_realization(r1, r2):
    """
    Realizes ``f1 f2`` with ``d = [[d1, c1, 0], [0, I, b2], [0, 0, d2]]``,
    ``b = [b1 0 0]`` and ``c = [0; 0; c2]``.
    """
    r1, r2, q = _align(r1, r2)
    p, N1, N2 = r1.p, r1.N, r2.N
    N = N1 + p + N2
    b = _zeros(p, N)
    _place(b, r1.b, 0, 0)
    c = _zeros(N, p)
    _place(c, r2.c, N1 + p, 0)
    d0 = _zeros(N, N)
    _place(d0, r1.d0, 0, 0)
    _place(d0, r1.c, 0, N1)
    _place(d0, _eye(p), N1, N1)
    _place(d0, r2.b, N1, N1 + p)
    _place(d0, r2.d0, N1 + p, N1 + p)
    d = []
    for m1, m2 in zip(r1.d, r2.d):
        m = _zeros(N, N)
        _place(m, m1, 0, 0)
        _place(m, m2, N1 + p, N1 + p)
        d.append(m)
    return Realization(p, N, b, c, d0, d)


def _split(f):
    """Affine part and, per leading generator, the remainder after it."""
    p = f.p
    affine = [[{} for _ in range(p)] for _ in range(p)]
    tails = {}
    for i in range(p):
        for j in range(p):
            for w, v in f.entries[i][j].terms.items():
                if len(w) <= 1:
                    affine[i][j][w] = v
                else:
                    t = tails.setdefault(w[0], [[{} for _ in range(p)] for _ in range(p)])
                    t[i][j][w[1:]] = v
    aff = MatNCPoly([[NCPoly(e) for e in row] for row in affine])
    return aff, {k: MatNCPoly([[NCPoly(e) for e in row] for row in t])
                 for k, t in sorted(tails.items())}


def realize(f, q=None):
    """
    Realization of an arbitrary matrix polynomial.

    The affine part becomes one atom; the rest is grouped by leading
    generator as ``sum_theta (x_theta I) * tail_theta`` and each tail is
    realized recursively, so shared prefixes share internal states.
    """
    if isinstance(f, NCPoly):
        f = MatNCPoly.scalar(f)
    q = max(f.num_vars(), q or 0)
    aff, tails = _split(f)
    parts = []
    if not all(x.is_zero for row in aff.entries for x in row) or not tails:
        parts.append(atom_realization(aff, q))
    for theta, tail in tails.items():
        left = atom_realization(MatNCPoly([[NCPoly.generator(theta) if i == j else NCPoly()
                                            for j in range(f.p)] for i in range(f.p)]), q)
        parts.append(prod_realization(left, realize(tail, q)))
    r = parts[0]
    for s in parts[1:]:
        r = sum_realization(r, s)
    return r.with_q(q)


def _affine_matrix(r):
    """``I - d`` as an ``N x N`` grid of NCPoly."""
    N = r.N
    out = []
    for i in range(N):
        row = []
        for j in range(N):
            terms = {}
            v = Fraction(int(i == j)) - r.d0[i][j]
            if v:
                terms[()] = v
            for t, m in enumerate(r.d, start=1):
                if m[i][j]:
                    terms[(t,)] = -m[i][j]
            row.append(NCPoly(terms))
        out.append(row)
    return out


def verify_realization(r, f):
    """
    Exact check of ``b d^{-1} c == f`` using the terminating Neumann sum
    ``d^{-1} = sum_{k<N} (I - d)^k``.
    """
    if isinstance(f, NCPoly):
        f = MatNCPoly.scalar(f)
    if r.p != f.p or not r.is_triangular():
        return False
    N, p = r.N, r.p
    nil = _affine_matrix(r)
    cols = [[NCPoly.constant(r.c[i][j]) for j in range(p)] for i in range(N)]
    acc = [row[:] for row in cols]
    for _ in range(N):
        cols = [[sum((nil[i][k] * cols[k][j] for k in range(N) if not nil[i][k].is_zero),
                     NCPoly()) for j in range(p)] for i in range(N)]
        if all(x.is_zero for row in cols for x in row):
            break
        acc = [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(acc, cols)]
    else:
        return False
    out = [[sum((acc[k][j].scale(r.b[i][k]) for k in range(N) if r.b[i][k]), NCPoly())
            for j in range(p)] for i in range(p)]
    return MatNCPoly(out) == f


@dataclass
class SDData:
    """
    Data of a generalized Schwinger-Dyson equation
    ``I + a0 g + sum_theta sum_{j>=2} kappa_j^theta (a_theta g)^j = 0``
    with ``a0 = a0_const + a0_z * z``.

    ``cumulants[theta]`` lists ``kappa_2, kappa_3, ...`` for generator
    ``theta + 1``.
    """

    n: int
    a0_const: list
    a0_z: list
    a: list
    cumulants: list
    p: int = 1
    realization: Realization | None = field(default=None, repr=False)

    @property
    def q(self):
        return len(self.a)

    def a0(self):
        return MatSeries.pencil(self.a0_const, self.a0_z)

    def kappa(self, theta, j):
        """``kappa_j`` of generator ``theta`` (0-based), ``j >= 2``."""
        ks = self.cumulants[theta]
        return ks[j - 2] if j - 2 < len(ks) else Fraction(0)

    def max_order(self, theta):
        ks = self.cumulants[theta]
        last = max((i for i, v in enumerate(ks) if v), default=None)
        return 1 if last is None else last + 2

    @classmethod
    def direct(cls, a0_const, a0_z, a, cumulants, p=1):
        """Data given directly, with scalar entries coerced to Fractions."""
        conv = lambda m: [[as_scalar(v) for v in row] for row in m]
        return cls(len(a0_const), conv(a0_const), conv(a0_z), [conv(m) for m in a],
                   [[as_scalar(v) for v in ks] for ks in cumulants], p)


def kappa_order_needed(degree, T):
    """Cumulant order sufficient for moments ``m_0..m_{T-1}`` of a degree-``degree`` polynomial."""
    return max(2, degree * max(T - 1, 1))


def build_sd_data(r, laws, T, degree=None):
    """
    Schwinger-Dyson data of a realization.

    With ``L0 + sum_theta L_theta x_theta = [[0, b], [c, d]]`` and ``n = p + N``:
    ``a_theta = L_theta`` and ``a0 = L0 + diag(z I_p, 0) + sum kappa_1 L_theta``.
    Cumulants are attached through the order needed for ``T`` Stieltjes
    coefficients of a polynomial of the given degree.
    """
    q = len(laws)
    if r.q > q:
        raise InsufficientOrder(f"expression uses {r.q} generators but {q} laws were given")
    r = r.with_q(q)
    p, N = r.p, r.N
    n = p + N
    if degree is None:
        degree = max(1, N)  # conservative when the source polynomial is unknown
    K = kappa_order_needed(degree, T)
    L0 = _zeros(n, n)
    _place(L0, r.b, 0, p)
    _place(L0, r.c, p, 0)
    _place(L0, r.d0, p, p)
    Ls = []
    for m in r.d:
        L = _zeros(n, n)
        _place(L, m, p, p)
        Ls.append(L)
    cumulants = []
    kappa1 = []
    for theta, law in enumerate(laws):
        try:
            ks = law.cumulants_upto(K)
        except InsufficientOrder as exc:
            raise InsufficientOrder(f"law for x{theta + 1}: {exc}") from None
        kappa1.append(ks[0])
        cumulants.append(list(ks[1:]))
    a0_const = [row[:] for row in L0]
    for k1, L in zip(kappa1, Ls):
        if k1:
            for i in range(n):
                for j in range(n):
                    if L[i][j]:
                        a0_const[i][j] += k1 * L[i][j]
    a0_z = _zeros(n, n)
    for i in range(p):
        a0_z[i][i] = Fraction(1)
    return SDData(n, a0_const, a0_z, Ls, cumulants, p, r)
