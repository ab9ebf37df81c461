"""
Words over the digits ``1..q`` indexed by the integers, and the
Boltzmann-Fock model of free variables with prescribed free cumulants.

A word ``d_1 d_2 ... d_l`` with digits in ``1..q`` is the integer
``sum_i d_i q**(l-i)`` (base ``q`` with digits shifted up by one), so every
nonnegative integer is exactly one word and ``0`` is the empty word.
Concatenation is ``x * y = x q**len(y) + y``.

Generator ``theta`` acts on the basis vector of word ``w`` by
``e_w -> e_{theta w} + sum_{j>=0} kappa_{j+1} e_{w'}`` where ``w = theta^j w'``
ranges over the ways of stripping ``j`` leading copies of ``theta``.
Vectors are sparse dicts ``word -> scalar`` and the operators are applied
without truncation, so moments come out exact.
"""

from __future__ import annotations

import random
from bisect import bisect_right
from fractions import Fraction
from itertools import product

from .errors import DepthOverflow, InsufficientOrder
from .ncpoly import MatNCPoly, NCPoly, apply_to_vector

__all__ = [
    "word_length",
    "digits",
    "from_digits",
    "star",
    "diamond",
    "words_upto",
    "FockOperator",
    "build_generator",
    "FockModel",
    "moment_oracle",
    "free_independence_check",
    "DEFAULT_DIM_CAP",
]

DEFAULT_DIM_CAP = 2_000_000


def digits(x, q):
    """Digit string of word ``x`` (most significant first)."""
    out = []
    while x > 0:
        d = (x - 1) % q + 1
        out.append(d)
        x = (x - d) // q
    return out[::-1]


def from_digits(ds, q):
    x = 0
    for d in ds:
        if not 1 <= d <= q:
            raise ValueError(f"digit {d} outside 1..{q}")
        x = x * q + d
    return x


class _Radix:
    """Cached powers of ``q`` and first index of each word length."""

    def __init__(self, q):
        self.q = q
        self.pow = [1]
        self.start = [0, 1]   # start[L] = index of the first word of length L

    def grow(self, L):
        while len(self.pow) <= L + 1:
            self.pow.append(self.pow[-1] * self.q)
            self.start.append(self.start[-1] + self.pow[len(self.start) - 1])

    def length(self, x):
        start = self.start
        while start[-1] <= x:
            self.grow(len(start))
        return bisect_right(start, x) - 1


_RADIX = {}


def _radix(q):
    r = _RADIX.get(q)
    if r is None:
        r = _RADIX[q] = _Radix(q)
    return r


def word_length(x, q):
    if q == 1:
        return x
    return _radix(q).length(x)


def star(x, y, q):
    """Concatenation of the digit strings of ``x`` and ``y``."""
    return x * q ** word_length(y, q) + y


def diamond(x, y, q):
    """``x`` concatenated with itself ``y`` times (``0`` when ``y == 0``)."""
    if y < 0:
        raise ValueError("diamond power must be nonnegative")
    out = 0
    for _ in range(y):
        out = star(out, x, q)
    return out


def words_upto(D, q):
    """Number of words of length at most ``D``."""
    return D + 1 if q == 1 else (q ** (D + 1) - 1) // (q - 1)


def _strip_run(w, theta, q):
    """``[w, w', w'', ...]``: ``w`` with 0, 1, 2, ... leading ``theta`` removed."""
    if q == 1:
        return list(range(w, -1, -1))
    rad = _radix(q)
    L = rad.length(w)
    out = [w]
    while L > 0:
        top = rad.pow[L - 1]
        lead = (w - rad.start[L]) // top + 1
        if lead != theta:
            break
        w -= theta * top
        L -= 1
        out.append(w)
    return out


class FockOperator:
    """Sparse square matrix on the words of length ``<= depth``."""

    def __init__(self, depth, q, entries):
        self.depth = depth
        self.q = q
        self.dim = words_upto(depth, q)
        self.entries = {k: v for k, v in entries.items() if v}

    def to_dense(self):
        M = [[Fraction(0)] * self.dim for _ in range(self.dim)]
        for (i, j), v in self.entries.items():
            M[i][j] = v
        return M

    def __repr__(self):
        return f"FockOperator(depth={self.depth}, dim={self.dim}, nnz={len(self.entries)})"


def build_generator(theta, kappa, D, q):
    """
    Truncation of generator ``theta`` to words of length ``<= D``.

    ``kappa`` lists ``kappa_1, kappa_2, ...``; lowering entries leading past
    depth ``D`` are dropped.
    """
    dim = words_upto(D, q)
    entries = {}
    for col in range(dim):
        ln = word_length(col, q)
        if ln < D:
            entries[(star(theta, col, q), col)] = Fraction(1)
        for j, row in enumerate(_strip_run(col, theta, q)):
            if j < len(kappa) and kappa[j]:
                entries[(row, col)] = entries.get((row, col), 0) + kappa[j]
    return FockOperator(D, q, entries)


class FockModel:
    """
    Exact sparse action of the free family with the given laws.

    Parameters
    ----------
    laws : list of Law
    dim_cap : int
        Maximum support size of any intermediate vector.
    """

    def __init__(self, laws, dim_cap=DEFAULT_DIM_CAP):
        self.laws = list(laws)
        self.q = len(self.laws)
        self.dim_cap = dim_cap
        self._kappa = [[] for _ in self.laws]
        self.max_length = 0
        self.max_len = None

    def kappa(self, theta, j):
        """``kappa_j`` for generator ``theta`` (1-based)."""
        ks = self._kappa[theta - 1]
        if j > len(ks):
            law = self.laws[theta - 1]
            want = max(j, 2 * len(ks), 8)
            if law.order is not None:
                want = min(want, law.order)
            if j > want:
                raise InsufficientOrder(
                    f"law for x{theta} known through order {law.order}; kappa_{j} needed")
            ks = law.cumulants_upto(want)
            self._kappa[theta - 1] = ks = [k.numerator if k.denominator == 1 else k for k in ks]
        return ks[j - 1]

    def _add(self, out, k, v):
        s = out.get(k, 0) + v
        if s:
            out[k] = s
        else:
            out.pop(k, None)

    def apply(self, theta, vec):
        q = self.q
        out = {}
        for w, v in vec.items():
            self._add(out, theta * q ** word_length(w, q) + w if q > 1 else w + 1, v)
            for j, row in enumerate(_strip_run(w, theta, q)):
                k = self.kappa(theta, j + 1)
                if k:
                    self._add(out, row, k * v)
        self._check(out)
        return out

    def apply_transpose(self, theta, vec):
        """Adjoint action; raising runs stop at words longer than ``max_len``."""
        if self.max_len is None:
            raise ValueError("the adjoint action needs a word-length bound")
        q = self.q
        rad = _radix(q) if q > 1 else None
        if rad is not None:
            rad.grow(self.max_len + 1)
        out = {}
        for w, v in vec.items():
            ln = word_length(w, q)
            if w > 0:
                if q == 1:
                    self._add(out, w - 1, v)
                else:
                    top = rad.pow[ln - 1]
                    if (w - rad.start[ln]) // top + 1 == theta:
                        self._add(out, w - theta * top, v)
            row = w
            L = ln
            j = 0
            while L <= self.max_len:
                k = self.kappa(theta, j + 1)
                if k:
                    self._add(out, row, k * v)
                j += 1
                row = row + 1 if q == 1 else theta * rad.pow[L] + row
                L += 1
        self._check(out)
        return out

    def _check(self, vec):
        if len(vec) > self.dim_cap:
            raise DepthOverflow(f"Fock vector support {len(vec)} exceeds cap {self.dim_cap}")
        if vec:
            m = max(vec)
            if m > 0:
                self.max_length = max(self.max_length, word_length(m, self.q))

    def state(self, f):
        """``phi(f(x))`` at the vacuum, for a scalar polynomial ``f``."""
        if isinstance(f, MatNCPoly):
            f = f.entries[0][0]
        v = apply_to_vector(MatNCPoly.scalar(f), self.apply, [{0: Fraction(1)}])[0]
        return v.get(0, Fraction(0))


def _transpose_poly(f):
    """Entrywise word reversal plus matrix transpose: the formal adjoint."""
    p = f.p
    return MatNCPoly([[NCPoly({tuple(reversed(w)): c for w, c in f.entries[j][i].terms.items()})
                       for j in range(p)] for i in range(p)])


def _apply_bounded_transpose(model, ft, vecs, base):
    """
    ``F^T`` applied to a block vector, pruning raised words that are too long.

    A word still waiting for ``r`` letters of the current monomial may be at
    most ``base + r`` long: each adjoint letter shortens a word by at most one.
    """
    p = ft.p
    out = [dict() for _ in range(p)]
    slack = {}
    for row in ft.entries:
        for poly in row:
            for w in poly.terms:
                for cut in range(len(w) + 1):
                    u = w[cut:]
                    slack[u] = max(slack.get(u, 0), cut)
    for j in range(p):
        v = vecs[j]
        if not v:
            continue
        images = {(): v}

        def image(u):
            if u not in images:
                inner = image(u[1:])
                model.max_len = base + slack[u]
                images[u] = model.apply_transpose(u[0], inner)
            return images[u]

        for i in range(p):
            for w, c in ft.entries[i][j].terms.items():
                if c.denominator == 1:
                    c = c.numerator
                for idx, val in image(w).items():
                    s = out[i].get(idx, 0) + c * val
                    if s:
                        out[i][idx] = s
                    else:
                        out[i].pop(idx, None)
    return out


def moment_oracle(f, laws, M, dim_cap=DEFAULT_DIM_CAP, report=None, back_steps=None):
    """
    Moments ``phi_p(F**k)`` for ``k = 0..M`` in the Boltzmann-Fock model.

    ``m_k = (1/p) sum_i <(F^T)^a e_i, F^b e_i>`` with ``a = min(k // 2, A)``
    and ``b = k - a``, where ``A = back_steps`` (default ``M // 2``).  The
    forward powers need no pruning; on the adjoint side a word is dropped
    once it is too long to ever pair with a forward word.  Nothing that can
    contribute is truncated, so the moments are exact.

    Raises
    ------
    InsufficientOrder
        A cumulant beyond a finite law's order was needed.
    DepthOverflow
        An intermediate vector exceeded ``dim_cap`` entries.
    """
    if isinstance(f, NCPoly):
        f = MatNCPoly.scalar(f)
    q = len(laws)
    if f.num_vars() > q:
        raise InsufficientOrder(f"expression uses x{f.num_vars()} but only {q} laws given")
    model = FockModel(laws, dim_cap)
    deg = max(f.degree(), 1)
    A = M // 2 if back_steps is None else min(back_steps, M // 2)
    B = M - A
    ft = _transpose_poly(f)
    p = f.p
    unit = [[{0: 1} if r == i else {} for r in range(p)] for i in range(p)]
    fwd = [unit]   # fwd[b][i] = block vector F^b e_i
    for _ in range(B):
        fwd.append([apply_to_vector(f, model.apply, v) for v in fwd[-1]])
    bwd = [unit]
    for s in range(A):
        # after s + 1 adjoint steps a word must still be able to shrink to
        # forward length: at most deg * (M - s - 1) overall
        base = deg * (M - s - 1)
        bwd.append([_apply_bounded_transpose(model, ft, v, base) for v in bwd[-1]])
    out = []
    for k in range(M + 1):
        a = min(k // 2, A)
        b = k - a
        total = 0
        for i in range(p):
            u = bwd[a][i]
            v = fwd[b][i]
            for r in range(p):
                ur, vr = u[r], v[r]
                if len(ur) > len(vr):
                    ur, vr = vr, ur
                for w, x in ur.items():
                    y = vr.get(w)
                    if y:
                        total += x * y
        out.append(Fraction(total) / p)
    if report is not None:
        report["depth"] = model.max_length
    return out


def free_independence_check(laws, D=None, k=4, samples=200, seed=0):
    """
    Check ``phi(P_1(x_{t1}) ... P_k(x_{tk})) = 0`` for centred one-variable
    polynomials ``P_i`` on alternating index sequences ``t1 != t2 != ...``.

    The centred polynomials used are ``x - m1`` and ``x^2 - m2``.  At most
    ``samples`` products per length are tested (chosen reproducibly).
    """
    q = len(laws)
    if q < 2:
        return True
    model = FockModel(laws)
    centred = {}
    for t in range(1, q + 1):
        m = laws[t - 1].moments_upto(2)
        x = NCPoly.generator(t)
        centred[t] = [x - m[1], x * x - m[2]]
    rng = random.Random(seed)
    for length in range(2, k + 1):
        seqs = [s for s in product(range(1, q + 1), repeat=length)
                if all(a != b for a, b in zip(s, s[1:]))]
        combos = [(s, c) for s in seqs for c in product((0, 1), repeat=length)]
        if len(combos) > samples:
            combos = rng.sample(combos, samples)
        for s, c in combos:
            f = NCPoly.constant(1)
            for t, ci in zip(s, c):
                f = f * centred[t][ci]
            if model.state(f) != 0:
                return False
    return True
