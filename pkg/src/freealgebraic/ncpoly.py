"""
Noncommutative polynomials in ``x1..xq`` with exact coefficients, square
matrices of them, and a small expression parser.

Words are tuples of generator indices; ``()`` is the unit.  Terms are kept
in a canonical order (length, then lexicographic), which makes printing
and equality deterministic.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import DimensionMismatch, ParseError
from .series import as_scalar

__all__ = ["NCPoly", "MatNCPoly", "parse", "evaluate", "apply_to_vector", "word_key"]


def word_key(w):
    return (len(w), w)


class NCPoly:
    """Element of the free algebra ``Q<x1, ..., xq>``."""

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        clean = {}
        for w, c in (terms or {}).items():
            c = as_scalar(c)
            if c:
                w = tuple(int(i) for i in w)
                if any(i < 1 for i in w):
                    raise ValueError("generator indices start at 1")
                clean[w] = clean.get(w, 0) + c
                if not clean[w]:
                    del clean[w]
        self.terms = dict(sorted(clean.items(), key=lambda t: word_key(t[0])))

    @classmethod
    def constant(cls, c):
        return cls({(): c})

    @classmethod
    def generator(cls, i):
        return cls({(i,): 1})

    @property
    def is_zero(self):
        return not self.terms

    def degree(self):
        """Length of the longest word; ``-1`` for the zero polynomial."""
        return max((len(w) for w in self.terms), default=-1)

    def num_vars(self):
        return max((max(w) for w in self.terms if w), default=0)

    def is_affine(self):
        return self.degree() <= 1

    def constant_term(self):
        return self.terms.get((), Fraction(0))

    def __add__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, 0) + c
        return NCPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return NCPoly({w: -c for w, c in self.terms.items()})

    def __sub__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        out = {}
        for w1, c1 in self.terms.items():
            for w2, c2 in other.terms.items():
                w = w1 + w2
                out[w] = out.get(w, 0) + c1 * c2
        return NCPoly(out)

    def __rmul__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return other * self

    def scale(self, c):
        c = as_scalar(c)
        return NCPoly({w: c * v for w, v in self.terms.items()})

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        out = NCPoly.constant(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        other = _as_poly(other)
        if other is None:
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(tuple(self.terms.items()))

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for w, c in self.terms.items():
            sign = "-" if c < 0 else "+"
            a = -c if c < 0 else c
            word = "*".join(f"x{i}" for i in w)
            cs = str(a)
            if not w:
                body = cs
            elif a == 1:
                body = word
            else:
                body = f"{cs}*{word}"
            parts.append((sign, body))
        s = ("-" if parts[0][0] == "-" else "") + parts[0][1]
        for sign, body in parts[1:]:
            s += f" {sign} {body}"
        return s

    def __repr__(self):
        return f"NCPoly({self})"


def _as_poly(x):
    if isinstance(x, NCPoly):
        return x
    try:
        return NCPoly.constant(as_scalar(x))
    except TypeError:
        return None


class MatNCPoly:
    """Square ``p x p`` matrix of :class:`NCPoly` entries."""

    __slots__ = ("p", "entries")

    def __init__(self, entries):
        rows = [[_as_poly(x) for x in r] for r in entries]
        p = len(rows)
        if p == 0 or any(len(r) != p for r in rows):
            raise DimensionMismatch("matrix must be square and nonempty")
        if any(x is None for r in rows for x in r):
            raise TypeError("entries must be NCPoly or exact scalars")
        self.p = p
        self.entries = rows

    @classmethod
    def scalar(cls, f):
        return cls([[f]])

    @classmethod
    def identity(cls, p):
        return cls([[1 if i == j else 0 for j in range(p)] for i in range(p)])

    def __getitem__(self, ij):
        return self.entries[ij[0]][ij[1]]

    def degree(self):
        return max(x.degree() for r in self.entries for x in r)

    def num_vars(self):
        return max(x.num_vars() for r in self.entries for x in r)

    def is_affine(self):
        return all(x.is_affine() for r in self.entries for x in r)

    def _check(self, other):
        if self.p != other.p:
            raise DimensionMismatch(f"dimension mismatch: {self.p} vs {other.p}")

    def __add__(self, other):
        if not isinstance(other, MatNCPoly):
            return NotImplemented
        self._check(other)
        return MatNCPoly([[a + b for a, b in zip(r1, r2)]
                          for r1, r2 in zip(self.entries, other.entries)])

    def __neg__(self):
        return MatNCPoly([[-x for x in r] for r in self.entries])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, MatNCPoly):
            self._check(other)
            p = self.p
            return MatNCPoly([[sum((self.entries[i][k] * other.entries[k][j] for k in range(p)),
                                   NCPoly())
                               for j in range(p)] for i in range(p)])
        return self.scale(other)

    def scale(self, c):
        return MatNCPoly([[x.scale(c) for x in r] for r in self.entries])

    def __pow__(self, k):
        out = MatNCPoly.identity(self.p)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, MatNCPoly):
            return NotImplemented
        return self.p == other.p and self.entries == other.entries

    def __hash__(self):
        return hash(tuple(tuple(r) for r in self.entries))

    def __str__(self):
        if self.p == 1:
            return str(self.entries[0][0])
        return "[" + ", ".join("[" + ", ".join(str(x) for x in r) + "]" for r in self.entries) + "]"

    def __repr__(self):
        return f"MatNCPoly({self})"


# ------
# Parser
# ------

_TOKEN = re.compile(r"\s*(?:(x)(\d+)|(\d+)(?:\s*/\s*(\d+))?|(.))")


def _tokenize(text):
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if m is None:
            break
        start = m.start(0) + (len(m.group(0)) - len(m.group(0).lstrip()))
        if m.group(1):
            toks.append(("VAR", int(m.group(2)), start))
        elif m.group(3) is not None:
            if m.group(4) is not None:
                den = int(m.group(4))
                if den == 0:
                    raise ParseError("zero denominator", start)
                toks.append(("NUM", Fraction(int(m.group(3)), den), start))
            else:
                toks.append(("NUM", Fraction(int(m.group(3))), start))
        else:
            ch = m.group(5)
            if ch is None:
                break
            if ch not in "+-*^()[],":
                raise ParseError(f"unexpected character {ch!r}", start,
                                 ("x<int>", "number", "+", "-", "*", "^", "(", ")", "[", "]", ","))
            toks.append((ch, ch, start))
        pos = m.end(0)
    toks.append(("EOF", None, n))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def take(self, kind, expected=None):
        t = self.toks[self.i]
        if t[0] != kind:
            raise ParseError(f"unexpected {self._describe(t)}", t[2], expected or (kind,))
        self.i += 1
        return t

    @staticmethod
    def _describe(t):
        if t[0] == "EOF":
            return "end of input"
        if t[0] == "VAR":
            return f"x{t[1]}"
        if t[0] == "NUM":
            return f"number {t[1]}"
        return repr(t[1])

    def expr(self):
        if self.peek()[0] == "[":
            m = self.matrix()
        else:
            m = MatNCPoly.scalar(self.poly())
        self.take("EOF", ("end of input",))
        return m

    def matrix(self):
        start = self.take("[")[2]
        rows = [self.row()]
        while self.peek()[0] == ",":
            self.i += 1
            rows.append(self.row())
        self.take("]", (",", "]"))
        p = len(rows)
        for r in rows:
            if len(r) != p:
                raise ParseError(f"matrix must be square: {p} rows but a row of length {len(r)}",
                                 start)
        return MatNCPoly(rows)

    def row(self):
        self.take("[", ("[",))
        items = [self.poly()]
        while self.peek()[0] == ",":
            self.i += 1
            items.append(self.poly())
        self.take("]", (",", "]", "+", "-", "*"))
        return items

    def poly(self):
        f = self.term()
        while self.peek()[0] in "+-" and self.peek()[0] != "EOF":
            op = self.take(self.peek()[0])[0]
            g = self.term()
            f = f + g if op == "+" else f - g
        return f

    def term(self):
        f = self.factor()
        while self.peek()[0] == "*":
            self.i += 1
            f = f * self.factor()
        return f

    def factor(self):
        b = self.base()
        if self.peek()[0] == "^":
            self.i += 1
            t = self.take("NUM", ("integer exponent",))
            if t[1].denominator != 1:
                raise ParseError("exponent must be a nonnegative integer", t[2], ("integer",))
            b = b ** int(t[1])
        return b

    def base(self):
        t = self.peek()
        if t[0] == "VAR":
            self.i += 1
            if t[1] < 1:
                raise ParseError("generator indices start at 1", t[2], ("x1", "x2", "..."))
            return NCPoly.generator(t[1])
        if t[0] == "NUM":
            self.i += 1
            return NCPoly.constant(t[1])
        if t[0] == "(":
            self.i += 1
            f = self.poly()
            self.take(")", (")", "+", "-", "*"))
            return f
        if t[0] == "-":
            self.i += 1
            return -self.factor()
        raise ParseError(f"unexpected {self._describe(t)}", t[2],
                         ("x<int>", "number", "(", "-"))


def parse(text):
    """
    Parse an expression into a :class:`MatNCPoly`.

    A plain polynomial such as ``"x1*x2 - x2*x1"`` becomes a 1x1 matrix;
    ``"[[0, x1], [x2, 0]]"`` is a 2x2 matrix.  Rationals are written
    ``num/den``; ``^`` takes a nonnegative integer exponent.
    """
    return _Parser(text).expr()


# ----------
# Evaluation
# ----------

def _matmul(A, B):
    n, k, m = len(A), len(B), len(B[0]) if B else 0
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        Ai = A[i]
        oi = out[i]
        for t in range(k):
            a = Ai[t]
            if a:
                Bt = B[t]
                for j in range(m):
                    if Bt[j]:
                        oi[j] += a * Bt[j]
    return out


def evaluate(f, ops):
    """
    Substitute square rational matrices for the generators.

    Returns the block matrix ``f(ops)`` of size ``p*m`` (block ``(i, j)`` is
    entry ``f[i, j]`` evaluated), as a list of lists of Fractions.
    """
    if isinstance(f, NCPoly):
        f = MatNCPoly.scalar(f)
    if not ops:
        if f.num_vars() > 0:
            raise DimensionMismatch("expression uses generators but no operators were given")
        m = 1
    else:
        m = len(ops[0])
    for M in ops:
        if len(M) != m or any(len(r) != m for r in M):
            raise DimensionMismatch("all operators must be square of the same size")
    if f.num_vars() > len(ops):
        raise DimensionMismatch(f"expression uses x{f.num_vars()} but only {len(ops)} operators")
    ident = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    cache = {(): ident}

    def word_matrix(w):
        if w not in cache:
            cache[w] = _matmul(word_matrix(w[:-1]), ops[w[-1] - 1])
        return cache[w]

    p = f.p
    out = [[Fraction(0)] * (p * m) for _ in range(p * m)]
    for bi in range(p):
        for bj in range(p):
            for w, c in f.entries[bi][bj].terms.items():
                W = word_matrix(w)
                for r in range(m):
                    Wr = W[r]
                    orow = out[bi * m + r]
                    for s in range(m):
                        if Wr[s]:
                            orow[bj * m + s] += c * Wr[s]
    return out


def apply_to_vector(f, apply_op, vecs):
    """
    Apply the block operator ``f(ops)`` to a block vector without forming it.

    ``apply_op(theta, v)`` must return the image of the sparse vector ``v``
    (a dict index -> scalar) under generator ``theta``; ``vecs`` is a list
    of ``p`` sparse vectors.  Words are applied right to left.
    """
    p = f.p
    out = [dict() for _ in range(p)]
    for j in range(p):
        v = vecs[j]
        if not v:
            continue
        images = {(): v}

        def image(w):
            # w acts as x_{w[0]} ... x_{w[-1]}, so the last letter acts first
            if w not in images:
                images[w] = apply_op(w[0], image(w[1:]))
            return images[w]

        for i in range(p):
            for w, c in f.entries[i][j].terms.items():
                if c.denominator == 1:
                    c = c.numerator  # integer arithmetic is much faster
                for idx, val in image(w).items():
                    s = out[i].get(idx, 0) + c * val
                    if s:
                        out[i][idx] = s
                    else:
                        out[i].pop(idx, None)
    return out
