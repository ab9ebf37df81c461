"""
Exact truncated Laurent series in ``1/z`` and square matrices of them.

A :class:`TruncLaurent` stores the coefficients of ``z**e`` for every
exponent ``e >= prec`` exactly; everything below ``prec`` is unknown.  A
series with ``prec == EXACT`` is a Laurent polynomial known completely.
Arithmetic never reports a coefficient it cannot justify: every operation
computes the tightest floor that follows from the floors of its inputs.

Coefficients are :class:`fractions.Fraction` (or :class:`GaussianRational`
when a complex rational is needed).
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

from .errors import (
    CompositionDomain,
    DivisionByZero,
    IndeterminateValuation,
    SingularMatrix,
)

__all__ = [
    "EXACT",
    "NEG_INFINITY",
    "GaussianRational",
    "as_scalar",
    "format_scalar",
    "parse_scalar",
    "TruncLaurent",
    "MatSeries",
    "RationalMatrix",
    "Z",
    "ONE",
    "ZERO",
    "val",
    "add",
    "mul",
    "scalar_mul",
    "inv",
    "compose",
    "comp_inverse",
    "mat_mul",
    "mat_inv",
    "charpoly_e",
    "series_to_json",
    "series_from_json",
]

NEG_INFINITY = -math.inf
EXACT = -math.inf


# =======
# Scalars
# =======

class GaussianRational:
    """Element ``re + i*im`` of Q(i) with exact rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _lift(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GaussianRational(other, 0)
        return None

    def _collapse(self):
        return self.re if self.im == 0 else self

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)._collapse()

    __radd__ = __add__

    def __sub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)._collapse()

    def __rsub__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re * o.re - self.im * o.im,
                                self.re * o.im + self.im * o.re)._collapse()

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise DivisionByZero("division by zero in Q(i)")
        return GaussianRational((self.re * o.re + self.im * o.im) / d,
                                (self.im * o.re - self.re * o.im) / d)._collapse()

    def __rtruediv__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return o / self

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def __eq__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        return hash(self.re) if self.im == 0 else hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        return f"({format_scalar(self.re)}+{format_scalar(self.im)}i)"


def as_scalar(x):
    """Coerce ``x`` to an exact scalar; floats are refused."""
    if isinstance(x, (Fraction, GaussianRational)):
        return x
    if isinstance(x, bool):
        return Fraction(int(x))
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, complex):
        raise TypeError("complex floats are not exact; use GaussianRational")
    if isinstance(x, float):
        raise TypeError("floats are not exact; pass a Fraction or 'num/den'")
    raise TypeError(f"cannot interpret {x!r} as an exact scalar")


def parse_scalar(text):
    """Parse ``"num/den"`` (or an integer literal) into a Fraction."""
    text = text.strip()
    if "." in text or "e" in text.lower():
        raise ValueError(f"decimal literal {text!r} not allowed; use num/den")
    return Fraction(text)


def format_scalar(c):
    """Serialize a scalar as a ``"num/den"`` string."""
    if isinstance(c, GaussianRational):
        return [format_scalar(c.re), format_scalar(c.im)]
    c = Fraction(c)
    return f"{c.numerator}/{c.denominator}"


# ======================
# Truncated Laurent series
# ======================

def _strip(c):
    """Drop leading and trailing zeros; return (offset, list)."""
    lo = 0
    n = len(c)
    while lo < n and not c[lo]:
        lo += 1
    hi = n
    while hi > lo and not c[hi - 1]:
        hi -= 1
    return lo, c[lo:hi]


class TruncLaurent:
    """
    Truncated formal Laurent series ``sum_e c_e z**e`` with a precision floor.

    Parameters
    ----------
    coeffs : mapping, optional
        Exponent to coefficient.  Zero coefficients are dropped.
    prec : int or EXACT
        All coefficients at exponents ``>= prec`` are known.  Entries of
        ``coeffs`` below ``prec`` are discarded.

    Notes
    -----
    Internally the coefficients are a dense list ``_c`` with ``_c[k]`` the
    coefficient of ``z**(top - k)``; ``top`` is ``None`` when no nonzero
    coefficient is known.
    """

    __slots__ = ("top", "_c", "prec")

    def __init__(self, coeffs=None, prec=EXACT):
        if prec != EXACT:
            prec = int(prec)
        self.prec = prec
        items = {}
        if coeffs:
            for e, c in dict(coeffs).items():
                e = int(e)
                if e < prec:
                    continue
                c = as_scalar(c)
                if c:
                    items[e] = c
        if not items:
            self.top = None
            self._c = []
            return
        top = max(items)
        low = min(items)
        self.top = top
        self._c = [items.get(top - k, 0) for k in range(top - low + 1)]

    @classmethod
    def _raw(cls, top, c, prec):
        """Build from a dense top-aligned list without copying scalars."""
        self = object.__new__(cls)
        self.prec = prec
        if top is None or not c:
            self.top = None
            self._c = []
            return self
        if prec != EXACT:
            keep = top - prec + 1
            if keep <= 0:
                self.top = None
                self._c = []
                return self
            if len(c) > keep:
                c = c[:keep]
        lo, c = _strip(c)
        if not c:
            self.top = None
            self._c = []
        else:
            self.top = top - lo
            self._c = c
        return self

    @classmethod
    def monomial(cls, c, e=0):
        c = as_scalar(c)
        if not c:
            return cls()
        return cls._raw(e, [c], EXACT)

    @classmethod
    def unknown(cls, prec):
        """The series ``O(z**(prec - 1))``: known to vanish at every exponent ``>= prec``."""
        return cls._raw(None, [], int(prec))

    @classmethod
    def from_coefficients(cls, top, coeffs, prec=EXACT):
        """Series ``sum_k coeffs[k] z**(top - k)``."""
        return cls._raw(top, [as_scalar(c) for c in coeffs], prec)

    # -- inspection ---------------------------------------------------------

    @property
    def coeffs(self):
        t = self.top
        return {t - k: c for k, c in enumerate(self._c) if c}

    @property
    def exact_zero(self):
        return self.top is None and self.prec == EXACT

    @property
    def is_exact(self):
        return self.prec == EXACT

    def is_zero_to_precision(self):
        """True when no nonzero coefficient is known."""
        return self.top is None

    def coeff(self, e):
        """Coefficient of ``z**e``; raises ``ValueError`` below the floor."""
        if e < self.prec:
            raise ValueError(f"coefficient of z^{e} is below the precision floor {self.prec}")
        if self.top is None or e > self.top:
            return Fraction(0)
        k = self.top - e
        c = self._c[k] if k < len(self._c) else 0
        return c if c else Fraction(0)

    def __getitem__(self, e):
        return self.coeff(e)

    @property
    def lowest(self):
        """Lowest exponent carrying a stored nonzero coefficient."""
        if self.top is None:
            return None
        return self.top - len(self._c) + 1

    def val(self):
        """Valuation: largest exponent with nonzero coefficient."""
        if self.top is not None:
            return self.top
        if self.prec == EXACT:
            return NEG_INFINITY
        raise IndeterminateValuation(
            f"no nonzero coefficient known above the floor z^{self.prec}")

    def val_bound(self):
        """An upper bound for the valuation (equal to it when determinate)."""
        if self.top is not None:
            return self.top
        if self.prec == EXACT:
            return NEG_INFINITY
        return self.prec - 1

    def dense(self, floor):
        """Coefficient list from ``top`` down to ``floor`` (zeros filled in)."""
        if self.top is None:
            return []
        n = self.top - floor + 1
        c = self._c
        if n <= len(c):
            return c[:max(n, 0)]
        return c + [Fraction(0)] * (n - len(c))

    # -- arithmetic ---------------------------------------------------------

    def truncate(self, prec):
        """Raise the floor to ``prec`` (never lowers it)."""
        if prec == EXACT or prec <= self.prec:
            return self
        return TruncLaurent._raw(self.top, self._c, int(prec))

    def shift(self, k):
        """Multiply by ``z**k``."""
        p = self.prec if self.prec == EXACT else self.prec + k
        return TruncLaurent._raw(None if self.top is None else self.top + k, self._c, p)

    def __neg__(self):
        return TruncLaurent._raw(self.top, [-c for c in self._c], self.prec)

    def __pos__(self):
        return self

    def __add__(self, other):
        if not isinstance(other, TruncLaurent):
            try:
                other = TruncLaurent.monomial(other)
            except TypeError:
                return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        if not isinstance(other, TruncLaurent):
            try:
                other = TruncLaurent.monomial(other)
            except TypeError:
                return NotImplemented
        return add(self, -other)

    def __rsub__(self, other):
        return (-self).__add__(other)

    def __mul__(self, other):
        if isinstance(other, TruncLaurent):
            return mul(self, other)
        if isinstance(other, MatSeries):
            return NotImplemented
        try:
            return scalar_mul(other, self)
        except TypeError:
            return NotImplemented

    def __rmul__(self, other):
        try:
            return scalar_mul(other, self)
        except TypeError:
            return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, TruncLaurent):
            return mul(self, other.inv(self._division_floor(other)))
        other = as_scalar(other)
        if not other:
            raise DivisionByZero("division of a series by scalar zero")
        return scalar_mul(1 / other, self)

    def _division_floor(self, other):
        # floor for inv(other) so that self/other is limited only by inputs
        if self.prec == EXACT and other.prec == EXACT:
            return None
        return None if other.prec != EXACT else self.prec - 2 * other.val_bound() - 2

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            return NotImplemented
        result = ONE
        base = self
        while k:
            if k & 1:
                result = mul(result, base)
            k >>= 1
            if k:
                base = mul(base, base)
        return result

    def inv(self, prec=None):
        return inv(self, prec)

    # -- comparison / display -------------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, TruncLaurent):
            try:
                other = TruncLaurent.monomial(other)
            except TypeError:
                return NotImplemented
        return self.prec == other.prec and self.coeffs == other.coeffs

    def __hash__(self):
        return hash((self.prec, tuple(sorted(self.coeffs.items()))))

    def agrees_with(self, other, floor=None):
        """Coefficients agree at every exponent known in both (and ``>= floor``)."""
        lo = max(self.prec, other.prec)
        if floor is not None:
            lo = max(lo, floor)
        hi = max(self.val_bound(), other.val_bound())
        if hi == NEG_INFINITY:
            return True
        if lo == EXACT:
            return self.coeffs == other.coeffs
        return all(self.coeff(e) == other.coeff(e) for e in range(int(hi), int(lo) - 1, -1))

    def __repr__(self):
        terms = []
        for e, c in sorted(self.coeffs.items(), reverse=True):
            s = format_scalar(c) if not isinstance(c, GaussianRational) else str(c)
            s = s[:-2] if isinstance(s, str) and s.endswith("/1") else s
            terms.append(f"{s}" if e == 0 else f"{s}*z^{e}")
        body = " + ".join(terms) if terms else "0"
        if self.prec != EXACT:
            body += f" + O(z^{self.prec - 1})"
        return f"TruncLaurent({body})"


ZERO = TruncLaurent()
ONE = TruncLaurent.monomial(1, 0)
Z = TruncLaurent.monomial(1, 1)


def _coerce(f):
    if isinstance(f, TruncLaurent):
        return f
    return TruncLaurent.monomial(f)


def val(f):
    """Valuation of ``f`` (``NEG_INFINITY`` for the exact zero series)."""
    return _coerce(f).val()


def add(f, g):
    """Sum with floor ``max(f.prec, g.prec)``."""
    f = _coerce(f)
    g = _coerce(g)
    prec = max(f.prec, g.prec)
    if f.top is None:
        return g.truncate(prec)
    if g.top is None:
        return f.truncate(prec)
    top = max(f.top, g.top)
    if prec == EXACT:
        low = min(f.lowest, g.lowest)
    else:
        low = prec
    n = top - low + 1
    if n <= 0:
        return TruncLaurent._raw(None, [], prec)
    out = [0] * n
    for src in (f, g):
        off = top - src.top
        c = src._c
        m = min(len(c), n - off)
        for k in range(max(m, 0)):
            out[off + k] += c[k]
    return TruncLaurent._raw(top, out, prec)


def _scaled(a):
    """``(integers, denominator)`` with ``a[i] == integers[i] / denominator``, or None."""
    den = 1
    for x in a:
        if type(x) is Fraction:
            d = x.denominator
            if d != 1 and den % d:
                den = den * d // math.gcd(den, d)
        elif type(x) is not int:
            return None
    return [x if type(x) is int else x.numerator * (den // x.denominator) for x in a], den


def _conv(a, b, n):
    """First ``n`` coefficients of the product of two top-aligned lists."""
    sa = _scaled(a)
    sb = _scaled(b) if sa is not None else None
    if sb is not None:
        # integer convolution with a single normalization per output
        (ia, da), (ib, db) = sa, sb
        den = da * db
        out = [0] * n
        lb = len(ib)
        for i in range(min(len(ia), n)):
            ai = ia[i]
            if not ai:
                continue
            lim = min(lb, n - i)
            for j in range(lim):
                bj = ib[j]
                if bj:
                    out[i + j] += ai * bj
        if den == 1:
            return [Fraction(x) if x else 0 for x in out]
        return [Fraction(x, den) if x else 0 for x in out]
    out = [0] * n
    lb = len(b)
    for i in range(min(len(a), n)):
        ai = a[i]
        if not ai:
            continue
        lim = min(lb, n - i)
        for j in range(lim):
            bj = b[j]
            if bj:
                out[i + j] += ai * bj
    return out


def mul(f, g):
    """
    Product.  The floor is ``max(val f + prec g, val g + prec f)``, using
    valuation upper bounds when a factor has no known nonzero coefficient.
    """
    f = _coerce(f)
    g = _coerce(g)
    if f.exact_zero or g.exact_zero:
        return ZERO
    prec = max(f.val_bound() + g.prec, g.val_bound() + f.prec)
    if prec != EXACT:
        prec = int(prec)
    if f.top is None or g.top is None:
        return TruncLaurent._raw(None, [], prec)
    top = f.top + g.top
    if prec == EXACT:
        n = len(f._c) + len(g._c) - 1
    else:
        n = top - prec + 1
        if n <= 0:
            return TruncLaurent._raw(None, [], prec)
    return TruncLaurent._raw(top, _conv(f._c, g._c, n), prec)


def scalar_mul(c, f):
    """Multiply a series by an exact scalar (scalar zero gives exact zero)."""
    c = as_scalar(c)
    f = _coerce(f)
    if not c:
        return ZERO
    return TruncLaurent._raw(f.top, [c * x for x in f._c], f.prec)


def inv(f, prec=None):
    """
    Multiplicative inverse.

    For inexact ``f`` with valuation ``v`` the result floor is
    ``f.prec - 2 v``.  For a Laurent polynomial that is not a monomial the
    inverse is an infinite series and a target floor ``prec`` is required.
    """
    f = _coerce(f)
    if f.exact_zero:
        raise DivisionByZero("inverse of the zero series")
    v = f.val()
    c = f._c
    floor = EXACT if f.prec == EXACT else f.prec - 2 * v
    if prec is not None:
        floor = max(floor, int(prec))
    if floor == EXACT:
        if len(c) == 1:
            return TruncLaurent._raw(-v, [1 / c[0]], EXACT)
        raise ValueError("inverse of a non-monomial Laurent polynomial needs a precision floor")
    n = -v - floor + 1
    if n <= 0:
        return TruncLaurent._raw(None, [], floor)
    inv0 = 1 / c[0]
    h = [inv0] + [0] * (n - 1)
    lc = len(c)
    for k in range(1, n):
        s = 0
        for i in range(1, min(k, lc - 1) + 1):
            ci = c[i]
            if ci:
                s += ci * h[k - i]
        h[k] = -s * inv0
    return TruncLaurent._raw(-v, h, floor)


def compose(f, g, prec=None):
    """
    Formal substitution ``f(g(z))`` for ``g`` with valuation exactly 1.

    Raises
    ------
    CompositionDomain
        If ``val g != 1`` (only ``g`` in ``c z + C[[1/z]]`` is supported).
    """
    f = _coerce(f)
    g = _coerce(g)
    try:
        vg = g.val()
    except IndeterminateValuation:
        raise CompositionDomain("composition needs a determinate val g = 1") from None
    if vg != 1:
        raise CompositionDomain(f"composition needs val g = 1, got {vg}")
    if f.exact_zero:
        return ZERO
    floor = f.prec
    exps = sorted(f.coeffs)
    if g.prec != EXACT:
        for e in exps:
            if e != 0:
                floor = max(floor, e + g.prec - 1)
    if prec is not None:
        floor = max(floor, int(prec))
    if floor == EXACT and any(e < 0 for e in exps) and len(g._c) > 1:
        raise ValueError("composition with negative powers of a non-monomial needs a floor")
    fc = f.coeffs
    result = ZERO if floor == EXACT else TruncLaurent._raw(None, [], floor)
    pos = [e for e in exps if e > 0]
    neg = [e for e in exps if e < 0]
    if 0 in fc:
        result = add(result, TruncLaurent.monomial(fc[0]).truncate(floor))
    if pos:
        power = ONE
        for k in range(1, max(pos) + 1):
            power = mul(power, g).truncate(floor)
            if k in fc:
                result = add(result, scalar_mul(fc[k], power))
    if neg:
        gi = inv(g, None if floor == EXACT else floor - 1)
        power = ONE
        for k in range(1, -min(neg) + 1):
            power = mul(power, gi).truncate(floor)
            if -k in fc:
                result = add(result, scalar_mul(fc[-k], power))
    return result.truncate(floor)


def comp_inverse(f, prec=None):
    """
    Compositional inverse in the group ``z + C[[1/z]]``.

    Solves ``g = z - phi(g)`` with ``phi = f - z`` by fixed-point iteration;
    each step fixes at least one more coefficient, so the loop ends after
    at most ``2 - floor`` passes.
    """
    f = _coerce(f)
    if f.top != 1 or f._c[0] != 1:
        raise CompositionDomain("comp_inverse needs f in z + C[[1/z]]")
    phi = add(f, -Z)
    if phi.top is not None and phi.top > 0:
        raise CompositionDomain("comp_inverse needs f in z + C[[1/z]]")
    floor = f.prec
    if prec is not None:
        floor = max(floor, int(prec))
    if floor == EXACT:
        if phi.top is None or (phi.top == 0 and len(phi._c) == 1):
            return add(Z, -phi)
        raise ValueError("comp_inverse of an infinite-order series needs a precision floor")
    g = Z.truncate(floor)
    for _ in range(3 - floor):
        nxt = add(Z, -compose(phi, g, floor)).truncate(floor)
        if nxt == g:
            return g
        g = nxt
    return g


# ======================
# Matrices of series
# ======================

class MatSeries:
    """
    Square matrix of :class:`TruncLaurent` entries with a common floor.

    Exact-zero entries are kept as the shared ``ZERO`` object so products
    skip them cheaply.
    """

    __slots__ = ("n", "entries", "prec")

    def __init__(self, entries, prec=None):
        rows = [list(r) for r in entries]
        n = len(rows)
        if any(len(r) != n for r in rows):
            raise ValueError("MatSeries must be square")
        rows = [[_coerce(x) for x in r] for r in rows]
        common = max((x.prec for r in rows for x in r), default=EXACT)
        if prec is not None:
            common = max(common, prec)
        if common != EXACT:
            rows = [[x if x.exact_zero else x.truncate(common) for x in r] for r in rows]
        self.n = n
        self.entries = rows
        self.prec = common

    @classmethod
    def identity(cls, n):
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, n):
        return cls([[ZERO] * n for _ in range(n)])

    @classmethod
    def from_scalars(cls, rows, power=0):
        """Constant matrix (times ``z**power``) from exact scalars."""
        return cls([[TruncLaurent.monomial(c, power) for c in r] for r in rows])

    @classmethod
    def pencil(cls, const, lin):
        """The matrix ``const + lin * z`` with exact scalar entries."""
        n = len(const)
        return cls([[add(TruncLaurent.monomial(const[i][j]), TruncLaurent.monomial(lin[i][j], 1))
                     for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def rows(self):
        return self.entries

    def truncate(self, prec):
        return MatSeries(self.entries, prec)

    def is_exact(self):
        return self.prec == EXACT

    def val(self):
        """Max entry valuation (``NEG_INFINITY`` for the zero matrix)."""
        best = NEG_INFINITY
        bound = NEG_INFINITY
        for r in self.entries:
            for x in r:
                if x.top is not None:
                    best = max(best, x.top)
                elif not x.exact_zero:
                    bound = max(bound, x.prec - 1)
        if bound > best or (bound == best and bound != NEG_INFINITY):
            raise IndeterminateValuation("matrix valuation hidden below the floor")
        return best

    def val_bound(self):
        return max((x.val_bound() for r in self.entries for x in r), default=NEG_INFINITY)

    def is_zero_to_precision(self):
        return all(x.top is None for r in self.entries for x in r)

    def trace(self, k=None):
        k = self.n if k is None else k
        s = ZERO
        for i in range(k):
            s = add(s, self.entries[i][i])
        return s

    def block(self, rows, cols):
        return [[self.entries[i][j] for j in cols] for i in rows]

    def __add__(self, other):
        if not isinstance(other, MatSeries):
            return NotImplemented
        _check_dims(self, other)
        return MatSeries([[add(a, b) for a, b in zip(r1, r2)]
                          for r1, r2 in zip(self.entries, other.entries)])

    def __sub__(self, other):
        if not isinstance(other, MatSeries):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return MatSeries([[-x for x in r] for r in self.entries])

    def __mul__(self, other):
        if isinstance(other, MatSeries):
            return mat_mul(self, other)
        if isinstance(other, TruncLaurent):
            return MatSeries([[mul(x, other) for x in r] for r in self.entries])
        c = as_scalar(other)
        return MatSeries([[scalar_mul(c, x) for x in r] for r in self.entries])

    __matmul__ = __mul__

    def __rmul__(self, other):
        if isinstance(other, TruncLaurent):
            return MatSeries([[mul(other, x) for x in r] for r in self.entries])
        c = as_scalar(other)
        return MatSeries([[scalar_mul(c, x) for x in r] for r in self.entries])

    def __pow__(self, k):
        result = MatSeries.identity(self.n)
        base = self
        while k:
            if k & 1:
                result = mat_mul(result, base)
            k >>= 1
            if k:
                base = mat_mul(base, base)
        return result

    def __eq__(self, other):
        if not isinstance(other, MatSeries):
            return NotImplemented
        return self.n == other.n and all(
            a == b for r1, r2 in zip(self.entries, other.entries) for a, b in zip(r1, r2))

    def agrees_with(self, other, floor=None):
        return all(a.agrees_with(b, floor) for r1, r2 in zip(self.entries, other.entries)
                   for a, b in zip(r1, r2))

    def __repr__(self):
        return f"MatSeries(n={self.n}, prec={self.prec})"


def _check_dims(a, b):
    if a.n != b.n:
        raise ValueError(f"dimension mismatch: {a.n} vs {b.n}")


def _dot(pairs):
    """``sum f * g`` over the pairs, accumulated over a common denominator."""
    prec = EXACT
    top = None
    parts = []
    for f, g in pairs:
        p = max(f.val_bound() + g.prec, g.val_bound() + f.prec)
        if p > prec:
            prec = p
        if f.top is not None and g.top is not None:
            parts.append((f, g))
    if prec != EXACT:
        prec = int(prec)
    if not parts:
        return TruncLaurent._raw(None, [], prec)
    top = max(f.top + g.top for f, g in parts)
    if prec == EXACT:
        low = min(f.top + g.top - len(f._c) - len(g._c) + 2 for f, g in parts)
    else:
        low = prec
    n = top - low + 1
    if n <= 0:
        return TruncLaurent._raw(None, [], prec)
    scaled = []
    den = 1
    for f, g in parts:
        sa, sb = _scaled(f._c), _scaled(g._c)
        if sa is None or sb is None:
            out = ZERO
            for f2, g2 in parts:
                out = add(out, mul(f2, g2))
            return out.truncate(prec)
        d = sa[1] * sb[1]
        scaled.append((top - f.top - g.top, sa[0], sb[0], d))
        den = den * d // math.gcd(den, d)
    out = [0] * n
    for off, ia, ib, d in scaled:
        mult = den // d
        lb = len(ib)
        for i in range(min(len(ia), n - off)):
            ai = ia[i]
            if not ai:
                continue
            ai *= mult
            base = off + i
            for j in range(min(lb, n - base)):
                bj = ib[j]
                if bj:
                    out[base + j] += ai * bj
    return TruncLaurent._raw(top, [Fraction(x, den) if x else 0 for x in out], prec)


def _matmul_rows(A, B, nrows, ncols, inner):
    out = []
    for i in range(nrows):
        Ai = A[i]
        row = []
        nz = [(k, Ai[k]) for k in range(inner) if not Ai[k].exact_zero]
        for j in range(ncols):
            pairs = [(a, B[k][j]) for k, a in nz if not B[k][j].exact_zero]
            if not pairs:
                row.append(ZERO)
            elif len(pairs) == 1:
                row.append(mul(*pairs[0]))
            else:
                row.append(_dot(pairs))
        out.append(row)
    return out


def mat_mul(A, B):
    """Matrix product; exact-zero entries are skipped."""
    _check_dims(A, B)
    return MatSeries(_matmul_rows(A.entries, B.entries, A.n, B.n, A.n))


# ---- exact inversion over Q(z) -------------------------------------------

def _poly_eval(coeffs, x):
    """Horner on ascending coefficient list."""
    s = 0
    for c in reversed(coeffs):
        s = s * x + c
    return s


def _interpolate(xs, ys):
    """Ascending coefficients of the interpolating polynomial (Newton form)."""
    n = len(xs)
    dd = list(ys)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            dd[i] = (dd[i] - dd[i - 1]) / (xs[i] - xs[i - j])
    poly = [dd[n - 1]]
    for k in range(n - 2, -1, -1):
        # poly = poly * (x - xs[k]) + dd[k]
        new = [0] * (len(poly) + 1)
        for i, c in enumerate(poly):
            new[i + 1] += c
            new[i] -= c * xs[k]
        new[0] += dd[k]
        poly = new
    while len(poly) > 1 and not poly[-1]:
        poly.pop()
    return poly


def _scalar_inverse_and_det(M):
    """Gauss-Jordan over the scalars; returns (det, inverse or None)."""
    n = len(M)
    a = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M)]
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return Fraction(0), None
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det *= p
        ip = 1 / p
        rowc = [x * ip for x in a[col]]
        a[col] = rowc
        for r in range(n):
            if r != col:
                f = a[r][col]
                if f:
                    ar = a[r]
                    a[r] = [x - f * y for x, y in zip(ar, rowc)]
    return det, [r[n:] for r in a]


class RationalMatrix:
    """
    Exact inverse of a Laurent-polynomial matrix as ``z**shift * adj / det``
    with ``adj`` and ``det`` polynomials in ``z`` (ascending coefficients).
    """

    def __init__(self, adj, det, shift):
        self.adj = adj
        self.det = det
        self.shift = shift
        self.n = len(adj)

    @property
    def det_degree(self):
        return len(self.det) - 1

    def series(self, prec):
        """
        Laurent expansion of every entry, exact at exponents ``>= prec``.

        A monomial determinant makes every entry a Laurent polynomial; those
        are returned untruncated and flagged exact.
        """
        d = self.det
        dtop = len(d) - 1
        monomial = sum(1 for c in d if c) == 1
        det_series = TruncLaurent.from_coefficients(dtop, list(reversed(d)))
        entries = []
        for row in self.adj:
            out = []
            for p in row:
                if not any(p):
                    out.append(ZERO)
                    continue
                num = TruncLaurent.from_coefficients(len(p) - 1, list(reversed(p)))
                vnum = num.val()
                # floor for 1/det chosen so the product is exact down to prec
                invd = inv(det_series) if monomial else inv(det_series, prec - self.shift - vnum)
                entry = mul(num, invd).shift(self.shift)
                out.append(entry if monomial else entry.truncate(prec))
            entries.append(out)
        return MatSeries(entries, None if monomial else prec)


def _exact_rational_inverse(A):
    n = A.n
    lows = [x.lowest for r in A.entries for x in r if x.top is not None]
    if not lows:
        raise SingularMatrix("zero matrix is not invertible")
    s = -min(min(lows), 0)
    # rows of polynomials (ascending) for z**s * A
    polys = []
    row_deg = []
    for r in A.entries:
        prow = []
        rd = 0
        for x in r:
            if x.top is None:
                prow.append([])
                continue
            p = [Fraction(0)] * (x.top + s + 1)
            for e, c in x.coeffs.items():
                p[e + s] = c
            prow.append(p)
            rd = max(rd, len(p) - 1)
        polys.append(prow)
        row_deg.append(rd)
    bound = sum(row_deg)
    xs_det, ys_det = [], []
    xs_adj, ys_adj = [], []
    k = 0
    while len(xs_adj) < bound + 1:
        x = Fraction((k + 1) // 2 * (1 if k % 2 else -1))
        k += 1
        M = [[_poly_eval(p, x) if p else Fraction(0) for p in prow] for prow in polys]
        det, minv = _scalar_inverse_and_det(M)
        if len(xs_det) < bound + 1:
            xs_det.append(x)
            ys_det.append(det)
            if len(xs_det) == bound + 1 and not any(ys_det):
                raise SingularMatrix("determinant vanishes identically over Q(z)")
        if minv is not None:
            xs_adj.append(x)
            ys_adj.append([[det * v for v in row] for row in minv])
    det_poly = _interpolate(xs_det, ys_det)
    adj = [[_interpolate(xs_adj, [y[i][j] for y in ys_adj]) for j in range(n)] for i in range(n)]
    # A^{-1} = (z^s A)^{-1} z^s = z^s adj/det
    return RationalMatrix(adj, det_poly, s)


def _series_inverse(A, prec):
    """Gauss-Jordan with pivots of maximal valuation (ultrametric pivoting)."""
    n = A.n
    work_floor = A.prec if prec is None else max(A.prec, prec)
    a = [list(r) + [ONE if i == j else ZERO for j in range(n)] for i, r in enumerate(A.entries)]
    a = [[x if x.exact_zero else x.truncate(work_floor) for x in r] for r in a]
    for col in range(n):
        best = None
        best_v = None
        for r in range(col, n):
            x = a[r][col]
            if x.top is None:
                continue
            if best is None or x.top > best_v:
                best, best_v = r, x.top
        if best is None:
            raise SingularMatrix(f"no determinate pivot in column {col}")
        if best != col:
            a[col], a[best] = a[best], a[col]
        p = a[col][col]
        ip = inv(p, None if p.prec != EXACT else work_floor - 2 * p.top)
        rowc = [mul(x, ip) if not x.exact_zero else ZERO for x in a[col]]
        a[col] = rowc
        for r in range(n):
            if r == col:
                continue
            f = a[r][col]
            if f.exact_zero:
                continue
            a[r] = [add(x, -mul(f, y)) if not y.exact_zero else x for x, y in zip(a[r], rowc)]
    return MatSeries([r[n:] for r in a])


def mat_inv(A, prec=None):
    """
    Inverse of a square matrix of series.

    Laurent-polynomial matrices are inverted exactly over Q(z) (adjugate and
    determinant recovered by evaluation/interpolation) and then expanded to
    floor ``prec``; other matrices use Gauss-Jordan elimination with pivots
    of maximal valuation.

    Raises
    ------
    SingularMatrix
        Determinant zero in Q(z), or no determinate pivot at the working
        precision.
    """
    if A.is_exact():
        r = _exact_rational_inverse(A)
        if prec is None:
            if sum(1 for c in r.det if c) == 1:
                return _exact_if_poly(r)
            raise ValueError("inverse is not a Laurent polynomial; pass a precision floor")
        return r.series(prec)
    return _series_inverse(A, prec)


def _exact_if_poly(r):
    # det is a monomial: entries of adj * z^shift / det are Laurent polynomials
    d = r.det
    e = len(d) - 1
    c = d[e]
    rows = []
    for row in r.adj:
        out = []
        for p in row:
            coeffs = {i - e + r.shift: v / c for i, v in enumerate(p) if v}
            out.append(TruncLaurent(coeffs))
        rows.append(out)
    return MatSeries(rows)



def charpoly_e(A):
    """
    Elementary symmetric functions ``e_i(A)`` of the eigenvalues, i.e.
    ``det(tI - A) = t^n + sum_i (-1)^i e_i(A) t^(n-i)``, by the
    Faddeev-LeVerrier recursion.
    """
    n = A.n
    coeff = [ZERO] * (n + 1)   # coeff[k] multiplies t^k
    coeff[n] = ONE
    M = MatSeries.zeros(n)
    ident = MatSeries.identity(n)
    for k in range(1, n + 1):
        M = mat_mul(A, M) + ident * coeff[n - k + 1]
        AM = mat_mul(A, M)
        coeff[n - k] = scalar_mul(Fraction(-1, k), AM.trace())
    return [scalar_mul((-1) ** i, coeff[n - i]) for i in range(1, n + 1)]


# =============
# Serialization
# =============

def series_to_json(f):
    """``{"terms": [[exponent, "num/den"], ...], "prec": int | None}``."""
    terms = [[e, format_scalar(c)] for e, c in sorted(f.coeffs.items(), reverse=True)]
    return {"terms": terms, "prec": None if f.prec == EXACT else f.prec}


def series_from_json(obj):
    prec = obj.get("prec")
    coeffs = {}
    for e, c in obj["terms"]:
        if isinstance(c, list):
            coeffs[int(e)] = GaussianRational(parse_scalar(c[0]), parse_scalar(c[1]))
        else:
            coeffs[int(e)] = parse_scalar(c)
    return TruncLaurent(coeffs, EXACT if prec is None else prec)
