"""
Algebraicity certificates for truncated series.

An annihilator of ``f`` is a nonzero ``P(x, y)`` with ``P(1/z, f) = 0``.
It is reconstructed from finitely many coefficients by an exact nullspace
computation and then checked on a guard window of coefficients that took no
part in the solve.  Newton polygons of ``P(1/z, y)`` over the valued field
of Laurent series in ``1/z`` give the valuations of the roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

from .errors import (
    IllConditioned,
    InsufficientPrecision,
    NotFound,
    NotFoundWithin,
    NotMonic,
    ZeroPolynomial,
)
from .series import (
    EXACT,
    NEG_INFINITY,
    ONE,
    ZERO,
    MatSeries,
    TruncLaurent,
    as_scalar,
    charpoly_e,
    format_scalar,
    mat_mul,
    parse_scalar,
)

__all__ = [
    "DEFAULT_GUARD",
    "BivarPoly",
    "NewtonPolygon",
    "Certificate",
    "reconstruct_annihilator",
    "find_annihilator",
    "certify",
    "verify_annihilator",
    "newton_polygon",
    "count_negative_valuation_roots",
    "check_nonsingular",
    "desingularize_shift",
    "poly_divide_monic",
    "numeric_valuation_oracle",
    "r_transform_annihilator",
    "negative_spectral_valuation",
    "power_decay",
    "poly_to_json",
    "poly_from_json",
    "polygon_to_json",
]

DEFAULT_GUARD = 10


def _lcm(a, b):
    return a * b // math.gcd(a, b)


class BivarPoly:
    """
    Polynomial ``sum c_ij x**i y**j`` with rational coefficients.

    Stored content-normalized: integer coefficients with gcd 1, and the
    term of highest ``y``-degree (lowest ``x``-degree among those) has a
    positive coefficient.  Pass ``normalize=False`` to keep the scaling.
    """

    __slots__ = ("coeffs", "degx", "degy")

    def __init__(self, coeffs, normalize=True):
        items = {}
        for (i, j), c in dict(coeffs).items():
            if i < 0 or j < 0:
                raise ValueError("exponents must be nonnegative")
            c = as_scalar(c)
            if c:
                items[(int(i), int(j))] = c
        if normalize and items:
            den = reduce(_lcm, (c.denominator for c in items.values()), 1)
            ints = [int(c * den) for c in items.values()]
            g = reduce(math.gcd, ints, 0)
            lead = items[self._lead_key(items)]
            scale = Fraction(den, g) * (1 if lead > 0 else -1)
            items = {k: c * scale for k, c in items.items()}
        self.coeffs = dict(sorted(items.items()))
        self.degx = max((i for i, _ in items), default=-1)
        self.degy = max((j for _, j in items), default=-1)

    @staticmethod
    def _lead_key(items):
        top = max(j for _, j in items)
        return (min(i for i, j in items if j == top), top)

    @classmethod
    def parse(cls, text, normalize=True):
        """Parse an expression in ``x`` and ``y`` such as ``"x*y^2 - y + x"``."""
        import sympy

        x, y = sympy.symbols("x y")
        try:
            expr = sympy.sympify(text.replace("^", "**"), locals={"x": x, "y": y})
            poly = sympy.Poly(expr, x, y)
        except (sympy.SympifyError, sympy.PolynomialError, TypeError) as exc:
            raise ValueError(f"not a polynomial in x, y: {text!r}") from exc
        if not poly.domain.is_QQ and not poly.domain.is_ZZ:
            raise ValueError(f"coefficients must be rational: {text!r}")
        return cls({m: Fraction(int(c.p), int(c.q)) for m, c in poly.terms()}, normalize)

    def is_zero(self):
        return not self.coeffs

    def y_coefficient(self, j):
        """Coefficient of ``y**j`` as a dict ``x-degree -> scalar``."""
        return {i: c for (i, jj), c in self.coeffs.items() if jj == j}

    def y_content(self):
        """Largest ``k`` with ``y**k`` dividing the polynomial."""
        return min((j for _, j in self.coeffs), default=0)

    def x_content(self):
        return min((i for i, _ in self.coeffs), default=0)

    def diff_y(self):
        return BivarPoly({(i, j - 1): j * c for (i, j), c in self.coeffs.items() if j},
                         normalize=False)

    def at(self, x, y):
        return sum((c * x ** i * y ** j for (i, j), c in self.coeffs.items()), Fraction(0))

    def evaluate(self, f):
        """``P(1/z, f)`` as a truncated series."""
        if not self.coeffs:
            return ZERO
        powers = [ONE]
        for _ in range(self.degy):
            powers.append(powers[-1] * f)
        out = ZERO
        for (i, j), c in self.coeffs.items():
            out = out + (powers[j] * c).shift(-i)
        return out

    def content_equal(self, other):
        if not isinstance(other, BivarPoly):
            other = BivarPoly.parse(other) if isinstance(other, str) else BivarPoly(other)
        return BivarPoly(self.coeffs).coeffs == BivarPoly(other.coeffs).coeffs

    def __eq__(self, other):
        if not isinstance(other, BivarPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(tuple(self.coeffs.items()))

    def __str__(self):
        if not self.coeffs:
            return "0"
        parts = []
        order = sorted(self.coeffs, key=lambda k: (-k[1], k[0]))
        for n, (i, j) in enumerate(order):
            c = self.coeffs[(i, j)]
            mono = "*".join(v if e == 1 else f"{v}^{e}" for v, e in (("x", i), ("y", j)) if e)
            mag = abs(c)
            cs = format_scalar(mag)
            cs = cs[:-2] if cs.endswith("/1") else f"({cs})"
            if mono:
                body = mono if mag == 1 else f"{cs}*{mono}"
            else:
                body = cs
            if n == 0:
                parts.append(("-" if c < 0 else "") + body)
            else:
                parts.append((" - " if c < 0 else " + ") + body)
        return "".join(parts)

    def __repr__(self):
        return f"BivarPoly({str(self)!r})"


def poly_to_json(P):
    """``[[i, j, "num/den"], ...]``."""
    return [[i, j, format_scalar(c)] for (i, j), c in P.coeffs.items()]


def poly_from_json(obj, normalize=True):
    if isinstance(obj, str):
        return BivarPoly.parse(obj, normalize)
    return BivarPoly({(int(i), int(j)): parse_scalar(c) if isinstance(c, str) else c
                      for i, j, c in obj}, normalize)


# ============================
# Reconstruction and residuals
# ============================

def _unknowns(degx, degy):
    keys = [(i, j) for i in range(degx + 1) for j in range(degy + 1)]
    return sorted(keys, key=lambda k: (k[0] + k[1], k[1], k[0]))


def _rref(rows, ncols):
    """Reduced row echelon form in place; returns the pivot columns."""
    pivots = []
    r = 0
    for col in range(ncols):
        piv = next((k for k in range(r, len(rows)) if rows[k][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [v * inv for v in rows[r]]
        for k in range(len(rows)):
            if k != r and rows[k][col]:
                m = rows[k][col]
                rows[k] = [a - m * b for a, b in zip(rows[k], rows[r])]
        pivots.append(col)
        r += 1
        if r == len(rows):
            break
    return pivots


def _top_bound(f, degy):
    v = f.val_bound()
    if v == NEG_INFINITY:
        return 0
    return int(max(0, degy * v))


@dataclass
class Certificate:
    """Outcome of checking ``P(1/z, f)`` against the known coefficients."""

    ok: bool
    window: float            # checked coefficients beyond the solve window
    checked: float           # number of residual coefficients examined
    residual: TruncLaurent
    guard: int = DEFAULT_GUARD
    first_nonzero: int | None = None

    def to_json(self):
        win = None if self.window == math.inf else int(self.window)
        return {"certified": self.ok, "window": win, "guard": self.guard,
                "first_nonzero_exponent": self.first_nonzero}


def certify(P, f, T=None, guard=DEFAULT_GUARD):
    """
    Evaluate ``P(1/z, f)`` with ``f`` cut at ``z**-T`` and count the
    coefficients known to vanish.

    The solve window is the number of coefficients of a ``(degx+1)(degy+1)``
    unknown box; ``window`` is what remains beyond it.
    """
    if T is not None:
        f = f.truncate(-T)
    if P.is_zero():
        return Certificate(False, 0, 0, ZERO, guard)
    R = P.evaluate(f)
    unknowns = (P.degx + 1) * (P.degy + 1)
    if R.prec == EXACT:
        ok = R.exact_zero
        checked = math.inf
    else:
        top = _top_bound(f, P.degy)
        checked = max(0, top - R.prec + 1)
        ok = R.is_zero_to_precision()
    first = None if R.is_zero_to_precision() else R.top
    window = checked - unknowns
    return Certificate(ok and window >= guard, window, checked, R, guard, first)


def verify_annihilator(P, f, T=None, guard=DEFAULT_GUARD):
    """True iff every computable coefficient of ``P(1/z, f)`` vanishes on a window of at least ``guard`` beyond the solve."""
    return certify(P, f, T, guard).ok


def reconstruct_annihilator(f, degx, degy, T, guard=DEFAULT_GUARD):
    """
    Annihilator of ``f`` with ``deg_x <= degx`` and ``deg_y <= degy``.

    Parameters
    ----------
    f : TruncLaurent
        Series with ``val f <= 0``, exact down to ``z**-T``.
    degx, degy : int
        Degree box.
    T : int
        Order used; must be at least ``(degx+1)(degy+1) + guard``.

    Returns
    -------
    BivarPoly
        The nullspace element whose largest monomial (ordered by total
        degree, then ``y``-degree, then ``x``-degree) is smallest.

    Raises
    ------
    InsufficientPrecision
        ``T`` too small for the box, or ``f`` not known through ``z**-T``.
    NotFound
        Trivial nullspace, or the candidate fails on the guard window.
    """
    unknowns = _unknowns(degx, degy)
    if degx < 0 or degy < 1:
        raise ValueError("need degx >= 0 and degy >= 1")
    if T < len(unknowns) + guard:
        raise InsufficientPrecision(
            f"order {T} < {len(unknowns)} unknowns + guard {guard} for box ({degx}, {degy})")
    if f.prec > -T:
        raise InsufficientPrecision(f"series known only down to z^{f.prec}, need z^{-T}")
    if f.val_bound() > 0:
        raise ValueError("reconstruction needs val f <= 0")
    f = f.truncate(-T)
    powers = [ONE]
    for _ in range(degy):
        powers.append(powers[-1] * f)
    cols = [powers[j].shift(-i) for i, j in unknowns]
    floor = max(c.prec for c in cols if c.prec != EXACT) if f.prec != EXACT else -T
    exps = list(range(0, floor - 1, -1))
    solve = len(exps) - guard
    if solve < len(unknowns):
        raise InsufficientPrecision(
            f"only {len(exps)} residual coefficients available for {len(unknowns)} unknowns")
    rows = [[c.coeff(e) for c in cols] for e in exps[:solve]]
    pivots = _rref(rows, len(unknowns))
    free = [k for k in range(len(unknowns)) if k not in pivots]
    if not free:
        raise NotFound(f"no annihilator with degx <= {degx}, degy <= {degy}",
                       trace=[{"degx": degx, "degy": degy, "T": T, "result": "trivial nullspace"}])
    k = free[0]
    vec = [Fraction(0)] * len(unknowns)
    vec[k] = Fraction(1)
    for r, pc in enumerate(pivots):
        if pc < k:
            vec[pc] = -rows[r][k]
    P = BivarPoly({unknowns[m]: vec[m] for m in range(len(unknowns)) if vec[m]})
    cert = certify(P, f, T, guard)
    if not cert.ok:
        raise NotFound(
            f"candidate {P} fails the guard window (first nonzero at z^{cert.first_nonzero})",
            trace=[{"degx": degx, "degy": degy, "T": T, "result": "guard failure"}])
    return P


def find_annihilator(f, T, degx=1, degy=1, guard=DEFAULT_GUARD, max_degx=4, max_degy=4):
    """
    Search the degree boxes ``(degx, degy)`` upward, ``degy`` first.

    Returns ``(P, trace)``; raises ``NotFound`` carrying the whole trace.
    """
    trace = []
    for dx in range(degx, max_degx + 1):
        for dy in range(degy, max_degy + 1):
            try:
                P = reconstruct_annihilator(f, dx, dy, T, guard)
            except InsufficientPrecision as exc:
                trace.append({"degx": dx, "degy": dy, "T": T, "result": f"insufficient: {exc}"})
                continue
            except NotFound as exc:
                trace.extend(exc.trace)
                continue
            trace.append({"degx": dx, "degy": dy, "T": T, "result": "found"})
            return P, trace
    raise NotFound(f"no annihilator up to degx {max_degx}, degy {max_degy} at order {T}", trace)


def r_transform_annihilator(P):
    """
    Annihilator of the modified R-transform from one of the Stieltjes transform.

    With ``P(1/z, S) = 0`` and ``F = 1/S``, the polynomial
    ``v**n P(u, 1/v)`` kills ``(1/z, F)``; composing with the compositional
    inverse swaps the roles of ``z`` and the series, and clearing
    denominators gives the result.
    """
    n = P.degy
    flipped = {(i, n - j): c for (i, j), c in P.coeffs.items()}
    I = max(i for i, _ in flipped)
    J = max(j for _, j in flipped)
    return BivarPoly({(J - j, I - i): c for (i, j), c in flipped.items()})


# ===============
# Newton polygons
# ===============

@dataclass(frozen=True)
class NewtonPolygon:
    """Segments ``(slope, length)`` in nonincreasing slope order."""

    segments: tuple
    leading_val: int
    y_content: int = 0
    vertices: tuple = field(default=(), compare=False)

    @property
    def total_length(self):
        return sum(n for _, n in self.segments)

    def valuations(self):
        """Root valuations with multiplicity, largest first."""
        return [s for s, n in self.segments for _ in range(n)]

    def to_json(self):
        return [[s.numerator, s.denominator, n] for s, n in self.segments]


def polygon_to_json(poly):
    return poly.to_json()


def _upper_hull(points):
    hull = []
    for p in points:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # drop the middle point unless it lies strictly above the chord
            if (y2 - y1) * (p[0] - x1) <= (p[1] - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append(p)
    return hull


def _polygon_from_orders(orders):
    """
    ``orders[j]`` is the ``x``-adic order of the coefficient of ``y**j``
    (``None`` for a zero coefficient), after removing the ``y``-content.
    Returns (segments, leading_val, vertices).
    """
    n = len(orders) - 1
    pts = [(i, -orders[n - i]) for i in range(n + 1) if orders[n - i] is not None]
    hull = _upper_hull(pts)
    segs = []
    for (x1, y1), (x2, y2) in zip(hull, hull[1:]):
        segs.append((Fraction(y2 - y1, x2 - x1), x2 - x1))
    return tuple(segs), pts[0][1], tuple(hull)


def newton_polygon(P):
    """
    Newton polygon of ``P(1/z, y)`` viewed as a polynomial in ``y``.

    Writing ``P(1/z, y) = sum_i a_i y**(n-i)``, the points ``(i, val a_i)``
    are hulled from above; the slopes are the valuations of the nonzero
    roots, each repeated by its segment length.  Zero roots (the ``y``
    content) are removed first and recorded separately.
    """
    if P.is_zero():
        raise ZeroPolynomial("the zero polynomial has no Newton polygon")
    k = P.y_content()
    n = P.degy - k
    if P.degy < 1:
        raise ZeroPolynomial("polynomial is constant in y")
    orders = [None] * (n + 1)
    for (i, j), _ in P.coeffs.items():
        jj = j - k
        if orders[jj] is None or i < orders[jj]:
            orders[jj] = i
    segs, lead, hull = _polygon_from_orders(orders)
    return NewtonPolygon(segs, lead, k, hull)


def count_negative_valuation_roots(P, include_zero_roots=False):
    """
    Number of roots of ``P(1/z, y)`` of negative valuation, by the polygon.

    Zero roots have valuation ``-inf``; they are counted only when
    ``include_zero_roots`` is set.
    """
    poly = newton_polygon(P)
    count = sum(n for s, n in poly.segments if s < 0)
    return count + (poly.y_content if include_zero_roots else 0)


def check_nonsingular(P, f):
    """``dP/dy`` at ``(0, f(0))`` is nonzero, where ``f(0)`` is the ``z**0`` coefficient."""
    if isinstance(f, TruncLaurent):
        if f.val_bound() > 0:
            raise ValueError("f must be a power series in 1/z")
        y0 = f.coeff(0) if f.prec <= 0 else None
        if y0 is None:
            raise InsufficientPrecision("constant term of f is unknown")
    else:
        y0 = as_scalar(f)
    dP = P.diff_y()
    return dP.at(Fraction(0), y0) != 0


# ====================
# Desingularization
# ====================

def _shifted(c, N):
    """``f_N = sum_{i >= N} c_{i+N} t**i`` as a series in ``z = 1/t``."""
    last = len(c) - 1 - N
    coeffs = {-i: c[i + N] for i in range(N, last + 1)}
    return TruncLaurent(coeffs, -last), last


def desingularize_shift(c, N_max, degx=1, degy=1, guard=DEFAULT_GUARD, max_degx=6, max_degy=4):
    """
    Smallest shift ``N <= N_max`` whose series has a nonsingular annihilator.

    Parameters
    ----------
    c : sequence
        Coefficients ``c_0, c_1, ...`` of ``f(t)`` with ``c_0 = 0``.

    Returns
    -------
    (N, BivarPoly)
    """
    c = [as_scalar(v) for v in c]
    if c and c[0]:
        raise ValueError("f must have vanishing constant term")
    if not any(c):
        return 0, BivarPoly({(0, 1): 1})
    trace = []
    for N in range(N_max + 1):
        fN, T = _shifted(c, N)
        if T < 1:
            break
        try:
            P, tr = find_annihilator(fN, T, degx, degy, guard, max_degx, max_degy)
        except NotFound as exc:
            trace.append({"N": N, "result": "no annihilator", "attempts": len(exc.trace)})
            continue
        if check_nonsingular(P, fN):
            return N, P
        trace.append({"N": N, "result": f"singular: {P}"})
    raise NotFoundWithin(f"no nonsingular shift with N <= {N_max}", trace)


# ================
# Monic division
# ================

def poly_divide_monic(F, D, t="t"):
    """
    Euclidean division ``F = Q D + R`` in ``t`` with ``deg_t R < deg_t D``.

    ``F`` and ``D`` are sympy expressions (or strings) whose coefficients
    in ``t`` may involve other symbols; ``D`` must be monic in ``t`` so the
    division stays inside the coefficient ring.
    """
    import sympy

    t = sympy.Symbol(t) if isinstance(t, str) else t
    F = sympy.expand(sympy.sympify(F))
    D = sympy.expand(sympy.sympify(D))
    n = sympy.degree(D, t)
    if sympy.expand(D.coeff(t, n) - 1) != 0:
        raise NotMonic(f"leading coefficient of the divisor in {t} is {D.coeff(t, n)}")
    Q = sympy.Integer(0)
    R = F
    while True:
        m = sympy.degree(R, t) if R != 0 else -1
        if m < n:
            break
        lead = R.coeff(t, m)
        Q += lead * t ** (m - n)
        R = sympy.expand(R - lead * t ** (m - n) * D)
    return sympy.expand(Q), R


# ==========================
# Numeric valuation oracle
# ==========================

def numeric_valuation_oracle(P, z1=10 ** 6, z2=10 ** 8, dps=60):
    """
    Approximate root valuations of ``P(1/z, y)`` from floating-point roots.

    Roots are found at two large ``z`` and each valuation is the slope of
    ``log|root|`` against ``log z``.  Zero roots (the ``y``-content) are
    dropped.  Returns floats, largest first.

    Raises
    ------
    IllConditioned
        Root finding failed or a root is zero at one of the sample points.
    """
    import mpmath

    if P.is_zero():
        raise ZeroPolynomial("zero polynomial")
    k = P.y_content()
    n = P.degy - k
    if n == 0:
        return []
    logs = []
    with mpmath.workdps(dps):
        for zv in (z1, z2):
            x = mpmath.mpf(1) / zv
            coeffs = []
            for j in range(P.degy, k - 1, -1):
                coeffs.append(sum((mpmath.mpf(c.numerator) / c.denominator * x ** i
                                   for i, c in P.y_coefficient(j).items()), mpmath.mpf(0)))
            if coeffs[0] == 0:
                raise IllConditioned("leading coefficient vanishes at the sample point")
            try:
                roots = mpmath.polyroots(coeffs, maxsteps=400, extraprec=4 * dps)
            except mpmath.libmp.NoConvergence as exc:
                raise IllConditioned(f"root finding did not converge: {exc}") from None
            if any(r == 0 for r in roots):
                raise IllConditioned("zero root at a sample point")
            logs.append(sorted(float(mpmath.log(abs(r))) for r in roots))
    scale = math.log(z2) - math.log(z1)
    vals = [(b - a) / scale for a, b in zip(*logs)]
    return sorted(vals, reverse=True)


# ===============================
# Negative spectral valuation
# ===============================

def negative_spectral_valuation(A):
    """Every ``e_i(A)`` has valuation ``<= -1`` (checked exactly)."""
    for e in charpoly_e(A):
        if not e.is_exact and e.prec > 0:
            raise InsufficientPrecision("e_i(A) not known through z^0")
        if e.val_bound() > -1:
            return False
    return True


def power_decay(A, k_low=10, k_high=30, drop=5):
    """``val A**k_high <= val A**k_low - drop``: the eventual-decay proxy."""
    if not isinstance(A, MatSeries):
        A = MatSeries(A)
    low = None
    P = MatSeries.identity(A.n)
    for k in range(1, k_high + 1):
        P = mat_mul(P, A)
        if k == k_low:
            low = P.val()
    high = P.val()
    if high == NEG_INFINITY:
        return True
    if low == NEG_INFINITY:
        return False
    return high <= low - drop
