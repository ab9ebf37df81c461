"""
Generalized Schwinger-Dyson equation

    I + a0 g + sum_theta sum_{j>=2} kappa_j^theta (a_theta g)^j = 0

over truncated matrix Laurent series: solver, residual, side conditions
and the Stieltjes transform read off from ``g``.

The production solver works in a reduced space.  Factor each constant
``a_theta = U_theta V_theta^T`` (full column rank).  Then
``(a_theta g)^j = U_theta M_theta^(j-1) V_theta^T g`` with the small block
``M_theta = V_theta^T g U_theta``, and the equation becomes
``g = -(a0 + U Phi V^T)^{-1}`` with ``Phi = diag_theta sum_j kappa_j M_theta^(j-1)``.
With ``W = V^T a0^{-1} U`` the stacked blocks ``P = V^T g U`` satisfy
``P = -(I + W Phi(P))^{-1} W``, a fixed point on ``R x R`` matrices where
``R`` is the total rank.  ``g`` itself is recovered by the Woodbury identity.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (
    DepthOverflow,
    DimensionMismatch,
    IndeterminateValuation,
    NonContractive,
    NotSummable,
    SingularA0,
    SingularMatrix,
)
from .fock import digits, from_digits, star, word_length, words_upto
from .series import (
    EXACT,
    NEG_INFINITY,
    ONE,
    ZERO,
    MatSeries,
    TruncLaurent,
    _exact_rational_inverse,
    _matmul_rows,
    _scalar_inverse_and_det,
    add,
    charpoly_e,
    mat_inv,
    mul,
    scalar_mul,
)

__all__ = [
    "SDSolution",
    "solve_gsde",
    "residual",
    "stieltjes_from_g",
    "check_gsde1",
    "check_gsde3",
    "exploit_check",
    "rank_factor",
    "a0_inverse",
]


# -----------------
# Small dense tools
# -----------------

def rank_factor(a):
    """``a = U @ V^T`` with ``U = a[:, pivots]`` and ``V^T`` the nonzero RREF rows."""
    n = len(a)
    m = len(a[0]) if n else 0
    rows = [[Fraction(x) for x in r] for r in a]
    pivots = []
    r = 0
    for col in range(m):
        piv = next((i for i in range(r, n) if rows[i][col]), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        inv = 1 / rows[r][col]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(n):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == n:
            break
    U = [[Fraction(a[i][c]) for c in pivots] for i in range(n)]
    Vt = rows[:r]
    return U, Vt


def _mm(A, B):
    """Rectangular product of series grids."""
    if not A or not B:
        return [[] for _ in A]
    return _matmul_rows(A, B, len(A), len(B[0]), len(B))


def _smul_left(C, X):
    """Scalar matrix ``C`` times series grid ``X``."""
    out = []
    cols = len(X[0]) if X else 0
    for row in C:
        nz = [(k, c) for k, c in enumerate(row) if c]
        r = []
        for j in range(cols):
            s = ZERO
            for k, c in nz:
                x = X[k][j]
                if not x.exact_zero:
                    s = add(s, scalar_mul(c, x))
            r.append(s)
        out.append(r)
    return out


def _smul_right(X, C):
    """Series grid ``X`` times scalar matrix ``C``."""
    cols = len(C[0]) if C else 0
    nzcols = [[(k, C[k][j]) for k in range(len(C)) if C[k][j]] for j in range(cols)]
    out = []
    for row in X:
        r = []
        for j in range(cols):
            s = ZERO
            for k, c in nzcols[j]:
                x = row[k]
                if not x.exact_zero:
                    s = add(s, scalar_mul(c, x))
            r.append(s)
        out.append(r)
    return out


def _gadd(A, B, sign=1):
    if sign == 1:
        return [[add(a, b) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]
    return [[add(a, -b) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def _gneg(A):
    return [[-x for x in r] for r in A]


def _gtrunc(A, floor):
    return [[x if x.exact_zero else x.truncate(floor) for x in r] for r in A]


def _ident(n):
    return [[ONE if i == j else ZERO for j in range(n)] for i in range(n)]


def _zero_to_precision(A):
    return all(x.top is None for r in A for x in r)


def _gval(A):
    return max((x.val_bound() for r in A for x in r), default=NEG_INFINITY)


def _gprec(A):
    return max((x.prec for r in A for x in r), default=EXACT)


# -----------------
# Exact a0 inverse
# -----------------

def a0_inverse(data):
    """Exact inverse of ``a0`` over Q(z) as a :class:`RationalMatrix`."""
    try:
        return _exact_rational_inverse(data.a0())
    except SingularMatrix:
        raise SingularA0("a0 is singular over Q(z)") from None


# --------
# Solution
# --------

@dataclass
class SDSolution:
    g: MatSeries
    order: int
    residual_val: float | int | None = None
    spectral_ok: list = field(default_factory=list)
    nondegenerate: bool | None = None
    iterations: int = 0
    method: str = "reduced"
    blocks: list = field(default_factory=list, repr=False)

    @property
    def prec(self):
        return self.g.prec


class _Reduced:
    """Rank factorizations and the stacked ``U``, ``V`` of an instance."""

    def __init__(self, data):
        self.data = data
        self.U = []
        self.Vt = []
        self.ranks = []
        for a in data.a:
            U, Vt = rank_factor(a)
            self.U.append(U)
            self.Vt.append(Vt)
            self.ranks.append(len(Vt))
        self.offsets = []
        off = 0
        for r in self.ranks:
            self.offsets.append(off)
            off += r
        self.R = off
        n = data.n
        self.Ustack = [[x for U in self.U for x in U[i]] for i in range(n)] if self.R else [[] for _ in range(n)]
        self.Vtstack = [row for Vt in self.Vt for row in Vt]

    def block(self, P, t):
        o, r = self.offsets[t], self.ranks[t]
        return [row[o:o + r] for row in P[o:o + r]]

    def cross(self, P, s, t):
        os_, rs = self.offsets[s], self.ranks[s]
        ot, rt = self.offsets[t], self.ranks[t]
        return [row[ot:ot + rt] for row in P[os_:os_ + rs]]


def _kappa_series(data, t, M, floor, jmax=None):
    """``sum_{j>=2} kappa_j M^(j-1)`` for the block ``M`` of generator ``t``."""
    r = len(M)
    top = data.max_order(t) if jmax is None else min(jmax, data.max_order(t))
    acc = [[ZERO] * r for _ in range(r)]
    power = _ident(r)
    for j in range(2, top + 1):
        power = _gtrunc(_mm(power, M), floor)
        if _zero_to_precision(power):
            acc = _gtrunc(acc, max(_gprec(acc), _gprec(power)))
            break
        k = data.kappa(t, j)
        if k:
            acc = _gadd(acc, [[scalar_mul(k, x) for x in row] for row in power])
    return _gtrunc(acc, floor)


def _phi_blockdiag(red, P, floor):
    R = red.R
    out = [[ZERO] * R for _ in range(R)]
    for t in range(red.data.q):
        r = red.ranks[t]
        if not r:
            continue
        o = red.offsets[t]
        blk = _kappa_series(red.data, t, red.block(P, t), floor)
        for i in range(r):
            for j in range(r):
                out[o + i][o + j] = blk[i][j]
    return out


def _first_difference(A, B):
    """Largest exponent where two grids differ (``None`` if equal)."""
    worst = None
    for ra, rb in zip(A, B):
        for a, b in zip(ra, rb):
            d = add(a, -b)
            if d.top is not None and (worst is None or d.top > worst):
                worst = d.top
    return worst


def _series_inv_grid(A):
    if not A:
        return []
    return mat_inv(MatSeries(A)).entries


def _solve_reduced(data, T, margin, max_iter):
    red = _Reduced(data)
    floor = -T - margin
    ainv = a0_inverse(data).series(floor).entries
    R = red.R
    if R == 0:
        return MatSeries(_gneg(ainv)), 0, red, []
    AU = _gtrunc(_smul_right(ainv, red.Ustack), floor)      # a0^{-1} U     (n x R)
    VA = _gtrunc(_smul_left(red.Vtstack, ainv), floor)      # V^T a0^{-1}   (R x n)
    W = _gtrunc(_smul_right(VA, red.Ustack), floor)          # V^T a0^{-1} U (R x R)
    P = _gneg(W)
    stalls = 0
    last_gap = None
    it = 0
    for it in range(1, max_iter + 1):
        Phi = _phi_blockdiag(red, P, floor)
        inner = _gadd(_ident(R), _mm(W, Phi))
        Pn = _gtrunc(_gneg(_mm(_series_inv_grid(inner), W)), floor)
        gap = _first_difference(P, Pn)
        P = Pn
        if gap is None:
            break
        if last_gap is not None and gap >= last_gap:
            stalls += 1
            if stalls >= 2:
                raise NonContractive(
                    f"fixed-point iteration stopped gaining precision at z^{gap}")
        else:
            stalls = 0
        last_gap = gap
    else:
        raise NonContractive(f"no fixed point at floor {floor} after {max_iter} iterations")
    Phi = _phi_blockdiag(red, P, floor)
    inner = _gadd(_ident(R), _mm(W, Phi))
    mid = _mm(Phi, _series_inv_grid(inner))
    corr = _mm(_mm(AU, mid), VA)
    g = _gadd(_gneg(ainv), corr)
    return MatSeries(g), it, red, P


def _solve_direct(data, T, margin, max_iter):
    floor = -T - margin
    ainv = a0_inverse(data).series(floor).entries
    n = data.n
    g = _gneg(ainv)
    it = 0
    for it in range(1, max_iter + 1):
        total = _ident(n)
        for t in range(data.q):
            a = data.a[t]
            X = _gtrunc(_smul_left(a, g), floor)
            power = X
            for j in range(2, data.max_order(t) + 1):
                power = _gtrunc(_mm(power, X), floor)
                if _zero_to_precision(power):
                    break
                k = data.kappa(t, j)
                if k:
                    total = _gadd(total, [[scalar_mul(k, x) for x in row] for row in power])
        gn = _gtrunc(_gneg(_mm(ainv, total)), floor)
        if _first_difference(g, gn) is None:
            g = gn
            break
        g = gn
    else:
        raise NonContractive(f"direct iteration found no fixed point after {max_iter} steps")
    return MatSeries(g), it


def solve_gsde(data, T, method="reduced", checks=True, margin=None, max_iter=None):
    """
    Solve the equation for ``g`` with every entry exact through ``z**-T``.

    Parameters
    ----------
    data : SDData
    T : int
        Target order; ``g.prec <= -T`` on return.
    method : {"reduced", "direct"}
        ``"direct"`` iterates ``g <- -a0^{-1}(I + sum kappa_j (a g)^j)`` at
        full size; it is kept as a cross-check for small instances.
    checks : bool
        Also evaluate the residual and the two side conditions (at ``J = T``).

    Raises
    ------
    SingularA0, NonContractive
    """
    margin = 2 if margin is None else margin
    while True:
        limit = max_iter or (2 * (T + margin) + data.n + 8)
        if method == "direct":
            g, it = _solve_direct(data, T, margin, limit)
            blocks = []
        else:
            g, it, _, blocks = _solve_reduced(data, T, margin, limit)
        if g.prec <= -T:
            break
        margin += max(2, g.prec + T)
        if margin > 4 * T + 40:
            raise NonContractive("could not reach the requested precision")
    sol = SDSolution(g=g, order=T, iterations=it, method=method, blocks=blocks)
    if checks:
        res = residual(data, g)
        try:
            sol.residual_val = res.val()
        except IndeterminateValuation:
            sol.residual_val = res.val_bound()
        sol.spectral_ok = check_gsde1(data, g)
        try:
            sol.nondegenerate = check_gsde3(data, g, T)
        except IndeterminateValuation:
            sol.nondegenerate = None
    return sol


def _power_sum(data, t, X, floor, jmax=None):
    """``sum_{j>=2} kappa_j X^j`` with a summability guard."""
    n = len(X)
    total = [[ZERO] * n for _ in range(n)]
    power = X
    top = data.max_order(t) if jmax is None else min(jmax, data.max_order(t))
    history = [_gval(X)]
    for j in range(2, top + 1):
        power = _gtrunc(_mm(power, X), floor)
        if _zero_to_precision(power):
            break
        history.append(_gval(power))
        if len(history) >= 2 * n + 2:
            recent = max(history[-n:])
            before = max(history[-2 * n:-n])
            if recent >= before:
                raise NotSummable(f"powers of a_{t + 1} g do not decay (val stuck at {recent})")
        k = data.kappa(t, j)
        if k:
            total = _gadd(total, [[scalar_mul(k, x) for x in row] for row in power])
    return total


def residual(data, g):
    """
    Left side ``I + a0 g + sum kappa_j (a_theta g)^j`` evaluated on ``g``.

    Raises
    ------
    NotSummable
        If some ``a_theta g`` has positive valuation, or its powers stop
        decaying.
    """
    n = data.n
    floor = g.prec
    G = g.entries
    out = _gadd(_ident(n), _mm(data.a0().entries, G))
    for t in range(data.q):
        X = _gtrunc(_smul_left(data.a[t], G), floor)
        if _gval(X) > 0:
            raise NotSummable(f"val(a_{t + 1} g) > 0")
        out = _gadd(out, _power_sum(data, t, X, floor))
    return MatSeries(out, None if floor == EXACT else floor)


def stieltjes_from_g(g, p):
    """``-(1/p) * trace`` of the upper-left ``p x p`` block of ``g``."""
    if p < 1 or p > g.n:
        raise DimensionMismatch(f"block size {p} outside 1..{g.n}")
    return scalar_mul(Fraction(-1, p), g.trace(p))


def _reduced_blocks(data, g):
    """``M_theta = V_theta^T g U_theta`` and ``P = V^T g U``."""
    red = _Reduced(data)
    G = g.entries
    P = _smul_right(_smul_left(red.Vtstack, G), red.Ustack) if red.R else []
    return red, P


def check_gsde1(data, g, full=None):
    """
    Negative spectral valuation of each ``a_theta g``: every elementary
    symmetric function of its eigenvalues has valuation ``<= -1``.

    The nonzero eigenvalues of ``U V^T g`` are those of ``V^T g U``, so the
    test runs on the small blocks unless ``full`` is requested.
    """
    if full is None:
        full = data.n <= 4
    out = []
    if full:
        for a in data.a:
            X = MatSeries(_smul_left(a, g.entries))
            out.append(all(e.val_bound() <= -1 for e in charpoly_e(X)))
        return out
    red, P = _reduced_blocks(data, g)
    for t in range(data.q):
        if not red.ranks[t]:
            out.append(True)
            continue
        M = MatSeries(red.block(P, t))
        es = charpoly_e(M)
        ok = True
        for e in es:
            v = e.val() if e.top is not None or e.exact_zero else e.val_bound()
            if v > -1:
                ok = False
        out.append(ok)
    return out


def _det_nonzero(rows):
    """
    Gaussian elimination with maximal-valuation pivots.

    Returns the valuation of the determinant; raises
    ``IndeterminateValuation`` if a column has no determinate pivot.
    """
    n = len(rows)
    a = [list(r) for r in rows]
    total = 0
    for col in range(n):
        best = None
        for r in range(col, n):
            x = a[r][col]
            if x.top is not None and (best is None or x.top > a[best][col].top):
                best = r
        if best is None:
            raise IndeterminateValuation(f"determinant undetermined at column {col}")
        a[col], a[best] = a[best], a[col]
        p = a[col][col]
        total += p.top
        # exact non-monomial pivots only occur for exact input; any floor will do
        ip = p.inv() if p.prec != EXACT or len(p.coeffs) == 1 else p.inv(-p.top - 64)
        for r in range(col + 1, n):
            f = a[r][col]
            if f.exact_zero:
                continue
            m = mul(f, ip)
            a[r] = [add(x, -mul(m, y)) if not y.exact_zero else x for x, y in zip(a[r], a[col])]
    return total


def _gsde3_full(data, g, J):
    n = data.n
    G = g.entries
    floor = g.prec
    a0 = data.a0().entries
    powers = []
    for t, a in enumerate(data.a):
        X = _gtrunc(_smul_left(a, G), floor)
        ps = [_ident(n)]
        for _ in range(1, J):
            nxt = _gtrunc(_mm(ps[-1], X), floor)
            ps.append(nxt)
            if _zero_to_precision(nxt):
                break
        powers.append(ps)
    cols = []
    for i in range(n):
        for j in range(n):
            H = [[ONE if (r, c) == (i, j) else ZERO for c in range(n)] for r in range(n)]
            img = _mm(a0, H)
            for t, a in enumerate(data.a):
                AH = _smul_left(a, H)
                ps = powers[t]
                for jj in range(2, J + 1):
                    k = data.kappa(t, jj)
                    if not k:
                        continue
                    for nu in range(jj):
                        if nu >= len(ps) or jj - 1 - nu >= len(ps):
                            continue
                        term = _mm(_mm(ps[nu], AH), ps[jj - 1 - nu])
                        img = _gadd(img, [[scalar_mul(k, x) for x in row] for row in term])
            cols.append([x for row in img for x in row])
    mat = [[cols[c][r] for c in range(n * n)] for r in range(n * n)]
    return _det_nonzero(_gtrunc(mat, floor))


def _gsde3_reduced(data, g, J):
    red, P = _reduced_blocks(data, g)
    floor = g.prec
    if red.R == 0:
        return 0
    q = data.q
    powers = []
    for t in range(q):
        r = red.ranks[t]
        M = red.block(P, t)
        ps = [_ident(r)]
        for _ in range(1, max(J - 1, 1)):
            nxt = _gtrunc(_mm(ps[-1], M), floor)
            ps.append(nxt)
            if _zero_to_precision(nxt):
                break
        powers.append(ps)

    def Q(t, S):
        # sum_j kappa_j sum_{a+b=j-2} M^a S M^b
        r = red.ranks[t]
        ps = powers[t]
        acc = [[ZERO] * r for _ in range(r)]
        for jj in range(2, J + 1):
            k = data.kappa(t, jj)
            if not k:
                continue
            for a_ in range(jj - 1):
                b_ = jj - 2 - a_
                if a_ >= len(ps) or b_ >= len(ps):
                    continue
                term = _mm(_mm(ps[a_], S), ps[b_])
                acc = _gadd(acc, [[scalar_mul(k, x) for x in row] for row in term])
        return acc

    basis = [(t, i, j) for t in range(q) for i in range(red.ranks[t]) for j in range(red.ranks[t])]
    index = {b: k for k, b in enumerate(basis)}
    dim = len(basis)
    cols = []
    for (t, i, j) in basis:
        r = red.ranks[t]
        S = [[ONE if (x, y) == (i, j) else ZERO for y in range(r)] for x in range(r)]
        QS = Q(t, S)
        col = [ZERO] * dim
        col[index[(t, i, j)]] = ONE
        for t2 in range(q):
            if not red.ranks[t2]:
                continue
            img = _mm(_mm(red.cross(P, t2, t), QS), red.cross(P, t, t2))
            for x in range(red.ranks[t2]):
                for y in range(red.ranks[t2]):
                    k = index[(t2, x, y)]
                    col[k] = add(col[k], -img[x][y])
        cols.append(col)
    mat = [[cols[c][r] for c in range(dim)] for r in range(dim)]
    return _det_nonzero(_gtrunc(mat, floor))


def check_gsde3(data, g, J, full=None):
    """
    Invertibility of the linearized map
    ``h -> a0 h + sum kappa_j sum_nu (a g)^nu (a h) (a g)^(j-1-nu)`` with the
    cumulant sum truncated at ``J``.

    Small instances materialize the ``n^2 x n^2`` matrix.  Otherwise the map
    is reduced: it has a kernel exactly when ``s -> s - K(s)`` does on the
    blocks ``s_theta = V_theta^T h U_theta``, where
    ``K(s)_t' = sum_t P_{t't} Q_t(s_t) P_{tt'}`` and
    ``Q_t(s) = sum_j kappa_j sum_{a+b=j-2} M^a s M^b``.

    Returns ``True`` when the determinant has determinate finite valuation.

    Raises
    ------
    IndeterminateValuation
        Determinant zero to working precision (inconclusive).
    """
    if full is None:
        full = data.n <= 3
    if full:
        _gsde3_full(data, g, J)
    else:
        _gsde3_reduced(data, g, J)
    return True


# ---------------------------
# Block recursion (tree model)
# ---------------------------

def _tree_neighbours(data, w, depth):
    """
    Nonzero blocks of column ``w`` of ``C`` where the block matrix is
    ``A = -(1 (x) a0) - sum_theta (lowering + raising) (x) a_theta``.
    Yields ``(row_word, theta, coefficient)`` with the generator term
    ``coefficient * a_theta``.
    """
    q = data.q
    ln = word_length(w, q)
    out = []
    for t in range(q):
        theta = t + 1
        if ln < depth:
            out.append((star(theta, w, q), t, Fraction(1)))
        # e[k, theta^j * k] with column w = theta^j * k, j >= 1
        j = 0
        ds = digits(w, q)
        while j < len(ds) and ds[j] == theta:
            j += 1
            k = data.kappa(t, j + 1)
            if k:
                out.append((from_digits(ds[j:], q), t, k))
    return out


def _exploit_blocks_dense(data, depth, floor, dim_cap):
    q, n = data.q, data.n
    dim = words_upto(depth, q)
    N = n * dim
    if N > dim_cap:
        raise DepthOverflow(f"block matrix of size {N} exceeds cap {dim_cap}")
    const = [[Fraction(0)] * N for _ in range(N)]
    lin = [[Fraction(0)] * N for _ in range(N)]
    for w in range(dim):
        for i in range(n):
            for j in range(n):
                const[w * n + i][w * n + j] -= data.a0_const[i][j]
                lin[w * n + i][w * n + j] -= data.a0_z[i][j]
        for row, t, c in _tree_neighbours(data, w, depth):
            a = data.a[t]
            for i in range(n):
                for j in range(n):
                    if a[i][j]:
                        const[row * n + i][w * n + j] -= c * a[i][j]
    inv = mat_inv(MatSeries.pencil(const, lin), floor)
    return lambda w: [[inv.entries[w * n + i][j] for j in range(n)] for i in range(n)]


def _exploit_blocks_neumann(data, depth, floor):
    """
    Column 0 of ``A^{-1}`` when the z-part ``B`` of ``a0`` is invertible:
    ``A^{-1} = -sum_k (-1)^k z^(-k-1) C^k (1 (x) B^{-1})`` with
    ``C = (1 (x) B^{-1}) (1 (x) a0_const + generator part)``.
    """
    n = data.n
    _, Binv = _scalar_inverse_and_det(data.a0_z)
    if Binv is None:
        return None
    steps = -floor
    # block vector: word -> n x n scalar block (column block 0)
    vec = {0: [row[:] for row in Binv]}
    coeffs = {}

    def blk_mul(A, B):
        return [[sum(A[i][k] * B[k][j] for k in range(n) if A[i][k]) for j in range(n)]
                for i in range(n)]

    BA0 = blk_mul(Binv, data.a0_const)
    Ba = [blk_mul(Binv, a) for a in data.a]
    for k in range(steps):
        for w, b in vec.items():
            coeffs.setdefault(w, {})[-k - 1] = [[-((-1) ** k) * x for x in row] for row in b]
        nxt = {}
        for w, b in vec.items():
            terms = [(w, BA0, Fraction(1))]
            for row, t, c in _tree_neighbours(data, w, depth):
                terms.append((row, Ba[t], c))
            for row, M, c in terms:
                prod = blk_mul(M, b)
                cur = nxt.get(row)
                if cur is None:
                    nxt[row] = [[c * x for x in r] for r in prod]
                else:
                    nxt[row] = [[x + c * y for x, y in zip(r1, r2)] for r1, r2 in zip(cur, prod)]
        vec = {w: b for w, b in nxt.items() if any(x for r in b for x in r)}

    def block(w):
        cs = coeffs.get(w, {})
        return [[TruncLaurent({e: m[i][j] for e, m in cs.items()}, floor) for j in range(n)]
                for i in range(n)]

    return block


def _exploit_blocks_schur(data, depth, floor):
    """
    Column 0 of ``A^{-1}`` when the z-part of ``a0`` is a coordinate
    projector (the shape produced by :func:`build_sd_data`).

    Split the indices by that projector into ``S`` (z present) and ``Z``.
    With ``K`` the constant part of ``-A``, the block ``K_ZZ`` must be
    unipotent so that its inverse is a terminating Neumann sum;
    the Schur complement on ``S`` is then ``z + C`` with a constant ``C``.
    Returns ``None`` when the data do not have this shape.
    """
    n, q = data.n, data.q
    B = data.a0_z
    if any(B[i][j] != (i == j and B[i][i] == 1) for i in range(n) for j in range(n)):
        return None
    on_s = [B[i][i] == 1 for i in range(n)]
    nz = on_s.count(False)
    neighbours = {}

    def apply_k(vec, rows_in_s):
        # K restricted to columns in vec, rows filtered to S or Z
        out = {}
        for (w, j), x in vec.items():
            if w not in neighbours:
                neighbours[w] = _tree_neighbours(data, w, depth)
            terms = [(w, data.a0_const, 1)] + [(r, data.a[t], c) for r, t, c in neighbours[w]]
            for r, M, c in terms:
                for i in range(n):
                    if on_s[i] == rows_in_s and M[i][j]:
                        key = (r, i)
                        v = out.get(key, 0) + c * M[i][j] * x
                        if v:
                            out[key] = v
                        else:
                            out.pop(key, None)
        return out

    def m_inv(vec):
        # (-K_ZZ)^{-1} = -sum_k (I - K_ZZ)^k on Z-supported vectors
        total = {key: -v for key, v in vec.items()}
        term = dict(vec)
        for _ in range(nz + 1):
            nxt = dict(term)
            for key, v in apply_k(term, False).items():
                s = nxt.get(key, 0) - v
                if s:
                    nxt[key] = s
                else:
                    nxt.pop(key, None)
            term = nxt
            if not term:
                return total
            for key, v in term.items():
                s = total.get(key, 0) - v
                if s:
                    total[key] = s
                else:
                    total.pop(key, None)
        return None

    def add_into(acc, vec, scale=1):
        for key, v in vec.items():
            s = acc.get(key, 0) + scale * v
            if s:
                acc[key] = s
            else:
                acc.pop(key, None)
        return acc

    def c_apply(x_s):
        y = apply_k(x_s, True)
        z_part = m_inv(apply_k(x_s, False))
        if z_part is None:
            return None
        return add_into(y, apply_k(z_part, True)), z_part

    steps = -floor
    coeffs = {}
    for col in range(n):
        e = {(0, col): Fraction(1)}
        e_s = e if on_s[col] else {}
        e_z = {} if on_s[col] else e
        mz = m_inv(e_z)
        if mz is None:
            return None
        # x_Z = Minv e_Z + Minv K_ZS x_S; x_S = sum_k (-1)^k z^(-k-1) C^k f
        f = add_into(dict(e_s), apply_k(mz, True))
        f = {key: -v for key, v in f.items()}
        for (w, i), v in mz.items():
            coeffs.setdefault(w, {}).setdefault(0, {})[(i, col)] = v
        cur = f
        for k in range(steps):
            sign = -1 if k % 2 else 1
            for (w, i), v in cur.items():
                coeffs.setdefault(w, {}).setdefault(-k - 1, {})[(i, col)] = sign * v
            out = c_apply(cur)
            if out is None:
                return None
            nxt, z_part = out
            for (w, i), v in z_part.items():
                slot = coeffs.setdefault(w, {}).setdefault(-k - 1, {})
                slot[(i, col)] = slot.get((i, col), 0) + sign * v
            cur = nxt
            if not cur:
                break

    def block(w):
        cs = coeffs.get(w, {})
        return [[TruncLaurent({e: m.get((i, j), 0) for e, m in cs.items()}, floor)
                 for j in range(n)] for i in range(n)]

    return block


def exploit_check(data, g, w, D, dim_cap=4000):
    """
    Compare the block ``G<w, 0>`` of the inverse of the depth-``D`` tree
    matrix with ``g a_{w1} g a_{w2} ... g``.

    ``w`` is a tuple of generator indices (1-based).  Coefficients are
    compared at exponents ``>= -(D - len(w))`` (and above the floor of
    ``g``), where boundary truncation cannot reach.
    """
    q = data.q
    k = len(w)
    if D < k:
        raise ValueError("depth must be at least the word length")
    window = -(D - k)
    floor = min(window, 0) - 1
    block = _exploit_blocks_neumann(data, D, floor)
    if block is None:
        block = _exploit_blocks_schur(data, D, floor)
    if block is None:
        block = _exploit_blocks_dense(data, D, floor, dim_cap)
    lhs = block(from_digits(list(w), q))
    G = g.entries
    rhs = G
    for theta in w:
        rhs = _mm(_smul_right(rhs, data.a[theta - 1]), G)
    lo = max(window, g.prec)
    for r1, r2 in zip(lhs, rhs):
        for x, y in zip(r1, r2):
            top = max(x.val_bound(), y.val_bound())
            if top == NEG_INFINITY:
                continue
            for e in range(int(top), lo - 1, -1):
                if e < x.prec or e < y.prec:
                    break
                if x.coeff(e) != y.coeff(e):
                    return False
    return True
