from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from freealgebraic.errors import (
    CompositionDomain,
    DivisionByZero,
    IndeterminateValuation,
    SingularMatrix,
)
from freealgebraic.series import (
    EXACT,
    NEG_INFINITY,
    ONE,
    Z,
    ZERO,
    GaussianRational,
    MatSeries,
    TruncLaurent,
    add,
    as_scalar,
    charpoly_e,
    comp_inverse,
    compose,
    format_scalar,
    inv,
    mat_inv,
    mat_mul,
    mul,
    parse_scalar,
    scalar_mul,
    series_from_json,
    series_to_json,
    val,
)

from oracles import charpoly_by_cofactors

F = Fraction


def laurent(d, prec=EXACT):
    return TruncLaurent(d, prec)


# ---------------------------------------------------------------- scalars

def test_scalar_formatting_round_trip():
    assert format_scalar(F(-3, 6)) == "-1/2"
    assert format_scalar(F(4)) == "4/1"
    assert parse_scalar("-1/2") == F(-1, 2)
    assert parse_scalar("7") == 7


def test_floats_are_refused():
    with pytest.raises(TypeError):
        as_scalar(0.5)
    with pytest.raises(ValueError):
        parse_scalar("0.5")


def test_gaussian_rationals():
    i = GaussianRational(0, 1)
    assert i * i == -1
    assert (1 + i) * (1 - i) == 2
    assert 1 / i == GaussianRational(0, -1)


# ------------------------------------------------------------- valuation

def test_valuation_examples():
    assert val(laurent({3: 2, -1: 1})) == 3
    assert val(ZERO) == NEG_INFINITY
    f = laurent({2: 1, 0: 5})
    g = laurent({-1: 3, -4: 1})
    assert val(f * g) == 1


def test_hidden_leading_term_is_indeterminate():
    f = TruncLaurent.unknown(-3)
    with pytest.raises(IndeterminateValuation):
        f.val()
    assert f.val_bound() == -4


def test_unknown_with_positive_floor_is_not_exact_zero():
    f = TruncLaurent({}, 2)
    assert not f.exact_zero
    assert f.is_zero_to_precision()


# ----------------------------------------------------- add / mul / scalar

def test_arithmetic_examples():
    assert add(laurent({1: 1, 0: 1}), laurent({1: -1})) == ONE
    assert mul(laurent({-1: 1}), laurent({-1: 1})) == laurent({-2: 1})
    assert val(laurent({3: 1}) + laurent({1: 1})) == 3


def test_product_floor_rule():
    f = laurent({2: 1}, -3)     # val 2, floor -3
    g = laurent({-1: 1}, -5)    # val -1, floor -5
    assert mul(f, g).prec == max(2 + -5, -1 + -3)


def test_scalar_zero_gives_exact_zero():
    assert scalar_mul(0, laurent({1: 1}, -3)).exact_zero


def test_coefficient_below_floor_raises():
    f = laurent({0: 1}, -2)
    assert f.coeff(-2) == 0
    with pytest.raises(ValueError):
        f.coeff(-3)


# -------------------------------------------------------------- inverse

def test_inverse_examples():
    assert inv(Z) == laurent({-1: 1})
    g = inv(laurent({1: 1, 0: -1}), -8)
    assert all(g.coeff(-k) == 1 for k in range(1, 9))
    # reciprocal of the semicircle Stieltjes transform
    S = laurent({-1: 1, -3: 1, -5: 2, -7: 5, -9: 14, -11: 42}, -12)
    R = inv(S)
    assert R.coeff(1) == 1 and R.coeff(-1) == -1 and R.coeff(-3) == -1
    assert (S * R).truncate(R.prec).agrees_with(ONE)


def test_inverse_of_zero():
    with pytest.raises(DivisionByZero):
        inv(ZERO)


def test_inverse_of_nonmonomial_polynomial_needs_floor():
    with pytest.raises(ValueError):
        inv(laurent({1: 1, 0: 1}))


# ---------------------------------------------------------- composition

def test_composition_examples():
    assert compose(laurent({2: 1}), laurent({1: 1, -1: 1})) == laurent({2: 1, 0: 2, -2: 1})
    f = laurent({3: 2, -2: 1}, -6)
    assert compose(f, Z).agrees_with(f)
    h = laurent({1: 1, -1: 1})
    back = compose(h, comp_inverse(h, -12), -12)
    assert back.agrees_with(Z)


def test_composition_domain():
    with pytest.raises(CompositionDomain):
        compose(Z, laurent({0: 1}))
    with pytest.raises(CompositionDomain):
        comp_inverse(laurent({2: 1}))


def test_comp_inverse_examples():
    assert comp_inverse(Z) == Z
    assert comp_inverse(laurent({1: 1, 0: 3})) == laurent({1: 1, 0: -3})
    g = comp_inverse(laurent({1: 1, -1: 1}), -9)
    assert g == laurent({1: 1, -1: -1, -3: -1, -5: -2, -7: -5, -9: -14}, -9)


# ----------------------------------------------------------- matrices

def test_mat_inv_examples():
    assert mat_inv(MatSeries.identity(2)) == MatSeries.identity(2)
    A = MatSeries([[Z, ZERO], [ZERO, Z]])
    zi = laurent({-1: 1})
    assert mat_inv(A) == MatSeries([[zi, ZERO], [ZERO, zi]])


def test_mat_inv_singular():
    with pytest.raises(SingularMatrix):
        mat_inv(MatSeries([[Z, Z], [Z, Z]]), -5)


def _block(M, rows, cols):
    return MatSeries([[M[i, j] for j in cols] for i in rows])


def _schur_inverse(M, prec):
    """2x2 block inversion through the Schur complement of the top-left block."""
    top, bot = [0, 1], [2, 3]
    A, B, C, D = (_block(M, r, c) for r, c in ((top, top), (top, bot), (bot, top), (bot, bot)))
    Ai = mat_inv(A, prec)
    S = D - mat_mul(mat_mul(C, Ai), B)
    Si = mat_inv(S, prec)
    TL = Ai + mat_mul(mat_mul(mat_mul(mat_mul(Ai, B), Si), C), Ai)
    TR = -mat_mul(mat_mul(Ai, B), Si)
    BL = -mat_mul(mat_mul(Si, C), Ai)
    rows = [TL.entries[i] + TR.entries[i] for i in range(2)]
    rows += [BL.entries[i] + Si.entries[i] for i in range(2)]
    return MatSeries(rows)


def test_block_inversion_matches_elimination():
    import random

    rng = random.Random(7)
    for _ in range(5):
        while True:
            rows = [[laurent({1: rng.randint(-2, 2) if i == j else 0, 0: rng.randint(-3, 3),
                              -1: rng.randint(-2, 2)}) for j in range(4)] for i in range(4)]
            for i in range(4):
                rows[i][i] = rows[i][i] + laurent({1: 3})
            M = MatSeries(rows)
            try:
                ref = _schur_inverse(M, -8)
                break
            except SingularMatrix:
                continue
        direct = mat_inv(M, -8)
        assert direct.agrees_with(ref)
        prod = mat_mul(M, direct)
        assert prod.agrees_with(MatSeries.identity(4), floor=-6)


def test_inexact_matrix_uses_series_elimination():
    A = MatSeries([[laurent({1: 1, -2: 1}, -6), laurent({0: 1}, -6)],
                   [laurent({0: 2}, -6), laurent({1: 1}, -6)]])
    Ai = mat_inv(A)
    assert mat_mul(A, Ai).agrees_with(MatSeries.identity(2))


def test_charpoly_examples():
    zi = laurent({-1: 1})
    e = charpoly_e(MatSeries([[ZERO, zi], [zi, ZERO]]))
    assert e[0].exact_zero and e[1] == laurent({-2: -1})
    e = charpoly_e(MatSeries.identity(2))
    assert e == [laurent({0: 2}), laurent({0: 1})]


def test_cayley_hamilton_residual():
    A = MatSeries([[laurent({0: 1, -1: 2}), laurent({1: 1})],
                   [laurent({-2: 3}), laurent({0: -1, -1: 1})]])
    e = charpoly_e(A)
    res = mat_mul(A, A) - A * e[0] + MatSeries.identity(2) * e[1]
    assert all(x.exact_zero for row in res.entries for x in row)


small = st.fractions(min_value=-4, max_value=4, max_denominator=3)


@given(st.integers(1, 4).flatmap(lambda n: st.lists(st.lists(small, min_size=n, max_size=n),
                                                    min_size=n, max_size=n)))
def test_charpoly_matches_cofactor_expansion(rows):
    A = MatSeries.from_scalars(rows)
    e = charpoly_e(A)
    coeffs = charpoly_by_cofactors([[F(x) for x in r] for r in rows])
    n = len(rows)
    for i in range(1, n + 1):
        assert e[i - 1].coeff(0) * (-1) ** i == coeffs[i]


# ------------------------------------------------------------ properties

exps = st.integers(-6, 4)


@st.composite
def series(draw, exact=None):
    coeffs = draw(st.dictionaries(exps, small, max_size=6))
    if exact is None:
        exact = draw(st.booleans())
    prec = EXACT if exact else draw(st.integers(-10, -2))
    return TruncLaurent(coeffs, prec)


@given(series(), series())
def test_vp2_vp3(f, g):
    try:
        vf, vg = f.val(), g.val()
    except IndeterminateValuation:
        return
    if vf == NEG_INFINITY or vg == NEG_INFINITY:
        return
    prod = f * g
    assert prod.val() == vf + vg
    s = f + g
    if vf != vg:
        assert s.val() == max(vf, vg)
    else:
        try:
            assert s.val() <= vf
        except IndeterminateValuation:
            pass


@given(series(exact=False))
def test_inverse_is_an_involution(f):
    try:
        v = f.val()
    except IndeterminateValuation:
        return
    if v == NEG_INFINITY:
        return
    g = inv(inv(f))
    assert g.agrees_with(f)


@given(st.dictionaries(st.integers(-8, 0), small, max_size=5))
def test_comp_inverse_is_two_sided(tail):
    f = TruncLaurent({**tail, 1: 1}, -10)
    g = comp_inverse(f)
    assert compose(f, g, -8).agrees_with(Z, floor=-8)
    assert compose(g, f, -8).agrees_with(Z, floor=-8)


@given(series(), series())
def test_product_floors_are_sound(f, g):
    # an exact refinement of the inputs never changes a reported coefficient
    def refine(h):
        if h.is_exact:
            return h
        extra = {e: 1 for e in range(h.prec - 1, h.prec - 4, -1)}
        return TruncLaurent({**h.coeffs, **extra})
    p = f * g
    q = refine(f) * refine(g)
    lo = p.prec if p.prec != EXACT else -30
    hi = max(p.val_bound(), q.val_bound())
    if hi == NEG_INFINITY:
        return
    for e in range(int(hi), int(lo) - 1, -1):
        assert p.coeff(e) == q.coeff(e)


def test_json_round_trip():
    f = laurent({2: F(1, 3), -4: -2}, -7)
    obj = series_to_json(f)
    assert obj == {"terms": [[2, "1/3"], [-4, "-2/1"]], "prec": -7}
    assert series_from_json(obj) == f
    assert series_from_json(series_to_json(ONE)) == ONE


def test_inversion_and_algebraicity_smoke():
    # f = z + 1/z satisfies P(1/z, f) = x f - 1 - x^2 = 0 with x = 1/z;
    # its inverse g must then satisfy P(1/g, z) = 0, i.e. z/g - 1 - 1/g^2 = 0
    f = laurent({1: 1, -1: 1})
    g = comp_inverse(f, -14)
    gi = inv(g)
    lhs = Z * gi - ONE - gi * gi
    assert lhs.is_zero_to_precision() and lhs.prec <= -10
