from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from freealgebraic.errors import DimensionMismatch, ParseError
from freealgebraic.ncpoly import MatNCPoly, NCPoly, apply_to_vector, evaluate, parse

x1, x2 = NCPoly.generator(1), NCPoly.generator(2)


def test_parse_examples():
    f = parse("x1 + x2")
    assert f.p == 1 and f[0, 0].terms == {(1,): 1, (2,): 1}
    g = parse("[[0, x1],[x2, 0]]")
    assert g.p == 2 and g[0, 1] == x1 and g[1, 0] == x2 and g[0, 0].is_zero
    h = parse("x1*x2 - x2*x1")
    assert h[0, 0].terms == {(1, 2): 1, (2, 1): -1}


def test_parse_powers_rationals_and_unary_minus():
    assert parse("(x1 + 1)^2")[0, 0] == x1 * x1 + 2 * x1 + 1
    assert parse("3/4*x2")[0, 0] == x2.scale(Fraction(3, 4))
    assert parse("-x1 - -x2")[0, 0] == x2 - x1
    assert parse("x1^0")[0, 0] == NCPoly.constant(1)


@pytest.mark.parametrize("text, position", [
    ("x1 +", 4),
    ("x1 * * x2", 5),
    ("[[x1, 0], [0]]", 0),
    ("x1 $ x2", 3),
    ("(x1 + x2", 8),
    ("x0", 0),
    ("x1^x2", 3),
])
def test_parse_errors_report_position(text, position):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert info.value.position == position
    assert "position" in str(info.value)


def test_parse_error_lists_expected_tokens():
    with pytest.raises(ParseError) as info:
        parse("x1 +")
    assert "x<int>" in info.value.expected and "(" in info.value.expected


def test_arithmetic_examples():
    assert (x1 * x2).terms == {(1, 2): 1}
    assert x1 * 1 == x1
    assert (x1 + x2) ** 2 == NCPoly({(1, 1): 1, (1, 2): 1, (2, 1): 1, (2, 2): 1})
    assert x1 * x2 != x2 * x1


def test_matrix_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        MatNCPoly.identity(2) + MatNCPoly.identity(3)
    with pytest.raises(DimensionMismatch):
        MatNCPoly([[1, 2]])


def test_evaluate_examples():
    M = [[Fraction(1), Fraction(2)], [Fraction(0), Fraction(3)]]
    assert evaluate(parse("1"), [M]) == [[1, 0], [0, 1]]
    assert evaluate(parse("x1"), [M]) == M
    A = [[1, 2, 0], [0, 1, -1], [3, 0, 1]]
    B = [[0, 1, 1], [2, 0, 0], [1, 1, 1]]
    AB = [[sum(A[i][k] * B[k][j] for k in range(3)) for j in range(3)] for i in range(3)]
    assert evaluate(parse("x1*x2"), [A, B]) == AB


def test_evaluate_block_layout():
    A = [[2]]
    assert evaluate(parse("[[x1, 1], [0, x1*x1]]"), [A]) == [[2, 1], [0, 4]]


def test_evaluate_dimension_errors():
    with pytest.raises(DimensionMismatch):
        evaluate(parse("x1*x2"), [[[1]]])
    with pytest.raises(DimensionMismatch):
        evaluate(parse("x1"), [[[1, 0], [0, 1]], [[1]]])


def test_apply_to_vector_matches_evaluate():
    A = [[1, 2], [0, -1]]
    B = [[0, 1], [1, 1]]

    def apply_op(theta, v):
        M = (A, B)[theta - 1]
        out = {}
        for j, c in v.items():
            for i in range(2):
                if M[i][j]:
                    out[i] = out.get(i, 0) + M[i][j] * c
        return {i: c for i, c in out.items() if c}

    f = parse("[[x1*x2 + 1, x2], [x2*x1*x1, 1/2]]")
    dense = evaluate(f, [A, B])
    for col in range(4):
        vecs = [{}, {}]
        vecs[col // 2][col % 2] = 1
        out = apply_to_vector(f, apply_op, vecs)
        for row in range(4):
            assert out[row // 2].get(row % 2, 0) == dense[row][col]


coef = st.sampled_from([Fraction(-2), Fraction(-1), Fraction(1), Fraction(1, 2), Fraction(3)])
words = st.lists(st.integers(1, 3), max_size=3).map(tuple)
polys = st.dictionaries(words, coef, max_size=4).map(NCPoly)


@given(polys, polys, polys)
def test_ring_axioms(f, g, h):
    assert (f * g) * h == f * (g * h)
    assert f * (g + h) == f * g + f * h
    assert (f + g) * h == f * h + g * h


@given(polys, polys)
def test_degree_is_additive(f, g):
    if f.is_zero or g.is_zero:
        return
    assert (f * g).degree() == f.degree() + g.degree()


@given(polys)
def test_print_parse_round_trip(f):
    assert parse(str(f))[0, 0] == f


@given(st.lists(st.lists(polys, min_size=2, max_size=2), min_size=2, max_size=2))
def test_matrix_print_parse_round_trip(rows):
    m = MatNCPoly(rows)
    assert parse(str(m)) == m
