from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, strategies as st

from freealgebraic.errors import DepthOverflow, InsufficientOrder
from freealgebraic.fock import (
    FockModel,
    build_generator,
    diamond,
    digits,
    free_independence_check,
    from_digits,
    moment_oracle,
    star,
    word_length,
    words_upto,
)
from freealgebraic.laws import Law, ht_oracle_moments, preset, stieltjes
from freealgebraic.ncpoly import NCPoly, parse
from freealgebraic.series import MatSeries, mat_inv

from oracles import line_closed_walks


def test_star_examples():
    assert star(1, 2, 2) == 4 and digits(4, 2) == [1, 2]
    assert star(0, 7, 3) == 7 and star(7, 0, 3) == 7
    assert star(2, 3, 3) == 9 and digits(9, 3) == [2, 3]


def test_diamond_examples():
    assert diamond(1, 2, 2) == 3 and digits(3, 2) == [1, 1]
    assert diamond(5, 1, 2) == 5
    assert diamond(2, 3, 2) == 14 and digits(14, 2) == [2, 2, 2]
    assert diamond(2, 0, 3) == 0


def test_improper_counting_base_three():
    assert [digits(x, 3) for x in range(1, 7)] == [[1], [2], [3], [1, 1], [1, 2], [1, 3]]


@given(st.integers(1, 4), st.integers(0, 400))
def test_index_digit_bijection(q, x):
    assert from_digits(digits(x, q), q) == x
    assert word_length(x, q) == len(digits(x, q))


@given(st.integers(1, 3), st.integers(0, 60), st.integers(0, 60), st.integers(0, 60))
def test_star_is_an_associative_monoid(q, x, y, z):
    assert star(star(x, y, q), z, q) == star(x, star(y, z, q), q)
    assert star(0, x, q) == x == star(x, 0, q)


@pytest.mark.parametrize("q", [1, 2, 3])
def test_nonempty_words_split_by_first_letter(q):
    D = 6 if q < 3 else 5
    words = range(1, words_upto(D, q))
    classes = {theta: {star(theta, k, q) for k in range(words_upto(D - 1, q))}
               for theta in range(1, q + 1)}
    assert sum(len(c) for c in classes.values()) == len(words)
    assert set().union(*classes.values()) == set(words)


@pytest.mark.parametrize("q", [2, 3])
def test_unique_factorization_into_theta_run_and_rest(q):
    D = 5
    n = words_upto(D, q)
    for theta in range(1, q + 1):
        rests = [k for k in range(n) if not digits(k, q) or digits(k, q)[0] != theta]
        seen = {}
        for i in range(D + 1):
            for k in rests:
                w = star(diamond(theta, i, q), k, q)
                if w < n:
                    seen[w] = seen.get(w, 0) + 1
        assert seen == {w: 1 for w in range(n)}


def test_semicircle_generator_is_hessenberg_toeplitz():
    M = build_generator(1, [0, 1], 2, 1).to_dense()
    assert M == [[0, 1, 0], [1, 0, 1], [0, 1, 0]]


def test_zero_cumulants_give_the_lowering_shift():
    op = build_generator(2, [], 2, 2)
    assert all(v == 1 for v in op.entries.values())
    assert set(op.entries) == {(star(2, k, 2), k) for k in range(words_upto(1, 2))}


def test_small_two_letter_generator():
    op = build_generator(2, [5, 7], 1, 2)
    assert op.entries == {(2, 0): 1, (0, 0): 5, (1, 1): 5, (2, 2): 5, (0, 2): 7}


def _append_matrix(theta, D, q):
    dim = words_upto(D, q)
    M = [[0] * dim for _ in range(dim)]
    for k in range(words_upto(D - 1, q)):
        M[star(k, theta, q)][k] = 1
    return M


def _mm(A, B):
    return [[sum(a * b for a, b in zip(row, col)) for col in zip(*B)] for row in A]


def _transpose(A):
    return [list(r) for r in zip(*A)]


def test_right_shift_commutation_relations():
    q, D = 2, 3
    dim = words_upto(D, q)
    interior = words_upto(D - 1, q)
    app = {t: _append_matrix(t, D, q) for t in (1, 2)}
    strip = {t: _transpose(app[t]) for t in (1, 2)}
    for s, t in product((1, 2), repeat=2):
        P = _mm(strip[s], app[t])
        for i in range(interior):
            for j in range(interior):
                assert P[i][j] == (s == t and i == j)
    total = [[0] * dim for _ in range(dim)]
    for t in (1, 2):
        P = _mm(app[t], strip[t])
        total = [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(total, P)]
    for i in range(dim):
        for j in range(dim):
            assert total[i][j] == (i == j and i > 0)


def test_semicircle_moments_match_hessenberg_toeplitz():
    law = preset("semicircle")
    assert moment_oracle(parse("x1"), [law], 6) == [1, 0, 1, 0, 2, 0, 5]
    assert moment_oracle(parse("x1"), [law], 12) == ht_oracle_moments([0, 1] + [0] * 11, 12)


def test_arcsine_moments_are_central_binomials():
    laws = [preset("bernoulli_pm1")] * 2
    m = moment_oracle(parse("x1 + x2"), laws, 8)
    assert m[0::2] == [1, 2, 6, 20, 70]
    assert m[0::2] == line_closed_walks(9)[0::2]


def test_commutator_of_semicircles():
    laws = [preset("semicircle")] * 2
    assert moment_oracle(parse("x1*x2 - x2*x1"), laws, 6) == [1, 0, -2, 0, 10, 0, -66]


def test_depth_invariance():
    laws = [Law(cumulant_fn=lambda n: {1: 1, 2: 2, 3: -1}.get(n, 0)), preset("bernoulli_pm1")]
    f = parse("x1*x2 + 2*x2 - x1")
    full = moment_oracle(f, laws, 8)
    assert moment_oracle(f, laws, 8, back_steps=0) == full
    assert moment_oracle(f, laws, 6) == full[:7]


def test_resolvent_of_the_truncated_matrix():
    D = 6
    H = build_generator(1, [0, 1], D, 1).to_dense()
    n = len(H)
    pencil = MatSeries.pencil([[-x for x in row] for row in H],
                              [[int(i == j) for j in range(n)] for i in range(n)])
    G = mat_inv(pencil, -(2 * D + 2))
    S = stieltjes(preset("semicircle"), 2 * D + 2)
    assert G[0, 0].agrees_with(S, floor=-(2 * D + 2))


def test_finite_laws_run_out():
    with pytest.raises(InsufficientOrder):
        moment_oracle(parse("x1"), [Law(cumulants=[0, 1])], 6)


def test_dimension_cap():
    with pytest.raises(DepthOverflow):
        moment_oracle(parse("x1 + x2"), [preset("semicircle")] * 2, 12, dim_cap=20)


def test_state_of_matrix_polynomial_is_normalized_trace():
    laws = [preset("semicircle")]
    m = moment_oracle(parse("[[x1, 1], [1, 0]]"), laws, 2)
    assert m == [1, 0, Fraction(3, 2)]


def test_free_independence():
    laws = [preset("semicircle"), preset("bernoulli_pm1")]
    assert free_independence_check(laws, k=4)
    model = FockModel(laws)
    x1c = NCPoly.generator(1)
    x2c = NCPoly.generator(2)
    assert model.state(x1c * x2c) == 0
    assert model.state(x1c * x2c * x1c * x2c) == 0
    # non-alternating product of centred elements: the variance
    assert model.state(x1c * x1c) == 1
