"""Seeded random instances shared by the unit and acceptance tests."""

import random
from fractions import Fraction
from itertools import product

from freealgebraic.laws import Law
from freealgebraic.ncpoly import MatNCPoly, NCPoly


def random_word(rng, q, max_len):
    n = rng.randint(0, max_len)
    return tuple(rng.randint(1, q) for _ in range(n))


def random_ncpoly(rng, q, max_deg, max_terms, coeffs=(-2, -1, 1, 2, Fraction(1, 2))):
    terms = {}
    for _ in range(rng.randint(0, max_terms)):
        w = random_word(rng, q, max_deg)
        terms[w] = terms.get(w, 0) + rng.choice(coeffs)
    return NCPoly(terms)


def random_matncpoly(rng, max_p=2, max_q=2, max_deg=3, max_terms=5):
    """Matrix with at most ``max_terms`` monomials spread over its entries."""
    p = rng.randint(1, max_p)
    q = rng.randint(1, max_q)
    entries = [[NCPoly() for _ in range(p)] for _ in range(p)]
    for _ in range(rng.randint(1, max_terms)):
        i, j = rng.randrange(p), rng.randrange(p)
        w = random_word(rng, q, max_deg)
        entries[i][j] = entries[i][j] + NCPoly({w: rng.choice([-2, -1, 1, 2, Fraction(1, 3)])})
    return MatNCPoly(entries), q


def padded_cumulant_law(kappa):
    """Law with the given leading cumulants and zeros beyond them."""
    ks = list(kappa)
    return Law(cumulant_fn=lambda n: ks[n - 1] if n <= len(ks) else 0)


def pipeline_instance(rng):
    """q, p <= 2; degree <= 2; <= 3 terms; cumulants of order <= 4 in -2..2."""
    q = rng.randint(1, 2)
    p = rng.randint(1, 2)
    words = [()] + [(a,) for a in range(1, q + 1)] + list(product(range(1, q + 1), repeat=2))
    entries = [[NCPoly() for _ in range(p)] for _ in range(p)]
    for k in range(rng.randint(1, 3)):
        w = rng.choice(words[1:] if k == 0 else words)
        c = rng.choice([-2, -1, 1, 2])
        i, j = rng.randrange(p), rng.randrange(p)
        entries[i][j] = entries[i][j] + NCPoly({w: c})
    laws = [padded_cumulant_law([rng.randint(-2, 2) for _ in range(4)]) for _ in range(q)]
    return MatNCPoly(entries), laws


def seeded(seed):
    return random.Random(seed)
