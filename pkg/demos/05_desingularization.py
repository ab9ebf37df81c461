"""
Making an algebraic series nonsingular
======================================

f(t) = t sqrt(1 - 4t) is algebraic, but its minimal annihilator is
singular at the origin.  Dropping leading terms and rescaling, the shifted
series f_N(t) = sum_{i>=N} c_{i+N} t^i becomes nonsingular for some N.
"""

from fractions import Fraction

from freealgebraic.algcert import check_nonsingular, desingularize_shift, find_annihilator
from freealgebraic.series import TruncLaurent

n = 40
root = [Fraction(1)]
for k in range(1, n + 1):
    root.append(root[-1] * (Fraction(1, 2) - (k - 1)) / k * -4)
c = [Fraction(0)] + root                       # t * sqrt(1 - 4t)

f = TruncLaurent({-i: c[i] for i in range(len(c))}, -(len(c) - 1))
P, _ = find_annihilator(f, len(c) - 1, degx=1, degy=2)
print("annihilator of f:", P, "| nonsingular:", check_nonsingular(P, f))

N, Q = desingularize_shift(c, 4, degx=1, degy=2)
print(f"shift N = {N}: annihilator {Q} | nonsingular: {check_nonsingular(Q, 0)}")
