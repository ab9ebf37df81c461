"""
Arcsine law as a free convolution
=================================

The sum of two free symmetric Bernoulli variables has the arcsine law.
Its even moments are the central binomial coefficients, and the
Stieltjes transform is algebraic of degree two.
"""

import time
from math import comb

from freealgebraic.algcert import find_annihilator
from freealgebraic.fock import moment_oracle
from freealgebraic.laws import preset
from freealgebraic.ncpoly import parse
from freealgebraic.realize import build_sd_data, realize
from freealgebraic.sde import solve_gsde, stieltjes_from_g

laws = [preset("bernoulli_pm1")] * 2
X = parse("x1 + x2")
T = 26

t0 = time.perf_counter()
data = build_sd_data(realize(X), laws, T)
S = stieltjes_from_g(solve_gsde(data, T).g, data.p)
moments = [S.coeff(-k - 1) for k in range(T)]
print(f"SD pipeline: {time.perf_counter() - t0:.2f}s")
print("even moments:", [int(m) for m in moments[0::2]])
print("C(2k, k):    ", [comb(2 * k, k) for k in range(T // 2)])

# brute force in the Boltzmann-Fock model, completely independent of the SD solver
t0 = time.perf_counter()
fock = moment_oracle(X, laws, T - 1)
print(f"Fock oracle agrees: {fock == moments} ({time.perf_counter() - t0:.2f}s)")

P, trace = find_annihilator(S, T, degx=1, degy=1)
print("annihilator:", P)
print("boxes tried:", [(t["degx"], t["degy"], t["result"]) for t in trace])
