"""
The semicircle law from scratch
===============================

One free variable with a single nonzero free cumulant, pushed through the
whole pipeline: moments, the Schwinger-Dyson solve, and an annihilating
polynomial for its Stieltjes transform.
"""

from freealgebraic.algcert import find_annihilator, newton_polygon
from freealgebraic.laws import cumulants_to_moments, ht_oracle_moments, preset
from freealgebraic.ncpoly import parse
from freealgebraic.realize import build_sd_data, realize
from freealgebraic.sde import solve_gsde, stieltjes_from_g

# kappa_2 = 1 and nothing else
law = preset("semicircle", {"variance": 1})
print("cumulants:", [str(k) for k in law.cumulants_upto(6)])

# two independent routes to the moments
kappa = law.cumulants_upto(12)
print("via R-transform:      ", [str(m) for m in cumulants_to_moments(kappa, 12)])
print("via Hessenberg matrix:", [str(m) for m in ht_oracle_moments(kappa, 12)])

# X = x1 as a matrix polynomial, realized and fed to the SD solver
X = parse("x1")
r = realize(X)
data = build_sd_data(r, [law], 16)
sol = solve_gsde(data, 16)
S = stieltjes_from_g(sol.g, data.p)
print("realization size N =", r.N, " SD dimension n =", data.n)
print("residual valuation:", sol.residual_val, " side conditions:", sol.spectral_ok,
      sol.nondegenerate)
print("S(z) =", " + ".join(f"{S.coeff(e)}z^{e}" for e in range(-1, -12, -2)), "+ ...")

# guess and certify a polynomial P with P(1/z, S) = 0
P, trace = find_annihilator(S, 16, degx=1, degy=2)
print("annihilator:", P)

# its two roots in y have valuations +1 and -1 (roughly z and 1/z)
print("Newton polygon:", [(str(s), n) for s, n in newton_polygon(P).segments])
