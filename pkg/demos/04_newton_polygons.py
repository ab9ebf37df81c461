"""
Newton polygons and root valuations
===================================

For P(x, y) with x = 1/z, the Newton polygon of P(1/z, y) in y predicts
how fast each root grows in z.  We compare with a floating-point estimate
and look at the nonsingularity test used for power series roots.
"""

from freealgebraic.algcert import (
    BivarPoly,
    check_nonsingular,
    count_negative_valuation_roots,
    newton_polygon,
    numeric_valuation_oracle,
)

for text in ["x*y^2 - y + x", "x*y^2 - 1", "y^2 - 1", "x^2*y^2 - y + x^2",
             "(1 - 4*x^2)*y^2 - x^2", "y^3 - x*y + x^2"]:
    P = BivarPoly.parse(text)
    poly = newton_polygon(P)
    exact = [str(v) for v in poly.valuations()]
    approx = [round(v, 3) for v in numeric_valuation_oracle(P)]
    print(f"{text:24s} slopes {exact}  numeric {approx}")

# a root of negative valuation is a genuine power series in 1/z; when
# P(0, 0) = 0 there is exactly one such root iff dP/dy(0, 0) != 0
for text in ["x*y^2 - y + x", "y^2 + x*y - x", "y^2 - x"]:
    P = BivarPoly.parse(text)
    print(f"{text:16s} negative-valuation roots:",
          count_negative_valuation_roots(P, include_zero_roots=True),
          " nonsingular at 0:", check_nonsingular(P, 0))
