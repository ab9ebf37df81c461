"""
Simple random walk on the free group
====================================

If u1, u2 are free Haar unitaries, u1 + u1^-1 + u2 + u2^-1 has the law of
the simple random walk on the free group F2, whose return probabilities
count closed walks on the 4-regular tree.  Polynomials cannot express
inverses, so each unitary is written as a product of two free symmetric
Bernoulli variables: u = x1 x2 and u^-1 = x2 x1.
"""

from freealgebraic.cli import cmd_annihilator, load_problem

problem = {
    "q": 4,
    "laws": ["bernoulli_pm1"] * 4,
    "expression": "x1*x2 + x2*x1 + x3*x4 + x4*x3",
    "order": 16,
    "degx": 2,
    "degy": 2,
}
report = cmd_annihilator(load_problem(problem))

print("realization dims:", report["realization"])
print("moments:", report["moments"])

# closed walks on the tree by distance from the root
counts, walks = {0: 1}, []
for _ in range(16):
    walks.append(counts.get(0, 0))
    nxt = {}
    for d, c in counts.items():
        nxt[d + 1] = nxt.get(d + 1, 0) + c * (4 if d == 0 else 3)
        if d:
            nxt[d - 1] = nxt.get(d - 1, 0) + c
    counts = nxt
print("tree walks:", walks)

ann = report["annihilator"]
print("annihilator:", ann["text"], "| certified:", ann["certified"],
      "| order used:", ann["order_used"], "| window:", ann["window"])
print("side conditions:", report["sd_checks"])
