"""
Fire spread on a grid and what one resource buys
=================================================

Fire leaves the ignition cell and reaches every other cell along its
quickest route. A resource on a cell adds a fixed delay to every arc out
of it, which can push cells past the arrival-time target.
"""

import numpy as np

from firelbbd.firedyn import InterdictionPlan, evaluate, objective
from firelbbd.instance import preset

inst = preset("small:0", seed=1)
rows = 1 + max(r for r, _ in inst.labels)
cols = 1 + max(c for _, c in inst.labels)

# arrival times with no resources, laid out on the grid
base = evaluate(inst, InterdictionPlan())
grid = np.array(base.arrivals).reshape(rows, cols)
print("arrival times (minutes):")
print(grid)
print("target psi =", inst.psi, "-> unprotected cells:", objective(base).value)

# try every legal single placement in the first period and keep the best
t = inst.periods[0]
scores = {}
for n in inst.candidate_nodes():
    if base.arrivals[n] >= t:
        scores[n] = objective(evaluate(inst, InterdictionPlan([(n, t)]))).value
n = min(scores, key=lambda v: (scores[v], v))
plan = InterdictionPlan([(n, t)])
after = evaluate(inst, plan)
print(f"\none resource on cell {n} at t={t}:")
print(np.array(after.arrivals).reshape(rows, cols))
print("unprotected cells:", objective(after).value)

# which cells changed status
saved = sorted(set(base.unprotected) - set(after.unprotected))
print("cells pushed past psi:", saved)
