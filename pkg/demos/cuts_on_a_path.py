"""
Benders cuts on a three-arc path
================================

A path makes the cut arithmetic easy to follow: the binding fire path to
the last node is the whole path, so every interior node can delay it.
"""

from firelbbd.firedyn import InterdictionPlan, evaluate
from firelbbd.instance import Instance
from firelbbd.lbbd import feasibility_cut, optimality_cut, resilience
from firelbbd.netgraph import Network

net = Network(4, ((0, 1, 4), (1, 2, 5), (2, 3, 3)))
inst = Instance(net, {0}, psi=40, delta=15, periods=(2, 6), capacity={2: 1, 6: 1}, id="path")

empty = InterdictionPlan()
dyn = evaluate(inst, empty)
print("arrivals with no resources:", dyn.arrivals)

# node 3 is reached at 12; two delays of 15 are needed to get it past 40
print("resources needed on the path to save node 3:", resilience(inst, dyn.arrivals, 3))
cut = optimality_cut(inst, empty, dyn, 3)
print(cut.to_line())

# a resource on node 1 in period 6 arrives after the fire (d = 4 < 6)
late = InterdictionPlan([(1, 6)])
ldyn = evaluate(inst, late)
print("violations:", sorted(ldyn.violations))
print(feasibility_cut(inst, late, ldyn, 1, 6).to_line())
