"""Build a few G-metric spaces and run the axiom checker on them.

A metric d on a set gives two G-metrics: the perimeter d(x,y)+d(y,z)+d(z,x)
and the largest side.  The checker is exhaustive on finite tables and
sampled on continuous spaces.
"""
import numpy as np

from gmetricfp import (
    FiniteGSpace,
    check_axioms,
    check_symmetric,
    discrete_g,
    from_metric_max,
    from_metric_sum,
    real_sum_space,
)

d = np.array([[0, 1, 2], [1, 0, 2], [2, 2, 0]], dtype=float)
for name, sp in [("perimeter", from_metric_sum(d, ["a", "b", "c"])), ("largest side", from_metric_max(d, ["a", "b", "c"]))]:
    rep = check_axioms(sp, sample_budget=81)
    print(f"{name:13s} passed={rep.passed} exhaustive={rep.exhaustive} symmetric={check_symmetric(sp).symmetric}")

print("discrete G on 4 points:", check_axioms(discrete_g(4), 256).passed)

rep = check_axioms(real_sum_space(), sample_budget=4000, seed=1)
print("perimeter G on the line, 4000 samples:", rep.passed)

# a table whose only off-diagonal values are zero breaks the positivity axiom
bad = FiniteGSpace.from_entries(["p", "q"], [(0, 0, 0, 0), (0, 0, 1, 0), (0, 1, 1, 0), (1, 1, 1, 0)])
rep = check_axioms(bad, 16)
print("zero table verdicts:", rep.verdicts)
print("first violation:", rep.violations["G2"][0])
