"""Probe uniqueness from several starts, and see what the gate refuses."""
from gmetricfp import (
    CoefficientSchedule,
    HypothesisError,
    affine_family,
    check_hypotheses,
    fixed_point_transfer,
    real_sum_space,
    uniqueness_probe,
)

sp = real_sum_space()
fam = affine_family([(0.5, 1.0)])  # fixes 2
sched = CoefficientSchedule.constant(0.6, 0.0)
hyp = check_hypotheses(sp, fam, sched)
verdict = uniqueness_probe(sp, fam, sched, [-100.0, 0.0, 3.5, 1e4], hypotheses=hyp)
print("unique:", verdict.unique, "candidates:", verdict.candidates)

pair = affine_family([(0.5, 1.0), (0.5, 0.0)])  # fixes 2 and 0 respectively
t = fixed_point_transfer(sp, pair, 2.0)
print(f"2 is fixed by map {t.anchor}; fixed by all: {t.holds} (first map that moves it: {t.witness})")

ident = affine_family([(1.0, 0.0)])
hyp = check_hypotheses(sp, ident, sched)
print("identity map hypotheses:", hyp.holds, hyp.reasons[:1])
try:
    uniqueness_probe(sp, ident, sched, [0.0, 1.0], hypotheses=hyp)
except HypothesisError as exc:
    print("solver refused:", exc)
