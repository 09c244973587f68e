"""Solve for a common fixed point and compare the a priori bound with the orbit."""
from gmetricfp import (
    CoefficientSchedule,
    affine_family,
    apriori_vs_observed,
    cauchy_diagnostic,
    check_hypotheses,
    real_sum_space,
    solve_common_fixed_point,
)

sp = real_sum_space()
fam = affine_family([(0.2, 0.8), (0.25, 0.75), (0.3, 0.7)])  # every map fixes 1
sched = CoefficientSchedule.constant(0.35, 0.2, index_cap=fam.index_cap)

hyp = check_hypotheses(sp, fam, sched, triple_samples=500)
print("hypotheses hold:", hyp.holds, "rate certificate:", hyp.rate_certificate.to_dict())

res, cert = solve_common_fixed_point(sp, fam, sched, x0=-7.0, hypotheses=hyp)
print(f"fixed point {res.point!r} after {res.trace.steps} steps, max residual {max(res.residuals):.2e}")
print("fixed by every map:", res.transfer_flag)

for n in (1, 5, 10, 20):
    if n < len(res.trace.points):
        print(f"  n={n:2d} bound {cert.predicted_bound(n):.3e}")
rep = apriori_vs_observed(res.trace, cert, sample_budget=2000)
print("bound holds on sampled triples:", rep.sound, "telescoping:", rep.telescoping_ok)

cd = cauchy_diagnostic(res.trace, 1e-6, limit=res.point)
print("orbit stays within 1e-6 from index", cd.index)
