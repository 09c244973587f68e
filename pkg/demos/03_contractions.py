"""Check contractive conditions for mapping families and the control function class."""
import warnings

from gmetricfp import (
    CoefficientSchedule,
    PhiFunction,
    affine_family,
    check_condition_abbas,
    check_condition_vetro,
    identity_phi,
    phi_membership_check,
    r_abbas,
    r_vetro,
    real_sum_space,
    root_phi,
)

sp = real_sum_space()
fam = affine_family([(0.5, 0.0)])

for delta in (0.6, 0.3):
    rep = check_condition_vetro(sp, fam, CoefficientSchedule.constant(delta, 0.0), identity_phi(), triple_samples=500)
    print(f"halving map, delta={delta}: holds={rep.holds}", "" if rep.holds else f"witness {rep.witnesses[0]}")

sched = CoefficientSchedule.constant(0.3, 0.01, 0.01)
rep = check_condition_abbas(sp, affine_family([(0.25, 0.0)]), sched, triple_samples=500)
print("quarter map, three-coefficient form:", rep.holds)

print(f"rates: r_vetro(0.6, 0)={r_vetro(0.6, 0.0):.3f}  r_abbas(0.3, 0.01, 0.01)={r_abbas(0.3, 0.01, 0.01):.4f}")

for F in (identity_phi(), root_phi(0.5), PhiFunction(lambda t: t * t, 2.0, "square")):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = phi_membership_check(F)
    print(f"{F.name:10s} member={rep.member} failing={[k for k, v in rep.checks.items() if not v]}")
