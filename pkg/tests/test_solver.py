import numpy as np
import pytest

from gmetricfp import (
    CoefficientSchedule,
    DomainError,
    HypothesisError,
    Interval,
    ModeError,
    NonConvergenceError,
    ParameterError,
    StaleHypothesesError,
    affine_family,
    apriori_vs_observed,
    cauchy_diagnostic,
    check_hypotheses,
    constant_family,
    discrete_g,
    fixed_point_transfer,
    from_metric_sum,
    identity_phi,
    picard_orbit,
    real_sum_space,
    solve_common_fixed_point,
    table_family,
    uniqueness_probe,
)
from gmetricfp.contractions import repeated_family
from gmetricfp.solver import ConvergenceCertificate, OrbitTrace, build_certificate


@pytest.fixture
def line():
    return real_sum_space()


@pytest.fixture
def halving():
    return affine_family([(0.5, 0.0)])


@pytest.fixture
def banach():
    return CoefficientSchedule.constant(0.6, 0.0)


def test_halving_orbit_closed_form(line, halving):
    tr = picard_orbit(line, halving, 1.0, tol=1e-6)
    assert tr.termination == "converged"
    n = np.arange(len(tr.points))
    assert np.array_equal(tr.points, 2.0**-n)
    assert np.allclose(tr.step_distances, 2 * 2.0 ** -(n[:-1] + 1), rtol=1e-15, atol=0)
    assert tr.verify(halving)


def test_identity_orbit_stops_at_first_step(line):
    tr = picard_orbit(line, affine_family([(1.0, 0.0)]), 3.0)
    assert tr.termination == "converged" and tr.steps == 1 and tr.step_distances[0] == 0.0


def test_two_cycle_detected():
    sp = discrete_g(2)
    tr = picard_orbit(sp, table_family(sp, [[1, 0]]), 0)
    assert tr.termination == "cycle_detected"
    assert tr.points[:3] == [0, 1, 0]


def test_budget_exhausted(line):
    tr = picard_orbit(line, affine_family([(1.0, 1.0)]), 0.0, max_steps=5)
    assert tr.termination == "budget_exhausted" and tr.steps == 5


def test_orbit_domain_and_parameters():
    sp = from_metric_sum(lambda x, y: abs(x - y), Interval(0.0, 1.0))
    with pytest.raises(DomainError):
        picard_orbit(sp, affine_family([(0.5, 0.0)]), 2.0)
    with pytest.raises(ParameterError):
        picard_orbit(sp, affine_family([(0.5, 0.0)]), 0.5, p=0)


def test_index_wrap_recorded(line):
    fam = affine_family([(0.5, 0.0), (0.9, 0.0)])
    tr = picard_orbit(line, fam, 1.0, max_steps=6, tol=0.0)
    assert tr.indices == [1, 2, 1, 2, 1, 2] and tr.wrapped


def test_solve_halving_banach(line, halving, banach):
    F = identity_phi()
    hyp = check_hypotheses(line, halving, banach, F)
    assert hyp.holds
    res, cert = solve_common_fixed_point(line, halving, banach, 1.0, F, hypotheses=hyp)
    assert abs(res.point) < 1e-8 and max(res.residuals) <= 1e-8
    assert cert.sound and cert.lam == 0.6
    assert res.transfer_flag


def test_solve_constant_family(line):
    fam = constant_family(2.5, index_cap=3)
    sched = CoefficientSchedule.constant(0.3, 0.1)
    hyp = check_hypotheses(line, fam, sched)
    res, cert = solve_common_fixed_point(line, fam, sched, -4.0, hypotheses=hyp)
    assert res.point == 2.5 and res.trace.points[1] == 2.5
    assert cert.sound and cert.base == line(-4.0, 2.5, 2.5) == 13.0


def test_solve_abbas_quarter_cycle():
    sp = from_metric_sum(lambda x, y: abs(x - y), Interval(0.0, 1.0))
    fam = affine_family([(0.25, 0.0)] * 3)
    sched = CoefficientSchedule.constant(0.3, 0.01, 0.01)
    hyp = check_hypotheses(sp, fam, sched, mode="abbas")
    assert hyp.holds and hyp.nonincreasing
    res, cert = solve_common_fixed_point(sp, fam, sched, 1.0, mode="abbas", hypotheses=hyp)
    assert abs(res.point) < 1e-8 and cert.sound


def test_staleness(line, halving, banach):
    with pytest.raises(StaleHypothesesError):
        solve_common_fixed_point(line, halving, banach, 1.0)
    hyp = check_hypotheses(line, halving, banach)
    other = CoefficientSchedule.constant(0.6, 0.0)
    with pytest.raises(StaleHypothesesError):
        solve_common_fixed_point(line, halving, other, 1.0, hypotheses=hyp)


def test_failed_hypotheses_block_solve(line, banach):
    fam = affine_family([(1.0, 0.0)])
    hyp = check_hypotheses(line, fam, banach)
    assert not hyp.holds
    with pytest.raises(HypothesisError):
        solve_common_fixed_point(line, fam, banach, 1.0, hypotheses=hyp)


def test_nonconvergence_carries_trace(line, halving, banach):
    hyp = check_hypotheses(line, halving, banach)
    with pytest.raises(NonConvergenceError) as err:
        solve_common_fixed_point(line, halving, banach, 1.0, hypotheses=hyp, max_steps=3)
    assert err.value.trace.steps == 3


def test_mode_gates(line, halving, banach):
    with pytest.raises(ModeError):
        check_hypotheses(line, halving, banach, mode="abbas")
    sched = CoefficientSchedule.constant(0.3, 0.01, 0.01)
    with pytest.raises(ModeError):
        check_hypotheses(line, halving, sched, identity_phi(), mode="abbas")
    with pytest.raises(ModeError):
        check_hypotheses(line, halving, sched, mode="abbas_phi")


def test_halving_certificate_against_closed_form(line, halving, banach):
    hyp = check_hypotheses(line, halving, banach)
    tr = picard_orbit(line, halving, 1.0, max_steps=40, tol=0.0)
    cert = build_certificate(tr, halving, hyp.rate_certificate)
    assert cert.base == line(1.0, 0.5, 0.25) == 1.5
    rep = apriori_vs_observed(tr, cert, sample_budget=20000)
    assert rep.sound and rep.telescoping_ok and rep.checked == 9880
    # G(x_n, x_m, x_l) = 2 (2^-n - 2^-l) in closed form
    for n, m, l in [(1, 2, 3), (5, 9, 40), (30, 31, 32)]:
        assert tr.g(n, m, l) == pytest.approx(2 * (2.0**-n - 2.0**-l), rel=1e-12)


def test_constant_orbit_sound(line):
    tr = OrbitTrace.from_points(line, [1.0] * 10)
    cert = ConvergenceCertificate(0.5, 1, 0.0, 0.0, {}, True)
    rep = apriori_vs_observed(tr, cert)
    assert rep.sound


def test_fabricated_certificate_detected(line):
    tr = OrbitTrace.from_points(line, [float(n) for n in range(20)])
    cert = ConvergenceCertificate(0.5, 1, line(0.0, 1.0, 2.0), line(0.0, 1.0, 2.0), {}, True)
    rep = apriori_vs_observed(tr, cert)
    assert not rep.sound and rep.violations


def test_short_trace_rejected(line):
    tr = OrbitTrace.from_points(line, [1.0, 0.5])
    with pytest.raises(ParameterError):
        apriori_vs_observed(tr, ConvergenceCertificate(0.5, 1, 1.0, 1.0, {}, True))


def test_uniqueness_halving(line, halving, banach):
    hyp = check_hypotheses(line, halving, banach)
    v = uniqueness_probe(line, halving, banach, [-1.0, 0.7, 1.0], hypotheses=hyp)
    assert v.unique and not v.degenerate and len(v.clusters) == 1


def test_uniqueness_single_start(line, halving, banach):
    hyp = check_hypotheses(line, halving, banach)
    v = uniqueness_probe(line, halving, banach, [0.3], hypotheses=hyp)
    assert v.unique and v.degenerate


def test_uniqueness_identity_two_clusters(line, banach):
    fam = affine_family([(1.0, 0.0)])
    assert not check_hypotheses(line, fam, banach).holds
    v = uniqueness_probe(line, fam, banach, [0.0, 1.0], enforce=False)
    assert not v.unique and v.clusters == [[0], [1]]


def test_uniqueness_names_failing_start(line, halving, banach):
    hyp = check_hypotheses(line, halving, banach)
    with pytest.raises(NonConvergenceError, match="start 5.0"):
        uniqueness_probe(line, halving, banach, [0.0, 5.0], hypotheses=hyp, max_steps=2)


def test_transfer_examples(line, halving):
    assert fixed_point_transfer(line, halving, 0.0).holds
    v = fixed_point_transfer(line, affine_family([(1.0, 0.0), (0.5, 0.0)]), 1.0)
    assert not v.holds and v.anchor == 1 and v.witness == 2
    assert fixed_point_transfer(line, constant_family(2.0, 4), 2.0).holds
    with pytest.raises(ParameterError):
        fixed_point_transfer(line, halving, 1.0)
    sp = from_metric_sum(lambda x, y: abs(x - y), Interval(0.0, 1.0))
    with pytest.raises(DomainError):
        fixed_point_transfer(sp, halving, 3.0)


def test_cauchy_examples(line, halving):
    tr = picard_orbit(line, halving, 1.0, max_steps=60, tol=0.0)
    assert cauchy_diagnostic(tr, 0.1).index == 5
    rep = cauchy_diagnostic(OrbitTrace.from_points(line, [2.0] * 5), 1e-9, limit=2.0)
    assert rep.index == 0 and rep.limit_checks["G(x,x_n,x_n)_last"] == 0.0
    sp = discrete_g(2)
    cyc = OrbitTrace.from_points(sp, [0, 1] * 5)
    assert cauchy_diagnostic(cyc, 0.5).index is None


def test_power_solve_matches(line):
    fam = affine_family([(-0.8, 0.9)])
    sched = CoefficientSchedule.constant(0.7, 0.0)
    hyp = check_hypotheses(line, fam, sched, p=2)
    assert hyp.holds
    res, _ = solve_common_fixed_point(line, fam, sched, 3.0, p=2, hypotheses=hyp)
    assert res.point == pytest.approx(0.5, abs=1e-9)


def test_repeated_family_solve(line):
    fam = repeated_family(lambda x: 0.5 * x + 1.0, index_cap=4)
    sched = CoefficientSchedule.constant(0.5, 0.0, index_cap=4)
    hyp = check_hypotheses(line, fam, sched)
    res, cert = solve_common_fixed_point(line, fam, sched, 0.0, hypotheses=hyp)
    assert res.point == pytest.approx(2.0, abs=1e-9) and cert.sound
