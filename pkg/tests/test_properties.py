import itertools
import math

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gmetricfp import (
    CoefficientSchedule,
    FiniteGSpace,
    ParameterError,
    affine_family,
    amgm_tail_bound,
    check_alpha_series,
    check_axioms,
    check_condition_vetro,
    check_lambda_sequence,
    from_metric_max,
    from_metric_sum,
    identity_phi,
    lambda_to_alpha,
    picard_orbit,
    power_family,
    r_abbas,
    real_sum_space,
)
from gmetricfp.contractions import abbas_hypothesis_value, root_phi

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)
unit = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
lam_st = st.floats(min_value=0.05, max_value=0.95)


@given(st.lists(st.integers(-10**6, 10**6), min_size=1, max_size=5, unique=True))
def test_line_metrics_give_gmetrics(xs):
    # integer points keep |x - y| and the sums exact, as the finite checks are exact
    pts = np.array(xs, dtype=float)
    d = np.abs(pts[:, None] - pts[None, :])
    for build in (from_metric_sum, from_metric_max):
        sp = build(d, list(range(len(xs))))
        assert check_axioms(sp, len(xs) ** 4).passed


@given(st.lists(st.integers(0, 4), min_size=10, max_size=10))
def test_tables_are_permutation_invariant(vals):
    canon = list(itertools.combinations_with_replacement(range(3), 3))
    sp = FiniteGSpace.from_entries([0, 1, 2], dict(zip(canon, map(float, vals))))
    for x, y, z in itertools.product(range(3), repeat=3):
        assert len({sp(*p) for p in itertools.permutations((x, y, z))}) == 1


@given(st.lists(st.floats(0, 2), min_size=2, max_size=40), lam_st, st.integers(1, 5))
def test_alpha_verdict_matches_definition(a, lam, n):
    assume(n <= len(a))
    cert = check_alpha_series(a, lam, n)
    partial = np.cumsum(a)
    ok = all(partial[L - 1] <= lam * L * (1 + 1e-12) + 1e-12 for L in range(n, len(a) + 1))
    assert cert.accepted == ok


@given(st.lists(st.floats(0, 2), min_size=2, max_size=40), lam_st, lam_st, st.integers(1, 3))
def test_alpha_monotone_in_lambda(a, l1, l2, n):
    assume(n <= len(a))
    lo, hi = sorted((l1, l2))
    assume(hi < 1)
    if check_alpha_series(a, lo, n).accepted:
        assert check_alpha_series(a, hi, n).accepted


@given(st.lists(st.floats(0, 0.5), min_size=2, max_size=40), st.floats(0.05, 0.6), st.integers(1, 4))
def test_lambda_sequence_implies_shifted_alpha(d, lam, n):
    assume(n + 1 <= len(d) + 1)
    if not check_lambda_sequence(d, lam, n).accepted:
        return
    try:
        lam2, n2 = lambda_to_alpha(lam, n)
    except ParameterError:
        return
    if n2 <= len(d):
        assert check_alpha_series(d, lam2, n2).accepted


@given(st.lists(st.floats(0, 3), min_size=1, max_size=50))
def test_amgm(r):
    r = np.array(r)
    k = len(r)
    prod = math.prod(r)
    mean = r.sum() / k
    assert prod <= mean**k * (1 + 1e-12) + 1e-300


@given(unit, unit, unit)
def test_abbas_rate_below_half(a, b, c):
    assume(abbas_hypothesis_value(a, b, c) < 0.5)
    assert r_abbas(a, b, c) < 0.5


@given(lam_st, st.integers(1, 30), st.floats(0, 10))
def test_tail_bound_dominates_finite_sums(lam, n, base):
    tail = amgm_tail_bound([], lam, n, base=base)
    for l in (n + 1, n + 2, n + 10):
        assert amgm_tail_bound([], lam, n, l, base) <= tail * (1 + 1e-12)


@given(st.floats(-0.95, 0.95), st.floats(-2, 2), st.integers(1, 3), st.integers(1, 3))
def test_power_composition(c, d, p, q):
    fam = affine_family([(c, d)])
    nested = power_family(power_family(fam, p), q)
    direct = power_family(fam, p * q)
    for x in (-1.0, 0.3, 2.0):
        assert math.isclose(nested(1, x), direct(1, x), rel_tol=1e-12, abs_tol=1e-12)


@given(st.lists(st.tuples(st.floats(-0.9, 0.9), st.floats(-1, 1)), min_size=1, max_size=4), finite)
@settings(max_examples=50)
def test_orbit_replays(params, x0):
    fam = affine_family(params)
    tr = picard_orbit(real_sum_space(), fam, x0, max_steps=30)
    assert tr.verify(fam)


@given(st.floats(0.05, 0.9), st.floats(0.01, 10), st.integers(0, 1000))
@settings(max_examples=30, deadline=None)
def test_vetro_verdict_scale_invariant(c, scale, seed):
    sp = real_sum_space()
    fam = affine_family([(c, 0.0)])
    sched = CoefficientSchedule.constant(0.5, 0.1)
    F = root_phi(0.5)
    a = check_condition_vetro(sp, fam, sched, F, triple_samples=200, seed=seed).holds
    b = check_condition_vetro(sp, fam, sched, F.scaled(scale), triple_samples=200, seed=seed).holds
    assert a == b


@given(st.floats(0.05, 0.55), st.integers(0, 50))
@settings(max_examples=30, deadline=None)
def test_halving_like_orbits_obey_tail_bound(c, seed):
    # x -> c x on the line: the constant rate c certifies lambda = c
    sp = real_sum_space()
    fam = affine_family([(c, 0.0)])
    x0 = 1.0 + seed
    tr = picard_orbit(sp, fam, x0, max_steps=25, tol=0.0)
    base = sp(tr.points[0], tr.points[1], tr.points[2])
    for n, m, l in itertools.combinations(range(1, len(tr.points)), 3):
        assert tr.g(n, m, l) <= c**n / (1 - c) * base * (1 + 1e-12) + 1e-12
    assert check_condition_vetro(sp, fam, CoefficientSchedule.constant(c, 0.0), identity_phi(), triple_samples=300).holds


@given(st.lists(finite, min_size=3, max_size=5, unique=True))
def test_sum_tables_symmetric_under_rounding(xs):
    pts = np.array(xs)
    sp = from_metric_sum(np.abs(pts[:, None] - pts[None, :]), list(range(len(xs))))
    assert check_axioms(sp, len(xs) ** 4).verdicts["G4"]
