import numpy as np
import pytest

from gmetricfp import (
    DomainError,
    FiniteGSpace,
    Interval,
    ParameterError,
    check_axioms,
    check_symmetric,
    discrete_g,
    from_metric_max,
    from_metric_sum,
    real_max_space,
    real_sum_space,
)
from gmetricfp.gmetric_core import check_axioms_batch


def test_sum_construction_value():
    assert real_sum_space()(0, 1, 2) == 4.0


def test_diagonal_is_zero():
    for space in (real_sum_space(), real_max_space(), discrete_g(3)):
        pt = 1
        assert space(pt, pt, pt) == 0.0


def test_discrete_values():
    assert discrete_g(2)(0, 0, 1) == 1.0
    sp = discrete_g(["p", "q"])
    assert sp.g(0, 1, 1) == 1.0
    assert sp.labels == ["p", "q"]


def test_pointwise_constructions():
    assert real_sum_space()(1, 1, 1) == 0.0
    assert real_max_space()(0, 1, 3) == 3.0


def test_point_outside_carrier():
    sp = from_metric_sum(lambda x, y: abs(x - y), Interval(0, 1))
    with pytest.raises(DomainError):
        sp(0.5, 2.0, 0.1)
    with pytest.raises(DomainError):
        discrete_g(2)(0, 1, 2)


def test_empty_carrier():
    with pytest.raises(DomainError):
        FiniteGSpace([], np.zeros((0, 0, 0)))
    with pytest.raises(DomainError):
        discrete_g(0)


def test_sampled_sum_construction_passes():
    sp = from_metric_sum(lambda x, y: abs(x - y), Interval(-10, 10))
    rep = check_axioms(sp, 2000, seed=1)
    assert rep.passed and not rep.exhaustive


def test_zero_table_fails_g2():
    sp = FiniteGSpace([0, 1], np.zeros((2, 2, 2)))
    rep = check_axioms(sp)
    assert not rep.verdicts["G2"]
    x, x2, y = rep.violations["G2"][0]
    assert x == x2 and x != y


def test_max_construction_five_points_exhaustive():
    pts = np.array([0.0, 1.0, 2.5, 4.0, 7.0])
    d = np.abs(pts[:, None] - pts[None, :])
    rep = check_axioms(from_metric_max(d, list(range(5))), sample_budget=625)
    assert rep.passed and rep.exhaustive


def test_matrix_and_callable_metrics_agree():
    d = np.array([[0, 1, 2], [1, 0, 3], [2, 3, 0]], dtype=float)
    for build in (from_metric_sum, from_metric_max):
        a = build(d, ["a", "b", "c"])
        b = build(lambda x, y: d["abc".index(x), "abc".index(y)], ["a", "b", "c"])
        assert np.array_equal(a.table, b.table)


def test_symmetry_reports():
    assert check_symmetric(real_sum_space()).symmetric
    assert check_symmetric(discrete_g(1)).symmetric
    # G(x,y,y) = 1 and G(x,x,y) = 2; the other nonzero entries are G(0,1,1)=1, G(0,0,1)=2
    sp = FiniteGSpace.from_entries([0, 1], [(0, 0, 0, 0), (0, 0, 1, 2), (0, 1, 1, 1), (1, 1, 1, 0)])
    assert check_axioms(sp).passed
    rep = check_symmetric(sp)
    assert not rep.symmetric
    assert (0, 1) in [tuple(w) for w in rep.witnesses]


def test_from_entries_validation():
    with pytest.raises(ParameterError):
        FiniteGSpace.from_entries([0, 1], [(0, 0, 0, 0), (0, 0, 1, 1), (1, 1, 1, 0)])
    with pytest.raises(ParameterError):
        FiniteGSpace.from_entries([0, 1], [(0, 0, 0, 0), (1, 0, 0, 1), (0, 1, 1, 1), (1, 1, 1, 0)])
    with pytest.raises(ParameterError):
        FiniteGSpace.from_entries([0], [(0, 0, 0, -1)])


def test_from_raw_rejects_asymmetric_table():
    t = np.ones((2, 2, 2))
    t[0, 0, 0] = t[1, 1, 1] = 0
    t[0, 0, 1] = 3
    with pytest.raises(ParameterError):
        FiniteGSpace.from_raw([0, 1], t)


def test_table_is_read_only():
    sp = discrete_g(2)
    with pytest.raises(ValueError):
        sp.table[0, 0, 1] = 5


def test_batch_matches_single_checks():
    rng = np.random.default_rng(3)
    tables = []
    for _ in range(40):
        entries = {(i, j, k): float(rng.integers(0, 3)) for i in range(3) for j in range(i, 3) for k in range(j, 3)}
        tables.append(FiniteGSpace.from_entries([0, 1, 2], entries))
    verdicts = check_axioms_batch(np.stack([s.table for s in tables]))
    for sp, row in zip(tables, verdicts):
        rep = check_axioms(sp)
        assert list(row) == [rep.verdicts[a] for a in ("G1", "G2", "G3", "G4", "G5")]


def test_sampled_check_is_seeded():
    sp = real_max_space()
    a = check_axioms(sp, 500, seed=7).to_dict()
    b = check_axioms(sp, 500, seed=7).to_dict()
    assert a == b


def test_bad_budget():
    with pytest.raises(ParameterError):
        check_axioms(discrete_g(2), 0)
