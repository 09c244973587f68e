import math

import numpy as np
import pytest

from gmetricfp import (
    ParameterError,
    amgm_tail_bound,
    beta_from_orbit,
    check_alpha_series,
    check_lambda_sequence,
    discrete_g,
    find_alpha_certificate,
    find_lambda_certificate,
    lambda_to_alpha,
    real_sum_space,
)
from gmetricfp.sequences import max_pairing_distances, product_tail_bound


def first_failure(partials, lam, Ls):
    """Reference scan: smallest L with partial > lam * L."""
    for L, s in zip(Ls, partials):
        if s > lam * L:
            return L
    return None


def test_constant_below_lambda_accepted():
    cert = check_alpha_series(np.full(100, 0.4), 0.5, 1, 100)
    assert cert.accepted and cert.verified_up_to == 100


@pytest.mark.parametrize("n", [1, 3, 7])
def test_ones_rejected_at_threshold(n):
    cert = check_alpha_series(np.ones(20), 0.9, n)
    assert not cert.accepted and cert.witness == n


def test_inverse_squares_accepted():
    a = 1.0 / np.arange(1, 1001) ** 2
    assert np.cumsum(a).max() < math.pi**2 / 6 < 0.9 * 2
    assert check_alpha_series(a, 0.9, 2, 1000).accepted


def test_lambda_outside_unit_interval():
    for lam in (0.0, 1.0, 1.5, -0.1):
        with pytest.raises(ParameterError):
            check_alpha_series([0.1], lam, 1)
        with pytest.raises(ParameterError):
            check_lambda_sequence([0.1], lam, 1)


def test_zero_distances_accepted():
    for lam in (0.05, 0.5, 0.95):
        assert check_lambda_sequence(np.zeros(30), lam, 1).accepted


def test_halving_orbit_distances():
    d = 2 * 2.0 ** -(np.arange(1, 60) + 1)
    assert check_lambda_sequence(d, 0.5, 1).accepted


def test_constant_distances_first_failure():
    d = np.full(40, 0.9)
    Ls = range(1, 42)
    partials = [0.9 * (L - 1) for L in Ls]
    # smallest failing L once the window starts at n + 1
    for n in (1, 10):
        expected = first_failure([p for L, p in zip(Ls, partials) if L >= n + 1], 0.5, [L for L in Ls if L >= n + 1])
        cert = check_lambda_sequence(d, 0.5, n)
        assert cert.witness == expected
    assert check_lambda_sequence(d, 0.5, 10).witness == 11
    assert check_lambda_sequence(d, 0.5, 1).witness == 3


def test_l_max_bounds():
    with pytest.raises(ParameterError):
        check_alpha_series([0.1, 0.1], 0.5, 1, L_max=5)
    with pytest.raises(ParameterError):
        check_alpha_series([0.1, 0.1], 0.5, 3)
    with pytest.raises(ParameterError):
        check_lambda_sequence([0.1], 0.5, 1, L_max=4)


def test_grid_search_smallest_pair():
    a = np.full(20, 0.4)
    cert = find_alpha_certificate(a)
    assert (cert.lam, cert.n_lambda) == (0.4, 1)
    # front-loaded mass: lambda 0.05 would need n = 60 > L_max // 2
    a = np.concatenate([[3.0], np.zeros(99)])
    cert = find_alpha_certificate(a)
    assert cert.accepted and (cert.lam, cert.n_lambda) == (0.1, 30)
    assert not check_alpha_series(a, 0.1, 29).accepted
    assert find_alpha_certificate(np.ones(10)) is None


def test_lambda_grid_search():
    d = np.ones(30)
    assert find_lambda_certificate(d) is None
    d = np.full(30, 0.3)
    cert = find_lambda_certificate(d)
    assert cert.accepted and cert.lam == 0.3


def test_lambda_to_alpha_shift():
    lam, n = lambda_to_alpha(0.5, 1)
    assert (lam, n) == (0.75, 2)
    with pytest.raises(ParameterError):
        lambda_to_alpha(0.7, 1)


def test_beta_examples():
    sp = real_sum_space()
    assert list(beta_from_orbit(sp, [3.0, 3.0, 3.0])) == [0.0, 0.0]
    assert list(beta_from_orbit(sp, [1.0, 0.5, 0.25])) == [1.0, 0.5]
    assert list(beta_from_orbit(discrete_g(2), [0, 1])) == [1.0]
    with pytest.raises(ParameterError):
        beta_from_orbit(sp, [1.0])


def test_max_pairing():
    assert list(max_pairing_distances([3.0, 2.0, 2.0, 1.0])) == [3.0, 2.0, 2.0]


def test_tail_bound_examples():
    assert amgm_tail_bound([], 0.5, 4) == pytest.approx(0.125, rel=1e-15)
    for n in range(1, 6):
        assert amgm_tail_bound([], 0.5, n, base=0.0) == 0.0
    assert amgm_tail_bound([0.5, 0.5], 0.5, 1, l=3, base=2.0) == pytest.approx(1.0, rel=1e-15)


def test_tail_bound_rejects_bad_prefix():
    with pytest.raises(ParameterError):
        amgm_tail_bound([0.9, 0.9], 0.5, 1)
    with pytest.raises(ParameterError):
        amgm_tail_bound([], 1.0, 1)
    with pytest.raises(ParameterError):
        amgm_tail_bound([], 0.5, 0)


def test_product_bound_below_averaged_bound():
    r = np.array([0.2, 0.7, 0.1, 0.5, 0.4, 0.3])
    lam = 0.45
    assert check_alpha_series(r, lam, 1).accepted
    assert product_tail_bound(r, 1, 8) <= amgm_tail_bound(r, lam, 1, 8) + 1e-15
