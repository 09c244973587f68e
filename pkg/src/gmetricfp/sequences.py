"""Prefix checks for alpha-series and lambda-sequences, and tail bounds.

All checks are decisive only for the prefix they see: an accepted
certificate states the partial-sum inequality for every ``L`` up to
``verified_up_to``, nothing more.

Two index conventions are kept apart on purpose:

* alpha-series form: ``sum_{i=1}^{L} a_i <= lam * L`` for ``L >= n_lambda``;
* lambda-sequence form: ``sum_{i=1}^{L-1} d_i <= lam * L`` for
  ``L >= n_lambda + 1``, where ``d_i`` is the distance between consecutive
  terms.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ParameterError
from .gmetric_core import GSpace, max_pairing

TAU_SEQ = 1e-12
LAMBDA_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))


def as_sequence(values) -> np.ndarray:
    """Validate a finite prefix of nonnegative reals and return it as an array."""
    arr = np.asarray(values, dtype=float).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise ParameterError("sequence values must be finite")
    if np.any(arr < 0):
        raise ParameterError("sequence values must be nonnegative")
    return arr


@dataclass
class LambdaCertificate:
    lam: float
    n_lambda: int
    verified_up_to: int
    verdict: str
    witness: Optional[int] = None
    form: str = "alpha"

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"

    def to_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "n_lambda": self.n_lambda,
            "verified_up_to": self.verified_up_to,
            "verdict": self.verdict,
            "witness": self.witness,
            "form": self.form,
        }


def _check_lam(lam):
    if not 0 < lam < 1:
        raise ParameterError(f"lambda must lie in (0, 1), got {lam}")


def _exceeds(partial, bound):
    return partial > bound + TAU_SEQ * (1.0 + np.abs(bound))


def check_alpha_series(seq, lam: float, n_lambda: int, L_max: Optional[int] = None) -> LambdaCertificate:
    """Check ``sum_{i=1}^{L} a_i <= lam * L`` for every ``L`` in ``[n_lambda, L_max]``.

    Rejection reports the smallest failing ``L``.  ``L_max`` defaults to the
    prefix length.
    """
    _check_lam(lam)
    a = as_sequence(seq)
    L_max = len(a) if L_max is None else int(L_max)
    if n_lambda < 1 or L_max < n_lambda:
        raise ParameterError("need 1 <= n_lambda <= L_max")
    if L_max > len(a):
        raise ParameterError(f"L_max={L_max} exceeds the prefix length {len(a)}")
    partial = np.cumsum(a[:L_max])
    L = np.arange(1, L_max + 1)
    bad = np.flatnonzero(_exceeds(partial, lam * L) & (L >= n_lambda))
    if bad.size:
        return LambdaCertificate(lam, n_lambda, L_max, "rejected", int(L[bad[0]]), "alpha")
    return LambdaCertificate(lam, n_lambda, L_max, "accepted", None, "alpha")


def check_lambda_sequence(
    orbit_distances, lam: float, n_lambda: int, L_max: Optional[int] = None
) -> LambdaCertificate:
    """Check ``sum_{i=1}^{L-1} d_i <= lam * L`` for every ``L`` in ``[n_lambda + 1, L_max]``.

    ``orbit_distances[i-1]`` holds ``d_i``; ``L_max`` defaults to
    ``len(orbit_distances) + 1``.
    """
    _check_lam(lam)
    d = as_sequence(orbit_distances)
    L_max = len(d) + 1 if L_max is None else int(L_max)
    if n_lambda < 1 or L_max < n_lambda + 1:
        raise ParameterError("need 1 <= n_lambda and L_max >= n_lambda + 1")
    if L_max - 1 > len(d):
        raise ParameterError(f"L_max={L_max} needs {L_max - 1} distances, have {len(d)}")
    partial = np.concatenate([[0.0], np.cumsum(d[: L_max - 1])])  # partial[L-1] = sum to L-1
    L = np.arange(1, L_max + 1)
    bad = np.flatnonzero(_exceeds(partial, lam * L) & (L >= n_lambda + 1))
    if bad.size:
        return LambdaCertificate(lam, n_lambda, L_max, "rejected", int(L[bad[0]]), "lambda")
    return LambdaCertificate(lam, n_lambda, L_max, "accepted", None, "lambda")


def _search(partial, L, offset, grid, n_max):
    for lam in grid:
        bad = np.flatnonzero(_exceeds(partial, lam * L))
        # smallest threshold whose window avoids every failure
        n = 1 if bad.size == 0 else int(L[bad[-1]]) + 1 - offset
        n = max(n, 1)
        if n <= n_max:
            return lam, n
    return None


def find_alpha_certificate(seq, L_max=None, grid=LAMBDA_GRID) -> Optional[LambdaCertificate]:
    """Smallest ``(lam, n_lambda)`` on the grid accepted by :func:`check_alpha_series`.

    ``n_lambda`` is searched in ``1..L_max // 2``.  Returns ``None`` when no
    grid pair works.
    """
    a = as_sequence(seq)
    L_max = len(a) if L_max is None else int(L_max)
    if L_max < 1 or L_max > len(a):
        raise ParameterError("invalid L_max")
    partial = np.cumsum(a[:L_max])
    found = _search(partial, np.arange(1, L_max + 1), 0, grid, max(1, L_max // 2))
    if found is None:
        return None
    return check_alpha_series(a, found[0], found[1], L_max)


def find_lambda_certificate(orbit_distances, L_max=None, grid=LAMBDA_GRID) -> Optional[LambdaCertificate]:
    """Grid search counterpart of :func:`find_alpha_certificate` for the lambda-sequence form."""
    d = as_sequence(orbit_distances)
    L_max = len(d) + 1 if L_max is None else int(L_max)
    if L_max < 2 or L_max - 1 > len(d):
        raise ParameterError("invalid L_max")
    partial = np.concatenate([[0.0], np.cumsum(d[: L_max - 1])])
    L = np.arange(1, L_max + 1)
    # L = 1 has an empty sum and never fails
    found = _search(partial[1:], L[1:], 1, grid, max(1, L_max // 2))
    if found is None:
        return None
    return check_lambda_sequence(d, found[0], found[1], L_max)


def lambda_to_alpha(lam: float, n_lambda: int) -> tuple[float, int]:
    """Alpha-series parameters implied by a lambda-sequence certificate.

    From ``sum_{i<=L-1} d_i <= lam * L`` for ``L >= n + 1`` one gets
    ``sum_{i<=L} d_i <= lam * (L + 1) <= lam * (n + 2) / (n + 1) * L`` for
    ``L >= n + 1``.  The same ``lam`` does not carry over in general.
    Raises when the inflated constant reaches 1.
    """
    _check_lam(lam)
    shifted = lam * (n_lambda + 2) / (n_lambda + 1)
    if shifted >= 1:
        raise ParameterError(f"lambda={lam} with n_lambda={n_lambda} gives no alpha-series constant below 1")
    return shifted, n_lambda + 1


def max_pairing_distances(values) -> np.ndarray:
    """``m(x_i, x_{i+1})`` for consecutive terms under the max pairing."""
    x = as_sequence(values)
    return np.array([max_pairing(a, b) for a, b in zip(x[:-1], x[1:])])


def beta_from_orbit(space: GSpace, orbit: Sequence) -> np.ndarray:
    """``beta_i = G(x_i, x_{i+1}, x_{i+1})`` along ``orbit``."""
    if len(orbit) < 2:
        raise ParameterError("orbit needs at least two points")
    return np.array([space.g(a, b, b) for a, b in zip(orbit[:-1], orbit[1:])])


def amgm_tail_bound(r_prefix, lam: float, n: int, l: Optional[int] = None, base: float = 1.0) -> float:
    """Upper bound on ``G(x_n, x_m, x_l)`` from an alpha-series rate certificate.

    Returns ``min(sum_{k=n}^{l-2} lam^k, lam^n / (1 - lam)) * base``;
    ``l=None`` gives the tail form.  ``r_prefix`` is checked against the
    averaged rate condition ``(1/k) sum_{i<=k} r_i <= lam`` for each ``k``
    of the window that it covers, since the bound rests on it.
    """
    _check_lam(lam)
    if n < 1:
        raise ParameterError("n must be at least 1")
    if base < 0:
        raise ParameterError("base must be nonnegative")
    r = as_sequence(r_prefix)
    top = len(r) if l is None else min(len(r), l - 2)
    if top >= n:
        k = np.arange(1, top + 1)
        avg = np.cumsum(r[:top]) / k
        bad = np.flatnonzero(_exceeds(avg, np.full(top, lam)) & (k >= n))
        if bad.size:
            raise ParameterError(f"rate prefix violates the lambda bound at k={int(k[bad[0]])}")
    tail = lam**n / (1.0 - lam)
    if l is None:
        return tail * base
    if l <= n:
        raise ParameterError("need l > n")
    finite = math.fsum(lam**k for k in range(n, l - 1))
    return min(finite, tail) * base


def product_tail_bound(r_prefix, n: int, l: int, base: float = 1.0) -> float:
    """Sharper bound ``sum_{k=n}^{l-2} prod_{i<=k} r_i * base`` before averaging."""
    r = as_sequence(r_prefix)
    if l - 2 > len(r):
        raise ParameterError("rate prefix too short")
    prods = np.cumprod(r[: l - 2])
    return float(np.sum(prods[n - 1 : l - 2])) * base
