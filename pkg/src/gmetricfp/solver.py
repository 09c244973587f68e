"""Picard-type iteration ``x_n = T_n(x_{n-1})`` with convergence certificates.

The solver is gated: :func:`solve_common_fixed_point` only runs on a
:class:`Hypotheses` object produced by :func:`check_hypotheses` for the very
same space, family, schedule, ``F``, mode and power.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .contractions import (
    ABBAS_THRESHOLD,
    CoefficientSchedule,
    ConditionReport,
    MappingFamily,
    PhiFunction,
    check_condition_abbas,
    check_condition_vetro,
    identity_phi,
    leq,
    power_family,
    rate_sequence,
)
from .errors import (
    HypothesisError,
    ModeError,
    NonConvergenceError,
    ParameterError,
    SingularityError,
    StaleHypothesesError,
)
from .gmetric_core import GSpace
from .sequences import (
    LambdaCertificate,
    find_alpha_certificate,
    find_lambda_certificate,
    max_pairing_distances,
)

TAU_FIX = 1e-8
TAU_SAME = 1e-6
DEFAULT_TOL = 1e-12
DEFAULT_MAX_STEPS = 10_000
STOP_WINDOW = 3
MODES = ("vetro", "abbas", "abbas_phi")


@dataclass
class OrbitTrace:
    """Orbit ``x_0..x_N`` with ``step_distances[i] = G(x_i, x_{i+1}, x_{i+1})``.

    ``indices[n-1]`` is the (wrapped) family index used to produce ``x_n``.
    """

    space: GSpace
    points: list
    indices: list
    step_distances: np.ndarray
    termination: str
    p: int = 1
    wrapped: bool = False
    triple_distances: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.points)

    @property
    def steps(self) -> int:
        return len(self.points) - 1

    @property
    def last(self):
        return self.points[-1]

    @classmethod
    def from_points(cls, space: GSpace, points: Sequence, termination: str = "external"):
        pts = list(points)
        beta = np.array([space.g(a, b, b) for a, b in zip(pts[:-1], pts[1:])])
        return cls(space, pts, [], beta, termination)

    def verify(self, family: MappingFamily) -> bool:
        """Re-run every recorded step and compare points and distances exactly."""
        g = self.space.g
        for n in range(1, len(self.points)):
            if family.apply_power(n, self.points[n - 1], self.p) != self.points[n]:
                return False
            a, b = self.points[n - 1], self.points[n]
            if g(a, b, b) != self.step_distances[n - 1]:
                return False
        return True

    def g(self, n: int, m: int, l: int) -> float:
        key = (n, m, l)
        if key not in self.triple_distances:
            self.triple_distances[key] = self.space.g(self.points[n], self.points[m], self.points[l])
        return self.triple_distances[key]


def _is_common_fixed(space, family, x, p):
    return all(space.same(family.apply_power(j, x, p), x) for j in range(1, family.index_cap + 1))


def picard_orbit(
    space: GSpace,
    family: MappingFamily,
    x0,
    max_steps: int = DEFAULT_MAX_STEPS,
    tol: float = DEFAULT_TOL,
    p: int = 1,
    window: int = STOP_WINDOW,
) -> OrbitTrace:
    """Iterate ``x_n = T_n^p(x_{n-1})``.

    Stops as ``converged`` when ``window`` consecutive steps fall below
    ``tol`` or when a step is exactly zero at a point fixed by every map;
    as ``cycle_detected`` when a finite carrier revisits a (point, phase)
    state; as ``budget_exhausted`` otherwise.  Indices past ``index_cap``
    wrap and the trace records it.
    """
    space.check_point(x0)
    if max_steps < 1:
        raise ParameterError("max_steps must be positive")
    if p < 1:
        raise ParameterError("p must be a positive integer")
    g = space.g
    cap = family.index_cap
    points, indices, betas = [x0], [], []
    seen = {(x0, 0)} if space.finite else None
    x = x0
    streak = 0
    termination = "budget_exhausted"
    for n in range(1, max_steps + 1):
        idx = family.wrapped_index(n)
        y = family.apply_power(idx, x, p)
        space.check_point(y)
        beta = g(x, y, y)
        points.append(y)
        indices.append(idx)
        betas.append(beta)
        if beta == 0 and _is_common_fixed(space, family, y, p):
            termination = "converged"
            break
        streak = streak + 1 if beta < tol else 0
        if streak >= window:
            termination = "converged"
            break
        if seen is not None:
            state = (y, n % cap)
            if state in seen:
                termination = "cycle_detected"
                break
            seen.add(state)
        x = y
    return OrbitTrace(
        space, points, indices, np.array(betas), termination, p=p, wrapped=len(points) - 1 > cap
    )


# --------------------------------------------------------------------------- hypotheses


@dataclass
class Hypotheses:
    mode: str
    p: int
    condition: ConditionReport
    rates: np.ndarray
    rate_certificate: Optional[LambdaCertificate]
    lambda_certificate: Optional[LambdaCertificate]
    nonincreasing: Optional[bool]
    reasons: list
    key: tuple = field(repr=False, default=())

    @property
    def holds(self) -> bool:
        return not self.reasons

    def to_dict(self):
        return {
            "mode": self.mode,
            "p": self.p,
            "holds": self.holds,
            "reasons": list(self.reasons),
            "condition": self.condition.to_dict(),
            "rates_head": [float(r) for r in self.rates[:8]],
            "rate_certificate": None if self.rate_certificate is None else self.rate_certificate.to_dict(),
            "lambda_certificate": None if self.lambda_certificate is None else self.lambda_certificate.to_dict(),
            "nonincreasing": self.nonincreasing,
        }


def _key(space, family, sched, F, mode, p):
    return (id(space), id(family), id(sched), id(F), mode, p)


def check_hypotheses(
    space: GSpace,
    family: MappingFamily,
    sched: CoefficientSchedule,
    F: Optional[PhiFunction] = None,
    mode: str = "vetro",
    p: int = 1,
    triple_samples: int = 4000,
    seed: int = 0,
    n_terms: Optional[int] = None,
    threshold: float = ABBAS_THRESHOLD,
) -> Hypotheses:
    """Run the contraction check and the rate-sequence test for one configuration.

    ``vetro`` needs the rates to form an alpha-series.  The ``abbas`` modes
    need them to be non-increasing and a lambda-sequence under the max
    pairing; an alpha-series certificate is also searched, since the tail
    bound is stated with one.
    """
    if mode not in MODES:
        raise ModeError(f"unknown mode {mode!r}")
    if mode == "abbas_phi" and F is None:
        raise ModeError("abbas_phi needs a Phi function")
    if mode == "abbas" and F is not None:
        raise ModeError("abbas mode takes no Phi function; use abbas_phi")
    reasons = []
    if mode == "vetro":
        cond = check_condition_vetro(space, family, sched, F, p, triple_samples, seed)
    else:
        cond = check_condition_abbas(space, family, sched, F, p, triple_samples, seed, threshold)
    if not cond.holds:
        reasons.append("contraction condition fails")
    if not cond.hypothesis_ok:
        reasons.append(f"coefficient hypothesis fails (max {cond.hypothesis_max:.6g} >= {threshold})")
    s = 1.0 if F is None else F.degree
    n_terms = n_terms or max(2 * family.index_cap, 64)
    try:
        rates = rate_sequence(sched, mode, s, n_terms)
    except SingularityError as exc:
        rates = np.array([])
        reasons.append(f"rate singular: {exc}")
    rate_cert = lam_cert = None
    noninc = None
    if rates.size:
        rate_cert = find_alpha_certificate(rates)
        if mode == "vetro":
            if rate_cert is None:
                reasons.append("rate sequence is not an alpha-series on the prefix")
        else:
            noninc = bool(np.all(np.diff(rates) <= 0))
            lam_cert = find_lambda_certificate(max_pairing_distances(rates))
            if not noninc:
                reasons.append("rate sequence is not non-increasing")
            if lam_cert is None:
                reasons.append("rate sequence is not a lambda-sequence under the max pairing")
            if rate_cert is None:
                reasons.append("rate sequence admits no alpha-series certificate on the prefix")
    return Hypotheses(mode, p, cond, rates, rate_cert, lam_cert, noninc, reasons, _key(space, family, sched, F, mode, p))


# --------------------------------------------------------------------------- certificates


@dataclass
class ConvergenceCertificate:
    lam: float
    n_lambda: int
    base: float
    F_base: float
    observed_max: dict
    sound: bool
    phi_name: str = "identity"

    def predicted_bound(self, n: int) -> float:
        """Bound on ``F(G(x_n, x_m, x_l))`` for ``n >= n_lambda``."""
        return self.lam**n / (1.0 - self.lam) * self.F_base

    def to_dict(self):
        return {
            "lambda": self.lam,
            "n_lambda": self.n_lambda,
            "base": self.base,
            "F_base": self.F_base,
            "phi": self.phi_name,
            "sound": self.sound,
            "observed_max": {str(k): v for k, v in sorted(self.observed_max.items())},
            "predicted_bound": {str(k): self.predicted_bound(k) for k in sorted(self.observed_max)},
        }


def _sample_triples(N, budget, seed, n_min=0):
    """``(n, m, l)`` with ``n_min <= n < m < l <= N``: all of them if they fit, else sampled."""
    count = math.comb(N - n_min + 1, 3) if N - n_min + 1 >= 3 else 0
    if count == 0:
        return []
    if count <= budget:
        return list(itertools.combinations(range(n_min, N + 1), 3))
    rng = np.random.default_rng(seed)
    out = set()
    # every n gets its widest triple so each tail has at least one witness
    for n in range(n_min, N - 1):
        out.add((n, n + 1, N))
    while len(out) < budget:
        n, m, l = sorted(rng.choice(np.arange(n_min, N + 1), size=3, replace=False).tolist())
        out.add((n, m, l))
    return sorted(out)


def build_certificate(
    trace: OrbitTrace,
    family: MappingFamily,
    rate_cert: LambdaCertificate,
    F: Optional[PhiFunction] = None,
    sample_budget: int = 4000,
    seed: int = 0,
) -> ConvergenceCertificate:
    """Attach the tail bound ``lam^n / (1 - lam) F(G(x_0, x_1, x_2))`` to an orbit and test it."""
    F = F or identity_phi()
    pts = list(trace.points)
    while len(pts) < 3:
        pts.append(family.apply_power(len(pts), pts[-1], trace.p))
    g = trace.space.g
    base = g(pts[0], pts[1], pts[2])
    cert = ConvergenceCertificate(rate_cert.lam, rate_cert.n_lambda, base, F(base), {}, True, F.name)
    N = len(trace.points) - 1
    for n, m, l in _sample_triples(N, sample_budget, seed, n_min=rate_cert.n_lambda):
        v = F(trace.g(n, m, l))
        cert.observed_max[n] = max(cert.observed_max.get(n, 0.0), v)
    cert.sound = all(leq(v, cert.predicted_bound(n)) for n, v in cert.observed_max.items())
    return cert


@dataclass
class SoundnessReport:
    sound: bool
    telescoping_ok: bool
    violations: list
    telescoping_violations: list
    checked: int

    def to_dict(self):
        return {
            "sound": self.sound,
            "telescoping_ok": self.telescoping_ok,
            "violations": self.violations,
            "telescoping_violations": self.telescoping_violations,
            "checked": self.checked,
        }


def apriori_vs_observed(
    trace: OrbitTrace,
    cert: ConvergenceCertificate,
    sample_budget: int = 4000,
    seed: int = 0,
    F: Optional[PhiFunction] = None,
) -> SoundnessReport:
    """Compare sampled ``G(x_n, x_m, x_l)`` against the certificate's bound.

    Also checks the chained estimate
    ``G(x_n, x_m, x_l) <= sum_{i=n}^{l-2} G(x_i, x_{i+1}, x_{i+2})``
    on each sampled triple.
    """
    F = F or identity_phi()
    N = len(trace.points) - 1
    if N < 2 or N < cert.n_lambda + 2:
        raise ParameterError("trace too short for the certificate window")
    steps = np.array([trace.g(i, i + 1, i + 2) for i in range(N - 1)])
    prefix = np.concatenate([[0.0], np.cumsum(steps)])
    viol, tviol = [], []
    triples = _sample_triples(N, sample_budget, seed, n_min=cert.n_lambda)
    for n, m, l in triples:
        val = trace.g(n, m, l)
        bound = cert.predicted_bound(n)
        if not leq(F(val), bound):
            viol.append({"n": n, "m": m, "l": l, "observed": F(val), "bound": bound})
        chain = prefix[l - 1] - prefix[n]
        if not leq(val, chain):
            tviol.append({"n": n, "m": m, "l": l, "observed": val, "chain": float(chain)})
    return SoundnessReport(not viol, not tviol, viol[:10], tviol[:10], len(triples))


# --------------------------------------------------------------------------- solving


@dataclass
class FixedPointResult:
    point: object
    residuals: list
    accepted: bool
    trace: OrbitTrace
    transfer_flag: Optional[bool] = None
    unique_flag: Optional[bool] = None

    def to_dict(self):
        pt = self.point
        return {
            "point": list(pt) if isinstance(pt, tuple) else pt,
            "residuals": self.residuals,
            "accepted": self.accepted,
            "transfer": self.transfer_flag,
            "unique": self.unique_flag,
            "steps": self.trace.steps,
            "termination": self.trace.termination,
            "wrapped": self.trace.wrapped,
        }


def _residuals(space, family, u):
    return [space.g(family(n, u), u, u) for n in range(1, family.index_cap + 1)]


def solve_common_fixed_point(
    space: GSpace,
    family: MappingFamily,
    sched: CoefficientSchedule,
    x0,
    F: Optional[PhiFunction] = None,
    mode: str = "vetro",
    p: int = 1,
    hypotheses: Optional[Hypotheses] = None,
    enforce: bool = True,
    max_steps: int = DEFAULT_MAX_STEPS,
    tol: float = DEFAULT_TOL,
    tau_fix: float = TAU_FIX,
    sample_budget: int = 4000,
    seed: int = 0,
):
    """Iterate to a common fixed point and certify the run.

    Returns ``(FixedPointResult, ConvergenceCertificate or None)``.  With
    ``p > 1`` the orbit runs on the powers ``T_n^p`` and the candidate is
    then checked against every ``T_n`` itself.  ``enforce=False`` skips the
    hypotheses gate (used by diagnostics that probe failing families); no
    certificate is produced then unless a rate certificate is available.
    """
    if enforce:
        if hypotheses is None or hypotheses.key != _key(space, family, sched, F, mode, p):
            raise StaleHypothesesError("run check_hypotheses on this exact configuration first")
        if not hypotheses.holds:
            raise HypothesisError("; ".join(hypotheses.reasons), hypotheses.condition.witnesses)
    trace = picard_orbit(space, family, x0, max_steps=max_steps, tol=tol, p=p)
    u = trace.last
    residuals = _residuals(space, family, u)
    if max(residuals) > tau_fix:
        raise NonConvergenceError(
            f"residual {max(residuals):.3g} exceeds {tau_fix} after {trace.steps} steps ({trace.termination})",
            trace,
            residuals,
        )
    cert = None
    rate_cert = hypotheses.rate_certificate if hypotheses is not None else None
    if rate_cert is not None:
        cert = build_certificate(trace, family, rate_cert, F, sample_budget, seed)
    transfer = fixed_point_transfer(space, family, u, tol=tau_fix)
    result = FixedPointResult(u, residuals, True, trace, transfer_flag=transfer.holds)
    return result, cert


@dataclass
class UniquenessVerdict:
    unique: bool
    clusters: list
    candidates: list
    degenerate: bool

    def to_dict(self):
        return {
            "unique": self.unique,
            "degenerate": self.degenerate,
            "clusters": self.clusters,
            "candidates": self.candidates,
        }


def uniqueness_probe(
    space: GSpace,
    family: MappingFamily,
    sched: CoefficientSchedule,
    starts: Sequence,
    F: Optional[PhiFunction] = None,
    mode: str = "vetro",
    p: int = 1,
    hypotheses: Optional[Hypotheses] = None,
    enforce: bool = True,
    tau_same: float = TAU_SAME,
    **solve_kw,
) -> UniquenessVerdict:
    """Solve from every start and cluster the candidates under ``G(u, v, v) <= tau_same``."""
    starts = list(starts)
    if not starts:
        raise ParameterError("need at least one start")
    cands = []
    for x0 in starts:
        try:
            res, _ = solve_common_fixed_point(
                space, family, sched, x0, F, mode, p, hypotheses, enforce, **solve_kw
            )
        except (NonConvergenceError, HypothesisError, StaleHypothesesError) as exc:
            raise type(exc)(f"start {x0!r}: {exc}") from exc
        cands.append(res.point)
    clusters = []
    for idx, u in enumerate(cands):
        for cl in clusters:
            if space.g(cands[cl[0]], u, u) <= tau_same:
                cl.append(idx)
                break
        else:
            clusters.append([idx])
    return UniquenessVerdict(len(clusters) == 1, clusters, cands, len(starts) < 2)


@dataclass
class TransferVerdict:
    holds: bool
    anchor: int
    witness: Optional[int]


def fixed_point_transfer(space: GSpace, family: MappingFamily, u, n_max: Optional[int] = None, tol: float = TAU_FIX):
    """Given ``u`` fixed (within ``tol``) by some ``T_i``, check it is fixed by every ``T_j``, ``j <= n_max``."""
    space.check_point(u)
    n_max = n_max or family.index_cap
    res = [space.g(family(j, u), u, u) for j in range(1, n_max + 1)]
    anchors = [j for j, r in enumerate(res, 1) if r <= tol]
    if not anchors:
        raise ParameterError("u is not fixed by any map of the family")
    bad = [j for j, r in enumerate(res, 1) if r > tol]
    return TransferVerdict(not bad, anchors[0], bad[0] if bad else None)


@dataclass
class CauchyReport:
    index: Optional[int]
    epsilon: float
    limit_checks: Optional[dict] = None


def cauchy_diagnostic(trace: OrbitTrace, epsilon: float, limit=None) -> CauchyReport:
    """Smallest ``N`` with ``G(x_n, x_m, x_m) < epsilon`` for all recorded ``m, n >= N``.

    ``None`` when even the last two recorded points are ``epsilon`` apart.

    With ``limit`` given, also reports the tails of ``G(limit, x_n, x_n)``
    and ``G(x_n, limit, limit)``.
    """
    pts = trace.points
    if len(pts) < 2:
        raise ParameterError("trace needs at least two points")
    g = trace.space.g
    K = len(pts)
    # a tail of a single point says nothing, so the last candidate is K - 2
    suffix_max = g(pts[-1], pts[-2], pts[-2])
    suffix_max = max(suffix_max, g(pts[-2], pts[-1], pts[-1]))
    index = None
    for N in range(K - 2, -1, -1):
        x = pts[N]
        for m in range(N, K):
            suffix_max = max(suffix_max, g(x, pts[m], pts[m]), g(pts[m], x, x))
        if suffix_max < epsilon:
            index = N
        else:
            break
    checks = None
    if limit is not None:
        a = [g(limit, x, x) for x in pts]
        b = [g(x, limit, limit) for x in pts]
        checks = {
            "G(x,x_n,x_n)_last": a[-1],
            "G(x_n,x,x)_last": b[-1],
            "G(x,x_n,x_n)_tail_max": max(a[len(a) // 2 :]),
            "G(x_n,x,x)_tail_max": max(b[len(b) // 2 :]),
        }
    return CauchyReport(index, epsilon, checks)
