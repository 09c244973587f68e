"""Phi-class functions, coefficient schedules, mapping families and contraction checks.

Coefficients are addressed as ``coefficients(i, j, k)`` for the maps
``T_i, T_j, T_k`` applied to ``x, y, z``.  Countable families and schedules
are truncated at ``index_cap``; indices beyond it wrap cyclically, so
``T_{cap+1} = T_1`` and the schedule wraps the same way.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError, HypothesisError, ModeError, ParameterError, SingularityError
from .gmetric_core import GSpace

TAU_INEQ = 1e-12
TAU_PHI = 1e-9
DEFAULT_INDEX_CAP = 64
ABBAS_THRESHOLD = 0.5  # hypothesis bound on delta + 3 theta + 4 lam
ABBAS_THRESHOLD_THREE_MAPS = 1.0  # the weaker bound quoted for three maps f, g, h
MAX_WITNESSES = 10


def leq(a: float, b: float) -> bool:
    """``a <= b`` up to ``TAU_INEQ * (1 + |b|)``."""
    return a <= b + TAU_INEQ * (1.0 + abs(b))


def wrap(n: int, cap: int) -> int:
    return (n - 1) % cap + 1


# --------------------------------------------------------------------------- Phi


@dataclass(frozen=True)
class PhiFunction:
    f: Callable[[float], float]
    degree: float
    name: str = "F"

    def __post_init__(self):
        if not self.degree > 0:
            raise ParameterError("homogeneity degree must be positive")

    def __call__(self, t: float) -> float:
        return self.f(t)

    def scaled(self, c: float) -> "PhiFunction":
        f = self.f
        return PhiFunction(lambda t: c * f(t), self.degree, f"{c}*{self.name}")


def identity_phi() -> PhiFunction:
    return PhiFunction(lambda t: t, 1.0, "identity")


def scale_phi(c: float) -> PhiFunction:
    if c <= 0:
        raise ParameterError("scale must be positive")
    return PhiFunction(lambda t: c * t, 1.0, f"scale:{c}")


def root_phi(s: float) -> PhiFunction:
    """``F(t) = t**s``, homogeneous of degree ``s``."""
    if s <= 0:
        raise ParameterError("degree must be positive")
    return PhiFunction(lambda t: t**s, float(s), f"root:{s}")


@dataclass
class PhiReport:
    member: bool
    checks: dict
    witnesses: dict
    continuity: dict
    warnings: list = field(default_factory=list)

    def to_dict(self):
        return {
            "member": self.member,
            "checks": dict(self.checks),
            "witnesses": {k: [list(w) for w in v] for k, v in self.witnesses.items()},
            "continuity": dict(self.continuity),
            "warnings": list(self.warnings),
        }


def phi_membership_check(
    F: PhiFunction, sample_budget: int = 2000, domain_cap: float = 10.0, seed: int = 0
) -> PhiReport:
    """Sample-based audit of the class conditions on ``[0, domain_cap]``.

    Checks ``F(0) = 0`` and positivity, monotonicity, sub-additivity and
    degree-``s`` homogeneity.  Continuity is only estimated, by fitting a
    modulus ``|F(t) - F(u)| <= M |t - u|^gamma`` to close sample pairs; it is
    reported but never causes rejection.
    """
    if sample_budget < 1:
        raise ParameterError("sample_budget must be positive")
    if domain_cap <= 0:
        raise ParameterError("domain_cap must be positive")
    rng = np.random.default_rng(seed)
    notes = []
    if F.degree > 1:
        notes.append(
            "degree > 1 is incompatible with sub-additivity: F(2t) = 2^s F(t) <= 2 F(t) forces F = 0"
        )
        warnings.warn(notes[-1], stacklevel=2)
    grid = np.linspace(0.0, domain_cap, 21)[1:]
    ts = np.concatenate([grid, rng.uniform(0.0, domain_cap, sample_budget)])
    wit = {"zero_set": [], "monotone": [], "subadditive": [], "homogeneous": []}

    def add(key, w):
        if len(wit[key]) < MAX_WITNESSES:
            wit[key].append(w)

    if F(0.0) != 0:
        add("zero_set", (0.0, F(0.0)))
    for t in ts:
        if not F(t) > 0:
            add("zero_set", (float(t), F(t)))
    srt = np.sort(ts)
    vals = [F(t) for t in srt]
    for (t, ft), (u, fu) in zip(zip(srt, vals), zip(srt[1:], vals[1:])):
        if fu < ft - TAU_PHI * max(1.0, abs(ft)):
            add("monotone", (float(t), float(u)))
    half = domain_cap / 2
    pairs = [(1.0, 1.0)] if half >= 1.0 else []
    pairs += [(float(a), float(b)) for a in grid[grid <= half] for b in grid[grid <= half]]
    pairs += [tuple(map(float, p)) for p in rng.uniform(0.0, half, (sample_budget, 2))]
    for a, b in pairs:
        if F(a + b) > F(a) + F(b) + TAU_PHI * max(1.0, F(a) + F(b)):
            add("subadditive", (a, b))
    for _ in range(sample_budget):
        t = rng.uniform(0.0, domain_cap)
        c = rng.uniform(0.0, 1.0) if t > 0 else 0.0
        lhs, rhs = F(c * t), c**F.degree * F(t)
        if abs(lhs - rhs) > TAU_PHI * max(1.0, abs(lhs), abs(rhs)):
            add("homogeneous", (float(c), float(t)))

    continuity = _fit_modulus(F, rng, domain_cap, sample_budget)
    checks = {k: not v for k, v in wit.items()}
    return PhiReport(all(checks.values()), checks, wit, continuity, notes)


def _fit_modulus(F, rng, cap, budget):
    t = rng.uniform(0.0, cap, budget)
    h = cap * 10.0 ** rng.uniform(-8, -1, budget)
    u = np.minimum(t + h, cap)
    df = np.abs(np.array([F(b) - F(a) for a, b in zip(t, u)]))
    dt = u - t
    ok = (df > 0) & (dt > 0)
    if ok.sum() < 2:
        return {"M": 0.0, "gamma": 1.0, "pairs": int(ok.sum())}
    gamma, logm = np.polyfit(np.log(dt[ok]), np.log(df[ok]), 1)
    gamma = float(min(max(gamma, 1e-6), 1.0))
    M = float(np.max(df[ok] / dt[ok] ** gamma))
    return {"M": M, "gamma": gamma, "pairs": int(ok.sum())}


# --------------------------------------------------------------------------- rates


def r_vetro(theta: float, delta: float, s: float = 1.0) -> float:
    """``(theta^s + delta^s) / (1 - theta^s)``."""
    ts = theta**s
    if ts >= 1:
        raise SingularityError(f"theta^s = {ts} >= 1")
    return (ts + delta**s) / (1.0 - ts)


def r_abbas(delta: float, theta: float, lam: float) -> float:
    """``(delta + 2 theta + 3 lam) / (1 - theta - lam)``."""
    den = 1.0 - theta - lam
    if den <= 0:
        raise SingularityError(f"theta + lam = {theta + lam} >= 1")
    return (delta + 2.0 * theta + 3.0 * lam) / den


def r_abbas_phi(delta: float, theta: float, lam: float, s: float = 1.0) -> float:
    """``(delta^s + 2 theta^s + 3 lam^s) / (1 - theta^s - lam^s)``."""
    den = 1.0 - theta**s - lam**s
    if den <= 0:
        raise SingularityError(f"theta^s + lam^s = {1.0 - den} >= 1")
    return (delta**s + 2.0 * theta**s + 3.0 * lam**s) / den


def abbas_hypothesis_value(delta: float, theta: float, lam: float, s: float = 1.0) -> float:
    return delta**s + 3.0 * theta**s + 4.0 * lam**s


# --------------------------------------------------------------------------- schedules


def _as_rule(value):
    if value is None:
        return None
    if callable(value):
        return value
    c = float(value)
    if c < 0:
        raise ParameterError("coefficients must be nonnegative")
    return lambda i, j, k: c


class CoefficientSchedule:
    """Triple-indexed coefficients ``delta``, ``theta`` and optionally ``lam``.

    Without ``lam`` the schedule is in ``vetro`` mode (two coefficients);
    with it, ``abbas`` mode.  Rules are callables ``(i, j, k) -> value`` or
    constants.
    """

    def __init__(self, delta, theta, lam=None, index_cap: int = DEFAULT_INDEX_CAP, spec: Optional[dict] = None):
        if index_cap < 1:
            raise ParameterError("index_cap must be positive")
        self._delta = _as_rule(delta)
        self._theta = _as_rule(theta)
        self._lam = _as_rule(lam)
        self.index_cap = index_cap
        self.spec = spec or {}

    @classmethod
    def constant(cls, delta: float, theta: float, lam: Optional[float] = None, index_cap: int = DEFAULT_INDEX_CAP):
        spec = {"kind": "constant", "delta": delta, "theta": theta, "lambda": lam, "index_cap": index_cap}
        return cls(delta, theta, lam, index_cap, spec)

    @property
    def mode(self) -> str:
        return "vetro" if self._lam is None else "abbas"

    def coefficients(self, i: int, j: int, k: int) -> tuple[float, float, Optional[float]]:
        """``(delta, theta, lam)`` for the index triple; ``lam`` is ``None`` in vetro mode."""
        i, j, k = (wrap(t, self.index_cap) for t in (i, j, k))
        d, t = float(self._delta(i, j, k)), float(self._theta(i, j, k))
        l = None if self._lam is None else float(self._lam(i, j, k))
        if d < 0 or t < 0 or (l is not None and l < 0):
            raise ParameterError(f"negative coefficient at {(i, j, k)}")
        return d, t, l

    def rate_coefficients(self, i: int):
        """Coefficients for the triple ``(i, i+1, i+2)`` that drives the rate ``r_i``."""
        return self.coefficients(i, i + 1, i + 2)

    def to_dict(self):
        return dict(self.spec)


def schedule_from_points(
    space: GSpace, a, b, c=None, index_cap: int = DEFAULT_INDEX_CAP
) -> CoefficientSchedule:
    """Coefficients as G-distances of point sequences.

    ``delta_{ijk} = G(a_i, a_j, a_k)``, ``theta = G(b_i, b_j, b_k)`` and
    ``lam = G(c_i, c_j, c_k)``.  Sequences are 1-indexed callables or lists;
    every point up to ``index_cap`` must lie in the carrier.
    """

    def materialize(seq):
        if seq is None:
            return None
        pts = [seq(i) if callable(seq) else seq[i - 1] for i in range(1, index_cap + 1)]
        for p in pts:
            if not space.contains(p):
                raise DomainError(f"generator point {p!r} is outside the carrier")
        return pts

    pa, pb, pc = materialize(a), materialize(b), materialize(c)

    def rule(pts):
        if pts is None:
            return None
        return lambda i, j, k: space.g(pts[i - 1], pts[j - 1], pts[k - 1])

    spec = {"kind": "points", "a": pa, "b": pb, "c": pc, "index_cap": index_cap}
    return CoefficientSchedule(rule(pa), rule(pb), rule(pc), index_cap, spec)


def rate_sequence(sched: CoefficientSchedule, mode: str, s: float = 1.0, n_terms: Optional[int] = None) -> np.ndarray:
    """``r_1 .. r_N`` for the given mode (``vetro``, ``abbas`` or ``abbas_phi``)."""
    n_terms = n_terms or sched.index_cap
    out = np.empty(n_terms)
    for i in range(1, n_terms + 1):
        d, t, l = sched.rate_coefficients(i)
        if mode == "vetro":
            out[i - 1] = r_vetro(t, d, s)
        elif l is None:
            raise ModeError("abbas rates need a lam coefficient")
        elif mode == "abbas":
            out[i - 1] = r_abbas(d, t, l)
        else:
            out[i - 1] = r_abbas_phi(d, t, l, s)
    return out


# --------------------------------------------------------------------------- families


@dataclass(frozen=True)
class AffineMap:
    """``x -> c x + d`` on the reals."""

    c: float
    d: float

    def __call__(self, x):
        return self.c * x + self.d

    def power(self, p: int) -> "AffineMap":
        c, d = 1.0, 0.0
        for _ in range(p):
            c, d = self.c * c, self.c * d + self.d
        return AffineMap(c, d)


@dataclass(frozen=True)
class TableMap:
    """Self-map of a finite carrier given as an image tuple."""

    table: tuple

    def __call__(self, x):
        return self.table[x]

    def power(self, p: int) -> "TableMap":
        out = tuple(range(len(self.table)))
        for _ in range(p):
            out = tuple(self.table[v] for v in out)
        return TableMap(out)


@dataclass(frozen=True)
class ConstantMap:
    point: object

    def __call__(self, x):
        return self.point

    def power(self, p: int) -> "ConstantMap":
        return self


class _Composed:
    def __init__(self, fn, p):
        self.fn, self.p = fn, p

    def __call__(self, x):
        for _ in range(self.p):
            x = self.fn(x)
        return x


class MappingFamily:
    """Indexed family ``n -> T_n`` with truncation at ``index_cap``."""

    def __init__(self, maps: Sequence[Callable] = (), generator=None, index_cap=None, kind="callable", spec=None):
        if maps and generator is not None:
            raise ParameterError("give maps or a generator, not both")
        if generator is not None:
            cap = index_cap or DEFAULT_INDEX_CAP
            maps = [generator(n) for n in range(1, cap + 1)]
        maps = list(maps)
        if not maps:
            raise ParameterError("empty family")
        self._maps = maps
        self.index_cap = len(maps) if index_cap is None else index_cap
        if self.index_cap > len(maps):
            self._maps = [maps[(n - 1) % len(maps)] for n in range(1, self.index_cap + 1)]
        self.kind = kind
        self.spec = spec or {}

    def wrapped_index(self, n: int) -> int:
        if n < 1:
            raise ParameterError("family indices start at 1")
        return wrap(n, self.index_cap)

    def map(self, n: int) -> Callable:
        return self._maps[self.wrapped_index(n) - 1]

    def __call__(self, n: int, x):
        return self.map(n)(x)

    def apply_power(self, n: int, x, p: int):
        """``T_n^p(x)`` by repeated application."""
        T = self.map(n)
        for _ in range(p):
            x = T(x)
        return x

    @property
    def maps(self) -> list:
        return list(self._maps)

    def to_dict(self):
        return dict(self.spec)


def affine_family(params: Sequence[tuple[float, float]], index_cap=None) -> MappingFamily:
    maps = [AffineMap(float(c), float(d)) for c, d in params]
    spec = {"kind": "affine_real", "maps": [[m.c, m.d] for m in maps], "index_cap": index_cap or len(maps)}
    return MappingFamily(maps, index_cap=index_cap, kind="affine_real", spec=spec)


def table_family(space: GSpace, tables: Sequence[Sequence[int]], index_cap=None) -> MappingFamily:
    if not space.finite:
        raise ParameterError("table maps need a finite carrier")
    maps = []
    for tab in tables:
        tab = tuple(int(v) for v in tab)
        if len(tab) != space.size or any(not space.contains(v) for v in tab):
            raise DomainError(f"table {tab} is not a self-map of the carrier")
        maps.append(TableMap(tab))
    spec = {"kind": "table", "maps": [list(m.table) for m in maps], "index_cap": index_cap or len(maps)}
    return MappingFamily(maps, index_cap=index_cap, kind="table", spec=spec)


def constant_family(q, index_cap: int = 1, space: Optional[GSpace] = None) -> MappingFamily:
    if space is not None:
        space.check_point(q)
    spec = {"kind": "constant", "point": q, "index_cap": index_cap}
    return MappingFamily([ConstantMap(q)], index_cap=index_cap, kind="constant", spec=spec)


def repeated_family(T: Callable, index_cap: int = 1) -> MappingFamily:
    return MappingFamily([T], index_cap=index_cap, kind="repeated")


def power_family(family: MappingFamily, p: int) -> MappingFamily:
    """The family ``n -> T_n^p``; ``index_cap`` is preserved."""
    if p < 1:
        raise ParameterError("power must be a positive integer")
    if p == 1:
        return family
    maps = [m.power(p) if hasattr(m, "power") else _Composed(m, p) for m in family.maps]
    spec = dict(family.spec, power=p) if family.spec else {}
    return MappingFamily(maps, index_cap=family.index_cap, kind=family.kind, spec=spec)


# --------------------------------------------------------------------------- condition checks


@dataclass
class ConditionReport:
    holds: bool
    hypothesis_ok: bool
    witnesses: list
    checked: int
    exhaustive: bool
    index_cap: int
    mode: str
    hypothesis_max: float = 0.0

    @property
    def passed(self) -> bool:
        return self.holds and self.hypothesis_ok

    def to_dict(self):
        return {
            "holds": self.holds,
            "hypothesis_ok": self.hypothesis_ok,
            "hypothesis_max": self.hypothesis_max,
            "witnesses": self.witnesses,
            "checked": self.checked,
            "exhaustive": self.exhaustive,
            "index_cap": self.index_cap,
            "mode": self.mode,
        }


def _cases(space, cap, budget, seed, distinct_xy):
    """Yield ``(x, y, z, i, j, k)``: all of them on small finite inputs, else seeded samples."""
    if space.finite and space.size**3 * cap**3 <= budget:
        idx = range(1, cap + 1)
        pts = range(space.size)
        for x, y, z in itertools.product(pts, repeat=3):
            if distinct_xy and x == y:
                continue
            for i, j, k in itertools.product(idx, repeat=3):
                yield x, y, z, i, j, k
        return
    rng = np.random.default_rng(seed)
    made = 0
    while made < budget:
        chunk = space.sample(rng, 3 * 256)
        ijk = rng.integers(1, cap + 1, size=(256, 3))
        for m in range(256):
            x, y, z = chunk[3 * m : 3 * m + 3]
            if distinct_xy and space.same(x, y):
                continue
            i, j, k = (int(v) for v in ijk[m])
            yield x, y, z, i, j, k
            made += 1
            if made >= budget:
                return


def _exhaustive_possible(space, cap, budget):
    return space.finite and space.size**3 * cap**3 <= budget


def _fmt(v):
    return v if isinstance(v, (int, float)) else list(v) if isinstance(v, tuple) else v


def check_condition_vetro(
    space: GSpace,
    family: MappingFamily,
    sched: CoefficientSchedule,
    F: Optional[PhiFunction] = None,
    p: int = 1,
    triple_samples: int = 4000,
    seed: int = 0,
    form: str = "statement",
) -> ConditionReport:
    """Check the two-coefficient contraction for ``T_i^p`` on triples with ``x != y``.

    ``form="statement"`` applies ``F`` to each right-hand term:
    ``F(theta [G(x,Tx,Tx) + (G(y,Ty,Ty) + G(z,Tz,Tz)) / 2]) + F(delta G(x,y,z))``.
    ``form="homogeneous"`` pulls the coefficients out as ``theta^s`` and
    ``delta^s``, the shape the rate estimate uses.
    """
    if p < 1:
        raise ParameterError("p must be a positive integer")
    if form not in ("statement", "homogeneous"):
        raise ParameterError(f"unknown form {form!r}")
    F = F or identity_phi()
    s = F.degree
    cap = min(family.index_cap, sched.index_cap)
    g = space.g
    wit = []
    checked = 0
    for x, y, z, i, j, k in _cases(space, cap, triple_samples, seed, distinct_xy=True):
        delta, theta, _ = sched.coefficients(i, j, k)
        if not (theta < 1 and delta < 1):
            raise HypothesisError(
                f"coefficients at {(i, j, k)} must be < 1 (theta={theta}, delta={delta})",
                [{"index": [i, j, k], "theta": theta, "delta": delta}],
            )
        tx, ty, tz = family.apply_power(i, x, p), family.apply_power(j, y, p), family.apply_power(k, z, p)
        lhs = F(g(tx, ty, tz))
        inner = g(x, tx, tx) + 0.5 * (g(y, ty, ty) + g(z, tz, tz))
        if form == "statement":
            rhs = F(theta * inner) + F(delta * g(x, y, z))
        else:
            rhs = theta**s * F(inner) + delta**s * F(g(x, y, z))
        checked += 1
        if not leq(lhs, rhs) and len(wit) < MAX_WITNESSES:
            wit.append({"x": _fmt(x), "y": _fmt(y), "z": _fmt(z), "index": [i, j, k], "lhs": lhs, "rhs": rhs})
    return ConditionReport(
        holds=not wit,
        hypothesis_ok=True,
        witnesses=wit,
        checked=checked,
        exhaustive=_exhaustive_possible(space, cap, triple_samples),
        index_cap=cap,
        mode="vetro",
    )


def check_condition_abbas(
    space: GSpace,
    family: MappingFamily,
    sched: CoefficientSchedule,
    F: Optional[PhiFunction] = None,
    p: int = 1,
    triple_samples: int = 4000,
    seed: int = 0,
    threshold: float = ABBAS_THRESHOLD,
) -> ConditionReport:
    """Check the three-coefficient contraction for ``T_i^p`` on all triples.

    The right side is ``delta G(x,y,z) + theta [G(Tx,x,x) + G(y,Ty,y) +
    G(z,z,Tz)] + lam [G(Tx,y,z) + G(x,Ty,z) + G(x,y,Tz)]``; with ``F`` both
    sides are wrapped in ``F``.  The scalar hypothesis ``delta^s + 3 theta^s
    + 4 lam^s < threshold`` (``s = 1`` without ``F``) is reported separately
    over every visited index triple.
    """
    if sched.mode != "abbas":
        raise ModeError("schedule has no lam coefficient")
    if p < 1:
        raise ParameterError("p must be a positive integer")
    s = 1.0 if F is None else F.degree
    wrapF = F if F is not None else (lambda t: t)
    cap = min(family.index_cap, sched.index_cap)
    g = space.g
    wit = []
    checked = 0
    hyp_max = 0.0
    for x, y, z, i, j, k in _cases(space, cap, triple_samples, seed, distinct_xy=False):
        delta, theta, lam = sched.coefficients(i, j, k)
        hyp_max = max(hyp_max, abbas_hypothesis_value(delta, theta, lam, s))
        tx, ty, tz = family.apply_power(i, x, p), family.apply_power(j, y, p), family.apply_power(k, z, p)
        lhs = wrapF(g(tx, ty, tz))
        inner = (
            delta * g(x, y, z)
            + theta * (g(tx, x, x) + g(y, ty, y) + g(z, z, tz))
            + lam * (g(tx, y, z) + g(x, ty, z) + g(x, y, tz))
        )
        rhs = wrapF(inner)
        checked += 1
        if not leq(lhs, rhs) and len(wit) < MAX_WITNESSES:
            wit.append({"x": _fmt(x), "y": _fmt(y), "z": _fmt(z), "index": [i, j, k], "lhs": lhs, "rhs": rhs})
    return ConditionReport(
        holds=not wit,
        hypothesis_ok=hyp_max < threshold,
        witnesses=wit,
        checked=checked,
        exhaustive=_exhaustive_possible(space, cap, triple_samples),
        index_cap=cap,
        mode="abbas",
        hypothesis_max=hyp_max,
    )
