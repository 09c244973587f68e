"""G-metric spaces and their axiom audits.

Two kinds of space are provided:

* :class:`FiniteGSpace` -- a carrier of ``n`` labelled points addressed by
  index ``0..n-1`` and a dense, fully symmetric ``n x n x n`` table.  Tables
  are built from canonical entries ``(i, j, k)`` with ``i <= j <= k``, so the
  symmetry axiom G4 holds by construction.
* :class:`ContinuousGSpace` -- a box in ``R^dim`` (a real interval when
  ``dim == 1``) with a callable ``g``.  Every continuous carrier supplied here
  is complete; completeness of user-supplied spaces is not checked.

Axioms are checked exactly on finite tables and by seeded sampling, with a
relative tolerance, on continuous carriers.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from numbers import Integral, Real
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError, ParameterError

TAU_G = 1e-9
TAU_SYM = 1e-9
MAX_WITNESSES = 10

AXIOMS = ("G1", "G2", "G3", "G4", "G5")


def _canonical_triples(n):
    return list(itertools.combinations_with_replacement(range(n), 3))


def _close(a, b, tol):
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def _leq(a, b, tol):
    return a <= b + tol * max(1.0, abs(a), abs(b))


class GSpace:
    """Base class: a carrier plus a ternary distance ``g``."""

    finite = False
    name = "G"

    def g(self, x, y, z) -> float:
        raise NotImplementedError

    def __call__(self, x, y, z) -> float:
        return self.g(x, y, z)

    def contains(self, x) -> bool:
        raise NotImplementedError

    def check_point(self, x):
        if not self.contains(x):
            raise DomainError(f"point {x!r} is outside the carrier of {self.name}")
        return x

    def sample(self, rng: np.random.Generator, size: int) -> list:
        raise NotImplementedError

    def same(self, x, y) -> bool:
        """Exact point equality (never tolerance based)."""
        return x == y


class FiniteGSpace(GSpace):
    """Finite carrier with a tabulated, permutation-invariant G."""

    finite = True

    def __init__(self, labels: Sequence, table, name: str = "finite"):
        labels = list(labels)
        if not labels:
            raise DomainError("empty carrier")
        table = np.array(table, dtype=float)
        n = len(labels)
        if table.shape != (n, n, n):
            raise ParameterError(f"table shape {table.shape} does not match carrier size {n}")
        if not np.all(np.isfinite(table)) or np.any(table < 0):
            raise ParameterError("G values must be finite and nonnegative")
        table.setflags(write=False)
        self.labels = labels
        self._table = table
        self.name = name

    @classmethod
    def from_entries(cls, labels: Sequence, entries, name: str = "finite"):
        """Build from canonical entries.

        ``entries`` is a mapping ``(i, j, k) -> value`` or an iterable of
        ``(i, j, k, value)`` with ``i <= j <= k``.  Every canonical triple
        must be present exactly once.
        """
        n = len(labels)
        if n == 0:
            raise DomainError("empty carrier")
        items = entries.items() if hasattr(entries, "items") else ((e[:3], e[3]) for e in entries)
        values = {}
        for key, value in items:
            i, j, k = (int(t) for t in key)
            if not (0 <= i <= j <= k < n):
                raise ParameterError(f"entry {(i, j, k)} is not a canonical triple for {n} points")
            if (i, j, k) in values:
                raise ParameterError(f"duplicate entry {(i, j, k)}")
            value = float(value)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"entry {(i, j, k)} has invalid value {value}")
            values[i, j, k] = value
        missing = [t for t in _canonical_triples(n) if t not in values]
        if missing:
            raise ParameterError(f"missing entries for triples {missing[:5]}")
        table = np.empty((n, n, n))
        for (i, j, k), value in values.items():
            for perm in set(itertools.permutations((i, j, k))):
                table[perm] = value
        return cls(labels, table, name=name)

    @classmethod
    def from_function(cls, labels: Sequence, fn: Callable[[int, int, int], float], name="finite"):
        """Tabulate ``fn`` on canonical index triples only."""
        n = len(labels)
        return cls.from_entries(labels, {t: fn(*t) for t in _canonical_triples(n)}, name=name)

    @classmethod
    def from_raw(cls, labels: Sequence, table, name: str = "finite"):
        """Load a full table, rejecting it unless it is symmetric in all arguments."""
        table = np.asarray(table, dtype=float)
        for perm in itertools.permutations(range(3)):
            diff = np.argwhere(table != np.transpose(table, perm))
            if diff.size:
                raise ParameterError(f"raw table violates G4 at {tuple(int(v) for v in diff[0])}")
        return cls(labels, table, name=name)

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def points(self) -> range:
        return range(self.size)

    @property
    def table(self) -> np.ndarray:
        return self._table

    def entries(self) -> list[tuple[int, int, int, float]]:
        return [(i, j, k, float(self._table[i, j, k])) for i, j, k in _canonical_triples(self.size)]

    def contains(self, x) -> bool:
        return isinstance(x, Integral) and not isinstance(x, bool) and 0 <= x < self.size

    def g(self, x, y, z) -> float:
        for p in (x, y, z):
            self.check_point(p)
        return float(self._table[x, y, z])

    def sample(self, rng, size):
        return [int(v) for v in rng.integers(0, self.size, size=size)]

    def __repr__(self):
        return f"FiniteGSpace(name={self.name!r}, size={self.size})"


@dataclass(frozen=True)
class Interval:
    """Continuous carrier descriptor: the box ``[lo, hi]^dim``.

    ``sample_lo``/``sample_hi`` bound the region used by samplers, since the
    carrier itself may be unbounded.
    """

    lo: float = -math.inf
    hi: float = math.inf
    dim: int = 1
    sample_lo: float = -10.0
    sample_hi: float = 10.0

    def __post_init__(self):
        if self.dim < 1 or self.lo > self.hi:
            raise ParameterError("invalid interval")
        if self.sample_lo > self.sample_hi:
            raise ParameterError("invalid sample box")


class ContinuousGSpace(GSpace):
    """A box carrier with a callable G. Points are floats, or tuples when ``dim > 1``."""

    def __init__(self, g: Callable, carrier: Interval = Interval(), name: str = "continuous"):
        self._g = g
        self.carrier = carrier
        self.name = name

    def _coords(self, x):
        if self.carrier.dim == 1:
            return (x,)
        return tuple(x) if isinstance(x, (tuple, list, np.ndarray)) else ()

    def contains(self, x) -> bool:
        if type(x) is float and self.carrier.dim == 1:  # fast path for the common case
            return math.isfinite(x) and self.carrier.lo <= x <= self.carrier.hi
        if self.carrier.dim == 1 and isinstance(x, (tuple, list, np.ndarray)):
            return False
        coords = self._coords(x)
        if len(coords) != self.carrier.dim:
            return False
        for c in coords:
            if isinstance(c, bool) or not isinstance(c, Real):
                return False
            if not math.isfinite(c) or c < self.carrier.lo or c > self.carrier.hi:
                return False
        return True

    def g(self, x, y, z) -> float:
        for p in (x, y, z):
            self.check_point(p)
        return float(self._g(x, y, z))

    def sample(self, rng, size):
        lo = max(self.carrier.lo, self.carrier.sample_lo)
        hi = min(self.carrier.hi, self.carrier.sample_hi)
        vals = rng.uniform(lo, hi, size=(size, self.carrier.dim))
        if self.carrier.dim == 1:
            return [float(v) for v in vals[:, 0]]
        return [tuple(float(c) for c in row) for row in vals]

    def __repr__(self):
        return f"ContinuousGSpace(name={self.name!r}, carrier={self.carrier})"


def _metric_lookup(d, labels):
    return lambda i, j: float(d(labels[i], labels[j]))


def _build(d, carrier, combine, name):
    if carrier is None:
        carrier = Interval()
    if isinstance(carrier, Interval):
        if not callable(d):
            raise ParameterError("continuous carriers need a callable metric")
        return ContinuousGSpace(lambda x, y, z: combine(d(x, y), d(y, z), d(z, x)), carrier, name=name)
    labels = list(carrier)
    if callable(d):
        dist = _metric_lookup(d, labels)
        return FiniteGSpace.from_function(
            labels, lambda i, j, k: combine(dist(i, j), dist(j, k), dist(k, i)), name=name
        )
    mat = np.asarray(d, dtype=float)
    if mat.shape != (len(labels), len(labels)):
        raise ParameterError("distance matrix does not match the carrier")
    if not np.array_equal(mat, mat.T):
        raise ParameterError("distance matrix must be symmetric")
    # G[i, j, k] from d(i, j), d(j, k), d(k, i)
    parts = (mat[:, :, None], mat[None, :, :], mat.T[:, None, :])
    if name == "sum":
        # add in sorted order so every permutation of (i, j, k) rounds identically
        stacked = np.sort(np.stack(np.broadcast_arrays(*parts), axis=-1), axis=-1)
        table = stacked[..., 0] + stacked[..., 1] + stacked[..., 2]
    else:
        table = np.maximum(np.maximum(parts[0], parts[1]), parts[2])
    return FiniteGSpace(labels, table, name=name)


def from_metric_sum(d, carrier=None) -> GSpace:
    """``G(x,y,z) = d(x,y) + d(y,z) + d(z,x)``.

    ``carrier`` is ``None`` (the real line), an :class:`Interval`, or a list of
    labels.  For finite carriers ``d`` may be a callable on labels or a
    distance matrix indexed like the labels.
    """
    return _build(d, carrier, lambda a, b, c: a + b + c, "sum")


def from_metric_max(d, carrier=None) -> GSpace:
    """``G(x,y,z) = max{d(x,y), d(y,z), d(z,x)}``; arguments as in :func:`from_metric_sum`."""
    return _build(d, carrier, max, "max")


def discrete_g(carrier) -> GSpace:
    """``G = 0`` when all three points coincide, 1 otherwise.

    ``carrier`` is a point count, a list of labels, or an :class:`Interval`.
    """
    if isinstance(carrier, Interval):
        return ContinuousGSpace(lambda x, y, z: 0.0 if x == y == z else 1.0, carrier, name="discrete")
    labels = list(range(carrier)) if isinstance(carrier, Integral) else list(carrier)
    return FiniteGSpace.from_function(
        labels, lambda i, j, k: 0.0 if i == j == k else 1.0, name="discrete"
    )


def real_sum_space(carrier: Interval = Interval()) -> ContinuousGSpace:
    """Sum construction over ``|x - y|`` on the reals: ``2 (max - min)``."""
    return from_metric_sum(lambda x, y: abs(x - y), carrier)


def real_max_space(carrier: Interval = Interval()) -> ContinuousGSpace:
    """Max construction over ``|x - y|`` on the reals: ``max - min``."""
    return from_metric_max(lambda x, y: abs(x - y), carrier)


def max_pairing(x: float, y: float) -> float:
    """The pairing ``m(x, y) = max{x, y}`` on nonnegative reals.

    Not a metric (``m(x, x) = x``); it is only used to read sequences of
    nonnegative reals as lambda-sequences.
    """
    return max(x, y)


@dataclass
class AxiomReport:
    verdicts: dict
    violations: dict
    samples: int
    exhaustive: bool
    symmetric: bool = True
    symmetry_witnesses: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(self.verdicts[a] for a in AXIOMS)

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "verdicts": dict(self.verdicts),
            "violations": {k: [list(w) for w in v] for k, v in self.violations.items()},
            "samples": self.samples,
            "exhaustive": self.exhaustive,
            "symmetric": self.symmetric,
            "symmetry_witnesses": [list(w) for w in self.symmetry_witnesses],
        }


def _witnesses(mask):
    return [tuple(int(v) for v in row) for row in np.argwhere(mask)[:MAX_WITNESSES]]


def _violation_masks(t: np.ndarray) -> dict:
    """Boolean violation arrays for a stack of tables ``t`` of shape ``(B, n, n, n)``."""
    n = t.shape[1]
    idx = np.arange(n)
    off = idx[:, None] != idx[None, :]
    xxy = t[:, idx, idx, :]
    xyy = t[:, :, idx, idx]
    masks = {"G1": t[:, idx, idx, idx] != 0}
    masks["G2"] = off & ~(xxy > 0)
    # G3 over (x, y, z) with z != y
    masks["G3"] = (xxy[:, :, :, None] > t) & off[None, None, :, :]
    g4 = np.zeros_like(t, dtype=bool)
    for perm in itertools.permutations(range(1, 4)):
        g4 |= t != np.transpose(t, (0, *perm))
    masks["G4"] = g4
    # G5 over (x, y, z, a): G(x,y,z) <= G(x,a,a) + G(a,y,z)
    rhs = xyy[:, :, None, None, :] + np.transpose(t, (0, 2, 3, 1))[:, None, :, :, :]
    masks["G5"] = t[..., None] > rhs
    masks["symmetric"] = xxy != xyy
    return masks


def check_axioms_batch(tables, chunk: int = 4096) -> np.ndarray:
    """Exact axiom verdicts for many finite tables at once.

    ``tables`` has shape ``(B, n, n, n)``; the result is a ``(B, 5)`` boolean
    array whose columns are G1..G5.  Uses the same checks as the exhaustive
    path of :func:`check_axioms`.
    """
    tables = np.asarray(tables)
    if tables.dtype.kind not in "iu":
        tables = tables.astype(float, copy=False)  # integer tables stay integer: exact and compact
    if tables.ndim != 4 or not tables.shape[1] == tables.shape[2] == tables.shape[3]:
        raise ParameterError("expected a stack of cubic tables")
    out = np.empty((len(tables), len(AXIOMS)), dtype=bool)
    for start in range(0, len(tables), chunk):
        masks = _violation_masks(tables[start : start + chunk])
        for col, ax in enumerate(AXIOMS):
            m = masks[ax]
            out[start : start + len(m), col] = ~m.reshape(len(m), -1).any(axis=1)
    return out


def _finite_exhaustive(space: FiniteGSpace) -> AxiomReport:
    n = space.size
    masks = {k: v[0] for k, v in _violation_masks(space.table[None]).items()}
    viol = {ax: _witnesses(masks[ax]) for ax in AXIOMS}
    viol["G1"] = [(int(i),) * 3 for i in np.flatnonzero(masks["G1"])[:MAX_WITNESSES]]
    viol["G2"] = [(x, x, y) for x, y in viol["G2"]]
    sym = _witnesses(masks["symmetric"])
    return AxiomReport(
        verdicts={a: not viol[a] for a in AXIOMS},
        violations=viol,
        samples=n**4,
        exhaustive=True,
        symmetric=not sym,
        symmetry_witnesses=sym,
    )


def _sampled(space: GSpace, budget: int, seed: int) -> AxiomReport:
    rng = np.random.default_rng(seed)
    tol = 0.0 if space.finite else TAU_G
    g = space.g
    viol = {a: [] for a in AXIOMS}
    sym = []

    def record(key, witness):
        if len(viol[key]) < MAX_WITNESSES:
            viol[key].append(witness)

    xs = space.sample(rng, budget)
    ys = space.sample(rng, budget)
    zs = space.sample(rng, budget)
    as_ = space.sample(rng, budget)
    for x, y, z, a in zip(xs, ys, zs, as_):
        if g(x, x, x) != 0:
            record("G1", (x, x, x))
        gxxy = g(x, x, y)
        if not space.same(x, y) and not gxxy > 0:
            record("G2", (x, x, y))
        if not space.same(z, y) and not _leq(gxxy, g(x, y, z), tol):
            record("G3", (x, y, z))
        base = g(x, y, z)
        if any(not _close(base, g(*p), tol) for p in itertools.permutations((x, y, z))):
            record("G4", (x, y, z))
        if not _leq(base, g(x, a, a) + g(a, y, z), tol):
            record("G5", (x, y, z, a))
        if not _close(gxxy, g(x, y, y), TAU_SYM if not space.finite else 0.0):
            if len(sym) < MAX_WITNESSES:
                sym.append((x, y))
    return AxiomReport(
        verdicts={a: not viol[a] for a in AXIOMS},
        violations=viol,
        samples=budget,
        exhaustive=False,
        symmetric=not sym,
        symmetry_witnesses=sym,
    )


def check_axioms(space: GSpace, sample_budget: int = 2000, seed: int = 0) -> AxiomReport:
    """Audit G1--G5 (and symmetry) on ``space``.

    Finite spaces whose quadruple count fits in ``sample_budget`` are checked
    exhaustively and exactly; everything else is sampled from ``seed``.
    """
    if sample_budget < 1:
        raise ParameterError("sample_budget must be at least 1")
    if space.finite and space.size ** 4 <= sample_budget:
        return _finite_exhaustive(space)
    return _sampled(space, sample_budget, seed)


@dataclass
class SymmetryReport:
    symmetric: bool
    witnesses: list
    exhaustive: bool

    def __bool__(self):
        return self.symmetric


def check_symmetric(space: GSpace, sample_budget: int = 2000, seed: int = 0) -> SymmetryReport:
    """Test ``G(x,y,y) == G(x,x,y)`` for all pairs (finite) or sampled pairs."""
    if sample_budget < 1:
        raise ParameterError("sample_budget must be at least 1")
    if space.finite and space.size ** 2 <= sample_budget:
        t = space.table
        idx = np.arange(space.size)
        wit = _witnesses(t[idx, idx, :] != t[:, idx, idx])
        return SymmetryReport(not wit, wit, True)
    rng = np.random.default_rng(seed)
    tol = 0.0 if space.finite else TAU_SYM
    wit = []
    for x, y in zip(space.sample(rng, sample_budget), space.sample(rng, sample_budget)):
        if not _close(space.g(x, y, y), space.g(x, x, y), tol):
            wit.append((x, y))
            if len(wit) >= MAX_WITNESSES:
                break
    return SymmetryReport(not wit, wit, False)

