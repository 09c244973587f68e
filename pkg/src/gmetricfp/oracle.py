"""Brute-force ground truth on tiny finite instances.

Everything here is decided by enumeration: G tables by an axiom filter that
shares no code with :func:`gmetric_core.check_axioms`, contraction
conditions over every point triple and index triple, fixed points by
scanning.  :func:`theorem_sweep` then confronts the solver with these
answers.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional, Sequence

import numpy as np

from . import contractions as C
from .errors import BudgetError, NonConvergenceError, ParameterError
from .gmetric_core import FiniteGSpace
from .sequences import find_alpha_certificate, find_lambda_certificate, max_pairing_distances
from .solver import fixed_point_transfer, picard_orbit

DEFAULT_G_GRID = (0.0, 0.5, 1.0, 2.0)
DEFAULT_COEFF_GRID = (0.0, 0.05, 0.1, 0.3)
DEFAULT_CAP = 10**7
RATE_PREFIX = 64
SWEEP_MAX_STEPS = 200


@dataclass
class FiniteInstance:
    space: FiniteGSpace
    maps: tuple  # tuple of image tuples, cycled as T_1, T_2, ...
    coeffs: tuple  # (a, b, c) for abbas; (theta, delta) for vetro
    mode: str = "abbas"

    def family(self) -> C.MappingFamily:
        return C.table_family(self.space, self.maps)

    def schedule(self) -> C.CoefficientSchedule:
        if self.mode == "abbas":
            a, b, c = self.coeffs
            return C.CoefficientSchedule.constant(delta=a, theta=b, lam=c, index_cap=len(self.maps))
        theta, delta = self.coeffs
        return C.CoefficientSchedule.constant(delta=delta, theta=theta, index_cap=len(self.maps))

    def to_dict(self) -> dict:
        return {
            "space": {"carrier": list(self.space.labels), "g": [list(e) for e in self.space.entries()]},
            "family": {"kind": "table", "maps": [list(m) for m in self.maps], "index_cap": len(self.maps)},
            "coefficients": list(self.coeffs),
            "mode": self.mode,
        }


# --------------------------------------------------------------------------- tables


def _perm_index(n):
    """For each full index (x, y, z) the position of its sorted triple in the canonical list."""
    canon = list(itertools.combinations_with_replacement(range(n), 3))
    pos = {t: p for p, t in enumerate(canon)}
    full = np.empty((n, n, n), dtype=int)
    for x, y, z in itertools.product(range(n), repeat=3):
        full[x, y, z] = pos[tuple(sorted((x, y, z)))]
    return canon, full


def candidate_count(n: int, grid: Sequence[float]) -> int:
    """Tables left after forcing the diagonal to 0 and off-diagonal entries positive."""
    if 0.0 not in grid:
        return 0
    pos = [v for v in grid if v > 0]
    off = len(list(itertools.combinations_with_replacement(range(n), 3))) - n
    return len(pos) ** off


def _axiom_filter(tables: np.ndarray) -> np.ndarray:
    """Batch G1--G5 test on full tables of shape ``(B, n, n, n)``.

    Written independently of :mod:`gmetric_core`: explicit loops over the
    first two arguments, vectorized over the rest.
    """
    B, n = tables.shape[0], tables.shape[1]
    ok = np.ones(B, dtype=bool)
    diag = tables[:, np.arange(n), np.arange(n), np.arange(n)]
    ok &= np.all(diag == 0, axis=1)
    for perm in itertools.permutations(range(1, 4)):
        ok &= np.all((tables == np.transpose(tables, (0,) + perm)).reshape(B, -1), axis=1)
    for x in range(n):
        # G(x, a, a) for every a
        g_xaa = np.stack([tables[:, x, a, a] for a in range(n)], axis=1)
        for y in range(n):
            xxy = tables[:, x, x, y]
            if y != x:
                ok &= xxy > 0
            others = [z for z in range(n) if z != y]
            ok &= np.all(xxy[:, None] <= tables[:, x, y, others], axis=1)
            # G(x, y, z) <= G(x, a, a) + G(a, y, z) for every z and a
            lhs = tables[:, x, y, :]  # (B, z)
            rhs = g_xaa[:, :, None] + np.stack([tables[:, a, y, :] for a in range(n)], axis=1)  # (B, a, z)
            ok &= np.all(lhs[:, None, :] <= rhs, axis=(1, 2))
    return ok


def enumerate_tables(n: int, grid: Sequence[float] = DEFAULT_G_GRID, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Every G-metric table on ``n`` points with values from ``grid``.

    Diagonal entries are pinned to 0 and the others drawn from the positive
    grid values (the axioms force both); the remaining candidates are
    filtered exactly.  Deterministic order.
    """
    if n < 1:
        raise ParameterError("carrier size must be positive")
    grid = sorted(float(v) for v in grid)
    total = candidate_count(n, grid)
    if total > cap:
        raise BudgetError(f"{total} candidate tables exceed the cap {cap}", candidates=total, partial=0)
    if total == 0:
        return np.empty((0, n, n, n))
    canon, full = _perm_index(n)
    pos = np.array([v for v in grid if v > 0])
    off = [p for p, t in enumerate(canon) if len(set(t)) > 1]
    choice = np.array(list(itertools.product(range(len(pos)), repeat=len(off))), dtype=int).reshape(total, len(off))
    vals = np.zeros((total, len(canon)))
    vals[:, off] = pos[choice]
    tables = vals[:, full]
    return tables[_axiom_filter(tables)]


def is_gmetric_bruteforce(table) -> bool:
    """Plain-loop axiom test; the reference for mutation checks."""
    t = np.asarray(table)
    n = t.shape[0]
    pts = range(n)
    for x, y, z in itertools.product(pts, repeat=3):
        if x == y == z and t[x, y, z] != 0:
            return False
        if x != y and not t[x, x, y] > 0:
            return False
        if z != y and t[x, x, y] > t[x, y, z]:
            return False
        if any(t[x, y, z] != t[p] for p in itertools.permutations((x, y, z))):
            return False
        if any(t[x, y, z] > t[x, a, a] + t[a, y, z] for a in pts):
            return False
    return True


def all_maps(n: int) -> list[tuple]:
    return list(itertools.product(range(n), repeat=n))


def all_families(n: int, family_size: int) -> list[tuple]:
    return list(itertools.product(all_maps(n), repeat=family_size))


def enumerate_instances(
    carrier_size: int,
    family_size: int,
    g_value_grid: Sequence[float] = DEFAULT_G_GRID,
    coeff_grid: Sequence[float] = DEFAULT_COEFF_GRID,
    mode: str = "abbas",
    cap: int = DEFAULT_CAP,
) -> Iterator[FiniteInstance]:
    """Stream every (table, family, constant coefficients) combination."""
    if carrier_size > 4 or family_size > 3:
        raise ParameterError("oracle instances are limited to 4 points and 3 maps")
    tables = enumerate_tables(carrier_size, g_value_grid, cap)
    labels = list(range(carrier_size))
    n_coef = 3 if mode == "abbas" else 2
    for t in tables:
        space = FiniteGSpace(labels, t, name="oracle")
        for fam in all_families(carrier_size, family_size):
            for coeffs in itertools.product(coeff_grid, repeat=n_coef):
                yield FiniteInstance(space, fam, tuple(float(c) for c in coeffs), mode)


def brute_force_common_fixed_points(inst: FiniteInstance) -> frozenset:
    return frozenset(u for u in range(inst.space.size) if all(m[u] == u for m in inst.maps))


# --------------------------------------------------------------------------- condition decision


class _ConditionTable:
    """Feasibility of the contraction for every map triple on one G table.

    For a map triple ``(P, Q, R)`` and point triple ``(x, y, z)`` the
    condition is linear in the coefficients, ``lhs <= a A + b B + c C``;
    the arrays hold ``lhs, A, B, C`` for all point triples at once.
    """

    def __init__(self, t: np.ndarray, maps: np.ndarray, triples: np.ndarray, mode: str):
        n = t.shape[0]
        X, Y, Z = (g.ravel() for g in np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij"))
        if mode == "vetro":
            keep = X != Y
            X, Y, Z = X[keep], Y[keep], Z[keep]
        P, Q, R = maps[triples[:, 0]], maps[triples[:, 1]], maps[triples[:, 2]]
        tx, ty, tz = P[:, X], Q[:, Y], R[:, Z]
        self.lhs = t[tx, ty, tz]
        self.A = np.broadcast_to(t[X, Y, Z], self.lhs.shape)
        if mode == "abbas":
            self.B = t[tx, X, X] + t[Y, ty, Y] + t[Z, Z, tz]
            self.C = t[tx, Y, Z] + t[X, ty, Z] + t[X, Y, tz]
        else:
            self.B = t[X, tx, tx] + 0.5 * (t[Y, ty, ty] + t[Z, tz, tz])
            self.C = None

    def feasible(self, coeffs) -> np.ndarray:
        if self.C is not None:
            a, b, c = coeffs
            rhs = a * self.A + b * self.B + c * self.C
        else:
            theta, delta = coeffs
            rhs = theta * self.B + delta * self.A
        return np.all(self.lhs <= rhs + C.TAU_INEQ * (1.0 + np.abs(rhs)), axis=1)


def _triple_patterns(family_size):
    return list(itertools.product(range(family_size), repeat=3))


# --------------------------------------------------------------------------- sweep


@dataclass
class SweepReport:
    mode: str
    instances: int = 0
    hypotheses_met: int = 0
    hypotheses_not_met: int = 0
    red_flags: list = field(default_factory=list)
    per_size: dict = field(default_factory=dict)
    solver_crosschecks: int = 0

    @property
    def ok(self) -> bool:
        return not self.red_flags

    def to_dict(self):
        return {
            "mode": self.mode,
            "instances": self.instances,
            "hypotheses_met": self.hypotheses_met,
            "hypotheses_not_met": self.hypotheses_not_met,
            "red_flag_count": len(self.red_flags),
            "red_flags": self.red_flags,
            "per_size": {str(k): v for k, v in sorted(self.per_size.items())},
            "solver_crosschecks": self.solver_crosschecks,
        }


def _rate_ok(mode, r):
    """Hypothesis on a constant rate sequence, decided with the sequences module."""
    if not np.isfinite(r) or r < 0:
        return False
    rates = np.full(RATE_PREFIX, r)
    if mode == "vetro":
        return find_alpha_certificate(rates) is not None
    return find_lambda_certificate(max_pairing_distances(rates)) is not None


def _default_rate(mode):
    if mode == "abbas":
        return lambda a, b, c: C.r_abbas(a, b, c)
    return lambda theta, delta: C.r_vetro(theta, delta, 1.0)


def _orbit_facts(space, family, starts):
    out = []
    for x0 in starts:
        tr = picard_orbit(space, family, x0, max_steps=SWEEP_MAX_STEPS)
        pts = tr.points
        while len(pts) < 3:
            pts = pts + [family(len(pts), pts[-1])]
        steps = [space.g(pts[i], pts[i + 1], pts[i + 2]) for i in range(len(pts) - 2)]
        out.append((x0, tr.termination, tr.last, steps))
    return out


def theorem_sweep(
    mode: str = "abbas",
    carrier_sizes: Sequence[int] = (1, 2, 3),
    family_sizes: Sequence[int] = (1, 2),
    g_value_grid: Sequence[float] = DEFAULT_G_GRID,
    coeff_grid: Sequence[float] = DEFAULT_COEFF_GRID,
    cap: int = DEFAULT_CAP,
    rate_fn: Optional[Callable] = None,
    crosscheck: bool = True,
) -> SweepReport:
    """Decide hypotheses exhaustively on every small instance and test the conclusions.

    For instances meeting the hypotheses the sweep asserts that there is
    exactly one common fixed point, that the orbit from every start ends
    there, that fixed-point transfer holds, and that every orbit obeys the
    per-step estimate ``G(x_n, x_{n+1}, x_{n+2}) <= r^n G(x_0, x_1, x_2)``.
    Failures are accumulated as red flags carrying the full instance.
    ``rate_fn`` replaces the rate formula (a hook for mutation tests).

    With ``crosscheck`` the first hypothesis-meeting coefficient choice of
    each (table, family) pair is re-decided by the sampling checker in
    :mod:`contractions`, which must agree.
    """
    if mode not in ("abbas", "vetro"):
        raise ParameterError(f"unknown sweep mode {mode!r}")
    rate_fn = rate_fn or _default_rate(mode)
    report = SweepReport(mode)
    n_coef = 3 if mode == "abbas" else 2
    coeff_list = [tuple(float(c) for c in cs) for cs in itertools.product(coeff_grid, repeat=n_coef)]

    # scalar hypotheses per coefficient choice (independent of table and family)
    scalar = []
    for cs in coeff_list:
        if mode == "abbas":
            a, b, c = cs
            ok = C.abbas_hypothesis_value(a, b, c) < C.ABBAS_THRESHOLD
        else:
            theta, delta = cs
            ok = theta < 1 and delta < 1
        r = None
        if ok:
            try:
                r = float(rate_fn(*cs))
            except (ArithmeticError, ValueError):
                ok = False
        scalar.append((ok and r is not None and _rate_ok(mode, r), r))

    # refuse oversize grids before doing any work
    for n in carrier_sizes:
        total = candidate_count(n, g_value_grid)
        if total > cap:
            raise BudgetError(f"{total} candidate tables at size {n} exceed the cap {cap}", candidates=total)

    for n in carrier_sizes:
        tables = enumerate_tables(n, g_value_grid, cap)
        maps = np.array(all_maps(n), dtype=int)
        K = len(maps)
        labels = list(range(n))
        for fs in family_sizes:
            fams = np.array(list(itertools.product(range(K), repeat=fs)), dtype=int).reshape(-1, fs)
            patterns = _triple_patterns(fs)
            # map triples used by some family, deduplicated
            used = np.unique(np.concatenate([fams[:, list(pt)] for pt in patterns]), axis=0)
            lookup = {tuple(row): i for i, row in enumerate(used)}
            fam_rows = np.array([[lookup[tuple(f[list(pt)])] for pt in patterns] for f in fams])
            size_key = f"{n}x{fs}"
            stats = report.per_size.setdefault(size_key, {"tables": 0, "instances": 0, "hypotheses_met": 0})
            stats["tables"] += len(tables)
            for t in tables:
                space = FiniteGSpace(labels, t, name="oracle")
                cond = _ConditionTable(t, maps, used, mode)
                feas_by_coeff = {}
                for ci, cs in enumerate(coeff_list):
                    if scalar[ci][0]:
                        per_triple = cond.feasible(cs)
                        feas_by_coeff[ci] = np.all(per_triple[fam_rows], axis=1)
                count = len(fams) * len(coeff_list)
                report.instances += count
                stats["instances"] += count
                met_any = np.zeros(len(fams), dtype=bool)
                for v in feas_by_coeff.values():
                    met_any |= v
                met_total = int(sum(v.sum() for v in feas_by_coeff.values()))
                report.hypotheses_met += met_total
                report.hypotheses_not_met += count - met_total
                stats["hypotheses_met"] += met_total
                for fi in np.flatnonzero(met_any):
                    fam_maps = tuple(tuple(int(v) for v in maps[m]) for m in fams[fi])
                    _conclusions(report, space, fam_maps, mode, coeff_list, scalar, feas_by_coeff, fi, crosscheck)
    return report


def _conclusions(report, space, fam_maps, mode, coeff_list, scalar, feas_by_coeff, fi, crosscheck):
    inst_stub = FiniteInstance(space, fam_maps, (), mode)
    family = inst_stub.family()
    fixed = brute_force_common_fixed_points(inst_stub)
    facts = _orbit_facts(space, family, range(space.size))
    checked_solver = False
    for ci, feas in feas_by_coeff.items():
        if not feas[fi]:
            continue
        inst = FiniteInstance(space, fam_maps, coeff_list[ci], mode)
        problems = []
        if len(fixed) != 1:
            problems.append(f"common fixed point set {sorted(fixed)} is not a singleton")
        else:
            (u,) = fixed
            for x0, term, last, _ in facts:
                if term != "converged" or last != u:
                    problems.append(f"orbit from {x0} ended at {last} ({term}), expected {u}")
            if not fixed_point_transfer(space, family, u, tol=0.0).holds:
                problems.append("fixed-point transfer fails")
        r = scalar[ci][1]
        for x0, _, _, steps in facts:
            base = steps[0]
            for k in range(1, len(steps)):
                if not C.leq(steps[k], r**k * base):
                    problems.append(
                        f"step estimate fails from start {x0} at n={k}: {steps[k]} > {r}^{k} * {base}"
                    )
                    break
        if crosscheck and not checked_solver:
            checked_solver = True
            report.solver_crosschecks += 1
            problems += _solver_crosscheck(inst, fixed)
        if problems:
            report.red_flags.append({"instance": inst.to_dict(), "problems": problems})


def _solver_crosscheck(inst, fixed):
    from .solver import check_hypotheses, solve_common_fixed_point

    space, family, sched = inst.space, inst.family(), inst.schedule()
    hyp = check_hypotheses(space, family, sched, mode=inst.mode, triple_samples=10**6)
    if not hyp.condition.holds or not hyp.condition.exhaustive:
        return ["contractions checker disagrees with the oracle on the condition"]
    if not hyp.holds:
        return [f"solver hypotheses rejected: {hyp.reasons}"]
    if len(fixed) != 1:
        return []
    (u,) = fixed
    out = []
    for x0 in range(space.size):
        try:
            res, cert = solve_common_fixed_point(
                space, family, sched, x0, mode=inst.mode, hypotheses=hyp, tau_fix=0.0
            )
        except NonConvergenceError as exc:
            out.append(f"solver from {x0} failed: {exc}")
            continue
        if res.point != u:
            out.append(f"solver from {x0} returned {res.point}, oracle says {u}")
        if cert is not None and not cert.sound:
            out.append(f"certificate from {x0} is not sound")
    return out
