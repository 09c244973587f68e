"""Readers and writers for the on-disk formats.

Finite space (JSON)::

    {"carrier": ["p", "q"], "g": [[0, 0, 0, 0], [0, 0, 1, 1], ...]}

with one ``[i, j, k, value]`` row per index triple ``i <= j <= k``.

Family config::

    {"kind": "affine_real" | "table" | "constant", "maps": [...], "index_cap": N}

``affine_real`` maps are ``[c, d]`` pairs for ``x -> c x + d``; ``table``
maps are image lists; ``constant`` takes ``"point"`` instead of ``maps``.

Schedule config: ``{"kind": "constant", "delta": .., "theta": .., "lambda": ..,
"index_cap": N}`` or ``{"kind": "points", "space": <space spec>, "a": [..],
"b": [..], "c": [..], "index_cap": N}``.

Sequences are plain text, one value per line.  Reports are JSON with sorted
keys; tables are CSV.
"""
from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from . import contractions as C
from .errors import ParameterError
from .gmetric_core import FiniteGSpace, GSpace, Interval, discrete_g, real_max_space, real_sum_space


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def load_finite_space(path) -> FiniteGSpace:
    data = _read_json(path)
    return finite_space_from_dict(data)


def finite_space_from_dict(data: dict) -> FiniteGSpace:
    if "carrier" not in data or "g" not in data:
        raise ParameterError("finite space needs 'carrier' and 'g'")
    labels = list(data["carrier"])
    entries = []
    for row in data["g"]:
        if len(row) != 4:
            raise ParameterError(f"bad entry {row!r}")
        i, j, k, v = row
        if not (i <= j <= k):
            raise ParameterError(f"entry {row!r} is not in canonical order i <= j <= k")
        entries.append((i, j, k, v))
    return FiniteGSpace.from_entries(labels, entries, name=str(data.get("name", "file")))


def finite_space_to_dict(space: FiniteGSpace) -> dict:
    return {"carrier": list(space.labels), "g": [list(e) for e in space.entries()]}


def save_finite_space(space: FiniteGSpace, path):
    write_json(path, finite_space_to_dict(space))


BUILTIN_SPACES = {
    "sum-real": lambda: real_sum_space(),
    "max-real": lambda: real_max_space(),
}


def parse_space(spec) -> GSpace:
    """A builtin name (``sum-real``, ``max-real``, ``discrete:N``) or a finite-space file."""
    if isinstance(spec, dict):
        return finite_space_from_dict(spec)
    spec = str(spec)
    if spec in BUILTIN_SPACES:
        return BUILTIN_SPACES[spec]()
    if spec.startswith("discrete:"):
        return discrete_g(int(spec.split(":", 1)[1]))
    if not Path(spec).is_file():
        raise FileNotFoundError(f"space file not found: {spec}")
    return load_finite_space(spec)


BUILTIN_FAMILIES = {
    "halving": {"kind": "affine_real", "maps": [[0.5, 0.0]]},
    "quarter": {"kind": "affine_real", "maps": [[0.25, 0.0]]},
    "identity": {"kind": "affine_real", "maps": [[1.0, 0.0]]},
}


def family_from_dict(data: dict, space: GSpace) -> C.MappingFamily:
    kind = data.get("kind")
    cap = data.get("index_cap")
    if kind == "affine_real":
        return C.affine_family([tuple(m) for m in data["maps"]], index_cap=cap)
    if kind == "table":
        return C.table_family(space, data["maps"], index_cap=cap)
    if kind == "constant":
        return C.constant_family(data["point"], index_cap=cap or 1, space=space)
    raise ParameterError(f"unknown family kind {kind!r}")


def parse_family(spec, space: GSpace) -> C.MappingFamily:
    """A builtin name (``halving``, ``quarter``, ``identity``, ``constant:q``) or a config file."""
    if isinstance(spec, dict):
        return family_from_dict(spec, space)
    spec = str(spec)
    if spec in BUILTIN_FAMILIES:
        return family_from_dict(BUILTIN_FAMILIES[spec], space)
    if spec.startswith("constant:"):
        raw = spec.split(":", 1)[1]
        q = int(raw) if space.finite else float(raw)
        return C.constant_family(q, space=space)
    if not Path(spec).is_file():
        raise FileNotFoundError(f"family file not found: {spec}")
    return family_from_dict(_read_json(spec), space)


def schedule_from_dict(data: dict) -> C.CoefficientSchedule:
    kind = data.get("kind", "constant")
    cap = int(data.get("index_cap", C.DEFAULT_INDEX_CAP))
    if kind == "constant":
        return C.CoefficientSchedule.constant(
            float(data["delta"]), float(data["theta"]),
            None if data.get("lambda") is None else float(data["lambda"]), cap,
        )
    if kind == "points":
        space = parse_space(data["space"])
        return C.schedule_from_points(space, data["a"], data["b"], data.get("c"), cap)
    raise ParameterError(f"unknown schedule kind {kind!r}")


def parse_schedule(spec) -> C.CoefficientSchedule:
    """Inline ``delta=0.6,theta=0[,lambda=0.01][,cap=N]`` or a schedule config file."""
    if isinstance(spec, dict):
        return schedule_from_dict(spec)
    spec = str(spec)
    if "=" in spec and not Path(spec).is_file():
        fields = dict(part.split("=", 1) for part in spec.split(","))
        data = {"kind": "constant", "delta": fields.pop("delta"), "theta": fields.pop("theta")}
        data["lambda"] = fields.pop("lambda", fields.pop("lam", None))
        if "cap" in fields:
            data["index_cap"] = fields.pop("cap")
        if fields:
            raise ParameterError(f"unknown schedule fields {sorted(fields)}")
        return schedule_from_dict(data)
    if not Path(spec).is_file():
        raise FileNotFoundError(f"schedule file not found: {spec}")
    return schedule_from_dict(_read_json(spec))


def parse_phi(spec):
    """``identity``, ``scale:c`` or ``root:s``; ``None``/``none`` for no function."""
    if spec is None or spec == "none":
        return None
    if spec == "identity":
        return C.identity_phi()
    name, _, arg = str(spec).partition(":")
    if name == "scale":
        return C.scale_phi(float(arg))
    if name == "root":
        return C.root_phi(float(arg))
    raise ParameterError(f"unknown phi spec {spec!r}")


def parse_point(raw: str, space: GSpace):
    return int(raw) if space.finite else float(raw)


def read_sequence(path) -> np.ndarray:
    values = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line and not line.startswith("#"):
                values.append(float(line))
    return np.array(values)


def write_sequence(path, values):
    with open(path, "w") as fh:
        for v in values:
            fh.write(f"{float(v)!r}\n")


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.generic):
        return _clean(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)
    return obj


def write_json(path, data):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(_clean(data), fh, indent=2, sort_keys=True)
        fh.write("\n")


def orbit_rows(trace, cert=None) -> list[dict]:
    """One row per step: ``n, x_n, beta_n, predicted bound, observed max``."""
    rows = []
    for n, x in enumerate(trace.points):
        beta = float(trace.step_distances[n]) if n < len(trace.step_distances) else ""
        pred = obs = ""
        if cert is not None and n >= cert.n_lambda:
            pred = cert.predicted_bound(n)
            obs = cert.observed_max.get(n, "")
        rows.append({"n": n, "x_n": x, "beta_n": beta, "predicted_bound": pred, "observed_max": obs})
    return rows


def write_orbit_table(path, trace, cert=None):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=["n", "x_n", "beta_n", "predicted_bound", "observed_max"])
        w.writeheader()
        for row in orbit_rows(trace, cert):
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
