"""File formats: space and function loading, CSV/JSON report emission.

Space JSON schema::

    {"engine": "point-cloud" | "interval-1d",
     "points": [...],                       # cloud coords/ids, or 1d sites
     "distances": [...] | "euclidean-1d",   # row-major lower triangle
     "weights": [...],
     "interval": {"a": ..., "b": ..., "density_breakpoints": [...],
                  "density_values": [...]}}

The CSV alternative is point_id, coordinate(s), weight per row (point
cloud with the euclidean metric).  Function files are JSON with either
breakpoints/values (piecewise linear) or values (per point), or
two-column CSV.  All emitted CSV is RFC-4180 via the csv module and all
JSON is sorted-key, so reruns are byte-identical.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .functions import SampledFunction
from .space import INTERVAL_1D, POINT_CLOUD, Space


def load_space(path) -> Space:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        return _space_from_csv(path)
    doc = json.loads(path.read_text())
    engine = doc.get("engine", POINT_CLOUD)
    if engine == INTERVAL_1D:
        iv = doc["interval"]
        return Space.interval(iv["a"], iv["b"], iv["density_breakpoints"],
                              iv["density_values"], doc["points"],
                              truncated_from_unbounded=doc.get(
                                  "truncated_from_unbounded", False))
    w = np.asarray(doc["weights"], dtype=float)
    dist_spec = doc.get("distances", "euclidean-1d")
    pts = np.asarray(doc["points"], dtype=float)
    if isinstance(dist_spec, str):
        if dist_spec != "euclidean-1d":
            raise ValueError(f"unknown distances spec {dist_spec!r}")
        d = np.abs(pts[:, None] - pts[None, :])
        return Space.point_cloud(w, dists=d, coords=pts)
    n = w.size
    d = np.zeros((n, n))
    tri = list(dist_spec)
    k = 0
    for i in range(1, n):
        for j in range(i):
            d[i, j] = d[j, i] = tri[k]
            k += 1
    return Space.point_cloud(w, dists=d,
                             coords=pts if pts.size == n else None)


def _space_from_csv(path) -> Space:
    coords, weights = [], []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("point_id") or row[0].startswith("#"):
                continue
            coords.append([float(v) for v in row[1:-1]])
            weights.append(float(row[-1]))
    return Space.point_cloud(np.asarray(weights), coords=np.asarray(coords))


def save_space(space: Space, path) -> None:
    if space.engine == INTERVAL_1D:
        doc = {"engine": INTERVAL_1D, "points": space.grid.tolist(),
               "distances": "euclidean-1d", "weights": [],
               "interval": {"a": space.a, "b": space.b,
                            "density_breakpoints": space.dens_x.tolist(),
                            "density_values": space.dens_w.tolist()},
               "truncated_from_unbounded": space.truncated_from_unbounded}
    else:
        n = space.n_points
        tri = [float(space.dists[i, j]) for i in range(1, n) for j in range(i)]
        doc = {"engine": POINT_CLOUD,
               "points": (space.coords.tolist() if space.coords is not None
                          else list(range(n))),
               "distances": tri, "weights": space.weights.tolist()}
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def load_function(space: Space, path) -> SampledFunction:
    path = Path(path)
    if path.suffix.lower() == ".csv":
        xs, ys = [], []
        with open(path, newline="") as fh:
            for row in csv.reader(fh):
                if not row or row[0].startswith(("x", "#")):
                    continue
                xs.append(float(row[0]))
                ys.append(float(row[1]))
        if space.engine == INTERVAL_1D:
            return SampledFunction.piecewise_linear(space, xs, ys)
        return SampledFunction.from_values(space, ys)
    doc = json.loads(path.read_text())
    if "breakpoints" in doc:
        return SampledFunction.piecewise_linear(space, doc["breakpoints"],
                                                doc["values"])
    return SampledFunction.from_values(space, doc["values"])


def save_function(f: SampledFunction, path) -> None:
    if f.space.engine == INTERVAL_1D:
        doc = {"breakpoints": f.bx.tolist(), "values": f.by.tolist()}
    else:
        doc = {"values": f.values.tolist()}
    Path(path).write_text(json.dumps(doc, sort_keys=True) + "\n")


def config_digest(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def write_csv(path, header, rows, config: dict | None = None) -> None:
    """RFC-4180 CSV plus a sidecar JSON with the run's config digest."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    if config is not None:
        write_report(str(path) + ".config.json", config)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return v


def write_report(path, payload: dict) -> None:
    doc = dict(payload)
    doc["config_digest"] = config_digest(payload.get("config", payload))
    Path(path).write_text(json.dumps(doc, sort_keys=True, indent=2,
                                     default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")
