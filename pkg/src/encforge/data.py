"""Driving-encounter data: containers, preprocessing, synthesis, file I/O.

An encounter is a pair of time-aligned 2-D trajectories. Raw coordinates
are meters; normalization maps an encounter into [-1, 1] and keeps the
affine metadata needed to invert exactly.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

EARTH_RADIUS_M = 6371000.0

SYNTH_FAMILIES = ("crossing", "same-direction", "opposite-direction", "merging")


class ParseError(ValueError):
    """A data file row could not be parsed; message carries the line number."""


class ValidationError(ValueError):
    """Structurally parseable data violated an encounter invariant."""


class DegenerateInputError(ValueError):
    """Input has no spatial extent (all points identical)."""


@dataclass
class Encounter:
    """Two equal-length (T, 2) trajectories plus normalization metadata."""

    s1: np.ndarray
    s2: np.ndarray
    normalized: bool = False
    norm_mode: str | None = None          # "shared" or "literal"
    centroid: np.ndarray | None = None    # (2,) shared or (2, 2) per sequence
    scale: float | None = None

    def __post_init__(self):
        self.s1 = np.asarray(self.s1, dtype=np.float64)
        self.s2 = np.asarray(self.s2, dtype=np.float64)
        for name, s in (("s1", self.s1), ("s2", self.s2)):
            if s.ndim != 2 or s.shape[1] != 2:
                raise ValidationError(f"{name} must have shape (T, 2), got {s.shape}")
            if not np.all(np.isfinite(s)):
                raise ValidationError(f"{name} contains non-finite coordinates")
        if len(self.s1) != len(self.s2):
            raise ValidationError(
                f"trajectory lengths differ: {len(self.s1)} vs {len(self.s2)}")

    @property
    def length(self) -> int:
        return len(self.s1)


def resample(traj, points: int) -> np.ndarray:
    """Piecewise-linear resampling to ``points`` samples, uniform in index.

    Endpoints are preserved exactly; a straight uniformly-sampled input is
    reproduced exactly at any target length.
    """
    traj = np.asarray(traj, dtype=np.float64)
    if traj.ndim != 2 or traj.shape[1] != 2:
        raise ValidationError(f"trajectory must have shape (n, 2), got {traj.shape}")
    n = len(traj)
    if n < 2:
        raise ValueError(f"resample needs at least 2 input points, got {n}")
    if points < 2:
        raise ValueError(f"resample needs at least 2 output points, got {points}")
    u = np.linspace(0.0, float(n - 1), points)
    idx = np.arange(n, dtype=np.float64)
    return np.column_stack([np.interp(u, idx, traj[:, 0]), np.interp(u, idx, traj[:, 1])])


def resample_encounter(enc: Encounter, points: int) -> Encounter:
    return replace(enc, s1=resample(enc.s1, points), s2=resample(enc.s2, points))


def normalize(enc: Encounter, mode: str = "shared") -> Encounter:
    """Map an encounter into [-1, 1]^2, keeping metadata for exact inversion.

    ``shared`` (default): subtract the joint centroid of both sequences and
    divide by the largest absolute deviation over both: a single rigid
    frame, so inter-vehicle geometry survives up to one uniform scale.
    ``literal``: subtract each sequence's own mean instead (this recenters
    the vehicles independently and distorts their relative placement; kept
    for comparison). The divisor is shared in both modes.
    """
    if enc.normalized:
        raise ValueError("encounter is already normalized")
    if mode not in ("shared", "literal"):
        raise ValueError(f"unknown normalization mode {mode!r}")
    if mode == "shared":
        centroid = np.concatenate([enc.s1, enc.s2]).mean(axis=0)
        c1 = c2 = centroid
    else:
        c1 = enc.s1.mean(axis=0)
        c2 = enc.s2.mean(axis=0)
        centroid = np.stack([c1, c2])
    d1 = enc.s1 - c1
    d2 = enc.s2 - c2
    scale = max(np.abs(d1).max(), np.abs(d2).max())
    if scale == 0.0:
        raise DegenerateInputError("all points identical; nothing to normalize")
    return Encounter(s1=d1 / scale, s2=d2 / scale, normalized=True,
                     norm_mode=mode, centroid=centroid, scale=float(scale))


def denormalize(enc: Encounter) -> Encounter:
    """Invert :func:`normalize` exactly using the stored metadata."""
    if not enc.normalized:
        raise ValueError("encounter is not normalized")
    if enc.centroid is None or enc.scale is None:
        raise ValueError("normalization metadata missing; cannot denormalize")
    if enc.norm_mode == "literal":
        c1, c2 = enc.centroid[0], enc.centroid[1]
    else:
        c1 = c2 = enc.centroid
    return Encounter(s1=enc.s1 * enc.scale + c1, s2=enc.s2 * enc.scale + c2,
                     normalized=False)


# ---------------------------------------------------------------------------
# synthetic encounters


@dataclass
class SynthSpec:
    """Recipe for a seeded batch of synthetic encounters.

    Windows default to 10 s at 10 Hz of raw samples before any resampling.
    ``noise`` is the std of pointwise Gaussian position noise in meters.
    """

    family: str
    count: int = 1
    noise: float = 0.0
    speed_range: tuple[float, float] = (5.0, 15.0)
    seed: int = 0
    duration_s: float = 10.0
    rate_hz: float = 10.0

    def __post_init__(self):
        if self.family not in SYNTH_FAMILIES:
            raise ValueError(
                f"unknown encounter family {self.family!r}; choose from {SYNTH_FAMILIES}")
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.noise < 0:
            raise ValueError("noise must be >= 0")
        lo, hi = self.speed_range
        if not (0 < lo <= hi):
            raise ValueError(f"bad speed range {self.speed_range}")


def _unit(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def _one_encounter(spec: SynthSpec, rng: np.random.Generator) -> Encounter:
    n = int(round(spec.duration_s * spec.rate_hz)) + 1
    ts = np.arange(n) / spec.rate_hz
    v1, v2 = rng.uniform(*spec.speed_range, size=2)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    anchor = rng.uniform(-30.0, 30.0, size=2)

    if spec.family == "crossing":
        # both vehicles reach the anchor at the middle sample
        delta = math.radians(rng.uniform(60.0, 120.0)) * rng.choice([-1.0, 1.0])
        t_mid = ts[(n - 1) // 2]
        s1 = anchor + np.outer(ts - t_mid, v1 * _unit(theta))
        s2 = anchor + np.outer(ts - t_mid, v2 * _unit(theta + delta))
    elif spec.family in ("same-direction", "opposite-direction"):
        u = _unit(theta)
        lateral = np.array([-u[1], u[0]]) * rng.uniform(2.5, 6.0)
        stagger = rng.uniform(-10.0, 10.0)
        s1 = anchor + np.outer(ts, v1 * u)
        if spec.family == "same-direction":
            s2 = anchor + lateral + stagger * u + np.outer(ts, v2 * u)
        else:
            head = anchor + lateral + (v2 * spec.duration_s + stagger) * u
            s2 = head + np.outer(ts, -v2 * u)
    else:  # merging: straight paths converging to a small terminal separation
        gap = rng.uniform(1.0, 2.5)
        phi = rng.uniform(0.0, 2.0 * math.pi)
        end1 = anchor + 0.5 * gap * _unit(phi)
        end2 = anchor - 0.5 * gap * _unit(phi)
        delta = math.radians(rng.uniform(15.0, 75.0)) * rng.choice([-1.0, 1.0])
        s1 = end1 + np.outer(ts - ts[-1], v1 * _unit(theta))
        s2 = end2 + np.outer(ts - ts[-1], v2 * _unit(theta + delta))

    if spec.noise > 0:
        s1 = s1 + rng.normal(0.0, spec.noise, size=s1.shape)
        s2 = s2 + rng.normal(0.0, spec.noise, size=s2.shape)
    return Encounter(s1=s1, s2=s2)


def synth_generate(spec: SynthSpec) -> list[Encounter]:
    """Generate ``spec.count`` raw encounters, deterministic under ``spec.seed``."""
    rng = np.random.default_rng(spec.seed)
    return [_one_encounter(spec, rng) for _ in range(spec.count)]


# ---------------------------------------------------------------------------
# file I/O

_HEADERS = {
    "xy": ["encounter_id", "t_index", "x1", "y1", "x2", "y2"],
    "latlon": ["encounter_id", "t_index", "lat1", "lon1", "lat2", "lon2"],
}


def _fmt(v: float) -> str:
    return format(v, ".17g")


def export(encounters: list[Encounter], path, fmt: str = "xy",
           manifest: bool = True) -> None:
    """Write encounters as CSV (+ JSON manifest alongside by default).

    Only ``xy`` export is supported: lat/lon ingestion is a one-way
    projection (the geodetic origin is not retained).
    """
    if fmt != "xy":
        raise ValueError(f"export supports only 'xy', got {fmt!r}")
    path = str(path)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(_HEADERS["xy"])
        for eid, enc in enumerate(encounters):
            for t in range(enc.length):
                w.writerow([eid, t, _fmt(enc.s1[t, 0]), _fmt(enc.s1[t, 1]),
                            _fmt(enc.s2[t, 0]), _fmt(enc.s2[t, 1])])
    if manifest:
        write_manifest(manifest_path(path), encounters, fmt)


def manifest_path(csv_path) -> str:
    return str(csv_path) + ".manifest.json"


def write_manifest(path, encounters: list[Encounter], fmt: str) -> None:
    doc = {
        "format_version": 1,
        "format": fmt,
        "units": "normalized" if all(e.normalized for e in encounters) else "meters",
        "count": len(encounters),
        "encounters": [
            {"id": i, "points": e.length, "normalized": e.normalized,
             "norm_mode": e.norm_mode}
            for i, e in enumerate(encounters)
        ],
    }
    with open(str(path), "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def _project_latlon(lat: np.ndarray, lon: np.ndarray,
                    lat0: float, lon0: float) -> tuple[np.ndarray, np.ndarray]:
    # equirectangular tangent plane about (lat0, lon0), meters
    x = EARTH_RADIUS_M * np.radians(lon - lon0) * math.cos(math.radians(lat0))
    y = EARTH_RADIUS_M * np.radians(lat - lat0)
    return x, y


def ingest(path, fmt: str = "xy") -> list[Encounter]:
    """Read encounters from CSV.

    ``xy`` columns are meters (or normalized units) used as-is; ``latlon``
    rows are projected to local tangent-plane meters about each encounter's
    mean latitude/longitude. Rows of one encounter must be contiguous with
    t_index running 0..T-1.
    """
    if fmt not in _HEADERS:
        raise ValueError(f"unknown dataset format {fmt!r}")
    groups: dict[str, list[list[float]]] = {}
    order: list[str] = []
    with open(str(path), newline="") as f:
        reader = csv.reader(f)
        for lineno, row in enumerate(reader, start=1):
            if lineno == 1 and row and not _is_number(row[1] if len(row) > 1 else ""):
                continue  # header row
            if not row:
                continue
            if len(row) != 6:
                raise ParseError(f"line {lineno}: expected 6 fields, got {len(row)}")
            try:
                values = [float(v) for v in row[1:]]
            except ValueError as e:
                raise ParseError(f"line {lineno}: {e}") from None
            eid = row[0]
            if eid not in groups:
                groups[eid] = []
                order.append(eid)
            t_index = values[0]
            if t_index != len(groups[eid]):
                raise ValidationError(
                    f"line {lineno}: encounter {eid} has non-consecutive t_index "
                    f"{int(t_index)} (expected {len(groups[eid])})")
            groups[eid].append(values[1:])

    encounters = []
    for eid in order:
        arr = np.asarray(groups[eid], dtype=np.float64)
        if len(arr) < 1:
            raise ValidationError(f"encounter {eid} is empty")
        a, b = arr[:, 0:2], arr[:, 2:4]
        if fmt == "latlon":
            lat0 = float(np.concatenate([a[:, 0], b[:, 0]]).mean())
            lon0 = float(np.concatenate([a[:, 1], b[:, 1]]).mean())
            x1, y1 = _project_latlon(a[:, 0], a[:, 1], lat0, lon0)
            x2, y2 = _project_latlon(b[:, 0], b[:, 1], lat0, lon0)
            a = np.column_stack([x1, y1])
            b = np.column_stack([x2, y2])
        encounters.append(Encounter(s1=a, s2=b))
    return encounters


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def load_manifest(path) -> dict:
    with open(str(path)) as f:
        return json.load(f)
