"""Model evaluation: latent-code variance scan, variance ratios, traffic
rationality profiles, and the classifier-free prior-metric variance profile.

The variance scan probes an encode/decode loop: fix one target code, draw
it from Normal(0, sigma) for a grid of sigmas while the remaining codes
are held at a single per-group draw, push every assembled code through
decode then encode, and record the per-dimension variance of the
recovered codes. A perfectly disentangled, perfectly robust loop recovers
the injected variance on the target code and exactly zero elsewhere.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .data import Encounter

PAPER_SIGMA_GRID = (0.1, 0.4, 0.7, 1.0, 1.3, 1.6, 1.9, 2.2, 2.5, 2.8)


def sample_variance(x, ddof: int = 1) -> np.ndarray:
    """Column variance, exact 0 for constant input.

    Shifting by the first row before the two-pass formula makes constant
    columns produce literal zeros instead of rounding dust.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    n = len(x)
    if n <= ddof:
        raise ValueError(f"need more than {ddof} samples, got {n}")
    d = x - x[0]
    m = d.mean(axis=0)
    return np.asarray(((d - m) ** 2).sum(axis=0) / (n - ddof))


@dataclass
class DisentanglementProfile:
    """Output variances per (target code, input sigma) group.

    ``output_variance[i, m, j]`` is the variance of recovered code j when
    code i was driven at sigma_grid[m]; ``realized_input_variance[i, m]``
    is the sample variance of the actual draws fed to code i.
    """

    sigma_grid: np.ndarray
    samples: int
    output_variance: np.ndarray           # (K, M, K)
    realized_input_variance: np.ndarray   # (K, M)

    @property
    def latent_width(self) -> int:
        return self.output_variance.shape[0]

    @property
    def group_count(self) -> int:
        return self.output_variance.shape[0] * self.output_variance.shape[1]


def disentanglement_scan(decode_fn, encode_fn, latent_width: int,
                         sigma_grid=PAPER_SIGMA_GRID, samples: int = 100,
                         seed: int = 0, pin_others_zero: bool = False) -> DisentanglementProfile:
    """Run the variance scan over every (code, sigma) group.

    ``decode_fn`` maps a (K,) code to anything ``encode_fn`` maps back to a
    (K,) recovered code; recovery should be deterministic (use the
    posterior mean). Non-target codes are drawn once per group from the
    same Normal(0, sigma), or pinned to zero with ``pin_others_zero``.
    Group seeds derive from (seed, code, sigma index), so the scan is
    deterministic and groups are independent.
    """
    K = latent_width
    grid = np.asarray(sigma_grid, dtype=np.float64)
    if samples < 2:
        raise ValueError(f"need at least 2 samples per group, got {samples}")
    omega = np.zeros((K, len(grid), K))
    realized = np.zeros((K, len(grid)))
    for i in range(K):
        for m, sigma in enumerate(grid):
            rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(i, m)))
            others = np.zeros(K) if pin_others_zero else rng.normal(0.0, sigma, size=K)
            draws = rng.normal(0.0, sigma, size=samples)
            recovered = np.empty((samples, K))
            for l in range(samples):
                z = others.copy()
                z[i] = draws[l]
                z_hat = np.asarray(encode_fn(decode_fn(z)), dtype=np.float64)
                if z_hat.shape != (K,):
                    raise ValueError(
                        f"encode returned shape {z_hat.shape}, expected ({K},)")
                recovered[l] = z_hat
            for j in range(K):
                omega[i, m, j] = sample_variance(recovered[:, j])
            realized[i, m] = float(sample_variance(draws))
    return DisentanglementProfile(sigma_grid=grid, samples=samples,
                                  output_variance=omega,
                                  realized_input_variance=realized)


@dataclass
class RatioTable:
    """On-target output variance over realized input variance, per group."""

    sigma_sq: np.ndarray      # (M,) nominal grid variances
    ratios: np.ndarray        # (K, M), NaN where omitted
    omitted: list = field(default_factory=list)


def variance_ratio(profile: DisentanglementProfile) -> RatioTable:
    """Per-code variance amplification across the sigma grid.

    The denominator is the realized sample variance of the injected draws
    (not the nominal sigma^2), so a lossless encode/decode loop scores
    exactly 1. Groups whose realized variance is zero are omitted.
    """
    if np.any(profile.sigma_grid <= 0):
        raise ValueError("sigma grid must be strictly positive")
    K, M = profile.realized_input_variance.shape
    ratios = np.full((K, M), np.nan)
    omitted = []
    for i in range(K):
        for m in range(M):
            denom = profile.realized_input_variance[i, m]
            if denom == 0.0:
                omitted.append((i, m))
            else:
                ratios[i, m] = profile.output_variance[i, m, i] / denom
    return RatioTable(sigma_sq=profile.sigma_grid ** 2, ratios=ratios, omitted=omitted)


# ---------------------------------------------------------------------------
# traffic rationality


def distance_profile(enc: Encounter) -> np.ndarray:
    """Inter-vehicle Euclidean distance at each time index (length T)."""
    return np.linalg.norm(enc.s1 - enc.s2, axis=1)


def speed_profile(seq) -> np.ndarray:
    """Distance between adjacent points (length T-1)."""
    seq = np.asarray(seq, dtype=np.float64)
    if len(seq) < 2:
        raise ValueError(f"speed profile needs at least 2 points, got {len(seq)}")
    return np.linalg.norm(np.diff(seq, axis=0), axis=1)


def direction_profile(seq) -> np.ndarray:
    """Absolute turn angle between consecutive displacement vectors, degrees.

    Values lie in [0, 180]. A zero-length displacement contributes 0 (the
    report carries the degeneracy flag).
    """
    angles, _ = _direction_with_flags(seq)
    return angles


def _direction_with_flags(seq):
    seq = np.asarray(seq, dtype=np.float64)
    if len(seq) < 3:
        raise ValueError(f"direction profile needs at least 3 points, got {len(seq)}")
    d = np.diff(seq, axis=0)
    a, b = d[:-1], d[1:]
    cross = a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0]
    dot = (a * b).sum(axis=1)
    degenerate = (np.linalg.norm(a, axis=1) == 0.0) | (np.linalg.norm(b, axis=1) == 0.0)
    angles = np.degrees(np.abs(np.arctan2(cross, dot)))
    angles[degenerate] = 0.0
    return angles, degenerate


@dataclass
class RationalityReport:
    """Distance/speed/direction profiles for one encounter (vehicle 1 for
    the per-vehicle profiles), with summary stats and optional reference
    overlays (elementwise means over a reference set)."""

    distance: np.ndarray
    speed: np.ndarray
    direction: np.ndarray
    summary: dict
    degenerate_steps: int = 0
    reference: dict | None = None


def rationality_report(enc: Encounter, reference=None) -> RationalityReport:
    if max(np.abs(enc.s1).max(), np.abs(enc.s2).max()) > 1.0:
        raise ValueError("rationality report expects a normalized encounter")
    dist = distance_profile(enc)
    speed = speed_profile(enc.s1)
    direction, degenerate = _direction_with_flags(enc.s1)
    summary = {
        "distance": {"mean": float(dist.mean()), "max": float(dist.max())},
        "speed": {"mean": float(speed.mean()), "max": float(speed.max())},
        "direction": {"mean": float(direction.mean()), "max": float(direction.max())},
    }
    overlay = None
    if reference:
        for r in reference:
            if r.length != enc.length:
                raise ValueError(
                    f"reference encounter length {r.length} differs from {enc.length}")
        overlay = {
            "distance": np.mean([distance_profile(r) for r in reference], axis=0),
            "speed": np.mean([speed_profile(r.s1) for r in reference], axis=0),
            "direction": np.mean([direction_profile(r.s1) for r in reference], axis=0),
        }
    return RationalityReport(distance=dist, speed=speed, direction=direction,
                             summary=summary, degenerate_steps=int(degenerate.sum()),
                             reference=overlay)


# ---------------------------------------------------------------------------
# prior metric (classifier-free variance part)


@dataclass
class PriorMetricProfile:
    """Normalized recovered-code variances with one code pinned to zero.

    ``normalized_variance[k, j]``: variance of recovered code j (divided by
    its calibration variance) when code k was held at 0 and the others were
    standard normal. The smallest entry in row k should sit at j == k.
    Codes whose calibration variance is zero are reported as 0 and listed
    in ``excluded``.
    """

    normalized_variance: np.ndarray  # (K, K)
    excluded: list = field(default_factory=list)


def prior_metric_profile(decode_fn, encode_fn, latent_width: int,
                         samples: int = 100, seed: int = 0) -> PriorMetricProfile:
    """Variance profile of the earlier fixed-code metric, without its classifier.

    One standard-normal calibration batch is drawn and re-used for every
    target code (with that code's column zeroed), which pairs the samples
    and makes a lossless loop score exactly 1 on the free codes.
    Population (1/N) variances throughout.
    """
    K = latent_width
    if samples < 2:
        raise ValueError(f"need at least 2 samples, got {samples}")
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((samples, K))

    def recover(batch):
        out = np.empty((len(batch), K))
        for l, z in enumerate(batch):
            out[l] = np.asarray(encode_fn(decode_fn(z)), dtype=np.float64)
        return out

    calib = recover(Z)
    calib_var = np.array([float(sample_variance(calib[:, j], ddof=0)) for j in range(K)])
    excluded = [j for j in range(K) if calib_var[j] == 0.0]

    table = np.zeros((K, K))
    for k in range(K):
        pinned = Z.copy()
        pinned[:, k] = 0.0
        rec = recover(pinned)
        for j in range(K):
            v = float(sample_variance(rec[:, j], ddof=0))
            table[k, j] = 0.0 if calib_var[j] == 0.0 else v / calib_var[j]
    return PriorMetricProfile(normalized_variance=table, excluded=excluded)


# ---------------------------------------------------------------------------
# adapters and CSV export


def model_scan_fns(model, horizon: int = 50):
    """(decode_fn, encode_fn) pair for scanning a trained model.

    Encoding uses the posterior mean, so the scan measures code recovery
    rather than sampler noise.
    """
    return (lambda z: model.decode(z, horizon),
            lambda enc: model.encode(enc, sample=False).mu)


def identity_scan_fns(latent_width: int):
    """A lossless decode/encode pair: the scan's primary oracle."""
    return (lambda z: np.array(z, dtype=np.float64), lambda z: np.array(z, dtype=np.float64))


def export_omega_csv(profile: DisentanglementProfile, path) -> None:
    with open(str(path), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["target_code", "sigma", "out_code", "variance"])
        K, M, _ = profile.output_variance.shape
        for i in range(K):
            for m in range(M):
                for j in range(K):
                    w.writerow([i, _fmt(profile.sigma_grid[m]), j,
                                _fmt(profile.output_variance[i, m, j])])


def export_ratio_csv(table: RatioTable, path) -> None:
    with open(str(path), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["code", "sigma_sq", "ratio"])
        K, M = table.ratios.shape
        for i in range(K):
            for m in range(M):
                if not np.isnan(table.ratios[i, m]):
                    w.writerow([i, _fmt(table.sigma_sq[m]), _fmt(table.ratios[i, m])])


def export_prior_metric_csv(profile: PriorMetricProfile, path) -> None:
    with open(str(path), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["fixed_code", "out_code", "normalized_variance"])
        K = len(profile.normalized_variance)
        for k in range(K):
            for j in range(K):
                w.writerow([k, j, _fmt(profile.normalized_variance[k, j])])


def export_profile_csv(values: np.ndarray, path, name: str,
                       reference: np.ndarray | None = None) -> None:
    with open(str(path), "w", newline="") as f:
        w = csv.writer(f)
        header = ["t_index", name] + (["reference_mean"] if reference is not None else [])
        w.writerow(header)
        for t, v in enumerate(values):
            row = [t, _fmt(v)]
            if reference is not None:
                row.append(_fmt(reference[t]))
            w.writerow(row)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")
