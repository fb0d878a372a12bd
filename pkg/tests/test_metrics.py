import numpy as np
import pytest

from encforge.data import Encounter, SynthSpec, normalize, resample_encounter, synth_generate
from encforge.metrics import (PAPER_SIGMA_GRID, DisentanglementProfile,
                              RatioTable, direction_profile,
                              disentanglement_scan, distance_profile,
                              export_omega_csv, export_ratio_csv,
                              identity_scan_fns, model_scan_fns,
                              prior_metric_profile, rationality_report,
                              sample_variance, speed_profile, variance_ratio)

RNG = np.random.default_rng(77)


def constant_fns(latent_width):
    """Decode ignores z entirely; encode always recovers the same code."""
    fixed = RNG.uniform(-1, 1, latent_width)
    return (lambda z: np.zeros(3)), (lambda s: fixed.copy())


# ---------------------------------------------------------------------------
# sample variance helper


def test_sample_variance_exact_zero_on_constant():
    x = np.full(100, 0.123456789)
    assert sample_variance(x) == 0.0
    assert sample_variance(x, ddof=0) == 0.0


def test_sample_variance_matches_numpy():
    x = RNG.uniform(-3, 3, (200, 4))
    assert np.allclose(sample_variance(x), np.var(x, axis=0, ddof=1), rtol=1e-12)


def test_sample_variance_needs_two_samples():
    with pytest.raises(ValueError):
        sample_variance(np.array([1.0]))


# ---------------------------------------------------------------------------
# the scan and its oracles


def test_paper_sigma_grid_literal():
    assert PAPER_SIGMA_GRID == (0.1, 0.4, 0.7, 1.0, 1.3, 1.6, 1.9, 2.2, 2.5, 2.8)


def test_identity_model_scan_is_exact():
    K = 4
    decode, encode = identity_scan_fns(K)
    prof = disentanglement_scan(decode, encode, K, samples=50, seed=3)
    for i in range(K):
        for m in range(len(prof.sigma_grid)):
            on = prof.output_variance[i, m, i]
            assert on == prof.realized_input_variance[i, m]
            for j in range(K):
                if j != i:
                    assert prof.output_variance[i, m, j] == 0.0
    ratios = variance_ratio(prof)
    assert np.all(ratios.ratios == 1.0)
    assert ratios.omitted == []


def test_identity_scan_group_count_with_paper_grid():
    decode, encode = identity_scan_fns(10)
    prof = disentanglement_scan(decode, encode, 10, samples=2, seed=0)
    assert prof.group_count == 100
    assert prof.output_variance.shape == (10, 10, 10)


def test_constant_model_scan_all_zero():
    K = 3
    decode, encode = constant_fns(K)
    prof = disentanglement_scan(decode, encode, K, samples=20, seed=1)
    assert np.all(prof.output_variance == 0.0)
    ratios = variance_ratio(prof)
    assert np.all(ratios.ratios == 0.0)


def test_scan_deterministic_under_seed():
    decode, encode = identity_scan_fns(3)
    a = disentanglement_scan(decode, encode, 3, samples=10, seed=9)
    b = disentanglement_scan(decode, encode, 3, samples=10, seed=9)
    assert np.array_equal(a.output_variance, b.output_variance)
    c = disentanglement_scan(decode, encode, 3, samples=10, seed=10)
    assert not np.array_equal(a.output_variance, c.output_variance)


def test_scan_pin_others_zero():
    decode, encode = identity_scan_fns(3)
    prof = disentanglement_scan(decode, encode, 3, samples=10, seed=2,
                                pin_others_zero=True)
    # with pinned non-targets an identity loop recovers them as exactly 0
    assert np.all(prof.output_variance[0, :, 1:] == 0.0)
    assert np.all(prof.output_variance[0, :, 0] > 0.0)


def test_scan_sample_floor():
    decode, encode = identity_scan_fns(2)
    with pytest.raises(ValueError):
        disentanglement_scan(decode, encode, 2, samples=1)
    prof = disentanglement_scan(decode, encode, 2, samples=2, seed=0)
    assert np.all(np.isfinite(prof.output_variance))


def test_variance_ratio_omits_zero_realized_groups():
    prof = DisentanglementProfile(
        sigma_grid=np.array([1.0, 2.0]), samples=5,
        output_variance=np.ones((2, 2, 2)),
        realized_input_variance=np.array([[1.0, 0.0], [4.0, 1.0]]))
    table = variance_ratio(prof)
    assert table.omitted == [(0, 1)]
    assert np.isnan(table.ratios[0, 1])
    assert table.ratios[1, 0] == 0.25


def test_variance_ratio_rejects_nonpositive_grid():
    prof = DisentanglementProfile(
        sigma_grid=np.array([0.0]), samples=5,
        output_variance=np.ones((1, 1, 1)),
        realized_input_variance=np.ones((1, 1)))
    with pytest.raises(ValueError):
        variance_ratio(prof)


# ---------------------------------------------------------------------------
# rationality profiles


def test_distance_profile_parallel_offset():
    s1 = np.column_stack([np.linspace(0, 1, 8), np.zeros(8)])
    enc = Encounter(s1=s1, s2=s1 + np.array([0.0, 3.0]))
    assert np.allclose(distance_profile(enc), 3.0, atol=1e-12)


def test_distance_profile_identical_sequences():
    s = RNG.uniform(-1, 1, (6, 2))
    assert np.all(distance_profile(Encounter(s1=s, s2=s)) == 0.0)


def test_speed_profile_unit_steps():
    assert np.allclose(speed_profile([(0, 0), (1, 0), (2, 0)]), [1.0, 1.0])


def test_speed_profile_repeated_point():
    sp = speed_profile([(0, 0), (0, 0), (1, 0)])
    assert sp[0] == 0.0 and sp[1] == 1.0


def test_speed_profile_needs_two_points():
    with pytest.raises(ValueError):
        speed_profile([(0.0, 0.0)])


def test_direction_profile_closed_forms():
    assert np.allclose(direction_profile([(0, 0), (1, 0), (2, 0)]), [0.0])
    assert np.allclose(direction_profile([(0, 0), (1, 0), (1, 1)]), [90.0])
    assert np.allclose(direction_profile([(0, 0), (1, 0), (0, 0)]), [180.0])


def test_direction_profile_range_and_floor():
    for _ in range(20):
        seq = RNG.uniform(-1, 1, (10, 2))
        ang = direction_profile(seq)
        assert np.all(ang >= 0.0) and np.all(ang <= 180.0)
    with pytest.raises(ValueError):
        direction_profile([(0, 0), (1, 1)])


def test_direction_profile_zero_step_flagged_as_zero():
    ang = direction_profile([(0, 0), (0, 0), (1, 0)])
    assert ang[0] == 0.0


def test_profiles_rigid_motion_invariance():
    seq = RNG.uniform(-0.4, 0.4, (9, 2))
    other = RNG.uniform(-0.4, 0.4, (9, 2))
    shift = np.array([0.17, -0.23])
    theta = 0.81
    R = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    enc = Encounter(s1=seq, s2=other)
    moved = Encounter(s1=seq @ R.T + shift, s2=other @ R.T + shift)
    assert np.allclose(distance_profile(enc), distance_profile(moved), atol=1e-12)
    assert np.allclose(speed_profile(seq), speed_profile(seq + shift), atol=1e-12)
    assert np.allclose(direction_profile(seq), direction_profile(seq @ R.T), atol=1e-9)
    # uniform scaling: distance/speed scale linearly, angles unchanged
    assert np.allclose(distance_profile(Encounter(s1=2 * seq, s2=2 * other)),
                       2 * distance_profile(enc), atol=1e-12)
    assert np.allclose(direction_profile(0.5 * seq), direction_profile(seq), atol=1e-9)


def test_rationality_report_shapes_and_summary():
    enc = normalize(synth_generate(SynthSpec(family="crossing", count=1, seed=3))[0])
    report = rationality_report(enc)
    T = enc.length
    assert len(report.distance) == T
    assert len(report.speed) == T - 1
    assert len(report.direction) == T - 2
    assert report.summary["direction"]["max"] < 1e-6  # straight construction
    assert report.degenerate_steps == 0
    assert report.reference is None


def test_rationality_report_reference_overlay():
    encs = [normalize(e) for e in
            synth_generate(SynthSpec(family="same-direction", count=4, seed=6))]
    report = rationality_report(encs[0], reference=encs[1:])
    manual = np.mean([distance_profile(e) for e in encs[1:]], axis=0)
    assert np.allclose(report.reference["distance"], manual, atol=1e-15)
    with pytest.raises(ValueError):
        rationality_report(encs[0], reference=[resample_encounter(encs[1], 7)])


def test_rationality_report_requires_normalized():
    enc = synth_generate(SynthSpec(family="crossing", count=1, seed=1))[0]
    with pytest.raises(ValueError):
        rationality_report(enc)


# ---------------------------------------------------------------------------
# prior metric


def test_prior_metric_identity_model():
    K = 5
    decode, encode = identity_scan_fns(K)
    prof = prior_metric_profile(decode, encode, K, samples=40, seed=0)
    assert prof.normalized_variance.shape == (K, K)
    for k in range(K):
        assert prof.normalized_variance[k, k] == 0.0
        for j in range(K):
            if j != k:
                assert prof.normalized_variance[k, j] == 1.0
        assert prof.normalized_variance[k].argmin() == k
    assert prof.excluded == []


def test_prior_metric_constant_model():
    K = 3
    decode, encode = constant_fns(K)
    prof = prior_metric_profile(decode, encode, K, samples=20, seed=1)
    assert np.all(prof.normalized_variance == 0.0)
    assert prof.excluded == [0, 1, 2]


# ---------------------------------------------------------------------------
# exports and model adapters


def test_model_scan_fns_round_trip():
    from encforge.model import MTG
    model = MTG(hidden=5, latent=3, rng=4)
    decode, encode = model_scan_fns(model, horizon=8)
    z_hat = encode(decode(np.zeros(3)))
    assert z_hat.shape == (3,)
    prof = disentanglement_scan(decode, encode, 3, sigma_grid=(0.5, 1.0),
                                samples=4, seed=0)
    assert prof.output_variance.shape == (3, 2, 3)
    assert np.all(np.isfinite(prof.output_variance))


def test_csv_exports(tmp_path):
    decode, encode = identity_scan_fns(2)
    prof = disentanglement_scan(decode, encode, 2, sigma_grid=(0.5, 1.0),
                                samples=5, seed=0)
    export_omega_csv(prof, tmp_path / "omega.csv")
    lines = (tmp_path / "omega.csv").read_text().strip().splitlines()
    assert lines[0] == "target_code,sigma,out_code,variance"
    assert len(lines) == 1 + 2 * 2 * 2
    export_ratio_csv(variance_ratio(prof), tmp_path / "ratios.csv")
    rows = (tmp_path / "ratios.csv").read_text().strip().splitlines()[1:]
    assert all(row.split(",")[2] == "1" for row in rows)
