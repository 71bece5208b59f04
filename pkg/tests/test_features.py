import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from texturekit.errors import UnusablePatchError
from texturekit.features import (FEATURE_NAMES, FeatureConfig, FeatureTable, LBPConfig, build_table, compute_glcm,
                                 extract_features, first_order, glcm_set, haralick_features, haralick_single,
                                 lbp_features, local_variance, riu2_histogram)
from texturekit.features import glcm as glcm_mod
from texturekit.patchio import SampleTriple, normalize_grid, preprocess

from conftest import random_dataset, random_triple

grids16 = arrays(np.float64, (16, 16), elements=st.floats(0, 1, allow_nan=False))


def test_first_order_examples():
    assert first_order(np.full((8, 8), 0.5)) == (0.5, 0.0, 0.0, 0.0)
    half = np.zeros((4, 4))
    half[:2] = 1.0
    np.testing.assert_allclose(first_order(half), (0.5, 0.5, 0.0, -2.0), atol=1e-15)


def test_first_order_matches_loop(rng):
    for _ in range(5):
        g = rng.random((16, 16))
        np.testing.assert_allclose(first_order(g), oracles.first_order(g), rtol=0, atol=1e-12)


@given(grids16)
@settings(max_examples=30, deadline=None)
def test_first_order_after_preprocessing(g):
    assert 0 <= first_order(normalize_grid(g))[0] <= 1
    if g.max() - g.min() > 1e-6:
        mu, sd, _, _ = first_order(preprocess(g, "standardize"))
        assert abs(mu) < 1e-9 and abs(sd - 1) < 1e-9


def test_glcm_two_by_two():
    P = compute_glcm(np.array([[0.0, 0.0], [1.0, 1.0]]), levels=2, distance=1, direction=0)
    np.testing.assert_array_equal(P, [[0.5, 0.0], [0.0, 0.5]])


def test_glcm_checkerboard():
    g = np.indices((6, 6)).sum(axis=0) % 2
    P = compute_glcm(g.astype(float), levels=2, distance=1, direction=0)
    np.testing.assert_array_equal(P, [[0.0, 0.5], [0.5, 0.0]])


def test_glcm_constant_patch_single_bin():
    P = compute_glcm(np.full((5, 5), 0.3), levels=4)
    assert P[0, 0] == 1.0


def test_glcm_degenerate_grid():
    with pytest.raises(UnusablePatchError):
        compute_glcm(np.zeros((1, 1)), levels=2)
    with pytest.raises(UnusablePatchError):
        compute_glcm(np.zeros((1, 5)), levels=2, direction=90)


@pytest.mark.parametrize("direction", [0, 45, 90, 135])
def test_glcm_matches_loop(rng, direction):
    g = rng.random((16, 16))
    np.testing.assert_array_equal(compute_glcm(g, 32, 1, direction), oracles.glcm(g, 32, 1, direction))


@given(grids16, st.sampled_from([0, 45, 90, 135]), st.integers(1, 3), st.sampled_from([2, 8, 32]))
@settings(max_examples=40, deadline=None)
def test_glcm_symmetric_and_normalized(g, direction, distance, levels):
    P = compute_glcm(g, levels, distance, direction)
    np.testing.assert_array_equal(P, P.T)
    assert abs(P.sum() - 1) < 1e-12
    assert P.min() >= 0


def test_haralick_point_mass():
    P = np.zeros((8, 8))
    P[3, 3] = 1.0
    f = haralick_single(P)
    assert f[0] == 1.0
    assert f[8] == 0.0
    assert f[1] == 0.0 and f[4] == 1.0
    assert math.isnan(f[2])


def test_haralick_uniform():
    ng = 8
    f = haralick_single(np.full((ng, ng), 1 / ng ** 2))
    assert f[0] == pytest.approx(1 / ng ** 2, abs=1e-15)
    assert f[8] == pytest.approx(2 * math.log2(ng), abs=1e-12)
    assert f[2] == pytest.approx(0.0, abs=1e-12)
    # sum average of two independent uniforms on 1..ng
    assert f[5] == pytest.approx(ng + 1, abs=1e-12)
    assert f[3] == pytest.approx((ng ** 2 - 1) / 12, abs=1e-12)


def test_haralick_two_by_two_by_hand():
    P = compute_glcm(np.array([[0.0, 0.0], [1.0, 1.0]]), 2, 1, 0)
    # diag(.5, .5), grey levels 1 and 2
    expected = [0.5, 0.0, 1.0, 0.25, 1.0, 3.0, 1.0, 1.0, 1.0, 0.0, 0.0, -1.0, math.sqrt(0.75)]
    np.testing.assert_allclose(haralick_single(P)[:13], expected, atol=1e-9)
    np.testing.assert_allclose(oracles.haralick_1_13(P), expected, atol=1e-9)


def test_haralick_matches_loop(rng):
    for _ in range(3):
        P = compute_glcm(rng.random((16, 16)), 32, 1, 45)
        f = haralick_single(P)
        np.testing.assert_allclose(f[:13], oracles.haralick_1_13(P), atol=1e-9)
        assert f[13] == pytest.approx(oracles.haralick_14(P), abs=1e-9)


def test_haralick14_dense_glcm(rng):
    P = rng.random((32, 32))
    P = P + P.T
    P /= P.sum()
    assert haralick_single(P)[13] == pytest.approx(oracles.haralick_14(P), abs=1e-9)


def test_direction_average_skips_undefined():
    defined = compute_glcm(np.array([[0.0, 1.0], [0.0, 1.0]]), 2, 1, 0)
    point = np.zeros((2, 2))
    point[0, 0] = 1.0
    f = haralick_features([defined, point, point, point])
    # correlation is undefined for the point masses, so only the first direction counts
    assert f[2] == pytest.approx(haralick_single(defined)[2])
    assert f[0] == pytest.approx((haralick_single(defined)[0] + 3) / 4)


def test_riu2_constant_patch():
    c = np.full((16, 16), 0.4)
    h8 = riu2_histogram(c, 8, 1.0)
    h16 = riu2_histogram(c, 16, 2.0)
    assert h8[8] == 1.0 and h8.sum() == 1.0
    assert h16[16] == 1.0 and h16.sum() == 1.0
    f = lbp_features(c)
    assert f.shape == (35,)
    assert f[28] == 1.0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_riu2_rotation_invariance(rng, k):
    g = rng.random((16, 16))
    r = np.rot90(g, k)
    for p, rad in ((8, 1.0), (16, 2.0)):
        np.testing.assert_allclose(riu2_histogram(g, p, rad), riu2_histogram(r, p, rad), atol=1e-9)


@pytest.mark.parametrize("points, radius", [(8, 1.0), (16, 2.0)])
def test_riu2_matches_per_pixel_loop(rng, points, radius):
    for _ in range(3):
        g = rng.random((16, 16))
        np.testing.assert_array_equal(riu2_histogram(g, points, radius), oracles.lbp_riu2_hist(g, points, radius))


def test_local_variance_matches_loop(rng):
    g = rng.random((16, 16))
    np.testing.assert_allclose(local_variance(g), oracles.local_variances(g), atol=1e-15)


def test_lbp_histograms_each_sum_to_one(rng):
    f = lbp_features(rng.random((16, 16)))
    assert f[:10].sum() == pytest.approx(1)
    assert f[10:28].sum() == pytest.approx(1)
    assert f[28:].sum() == pytest.approx(1)


def test_lbp_too_small():
    with pytest.raises(UnusablePatchError):
        lbp_features(np.zeros((6, 6)))


def test_feature_vector_length_and_names(rng):
    s = random_triple(rng, "S", "P", 1)
    v = extract_features(s)
    assert v.values.shape == (159,) == (len(FEATURE_NAMES),)
    assert not v.missing_mask.any()
    assert FEATURE_NAMES[0] == "t2-tra_mean"
    assert FEATURE_NAMES[-1] == "dwi_c-1400_lbp-35"
    np.testing.assert_array_equal(extract_features(s).values, v.values)


def test_failing_eigensolver_on_dwi_flags_one_feature(rng, monkeypatch):
    real = glcm_mod._eigvalsh
    calls = []

    def flaky(m):
        calls.append(1)
        # four directions per modality, modalities in t2w, adc, dwi order
        if len(calls) > 8:
            raise np.linalg.LinAlgError("did not converge")
        return real(m)

    monkeypatch.setattr(glcm_mod, "_eigvalsh", flaky)
    v = extract_features(random_triple(rng, "S", "P", 0))
    flagged = [n for n, m in zip(FEATURE_NAMES, v.missing_mask) if m]
    assert flagged == ["dwi_c-1400_haralick14"]
    assert v.imputed()[FEATURE_NAMES.index("dwi_c-1400_haralick14")] == 0.0


def test_unusable_patch_names_sample():
    grids = [np.random.default_rng(0).random((5, 5))] * 3
    s = SampleTriple.from_grids(grids, label=0, patient_id="P", sample_id="tiny")
    with pytest.raises(UnusablePatchError, match="tiny"):
        extract_features(s)


def test_build_table_shape_and_determinism():
    d = random_dataset(n_patients=4, per_patient=2)
    a = build_table(d, "none", threads=1)
    b = build_table(d, "none", threads=3)
    assert a.values.shape == (8, 159)
    assert a.feature_names == FEATURE_NAMES
    assert a.values.tobytes() == b.values.tobytes()
    assert a.config.lbp.var_edges == b.config.lbp.var_edges


def test_build_table_imputes_missing(monkeypatch):
    d = random_dataset(n_patients=2, per_patient=1)
    monkeypatch.setattr(glcm_mod, "_eigvalsh", lambda m: np.full(m.shape[0], np.nan))
    t = build_table(d)
    assert set(t.imputed_columns) == {"t2-tra_haralick14", "adc_haralick14", "dwi_c-1400_haralick14"}
    assert np.isfinite(t.values).all()
    raw = build_table(d, impute=False)
    assert raw.missing_mask.sum() == 6


def test_var_edges_fit_on_given_rows():
    d = random_dataset(n_patients=4, per_patient=1)
    t = build_table(d)
    edges = t.config.lbp.var_edges
    assert len(edges) == 6 and list(edges) == sorted(edges)
    fixed = FeatureConfig(lbp=LBPConfig(var_edges=edges))
    again = build_table(d, config=fixed)
    np.testing.assert_array_equal(again.values, t.values)


def test_table_csv_roundtrip(tmp_path):
    t = build_table(random_dataset(3, 1), impute=False)
    values = t.values.copy()
    values[1, 5] = np.nan
    t = FeatureTable(t.sample_ids, t.patient_ids, t.labels, values, t.feature_names)
    back = FeatureTable.read_csv(t.write_csv(tmp_path / "f.csv"))
    assert back.sample_ids == t.sample_ids and back.feature_names == t.feature_names
    np.testing.assert_array_equal(back.values, t.values)
    assert back.missing_mask[1, 5]


def test_glcm_set_has_four_directions(rng):
    assert len(glcm_set(rng.random((8, 8)))) == 4
