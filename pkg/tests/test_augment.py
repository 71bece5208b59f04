import numpy as np
import pytest

from texturekit.augment import (AugmentSpec, Geometry, apply_geometry, augment_dataset, augment_triple,
                                child_seed, draw_geometry)
from texturekit.errors import ConfigError
from texturekit.patchio import SampleTriple

from conftest import random_dataset, random_triple


def test_identity_spec_is_identity(rng):
    s = random_triple(rng, "S", "P", 1)
    out = augment_triple(s, AugmentSpec.identity(), seed=99)
    for a, b in zip(s.patches, out.patches):
        np.testing.assert_allclose(b.pixels, a.pixels, atol=1e-9)


def test_same_seed_bit_identical(rng):
    s = random_triple(rng, "S", "P", 0)
    a = augment_triple(s, AugmentSpec(), 1234)
    b = augment_triple(s, AugmentSpec(), 1234)
    assert a.same_content(b)
    assert a.sample_id == b.sample_id != s.sample_id
    assert a.parent_id == "S" and a.augmented


def test_different_seed_changes_pixels(rng):
    s = random_triple(rng, "S", "P", 0)
    a = augment_triple(s, AugmentSpec(), 1)
    b = augment_triple(s, AugmentSpec(), 2)
    assert not np.array_equal(a.t2w.pixels, b.t2w.pixels)


@pytest.mark.parametrize("flip", [dict(flip_h=True), dict(flip_v=True), dict(flip_h=True, flip_v=True)])
def test_flip_is_involution(rng, flip):
    g = rng.random((16, 16))
    geom = Geometry(**flip)
    np.testing.assert_array_equal(apply_geometry(apply_geometry(g, geom), geom), g)


def test_horizontal_flip_mirrors(rng):
    g = rng.random((8, 8))
    np.testing.assert_array_equal(apply_geometry(g, Geometry(flip_h=True)), g[:, ::-1])


def test_geometry_shared_across_modalities(rng):
    g = rng.random((16, 16))
    s = SampleTriple.from_grids([g, g, g], label=1, patient_id="P", sample_id="S")
    spec = AugmentSpec(noise_sigma=0.0, blur_sigma_range=(0, 0), contrast_range=(1, 1), brightness_range=(0, 0))
    for seed in range(5):
        out = augment_triple(s, spec, seed)
        np.testing.assert_array_equal(out.t2w.pixels, out.adc.pixels)
        np.testing.assert_array_equal(out.t2w.pixels, out.dwi.pixels)


def test_photometric_drawn_per_modality(rng):
    g = rng.random((16, 16))
    s = SampleTriple.from_grids([g, g, g], label=1, patient_id="P", sample_id="S")
    out = augment_triple(s, AugmentSpec(), 5)
    assert not np.array_equal(out.t2w.pixels, out.adc.pixels)


def test_dataset_counts_and_lineage():
    d = random_dataset(n_patients=2, per_patient=1)
    out = augment_dataset(d, AugmentSpec(), seed=3)
    assert len(out) == 2 + 78
    assert [s.sample_id for s in out.samples[:2]] == [s.sample_id for s in d]
    by_id = {s.sample_id: s for s in d}
    for s in out.samples[2:]:
        parent = by_id[s.parent_id]
        assert s.label == parent.label and s.patient_id == parent.patient_id
        for p in s.patches:
            assert p.pixels.min() >= 0 and p.pixels.max() <= 1
            assert p.augmented


def test_zero_count_returns_dataset_unchanged():
    d = random_dataset(2, 1)
    assert augment_dataset(d, AugmentSpec(per_sample_count=0), seed=0) is d


def test_dataset_deterministic_and_thread_independent():
    d = random_dataset(3, 1)
    spec = AugmentSpec(per_sample_count=4)
    a = augment_dataset(d, spec, seed=11, threads=1)
    b = augment_dataset(d, spec, seed=11, threads=4)
    assert a.same_content(b)


def test_child_seed_independent_of_order():
    assert child_seed(5, 2, 3) == child_seed(5, 2, 3)
    assert len({child_seed(5, i, j) for i in range(10) for j in range(10)}) == 100


def test_spec_roundtrip_and_validation():
    spec = AugmentSpec(per_sample_count=7, rotation_deg_range=(-3, 4))
    assert AugmentSpec.from_dict(spec.to_dict()) == spec
    with pytest.raises(ConfigError):
        AugmentSpec(rotation_deg_range=(5, -5))
    with pytest.raises(ConfigError):
        AugmentSpec(per_sample_count=-1)
    with pytest.raises(ConfigError):
        AugmentSpec(noise_sigma=-0.1)


def test_elastic_field_is_smooth(rng):
    geom = draw_geometry(AugmentSpec(elastic_alpha=8.0, elastic_sigma=3.0), (16, 16), rng)
    d = geom.displacement
    assert d.shape == (2, 16, 16)
    # neighbouring displacements differ far less than the field's own spread
    assert np.abs(np.diff(d, axis=2)).mean() < d.std()
