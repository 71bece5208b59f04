import numpy as np
import pytest

from texturekit.errors import ConfigError, DataError
from texturekit.patchio import load_manifest
from texturekit.synth import SyntheticSpec, synth, synth_dataset


def test_default_spec_gives_80_rows(tmp_path):
    manifest = synth(SyntheticSpec(n_patients=40, samples_per_patient=2), tmp_path)
    assert len(manifest.read_text().splitlines()) == 81
    d = load_manifest(manifest)
    assert len(d) == 80
    assert len(set(d.patient_ids)) == 40
    assert np.bincount(d.labels).tolist() == [40, 40]


def test_byte_identical_files(tmp_path):
    spec = SyntheticSpec(n_patients=6, seed=5)
    a = synth(spec, tmp_path / "a")
    b = synth(spec, tmp_path / "b")
    files_a = sorted(p.relative_to(a.parent) for p in a.parent.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(b.parent) for p in b.parent.rglob("*") if p.is_file())
    assert files_a == files_b
    for rel in files_a:
        assert (a.parent / rel).read_bytes() == (b.parent / rel).read_bytes()


def test_seed_changes_data():
    a = synth_dataset(SyntheticSpec(n_patients=6, seed=1))
    b = synth_dataset(SyntheticSpec(n_patients=6, seed=2))
    assert not a.same_content(b)


@pytest.mark.parametrize("effect", ["first_order_shift", "texture_shift", "mixed"])
def test_values_in_unit_range(effect):
    d = synth_dataset(SyntheticSpec(n_patients=6, class_effect=effect))
    for s in d:
        for p in s.patches:
            assert p.pixels.shape == (16, 16)
            assert 0 <= p.pixels.min() and p.pixels.max() <= 1


def test_first_order_shift_moves_means():
    d = synth_dataset(SyntheticSpec(n_patients=20, class_effect="first_order_shift"))
    t2 = np.array([s.t2w.pixels.mean() for s in d])
    assert t2[d.labels == 1].mean() < t2[d.labels == 0].mean() - 0.1


def test_spec_validation(tmp_path):
    with pytest.raises(ConfigError):
        SyntheticSpec(n_patients=4)
    with pytest.raises(ConfigError):
        SyntheticSpec(class_effect="stripes")
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(DataError):
        synth(SyntheticSpec(n_patients=5), blocker / "sub")
