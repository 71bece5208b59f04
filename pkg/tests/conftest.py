import numpy as np
import pytest

from texturekit.patchio import Dataset, SampleTriple
from texturekit.synth import SyntheticSpec, synth_dataset


def random_triple(rng, sample_id, patient_id, label, size=16):
    grids = [rng.random((size, size)) for _ in range(3)]
    return SampleTriple.from_grids(grids, label=label, patient_id=patient_id, sample_id=sample_id)


def random_dataset(n_patients=6, per_patient=2, seed=0, size=16):
    rng = np.random.default_rng(seed)
    samples = []
    for p in range(n_patients):
        for k in range(per_patient):
            samples.append(random_triple(rng, f"P{p}-{k}", f"P{p}", p % 2, size))
    return Dataset(tuple(samples), "random")


@pytest.fixture
def small_synthetic():
    return synth_dataset(SyntheticSpec(n_patients=10, samples_per_patient=2, seed=7))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
