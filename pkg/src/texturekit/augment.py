"""Label-preserving, co-registered augmentation of sample triples.

Geometry (rotation, flips, scale, shear, elastic field) is drawn once per
augmentation and shared by all three modalities; photometric parameters
(contrast, brightness, noise, blur) are drawn per modality.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage

from ._seed import derive_seed, pmap
from .errors import ConfigError
from .patchio import Dataset, SampleTriple


@dataclass(frozen=True)
class AugmentSpec:
    rotation_deg_range: tuple[float, float] = (-15.0, 15.0)
    allow_flips: bool = True
    scale_range: tuple[float, float] = (0.9, 1.1)
    elastic_alpha: float = 8.0
    elastic_sigma: float = 3.0
    shear_range: tuple[float, float] = (-8.0, 8.0)
    noise_sigma: float = 0.02
    blur_sigma_range: tuple[float, float] = (0.0, 1.0)
    contrast_range: tuple[float, float] = (0.8, 1.2)
    brightness_range: tuple[float, float] = (-0.1, 0.1)
    per_sample_count: int = 39

    def __post_init__(self):
        for name in ("rotation_deg_range", "scale_range", "shear_range", "blur_sigma_range",
                     "contrast_range", "brightness_range"):
            lo, hi = (float(v) for v in getattr(self, name))
            if lo > hi:
                raise ConfigError(f"{name} must be ordered, got ({lo}, {hi})")
            object.__setattr__(self, name, (lo, hi))
        if self.per_sample_count < 0:
            raise ConfigError("per_sample_count must be >= 0")
        if min(self.elastic_alpha, self.elastic_sigma, self.noise_sigma, self.blur_sigma_range[0]) < 0:
            raise ConfigError("sigmas and elastic alpha must be >= 0")
        if self.scale_range[0] <= 0:
            raise ConfigError("scale_range must be positive")

    @classmethod
    def identity(cls, per_sample_count: int = 1) -> "AugmentSpec":
        return cls(rotation_deg_range=(0.0, 0.0), allow_flips=False, scale_range=(1.0, 1.0),
                   elastic_alpha=0.0, elastic_sigma=0.0, shear_range=(0.0, 0.0), noise_sigma=0.0,
                   blur_sigma_range=(0.0, 0.0), contrast_range=(1.0, 1.0),
                   brightness_range=(0.0, 0.0), per_sample_count=per_sample_count)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, d: dict) -> "AugmentSpec":
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in d.items()})


@dataclass(frozen=True)
class Geometry:
    rotation_deg: float = 0.0
    flip_h: bool = False
    flip_v: bool = False
    scale: float = 1.0
    shear_deg: float = 0.0
    displacement: np.ndarray | None = field(default=None, compare=False)


def _uniform(rng: np.random.Generator, lo_hi) -> float:
    lo, hi = lo_hi
    return lo if lo == hi else float(rng.uniform(lo, hi))


def draw_geometry(spec: AugmentSpec, shape, rng: np.random.Generator) -> Geometry:
    rot = _uniform(rng, spec.rotation_deg_range)
    fh = bool(rng.random() < 0.5) if spec.allow_flips else False
    fv = bool(rng.random() < 0.5) if spec.allow_flips else False
    scale = _uniform(rng, spec.scale_range)
    shear = _uniform(rng, spec.shear_range)
    disp = None
    if spec.elastic_alpha > 0 and spec.elastic_sigma > 0:
        # uniform(-1, 1) field smoothed by a Gaussian, scaled by alpha
        raw = rng.uniform(-1.0, 1.0, size=(2, *shape))
        disp = spec.elastic_alpha * np.stack(
            [ndimage.gaussian_filter(f, spec.elastic_sigma, mode="reflect") for f in raw])
    return Geometry(rot, fh, fv, scale, shear, disp)


def sample_coordinates(geom: Geometry, shape) -> np.ndarray:
    """Source coordinates (2, H, W) for every output pixel under ``geom``."""
    h, w = shape
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    rr, cc = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    y, x = rr - cy, cc - cx
    if geom.flip_v:
        y = -y
    if geom.flip_h:
        x = -x
    if geom.rotation_deg or geom.scale != 1.0 or geom.shear_deg:
        t = math.radians(geom.rotation_deg)
        k = math.tan(math.radians(geom.shear_deg))
        c, s = math.cos(t), math.sin(t)
        # inverse map: output -> source; rotation then horizontal shear, then scale
        ys = (c * y - s * x) / geom.scale
        xs = (s * y + c * x) / geom.scale + k * ys
        y, x = ys, xs
    y = y + cy
    x = x + cx
    if geom.displacement is not None:
        y = y + geom.displacement[0]
        x = x + geom.displacement[1]
    return np.stack([y, x])


def apply_geometry(grid: np.ndarray, geom: Geometry) -> np.ndarray:
    grid = np.asarray(grid, dtype=np.float64)
    coords = sample_coordinates(geom, grid.shape)
    return ndimage.map_coordinates(grid, coords, order=1, mode="reflect")


def apply_photometric(grid: np.ndarray, spec: AugmentSpec, rng: np.random.Generator) -> np.ndarray:
    gain = _uniform(rng, spec.contrast_range)
    offset = _uniform(rng, spec.brightness_range)
    blur = _uniform(rng, spec.blur_sigma_range)
    out = grid
    if blur > 0:
        out = ndimage.gaussian_filter(out, blur, mode="reflect")
    mu = out.mean()
    # contrast about the patch mean, so gain alone leaves the mean untouched
    out = mu + gain * (out - mu) + offset
    if spec.noise_sigma > 0:
        out = out + rng.normal(0.0, spec.noise_sigma, size=out.shape)
    return np.clip(out, 0.0, 1.0)


def augmented_id(parent_id: str, seed: int) -> str:
    return f"{parent_id}~{seed & 0xFFFFFFFFFFFFFFFF:016x}"


def augment_triple(s: SampleTriple, spec: AugmentSpec, seed: int) -> SampleTriple:
    rng = np.random.Generator(np.random.PCG64(int(seed) & 0xFFFFFFFFFFFFFFFF))
    geom = draw_geometry(spec, s.t2w.pixels.shape, rng)
    # fixed draw order: geometry first, then one photometric stream per modality
    photo_seeds = rng.integers(0, 2**63, size=3)
    grids = []
    for p, ps in zip(s.patches, photo_seeds):
        warped = apply_geometry(p.pixels, geom)
        grids.append(apply_photometric(warped, spec, np.random.Generator(np.random.PCG64(int(ps)))))
    root = s.parent_id or s.sample_id
    return SampleTriple.from_grids(grids, label=s.label, patient_id=s.patient_id,
                                   sample_id=augmented_id(s.sample_id, seed), parent_id=root)


def child_seed(seed: int, sample_index: int, aug_index: int) -> int:
    return derive_seed(seed, sample_index, aug_index)


def augment_children(s: SampleTriple, index: int, spec: AugmentSpec, seed: int) -> list[SampleTriple]:
    return [augment_triple(s, spec, child_seed(seed, index, j)) for j in range(spec.per_sample_count)]


def augment_dataset(d: Dataset, spec: AugmentSpec, seed: int, threads: int | None = None) -> Dataset:
    """Originals followed by ``spec.per_sample_count`` children per original, in sample order."""
    if spec.per_sample_count == 0:
        return d
    kids = pmap(lambda item: augment_children(item[1], item[0], spec, seed), list(enumerate(d)), threads)
    out = list(d.samples)
    for ch in kids:
        out.extend(ch)
    return Dataset(tuple(out), d.name)
