"""Patch types, on-disk dataset format and intensity preprocessing.

A dataset on disk is a CSV manifest::

    sample_id,patient_id,label,t2w_path,adc_path,dwi_path

with paths relative to the manifest's directory. Every path points at a patch
file: the 4-byte magic ``TKP1``, little-endian ``u16`` width and height, then
``width * height`` little-endian float32 pixels in row-major order.
"""
from __future__ import annotations

import csv
import enum
import struct
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import ConfigError, DataError

MAGIC = b"TKP1"
HEADER = struct.Struct("<4sHH")
PATCH_SIZES = (16, 32)
MANIFEST_HEADER = ["sample_id", "patient_id", "label", "t2w_path", "adc_path", "dwi_path"]
PREP_VARIANTS = ("none", "normalize", "standardize", "both")


class Modality(enum.Enum):
    T2W = "t2-tra"
    ADC = "adc"
    DWI = "dwi_c-1400"

    @property
    def tag(self) -> str:
        return self.value


MODALITIES = (Modality.T2W, Modality.ADC, Modality.DWI)


@dataclass(frozen=True, eq=False)
class Patch:
    pixels: np.ndarray
    modality: Modality
    patient_id: str
    sample_id: str
    label: int
    augmented: bool = False

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise DataError(f"{self.sample_id}: patch must be a non-empty 2D grid")
        if not np.all(np.isfinite(px)) or px.min() < 0.0 or px.max() > 1.0:
            raise DataError(f"{self.sample_id}: pixel values must lie in [0, 1]")
        if self.label not in (0, 1):
            raise DataError(f"{self.sample_id}: label must be 0 or 1, got {self.label!r}")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    def with_pixels(self, pixels: np.ndarray, **changes) -> "Patch":
        return replace(self, pixels=pixels, **changes)

    def same_content(self, other: "Patch") -> bool:
        return (
            self.modality == other.modality
            and self.patient_id == other.patient_id
            and self.sample_id == other.sample_id
            and self.label == other.label
            and self.augmented == other.augmented
            and np.array_equal(self.pixels, other.pixels)
        )


@dataclass(frozen=True, eq=False)
class SampleTriple:
    t2w: Patch
    adc: Patch
    dwi: Patch
    label: int
    patient_id: str
    sample_id: str
    parent_id: str | None = None

    def __post_init__(self):
        shape = self.t2w.pixels.shape
        for p, m in zip(self.patches, MODALITIES):
            if p.modality is not m:
                raise DataError(f"{self.sample_id}: expected {m.name} patch, got {p.modality.name}")
            if (p.label, p.patient_id, p.sample_id) != (self.label, self.patient_id, self.sample_id):
                raise DataError(f"{self.sample_id}: modalities disagree on label/patient/sample id")
            if p.pixels.shape != shape:
                raise DataError(f"{self.sample_id}: modalities have different patch sizes")

    @property
    def patches(self) -> tuple[Patch, Patch, Patch]:
        return (self.t2w, self.adc, self.dwi)

    @property
    def augmented(self) -> bool:
        return self.parent_id is not None

    @property
    def size(self) -> int:
        return self.t2w.width

    @classmethod
    def from_grids(cls, grids, *, label: int, patient_id: str, sample_id: str,
                   parent_id: str | None = None) -> "SampleTriple":
        aug = parent_id is not None
        patches = [Patch(g, m, patient_id, sample_id, int(label), aug) for g, m in zip(grids, MODALITIES)]
        return cls(*patches, label=int(label), patient_id=patient_id, sample_id=sample_id,
                   parent_id=parent_id)

    def same_content(self, other: "SampleTriple") -> bool:
        return (
            self.sample_id == other.sample_id
            and self.parent_id == other.parent_id
            and all(a.same_content(b) for a, b in zip(self.patches, other.patches))
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: tuple[SampleTriple, ...] = field(default_factory=tuple)
    name: str = "dataset"

    def __post_init__(self):
        samples = tuple(self.samples)
        seen = set()
        for s in samples:
            if s.sample_id in seen:
                raise DataError(f"duplicate sample_id {s.sample_id!r}")
            seen.add(s.sample_id)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=np.int64)

    @property
    def patient_ids(self) -> list[str]:
        return [s.patient_id for s in self.samples]

    def require_trainable(self) -> None:
        labels = set(int(v) for v in self.labels)
        if labels != {0, 1}:
            raise DataError(f"dataset {self.name!r} needs samples of both classes for training")

    def same_content(self, other: "Dataset") -> bool:
        return len(self) == len(other) and all(a.same_content(b) for a, b in zip(self, other))


# ---------------------------------------------------------------- intensity

def rescale_intensity(raw, bit_depth: int = 12) -> np.ndarray:
    """Map raw integer intensities onto [0, 1] by dividing by ``2**bit_depth - 1``."""
    if not 8 <= int(bit_depth) <= 16:
        raise ConfigError(f"bit_depth must be in [8, 16], got {bit_depth}")
    raw = np.asarray(raw)
    top = (1 << int(bit_depth)) - 1
    if raw.size and (raw.min() < 0 or raw.max() > top):
        raise DataError(f"raw intensities outside [0, {top}] for {bit_depth}-bit data")
    return raw.astype(np.float64) / float(top)


def _bilinear_axis(n_in: int, n_out: int):
    # half-pixel centred mapping, clamped to the valid sample range
    src = (np.arange(n_out) + 0.5) * (n_in / n_out) - 0.5
    src = np.clip(src, 0.0, n_in - 1)
    lo = np.floor(src).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, src - lo


def resize_grid(grid: np.ndarray, target: int) -> np.ndarray:
    grid = np.asarray(grid, dtype=np.float64)
    h, w = grid.shape
    if (h, w) == (target, target):
        return grid.copy()
    r0, r1, fr = _bilinear_axis(h, target)
    c0, c1, fc = _bilinear_axis(w, target)
    top = grid[r0][:, c0] * (1 - fc) + grid[r0][:, c1] * fc
    bot = grid[r1][:, c0] * (1 - fc) + grid[r1][:, c1] * fc
    out = top * (1 - fr)[:, None] + bot * fr[:, None]
    return np.clip(out, grid.min(), grid.max())


def resize_patch(p: Patch, target: int) -> Patch:
    if target not in PATCH_SIZES:
        raise ConfigError(f"patch size must be one of {PATCH_SIZES}, got {target}")
    return p.with_pixels(np.clip(resize_grid(p.pixels, target), 0.0, 1.0))


def resize_triple(s: SampleTriple, target: int) -> SampleTriple:
    t2w, adc, dwi = (resize_patch(p, target) for p in s.patches)
    return replace(s, t2w=t2w, adc=adc, dwi=dwi)


def resize_dataset(d: Dataset, target: int) -> Dataset:
    return Dataset(tuple(resize_triple(s, target) for s in d), d.name)


def normalize_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=np.float64)
    lo, hi = g.min(), g.max()
    if hi == lo:
        return np.zeros_like(g)
    return (g - lo) / (hi - lo)


def normalize(p: Patch) -> Patch:
    """Min-max rescale to [0, 1]; a constant patch becomes all zeros."""
    return p.with_pixels(normalize_grid(p.pixels))


def standardize(p) -> np.ndarray:
    """Zero mean, unit population variance. Output is unbounded."""
    g = np.asarray(p.pixels if isinstance(p, Patch) else p, dtype=np.float64)
    mu = g.mean()
    sd = g.std()
    if sd == 0:
        return np.zeros_like(g)
    return (g - mu) / sd


def preprocess(grid, prep: str) -> np.ndarray:
    if prep not in PREP_VARIANTS:
        raise ConfigError(f"unknown preprocessing variant {prep!r}; choose from {PREP_VARIANTS}")
    g = np.asarray(grid, dtype=np.float64)
    if prep in ("normalize", "both"):
        g = normalize_grid(g)
    if prep in ("standardize", "both"):
        g = standardize(g)
    return g


# ---------------------------------------------------------------- file I/O

def write_patch_file(path, pixels: np.ndarray) -> None:
    px = np.asarray(pixels)
    h, w = px.shape
    if h > 0xFFFF or w > 0xFFFF:
        raise DataError("patch too large for the TKP1 format")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(HEADER.pack(MAGIC, w, h))
        fh.write(px.astype("<f4").tobytes(order="C"))


def read_patch_file(path) -> np.ndarray:
    data = Path(path).read_bytes()
    if len(data) < HEADER.size:
        raise DataError(f"{path}: truncated patch header")
    magic, w, h = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DataError(f"{path}: bad magic {magic!r}")
    body = data[HEADER.size:]
    if len(body) != 4 * w * h:
        raise DataError(f"{path}: expected {w * h} pixels, file holds {len(body) // 4}")
    return np.frombuffer(body, dtype="<f4").reshape(h, w).astype(np.float64)


def load_manifest(path, name: str | None = None) -> Dataset:
    path = Path(path)
    root = path.parent
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise DataError(f"cannot open manifest {path}: {exc}") from exc
    samples = []
    with fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            return Dataset((), name or path.stem)
        if [h.strip() for h in header] != MANIFEST_HEADER:
            raise DataError(f"{path}: manifest header must be {','.join(MANIFEST_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(MANIFEST_HEADER):
                raise DataError(f"{path}:{lineno}: expected {len(MANIFEST_HEADER)} columns")
            sid, pid, label, *files = (c.strip() for c in row)
            if label not in ("0", "1"):
                raise DataError(f"{path}:{lineno}: sample {sid}: label must be 0 or 1, got {label!r}")
            grids = []
            for m, rel in zip(MODALITIES, files):
                fp = root / rel
                if not fp.is_file():
                    raise DataError(f"sample {sid}: missing {m.name} file {rel}")
                grids.append(read_patch_file(fp))
            samples.append(SampleTriple.from_grids(grids, label=int(label), patient_id=pid, sample_id=sid))
    return Dataset(tuple(samples), name or path.stem)


def save_dataset(d: Dataset, out_dir, manifest_name: str = "manifest.csv") -> Path:
    out_dir = Path(out_dir)
    try:
        (out_dir / "patches").mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataError(f"cannot write to {out_dir}: {exc}") from exc
    rows = []
    for s in d:
        rels = []
        for p in s.patches:
            rel = f"patches/{_safe(s.sample_id)}_{p.modality.name.lower()}.tkp"
            write_patch_file(out_dir / rel, p.pixels)
            rels.append(rel)
        rows.append([s.sample_id, s.patient_id, str(s.label), *rels])
    manifest = out_dir / manifest_name
    with open(manifest, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MANIFEST_HEADER)
        w.writerows(rows)
    return manifest


def _safe(s: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in s)


def iter_patches(d: Dataset) -> Iterable[Patch]:
    for s in d:
        yield from s.patches
