"""Seed derivation and small parallel helpers shared across modules."""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

MASK64 = (1 << 64) - 1

T = TypeVar("T")
R = TypeVar("R")


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """Mix ``seed`` with integer keys into an independent 64-bit child seed."""
    h = splitmix64(int(seed) & MASK64)
    for k in keys:
        h = splitmix64(h ^ (int(k) & MASK64))
    return h


def rng_from(seed: int, *keys: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(derive_seed(seed, *keys)))


def default_threads() -> int:
    env = os.environ.get("TEXTUREKIT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return 1


def pmap(fn: Callable[[T], R], items: Iterable[T], threads: int | None = None) -> list[R]:
    """Ordered map; output order never depends on ``threads``."""
    items = list(items)
    n = default_threads() if threads is None else max(1, int(threads))
    if n == 1 or len(items) < 2:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, items))


def chunks(seq: Sequence[T], size: int) -> list[Sequence[T]]:
    return [seq[i:i + size] for i in range(0, len(seq), size)]
