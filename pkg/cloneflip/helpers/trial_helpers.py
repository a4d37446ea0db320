from concurrent.futures import ThreadPoolExecutor
import hashlib
from typing import Callable, Iterable, List, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

MAX_SEED = 2**64


def derive_seed(master_seed: int, label: str, index: int = 0) -> int:
    """
    Child seed for (master_seed, component label, trial index). The same
    triple always yields the same stream, whatever thread runs it.
    """
    if not 0 <= master_seed < MAX_SEED:
        raise ValueError(
            "master seed must be an unsigned 64-bit integer, got {}".format(master_seed)
        )
    key = "{}:{}:{}".format(master_seed, label, index).encode("utf-8")
    return int.from_bytes(hashlib.sha256(key).digest()[:8], "little")


def derive_rng(master_seed: int, label: str, index: int = 0) -> np.random.Generator:
    return np.random.default_rng(derive_seed(master_seed, label, index))


def spawn_seed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, MAX_SEED, dtype=np.uint64))


def map_trials(fn: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """
    Ordered map; with workers > 1 the calls run on a thread pool.
    """
    items = list(items)
    if workers is None or workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, items))
