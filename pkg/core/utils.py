import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar, Union

import numpy as np
from django.conf import settings
from jinja2 import Environment, FileSystemLoader

from core.exceptions import ArgumentError

T = TypeVar('T')
R = TypeVar('R')

RandomLike = Union[np.random.Generator, np.random.SeedSequence, int, None]


def render_markdown(template_name: str, context: dict, template_dir: str) -> str:
    absolute_dir = os.path.abspath(os.path.join(os.path.dirname(__file__), template_dir))
    env = Environment(loader=FileSystemLoader(absolute_dir))
    template = env.get_template(template_name)
    return template.render(context)


def derive_seed(master_seed: int, index: int) -> int:
    """
    Seed for the index-th unit of work under a master seed.

    Uses numpy's SeedSequence with the index as spawn key, so the value does
    not depend on how many workers run or in what order they finish.
    """
    if int(master_seed) < 0 or int(index) < 0:
        raise ArgumentError(f"seeds must be non-negative, got master {master_seed} and index {index}")
    sequence = np.random.SeedSequence(entropy=int(master_seed), spawn_key=(int(index),))
    return int(sequence.generate_state(1, dtype=np.uint32)[0])


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is None:
        workers = getattr(settings, 'UNDERLAP_WORKERS', 1)
    return max(1, int(workers))


def map_ordered(func: Callable[[T], R], items: Iterable[T], workers: Optional[int] = None) -> List[R]:
    """Apply func to every item, possibly concurrently, keeping input order"""
    items = list(items)
    workers = resolve_workers(workers)
    if workers == 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def seed_of(rng: RandomLike) -> Optional[int]:
    """The integer seed behind rng, when there is one to record"""
    if isinstance(rng, (int, np.integer)):
        return int(rng)
    if isinstance(rng, np.random.SeedSequence):
        return int(rng.generate_state(1, dtype=np.uint32)[0])
    return None
