import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, Sequence, TypeVar

from tqdm import tqdm

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_ordered(
    func: Callable[[T], R],
    items: Sequence[T],
    jobs: int = 1,
    progress: bool = False,
    desc: str = "Working",
    unit: str = "item",
) -> List[R]:
    """
    Apply ``func`` to every item, optionally on a thread pool.

    Results come back in the order of ``items`` whatever the completion order,
    so callers see the same output for any ``jobs`` value. The first exception
    raised by a worker is re-raised after the pool shuts down.
    """
    if jobs <= 1 or len(items) <= 1:
        iterator = tqdm(items, desc=desc, unit=unit) if progress else items
        return [func(item) for item in iterator]

    results: Dict[int, R] = {}
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        future_to_index = {
            executor.submit(func, item): index for index, item in enumerate(items)
        }
        completed = as_completed(future_to_index)
        if progress:
            completed = tqdm(completed, total=len(future_to_index), desc=desc, unit=unit)
        for future in completed:
            index = future_to_index[future]
            results[index] = future.result()
    logger.debug("%s: %d items on %d workers", desc, len(items), jobs)
    return [results[i] for i in range(len(items))]
