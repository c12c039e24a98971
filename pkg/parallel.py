"""
parallel.py - Ordered per-item thread pool

Results come back in submission order whatever the completion order, so
outputs do not depend on the worker count.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, List, Sequence, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar('T')
R = TypeVar('R')


class ItemFailedError(RuntimeError):
    """Wraps the first failure of a per-item job with the item's label"""

    def __init__(self, label: str, cause: Exception):
        super().__init__(f"{label}: {cause}")
        self.label = label
        self.cause = cause


def process_parallel(fn: Callable[[T], R], items: Sequence[T], workers: int = 1,
                     label: Callable[[T], str] = str) -> List[R]:
    """Apply fn to every item on up to `workers` threads, results in input order"""
    if workers <= 1 or len(items) <= 1:
        results = []
        for item in items:
            try:
                results.append(fn(item))
            except Exception as e:
                raise ItemFailedError(label(item), e) from e
        return results

    results = [None] * len(items)
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {executor.submit(fn, item): i for i, item in enumerate(items)}

        for future in as_completed(future_to_index):
            idx = future_to_index[future]
            try:
                results[idx] = future.result()
            except Exception as e:
                logger.error(f"Item {label(items[idx])} failed: {e}")
                for pending in future_to_index:
                    pending.cancel()
                raise ItemFailedError(label(items[idx]), e) from e

    return results
