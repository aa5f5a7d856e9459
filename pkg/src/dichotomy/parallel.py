"""
Order-preserving thread pool for per-vertex work.
"""
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable
from typing import List
from typing import Mapping
from typing import Optional
from typing import Sequence
from typing import TypeVar

logger = logging.getLogger(__name__)

THREADS_ENV = "DICHOTOMY_THREADS"

ITEM = TypeVar("ITEM")
RESULT = TypeVar("RESULT")


def worker_count(environ: Optional[Mapping[str, str]] = None) -> int:
    """Returns the worker cap from DICHOTOMY_THREADS; 0, unset or invalid
    values mean one worker per CPU."""
    source = os.environ if environ is None else environ
    raw = source.get(THREADS_ENV, "0")
    try:
        requested = int(raw)
    except ValueError:
        logger.warning("ignoring non-integer %s=%r", THREADS_ENV, raw)
        requested = 0
    if requested <= 0:
        return os.cpu_count() or 1
    return requested


def parallel_map(
    function: Callable[[ITEM], RESULT], items: Sequence[ITEM]
) -> List[RESULT]:
    """Applies ``function`` to every item and returns the results in input
    order. ``function`` must be safe for concurrent read-only use."""
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(function, items))
