import asyncio
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

from loguru import logger

from sturmian_targets.config.settings import settings

T = TypeVar("T")
R = TypeVar("R")


class Runner:
    """Fans pure work items over a thread pool; results come back in item order."""

    def __init__(self, jobs: Optional[int] = None):
        self.jobs = max(1, jobs or settings.jobs)

    async def _gather(self, fn: Callable[[T], R], items: List[T]) -> List[R]:
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            tasks = [loop.run_in_executor(pool, fn, item) for item in items]
            return list(await asyncio.gather(*tasks))

    def map(self, fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
        items = list(items)
        if self.jobs == 1 or len(items) < 2:
            return [fn(item) for item in items]
        logger.debug(f"running {len(items)} items on {self.jobs} workers")
        return asyncio.run(self._gather(fn, items))
