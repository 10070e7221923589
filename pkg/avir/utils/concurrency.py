"""
Bounded fan-out over asyncio.
"""
import asyncio
from typing import Awaitable, Callable, Iterable, List, TypeVar

T = TypeVar("T")
R = TypeVar("R")


async def gather_bounded(func: Callable[[T], Awaitable[R]], items: Iterable[T], limit: int) -> List[R]:
    """
    Run ``func`` over ``items`` with at most ``limit`` calls in flight.

    Results come back in input order regardless of completion order.
    """
    if limit < 1:
        raise ValueError(f"limit must be positive, got {limit}")
    semaphore = asyncio.Semaphore(limit)

    async def run(item: T) -> R:
        async with semaphore:
            return await func(item)

    return await asyncio.gather(*(run(item) for item in items))
