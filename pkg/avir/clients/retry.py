import logging
from typing import Awaitable, Callable, Tuple, Type, TypeVar

from tenacity import (
    AsyncRetrying,
    before_sleep_log,
    retry_if_exception_type,
    stop_after_attempt,
    wait_exponential,
)

from avir.exceptions import BackendUnavailableError

logger = logging.getLogger(__name__)

T = TypeVar("T")

MAX_BACKOFF_S = 30.0


async def call_with_retries(
    operation: Callable[[], Awaitable[T]],
    *,
    what: str,
    max_retries: int,
    backoff_base_ms: int,
    retry_on: Tuple[Type[BaseException], ...],
) -> T:
    """
    Run ``operation`` up to ``max_retries + 1`` times with exponential backoff
    (base, 2*base, 4*base, ...). Exhausting the budget raises a single
    BackendUnavailableError; exceptions outside ``retry_on`` pass through
    untouched on the first occurrence.
    """
    try:
        async for attempt in AsyncRetrying(
            stop=stop_after_attempt(max_retries + 1),
            wait=wait_exponential(multiplier=backoff_base_ms / 1000, max=MAX_BACKOFF_S),
            retry=retry_if_exception_type(retry_on),
            before_sleep=before_sleep_log(logger, logging.INFO),
            reraise=True,
        ):
            with attempt:
                result = await operation()
    except retry_on as e:
        logger.error(f"❌ {what} failed after {max_retries + 1} attempt(s): {e}")
        raise BackendUnavailableError(f"{what} failed after {max_retries + 1} attempt(s): {e}") from e
    return result
