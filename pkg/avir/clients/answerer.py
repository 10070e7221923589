"""
Answer generation backends.
"""
import base64
import logging
import mimetypes
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Iterable, List, Optional

import httpx
import openai
from openai import AsyncOpenAI

from avir.clients.models import AnswerBackend, AnswerKind
from avir.clients.prompt import PromptSpec
from avir.clients.retry import call_with_retries
from avir.exceptions import BackendUnavailableError, EmptyAnswerError, InvalidInputError
from avir.metrics.report import QASample

logger = logging.getLogger(__name__)

_PASSTHROUGH_SCHEMES = ("http://", "https://", "data:")

# Transient failures worth another attempt
_RETRYABLE = (
    openai.APIConnectionError,  # includes APITimeoutError
    openai.RateLimitError,
    openai.InternalServerError,
)


def image_part(page_ref: str) -> dict:
    """Chat-completions image part; local files are inlined as base64 data URLs."""
    if page_ref.startswith(_PASSTHROUGH_SCHEMES):
        url = page_ref
    else:
        path = Path(page_ref)
        try:
            data = path.read_bytes()
        except OSError as e:
            raise InvalidInputError(f"cannot read page image {page_ref}: {e}") from e
        mime_type, _ = mimetypes.guess_type(path.name)
        url = f"data:{mime_type or 'image/png'};base64,{base64.b64encode(data).decode('ascii')}"
    return {"type": "image_url", "image_url": {"url": url}}


def build_messages(prompt: PromptSpec) -> List[dict]:
    """One user turn: every page image in document order, then the text."""
    content = [image_part(ref) for ref in prompt.page_refs]
    content.append({"type": "text", "text": prompt.text()})
    return [{"role": "user", "content": content}]


class AnswerGenerator(ABC):
    @abstractmethod
    async def generate_answer(self, prompt: PromptSpec) -> str:
        ...

    async def aclose(self) -> None:
        pass

    async def __aenter__(self) -> "AnswerGenerator":
        return self

    async def __aexit__(self, *exc_info) -> None:
        await self.aclose()


class RemoteAnswerGenerator(AnswerGenerator):
    """Chat-completions client for any served vision-language model."""

    def __init__(self, backend: AnswerBackend, http_client: Optional[httpx.AsyncClient] = None):
        self.backend = backend
        self._client = AsyncOpenAI(
            base_url=backend.endpoint,
            api_key=backend.api_key,
            timeout=backend.timeout_ms / 1000,
            max_retries=0,  # retries are ours
            http_client=http_client,
        )

    async def _complete(self, messages: List[dict]) -> Optional[str]:
        response = await self._client.chat.completions.create(
            model=self.backend.model_name,
            messages=messages,
            temperature=self.backend.temperature,
            max_tokens=self.backend.max_tokens,
        )
        if not response.choices:
            return None
        return response.choices[0].message.content

    async def generate_answer(self, prompt: PromptSpec) -> str:
        what = f"answering {prompt.question_id or prompt.question!r}"
        messages = build_messages(prompt)
        try:
            content = await call_with_retries(
                lambda: self._complete(messages),
                what=what,
                max_retries=self.backend.max_retries,
                backoff_base_ms=self.backend.backoff_base_ms,
                retry_on=_RETRYABLE,
            )
        except openai.APIStatusError as e:
            # 4xx: context too long, image rejected, bad key, unknown model
            raise BackendUnavailableError(f"{what} rejected: HTTP {e.status_code} {e.message}") from e
        except openai.OpenAIError as e:
            raise BackendUnavailableError(f"{what} failed: {type(e).__name__}: {e}") from e
        answer = (content or "").strip()
        if not answer:
            raise EmptyAnswerError(f"empty completion for {prompt.question_id or prompt.question!r}")
        return answer

    async def aclose(self) -> None:
        await self._client.close()


class MockEchoGenerator(AnswerGenerator):
    """
    Offline stand-in: answers with the first gold answer when the gold page is
    among the prompt pages (or the question has no annotated page), otherwise
    with ``unknown_answer``.
    """

    def __init__(self, samples: Iterable[QASample], unknown_answer: str = "UNKNOWN"):
        self.samples: Dict[str, QASample] = {s.question_id: s for s in samples}
        self.unknown_answer = unknown_answer

    async def generate_answer(self, prompt: PromptSpec) -> str:
        sample = self.samples.get(prompt.question_id)
        if sample is None:
            return self.unknown_answer
        if sample.answer_page is None or sample.answer_page in prompt.page_indices:
            return sample.answers[0]
        return self.unknown_answer


def build_answerer(backend: AnswerBackend, samples: Iterable[QASample] = ()) -> AnswerGenerator:
    if backend.kind == AnswerKind.REMOTE:
        logger.info(f"🌐 Remote answerer {backend.model_name} at {backend.endpoint}")
        return RemoteAnswerGenerator(backend)
    logger.info("🎭 Mock echo answerer")
    return MockEchoGenerator(samples, backend.unknown_answer)
