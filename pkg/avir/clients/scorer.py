"""
Page scoring backends.

Every backend turns (question, document pages) into a ScoredDocument with one
relevance probability per page, in page order.
"""
import asyncio
import logging
import random
from abc import ABC, abstractmethod
from typing import Dict, List, Mapping, Optional, Sequence

import httpx

from avir.clients.models import ScorerBackend, ScorerKind
from avir.clients.retry import call_with_retries
from avir.data.service import load_scores
from avir.exceptions import (
    BackendUnavailableError,
    InvalidInputError,
    InvalidScoreError,
    ScoreNotFoundError,
)
from avir.selector.models import ScoredDocument

logger = logging.getLogger(__name__)


class _RetryableStatus(Exception):
    """5xx or 429 from the scoring endpoint"""


class PageScorer(ABC):
    @abstractmethod
    async def score_pages(
        self, question_id: str, question: str, doc_id: str, page_refs: Sequence[str]
    ) -> ScoredDocument:
        ...

    async def aclose(self) -> None:
        pass

    async def __aenter__(self) -> "PageScorer":
        return self

    async def __aexit__(self, *exc_info) -> None:
        await self.aclose()


def _require_pages(page_refs: Sequence[str]) -> None:
    if not page_refs:
        raise InvalidInputError("cannot score a document without pages")


class RemotePageScorer(PageScorer):
    """
    Posts one request per (question, page) pair, at most
    ``backend.parallelism`` in flight:

        POST <endpoint>  {"question_id", "doc_id", "question", "page_index", "page_ref"}
        200              {"score": <float in [0, 1]>}
    """

    def __init__(self, backend: ScorerBackend, client: Optional[httpx.AsyncClient] = None):
        self.backend = backend
        self._owns_client = client is None
        self._client = client or httpx.AsyncClient(timeout=backend.timeout_ms / 1000)
        # shared by every question scored through this client
        self._slots = asyncio.Semaphore(backend.parallelism)

    async def _post(self, payload: dict) -> float:
        async with self._slots:
            response = await self._client.post(self.backend.endpoint, json=payload)
        if response.status_code == 404:
            raise ScoreNotFoundError(f"scorer has no entry for question {payload['question_id']!r}")
        if response.status_code == 429 or response.status_code >= 500:
            raise _RetryableStatus(f"HTTP {response.status_code} from {self.backend.endpoint}")
        if response.is_error:
            raise BackendUnavailableError(
                f"scorer rejected page {payload['page_index']}: HTTP {response.status_code} {response.text}"
            )
        try:
            return float(response.json()["score"])
        except (ValueError, KeyError, TypeError) as e:
            raise InvalidScoreError(f"malformed scorer response: {response.text!r}") from e

    async def _score_one(self, question_id: str, question: str, doc_id: str, index: int, page_ref: str) -> float:
        payload = {
            "question_id": question_id,
            "doc_id": doc_id,
            "question": question,
            "page_index": index,
            "page_ref": page_ref,
        }
        score = await call_with_retries(
            lambda: self._post(payload),
            what=f"scoring {question_id} page {index}",
            max_retries=self.backend.max_retries,
            backoff_base_ms=self.backend.backoff_base_ms,
            retry_on=(httpx.TransportError, _RetryableStatus),
        )
        if not 0.0 <= score <= 1.0:
            raise InvalidScoreError(f"scorer returned {score} for {question_id} page {index}")
        return score

    async def score_pages(self, question_id, question, doc_id, page_refs) -> ScoredDocument:
        _require_pages(page_refs)
        results = await asyncio.gather(
            *(self._score_one(question_id, question, doc_id, i, ref) for i, ref in enumerate(page_refs)),
            return_exceptions=True,
        )
        for result in results:
            if isinstance(result, BaseException):
                raise result
        return ScoredDocument(doc_id=doc_id, question_id=question_id, scores=list(results))

    async def aclose(self) -> None:
        if self._owns_client:
            await self._client.aclose()


class ReplayPageScorer(PageScorer):
    """Serves scores from a cache loaded once from a scores file."""

    def __init__(self, documents: Mapping[str, ScoredDocument]):
        self.documents = dict(documents)

    @classmethod
    def from_file(cls, path: str) -> "ReplayPageScorer":
        return cls(load_scores(path))

    async def score_pages(self, question_id, question, doc_id, page_refs) -> ScoredDocument:
        _require_pages(page_refs)
        doc = self.documents.get(question_id)
        if doc is None:
            raise ScoreNotFoundError(f"no cached scores for question {question_id!r}")
        if doc.num_pages != len(page_refs):
            raise InvalidInputError(
                f"cached scores cover {doc.num_pages} pages, document has {len(page_refs)}"
            )
        return doc


class MockPageScorer(PageScorer):
    """
    Synthetic oracle: the gold page scores ``signal`` and every other page
    draws uniformly from [0, noise_max]. With ``suppress_gold`` the roles flip
    (gold 0.0, others ``signal``). Draws are seeded per question id.
    """

    def __init__(self, backend: ScorerBackend, gold_pages: Mapping[str, Optional[int]]):
        self.backend = backend
        self.gold_pages = dict(gold_pages)

    def scores_for(self, question_id: str, num_pages: int) -> List[float]:
        backend = self.backend
        gold = self.gold_pages.get(question_id)
        if backend.suppress_gold and gold is not None:
            scores = [backend.signal] * num_pages
            scores[gold] = 0.0
            return scores
        rng = random.Random(f"{backend.seed}:{question_id}")
        scores = [round(rng.uniform(0.0, backend.noise_max), 6) for _ in range(num_pages)]
        if gold is not None:
            scores[gold] = backend.signal
        return scores

    async def score_pages(self, question_id, question, doc_id, page_refs) -> ScoredDocument:
        _require_pages(page_refs)
        gold = self.gold_pages.get(question_id)
        if gold is not None and gold >= len(page_refs):
            raise InvalidInputError(f"gold page {gold} outside a {len(page_refs)}-page document")
        scores = self.scores_for(question_id, len(page_refs))
        return ScoredDocument(doc_id=doc_id, question_id=question_id, scores=scores)


def build_scorer(
    backend: ScorerBackend,
    gold_pages: Optional[Mapping[str, Optional[int]]] = None,
    documents: Optional[Dict[str, ScoredDocument]] = None,
) -> PageScorer:
    if backend.kind == ScorerKind.REMOTE:
        logger.info(f"🌐 Remote scorer at {backend.endpoint}")
        return RemotePageScorer(backend)
    if backend.kind == ScorerKind.REPLAY:
        if documents is not None:
            return ReplayPageScorer(documents)
        logger.info(f"📼 Replaying scores from {backend.scores_path}")
        return ReplayPageScorer.from_file(backend.scores_path)
    logger.info(f"🎲 Mock scorer (signal={backend.signal}, noise_max={backend.noise_max})")
    return MockPageScorer(backend, gold_pages or {})
