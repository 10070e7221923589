import asyncio
import base64
import json

import httpx
import pytest
from pydantic import ValidationError

from avir.clients import (
    AnswerBackend,
    MockEchoGenerator,
    MockPageScorer,
    PromptSpec,
    RemoteAnswerGenerator,
    RemotePageScorer,
    ReplayPageScorer,
    ScorerBackend,
    build_answerer,
    build_prompt,
    build_scorer,
)
from avir.clients.answerer import build_messages, image_part
from avir.data import load_questions, load_scores
from avir.exceptions import (
    BackendUnavailableError,
    EmptyAnswerError,
    InvalidInputError,
    InvalidScoreError,
    ScoreNotFoundError,
)
from avir.harness import RunConfig
from avir.harness.runner import answer_corpus
from avir.metrics import QASample
from avir.selector import select_topk
from avir.selector.models import SelectionPolicy

from tests.helpers import make_doc

ENDPOINT = "http://scorer.test/score"
REFS = ["p0.png", "p1.png", "p2.png"]


def remote_scorer(handler, **overrides) -> RemotePageScorer:
    backend = ScorerBackend(kind="remote", endpoint=ENDPOINT, backoff_base_ms=0, max_retries=2, **overrides)
    client = httpx.AsyncClient(transport=httpx.MockTransport(handler))
    return RemotePageScorer(backend, client=client)


def completion(content):
    return {
        "id": "chatcmpl-1",
        "object": "chat.completion",
        "created": 0,
        "model": "test-model",
        "choices": [{"index": 0, "finish_reason": "stop",
                     "message": {"role": "assistant", "content": content}}],
    }


def remote_answerer(handler, **overrides) -> RemoteAnswerGenerator:
    backend = AnswerBackend(kind="remote", endpoint="http://vlm.test/v1", model_name="test-model",
                            backoff_base_ms=0, max_retries=1, **overrides)
    http_client = httpx.AsyncClient(transport=httpx.MockTransport(handler))
    return RemoteAnswerGenerator(backend, http_client=http_client)


def prompt(refs=("https://img.test/p1.png",)) -> PromptSpec:
    return PromptSpec(question_id="q1", question="Who signed?", page_indices=list(range(len(refs))),
                      page_refs=list(refs))


# ==================== REMOTE SCORER ====================

def test_remote_scorer_posts_one_request_per_page():
    seen = []

    def handler(request: httpx.Request) -> httpx.Response:
        body = json.loads(request.content)
        seen.append(body)
        return httpx.Response(200, json={"score": [0.2, 0.9, 0.1][body["page_index"]]})

    async def go():
        async with remote_scorer(handler) as scorer:
            return await scorer.score_pages("q1", "Who?", "d1", REFS)

    doc = asyncio.run(go())
    assert doc.scores == [0.2, 0.9, 0.1]
    assert doc.question_id == "q1" and doc.doc_id == "d1"
    assert sorted(b["page_index"] for b in seen) == [0, 1, 2]
    assert seen[0].keys() == {"question_id", "doc_id", "question", "page_index", "page_ref"}


def test_remote_scorer_rejects_out_of_range_score():
    def handler(request):
        return httpx.Response(200, json={"score": 1.7})

    with pytest.raises(InvalidScoreError):
        asyncio.run(remote_scorer(handler).score_pages("q1", "Who?", "d1", REFS[:1]))


def test_remote_scorer_rejects_malformed_body():
    def handler(request):
        return httpx.Response(200, json={"relevance": 0.3})

    with pytest.raises(InvalidScoreError):
        asyncio.run(remote_scorer(handler).score_pages("q1", "Who?", "d1", REFS[:1]))


def test_remote_scorer_retries_then_gives_up():
    calls = []

    def handler(request):
        calls.append(request)
        return httpx.Response(503, text="overloaded")

    with pytest.raises(BackendUnavailableError):
        asyncio.run(remote_scorer(handler).score_pages("q1", "Who?", "d1", REFS[:1]))
    assert len(calls) == 3


def test_remote_scorer_recovers_from_transient_errors():
    calls = []

    def handler(request):
        calls.append(request)
        if len(calls) == 1:
            raise httpx.ConnectTimeout("timed out", request=request)
        if len(calls) == 2:
            return httpx.Response(429)
        return httpx.Response(200, json={"score": 0.4})

    doc = asyncio.run(remote_scorer(handler).score_pages("q1", "Who?", "d1", REFS[:1]))
    assert doc.scores == [0.4]
    assert len(calls) == 3


def test_remote_scorer_unknown_question():
    calls = []

    def handler(request):
        calls.append(request)
        return httpx.Response(404, json={"detail": "unknown question"})

    with pytest.raises(ScoreNotFoundError):
        asyncio.run(remote_scorer(handler).score_pages("q9", "Who?", "d1", REFS[:1]))
    assert len(calls) == 1


def test_remote_scorer_client_error_is_not_retried():
    calls = []

    def handler(request):
        calls.append(request)
        return httpx.Response(400, text="bad request")

    with pytest.raises(BackendUnavailableError):
        asyncio.run(remote_scorer(handler).score_pages("q1", "Who?", "d1", REFS[:1]))
    assert len(calls) == 1


def test_remote_scorer_bounds_requests_in_flight():
    in_flight = 0
    peak = 0

    async def handler(request):
        nonlocal in_flight, peak
        in_flight += 1
        peak = max(peak, in_flight)
        await asyncio.sleep(0.005)
        in_flight -= 1
        return httpx.Response(200, json={"score": json.loads(request.content)["page_index"] / 100})

    refs = [f"p{i}.png" for i in range(40)]

    async def go():
        async with remote_scorer(handler, parallelism=4) as scorer:
            return await asyncio.gather(
                scorer.score_pages("q1", "Who?", "d1", refs),
                scorer.score_pages("q2", "Where?", "d2", refs),
            )

    docs = asyncio.run(go())
    assert [len(doc.scores) for doc in docs] == [40, 40]
    assert docs[0].scores[39] == 0.39
    assert 1 < peak <= 4


def test_remote_backend_requires_endpoint():
    with pytest.raises(ValidationError):
        ScorerBackend(kind="remote")
    with pytest.raises(ValidationError):
        AnswerBackend(kind="remote")


# ==================== REPLAY / MOCK SCORERS ====================

def test_replay_scorer_returns_cached_document():
    doc = make_doc([0.3, 0.6, 0.1], question_id="q1", doc_id="d1")
    scorer = ReplayPageScorer({"q1": doc})
    assert asyncio.run(scorer.score_pages("q1", "Who?", "d1", REFS)) == doc

    with pytest.raises(ScoreNotFoundError):
        asyncio.run(scorer.score_pages("q2", "Who?", "d1", REFS))
    with pytest.raises(InvalidInputError):
        asyncio.run(scorer.score_pages("q1", "Who?", "d1", REFS[:2]))


def test_replay_scorer_from_file(corpus_files):
    _, scores = corpus_files
    scorer = build_scorer(ScorerBackend(kind="replay", scores_path=str(scores)))
    doc = asyncio.run(scorer.score_pages("q1", "Who?", "d1", REFS))
    assert doc.scores == [0.9, 0.1, 0.05]


def test_mock_scorer_highlights_gold_page():
    backend = ScorerBackend(kind="mock", signal=0.9, noise_max=0.1, seed=3)
    scorer = MockPageScorer(backend, {"q1": 4, "q2": None})
    doc = asyncio.run(scorer.score_pages("q1", "?", "d1", [f"p{i}" for i in range(10)]))

    assert doc.scores[4] == 0.9
    assert all(0.0 <= s <= 0.1 for i, s in enumerate(doc.scores) if i != 4)
    assert asyncio.run(scorer.score_pages("q1", "?", "d1", [f"p{i}" for i in range(10)])) == doc

    unannotated = scorer.scores_for("q2", 5)
    assert max(unannotated) <= 0.1


def test_mock_scorer_depends_on_seed():
    pages = [f"p{i}" for i in range(20)]
    first = MockPageScorer(ScorerBackend(kind="mock", seed=1), {"q1": 0})
    second = MockPageScorer(ScorerBackend(kind="mock", seed=2), {"q1": 0})
    assert first.scores_for("q1", 20) != second.scores_for("q1", 20)
    assert asyncio.run(first.score_pages("q1", "?", "d", pages)).scores == first.scores_for("q1", 20)


def test_mock_scorer_suppressed_gold():
    backend = ScorerBackend(kind="mock", signal=0.8, suppress_gold=True)
    scorer = MockPageScorer(backend, {"q1": 1})
    assert scorer.scores_for("q1", 4) == [0.8, 0.0, 0.8, 0.8]


def test_mock_scorer_gold_outside_document():
    scorer = MockPageScorer(ScorerBackend(kind="mock"), {"q1": 7})
    with pytest.raises(InvalidInputError):
        asyncio.run(scorer.score_pages("q1", "?", "d", REFS))


def test_mock_scorer_needs_separation():
    with pytest.raises(ValidationError):
        ScorerBackend(kind="mock", signal=0.1, noise_max=0.2)


def test_scorers_reject_empty_documents():
    scorer = ReplayPageScorer({})
    with pytest.raises(InvalidInputError):
        asyncio.run(scorer.score_pages("q1", "?", "d", []))


# ==================== PROMPT ====================

def test_build_prompt_keeps_document_order():
    selection = select_topk(make_doc([0.1, 0.9, 0.2, 0.8]), 2)
    spec = build_prompt("Who signed?", selection, ["a", "b", "c", "d"], question_id="q1")
    assert spec.page_indices == [1, 3]
    assert spec.page_refs == ["b", "d"]
    assert spec.text() == "Answer the question using a single word or phrase.\nWho signed?"


def test_build_prompt_custom_instruction():
    selection = select_topk(make_doc([0.1, 0.9]), 1)
    spec = build_prompt("Who?", selection, ["a", "b"], instruction="Reply briefly.")
    assert spec.text() == "Reply briefly.\nWho?"


def test_build_prompt_rejects_out_of_range_pages():
    selection = select_topk(make_doc([0.1, 0.2, 0.9]), 1)
    with pytest.raises(InvalidInputError):
        build_prompt("Who?", selection, ["a", "b"])


def test_local_images_are_inlined(tmp_path):
    page = tmp_path / "page_0.png"
    page.write_bytes(b"\x89PNG fake")
    part = image_part(str(page))
    assert part["type"] == "image_url"
    assert part["image_url"]["url"] == "data:image/png;base64," + base64.b64encode(b"\x89PNG fake").decode()
    assert image_part("https://img.test/a.jpg")["image_url"]["url"] == "https://img.test/a.jpg"

    with pytest.raises(InvalidInputError):
        image_part(str(tmp_path / "missing.png"))


def test_messages_put_images_before_text():
    messages = build_messages(prompt(["https://img.test/a.png", "https://img.test/b.png"]))
    assert len(messages) == 1 and messages[0]["role"] == "user"
    kinds = [part["type"] for part in messages[0]["content"]]
    assert kinds == ["image_url", "image_url", "text"]
    assert messages[0]["content"][-1]["text"].endswith("Who signed?")


# ==================== ANSWERERS ====================

def test_remote_answerer_returns_stripped_completion():
    requests = []

    def handler(request):
        requests.append(json.loads(request.content))
        return httpx.Response(200, json=completion("  John Smith \n"))

    answer = asyncio.run(remote_answerer(handler).generate_answer(prompt()))
    assert answer == "John Smith"
    body = requests[0]
    assert body["model"] == "test-model"
    assert body["temperature"] == 0.0
    assert body["messages"][0]["content"][0]["image_url"]["url"] == "https://img.test/p1.png"


def test_remote_answerer_empty_completion():
    def handler(request):
        return httpx.Response(200, json=completion("   "))

    with pytest.raises(EmptyAnswerError):
        asyncio.run(remote_answerer(handler).generate_answer(prompt()))


def test_remote_answerer_retries_server_errors():
    calls = []

    def handler(request):
        calls.append(request)
        return httpx.Response(500, json={"error": {"message": "boom"}})

    with pytest.raises(BackendUnavailableError):
        asyncio.run(remote_answerer(handler).generate_answer(prompt()))
    assert len(calls) == 2


def test_remote_answerer_client_error_is_not_retried():
    calls = []

    def handler(request):
        calls.append(request)
        return httpx.Response(400, json={"error": {"message": "context length exceeded"}})

    with pytest.raises(BackendUnavailableError, match="HTTP 400"):
        asyncio.run(remote_answerer(handler).generate_answer(prompt()))
    assert len(calls) == 1


def test_rejected_prompt_fails_only_its_question(corpus_files):
    questions, scores = corpus_files
    samples = load_questions(questions)
    scored = dict(load_scores(scores))
    config = RunConfig(questions_path=str(questions), scores_path=str(scores),
                       page_ref_template="https://pages.test/{doc_id}/{page}.png")

    def handler(request):
        if b"Who?" in request.content:
            return httpx.Response(400, json={"error": {"message": "context length exceeded"}})
        return httpx.Response(200, json=completion("Paris"))

    async def go():
        async with remote_answerer(handler) as answerer:
            return await answer_corpus(samples, scored, SelectionPolicy(), config, answerer)

    records = asyncio.run(go())
    assert [r.question_id for r in records] == ["q1", "q2", "q3"]
    assert [r.error is not None for r in records] == [True, False, False]
    assert records[0].error.startswith("BackendUnavailableError")
    assert records[0].selected_pages == [0]
    assert records[1].predicted_answer == "Paris"


def test_mock_echo_generator():
    samples = [
        QASample(question_id="q1", doc_id="d", question="?", answers=["Alice", "A."], answer_page=2, num_pages=4),
        QASample(question_id="q2", doc_id="d", question="?", answers=["Bob"], num_pages=4),
    ]
    echo = build_answerer(AnswerBackend(kind="mock"), samples)
    assert isinstance(echo, MockEchoGenerator)

    def ask(qid, pages):
        spec = PromptSpec(question_id=qid, question="?", page_indices=pages, page_refs=[f"p{i}" for i in pages])
        return asyncio.run(echo.generate_answer(spec))

    assert ask("q1", [1, 2]) == "Alice"
    assert ask("q1", [0, 3]) == "UNKNOWN"
    assert ask("q2", [0]) == "Bob"
    assert ask("q9", [0]) == "UNKNOWN"
