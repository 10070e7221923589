"""
FastAPI score server.

Serves a score cache over the same wire protocol the remote scorer client
speaks, so the remote path can run end-to-end without a model.
"""
import logging
from typing import Mapping

import uvicorn
from fastapi import FastAPI, HTTPException, Request
from pydantic import BaseModel, Field, NonNegativeInt

from avir.config import settings
from avir.data.service import load_scores
from avir.selector.models import ScoredDocument

logger = logging.getLogger(__name__)


# ============ Pydantic Models ============

class ScoreRequest(BaseModel):
    question_id: str
    doc_id: str
    question: str = ""
    page_index: NonNegativeInt
    page_ref: str = ""


class ScoreResponse(BaseModel):
    score: float = Field(ge=0.0, le=1.0)


# ============ Application ============

def create_app(documents: Mapping[str, ScoredDocument]) -> FastAPI:
    app = FastAPI(
        title="AVIR score server",
        description="Replays cached page relevance scores over the remote scorer protocol",
        version="1.0.0",
    )
    app.state.documents = dict(documents)

    @app.get("/health")
    async def health_check(request: Request):
        return {
            "status": "ok",
            "service": "avir-scorer",
            "documents": len(request.app.state.documents),
        }

    @app.post("/score", response_model=ScoreResponse)
    async def score_page(body: ScoreRequest, request: Request) -> ScoreResponse:
        doc = request.app.state.documents.get(body.question_id)
        if doc is None:
            raise HTTPException(status_code=404, detail=f"unknown question {body.question_id}")
        if doc.doc_id != body.doc_id:
            raise HTTPException(
                status_code=422,
                detail=f"question {body.question_id} belongs to {doc.doc_id}, not {body.doc_id}",
            )
        if body.page_index >= doc.num_pages:
            raise HTTPException(
                status_code=422,
                detail=f"page {body.page_index} out of range for {doc.num_pages} pages",
            )
        return ScoreResponse(score=doc.scores[body.page_index])

    return app


async def serve(scores_path: str, host: str = settings.serve_host, port: int = settings.serve_port) -> None:
    app = create_app(load_scores(scores_path))
    config = uvicorn.Config(app, host=host, port=port, log_level=settings.log_level.lower())
    server = uvicorn.Server(config)

    logger.info("=" * 60)
    logger.info(f"📡 Score server running on http://{host}:{port}/score")
    logger.info("=" * 60)
    try:
        await server.serve()
    except KeyboardInterrupt:
        logger.info("⏸️  Score server stopped by user")
