"""HTTP interface over the search engine.

Endpoints: POST /search, GET /explain/{trace_id}, POST /corpus/documents,
POST /rules, GET /stats, GET /health. Responses carry the engine version and
rule base version for reproducibility; search responses also say whether the
compiled rule set came from the cache.
"""
from __future__ import annotations

from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from . import __version__
from .engine import EngineNotReady, RuleValidationError, SearchEngine
from .query import EmptyRequestError
from .rules import RuleSyntaxError


class SearchRequest(BaseModel):
    session_id: str
    query: str
    direction: Optional[str] = None


class DocumentUpload(BaseModel):
    uri: str
    title: str = ""
    body: str


class RulesUpload(BaseModel):
    text: str


def create_app(engine: SearchEngine) -> FastAPI:
    app = FastAPI(title="ruleseek", version=__version__)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.post("/search")
    def search(request: SearchRequest):
        try:
            result, meta = engine.search(request.session_id, request.query, request.direction)
        except EmptyRequestError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except EngineNotReady as exc:
            raise HTTPException(status_code=503, detail=str(exc))
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"result": result.to_canonical_dict(), "meta": meta}

    def _versions():
        return {
            "engine_version": __version__,
            "rulebase_version": engine.rule_base.version_hash if engine.rule_base else None,
        }

    @app.get("/explain/{trace_id}")
    def explain(trace_id: str):
        trace = engine.explain(trace_id)
        if trace is None:
            raise HTTPException(status_code=404, detail=f"unknown trace id {trace_id!r}")
        return {**trace.canonical_dict(), "meta": _versions()}

    @app.post("/corpus/documents")
    def ingest(document: DocumentUpload):
        try:
            doc_id = engine.add_document(document.uri, document.title, document.body)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {"doc_id": doc_id, "documents": engine.corpus.doc_count, "meta": _versions()}

    @app.post("/rules")
    def load_rules(upload: RulesUpload):
        try:
            report = engine.load_rules_text(upload.text)
        except RuleSyntaxError as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        except RuleValidationError as exc:
            raise HTTPException(status_code=400, detail={"errors": exc.report.errors})
        return {
            "rules": len(engine.rule_base),
            "rulebase_version": engine.rule_base.version_hash,
            "warnings": report.warnings,
            "meta": _versions(),
        }

    @app.get("/stats")
    def stats():
        return engine.stats()

    @app.get("/health")
    def health():
        return {
            "ready": engine.ready,
            "documents": engine.corpus.doc_count,
            "rules": len(engine.rule_base) if engine.rule_base is not None else 0,
            "meta": _versions(),
        }

    return app
