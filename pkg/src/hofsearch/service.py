"""HTTP service exposing the pipeline: parse, evaluate, classify, search.

Searches can run for minutes at larger periods, so the service form makes
the engine usable from long-lived clients; request and response bodies are
plain JSON mirroring the CLI's inputs and report schema.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import evaluator, prs
from .search import SearchOptions, report_json
from .search import search as run_search
from .recurrence import (
    Recurrence,
    RecurrenceSyntaxError,
    format_recurrence,
    is_basic,
    max_inner_shift,
    parse,
)


class ParseRequest(BaseModel):
    text: str


class ParseResponse(BaseModel):
    name: str
    canonical: str
    basic: bool
    max_inner_shift: int | None


class EvalRequest(BaseModel):
    recurrence: str
    ic: list[int]
    count: int = Field(gt=0)
    default: int = 0


class DeadInfo(BaseModel):
    index: int
    reason: str


class EvalResponse(BaseModel):
    terms: list[int] | None
    dead: DeadInfo | None = None


class GrowthRequest(BaseModel):
    system: dict


class SearchRequest(BaseModel):
    recurrence: str
    period: int = Field(ge=1)
    bound: int = 64
    verify_terms: int = 200
    witnesses: int = 1
    mod_shift: bool = False
    strict: bool = False
    default: int = 0


def _parse_or_400(text: str, default: int = 0) -> Recurrence:
    try:
        rec = parse(text)
    except RecurrenceSyntaxError as exc:
        raise HTTPException(status_code=400, detail=str(exc))
    if default:
        rec = Recurrence(rec.name, rec.rhs, default)
    return rec


def create_app() -> FastAPI:
    app = FastAPI(title="hofsearch", version="0.1.0")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/parse", response_model=ParseResponse)
    def parse_endpoint(req: ParseRequest) -> ParseResponse:
        rec = _parse_or_400(req.text)
        try:
            shift = max_inner_shift(rec)
        except ValueError:
            shift = None
        return ParseResponse(
            name=rec.name,
            canonical=format_recurrence(rec),
            basic=is_basic(rec),
            max_inner_shift=shift,
        )

    @app.post("/eval", response_model=EvalResponse)
    def eval_endpoint(req: EvalRequest) -> EvalResponse:
        rec = _parse_or_400(req.recurrence, req.default)
        if req.count < len(req.ic):
            raise HTTPException(
                status_code=400, detail="count must be >= the initial condition length"
            )
        out = evaluator.generate(rec, req.ic, req.count)
        if isinstance(out, evaluator.Dead):
            return EvalResponse(terms=None, dead=DeadInfo(index=out.index, reason=out.reason))
        return EvalResponse(terms=out)

    @app.post("/growth")
    def growth_endpoint(req: GrowthRequest) -> dict:
        try:
            system = prs.PRSystem.from_json(req.system)
        except (KeyError, ValueError, TypeError) as exc:
            raise HTTPException(status_code=400, detail=f"bad system: {exc}")
        result = prs.compute_growth(system)
        return prs.growth_labels_json(system, result)

    @app.post("/search")
    def search_endpoint(req: SearchRequest) -> dict:
        rec = _parse_or_400(req.recurrence, req.default)
        opts = SearchOptions(
            bound=req.bound,
            verify_terms=req.verify_terms,
            witnesses=req.witnesses,
            strict=req.strict,
        )
        result = run_search(rec, req.period, opts)
        return report_json(result, mod_shift=req.mod_shift)

    return app


app = create_app()
