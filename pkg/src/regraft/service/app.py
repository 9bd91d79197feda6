"""FastAPI application exposing the engine and the bundled pipeline."""

from __future__ import annotations

from dataclasses import asdict

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import FormatError, RegraftError, StepLimitExceeded
from . import ops
from .schemas import (AssetsResponse, BenchRequest, BenchResponse,
                      DiffRequest, DiffResponse, ErrorDetail, GenerateRequest,
                      GenerateResponse, NamedSource, OracleRequest,
                      OracleResponse, RunReportModel, TransformRequest,
                      TransformResponse)


def _bad_request(exc: RegraftError) -> HTTPException:
    detail = ErrorDetail(error_type=type(exc).__name__, message=str(exc))
    if isinstance(exc, FormatError):
        detail.errors = exc.errors
        detail.line = exc.line
    return HTTPException(status_code=400, detail=detail.model_dump())


def create_app() -> FastAPI:
    app = FastAPI(title="regraft", version=__version__,
                  description="Typed-graph rewriting engine with a "
                              "state-machine reverse-engineering pipeline.")

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "version": __version__}

    @app.get("/assets", response_model=AssetsResponse)
    def assets() -> AssetsResponse:
        return AssetsResponse(assets=ops.bundled_assets())

    @app.post("/transform", response_model=TransformResponse)
    def transform(request: TransformRequest) -> TransformResponse:
        try:
            result = ops.transform(
                metamodel_texts=request.metamodels,
                transformation_text=request.transformation,
                model_text=request.model,
                java_sources=[(s.name, s.text)
                              for s in request.java_sources]
                if request.java_sources is not None else None,
                main=request.main,
                seed=request.seed,
                step_limit=request.step_limit,
                collect_trace=request.collect_trace,
            )
        except StepLimitExceeded as exc:
            raise _bad_request(exc) from exc
        except RegraftError as exc:
            raise _bad_request(exc) from exc
        return TransformResponse(
            success=result.success,
            output=result.output,
            report=RunReportModel(**result.report.to_dict()),
            trace=result.trace if request.collect_trace else None,
        )

    @app.post("/diff", response_model=DiffResponse)
    def diff(request: DiffRequest) -> DiffResponse:
        try:
            report = ops.diff(request.left, request.right, request.metamodel)
        except RegraftError as exc:
            raise _bad_request(exc) from exc
        return DiffResponse(empty=report.empty(),
                            report=asdict(report),
                            rendered=report.render())

    @app.post("/oracle", response_model=OracleResponse)
    def oracle(request: OracleRequest) -> OracleResponse:
        try:
            text = ops.oracle([(s.name, s.text) for s in request.java_sources])
        except RegraftError as exc:
            raise _bad_request(exc) from exc
        return OracleResponse(model=text)

    @app.post("/generate", response_model=GenerateResponse)
    def generate(request: GenerateRequest) -> GenerateResponse:
        try:
            sources = ops.generate(request.states, request.methods,
                                   request.nesting, request.seed)
        except (RegraftError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return GenerateResponse(sources=[NamedSource(name=s.name, text=s.text)
                                         for s in sources])

    @app.post("/bench", response_model=BenchResponse)
    def bench(request: BenchRequest) -> BenchResponse:
        try:
            result = ops.bench(request.states, request.methods,
                               request.nesting, request.seed, request.repeat)
        except (RegraftError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return BenchResponse(**result)

    return app


app = create_app()
