"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class NamedSource(BaseModel):
    name: str
    text: str


class RunReportModel(BaseModel):
    success: bool
    rule_counts: dict[str, int] = Field(default_factory=dict)
    phases: dict[str, float] = Field(default_factory=dict)
    seed: int = 0
    steps: int = 0


class TransformRequest(BaseModel):
    metamodels: list[str] | None = None
    transformation: str | None = None
    model: str | None = None
    java_sources: list[NamedSource] | None = None
    main: str | None = None
    seed: int = 0
    step_limit: int = 10_000_000
    collect_trace: bool = False


class TransformResponse(BaseModel):
    success: bool
    output: str | None = None
    report: RunReportModel
    trace: list[str] | None = None


class DiffRequest(BaseModel):
    left: str
    right: str
    metamodel: str | None = None


class DiffReportModel(BaseModel):
    unmatched_states_left: list[str] = Field(default_factory=list)
    unmatched_states_right: list[str] = Field(default_factory=list)
    unmatched_transitions_left: list[tuple[str, str, str, str]] = \
        Field(default_factory=list)
    unmatched_transitions_right: list[tuple[str, str, str, str]] = \
        Field(default_factory=list)
    attribute_mismatches: list[str] = Field(default_factory=list)
    duplicate_names_left: list[str] = Field(default_factory=list)
    duplicate_names_right: list[str] = Field(default_factory=list)


class DiffResponse(BaseModel):
    empty: bool
    report: DiffReportModel
    rendered: str


class OracleRequest(BaseModel):
    java_sources: list[NamedSource]


class OracleResponse(BaseModel):
    model: str


class GenerateRequest(BaseModel):
    states: int = Field(ge=1)
    methods: int = Field(ge=0)
    nesting: int = Field(ge=0)
    seed: int = 0


class GenerateResponse(BaseModel):
    sources: list[NamedSource]


class BenchRequest(BaseModel):
    states: int = Field(ge=1)
    methods: int = Field(ge=0)
    nesting: int = Field(ge=0)
    seed: int = 0
    repeat: int = Field(default=1, ge=1, le=20)


class BenchRun(BaseModel):
    phases: dict[str, float]
    total_seconds: float
    success: bool
    nodes: int
    states: int
    transitions: int


class BenchResponse(BaseModel):
    parameters: dict
    runs: list[BenchRun]
    best: BenchRun


class AssetsResponse(BaseModel):
    assets: dict[str, str]


class ErrorDetail(BaseModel):
    error_type: str
    message: str
    errors: list[str] | None = None
    line: int | None = None
