"""Operations behind both the HTTP endpoints and the command-line client.

Everything here is text in, text out: callers hand over file contents and get
canonical serializations and report structures back, so the same functions
serve HTTP handlers, the CLI and tests.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..engine import ExecConfig, Interpreter
from ..errors import RegraftError
from ..formats.metamodel_format import parse_metamodel
from ..formats.model_format import parse_model, serialize_model
from ..formats.tfm_format import parse_transformation
from ..graph import InstanceGraph
from ..metamodel import Metamodel
from ..reeng.diffsm import DiffReport, diff_statemachines
from ..reeng.generate import SourceFile, generate_model
from ..reeng.javasrc import parse_java
from ..reeng.oracle import oracle_extract
from ..reeng.runner import (RunReport, load_assets, purge_traces,
                            run_case_full)

DEFAULT_STEP_LIMIT = 10_000_000


@dataclass
class TransformResult:
    success: bool
    output: str | None
    report: RunReport
    trace: list[str] = field(default_factory=list)


def _named(sources: Sequence) -> list[tuple[str, str]]:
    out = []
    for s in sources:
        if isinstance(s, tuple):
            out.append(s)
        else:
            out.append((s.name, s.text))
    return out


def transform(metamodel_texts: Sequence[str] | None = None,
              transformation_text: str | None = None,
              model_text: str | None = None,
              java_sources: Sequence | None = None,
              main: str | None = None,
              seed: int = 0,
              step_limit: int = DEFAULT_STEP_LIMIT,
              collect_trace: bool = False) -> TransformResult:
    """Run a transformation and serialize the result.

    Without an explicit transformation the bundled reverse-engineering
    pipeline runs on Java sources and the extracted state machine is
    returned.  With an explicit transformation the named main unit runs on
    the given model (or parsed Java sources) and the whole resulting graph
    is serialized.
    """
    if (model_text is None) == (java_sources is None):
        raise RegraftError("provide exactly one of a model or Java sources")
    config = ExecConfig(seed=seed, step_limit=step_limit,
                        trace=[] if collect_trace else None)
    if transformation_text is None:
        if main is not None:
            raise RegraftError(
                "a main-unit override needs an explicit transformation")
        assets = load_assets()
        started = time.perf_counter()
        if java_sources is not None:
            graph = parse_java(_named(java_sources), assets.metamodel)
        else:
            graph = parse_model(model_text, assets.metamodel)
        parse_seconds = time.perf_counter() - started
        outcome = run_case_full(graph, config)
        outcome.report.phases = {"parse": parse_seconds, **outcome.report.phases}
        output = serialize_model(outcome.machine) if outcome.machine else None
        return TransformResult(outcome.success, output, outcome.report,
                               outcome.trace)

    metamodels: dict[str, Metamodel] = {}
    for text in metamodel_texts or ():
        mm = parse_metamodel(text)
        metamodels[mm.name] = mm
    tf = parse_transformation(transformation_text, metamodels)
    started = time.perf_counter()
    if java_sources is not None:
        graph = parse_java(_named(java_sources), tf.metamodel)
    else:
        graph = parse_model(model_text, tf.metamodel)
    parse_seconds = time.perf_counter() - started
    conflicts = graph.validate()
    if conflicts:
        raise RegraftError("model does not conform to the metamodel: "
                           + "; ".join(conflicts[:5]))
    interp = Interpreter(tf.registry(), graph, config)
    started = time.perf_counter()
    outcome = interp.execute(main or tf.main, time_top_level=True)
    elapsed = time.perf_counter() - started
    phases = {"parse": parse_seconds}
    if interp.phase_seconds:
        phases.update(interp.phase_seconds)
    else:
        phases["transform"] = elapsed
    report = RunReport(success=outcome.success,
                       rule_counts=dict(interp.rule_counts),
                       phases=phases, seed=seed, steps=interp.steps_used)
    output = serialize_model(graph) if outcome.success else None
    return TransformResult(outcome.success, output, report,
                           config.trace or [])


def diff(left_text: str, right_text: str,
         metamodel_text: str | None = None) -> DiffReport:
    mm = parse_metamodel(metamodel_text) if metamodel_text is not None \
        else load_assets().statemachine_metamodel
    left = parse_model(left_text, mm)
    right = parse_model(right_text, mm)
    return diff_statemachines(left, right)


def oracle(java_sources: Sequence) -> str:
    assets = load_assets()
    graph = parse_java(_named(java_sources), assets.metamodel)
    return serialize_model(oracle_extract(graph))


def generate(states: int, methods: int, nesting: int,
             seed: int) -> list[SourceFile]:
    return generate_model(states, methods, nesting, seed)


def bench(states: int, methods: int, nesting: int, seed: int,
          repeat: int = 1) -> dict:
    """Generate a corpus and run the pipeline, reporting per-phase timings."""
    sources = generate_model(states, methods, nesting, seed)
    assets = load_assets()
    runs = []
    for _ in range(max(1, repeat)):
        started = time.perf_counter()
        graph = parse_java(sources, assets.metamodel)
        parse_seconds = time.perf_counter() - started
        outcome = run_case_full(graph, ExecConfig(seed=seed))
        phases = {"parse": parse_seconds, **outcome.report.phases}
        runs.append({
            "phases": phases,
            "total_seconds": sum(phases.values()),
            "success": outcome.success,
            "nodes": len(graph),
            "states": len(outcome.machine.nodes_of_type("State"))
            if outcome.machine else 0,
            "transitions": len(outcome.machine.nodes_of_type("Transition"))
            if outcome.machine else 0,
        })
    best = min(runs, key=lambda r: r["total_seconds"])
    return {"parameters": {"states": states, "methods": methods,
                           "nesting": nesting, "seed": seed, "repeat": repeat},
            "runs": runs, "best": best}


def bundled_assets() -> dict[str, str]:
    from ..reeng.runner import _asset_text
    return {"java.mm": _asset_text("java.mm"),
            "statemachine.mm": _asset_text("statemachine.mm"),
            "reeng.tfm": _asset_text("reeng.tfm")}
