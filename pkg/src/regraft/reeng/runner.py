"""Loads the bundled transformation assets and runs the extraction end to end.

``run_case`` executes the rule-based pipeline in place on the parsed Java
model, purges the helper trace nodes afterwards, and returns the produced
state machine as a fresh, renumbered graph (machine first, states in creation
order, then transitions), which is the form the canonical serialization and
the golden files use.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from ..engine import ExecConfig, Interpreter, Registry
from ..errors import EngineError, RegraftError
from ..formats.metamodel_format import parse_metamodel
from ..formats.tfm_format import TransformationFile, parse_transformation
from ..graph import InstanceGraph, NodeRef
from ..metamodel import Metamodel

_PHASE_NAMES = {"init": "states", "StatesLoop": "states",
                "TransitionsLoop": "transitions", "ActionsLoop": "actions"}


@dataclass
class CaseAssets:
    java_metamodel: Metamodel
    statemachine_metamodel: Metamodel
    transformation: TransformationFile

    @property
    def metamodel(self) -> Metamodel:
        """Merged metamodel the working graph conforms to."""
        return self.transformation.metamodel


def _asset_text(name: str) -> str:
    return (resources.files("regraft.reeng") / "assets" / name).read_text()


@lru_cache(maxsize=1)
def load_assets() -> CaseAssets:
    java_mm = parse_metamodel(_asset_text("java.mm"))
    sm_mm = parse_metamodel(_asset_text("statemachine.mm"))
    tfm = parse_transformation(_asset_text("reeng.tfm"),
                               {"java": java_mm, "statemachine": sm_mm})
    return CaseAssets(java_mm, sm_mm, tfm)


@dataclass
class RunReport:
    success: bool
    rule_counts: dict[str, int] = field(default_factory=dict)
    phases: dict[str, float] = field(default_factory=dict)
    seed: int = 0
    steps: int = 0

    def total_seconds(self) -> float:
        return sum(self.phases.values())

    def to_dict(self) -> dict:
        return {"success": self.success, "rule_counts": dict(self.rule_counts),
                "phases": dict(self.phases), "seed": self.seed,
                "steps": self.steps}


@dataclass
class RunOutcome:
    success: bool
    machine: InstanceGraph | None
    report: RunReport
    trace: list[str]


def extract_statemachine(host: InstanceGraph, machine_id: int,
                         sm_metamodel: Metamodel) -> InstanceGraph:
    """Copy one machine's containment closure into a fresh graph, with ids
    renumbered in creation order (machine, states, transitions)."""
    out = InstanceGraph(sm_metamodel)
    mapping: dict[int, int] = {}
    machine = out.create_node("StateMachine")
    mapping[machine_id] = machine
    for sid in host.ref_targets(machine_id, "states"):
        s = out.create_node("State")
        mapping[sid] = s
        out.set_attribute(s, "name", host.get_attribute(sid, "name"))
        out.add_edge(machine, "states", s)
    for tid in host.ref_targets(machine_id, "transitions"):
        t = out.create_node("Transition")
        out.add_edge(machine, "transitions", t)
        for ref in ("source", "target"):
            for endpoint in host.ref_targets(tid, ref):
                if endpoint not in mapping:
                    raise RegraftError(
                        f"transition {tid} points outside its machine")
                out.add_edge(t, ref, mapping[endpoint])
        out.set_attribute(t, "trigger", host.get_attribute(tid, "trigger"))
        out.set_attribute(t, "action", host.get_attribute(tid, "action"))
    return out


def purge_traces(graph: InstanceGraph) -> int:
    """Delete every helper trace node left in the host model."""
    traces = graph.nodes_of_type("Trace")
    for nid in traces:
        graph.delete_node(nid)
    return len(traces)


def run_case_full(java_model: InstanceGraph, config: ExecConfig | None = None,
                  assets: CaseAssets | None = None) -> RunOutcome:
    """Run the bundled transformation on a parsed Java model."""
    assets = assets or load_assets()
    config = config or ExecConfig()
    trace: list[str] = list(config.trace) if config.trace is not None else []
    config = ExecConfig(seed=config.seed, step_limit=config.step_limit,
                        trace=trace)
    interp = Interpreter(assets.transformation.registry(), java_model, config)
    started = time.perf_counter()
    outcome = interp.execute(assets.transformation.main, time_top_level=True)
    elapsed = time.perf_counter() - started
    phases: dict[str, float] = {}
    for child, seconds in interp.phase_seconds.items():
        key = _PHASE_NAMES.get(child, child)
        phases[key] = phases.get(key, 0.0) + seconds
    if not phases:
        phases["transform"] = elapsed
    report = RunReport(success=outcome.success,
                       rule_counts=dict(interp.rule_counts), phases=phases,
                       seed=config.seed, steps=interp.steps_used)
    if not outcome.success:
        return RunOutcome(False, None, report, trace)
    sm_ref = outcome.bindings.get("sm")
    if not isinstance(sm_ref, NodeRef):
        raise EngineError("transformation did not export the machine "
                          "through parameter 'sm'")
    purge_traces(java_model)
    machine = extract_statemachine(java_model, sm_ref.id,
                                   assets.statemachine_metamodel)
    return RunOutcome(True, machine, report, trace)


def run_case(java_model: InstanceGraph,
             config: ExecConfig | None = None) -> InstanceGraph:
    """Transform a Java model into its state machine; raises on failure."""
    outcome = run_case_full(java_model, config)
    if not outcome.success or outcome.machine is None:
        raise EngineError("transformation failed (is there a class named "
                          '"State"?)')
    return outcome.machine
