"""The bundled reverse-engineering pipeline: restricted-Java frontend,
state-machine extraction assets, reference extractor, differ and corpus
generator."""

from .diffsm import DiffReport, diff_statemachines
from .generate import SourceFile, generate_model
from .javasrc import parse_java
from .oracle import oracle_extract
from .runner import CaseAssets, RunReport, load_assets, run_case, run_case_full

__all__ = [
    "DiffReport",
    "diff_statemachines",
    "SourceFile",
    "generate_model",
    "parse_java",
    "oracle_extract",
    "CaseAssets",
    "RunReport",
    "load_assets",
    "run_case",
    "run_case_full",
]
