"""Command-line client.

The CLI is a thin layer over the same operations module the HTTP service
uses.  Exit codes are a stable contract:

====  =============================================
0     success (for ``diff``: the machines match)
1     ``diff`` found differences
2     input error: file missing, parse or conformance failure
3     the transformation's main unit failed
4     step limit exceeded
====  =============================================
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .errors import RegraftError, StepLimitExceeded
from .reeng.runner import RunReport
from .service import ops

EXIT_DIFFERENCES = 1
EXIT_INPUT_ERROR = 2
EXIT_TRANSFORM_FAILED = 3
EXIT_STEP_LIMIT = 4


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise click.ClickException(f"cannot read {path}: {exc}") from exc


def _java_dir(path: str) -> list[tuple[str, str]]:
    base = Path(path)
    files = sorted(base.glob("*.java"))
    if not files:
        raise RegraftError(f"no .java files in {path}")
    return [(f.name, f.read_text()) for f in files]


def _print_report(report: RunReport) -> None:
    click.echo("phases:", err=True)
    for name, seconds in report.phases.items():
        click.echo(f"  {name:>12}: {seconds * 1000.0:9.1f} ms", err=True)
    if report.rule_counts:
        click.echo("rule applications:", err=True)
        for name, count in sorted(report.rule_counts.items()):
            click.echo(f"  {name:>20}: {count}", err=True)
    click.echo(f"steps: {report.steps}  seed: {report.seed}", err=True)


@click.group()
def main() -> None:
    """Typed-graph rewriting engine and state-machine extraction pipeline."""


@main.command()
@click.option("--metamodel", "metamodels", multiple=True,
              type=click.Path(exists=True), help="Metamodel file (repeatable).")
@click.option("--model", type=click.Path(exists=True),
              help="Input instance graph (.gm).")
@click.option("--java", "java_dir", type=click.Path(exists=True,
              file_okay=False), help="Directory of .java sources.")
@click.option("--tfm", type=click.Path(exists=True),
              help="Transformation file; defaults to the bundled pipeline.")
@click.option("--main", "main_unit", help="Main unit override.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--step-limit", type=int, default=ops.DEFAULT_STEP_LIMIT)
@click.option("--out", type=click.Path(), help="Output model file (.gm).")
@click.option("--trace", "trace_path", type=click.Path(),
              help="Write the rule-application log here.")
@click.option("--report", "report_path", type=click.Path(),
              help="Write the run report as JSON here.")
@click.pass_context
def transform(ctx, metamodels, model, java_dir, tfm, main_unit, seed,
              step_limit, out, trace_path, report_path) -> None:
    """Run a transformation and write the resulting model."""
    if (model is None) == (java_dir is None):
        click.echo("error: provide exactly one of --model or --java", err=True)
        ctx.exit(EXIT_INPUT_ERROR)
    try:
        result = ops.transform(
            metamodel_texts=[_read(p) for p in metamodels] or None,
            transformation_text=_read(tfm) if tfm else None,
            model_text=_read(model) if model else None,
            java_sources=_java_dir(java_dir) if java_dir else None,
            main=main_unit,
            seed=seed,
            step_limit=step_limit,
            collect_trace=trace_path is not None,
        )
    except StepLimitExceeded as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(EXIT_STEP_LIMIT)
    except RegraftError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(EXIT_INPUT_ERROR)
    if report_path:
        Path(report_path).write_text(json.dumps(result.report.to_dict(),
                                                indent=2) + "\n")
    if trace_path:
        Path(trace_path).write_text("".join(line + "\n"
                                            for line in result.trace))
    _print_report(result.report)
    if not result.success:
        click.echo("transformation failed", err=True)
        ctx.exit(EXIT_TRANSFORM_FAILED)
    if out:
        Path(out).write_text(result.output or "")
    else:
        sys.stdout.write(result.output or "")


@main.command()
@click.argument("left", type=click.Path(exists=True))
@click.argument("right", type=click.Path(exists=True))
@click.option("--metamodel", type=click.Path(exists=True),
              help="Metamodel for both models; defaults to the bundled "
                   "state-machine metamodel.")
@click.pass_context
def diff(ctx, left, right, metamodel) -> None:
    """Compare two state machines structurally; exit 0 iff they match."""
    try:
        report = ops.diff(_read(left), _read(right),
                          _read(metamodel) if metamodel else None)
    except RegraftError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(EXIT_INPUT_ERROR)
    click.echo(report.render(), nl=False)
    ctx.exit(0 if report.empty() else EXIT_DIFFERENCES)


@main.command()
@click.option("--java", "java_dir", type=click.Path(exists=True,
              file_okay=False), required=True)
@click.option("--out", type=click.Path(), help="Output model file.")
@click.pass_context
def oracle(ctx, java_dir, out) -> None:
    """Extract the state machine by direct traversal (no rewriting)."""
    try:
        text = ops.oracle(_java_dir(java_dir))
    except RegraftError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(EXIT_INPUT_ERROR)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


@main.command()
@click.option("--states", type=int, required=True)
@click.option("--methods", type=int, default=3, show_default=True)
@click.option("--nesting", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.pass_context
def generate(ctx, states, methods, nesting, seed, out) -> None:
    """Generate a random corpus of Java sources."""
    try:
        sources = ops.generate(states, methods, nesting, seed)
    except (RegraftError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(EXIT_INPUT_ERROR)
    base = Path(out)
    base.mkdir(parents=True, exist_ok=True)
    for source in sources:
        (base / source.name).write_text(source.text)
    click.echo(f"wrote {len(sources)} files to {out}", err=True)


@main.command()
@click.option("--states", type=int, default=100, show_default=True)
@click.option("--methods", type=int, default=10, show_default=True)
@click.option("--nesting", type=int, default=3, show_default=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--repeat", type=int, default=1, show_default=True)
@click.pass_context
def bench(ctx, states, methods, nesting, seed, repeat) -> None:
    """Generate a corpus, run the pipeline, and print phase timings."""
    try:
        result = ops.bench(states, methods, nesting, seed, repeat)
    except RegraftError as exc:
        click.echo(f"error: {exc}", err=True)
        ctx.exit(EXIT_INPUT_ERROR)
    best = result["best"]
    click.echo(f"corpus: {states} states, {methods} methods/state, "
               f"nesting {nesting}, seed {seed}")
    click.echo(f"model: {best['nodes']} nodes -> {best['states']} states, "
               f"{best['transitions']} transitions")
    for name, seconds in best["phases"].items():
        click.echo(f"  {name:>12}: {seconds * 1000.0:9.1f} ms")
    click.echo(f"  {'total':>12}: {best['total_seconds'] * 1000.0:9.1f} ms"
               f" (best of {repeat})")
    if not best["success"]:
        ctx.exit(EXIT_TRANSFORM_FAILED)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service.app import app
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
