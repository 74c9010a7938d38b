"""Command-line entry points: bench run/serve, dataset validate, metrics."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .bench import (
    RunSpec,
    TraceRef,
    aggregate_attention,
    aggregate_risk,
    aggregate_score,
    aggregate_uncertainty,
    oracle_factory,
    run_benchmark,
)
from .dataset import load_manifest
from .errors import ModalBenchError
from .traces import parse_trace_stream


def _echo_json(payload) -> None:
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


def _load_refs(paths: tuple[str, ...]) -> list[TraceRef]:
    refs: list[TraceRef] = []
    for path in paths:
        with open(path, "rb") as handle:
            line = 0
            for trace in parse_trace_stream(handle):
                line += 1
                refs.append(TraceRef(trace=trace, file=str(path), line=line))
    return refs


def _truths(dataset_path: str) -> dict[str, bool]:
    return {s.id: s.truth_is_yes for s in load_manifest(dataset_path)}


def _metrics_spec(oracle: str, estimator: str, adapter_url: str | None) -> RunSpec:
    # A minimal spec carrying just the knobs the aggregation functions read.
    return RunSpec(
        dataset_path="", output_dir="", adapter_endpoint=adapter_url or "env",
        mock_scenario_path=None, oracle=oracle, estimator=estimator,
    )


@click.group()
def bench():
    """Run benchmarks and serve the interactive evaluation API."""


@bench.command("run")
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True),
              help="Path to the run spec JSON.")
def bench_run(spec_path: str):
    """Execute a full benchmark run from a spec file."""
    try:
        spec = RunSpec.from_file(spec_path)
        report = run_benchmark(spec)
    except ModalBenchError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"run complete: {report.run_dir / 'report' / 'report.json'}")


@bench.command("serve")
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
@click.option("--runs-root", default="runs", show_default=True)
@click.option("--adapter", "adapter_endpoint", default="mock", show_default=True,
              help="Adapter URL, 'mock', or 'env' (reads ADAPTER_URL).")
@click.option("--scenario", "scenario_path", default=None, type=click.Path(),
              help="Mock scenario file (required with --adapter mock).")
@click.option("--n-samples", default=10, show_default=True, type=int)
@click.option("--temperature", default=0.9, show_default=True, type=float)
@click.option("--estimator", default="discrete", show_default=True,
              type=click.Choice(["discrete", "likelihood"]))
@click.option("--baseline", default="black", show_default=True,
              type=click.Choice(["black", "noise", "none"]))
@click.option("--seed", default=0, show_default=True, type=int)
def bench_serve(port, host, dataset_path, runs_root, adapter_endpoint, scenario_path,
                n_samples, temperature, estimator, baseline, seed):
    """Serve the evaluation API for the workbench."""
    import uvicorn

    from .service import ServiceConfig, create_app

    if adapter_endpoint == "mock" and not scenario_path:
        raise click.ClickException("--adapter mock requires --scenario")
    config = ServiceConfig(
        dataset_path=dataset_path, runs_root=runs_root,
        adapter_endpoint=adapter_endpoint, mock_scenario_path=scenario_path,
        n_samples=n_samples, temperature=temperature, estimator=estimator,
        baseline_variant=baseline, seed=seed,
    )
    uvicorn.run(create_app(config), host=host, port=port)


@click.group()
def dataset():
    """Dataset manifest tooling."""


@dataset.command("validate")
@click.argument("path", type=click.Path())
def dataset_validate(path: str):
    """Validate a dataset manifest; exits nonzero on the first violation."""
    try:
        samples = load_manifest(path)
    except ModalBenchError as exc:
        click.echo(f"invalid manifest: {exc}", err=True)
        sys.exit(1)
    click.echo(f"ok: {len(samples)} samples")


@click.group()
def metrics():
    """Recompute metrics offline from persisted trace files."""


@metrics.command("attention")
@click.argument("traces", nargs=-1, required=True, type=click.Path(exists=True))
def metrics_attention(traces):
    """Modality relevance scores and image-vs-text differences."""
    _echo_json(aggregate_attention(_load_refs(traces)))


@metrics.command("uncertainty")
@click.argument("traces", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--estimator", default="discrete",
              type=click.Choice(["discrete", "likelihood"]), show_default=True)
@click.option("--oracle", default="exact", type=click.Choice(["exact", "remote"]),
              show_default=True)
@click.option("--adapter-url", default=None, help="Entailment endpoint for --oracle remote.")
def metrics_uncertainty(traces, estimator, oracle, adapter_url):
    """Semantic entropy per trace plus distribution summaries."""
    spec = _metrics_spec(oracle, estimator, adapter_url)
    _echo_json(aggregate_uncertainty(_load_refs(traces), oracle_factory(spec), estimator))


@metrics.command("risk")
@click.argument("traces", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True),
              help="Manifest supplying ground-truth answers.")
@click.option("--estimator", default="discrete",
              type=click.Choice(["discrete", "likelihood"]), show_default=True)
@click.option("--oracle", default="exact", type=click.Choice(["exact", "remote"]),
              show_default=True)
@click.option("--adapter-url", default=None)
def metrics_risk(traces, dataset_path, estimator, oracle, adapter_url):
    """Risk-coverage curves over answer failures ranked by entropy."""
    spec = _metrics_spec(oracle, estimator, adapter_url)
    _echo_json(aggregate_risk(_load_refs(traces), _truths(dataset_path),
                              oracle_factory(spec), estimator))


@metrics.command("score")
@click.argument("traces", nargs=-1, required=True, type=click.Path(exists=True))
@click.option("--dataset", "dataset_path", required=True, type=click.Path(exists=True))
def metrics_score(traces, dataset_path):
    """Accuracy and confusion counts against the manifest ground truth."""
    _echo_json(aggregate_score(_load_refs(traces), _truths(dataset_path)))


@click.group()
def main():
    """Modality-intervention evaluation engine."""


main.add_command(bench, name="bench")
main.add_command(dataset, name="dataset")
main.add_command(metrics, name="metrics")


if __name__ == "__main__":
    main()
