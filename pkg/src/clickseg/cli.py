"""Benchmark CLI: `bench run`, `bench sweep`, `bench synth`, `bench serve`."""

from __future__ import annotations

import math
import sys
from pathlib import Path

import click

from . import bench


@click.group()
def main():
    """Interactive-segmentation benchmark workbench."""


@main.command("synth")
@click.option("--n", type=int, required=True, help="number of instances")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), required=True)
def synth_cmd(n, seed, out):
    """Generate a deterministic synthetic dataset."""
    instances = bench.make_synthetic_dataset(n, seed, out)
    click.echo(f"wrote {len(instances)} instances to {out}")


@main.command("run")
@click.option("--dataset", "dataset_dir", type=click.Path(exists=True), required=True)
@click.option("--layout", default="sp_obj_scaled", show_default=True,
              type=click.Choice(sorted(bench.LAYOUTS)))
@click.option("--threshold", type=float, default=0.90, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--k", type=int, default=64, show_default=True)
@click.option("--f2", type=float, default=1.5, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="report JSON path")
def run_cmd(dataset_dir, layout, threshold, seed, k, f2, out):
    """Run the clicks@mIoU benchmark on a dataset directory."""
    try:
        dataset = bench.load_dataset(dataset_dir)
    except ValueError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    if not dataset:
        click.echo("dataset is empty", err=True)
        sys.exit(1)
    report = bench.run_benchmark(dataset, layout_name=layout,
                                 threshold=threshold, seed=seed, k=k, f2=f2)
    payload = report.to_json()
    if out:
        Path(out).write_text(payload)
        report.write_csv(Path(out).with_suffix(".csv"))
        click.echo(f"report written to {out}")
    else:
        click.echo(payload)
    click.echo(f"mean NoC @ {threshold:.2f}: {report.mean_noc:.2f}")
    if report.errors:
        sys.exit(1)


@main.command("sweep")
@click.option("--dataset", "dataset_dir", type=click.Path(exists=True), required=True)
@click.option("--param", type=click.Choice(["layout", "k", "f2"]), required=True)
@click.option("--values", required=True,
              help="comma-separated values; 'inf' allowed for f2")
@click.option("--threshold", type=float, default=0.90, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--k", type=int, default=64, show_default=True)
@click.option("--out", type=click.Path(), default=None, help="combined JSON path")
def sweep_cmd(dataset_dir, param, values, threshold, seed, k, out):
    """Sweep one parameter and emit a combined table of reports."""
    try:
        dataset = bench.load_dataset(dataset_dir)
    except ValueError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    raw = [v.strip() for v in values.split(",") if v.strip()]
    if param == "layout":
        vals = raw
    elif param == "k":
        vals = [int(v) for v in raw]
    else:
        vals = [math.inf if v == "inf" else float(v) for v in raw]
    reports = bench.sweep(dataset, param, vals, threshold=threshold,
                          seed=seed, k=k)
    click.echo(f"{param:>10}  mean_noc  zero_click_ok")
    for v, rep in zip(vals, reports):
        click.echo(f"{str(v):>10}  {rep.mean_noc:8.2f}  {rep.zero_click_successes:13d}")
    if out:
        import json
        combined = [{"value": str(v), "report": json_loads_report(rep)}
                    for v, rep in zip(vals, reports)]
        Path(out).write_text(json.dumps(combined, indent=2))
        click.echo(f"combined report written to {out}")
    if any(rep.errors for rep in reports):
        sys.exit(1)


def json_loads_report(rep):
    import json
    return json.loads(rep.to_json())


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--k", type=int, default=1000, show_default=True,
              help="superpixels per uploaded image")
def serve_cmd(host, port, k):
    """Start the interactive session HTTP service."""
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(k=k), host=host, port=port)


if __name__ == "__main__":
    main()
