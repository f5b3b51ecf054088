"""Command-line interface: batch curve building and the session service."""

from __future__ import annotations

import sys
import time

import click

from . import builder, fileformat, svg
from .continuity import ContinuityMode
from .energy import EnergyWeights
from .errors import DegenerateInputError, DegenerateSpeedError, DomainError, PkcError
from .metrics import energy_report

EXIT_MALFORMED = 1
EXIT_DEGENERATE = 2
EXIT_SOLVER = 3


@click.group(context_settings={"auto_envvar_prefix": "PKC"})
def main():
    """Piecewise-Bezier interpolating curves with parabolic curvature targets."""


@main.command()
@click.argument("input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False), help="Curve JSON output path.")
@click.option("--svg", "svg_path", type=click.Path(dir_okay=False), help="SVG output path.")
@click.option("--comb", "comb_scale", type=float, default=None, help="Curvature comb scale for the SVG.")
@click.option("--report", is_flag=True, help="Print energy and timing summary.")
@click.option("--continuity", type=click.Choice(["C1", "C2", "G1", "G2"]), default=None,
              help="Override the continuity mode declared in the input file.")
@click.option("--lambda-e", type=float, default=None, help="Override the edge-length weight.")
@click.option("--lambda-c", type=float, default=None, help="Override the curve-length weight.")
def build(input_path, out_path, svg_path, comb_scale, report, continuity, lambda_e, lambda_c):
    """Insert the points of INPUT_PATH in order and write the resulting curve."""
    try:
        ps = fileformat.read_point_set(input_path)
    except DomainError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_MALFORMED)

    mode = ContinuityMode.from_label(continuity) if continuity else ps.mode
    weights = EnergyWeights(
        ps.weights.lambda_e if lambda_e is None else lambda_e,
        ps.weights.lambda_c if lambda_c is None else lambda_c,
    )
    doc = builder.new_document(mode, weights, settings=ps.settings)
    times = []
    try:
        for i, p in enumerate(ps.points):
            t0 = time.perf_counter()
            try:
                doc = builder.insert_point(doc, p)
            except (DegenerateInputError, DegenerateSpeedError) as exc:
                click.echo(f"error: degenerate input at point {i}: {exc}", err=True)
                sys.exit(EXIT_DEGENERATE)
            times.append(time.perf_counter() - t0)
        if ps.topology == "closed":
            try:
                doc = builder.close_curve(doc)
            except (DegenerateInputError, DegenerateSpeedError) as exc:
                click.echo(f"error: degenerate input during closure: {exc}", err=True)
                sys.exit(EXIT_DEGENERATE)
    except PkcError as exc:
        window = f"trailing window at point {len(doc.points)}"
        click.echo(f"error: solver failed ({window}): {exc}", err=True)
        sys.exit(EXIT_SOLVER)

    if out_path:
        fileformat.write_curve_file(doc, out_path)
    if svg_path:
        svg.write_svg(doc, svg_path, comb_scale)
    if report:
        rep = energy_report(doc)
        avg_t = sum(times) / len(times) if times else 0.0
        click.echo(f"segments: {len(doc.records)}")
        click.echo(f"E_avg: {rep.average_parabolic:.6e}")
        click.echo(f"E_max: {rep.max_parabolic:.6e}")
        click.echo(f"T_insert_avg: {avg_t:.4f}s")


@main.command()
@click.option("--bind", default="127.0.0.1:8000", help="HOST:PORT to listen on.")
@click.option("--snapshot-dir", type=click.Path(file_okay=False), default=None,
              help="Write a curve file per accepted revision into this directory.")
def serve(bind, snapshot_dir):
    """Run the interactive session service."""
    import uvicorn

    from .service import create_app

    host, _, port = bind.partition(":")
    app = create_app(snapshot_dir=snapshot_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000), log_level="warning")


if __name__ == "__main__":
    main()
