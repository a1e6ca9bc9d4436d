"""Command line frontend: a thin client of the co-simulation service.

Every subcommand posts to the FastAPI service. By default the app runs in
process (no server needed); point --server / MAESTRINO_SERVER at a running
instance to drive a remote one. Exit codes: 0 success, 1 configuration or
validation error, 2 runtime error.
"""

from __future__ import annotations

import sys
from contextlib import contextmanager

import click
import httpx


@contextmanager
def _client(server: str | None):
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            yield client
    else:
        import warnings

        with warnings.catch_warnings():
            # this environment's starlette pairing warns at import time
            warnings.simplefilter("ignore")
            from fastapi.testclient import TestClient

        from .service import create_app

        with TestClient(create_app()) as client:
            yield client


def _call(server: str | None, path: str, payload: dict) -> dict:
    try:
        with _client(server) as client:
            response = client.post(path, json=payload)
    except httpx.HTTPError as exc:
        click.echo(f"error: cannot reach service: {exc}", err=True)
        sys.exit(2)
    body = response.json()
    if response.status_code == 200:
        return body
    if "exit_code" in body:
        click.echo(f"error: {body['error']}", err=True)
        sys.exit(body["exit_code"])
    # request-model validation problems arrive as FastAPI 422 details
    click.echo(f"error: {body}", err=True)
    sys.exit(1)


def _floats(_, __, value: str) -> tuple[float, ...]:
    return tuple(float(v) for v in value.split(","))


def _ints(_, __, value: str) -> tuple[int, ...]:
    return tuple(int(v) for v in value.split(","))


def _names(_, __, value: str) -> tuple[str, ...]:
    return tuple(v.strip() for v in value.split(","))


@click.group()
@click.option(
    "--server",
    envvar="MAESTRINO_SERVER",
    default=None,
    help="Base URL of a running service; defaults to an in-process app.",
)
@click.pass_context
def main(ctx, server):
    """Fixed-step co-simulation: plans, native export and design exploration."""
    ctx.obj = server


@main.command("import")
@click.argument("mm_path", type=click.Path(dir_okay=False))
@click.argument("coe_path", type=click.Path(dir_okay=False))
@click.option("--output", "-o", default="spec.mabl.json", show_default=True)
@click.pass_obj
def cmd_import(server, mm_path, coe_path, output):
    """Build a simulation plan from mm and coe documents."""
    body = _call(server, "/import", {
        "mm_path": mm_path,
        "coe_path": coe_path,
        "output_path": output,
    })
    click.echo(
        f"wrote {body['plan_path']}: {body['instances']} instances, "
        f"{body['wires']} wires, {body['parameter_slots']} parameter slots"
    )


@main.command("interpret")
@click.argument("plan_path", type=click.Path(dir_okay=False))
@click.option("--runtime", "-r", required=True, type=click.Path(dir_okay=False))
@click.pass_obj
def cmd_interpret(server, plan_path, runtime):
    """Run the plan in the interpreter with a runtime configuration."""
    body = _call(server, "/interpret", {"plan_path": plan_path, "runtime_path": runtime})
    outputs = ", ".join(body["outputs"])
    click.echo(f"{body['rows']} rows ({','.join(body['columns'])}) -> {outputs}")


@main.command("export-c")
@click.argument("plan_path", type=click.Path(dir_okay=False))
@click.option("--output", "-o", required=True, type=click.Path(file_okay=False))
@click.pass_obj
def cmd_export_c(server, plan_path, output):
    """Export the plan as a self-contained C project."""
    body = _call(server, "/export-c", {"plan_path": plan_path, "output_dir": output})
    click.echo(
        f"exported {len(body['files'])} files to {body['project_dir']} "
        f"(plan fingerprint {body['fingerprint'][:12]})"
    )


@main.command("build")
@click.argument("project_dir", type=click.Path(file_okay=False))
@click.pass_obj
def cmd_build(server, project_dir):
    """Compile an exported project with the system C toolchain."""
    body = _call(server, "/build", {"project_dir": project_dir})
    click.echo(
        f"built {body['executable']} with {body['compiler']} "
        f"in {body['compile_duration_s']:.2f}s"
    )


@main.command("run-native")
@click.argument("project_dir", type=click.Path(file_okay=False))
@click.option("--runtime", "-r", required=True, type=click.Path(dir_okay=False))
@click.pass_obj
def cmd_run_native(server, project_dir, runtime):
    """Run the compiled simulator on a runtime configuration."""
    body = _call(server, "/run-native", {"project_dir": project_dir, "runtime_path": runtime})
    click.echo(f"native run complete -> {body['csv_path']}")


@main.command("dse")
@click.argument("dse_path", type=click.Path(dir_okay=False))
@click.argument("mm_path", type=click.Path(dir_okay=False))
@click.argument("coe_path", type=click.Path(dir_okay=False))
@click.option("--output", "-o", required=True, type=click.Path(file_okay=False))
@click.option("--engine", type=click.Choice(["interpreted", "native"]), default=None)
@click.option("--parallelism", type=int, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--search", type=click.Choice(["exhaustive", "genetic"]), default="exhaustive",
              show_default=True)
@click.option("--population", type=int, default=8, show_default=True)
@click.option("--generations", type=int, default=4, show_default=True)
@click.pass_obj
def cmd_dse(server, dse_path, mm_path, coe_path, output, engine, parallelism, seed,
            search, population, generations):
    """Explore a design space, one co-simulation per design."""
    body = _call(server, "/dse", {
        "dse_path": dse_path,
        "mm_path": mm_path,
        "coe_path": coe_path,
        "output_dir": output,
        "engine": engine,
        "parallelism": parallelism,
        "seed": seed,
        "search": search,
        "population": population,
        "generations": generations,
    })
    click.echo(
        f"{len(body['designs'])} designs in {body['total_wall_time_s']:.2f}s, "
        f"report: {body['report_path']}"
    )
    best = body["ranking"][0]
    for entry in body["designs"]:
        if entry["index"] == best:
            click.echo(f"best design {best}: {entry['assignment']} scores {entry['scores']}")


@main.command("bench")
@click.option("--output", "-o", required=True, type=click.Path(file_okay=False))
@click.option("--sizes", default="1,10", callback=_ints, show_default=True,
              help="Design space sizes, comma separated.")
@click.option("--end-times", default="1,10", callback=_floats, show_default=True,
              help="Simulated durations in seconds, comma separated.")
@click.option("--engines", default="interpreted,native", callback=_names, show_default=True)
@click.option("--repetitions", type=int, default=3, show_default=True)
@click.option("--step-size", type=float, default=0.002, show_default=True)
@click.option("--parallelism", type=int, default=1, show_default=True)
@click.pass_obj
def cmd_bench(server, output, sizes, end_times, engines, repetitions, step_size, parallelism):
    """Time a size x duration grid per engine and report speedups."""
    body = _call(server, "/bench", {
        "output_dir": output,
        "sizes": list(sizes),
        "end_times": list(end_times),
        "engines": list(engines),
        "repetitions": repetitions,
        "step_size": step_size,
        "parallelism": parallelism,
    })
    for cell in body["cells"]:
        click.echo(
            f"{cell['engine']:>12} size={cell['size']:<5} end={cell['end_time']:<8} "
            f"median {cell['median_wall_time_s']:.3f}s"
        )
    click.echo(f"bench table: {body['bench_csv']}")
    if body.get("speedup_csv"):
        click.echo(f"speedups:    {body['speedup_csv']}")
    if body.get("overhead_csv"):
        click.echo(f"overheads:   {body['overhead_csv']}")


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8571, show_default=True)
def cmd_serve(host, port):
    """Run the co-simulation service."""
    import uvicorn

    uvicorn.run("maestrino.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
