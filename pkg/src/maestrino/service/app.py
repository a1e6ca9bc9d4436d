"""FastAPI service wrapping the co-simulation engine.

Each endpoint is one stage of the pipeline: import configuration into a
plan, interpret it, export and build the native project, run it, explore a
design space, or run the benchmark grid. Configuration problems map to
HTTP 400, runtime failures to HTTP 500; both carry the CLI exit code in the
body so thin clients can pass it through.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__, bench, codegen, dse, master, multimodel
from ..errors import ConfigurationError, MaestrinoError
from . import schemas


def _http_status(exc: MaestrinoError) -> int:
    return 400 if isinstance(exc, ConfigurationError) else 500


def create_app() -> FastAPI:
    app = FastAPI(title="maestrino", version=__version__)

    @app.exception_handler(MaestrinoError)
    async def engine_error_handler(request: Request, exc: MaestrinoError):
        return JSONResponse(
            status_code=_http_status(exc),
            content=schemas.ErrorBody(
                error=str(exc),
                kind=type(exc).__name__,
                exit_code=exc.exit_code,
            ).model_dump(),
        )

    @app.exception_handler(FileNotFoundError)
    async def missing_file_handler(request: Request, exc: FileNotFoundError):
        return JSONResponse(
            status_code=400,
            content=schemas.ErrorBody(
                error=f"file not found: {exc.filename}",
                kind="FileNotFoundError",
                exit_code=1,
            ).model_dump(),
        )

    @app.exception_handler(OSError)
    async def os_error_handler(request: Request, exc: OSError):
        return JSONResponse(
            status_code=500,
            content=schemas.ErrorBody(
                error=str(exc), kind=type(exc).__name__, exit_code=2
            ).model_dump(),
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/import", response_model=schemas.ImportResponse)
    def import_multimodel(req: schemas.ImportRequest):
        mm_path = Path(req.mm_path)
        mm = multimodel.parse_multimodel(
            mm_path.read_text(encoding="utf-8"), base_dir=mm_path.parent
        )
        coe = multimodel.parse_cosim_config(
            Path(req.coe_path).read_text(encoding="utf-8")
        )
        plan = master.build_plan(mm, coe, base_dir=mm_path.parent)
        master.write_plan(plan, req.output_path)
        return schemas.ImportResponse(
            plan_path=req.output_path,
            instances=len(plan.instances),
            wires=len(plan.wiring),
            parameter_slots=len(plan.parameter_slots),
            columns=list(plan.columns),
        )

    @app.post("/interpret", response_model=schemas.InterpretResponse)
    def interpret(req: schemas.InterpretRequest):
        plan = master.load_plan(req.plan_path)
        rt = master.load_runtime_config(req.runtime_path)
        table = master.interpret_plan(plan, rt)
        return schemas.InterpretResponse(
            rows=len(table.rows),
            columns=list(table.header),
            outputs=[w.filename for w in rt.data_writers],
        )

    @app.post("/export-c", response_model=schemas.ExportResponse)
    def export_c(req: schemas.ExportRequest):
        plan = master.load_plan(req.plan_path)
        project = codegen.export_c_project(plan, req.output_dir)
        return schemas.ExportResponse(
            project_dir=str(project.root),
            files=list(project.files),
            fingerprint=project.fingerprint,
        )

    @app.post("/build", response_model=schemas.BuildResponse)
    def build(req: schemas.BuildRequest):
        root = Path(req.project_dir)
        if not (root / codegen.GENERATED_SOURCE).is_file():
            raise ConfigurationError(f"{root} does not contain a generated project")
        project = codegen.GeneratedProject(root=root, files=(), fingerprint="")
        report, executable = codegen.compile_project(project)
        return schemas.BuildResponse(
            executable=str(executable),
            compiler=report.compiler,
            configure_duration_s=report.configure_duration,
            compile_duration_s=report.compile_duration,
        )

    @app.post("/run-native", response_model=schemas.RunNativeResponse)
    def run_native(req: schemas.RunNativeRequest):
        executable = Path(req.project_dir) / codegen.EXECUTABLE_NAME
        status, csv_path = codegen.run_native(executable, req.runtime_path)
        return schemas.RunNativeResponse(exit_status=status, csv_path=str(csv_path))

    @app.post("/dse", response_model=schemas.DseResponse)
    def run_dse(req: schemas.DseRequest):
        space = dse.load_design_space(req.dse_path)
        overrides = {}
        if req.engine is not None:
            overrides["engine"] = req.engine
        if req.parallelism is not None:
            overrides["parallelism"] = req.parallelism
        if req.seed is not None:
            overrides["seed"] = req.seed
        if overrides:
            from dataclasses import replace

            space = replace(space, **overrides)
        mm_path = Path(req.mm_path)
        mm = multimodel.parse_multimodel(
            mm_path.read_text(encoding="utf-8"), base_dir=mm_path.parent
        )
        coe = multimodel.parse_cosim_config(
            Path(req.coe_path).read_text(encoding="utf-8")
        )
        plan = master.build_plan(mm, coe, base_dir=mm_path.parent)
        base_rt = master.RuntimeConfig()
        if req.search == "genetic":
            report = dse.genetic_search(
                space, plan, base_rt, req.output_dir,
                population=req.population, generations=req.generations,
            )
        elif req.search == "exhaustive":
            report = dse.run_dse(space, plan, base_rt, req.output_dir)
        else:
            raise ConfigurationError(f"unknown search {req.search!r}")
        rank_of = {index: pos + 1 for pos, index in enumerate(report.ranking)}
        return schemas.DseResponse(
            report_path=str(Path(req.output_dir) / "report.csv"),
            designs=[
                schemas.DesignEntry(
                    index=r.index,
                    assignment=r.assignment,
                    scores=r.scores,
                    rank=rank_of[r.index],
                    wall_time_s=r.wall_time,
                    status=r.status,
                    error=r.error,
                )
                for r in report.results
            ],
            ranking=report.ranking,
            total_wall_time_s=report.total_wall_time,
        )

    @app.post("/bench", response_model=schemas.BenchResponse)
    def run_bench(req: schemas.BenchRequest):
        grid = bench.BenchGrid(
            sizes=tuple(req.sizes),
            end_times=tuple(req.end_times),
            engines=tuple(req.engines),
            repetitions=req.repetitions,
            step_size=req.step_size,
            parallelism=req.parallelism,
        )
        report = bench.run_bench(grid, req.output_dir)
        return schemas.BenchResponse(
            cells=[
                schemas.BenchCellEntry(
                    engine=c.engine,
                    size=c.size,
                    end_time=c.end_time,
                    median_wall_time_s=c.median_wall_time,
                )
                for c in report.cells
            ],
            bench_csv=str(report.files["bench"]),
            speedup_csv=str(report.files["speedup"]) if "speedup" in report.files else None,
            overhead_csv=str(report.files["overhead"]) if "overhead" in report.files else None,
        )

    return app


app = create_app()
