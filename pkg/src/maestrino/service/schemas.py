"""Request and response models for the co-simulation service.

The service runs on the same host as its clients and exchanges filesystem
paths, mirroring how the CLI pipeline hands artifacts from stage to stage.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class ErrorBody(BaseModel):
    error: str
    kind: str
    exit_code: int


class ImportRequest(BaseModel):
    mm_path: str
    coe_path: str
    output_path: str


class ImportResponse(BaseModel):
    plan_path: str
    instances: int
    wires: int
    parameter_slots: int
    columns: list[str]


class InterpretRequest(BaseModel):
    plan_path: str
    runtime_path: str


class InterpretResponse(BaseModel):
    rows: int
    columns: list[str]
    outputs: list[str]


class ExportRequest(BaseModel):
    plan_path: str
    output_dir: str


class ExportResponse(BaseModel):
    project_dir: str
    files: list[str]
    fingerprint: str


class BuildRequest(BaseModel):
    project_dir: str


class BuildResponse(BaseModel):
    executable: str
    compiler: str
    configure_duration_s: float
    compile_duration_s: float


class RunNativeRequest(BaseModel):
    project_dir: str
    runtime_path: str


class RunNativeResponse(BaseModel):
    exit_status: int
    csv_path: str


class DseRequest(BaseModel):
    dse_path: str
    mm_path: str
    coe_path: str
    output_dir: str
    engine: Optional[str] = None
    parallelism: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = None
    search: str = "exhaustive"  # or "genetic"
    population: int = Field(default=8, ge=2)
    generations: int = Field(default=4, ge=0)


class DesignEntry(BaseModel):
    index: int
    assignment: dict[str, float]
    scores: dict[str, float]
    rank: int
    wall_time_s: float
    status: str
    error: Optional[str] = None


class DseResponse(BaseModel):
    report_path: str
    designs: list[DesignEntry]
    ranking: list[int]
    total_wall_time_s: float


class BenchRequest(BaseModel):
    output_dir: str
    sizes: list[int] = Field(default=[1, 10])
    end_times: list[float] = Field(default=[1.0, 10.0])
    engines: list[str] = Field(default=["interpreted", "native"])
    repetitions: int = Field(default=3, ge=1)
    step_size: float = Field(default=0.002, gt=0)
    parallelism: int = Field(default=1, ge=1)


class BenchCellEntry(BaseModel):
    engine: str
    size: int
    end_time: float
    median_wall_time_s: float


class BenchResponse(BaseModel):
    cells: list[BenchCellEntry]
    bench_csv: str
    speedup_csv: Optional[str] = None
    overhead_csv: Optional[str] = None


class HealthResponse(BaseModel):
    status: str
    version: str
