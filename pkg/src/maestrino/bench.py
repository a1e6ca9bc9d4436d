"""Benchmark harness: a timing grid of design-space size against simulated
duration, run per engine, with interpreted/native speedup ratios.

Cells run sequentially so one measurement never perturbs another, and DSE
parallelism is pinned to 1 inside a cell unless overridden. Every cell uses
the water-tank multi-model; design counts are hit exactly by sweeping the
controller thresholds over disjoint ranges (the l_min < l_max constraint can
then never remove a point) and truncating the enumeration.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from statistics import median
from typing import Optional, Union

from . import codegen, dse
from .errors import ValidationError
from .master import RuntimeConfig, SimulationPlan, build_plan, format_real
from .multimodel import parse_cosim_config, parse_multimodel

DEFAULT_STEP_SIZE = 0.002  # 500 steps per simulated second

_DEMO_MM = {
    "fmus": {
        "tank": "singlewatertank-20sim",
        "controller": "watertankcontroller-c",
    },
    "instances": {"wtInstance": "tank", "crtlInstance": "controller"},
    "connections": [
        {"source": "wtInstance.level", "target": "crtlInstance.level"},
        {"source": "crtlInstance.valve", "target": "wtInstance.valve"},
    ],
    "parameters": {},
}

MIN_KEY = "crtlInstance.minLevel"
MAX_KEY = "crtlInstance.maxLevel"


@dataclass(frozen=True)
class BenchGrid:
    sizes: tuple[int, ...]
    end_times: tuple[float, ...]
    engines: tuple[str, ...] = ("interpreted", "native")
    repetitions: int = 3
    step_size: float = DEFAULT_STEP_SIZE
    parallelism: int = 1

    def __post_init__(self):
        if not self.sizes or not self.end_times or not self.engines:
            raise ValidationError("bench grid needs sizes, end times and engines")
        if any(s < 1 for s in self.sizes):
            raise ValidationError("design space sizes must be positive")
        if any(e <= 0 for e in self.end_times):
            raise ValidationError("end times must be positive")
        if any(e not in ("interpreted", "native") for e in self.engines):
            raise ValidationError("engines must be interpreted and/or native")
        if self.repetitions < 1:
            raise ValidationError("repetitions must be at least 1")
        if self.step_size <= 0:
            raise ValidationError("step size must be positive")


@dataclass
class BenchCell:
    engine: str
    size: int
    end_time: float
    wall_times: list[float]

    @property
    def median_wall_time(self) -> float:
        return median(self.wall_times)


@dataclass
class OverheadReport:
    """One-time setup costs of the native path."""

    generate_duration: float = 0.0
    configure_duration: float = 0.0
    compile_duration: float = 0.0
    recompile_duration: float = 0.0


@dataclass
class BenchReport:
    cells: list[BenchCell]
    overhead: Optional[OverheadReport] = None
    files: dict[str, Path] = field(default_factory=dict)

    def cell(self, engine: str, size: int, end_time: float) -> BenchCell:
        for c in self.cells:
            if (c.engine, c.size, c.end_time) == (engine, size, end_time):
                return c
        raise KeyError((engine, size, end_time))

    def speedup(self, size: int, end_time: float) -> float:
        interpreted = self.cell("interpreted", size, end_time).median_wall_time
        native = self.cell("native", size, end_time).median_wall_time
        return interpreted / native


def bench_plan(step_size: float = DEFAULT_STEP_SIZE, end_time: float = 10.0) -> SimulationPlan:
    """The water-tank plan the harness benchmarks."""
    mm = parse_multimodel(json.dumps(_DEMO_MM))
    coe = parse_cosim_config(
        json.dumps(
            {
                "algorithm": {"type": "fixed-step", "size": step_size},
                "startTime": 0.0,
                "endTime": end_time,
            }
        )
    )
    return build_plan(mm, coe)


def _spread(low: float, high: float, count: int) -> tuple[float, ...]:
    if count == 1:
        return (low,)
    return tuple(low + i * ((high - low) / (count - 1)) for i in range(count))


def sized_designs(size: int, engine: str, parallelism: int = 1) -> tuple[dse.DesignSpace, list[dse.DesignPoint]]:
    """A design space whose enumeration, truncated, has exactly `size` points.

    l_min sweeps [0.1, 0.9] and l_max sweeps [1.1, 2.9]; every pairing
    satisfies l_min < l_max, so the cross product count is exact and the
    first `size` designs are kept.
    """
    k1 = max(1, math.isqrt(size - 1) + 1) if size > 1 else 1
    k2 = math.ceil(size / k1)
    space = dse.DesignSpace(
        sweeps=(
            dse.ParameterSweep(MIN_KEY, _spread(0.1, 0.9, k1)),
            dse.ParameterSweep(MAX_KEY, _spread(1.1, 2.9, k2)),
        ),
        constraints=(dse.Constraint(lhs=MIN_KEY, op="<", rhs=MAX_KEY),),
        objectives=(dse.ObjectiveSpec(name="band", kind="band_deviation"),),
        engine=engine,
        parallelism=parallelism,
        seed=0,
    )
    designs = dse.enumerate_designs(space)[:size]
    return space, designs


def run_bench(grid: BenchGrid, out_dir: Union[str, Path]) -> BenchReport:
    """Time the whole grid and write bench.csv, speedup.csv and overhead.csv."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plan = bench_plan(step_size=grid.step_size, end_time=max(grid.end_times))

    overhead = None
    native_executable = None
    if "native" in grid.engines:
        t0 = time.perf_counter()
        project = codegen.export_c_project(plan, out_dir / "native")
        generate = time.perf_counter() - t0
        toolchain, native_executable = codegen.compile_project(project)
        recompile = codegen.recompile_generated(project)
        overhead = OverheadReport(
            generate_duration=generate,
            configure_duration=toolchain.configure_duration,
            compile_duration=toolchain.compile_duration,
            recompile_duration=recompile,
        )

    cells = []
    for engine in grid.engines:
        for size in grid.sizes:
            space, designs = sized_designs(size, engine, grid.parallelism)
            for end_time in grid.end_times:
                base_rt = RuntimeConfig(end_time=end_time)
                # Repetitions overwrite the same cell directory: same work per
                # rep, bounded disk footprint.
                cell_dir = out_dir / f"{engine}_s{size}_e{_tag(end_time)}"
                walls = []
                for _ in range(grid.repetitions):
                    t0 = time.perf_counter()
                    dse.run_dse(
                        space,
                        plan,
                        base_rt,
                        cell_dir,
                        designs=designs,
                        native_executable=native_executable if engine == "native" else None,
                    )
                    walls.append(time.perf_counter() - t0)
                cells.append(BenchCell(engine=engine, size=size, end_time=end_time, wall_times=walls))

    report = BenchReport(cells=cells, overhead=overhead)
    report.files["bench"] = _write_bench_csv(report, out_dir / "bench.csv")
    if {"interpreted", "native"} <= set(grid.engines):
        report.files["speedup"] = _write_speedup_csv(report, grid, out_dir / "speedup.csv")
    if overhead is not None:
        report.files["overhead"] = _write_overhead_csv(overhead, out_dir / "overhead.csv")
    return report


def _tag(value: float) -> str:
    text = format_real(float(value))
    return text.replace(".", "p").replace("+", "").replace("-", "m")


def _write_bench_csv(report: BenchReport, path: Path) -> Path:
    lines = ["engine,size,end_time,median_wall_time_s"]
    for cell in report.cells:
        lines.append(
            ",".join(
                [
                    cell.engine,
                    str(cell.size),
                    format_real(float(cell.end_time)),
                    format_real(cell.median_wall_time),
                ]
            )
        )
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _write_speedup_csv(report: BenchReport, grid: BenchGrid, path: Path) -> Path:
    # One row per end time, one column per design space size.
    header = ["end_time"] + [str(s) for s in grid.sizes]
    lines = [",".join(header)]
    for end_time in grid.end_times:
        row = [format_real(float(end_time))]
        for size in grid.sizes:
            row.append(format_real(report.speedup(size, end_time)))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def _write_overhead_csv(overhead: OverheadReport, path: Path) -> Path:
    lines = [
        "stage,duration_s",
        f"generate,{format_real(overhead.generate_duration)}",
        f"configure,{format_real(overhead.configure_duration)}",
        f"compile,{format_real(overhead.compile_duration)}",
        f"recompile,{format_real(overhead.recompile_duration)}",
    ]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
