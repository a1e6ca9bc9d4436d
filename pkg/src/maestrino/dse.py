"""Design space exploration: enumerate, constrain, run, score and rank.

A design space sweeps plan parameters (ranges or explicit value lists) under
simple `term op term` constraints. Exhaustive search walks the whole cross
product; the genetic search samples it with seeded, fully deterministic
operators. Every design runs as its own co-simulation, interpreted in
process or through one compiled native binary, and lands in its own
directory with its runtime file and results CSV.
"""

from __future__ import annotations

import itertools
import json
import operator
import random
import re
import subprocess
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from statistics import fmean
from typing import Optional, Union

from . import codegen
from .errors import (
    ConfigurationError,
    EmptyDesignSpaceError,
    ObjectiveError,
    ValidationError,
)
from .master import (
    DataWriterSpec,
    ResultsTable,
    RuntimeConfig,
    SimulationPlan,
    format_real,
    interpret_plan,
    read_results,
    write_runtime_config,
)

BUILTIN_OBJECTIVES = ("band_deviation", "valve_switch_count")
_RANGE_SLACK = 1e-9  # of one step, absorbs float drift at the range end

_OPS = {
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
    "==": operator.eq,
    "!=": operator.ne,
}
_CONSTRAINT_RE = re.compile(
    r"^\s*(?P<lhs>[^<>=!\s]+)\s*(?P<op><=|>=|==|!=|<|>)\s*(?P<rhs>[^<>=!\s]+)\s*$"
)


@dataclass(frozen=True)
class ParameterSweep:
    """One swept parameter key and the values it takes."""

    key: str
    values: tuple[float, ...]

    def __post_init__(self):
        if not self.values:
            raise ValidationError(f"sweep {self.key!r} has no values")


def sweep_from_range(key: str, low: float, high: float, step: float) -> ParameterSweep:
    """Values low, low+step, ... up to high (inclusive within float slack)."""
    if step <= 0:
        raise ValidationError(f"sweep {key!r} needs a positive step")
    values = []
    i = 0
    while True:
        value = low + i * step
        if value > high + _RANGE_SLACK * step:
            break
        values.append(value)
        i += 1
    return ParameterSweep(key=key, values=tuple(values))


@dataclass(frozen=True)
class Constraint:
    """`term op term` where a term is a sweep key or a numeric literal."""

    lhs: Union[str, float]
    op: str
    rhs: Union[str, float]

    def evaluate(self, assignment: dict[str, float]) -> bool:
        def term(t):
            return assignment[t] if isinstance(t, str) else t

        return _OPS[self.op](term(self.lhs), term(self.rhs))

    def __str__(self):
        return f"{self.lhs} {self.op} {self.rhs}"


def parse_constraint(text: str, known_keys: set[str]) -> Constraint:
    match = _CONSTRAINT_RE.match(text)
    if not match:
        raise ValidationError(f"constraint {text!r} is not of the form 'term op term'")

    def term(raw: str):
        try:
            return float(raw)
        except ValueError:
            if raw not in known_keys:
                raise ValidationError(
                    f"constraint {text!r} references {raw!r}, which is not a swept parameter"
                ) from None
            return raw

    return Constraint(lhs=term(match["lhs"]), op=match["op"], rhs=term(match["rhs"]))


@dataclass(frozen=True)
class ObjectiveSpec:
    name: str
    kind: str  # one of BUILTIN_OBJECTIVES or "external"
    direction: str = "minimize"
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in BUILTIN_OBJECTIVES + ("external",):
            raise ValidationError(f"unknown objective kind {self.kind!r}")
        if self.direction not in ("minimize", "maximize"):
            raise ValidationError("objective direction must be minimize or maximize")
        if self.kind == "external" and not self.path:
            raise ValidationError(f"external objective {self.name!r} needs an executable path")


@dataclass(frozen=True)
class DesignSpace:
    sweeps: tuple[ParameterSweep, ...]
    constraints: tuple[Constraint, ...] = ()
    objectives: tuple[ObjectiveSpec, ...] = ()
    engine: str = "interpreted"
    parallelism: int = 1
    seed: int = 0

    def __post_init__(self):
        if not self.sweeps:
            raise ValidationError("design space needs at least one sweep")
        if self.engine not in ("interpreted", "native"):
            raise ValidationError(f"unknown engine {self.engine!r}")
        if self.parallelism < 1:
            raise ValidationError("parallelism must be at least 1")

    def keys(self) -> tuple[str, ...]:
        return tuple(s.key for s in self.sweeps)


@dataclass(frozen=True, eq=False)
class DesignPoint:
    """One concrete assignment; the index is its position in the full cross product."""

    assignment: dict[str, float]
    index: int

    def __eq__(self, other):
        return (
            isinstance(other, DesignPoint)
            and self.index == other.index
            and self.assignment == other.assignment
        )

    def __hash__(self):
        return hash((self.index, tuple(sorted(self.assignment.items()))))


@dataclass
class DesignResult:
    index: int
    assignment: dict[str, float]
    scores: dict[str, float] = field(default_factory=dict)
    csv_path: Optional[Path] = None
    runtime_path: Optional[Path] = None
    wall_time: float = 0.0
    status: str = "ok"
    error: Optional[str] = None


@dataclass
class DseReport:
    results: list[DesignResult]
    ranking: list[int]
    total_wall_time: float
    generation_duration: Optional[float] = None
    toolchain: Optional[codegen.ToolchainReport] = None

    def by_index(self, index: int) -> DesignResult:
        for result in self.results:
            if result.index == index:
                return result
        raise KeyError(index)

    def best(self) -> DesignResult:
        return self.by_index(self.ranking[0])


def parse_design_space(text: str) -> DesignSpace:
    """Parse the DSE configuration document."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"dse document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("dse document must be a JSON object")
    unknown = set(doc) - {"parameters", "constraints", "objectives", "engine", "parallelism", "seed"}
    if unknown:
        raise ValidationError("unknown dse fields: " + ", ".join(sorted(unknown)))
    raw_params = doc.get("parameters")
    if not isinstance(raw_params, dict) or not raw_params:
        raise ValidationError("dse document needs a non-empty 'parameters' object")

    sweeps = []
    for key, spec in raw_params.items():
        if isinstance(spec, list):
            if not spec:
                raise ValidationError(f"sweep {key!r} has an empty value list")
            sweeps.append(ParameterSweep(key=key, values=tuple(float(v) for v in spec)))
        elif isinstance(spec, dict) and set(spec) == {"min", "max", "step"}:
            sweeps.append(sweep_from_range(key, float(spec["min"]), float(spec["max"]), float(spec["step"])))
        else:
            raise ValidationError(
                f"sweep {key!r} must be a value list or a {{min,max,step}} object"
            )

    keys = {s.key for s in sweeps}
    constraints = tuple(parse_constraint(c, keys) for c in doc.get("constraints", []))
    objectives = tuple(
        ObjectiveSpec(
            name=o.get("name", o.get("kind", "")),
            kind=o.get("kind", ""),
            direction=o.get("direction", "minimize"),
            path=o.get("path"),
        )
        for o in doc.get("objectives", [])
    )
    names = [o.name for o in objectives]
    if len(names) != len(set(names)):
        raise ValidationError("objective names must be unique")
    parallelism = doc.get("parallelism", 1)
    if not isinstance(parallelism, int) or isinstance(parallelism, bool):
        raise ValidationError("parallelism must be an integer")
    seed = doc.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        raise ValidationError("seed must be an integer")
    return DesignSpace(
        sweeps=tuple(sweeps),
        constraints=constraints,
        objectives=objectives,
        engine=doc.get("engine", "interpreted"),
        parallelism=parallelism,
        seed=seed,
    )


def load_design_space(path: Union[str, Path]) -> DesignSpace:
    return parse_design_space(Path(path).read_text(encoding="utf-8"))


def enumerate_designs(space: DesignSpace) -> list[DesignPoint]:
    """Cross product in sweep declaration order, minus constraint violators.

    Indices number the full cross product, so a design keeps its index no
    matter which constraints are active.
    """
    keys = space.keys()
    designs = []
    for index, combo in enumerate(itertools.product(*(s.values for s in space.sweeps))):
        assignment = dict(zip(keys, combo))
        if all(c.evaluate(assignment) for c in space.constraints):
            designs.append(DesignPoint(assignment=assignment, index=index))
    if not designs:
        raise EmptyDesignSpaceError(
            "constraints eliminated every design point "
            f"({' and '.join(str(c) for c in space.constraints)})"
        )
    return designs


def score(
    objective: ObjectiveSpec,
    table: ResultsTable,
    design: DesignPoint,
    parameters: Optional[dict[str, float]] = None,
    csv_path: Optional[Path] = None,
    runtime_path: Optional[Path] = None,
) -> float:
    """Score one objective over a result table.

    Builtins know the water-tank column conventions; external objectives are
    spawned with the CSV path and the runtime file path and must print one
    real to stdout.
    """
    if not table.rows:
        raise ObjectiveError("cannot score an empty results table")
    if objective.kind == "band_deviation":
        level = table.column(_unique_column(table, ".level"))
        lookup = {**(parameters or {}), **design.assignment}
        min_level = _unique_parameter(lookup, ".minLevel")
        max_level = _unique_parameter(lookup, ".maxLevel")
        mid = (min_level + max_level) / 2.0
        return fmean(abs(v - mid) for v in level)
    if objective.kind == "valve_switch_count":
        valve = table.column(_unique_column(table, ".valve"))
        return float(sum(1 for a, b in zip(valve, valve[1:]) if a != b))
    if objective.kind == "external":
        if csv_path is None or runtime_path is None:
            raise ObjectiveError(
                f"external objective {objective.name!r} needs csv and runtime paths"
            )
        try:
            proc = subprocess.run(
                [str(objective.path), str(csv_path), str(runtime_path)],
                capture_output=True,
                text=True,
                timeout=60,
            )
        except OSError as exc:
            raise ObjectiveError(f"cannot run objective {objective.name!r}: {exc}") from exc
        except subprocess.TimeoutExpired as exc:
            raise ObjectiveError(f"objective {objective.name!r} timed out") from exc
        if proc.returncode != 0:
            raise ObjectiveError(
                f"objective {objective.name!r} exited with {proc.returncode}: "
                + proc.stderr.strip()
            )
        try:
            return float(proc.stdout.strip())
        except ValueError:
            raise ObjectiveError(
                f"objective {objective.name!r} printed {proc.stdout.strip()!r}, not a real"
            ) from None
    raise ObjectiveError(f"unknown objective kind {objective.kind!r}")


def _unique_column(table: ResultsTable, suffix: str) -> str:
    matches = table.columns_matching(suffix)
    if len(matches) != 1:
        raise ObjectiveError(
            f"expected exactly one column ending {suffix!r}, found {matches}"
        )
    return matches[0]


def _unique_parameter(lookup: dict[str, float], suffix: str) -> float:
    matches = [k for k in lookup if k.endswith(suffix)]
    if len(matches) != 1 or lookup[matches[0]] is None:
        raise ObjectiveError(
            f"expected exactly one parameter ending {suffix!r}, found {matches}"
        )
    return lookup[matches[0]]


def rank_designs(results: list[DesignResult], objectives: tuple[ObjectiveSpec, ...]) -> list[int]:
    """Total order: lexicographic over objectives in declaration order, each
    per its direction; ties fall back to the design index; failed designs
    rank last, by index."""

    def sort_key(result: DesignResult):
        if result.status != "ok":
            return (1, (), result.index)
        adjusted = tuple(
            result.scores[o.name] if o.direction == "minimize" else -result.scores[o.name]
            for o in objectives
        )
        return (0, adjusted, result.index)

    return [r.index for r in sorted(results, key=sort_key)]


def _derive_runtime(base_rt: RuntimeConfig, design: DesignPoint) -> RuntimeConfig:
    env = dict(base_rt.environment_variables)
    env.update(design.assignment)
    return replace(
        base_rt,
        environment_variables=env,
        data_writers=[DataWriterSpec(filename="results.csv")],
    )


def _evaluate_design(
    design: DesignPoint,
    plan: SimulationPlan,
    base_rt: RuntimeConfig,
    out_dir: Path,
    space: DesignSpace,
    native_executable: Optional[Path],
) -> DesignResult:
    result = DesignResult(index=design.index, assignment=dict(design.assignment))
    design_dir = out_dir / f"design_{design.index}"
    try:
        design_dir.mkdir(parents=True, exist_ok=True)
        rt = _derive_runtime(base_rt, design)
        runtime_path = design_dir / "runtime.json"
        write_runtime_config(rt, runtime_path)
        result.runtime_path = runtime_path
        csv_path = design_dir / "results.csv"

        t0 = time.perf_counter()
        if native_executable is not None:
            codegen.run_native(native_executable, runtime_path)
            table = read_results(csv_path)
        else:
            in_memory = replace(rt, data_writers=[DataWriterSpec(filename=str(csv_path))])
            table = interpret_plan(plan, in_memory)
        result.wall_time = time.perf_counter() - t0
        result.csv_path = csv_path

        parameters = {**{k: v for k, v in plan.default_parameters().items() if v is not None},
                      **rt.environment_variables}
        for objective in space.objectives:
            result.scores[objective.name] = score(
                objective,
                table,
                design,
                parameters=parameters,
                csv_path=csv_path,
                runtime_path=runtime_path,
            )
    except Exception as exc:  # a bad design must not sink the batch
        result.status = "failed"
        result.error = f"{type(exc).__name__}: {exc}"
    return result


def _prepare_native(
    plan: SimulationPlan, out_dir: Path
) -> tuple[Path, float, codegen.ToolchainReport]:
    t0 = time.perf_counter()
    project = codegen.export_c_project(plan, out_dir / "native")
    generation = time.perf_counter() - t0
    toolchain, executable = codegen.compile_project(project)
    return executable, generation, toolchain


def run_dse(
    space: DesignSpace,
    plan: SimulationPlan,
    base_rt: RuntimeConfig,
    out_dir: Union[str, Path],
    designs: Optional[list[DesignPoint]] = None,
    native_executable: Optional[Path] = None,
) -> DseReport:
    """Run one co-simulation per design and rank the outcomes.

    With the native engine the plan is exported and compiled exactly once,
    then the same binary runs every design. Pass `native_executable` to
    reuse a binary compiled earlier (the bench harness does).
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if designs is None:
        designs = enumerate_designs(space)
    slot_keys = set(plan.default_parameters())
    missing = [k for k in space.keys() if k not in slot_keys]
    if missing:
        raise ConfigurationError(
            "swept keys are not plan parameters: " + ", ".join(missing)
        )

    generation_duration = None
    toolchain = None
    if space.engine == "native" and native_executable is None:
        native_executable, generation_duration, toolchain = _prepare_native(plan, out_dir)
    elif space.engine != "native":
        native_executable = None

    t0 = time.perf_counter()
    if space.parallelism == 1:
        results = [
            _evaluate_design(d, plan, base_rt, out_dir, space, native_executable)
            for d in designs
        ]
    else:
        with ThreadPoolExecutor(max_workers=space.parallelism) as pool:
            results = list(
                pool.map(
                    lambda d: _evaluate_design(d, plan, base_rt, out_dir, space, native_executable),
                    designs,
                )
            )
    results.sort(key=lambda r: r.index)
    total = time.perf_counter() - t0

    report = DseReport(
        results=results,
        ranking=rank_designs(results, space.objectives),
        total_wall_time=total,
        generation_duration=generation_duration,
        toolchain=toolchain,
    )
    write_report_csv(report, space, out_dir / "report.csv")
    return report


def write_report_csv(report: DseReport, space: DesignSpace, path: Union[str, Path]) -> None:
    """One row per design: index, parameters, scores, rank, wall time, status."""
    rank_of = {index: position + 1 for position, index in enumerate(report.ranking)}
    keys = space.keys()
    objective_names = [o.name for o in space.objectives]
    header = ["index", *keys, *objective_names, "rank", "wall_time_s", "status"]
    lines = [",".join(header)]
    for result in sorted(report.results, key=lambda r: r.index):
        cells = [str(result.index)]
        cells += [format_real(result.assignment[k]) for k in keys]
        for name in objective_names:
            value = result.scores.get(name)
            cells.append("" if value is None else format_real(value))
        cells.append(str(rank_of[result.index]))
        cells.append(format_real(round(result.wall_time, 6)))
        cells.append(result.status)
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def genetic_search(
    space: DesignSpace,
    plan: SimulationPlan,
    base_rt: RuntimeConfig,
    out_dir: Union[str, Path],
    population: int,
    generations: int,
) -> DseReport:
    """Seeded genetic search over the constrained design space.

    Tournament selection of size 2, uniform crossover per key, mutation
    resamples a key from its sweep with probability 0.1, one elite survives
    per generation. Offspring violating a constraint are redrawn up to 100
    times, then the first parent is copied. Every evaluated assignment is
    cached, so no design is co-simulated twice; the report covers everything
    evaluated.
    """
    if population < 2:
        raise ConfigurationError("population must be at least 2")
    if generations < 0:
        raise ConfigurationError("generations must be non-negative")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rng = random.Random(space.seed)
    universe = enumerate_designs(space)
    by_assignment = {tuple(d.assignment[k] for k in space.keys()): d for d in universe}

    native_executable = None
    generation_duration = None
    toolchain = None
    if space.engine == "native":
        native_executable, generation_duration, toolchain = _prepare_native(plan, out_dir)

    if population <= len(universe):
        current = rng.sample(universe, population)
    else:
        current = list(universe)
        current += rng.choices(universe, k=population - len(universe))

    evaluated: dict[int, DesignResult] = {}
    fitness_objective = space.objectives[0] if space.objectives else None
    t0 = time.perf_counter()

    def evaluate_members(members: list[DesignPoint]) -> None:
        pending = []
        seen = set()
        for member in members:
            if member.index not in evaluated and member.index not in seen:
                pending.append(member)
                seen.add(member.index)
        if not pending:
            return
        if space.parallelism == 1:
            fresh = [
                _evaluate_design(d, plan, base_rt, out_dir, space, native_executable)
                for d in pending
            ]
        else:
            with ThreadPoolExecutor(max_workers=space.parallelism) as pool:
                fresh = list(
                    pool.map(
                        lambda d: _evaluate_design(d, plan, base_rt, out_dir, space, native_executable),
                        pending,
                    )
                )
        for result in fresh:
            evaluated[result.index] = result

    def fitness(design: DesignPoint) -> tuple:
        result = evaluated[design.index]
        if result.status != "ok" or fitness_objective is None:
            return (1, 0.0, design.index)
        value = result.scores[fitness_objective.name]
        if fitness_objective.direction == "maximize":
            value = -value
        return (0, value, design.index)

    def tournament() -> DesignPoint:
        a, b = rng.choice(current), rng.choice(current)
        return a if fitness(a) <= fitness(b) else b

    def make_offspring() -> DesignPoint:
        pa, pb = tournament(), tournament()
        for _ in range(100):
            assignment = {}
            for sweep in space.sweeps:
                parent = pa if rng.random() < 0.5 else pb
                assignment[sweep.key] = parent.assignment[sweep.key]
                if rng.random() < 0.1:
                    assignment[sweep.key] = rng.choice(sweep.values)
            if all(c.evaluate(assignment) for c in space.constraints):
                return by_assignment[tuple(assignment[k] for k in space.keys())]
        return pa

    evaluate_members(current)
    for _ in range(generations):
        elite = min(current, key=fitness)
        nxt = [elite]
        while len(nxt) < population:
            nxt.append(make_offspring())
        current = nxt
        evaluate_members(current)

    results = sorted(evaluated.values(), key=lambda r: r.index)
    report = DseReport(
        results=results,
        ranking=rank_designs(results, space.objectives),
        total_wall_time=time.perf_counter() - t0,
        generation_duration=generation_duration,
        toolchain=toolchain,
    )
    write_report_csv(report, space, out_dir / "report.csv")
    return report
