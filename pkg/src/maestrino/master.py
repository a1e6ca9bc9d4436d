"""Master-algorithm plans: build from configuration, serialize, interpret.

A SimulationPlan is the fully resolved intermediate representation of one
fixed-step master algorithm: embedded model descriptions, an ordered
instance list, index-based wiring, externalized parameter slots and the
output column order. The interpreter and the C emitter both consume it, so
everything that could vary between runs (parameter values, end time, output
files) lives in the RuntimeConfig instead.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

from . import models as builtin_models_mod
from .errors import (
    ConfigurationError,
    MissingParameterError,
    PlanError,
    RunError,
)
from .fmu_core import (
    FmuModel,
    Instance,
    ModelDescription,
    VariableKind,
    step_count,
    time_at,
)
from .multimodel import CoSimConfig, MultiModelConfig, Wire, resolve_connections, resolve_descriptions

PLAN_SUFFIX = ".mabl.json"

_PLAN_KEYS = {
    "models",
    "instances",
    "parameterSlots",
    "wiring",
    "stepSize",
    "startTime",
    "endTime",
    "columns",
}
_RUNTIME_KEYS = {"environment_variables", "DataWriter", "endTime"}


@dataclass(frozen=True)
class ParameterSlot:
    """A parameter lifted out of the plan, addressable by its external key."""

    key: str
    instance: int
    value_ref: int
    default: Optional[float]


@dataclass(frozen=True)
class SimulationPlan:
    descriptions: tuple[ModelDescription, ...]
    instances: tuple[tuple[str, int], ...]
    parameter_slots: tuple[ParameterSlot, ...]
    wiring: tuple[Wire, ...]
    step_size: float
    start_time: float
    end_time: float
    columns: tuple[str, ...]

    def __post_init__(self):
        keys = [slot.key for slot in self.parameter_slots]
        if len(keys) != len(set(keys)):
            raise PlanError("parameter slot keys must be unique")
        n = len(self.instances)
        for wire in self.wiring:
            if not (0 <= wire.source_instance < n and 0 <= wire.target_instance < n):
                raise PlanError("wiring references an instance index out of range")
            self._desc_of(wire.source_instance).by_ref(wire.source_ref)
            self._desc_of(wire.target_instance).by_ref(wire.target_ref)
        for column in self.columns:
            inst_idx, var = self._resolve_column(column)
            kind = self._desc_of(inst_idx).variable(var).kind
            if kind not in (VariableKind.OUTPUT, VariableKind.LOCAL):
                raise PlanError(f"column {column!r} must name an output or local variable")
        if self.step_size <= 0:
            raise PlanError("step size must be positive")
        if self.end_time < self.start_time:
            raise PlanError("end time precedes start time")

    def _desc_of(self, instance_index: int) -> ModelDescription:
        return self.descriptions[self.instances[instance_index][1]]

    def _resolve_column(self, column: str) -> tuple[int, str]:
        if column.count(".") != 1:
            raise PlanError(f"column {column!r} is not of the form instance.variable")
        inst_name, var = column.split(".")
        for i, (name, _) in enumerate(self.instances):
            if name == inst_name:
                return i, var
        raise PlanError(f"column {column!r} references unknown instance {inst_name!r}")

    def instance_names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.instances)

    def resolved_columns(self) -> list[tuple[int, int]]:
        """Columns as (instance index, value reference) pairs."""
        out = []
        for column in self.columns:
            inst_idx, var = self._resolve_column(column)
            out.append((inst_idx, self._desc_of(inst_idx).variable(var).value_ref))
        return out

    def default_parameters(self) -> dict[str, Optional[float]]:
        return {slot.key: slot.default for slot in self.parameter_slots}


@dataclass(frozen=True)
class DataWriterSpec:
    filename: str
    type: str = "CSV"


@dataclass
class RuntimeConfig:
    """Everything external to the plan: parameter values, sinks, end time."""

    environment_variables: dict[str, float] = field(default_factory=dict)
    data_writers: list[DataWriterSpec] = field(default_factory=list)
    end_time: Optional[float] = None

    def to_json(self) -> dict:
        doc = {
            "environment_variables": dict(self.environment_variables),
            "DataWriter": [
                {"filename": w.filename, "type": w.type} for w in self.data_writers
            ],
        }
        if self.end_time is not None:
            doc["endTime"] = self.end_time
        return doc


@dataclass(frozen=True)
class ResultsTable:
    """Time-indexed table of instance-qualified signals."""

    header: tuple[str, ...]
    rows: tuple[tuple[float, ...], ...]

    def column(self, name: str) -> list[float]:
        idx = self.header.index(name)
        return [row[idx] for row in self.rows]

    def columns_matching(self, suffix: str) -> list[str]:
        return [name for name in self.header[1:] if name.endswith(suffix)]


def build_plan(mm: MultiModelConfig, coe: CoSimConfig, base_dir: Optional[Path] = None) -> SimulationPlan:
    """Assemble the master-algorithm plan from validated configuration.

    Instances are ordered lexicographically for a deterministic step order;
    columns keep the mm declaration order so result files read naturally.
    Every parameter becomes an external slot keyed `instance.variable`, with
    the mm-supplied value (if any) baked in as its default.
    """
    per_instance = resolve_descriptions(mm, base_dir)
    instance_order = sorted(mm.instances)
    descriptions: list[ModelDescription] = []
    desc_index: dict[str, int] = {}
    instances = []
    for name in instance_order:
        desc = per_instance[name]
        if desc.model_name not in desc_index:
            desc_index[desc.model_name] = len(descriptions)
            descriptions.append(desc)
        instances.append((name, desc_index[desc.model_name]))

    slots = []
    for i, name in enumerate(instance_order):
        for var in per_instance[name].of_kind(VariableKind.PARAMETER):
            key = f"{name}.{var.name}"
            slots.append(
                ParameterSlot(
                    key=key,
                    instance=i,
                    value_ref=var.value_ref,
                    default=mm.parameters.get(key, var.default),
                )
            )

    wiring = resolve_connections(mm, per_instance, instance_order)

    columns = []
    for name in mm.instances:  # declaration order
        for var in per_instance[name].of_kind(VariableKind.OUTPUT, VariableKind.LOCAL):
            columns.append(f"{name}.{var.name}")

    return SimulationPlan(
        descriptions=tuple(descriptions),
        instances=tuple(instances),
        parameter_slots=tuple(slots),
        wiring=tuple(wiring),
        step_size=coe.step_size,
        start_time=coe.start_time,
        end_time=coe.end_time,
        columns=tuple(columns),
    )


def serialize_plan(plan: SimulationPlan) -> str:
    doc = {
        "models": [desc.to_json() for desc in plan.descriptions],
        "instances": [{"name": name, "model": idx} for name, idx in plan.instances],
        "parameterSlots": [
            {
                "key": slot.key,
                "instance": slot.instance,
                "valueReference": slot.value_ref,
                "default": slot.default,
            }
            for slot in plan.parameter_slots
        ],
        "wiring": [
            {
                "sourceInstance": w.source_instance,
                "sourceValueReference": w.source_ref,
                "targetInstance": w.target_instance,
                "targetValueReference": w.target_ref,
            }
            for w in plan.wiring
        ],
        "stepSize": plan.step_size,
        "startTime": plan.start_time,
        "endTime": plan.end_time,
        "columns": list(plan.columns),
    }
    return json.dumps(doc, indent=2) + "\n"


def parse_plan(text: str) -> SimulationPlan:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PlanError(f"plan document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise PlanError("plan document must be a JSON object")
    unknown = set(doc) - _PLAN_KEYS
    if unknown:
        raise PlanError("unknown plan fields: " + ", ".join(sorted(unknown)))
    missing = _PLAN_KEYS - set(doc)
    if missing:
        raise PlanError("plan fields missing: " + ", ".join(sorted(missing)))
    try:
        descriptions = tuple(ModelDescription.from_json(m) for m in doc["models"])
        instances = tuple((e["name"], int(e["model"])) for e in doc["instances"])
        slots = tuple(
            ParameterSlot(
                key=e["key"],
                instance=int(e["instance"]),
                value_ref=int(e["valueReference"]),
                default=None if e.get("default") is None else float(e["default"]),
            )
            for e in doc["parameterSlots"]
        )
        wiring = tuple(
            Wire(
                source_instance=int(e["sourceInstance"]),
                source_ref=int(e["sourceValueReference"]),
                target_instance=int(e["targetInstance"]),
                target_ref=int(e["targetValueReference"]),
            )
            for e in doc["wiring"]
        )
        plan = SimulationPlan(
            descriptions=descriptions,
            instances=instances,
            parameter_slots=slots,
            wiring=wiring,
            step_size=float(doc["stepSize"]),
            start_time=float(doc["startTime"]),
            end_time=float(doc["endTime"]),
            columns=tuple(doc["columns"]),
        )
    except PlanError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise PlanError(f"malformed plan document: {exc}") from exc
    for _, model_idx in plan.instances:
        if not 0 <= model_idx < len(descriptions):
            raise PlanError(f"instance references model index {model_idx} out of range")
    return plan


def load_plan(path: Union[str, Path]) -> SimulationPlan:
    return parse_plan(Path(path).read_text(encoding="utf-8"))


def write_plan(plan: SimulationPlan, path: Union[str, Path]) -> None:
    Path(path).write_text(serialize_plan(plan), encoding="utf-8")


def parse_runtime_config(text: str, base_dir: Optional[Path] = None) -> RuntimeConfig:
    """Parse a runtime document; relative writer paths resolve against base_dir."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"runtime document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigurationError("runtime document must be a JSON object")
    unknown = set(doc) - _RUNTIME_KEYS
    if unknown:
        raise ConfigurationError("unknown runtime fields: " + ", ".join(sorted(unknown)))
    env = doc.get("environment_variables", {})
    if not isinstance(env, dict):
        raise ConfigurationError("'environment_variables' must be a flat object")
    variables = {}
    for key, value in env.items():
        if isinstance(value, bool):
            value = 1.0 if value else 0.0
        if not isinstance(value, (int, float)):
            raise ConfigurationError(f"environment variable {key!r} must be numeric")
        variables[key] = float(value)
    writers = []
    for raw in doc.get("DataWriter", []):
        if not isinstance(raw, dict) or set(raw) != {"filename", "type"}:
            raise ConfigurationError(f"DataWriter entry {raw!r} needs exactly filename and type")
        if raw["type"] != "CSV":
            raise ConfigurationError(f"unsupported DataWriter type {raw['type']!r}")
        filename = raw["filename"]
        if base_dir is not None and not os.path.isabs(filename):
            filename = str(Path(base_dir) / filename)
        writers.append(DataWriterSpec(filename=filename, type="CSV"))
    end_time = doc.get("endTime")
    if end_time is not None and (isinstance(end_time, bool) or not isinstance(end_time, (int, float))):
        raise ConfigurationError(f"endTime must be a number, got {end_time!r}")
    return RuntimeConfig(
        environment_variables=variables,
        data_writers=writers,
        end_time=None if end_time is None else float(end_time),
    )


def load_runtime_config(path: Union[str, Path]) -> RuntimeConfig:
    path = Path(path)
    return parse_runtime_config(path.read_text(encoding="utf-8"), base_dir=path.parent)


def write_runtime_config(rt: RuntimeConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(
        json.dumps(rt.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def format_real(value: float) -> str:
    """Shortest decimal string that round-trips the binary64 value.

    Always contains a '.' or an exponent, so 1.0 renders as "1.0" and never
    "1". This is the normative CSV number format; the C runtime reproduces
    it digit for digit.
    """
    if math.isnan(value) or math.isinf(value):
        raise RunError(f"non-finite value {value!r} cannot be written")
    return repr(value)


def csv_render(table: ResultsTable) -> str:
    lines = [",".join(table.header)]
    for row in table.rows:
        lines.append(",".join(format_real(v) for v in row))
    return "\n".join(lines) + "\n"


def csv_write(table: ResultsTable, sink: Union[str, Path]) -> None:
    """Write the table as UTF-8 CSV with \\n line endings."""
    try:
        with open(sink, "w", encoding="utf-8", newline="") as f:
            f.write(csv_render(table))
    except OSError as exc:
        raise RunError(f"cannot write results to {sink}: {exc}") from exc


def read_results(path: Union[str, Path]) -> ResultsTable:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise RunError(f"cannot read results from {path}: {exc}") from exc
    lines = text.splitlines()
    if not lines:
        raise RunError(f"results file {path} is empty")
    header = tuple(lines[0].split(","))
    rows = tuple(tuple(map(float, line.split(","))) for line in lines[1:] if line)
    return ResultsTable(header=header, rows=rows)


def _behaviour_for(desc: ModelDescription) -> FmuModel:
    registry = builtin_models_mod.builtin_models()
    model = registry.get(desc.model_name)
    if model is None:
        raise ConfigurationError(
            f"no behaviour registered for model {desc.model_name!r}; "
            f"known models: {', '.join(sorted(registry))}"
        )
    if model.description.interface_signature() != desc.interface_signature():
        raise ConfigurationError(
            f"description of {desc.model_name!r} does not match the builtin interface"
        )
    return FmuModel(description=desc, step=model.step, init=model.init)


def interpret_plan(plan: SimulationPlan, rt: RuntimeConfig) -> ResultsTable:
    """Execute the plan in process and write the results to every data writer.

    One Jacobi exchange happens per step: all connected outputs are sampled,
    then all inputs are set, then every instance steps. A single exchange
    also runs at the start time, before the first row, so downstream inputs
    see upstream initial outputs.
    """
    if not rt.data_writers:
        raise ConfigurationError("runtime config needs at least one data writer")
    end_time = plan.end_time if rt.end_time is None else rt.end_time
    if end_time < plan.start_time:
        raise ConfigurationError(
            f"end time {end_time!r} precedes start time {plan.start_time!r}"
        )

    slot_keys = {slot.key for slot in plan.parameter_slots}
    for key in rt.environment_variables:
        if key not in slot_keys:
            raise ConfigurationError(f"unknown environment variable {key!r} (no such parameter slot)")

    instances = [
        Instance(_behaviour_for(plan.descriptions[model_idx]), name)
        for name, model_idx in plan.instances
    ]
    for slot in plan.parameter_slots:
        value = rt.environment_variables.get(slot.key, slot.default)
        if value is None:
            raise MissingParameterError(slot.key)
        instances[slot.instance].set_value(slot.value_ref, value)

    start = plan.start_time
    h = plan.step_size
    for inst in instances:
        inst.initialize(start)

    wiring = plan.wiring
    columns = plan.resolved_columns()

    def propagate():
        sampled = [instances[w.source_instance].get_value(w.source_ref) for w in wiring]
        for wire, value in zip(wiring, sampled):
            instances[wire.target_instance].set_value(wire.target_ref, value)

    def record(t: float) -> tuple[float, ...]:
        return (t, *(instances[i].get_value(vr) for i, vr in columns))

    propagate()
    rows = [record(start)]
    t = start
    for k in range(1, step_count(start, end_time, h) + 1):
        propagate()
        for inst in instances:
            inst.do_step(t, h)
        t = time_at(start, k, h)
        rows.append(record(t))
    for inst in instances:
        inst.terminate()

    table = ResultsTable(
        header=("time", *plan.columns),
        rows=tuple(rows),
    )
    for writer in rt.data_writers:
        csv_write(table, writer.filename)
    return table
