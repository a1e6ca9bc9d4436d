"""Parsing and validation of the `mm` and `coe` configuration documents.

The mm document names the models, their instances, the output->input
connections and config-time parameter values; the coe document fixes the
fixed-step algorithm, step size and time window. All signal relations are
resolved to integer indices here, before any plan is built, so no name
lookup survives into the execution path.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import models
from .errors import ValidationError
from .fmu_core import ModelDescription, ValueType, VariableKind

log = logging.getLogger(__name__)

_MM_KEYS = {"fmus", "instances", "connections", "parameters"}
_COE_KEYS = {"algorithm", "startTime", "endTime"}


@dataclass(frozen=True)
class Connection:
    """Directed signal from an output endpoint to an input endpoint."""

    source: tuple[str, str]
    target: tuple[str, str]


@dataclass
class MultiModelConfig:
    fmus: dict[str, str]
    instances: dict[str, str]
    connections: list[Connection] = field(default_factory=list)
    parameters: dict[str, float] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "fmus": dict(self.fmus),
            "instances": dict(self.instances),
            "connections": [
                {"source": f"{c.source[0]}.{c.source[1]}", "target": f"{c.target[0]}.{c.target[1]}"}
                for c in self.connections
            ],
            "parameters": dict(self.parameters),
        }


@dataclass(frozen=True)
class CoSimConfig:
    step_size: float
    end_time: float
    start_time: float = 0.0
    algorithm: str = "fixed-step"

    def to_json(self) -> dict:
        return {
            "algorithm": {"type": self.algorithm, "size": self.step_size},
            "startTime": self.start_time,
            "endTime": self.end_time,
        }


@dataclass(frozen=True)
class Wire:
    """Index-resolved connection; no names remain."""

    source_instance: int
    source_ref: int
    target_instance: int
    target_ref: int


def _split_endpoint(text: str, role: str, problems: list[str]) -> Optional[tuple[str, str]]:
    if not isinstance(text, str) or text.count(".") != 1:
        problems.append(f"{role} endpoint {text!r} is not of the form instance.variable")
        return None
    instance, variable = text.split(".")
    return instance, variable


def load_model_source(source: str, base_dir: Optional[Path] = None) -> ModelDescription:
    """Resolve a model source: a builtin model name or a description file path."""
    builtins = models.builtin_models()
    if source in builtins:
        return builtins[source].description
    path = Path(source)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    if path.suffix == ".json" and path.is_file():
        return ModelDescription.from_json_text(path.read_text(encoding="utf-8"))
    raise ValidationError(
        f"unknown model source {source!r}: not a builtin model "
        f"({', '.join(sorted(builtins))}) and not a description file"
    )


def parse_multimodel(text: str, base_dir: Optional[Path] = None) -> MultiModelConfig:
    """Parse and fully validate an mm document; raises with every problem found."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"mm document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("mm document must be a JSON object")
    problems: list[str] = []
    unknown = set(doc) - _MM_KEYS
    if unknown:
        problems.append("unknown mm fields: " + ", ".join(sorted(unknown)))
    fmus = doc.get("fmus")
    instances = doc.get("instances")
    if not isinstance(fmus, dict) or not fmus:
        problems.append("mm document needs a non-empty 'fmus' object")
        fmus = {}
    if not isinstance(instances, dict) or not instances:
        problems.append("mm document needs a non-empty 'instances' object")
        instances = {}

    descriptions: dict[str, ModelDescription] = {}
    for key, source in fmus.items():
        try:
            descriptions[key] = load_model_source(source, base_dir)
        except ValidationError as exc:
            problems.append(str(exc))

    for name, model_key in instances.items():
        if not name.isidentifier():
            problems.append(f"instance name {name!r} is not an identifier")
        if model_key not in fmus:
            problems.append(f"instance {name!r} references unknown model key {model_key!r}")

    def instance_variable(endpoint: tuple[str, str]):
        instance, variable = endpoint
        if instance not in instances:
            problems.append(f"unknown instance {instance!r} in {instance}.{variable}")
            return None
        desc = descriptions.get(instances[instance])
        if desc is None:
            return None
        if not desc.has_variable(variable):
            problems.append(
                f"model {desc.model_name!r} has no variable {variable!r} "
                f"(referenced as {instance}.{variable})"
            )
            return None
        return desc.variable(variable)

    connections: list[Connection] = []
    seen_targets: set[tuple[str, str]] = set()
    for raw in doc.get("connections", []):
        if not isinstance(raw, dict) or set(raw) != {"source", "target"}:
            problems.append(f"connection entry {raw!r} must have exactly source and target")
            continue
        source = _split_endpoint(raw["source"], "source", problems)
        target = _split_endpoint(raw["target"], "target", problems)
        if source is None or target is None:
            continue
        conn = Connection(source=source, target=target)
        src_var = instance_variable(source)
        dst_var = instance_variable(target)
        if src_var is not None and src_var.kind is not VariableKind.OUTPUT:
            problems.append(
                f"connection source {raw['source']} is {src_var.kind.value}, must be an output"
            )
        if dst_var is not None and dst_var.kind is not VariableKind.INPUT:
            problems.append(
                f"connection target {raw['target']} is {dst_var.kind.value}, must be an input"
            )
        if src_var is not None and dst_var is not None:
            if not _types_compatible(src_var.value_type, dst_var.value_type):
                problems.append(
                    f"connection {raw['source']} -> {raw['target']} mixes value types "
                    f"{src_var.value_type.value} and {dst_var.value_type.value}"
                )
        if target in seen_targets:
            problems.append(f"duplicate connection into target {raw['target']}")
        seen_targets.add(target)
        connections.append(conn)

    parameters: dict[str, float] = {}
    raw_params = doc.get("parameters", {})
    if not isinstance(raw_params, dict):
        problems.append("'parameters' must be an object keyed by instance.variable")
        raw_params = {}
    for key, value in raw_params.items():
        endpoint = _split_endpoint(key, "parameter", problems)
        if endpoint is None:
            continue
        var = instance_variable(endpoint)
        if var is not None and var.kind is not VariableKind.PARAMETER:
            problems.append(f"parameter key {key!r} names a {var.kind.value} variable")
        if isinstance(value, bool):
            value = 1.0 if value else 0.0
        if not isinstance(value, (int, float)):
            problems.append(f"parameter {key!r} has non-numeric value {value!r}")
            continue
        parameters[key] = float(value)

    if problems:
        raise ValidationError(problems)

    config = MultiModelConfig(
        fmus=dict(fmus),
        instances=dict(instances),
        connections=connections,
        parameters=parameters,
    )
    for name, variable in _unconnected_inputs(config, descriptions):
        log.warning(
            "input %s.%s is not connected; it keeps its declared default", name, variable
        )
    return config


def _types_compatible(a: ValueType, b: ValueType) -> bool:
    # Booleans travel as 0.0/1.0 reals, so boolean<->real bridges are legal.
    return True if {a, b} <= {ValueType.REAL, ValueType.BOOLEAN} else a is b


def _unconnected_inputs(config: MultiModelConfig, descriptions: dict[str, ModelDescription]):
    connected = {c.target for c in config.connections}
    for name, model_key in config.instances.items():
        desc = descriptions[model_key]
        for var in desc.of_kind(VariableKind.INPUT):
            if (name, var.name) not in connected:
                yield name, var.name


def resolve_descriptions(
    config: MultiModelConfig, base_dir: Optional[Path] = None
) -> dict[str, ModelDescription]:
    """Description per instance name, for a validated config."""
    per_key = {key: load_model_source(src, base_dir) for key, src in config.fmus.items()}
    return {name: per_key[model_key] for name, model_key in config.instances.items()}


def parse_cosim_config(text: str) -> CoSimConfig:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"coe document is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("coe document must be a JSON object")
    problems = []
    unknown = set(doc) - _COE_KEYS
    if unknown:
        problems.append("unknown coe fields: " + ", ".join(sorted(unknown)))
    algorithm = doc.get("algorithm")
    step_size = None
    if not isinstance(algorithm, dict) or algorithm.get("type") != "fixed-step":
        problems.append("coe document requires algorithm.type == 'fixed-step'")
    else:
        extra = set(algorithm) - {"type", "size"}
        if extra:
            problems.append("unknown algorithm fields: " + ", ".join(sorted(extra)))
        step_size = algorithm.get("size")
        if not isinstance(step_size, (int, float)) or isinstance(step_size, bool) or step_size <= 0:
            problems.append(f"step size must be a positive number, got {step_size!r}")
            step_size = None
    start_time = doc.get("startTime", 0.0)
    end_time = doc.get("endTime")
    if not isinstance(start_time, (int, float)) or isinstance(start_time, bool):
        problems.append(f"startTime must be a number, got {start_time!r}")
        start_time = 0.0
    if not isinstance(end_time, (int, float)) or isinstance(end_time, bool):
        problems.append(f"endTime must be a number, got {end_time!r}")
    elif end_time < start_time:
        problems.append(f"endTime {end_time!r} precedes startTime {start_time!r}")
    if problems:
        raise ValidationError(problems)
    return CoSimConfig(
        step_size=float(step_size),
        start_time=float(start_time),
        end_time=float(end_time),
    )


def resolve_connections(
    config: MultiModelConfig,
    descriptions: dict[str, ModelDescription],
    instance_order: list[str],
) -> list[Wire]:
    """Turn name-based connections into pure index pairs over `instance_order`."""
    index = {name: i for i, name in enumerate(instance_order)}
    wires = []
    for conn in config.connections:
        src_desc = descriptions[conn.source[0]]
        dst_desc = descriptions[conn.target[0]]
        wires.append(
            Wire(
                source_instance=index[conn.source[0]],
                source_ref=src_desc.variable(conn.source[1]).value_ref,
                target_instance=index[conn.target[0]],
                target_ref=dst_desc.variable(conn.target[1]).value_ref,
            )
        )
    return wires
