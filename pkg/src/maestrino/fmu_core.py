"""FMI-lite component contract: model descriptions and stepped instances.

This is a deliberately small subset of FMI co-simulation. Variables are
typed `real` or `boolean`; booleans are stored and transported as
0.0/1.0 reals so one numeric path serves connections, CSV output and the
generated C code. Instances follow the lifecycle
instantiated -> initialized -> stepping -> terminated.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .errors import (
    DescriptionError,
    LifecycleError,
    SynchronizationError,
    UnknownReferenceError,
    VariableKindError,
)

# Absolute tolerance when checking the master's clock against an instance
# clock. Chosen so float accumulation over very long fixed-step runs never
# spuriously trips the check.
TIME_SYNC_TOLERANCE = 1e-12


class VariableKind(str, Enum):
    PARAMETER = "parameter"
    INPUT = "input"
    OUTPUT = "output"
    LOCAL = "local"


class ValueType(str, Enum):
    REAL = "real"
    BOOLEAN = "boolean"


@dataclass(frozen=True)
class ScalarVariable:
    """One named scalar in a model interface."""

    name: str
    kind: VariableKind
    value_type: ValueType
    value_ref: int
    default: Optional[float] = None


@dataclass(frozen=True)
class ModelDescription:
    """The interface contract of a component: its name and variable list.

    Value references must be dense (0..n-1) and unique; variable names must
    be unique; parameters must carry defaults.
    """

    model_name: str
    variables: tuple[ScalarVariable, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        problems = _description_problems(self)
        if problems:
            raise DescriptionError(
                f"invalid description {self.model_name!r}: " + "; ".join(problems)
            )

    def variable(self, name: str) -> ScalarVariable:
        for var in self.variables:
            if var.name == name:
                return var
        raise UnknownReferenceError(
            f"model {self.model_name!r} has no variable {name!r}"
        )

    def has_variable(self, name: str) -> bool:
        return any(var.name == name for var in self.variables)

    def by_ref(self, value_ref: int) -> ScalarVariable:
        if 0 <= value_ref < len(self.variables):
            return self.variables[value_ref]
        raise UnknownReferenceError(
            f"model {self.model_name!r} has no value reference {value_ref}"
        )

    def of_kind(self, *kinds: VariableKind) -> tuple[ScalarVariable, ...]:
        return tuple(var for var in self.variables if var.kind in kinds)

    def interface_signature(self) -> tuple:
        """Shape of the interface, ignoring defaults."""
        return tuple(
            (v.name, v.kind, v.value_type, v.value_ref) for v in self.variables
        )

    def to_json(self) -> dict:
        variables = []
        for var in self.variables:
            entry = {
                "name": var.name,
                "kind": var.kind.value,
                "type": var.value_type.value,
                "valueReference": var.value_ref,
            }
            if var.default is not None:
                entry["default"] = var.default
            variables.append(entry)
        return {"modelName": self.model_name, "variables": variables}

    @classmethod
    def from_json(cls, doc: dict) -> "ModelDescription":
        if not isinstance(doc, dict):
            raise DescriptionError("model description must be a JSON object")
        unknown = set(doc) - {"modelName", "variables"}
        if unknown:
            raise DescriptionError(
                "unknown model description fields: " + ", ".join(sorted(unknown))
            )
        try:
            name = doc["modelName"]
            raw_vars = doc["variables"]
        except KeyError as exc:
            raise DescriptionError(f"model description missing field {exc}") from exc
        variables = []
        for raw in raw_vars:
            extra = set(raw) - {"name", "kind", "type", "valueReference", "default"}
            if extra:
                raise DescriptionError(
                    "unknown variable fields: " + ", ".join(sorted(extra))
                )
            try:
                kind = VariableKind(raw["kind"])
                value_type = ValueType(raw["type"])
            except (KeyError, ValueError) as exc:
                raise DescriptionError(f"bad variable entry {raw!r}: {exc}") from exc
            default = raw.get("default")
            variables.append(
                ScalarVariable(
                    name=raw["name"],
                    kind=kind,
                    value_type=value_type,
                    value_ref=int(raw["valueReference"]),
                    default=None if default is None else float(default),
                )
            )
        return cls(model_name=name, variables=tuple(variables))

    @classmethod
    def from_json_text(cls, text: str) -> "ModelDescription":
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DescriptionError(f"model description is not valid JSON: {exc}") from exc
        return cls.from_json(doc)


def _description_problems(desc: ModelDescription) -> list[str]:
    problems = []
    if not desc.model_name:
        problems.append("empty model name")
    if not desc.variables:
        problems.append("at least one variable is required")
    names = [v.name for v in desc.variables]
    for name in sorted({n for n in names if names.count(n) > 1}):
        problems.append(f"duplicate variable name {name!r}")
    refs = sorted(v.value_ref for v in desc.variables)
    if refs != list(range(len(desc.variables))):
        problems.append("value references must be dense and unique (0..n-1)")
    for var in desc.variables:
        if not var.name.isidentifier():
            problems.append(f"variable name {var.name!r} is not an identifier")
        if var.kind is VariableKind.PARAMETER and var.default is None:
            problems.append(f"parameter {var.name!r} has no default")
    return problems


class InstanceState(Enum):
    INSTANTIATED = "instantiated"
    INITIALIZED = "initialized"
    STEPPING = "stepping"
    TERMINATED = "terminated"


# Step functions mutate the value array in place; init functions run once
# when the instance leaves the instantiated state.
StepFn = Callable[[list, float, float], None]
InitFn = Callable[[list], None]


@dataclass(frozen=True)
class FmuModel:
    """A description plus the behaviour needed to execute it."""

    description: ModelDescription
    step: StepFn
    init: Optional[InitFn] = None


class Instance:
    """A stateful, time-stepped occurrence of a model.

    Confined to one thread at a time; no state is shared between instances.
    """

    def __init__(self, model: FmuModel, instance_name: str):
        if not instance_name or not instance_name.isidentifier():
            raise ValueError(f"instance name {instance_name!r} is not a valid identifier")
        self._model = model
        self.name = instance_name
        desc = model.description
        self._kinds = tuple(desc.by_ref(vr).kind for vr in range(len(desc.variables)))
        self._values = [
            0.0 if (d := desc.by_ref(vr).default) is None else float(d)
            for vr in range(len(desc.variables))
        ]
        self._state = InstanceState.INSTANTIATED
        self.current_time = 0.0

    @property
    def description(self) -> ModelDescription:
        return self._model.description

    @property
    def state(self) -> InstanceState:
        return self._state

    def initialize(self, start_time: float = 0.0) -> None:
        if self._state is not InstanceState.INSTANTIATED:
            raise LifecycleError(
                f"{self.name}: cannot initialize from state {self._state.value}"
            )
        if self._model.init is not None:
            self._model.init(self._values)
        self._state = InstanceState.INITIALIZED
        self.current_time = start_time

    def get_value(self, value_ref: int) -> float:
        if self._state is InstanceState.TERMINATED:
            raise LifecycleError(f"{self.name}: get_value on terminated instance")
        self._check_ref(value_ref)
        return self._values[value_ref]

    def set_value(self, value_ref: int, value) -> None:
        if self._state is InstanceState.TERMINATED:
            raise LifecycleError(f"{self.name}: set_value on terminated instance")
        self._check_ref(value_ref)
        kind = self._kinds[value_ref]
        if kind is VariableKind.OUTPUT or kind is VariableKind.LOCAL:
            raise VariableKindError(
                f"{self.name}: variable ref {value_ref} is {kind.value}, not settable"
            )
        if kind is VariableKind.PARAMETER and self._state is InstanceState.STEPPING:
            raise LifecycleError(
                f"{self.name}: parameters are frozen once stepping has begun"
            )
        if isinstance(value, bool):
            value = 1.0 if value else 0.0
        value = float(value)
        var = self.description.by_ref(value_ref)
        if var.value_type is ValueType.BOOLEAN and value not in (0.0, 1.0):
            raise VariableKindError(
                f"{self.name}: boolean variable {var.name!r} accepts only 0.0/1.0"
            )
        self._values[value_ref] = value

    def do_step(self, t: float, h: float) -> None:
        if self._state is InstanceState.TERMINATED:
            raise LifecycleError(f"{self.name}: do_step on terminated instance")
        if self._state is InstanceState.INSTANTIATED:
            raise LifecycleError(f"{self.name}: do_step before initialize")
        if h <= 0.0:
            raise ValueError(f"{self.name}: step size must be positive, got {h}")
        if abs(t - self.current_time) > TIME_SYNC_TOLERANCE:
            raise SynchronizationError(
                f"{self.name}: master time {t!r} disagrees with instance time "
                f"{self.current_time!r}"
            )
        self._state = InstanceState.STEPPING
        self._model.step(self._values, t, h)
        self.current_time = t + h

    def terminate(self) -> None:
        if self._state is InstanceState.TERMINATED:
            raise LifecycleError(f"{self.name}: already terminated")
        self._state = InstanceState.TERMINATED

    def _check_ref(self, value_ref: int) -> None:
        if not 0 <= value_ref < len(self._values):
            raise UnknownReferenceError(
                f"{self.name}: no value reference {value_ref}"
            )


def instantiate(model: FmuModel, instance_name: str) -> Instance:
    """Create an instance of `model` with all variables at their defaults."""
    return Instance(model, instance_name)


def step_count(start_time: float, end_time: float, step_size: float) -> int:
    """Number of fixed steps from start to end, rounded to the nearest integer.

    Nearest-integer rounding (ties to even, matching C rint) keeps the count
    stable when (end - start) / h lands a few ulps off an integer.
    """
    if step_size <= 0.0:
        raise ValueError(f"step size must be positive, got {step_size}")
    if end_time < start_time:
        raise ValueError("end time precedes start time")
    return int(round((end_time - start_time) / step_size))


def time_at(start_time: float, k: int, step_size: float) -> float:
    """Time after k steps, recomputed from the step index to avoid drift."""
    return start_time + k * step_size
