"""Built-in water tank and two-level controller models, plus their oracle.

The tank drains through a two-state valve: level' = inflow - open * outflow,
integrated with explicit Euler at the co-simulation step size and clamped at
an empty tank. The controller opens the valve at or above the maximum level,
closes it at or below the minimum, and holds its previous state inside the
band (hysteresis). `analytic_trace` replays the exact coupled recurrence the
master loop produces and serves as the independent oracle in tests.
"""

from __future__ import annotations

from dataclasses import dataclass

from .fmu_core import (
    FmuModel,
    ModelDescription,
    ScalarVariable,
    ValueType,
    VariableKind,
    step_count,
    time_at,
)

WATERTANK_MODEL_NAME = "singlewatertank-20sim"
CONTROLLER_MODEL_NAME = "watertankcontroller-c"

VALVE_OPEN = 1.0
VALVE_CLOSED = 0.0

# Value references, fixed by the builtin descriptions below. The generated C
# code relies on the same numbering.
WT_LEVEL, WT_VALVE, WT_INFLOW, WT_OUTFLOW, WT_INITIAL = 0, 1, 2, 3, 4
CT_LEVEL, CT_VALVE, CT_MIN, CT_MAX = 0, 1, 2, 3


@dataclass(frozen=True)
class WaterTankParams:
    """Tank rates in level-units per second; outflow must exceed inflow."""

    inflow_rate: float = 1.0
    outflow_rate: float = 2.0
    initial_level: float = 1.0

    def __post_init__(self):
        if self.inflow_rate <= 0.0:
            raise ValueError("inflow_rate must be positive")
        if self.outflow_rate <= 0.0:
            raise ValueError("outflow_rate must be positive")
        if self.outflow_rate <= self.inflow_rate:
            raise ValueError("outflow_rate must exceed inflow_rate")
        if self.initial_level < 0.0:
            raise ValueError("initial_level must be non-negative")


@dataclass(frozen=True)
class ControllerParams:
    """Hysteresis thresholds; the minimum must lie strictly below the maximum."""

    min_level: float = 1.0
    max_level: float = 2.0

    def __post_init__(self):
        if not self.min_level < self.max_level:
            raise ValueError("min_level must be strictly below max_level")


def _euler_level(level: float, valve: float, inflow: float, outflow: float, h: float) -> float:
    # Single expression, no reassociation: the C model mirrors it bit for bit.
    nxt = level + h * (inflow - valve * outflow)
    return 0.0 if nxt < 0.0 else nxt


def _hysteresis(level: float, prev_valve: float, min_level: float, max_level: float) -> float:
    if level >= max_level:
        return VALVE_OPEN
    if level <= min_level:
        return VALVE_CLOSED
    return prev_valve


def watertank_step(level: float, valve: float, params: WaterTankParams, h: float) -> float:
    """Advance the tank level one step of size h under the given valve state."""
    if h <= 0.0:
        raise ValueError("step size must be positive")
    if level < 0.0:
        raise ValueError("level must be non-negative")
    return _euler_level(level, valve, params.inflow_rate, params.outflow_rate, h)


def controller_step(level: float, prev_valve: float, params: ControllerParams) -> float:
    """New valve state for the observed level, holding state inside the band."""
    return _hysteresis(level, prev_valve, params.min_level, params.max_level)


def analytic_trace(
    tank: WaterTankParams,
    ctrl: ControllerParams,
    h: float,
    end: float,
    start: float = 0.0,
) -> list[tuple[float, float, float]]:
    """Closed-form replay of the coupled tank/controller recurrence.

    Update order matches the master loop exactly: both instances read the
    other's value from the previous step (Jacobi exchange), rows record the
    values after the step, and the time column is recomputed from the step
    index. The result is bit-identical to an engine run of the demo plan.
    """
    if h <= 0.0:
        raise ValueError("step size must be positive")
    if end < start:
        raise ValueError("end time precedes start time")
    level = tank.initial_level
    valve = VALVE_CLOSED
    rows = [(start, level, valve)]
    for k in range(1, step_count(start, end, h) + 1):
        new_level = watertank_step(level, valve, tank, h)
        new_valve = controller_step(level, valve, ctrl)
        level, valve = new_level, new_valve
        rows.append((time_at(start, k, h), level, valve))
    return rows


def valve_switch_count(trace) -> int:
    """Number of valve transitions in a (time, level, valve) trace."""
    switches = 0
    for prev, cur in zip(trace, trace[1:]):
        if cur[2] != prev[2]:
            switches += 1
    return switches


def build_watertank_description() -> ModelDescription:
    return ModelDescription(
        model_name=WATERTANK_MODEL_NAME,
        variables=(
            ScalarVariable("level", VariableKind.OUTPUT, ValueType.REAL, WT_LEVEL, 1.0),
            ScalarVariable("valve", VariableKind.INPUT, ValueType.BOOLEAN, WT_VALVE, VALVE_CLOSED),
            ScalarVariable("inflowRate", VariableKind.PARAMETER, ValueType.REAL, WT_INFLOW, 1.0),
            ScalarVariable("outflowRate", VariableKind.PARAMETER, ValueType.REAL, WT_OUTFLOW, 2.0),
            ScalarVariable("initialLevel", VariableKind.PARAMETER, ValueType.REAL, WT_INITIAL, 1.0),
        ),
    )


def build_controller_description() -> ModelDescription:
    return ModelDescription(
        model_name=CONTROLLER_MODEL_NAME,
        variables=(
            ScalarVariable("level", VariableKind.INPUT, ValueType.REAL, CT_LEVEL, 0.0),
            ScalarVariable("valve", VariableKind.OUTPUT, ValueType.BOOLEAN, CT_VALVE, VALVE_CLOSED),
            ScalarVariable("minLevel", VariableKind.PARAMETER, ValueType.REAL, CT_MIN, 1.0),
            ScalarVariable("maxLevel", VariableKind.PARAMETER, ValueType.REAL, CT_MAX, 2.0),
        ),
    )


def _watertank_step_fn(values: list, t: float, h: float) -> None:
    values[WT_LEVEL] = _euler_level(
        values[WT_LEVEL], values[WT_VALVE], values[WT_INFLOW], values[WT_OUTFLOW], h
    )


def _watertank_init_fn(values: list) -> None:
    # The level state starts wherever the initialLevel parameter points.
    values[WT_LEVEL] = values[WT_INITIAL]


def _controller_step_fn(values: list, t: float, h: float) -> None:
    values[CT_VALVE] = _hysteresis(
        values[CT_LEVEL], values[CT_VALVE], values[CT_MIN], values[CT_MAX]
    )


def builtin_models() -> dict[str, FmuModel]:
    """Registry of model behaviours keyed by model name."""
    return {
        WATERTANK_MODEL_NAME: FmuModel(
            description=build_watertank_description(),
            step=_watertank_step_fn,
            init=_watertank_init_fn,
        ),
        CONTROLLER_MODEL_NAME: FmuModel(
            description=build_controller_description(),
            step=_controller_step_fn,
        ),
    }
