import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maestrino import models
from maestrino.errors import (
    DescriptionError,
    LifecycleError,
    SynchronizationError,
    UnknownReferenceError,
    VariableKindError,
)
from maestrino.fmu_core import (
    InstanceState,
    ModelDescription,
    ScalarVariable,
    ValueType,
    VariableKind,
    instantiate,
    step_count,
)


def two_vars(name_a="x", name_b="y", ref_b=1):
    return (
        ScalarVariable(name_a, VariableKind.OUTPUT, ValueType.REAL, 0, 0.0),
        ScalarVariable(name_b, VariableKind.INPUT, ValueType.REAL, ref_b, 0.0),
    )


class TestModelDescription:
    def test_duplicate_names_rejected(self):
        with pytest.raises(DescriptionError, match="duplicate variable name"):
            ModelDescription("i", two_vars("x", "x"))

    def test_sparse_value_refs_rejected(self):
        with pytest.raises(DescriptionError, match="dense"):
            ModelDescription("m", two_vars(ref_b=2))

    def test_empty_variables_rejected(self):
        with pytest.raises(DescriptionError, match="at least one"):
            ModelDescription("m", ())

    def test_parameter_needs_default(self):
        var = ScalarVariable("p", VariableKind.PARAMETER, ValueType.REAL, 0, None)
        with pytest.raises(DescriptionError, match="no default"):
            ModelDescription("m", (var,))

    def test_json_round_trip(self):
        desc = models.build_watertank_description()
        assert ModelDescription.from_json(desc.to_json()) == desc

    def test_json_field_names(self):
        doc = models.build_controller_description().to_json()
        assert set(doc) == {"modelName", "variables"}
        assert set(doc["variables"][0]) <= {"name", "kind", "type", "valueReference", "default"}

    def test_unknown_field_rejected(self):
        doc = models.build_controller_description().to_json()
        doc["extra"] = 1
        with pytest.raises(DescriptionError, match="extra"):
            ModelDescription.from_json(doc)

    def test_bad_json_text(self):
        with pytest.raises(DescriptionError, match="not valid JSON"):
            ModelDescription.from_json_text("{nope")


class TestInstantiate:
    def test_watertank_defaults(self):
        handle = instantiate(models.builtin_models()[models.WATERTANK_MODEL_NAME], "wtInstance")
        assert handle.get_value(models.WT_LEVEL) == 1.0
        assert handle.state is InstanceState.INSTANTIATED

    def test_controller_defaults(self):
        handle = instantiate(models.builtin_models()[models.CONTROLLER_MODEL_NAME], "crtlInstance")
        assert handle.get_value(models.CT_VALVE) == 0.0

    def test_invalid_instance_name(self):
        model = models.builtin_models()[models.WATERTANK_MODEL_NAME]
        with pytest.raises(ValueError):
            instantiate(model, "")
        with pytest.raises(ValueError):
            instantiate(model, "not a name")


@pytest.fixture
def tank():
    return instantiate(models.builtin_models()[models.WATERTANK_MODEL_NAME], "wt")


class TestSetGet:
    def test_parameter_round_trip_before_init(self, tank):
        tank.set_value(models.WT_INFLOW, 1.0)
        assert tank.get_value(models.WT_INFLOW) == 1.0

    def test_set_output_rejected(self, tank):
        with pytest.raises(VariableKindError):
            tank.set_value(models.WT_LEVEL, 2.0)

    def test_parameter_frozen_after_first_step(self, tank):
        tank.initialize()
        tank.do_step(0.0, 0.1)
        with pytest.raises(LifecycleError):
            tank.set_value(models.WT_OUTFLOW, 3.0)

    def test_input_settable_between_steps(self, tank):
        tank.initialize()
        tank.do_step(0.0, 0.1)
        tank.set_value(models.WT_VALVE, 1.0)
        assert tank.get_value(models.WT_VALVE) == 1.0

    def test_boolean_rejects_other_values(self, tank):
        with pytest.raises(VariableKindError):
            tank.set_value(models.WT_VALVE, 0.5)

    def test_unknown_reference(self, tank):
        with pytest.raises(UnknownReferenceError):
            tank.get_value(99)
        with pytest.raises(UnknownReferenceError):
            tank.set_value(99, 0.0)


class TestDoStep:
    def test_euler_step(self, tank):
        tank.initialize()
        tank.do_step(0.0, 0.1)
        # closed valve: level + h * inflow, computed by the closed form
        assert tank.get_value(models.WT_LEVEL) == 1.0 + 0.1 * (1.0 - 0.0 * 2.0)

    def test_zero_step_size_rejected(self, tank):
        tank.initialize()
        with pytest.raises(ValueError):
            tank.do_step(0.0, 0.0)

    def test_time_mismatch_rejected(self, tank):
        tank.initialize()
        with pytest.raises(SynchronizationError):
            tank.do_step(0.5, 0.1)

    def test_step_before_initialize_rejected(self, tank):
        with pytest.raises(LifecycleError):
            tank.do_step(0.0, 0.1)

    def test_step_after_terminate_rejected(self, tank):
        tank.initialize()
        tank.terminate()
        with pytest.raises(LifecycleError):
            tank.do_step(0.0, 0.1)


class TestLifecycle:
    def test_double_terminate(self, tank):
        tank.terminate()
        with pytest.raises(LifecycleError):
            tank.terminate()

    def test_get_after_terminate(self, tank):
        tank.terminate()
        with pytest.raises(LifecycleError):
            tank.get_value(models.WT_LEVEL)

    def test_double_initialize(self, tank):
        tank.initialize()
        with pytest.raises(LifecycleError):
            tank.initialize()

    def test_forbidden_transition_leaves_state_unchanged(self, tank):
        with pytest.raises(LifecycleError):
            tank.do_step(0.0, 0.1)
        assert tank.state is InstanceState.INSTANTIATED
        tank.initialize()
        with pytest.raises(SynchronizationError):
            tank.do_step(1.0, 0.1)
        assert tank.state is InstanceState.INITIALIZED
        assert tank.current_time == 0.0


@given(
    h=st.sampled_from([0.01, 0.1, 0.5, 1.0 / 3.0]),
    steps=st.integers(min_value=1, max_value=500),
    start=st.sampled_from([0.0, 1.0, 2.5]),
)
@settings(max_examples=60, deadline=None)
def test_clock_tracks_step_grid(h, steps, start):
    tank = instantiate(models.builtin_models()[models.WATERTANK_MODEL_NAME], "wt")
    tank.initialize(start)
    for _ in range(steps):
        tank.do_step(tank.current_time, h)
    assert abs(tank.current_time - (start + steps * h)) <= 1e-12 * steps


@given(value=st.floats(allow_nan=False, allow_infinity=False))
@settings(max_examples=200, deadline=None)
def test_set_get_bit_exact(value):
    tank = instantiate(models.builtin_models()[models.WATERTANK_MODEL_NAME], "wt")
    tank.set_value(models.WT_INFLOW, value)
    got = tank.get_value(models.WT_INFLOW)
    assert got == value or (math.isnan(got) and math.isnan(value))
    assert math.copysign(1.0, got) == math.copysign(1.0, value)


class TestStepCount:
    @pytest.mark.parametrize(
        "start,end,h,expected",
        [
            (0.0, 60.0, 0.1, 600),
            (0.0, 0.0, 0.1, 0),
            (0.0, 1.0, 0.01, 100),
            (0.0, 1000.0, 0.01, 100000),
            (2.0, 3.0, 0.5, 2),
        ],
    )
    def test_grid(self, start, end, h, expected):
        assert step_count(start, end, h) == expected

    def test_rejects_bad_inputs(self):
        with pytest.raises(ValueError):
            step_count(0.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            step_count(1.0, 0.0, 0.1)
