import json

import pytest

from maestrino import master, models, multimodel
from maestrino.errors import (
    ConfigurationError,
    MissingParameterError,
    PlanError,
    RunError,
)
from maestrino.models import ControllerParams, WaterTankParams, analytic_trace
from tests.conftest import DEMO_MM, demo_coe_config, demo_mm_config


def rt_to(tmp_path, name="out.csv", **kwargs):
    return master.RuntimeConfig(
        data_writers=[master.DataWriterSpec(str(tmp_path / name))], **kwargs
    )


class TestBuildPlan:
    def test_demo_shape(self, demo_plan):
        assert demo_plan.instance_names() == ("crtlInstance", "wtInstance")
        assert len(demo_plan.wiring) == 2
        assert [s.key for s in demo_plan.parameter_slots] == [
            "crtlInstance.minLevel",
            "crtlInstance.maxLevel",
            "wtInstance.inflowRate",
            "wtInstance.outflowRate",
            "wtInstance.initialLevel",
        ]
        assert demo_plan.columns == ("wtInstance.level", "crtlInstance.valve")

    def test_mm_parameters_become_slot_defaults(self, demo_plan):
        defaults = demo_plan.default_parameters()
        assert defaults["crtlInstance.minLevel"] == 1.0
        assert defaults["crtlInstance.maxLevel"] == 2.0

    def test_no_parameters_means_no_slots(self, tmp_path):
        desc = {
            "modelName": "bare-source",
            "variables": [{"name": "out", "kind": "output", "type": "real",
                           "valueReference": 0, "default": 0.0}],
        }
        (tmp_path / "bare.json").write_text(json.dumps(desc))
        doc = {
            "fmus": {"bare": str(tmp_path / "bare.json")},
            "instances": {"a": "bare"},
            "connections": [],
            "parameters": {},
        }
        mm = multimodel.parse_multimodel(json.dumps(doc))
        plan = master.build_plan(mm, demo_coe_config())
        assert plan.parameter_slots == ()

    def test_serialization_round_trip(self, demo_plan):
        assert master.parse_plan(master.serialize_plan(demo_plan)) == demo_plan


class TestPlanDocument:
    def test_unknown_field_named_in_error(self, demo_plan):
        doc = json.loads(master.serialize_plan(demo_plan))
        doc["surprise"] = 1
        with pytest.raises(PlanError, match="surprise"):
            master.parse_plan(json.dumps(doc))

    def test_missing_field_named_in_error(self, demo_plan):
        doc = json.loads(master.serialize_plan(demo_plan))
        del doc["wiring"]
        with pytest.raises(PlanError, match="wiring"):
            master.parse_plan(json.dumps(doc))

    def test_truncated_document(self, demo_plan):
        text = master.serialize_plan(demo_plan)
        with pytest.raises(PlanError, match="not valid JSON"):
            master.parse_plan(text[: len(text) // 2])

    def test_wiring_index_out_of_range(self, demo_plan):
        doc = json.loads(master.serialize_plan(demo_plan))
        doc["wiring"][0]["sourceInstance"] = 7
        with pytest.raises(PlanError, match="out of range"):
            master.parse_plan(json.dumps(doc))

    def test_column_must_be_output_or_local(self, demo_plan):
        doc = json.loads(master.serialize_plan(demo_plan))
        doc["columns"] = ["wtInstance.inflowRate"]
        with pytest.raises(PlanError, match="output or local"):
            master.parse_plan(json.dumps(doc))


class TestInterpret:
    def test_demo_run_shape(self, demo_plan, tmp_path):
        table = master.interpret_plan(demo_plan, rt_to(tmp_path))
        assert len(table.rows) == 601
        assert table.header == ("time", "wtInstance.level", "crtlInstance.valve")

    def test_end_equals_start(self, demo_mm, tmp_path):
        plan = master.build_plan(demo_mm, demo_coe_config(end_time=0.0))
        table = master.interpret_plan(plan, rt_to(tmp_path))
        assert len(table.rows) == 1
        assert table.rows[0] == (0.0, 1.0, 0.0)

    def test_matches_oracle_bit_for_bit(self, demo_plan, tmp_path):
        table = master.interpret_plan(demo_plan, rt_to(tmp_path))
        trace = analytic_trace(WaterTankParams(), ControllerParams(), 0.1, 60.0)
        assert [tuple(r) for r in table.rows] == trace

    def test_missing_parameter_names_key(self, demo_plan, tmp_path):
        doc = json.loads(master.serialize_plan(demo_plan))
        for slot in doc["parameterSlots"]:
            if slot["key"] == "crtlInstance.minLevel":
                slot["default"] = None
        plan = master.parse_plan(json.dumps(doc))
        with pytest.raises(MissingParameterError, match="crtlInstance.minLevel"):
            master.interpret_plan(plan, rt_to(tmp_path))

    def test_unknown_environment_variable_rejected(self, demo_plan, tmp_path):
        rt = rt_to(tmp_path, environment_variables={"ghost.key": 1.0})
        with pytest.raises(ConfigurationError, match="ghost.key"):
            master.interpret_plan(demo_plan, rt)

    def test_needs_a_data_writer(self, demo_plan):
        with pytest.raises(ConfigurationError, match="data writer"):
            master.interpret_plan(demo_plan, master.RuntimeConfig())

    def test_deterministic_bytes(self, demo_plan, tmp_path):
        master.interpret_plan(demo_plan, rt_to(tmp_path, "a.csv"))
        master.interpret_plan(demo_plan, rt_to(tmp_path, "b.csv"))
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()

    def test_parameter_externalization_changes_trace(self, demo_plan, tmp_path):
        base = master.interpret_plan(demo_plan, rt_to(tmp_path, "base.csv"))
        rt = rt_to(
            tmp_path,
            "moved.csv",
            environment_variables={
                "crtlInstance.minLevel": 0.5,
                "crtlInstance.maxLevel": 1.5,
            },
        )
        moved = master.interpret_plan(demo_plan, rt)
        assert moved.rows != base.rows
        expected = analytic_trace(WaterTankParams(), ControllerParams(0.5, 1.5), 0.1, 60.0)
        assert [tuple(r) for r in moved.rows] == expected

    def test_end_time_override_supersedes_plan(self, demo_plan, tmp_path):
        table = master.interpret_plan(demo_plan, rt_to(tmp_path, end_time=10.0))
        assert len(table.rows) == 101

    def test_initial_level_parameter_applies(self, demo_plan, tmp_path):
        rt = rt_to(tmp_path, environment_variables={"wtInstance.initialLevel": 0.3})
        table = master.interpret_plan(demo_plan, rt)
        assert table.rows[0][1] == 0.3

    @pytest.mark.parametrize("h", [0.01, 0.1, 0.5])
    @pytest.mark.parametrize("end", [1.0, 10.0, 100.0])
    def test_step_count_law(self, h, end, demo_mm, tmp_path):
        plan = master.build_plan(demo_mm, demo_coe_config(step_size=h, end_time=end))
        table = master.interpret_plan(plan, rt_to(tmp_path))
        assert len(table.rows) == round(end / h) + 1

    def test_unregistered_model_rejected(self, tmp_path):
        desc = {
            "modelName": "mystery",
            "variables": [{"name": "out", "kind": "output", "type": "real",
                           "valueReference": 0, "default": 0.0}],
        }
        (tmp_path / "m.json").write_text(json.dumps(desc))
        doc = {
            "fmus": {"m": str(tmp_path / "m.json")},
            "instances": {"a": "m"},
            "connections": [],
            "parameters": {},
        }
        mm = multimodel.parse_multimodel(json.dumps(doc))
        plan = master.build_plan(mm, demo_coe_config())
        with pytest.raises(ConfigurationError, match="mystery"):
            master.interpret_plan(plan, rt_to(tmp_path))


class TestFormatReal:
    @pytest.mark.parametrize(
        "value,expected",
        [
            (1.0, "1.0"),
            (-1.0, "-1.0"),
            (0.0, "0.0"),
            (-0.0, "-0.0"),
            (0.1 + 0.2, "0.30000000000000004"),
            (60.0, "60.0"),
            (1e16, "1e+16"),
            (1e-5, "1e-05"),
        ],
    )
    def test_rendering(self, value, expected):
        assert master.format_real(value) == expected

    def test_never_bare_integers(self):
        assert master.format_real(1.0) != "1"
        for v in (2.0, 100.0, -7.0):
            text = master.format_real(v)
            assert "." in text or "e" in text

    def test_non_finite_rejected(self):
        with pytest.raises(RunError):
            master.format_real(float("nan"))
        with pytest.raises(RunError):
            master.format_real(float("inf"))


class TestCsv:
    def test_empty_rows_gives_header_only(self, tmp_path):
        table = master.ResultsTable(header=("time", "x"), rows=())
        sink = tmp_path / "empty.csv"
        master.csv_write(table, sink)
        assert sink.read_text() == "time,x\n"

    def test_format_and_line_endings(self, tmp_path):
        table = master.ResultsTable(header=("time", "x"), rows=((0.0, 1.0), (0.1, 0.1 + 0.2)))
        sink = tmp_path / "t.csv"
        master.csv_write(table, sink)
        assert sink.read_bytes() == b"time,x\n0.0,1.0\n0.1,0.30000000000000004\n"

    def test_read_back_exact(self, demo_plan, tmp_path):
        table = master.interpret_plan(demo_plan, rt_to(tmp_path, "x.csv"))
        again = master.read_results(tmp_path / "x.csv")
        assert again == table

    def test_write_failure_is_run_error(self, demo_plan, tmp_path):
        rt = master.RuntimeConfig(
            data_writers=[master.DataWriterSpec(str(tmp_path / "no_dir" / "x.csv"))]
        )
        with pytest.raises(RunError, match="cannot write"):
            master.interpret_plan(demo_plan, rt)


class TestRuntimeConfig:
    def test_parse_wire_format(self, tmp_path):
        doc = {
            "environment_variables": {"crtlInstance.minLevel": 0.5},
            "DataWriter": [{"filename": "results.csv", "type": "CSV"}],
            "endTime": 30.0,
        }
        rt = master.parse_runtime_config(json.dumps(doc), base_dir=tmp_path)
        assert rt.environment_variables == {"crtlInstance.minLevel": 0.5}
        assert rt.data_writers[0].filename == str(tmp_path / "results.csv")
        assert rt.end_time == 30.0

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigurationError, match="mystery"):
            master.parse_runtime_config(json.dumps({"mystery": 1}))

    def test_bad_writer_type_rejected(self):
        doc = {"DataWriter": [{"filename": "x", "type": "XML"}]}
        with pytest.raises(ConfigurationError, match="XML"):
            master.parse_runtime_config(json.dumps(doc))

    def test_write_load_round_trip(self, tmp_path):
        rt = master.RuntimeConfig(
            environment_variables={"a.b": 1.5},
            data_writers=[master.DataWriterSpec("results.csv")],
            end_time=12.0,
        )
        path = tmp_path / "rt.json"
        master.write_runtime_config(rt, path)
        loaded = master.load_runtime_config(path)
        assert loaded.environment_variables == rt.environment_variables
        assert loaded.end_time == rt.end_time
        assert loaded.data_writers[0].filename == str(tmp_path / "results.csv")

    def test_absolute_path_not_rebased(self, tmp_path):
        doc = {"DataWriter": [{"filename": "/abs/results.csv", "type": "CSV"}]}
        rt = master.parse_runtime_config(json.dumps(doc), base_dir=tmp_path)
        assert rt.data_writers[0].filename == "/abs/results.csv"


def test_columns_follow_mm_declaration_order():
    doc = json.loads(json.dumps(DEMO_MM))
    doc["instances"] = {"crtlInstance": "controller", "wtInstance": "tank"}
    mm = multimodel.parse_multimodel(json.dumps(doc))
    plan = master.build_plan(mm, demo_coe_config())
    assert plan.columns == ("crtlInstance.valve", "wtInstance.level")
