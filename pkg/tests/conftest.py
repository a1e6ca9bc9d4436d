"""Shared fixtures: demo configuration, a compiled native project and the
cross-implementation check tool."""

from __future__ import annotations

import json
import subprocess
from pathlib import Path

import pytest

from maestrino import codegen, master, multimodel

REPO_ROOT = Path(__file__).resolve().parent.parent
NATIVE_DIR = REPO_ROOT / "native"
DEMO_DIR = REPO_ROOT / "demo"

DEMO_MM = {
    "fmus": {
        "tank": "singlewatertank-20sim",
        "controller": "watertankcontroller-c",
    },
    "instances": {"wtInstance": "tank", "crtlInstance": "controller"},
    "connections": [
        {"source": "wtInstance.level", "target": "crtlInstance.level"},
        {"source": "crtlInstance.valve", "target": "wtInstance.valve"},
    ],
    "parameters": {
        "crtlInstance.minLevel": 1.0,
        "crtlInstance.maxLevel": 2.0,
    },
}

DEMO_COE = {
    "algorithm": {"type": "fixed-step", "size": 0.1},
    "startTime": 0.0,
    "endTime": 60.0,
}


def demo_mm_config() -> multimodel.MultiModelConfig:
    return multimodel.parse_multimodel(json.dumps(DEMO_MM))


def demo_coe_config(step_size: float = 0.1, end_time: float = 60.0) -> multimodel.CoSimConfig:
    doc = {
        "algorithm": {"type": "fixed-step", "size": step_size},
        "startTime": 0.0,
        "endTime": end_time,
    }
    return multimodel.parse_cosim_config(json.dumps(doc))


@pytest.fixture
def demo_mm():
    return demo_mm_config()


@pytest.fixture
def demo_coe():
    return demo_coe_config()


@pytest.fixture
def demo_plan(demo_mm, demo_coe):
    return master.build_plan(demo_mm, demo_coe)


@pytest.fixture(scope="session")
def compiled_demo(tmp_path_factory):
    """Demo plan exported and compiled once per session."""
    plan = master.build_plan(demo_mm_config(), demo_coe_config())
    root = tmp_path_factory.mktemp("native_project")
    project = codegen.export_c_project(plan, root)
    _, executable = codegen.compile_project(project)
    return plan, project, executable


@pytest.fixture(scope="session")
def crosscheck_tool(tmp_path_factory):
    """The native crosscheck binary, built from the C runtime package."""
    subprocess.run(
        ["make", "crosscheck"], cwd=NATIVE_DIR, check=True, capture_output=True
    )
    return NATIVE_DIR / "crosscheck"
