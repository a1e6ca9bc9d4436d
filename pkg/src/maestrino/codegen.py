"""Export a simulation plan as a self-contained C project, compile it, run it.

The generated `co-sim.c` hard-codes everything the plan fixes: instance
count, wiring indices, column order and step size. Parameter values, the end
time and the output filename stay external and are read from the runtime
file at startup, so exploring a design space re-runs one binary with many
runtime files and never recompiles. Support sources are copied verbatim from
the C runtime package; identical plans regenerate byte-identical projects.
"""

from __future__ import annotations

import hashlib
import os
import shutil
import subprocess
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import maestrino_native

from .errors import CompileError, ConfigurationError, RunError, ToolchainNotFoundError
from .master import SimulationPlan, load_runtime_config, serialize_plan

GENERATED_SOURCE = "co-sim.c"
EXECUTABLE_NAME = "sim.exe" if os.name == "nt" else "sim"

# Model name -> symbol exported by wt_models.h.
_MODEL_SYMBOLS = {
    "singlewatertank-20sim": "WT_WATERTANK_MODEL",
    "watertankcontroller-c": "WT_CONTROLLER_MODEL",
}

_MAKEFILE = """\
.POSIX:
CC = cc
CFLAGS = -std=c11 -O2 -Wall -Wextra -Werror -ffp-contract=off

OBJS = co-sim.o fmi_lite.o rt_config.o rt_csv.o wt_models.o

sim: $(OBJS)
\t$(CC) $(CFLAGS) -o sim $(OBJS) -lm

$(OBJS): fmi_lite.h rt_config.h rt_csv.h wt_models.h

.c.o:
\t$(CC) $(CFLAGS) -c $<

clean:
\trm -f sim $(OBJS)
"""


@dataclass(frozen=True)
class GeneratedProject:
    root: Path
    files: tuple[str, ...]
    fingerprint: str


@dataclass
class ToolchainReport:
    compiler: str
    configure_duration: float
    compile_duration: float
    exit_status: int
    recompile_duration: Optional[float] = None


def plan_fingerprint(plan: SimulationPlan) -> str:
    return hashlib.sha256(serialize_plan(plan).encode("utf-8")).hexdigest()


def _c_double(value: float) -> str:
    """Exact C literal for a binary64 value, with a readable comment."""
    return f"{float(value).hex()} /* {value!r} */"


def _write_if_changed(path: Path, content: str) -> None:
    # Leaving unchanged files untouched keeps their mtimes, so re-exporting
    # a plan only makes the generated translation unit rebuild.
    if path.exists() and path.read_text(encoding="utf-8") == content:
        return
    path.write_text(content, encoding="utf-8")


def export_c_project(plan: SimulationPlan, out_dir: Union[str, Path]) -> GeneratedProject:
    """Emit co-sim.c, the runtime support sources and a portable makefile."""
    for desc in plan.descriptions:
        if desc.model_name not in _MODEL_SYMBOLS:
            raise ConfigurationError(
                f"no native implementation for model {desc.model_name!r}"
            )
    root = Path(out_dir)
    try:
        root.mkdir(parents=True, exist_ok=True)
        files = []
        for name in maestrino_native.SOURCE_FILES:
            source = maestrino_native.source_path(name).read_text(encoding="utf-8")
            _write_if_changed(root / name, source)
            files.append(name)
        _write_if_changed(root / "Makefile", _MAKEFILE)
        files.append("Makefile")
        fingerprint = plan_fingerprint(plan)
        _write_if_changed(root / GENERATED_SOURCE, _emit_master_source(plan, fingerprint))
        files.append(GENERATED_SOURCE)
    except OSError as exc:
        raise RunError(f"cannot write project to {root}: {exc}") from exc
    return GeneratedProject(root=root, files=tuple(files), fingerprint=fingerprint)


def _emit_master_source(plan: SimulationPlan, fingerprint: str) -> str:
    names = plan.instance_names()
    n = len(names)
    columns = plan.resolved_columns()
    lines = [
        "/* Generated fixed-step co-simulation master. Do not edit. */",
        f"/* plan fingerprint: {fingerprint} */",
        "",
        "#include <math.h>",
        "#include <stdio.h>",
        "#include <string.h>",
        "",
        '#include "fmi_lite.h"',
        '#include "rt_config.h"',
        '#include "rt_csv.h"',
        '#include "wt_models.h"',
        "",
        f"#define N_INSTANCES {n}",
        f"#define N_SLOTS {len(plan.parameter_slots)}",
        f"#define N_COLUMNS {len(columns)}",
        "",
        f"static const double START_TIME = {_c_double(plan.start_time)};",
        f"static const double STEP_SIZE = {_c_double(plan.step_size)};",
        f"static const double DEFAULT_END_TIME = {_c_double(plan.end_time)};",
        "",
        "typedef struct {",
        "    const char *key;",
        "    int instance;",
        "    int vr;",
        "    int has_default;",
        "    double dflt;",
        "} param_slot;",
        "",
        "static const param_slot SLOTS[] = {",
    ]
    for slot in plan.parameter_slots:
        has_default = 1 if slot.default is not None else 0
        dflt = _c_double(slot.default if slot.default is not None else 0.0)
        lines.append(
            f'    {{"{slot.key}", {slot.instance}, {slot.value_ref}, {has_default}, {dflt}}},'
        )
    if not plan.parameter_slots:
        lines.append('    {"", -1, -1, 0, 0.0}, /* placeholder, N_SLOTS == 0 */')
    lines += [
        "};",
        "",
        "static int fail_config(const char *msg) {",
        '    fprintf(stderr, "config error: %s\\n", msg);',
        "    return 1;",
        "}",
        "",
        "static int fail_run(const char *msg) {",
        '    fprintf(stderr, "runtime error: %s\\n", msg);',
        "    return 2;",
        "}",
        "",
        "int main(int argc, char **argv) {",
        '    if (argc != 3 || strcmp(argv[1], "-runtime") != 0)',
        '        return fail_config("usage: sim -runtime <file>");',
        "",
        "    rt_config cfg;",
        "    char error[RT_MAX_ERROR];",
        "    if (rt_load_config(argv[2], &cfg, error) != 0)",
        "        return fail_config(error);",
        "",
        "    double end_time = cfg.has_end_time ? cfg.end_time : DEFAULT_END_TIME;",
        "    if (end_time < START_TIME)",
        '        return fail_config("end time precedes start time");',
        "",
    ]

    # Instance declarations in plan (stepping) order.
    for i, (name, model_idx) in enumerate(plan.instances):
        symbol = _MODEL_SYMBOLS[plan.descriptions[model_idx].model_name]
        size = len(plan.descriptions[model_idx].variables)
        lines += [
            f"    double values_{i}[{size}];",
            f"    fl_instance inst_{i};",
            f'    if (FL_API.instantiate(&inst_{i}, &{symbol}, "{name}", values_{i}) != FL_OK)',
            "        return fail_run(fl_last_error());",
        ]
    lines.append("")

    # The plan owns every default, including non-parameters.
    lines.append("    /* defaults fixed by the plan */")
    for i, (_, model_idx) in enumerate(plan.instances):
        for var in plan.descriptions[model_idx].variables:
            if var.default is not None:
                lines.append(f"    values_{i}[{var.value_ref}] = {_c_double(var.default)};")
    lines += [
        "",
        "    /* every runtime key must address a parameter slot */",
        "    for (int p = 0; p < cfg.n_params; ++p) {",
        "        int known = 0;",
        "        for (int s = 0; s < N_SLOTS; ++s)",
        "            if (strcmp(cfg.params[p].key, SLOTS[s].key) == 0)",
        "                known = 1;",
        "        if (!known) {",
        '            fprintf(stderr, "config error: unknown environment variable %s\\n",',
        "                    cfg.params[p].key);",
        "            return 1;",
        "        }",
        "    }",
        "",
        "    fl_instance *instances[N_INSTANCES > 0 ? N_INSTANCES : 1] = {",
    ]
    lines.append("        " + ", ".join(f"&inst_{i}" for i in range(n)))
    lines += [
        "    };",
        "",
        "    /* apply parameters: runtime value, else plan default */",
        "    for (int s = 0; s < N_SLOTS; ++s) {",
        "        double value;",
        "        if (!rt_config_get(&cfg, SLOTS[s].key, &value)) {",
        "            if (!SLOTS[s].has_default) {",
        '                fprintf(stderr, "config error: missing runtime value for '
        'parameter %s (no default)\\n", SLOTS[s].key);',
        "                return 1;",
        "            }",
        "            value = SLOTS[s].dflt;",
        "        }",
        "        if (FL_API.set_real(instances[SLOTS[s].instance], SLOTS[s].vr, value) != FL_OK)",
        "            return fail_run(fl_last_error());",
        "    }",
        "",
    ]
    for i in range(n):
        lines.append(f"    if (fl_initialize(&inst_{i}, START_TIME) != FL_OK)")
        lines.append("        return fail_run(fl_last_error());")
    lines += [
        "",
        "    rt_csv_writer out;",
        "    if (rt_csv_open(&out, cfg.out_filename) != 0)",
        '        return fail_run("cannot open output file");',
        f'    if (rt_csv_header(&out, "{",".join(("time",) + plan.columns)}") != 0)',
        '        return fail_run("cannot write output file");',
        "",
        f"    long n_steps = (long)rint((end_time - START_TIME) / STEP_SIZE);",
        "    double t = START_TIME;",
        "    double row[1 + N_COLUMNS];",
        "",
    ]

    def emit_propagate(indent: str) -> list[str]:
        # Jacobi exchange: sample every source, then set every target.
        block = [indent + "/* exchange: sample all outputs, then set all inputs */"]
        for w_idx, wire in enumerate(plan.wiring):
            block.append(
                f"{indent}if (FL_API.get_real(&inst_{wire.source_instance}, "
                f"{wire.source_ref}, &signal_{w_idx}) != FL_OK) return fail_run(fl_last_error());"
            )
        for w_idx, wire in enumerate(plan.wiring):
            block.append(
                f"{indent}if (FL_API.set_real(&inst_{wire.target_instance}, "
                f"{wire.target_ref}, signal_{w_idx}) != FL_OK) return fail_run(fl_last_error());"
            )
        return block

    def emit_record(indent: str) -> list[str]:
        block = [indent + "row[0] = t;"]
        for c_idx, (inst_idx, vr) in enumerate(columns):
            block.append(
                f"{indent}if (FL_API.get_real(&inst_{inst_idx}, {vr}, &row[{1 + c_idx}]) "
                "!= FL_OK) return fail_run(fl_last_error());"
            )
        block.append(f"{indent}if (rt_csv_row(&out, row, 1 + N_COLUMNS) != 0)")
        block.append(indent + '    return fail_run("cannot write output row");')
        return block

    if plan.wiring:
        lines.append(
            "    double " + ", ".join(f"signal_{i}" for i in range(len(plan.wiring))) + ";"
        )
    lines += emit_propagate("    ")
    lines += emit_record("    ")
    lines += [
        "",
        "    for (long k = 1; k <= n_steps; ++k) {",
    ]
    lines += emit_propagate("        ")
    for i in range(n):
        lines.append(
            f"        if (FL_API.do_step(&inst_{i}, t, STEP_SIZE) != FL_OK) "
            "return fail_run(fl_last_error());"
        )
    lines += [
        "        t = START_TIME + (double)k * STEP_SIZE;",
    ]
    lines += emit_record("        ")
    lines += [
        "    }",
        "",
    ]
    for i in range(n):
        lines.append(f"    if (FL_API.terminate(&inst_{i}) != FL_OK) return fail_run(fl_last_error());")
    lines += [
        "    if (rt_csv_close(&out) != 0)",
        '        return fail_run("cannot finish output file");',
        "    return 0;",
        "}",
        "",
    ]
    return "\n".join(lines)


def find_compiler() -> str:
    env_cc = os.environ.get("CC")
    probed = []
    if env_cc:
        probed.append(env_cc)
        if shutil.which(env_cc):
            return env_cc
    for candidate in ("cc", "gcc", "clang"):
        probed.append(candidate)
        if shutil.which(candidate):
            return candidate
    raise ToolchainNotFoundError(probed)


def _run_make(root: Path, compiler: str) -> subprocess.CompletedProcess:
    return subprocess.run(
        ["make", f"CC={compiler}"],
        cwd=root,
        capture_output=True,
        text=True,
    )


def compile_project(project: GeneratedProject) -> tuple[ToolchainReport, Path]:
    """Build the project; returns the timing report and the executable path."""
    t0 = time.perf_counter()
    compiler = find_compiler()
    configure_duration = time.perf_counter() - t0

    t0 = time.perf_counter()
    proc = _run_make(project.root, compiler)
    compile_duration = time.perf_counter() - t0
    if proc.returncode != 0:
        raise CompileError(
            f"compilation failed in {project.root}",
            diagnostics=proc.stdout + proc.stderr,
        )
    report = ToolchainReport(
        compiler=compiler,
        configure_duration=configure_duration,
        compile_duration=compile_duration,
        exit_status=proc.returncode,
    )
    return report, project.root / EXECUTABLE_NAME


def recompile_generated(project: GeneratedProject) -> float:
    """Touch co-sim.c and rebuild; returns the incremental build duration."""
    generated = project.root / GENERATED_SOURCE
    os.utime(generated)
    compiler = find_compiler()
    t0 = time.perf_counter()
    proc = _run_make(project.root, compiler)
    duration = time.perf_counter() - t0
    if proc.returncode != 0:
        raise CompileError(
            f"recompilation failed in {project.root}",
            diagnostics=proc.stdout + proc.stderr,
        )
    return duration


def run_native(executable: Union[str, Path], rt_file: Union[str, Path]) -> tuple[int, Path]:
    """Run the simulator on a runtime file; returns (exit status, CSV path).

    Relative output filenames resolve against the runtime file's directory,
    matching the engine's loader.
    """
    executable = Path(executable)
    rt_file = Path(rt_file)
    if not executable.is_file():
        raise ConfigurationError(f"no executable at {executable}")
    rt = load_runtime_config(rt_file)
    if not rt.data_writers:
        raise ConfigurationError("runtime config needs at least one data writer")
    csv_path = Path(rt.data_writers[0].filename)
    proc = subprocess.run(
        [str(executable.resolve()), "-runtime", rt_file.name],
        cwd=rt_file.parent,
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise RunError(
            f"native simulator exited with status {proc.returncode}: "
            + (proc.stderr.strip() or proc.stdout.strip())
        )
    return proc.returncode, csv_path
