"""C runtime support sources linked into every generated simulator.

The .c/.h files in this directory are the hand-written half of a generated
project: a minimal runtime-config reader, a bit-exact CSV number formatter
and the built-in model implementations. They are shipped as package data so
the code generator can copy them next to the generated master source.
"""

from importlib import resources
from pathlib import Path

SOURCE_FILES = (
    "fmi_lite.h",
    "fmi_lite.c",
    "rt_config.h",
    "rt_config.c",
    "rt_csv.h",
    "rt_csv.c",
    "wt_models.h",
    "wt_models.c",
)


def source_dir() -> Path:
    """Directory holding the C runtime sources."""
    return Path(resources.files(__package__))


def source_path(name: str) -> Path:
    if name not in SOURCE_FILES:
        raise KeyError(f"unknown native source {name!r}")
    return source_dir() / name
