"""Exception hierarchy shared across the engine.

Exit-code convention (used by the CLI and the native simulator alike):
0 success, 1 configuration/validation error, 2 runtime error.
"""


class MaestrinoError(Exception):
    """Base class for all engine errors. Maps to exit code 2 unless overridden."""

    exit_code = 2


class ConfigurationError(MaestrinoError):
    """Invalid configuration or input documents. Maps to exit code 1."""

    exit_code = 1


class DescriptionError(ConfigurationError):
    """A model description violates its invariants (duplicate names, sparse refs...)."""


class ValidationError(ConfigurationError):
    """One or more validation failures in a configuration document."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class PlanError(ConfigurationError):
    """A simulation plan document is malformed or inconsistent."""


class MissingParameterError(ConfigurationError):
    """A parameter slot has neither a runtime value nor a default."""

    def __init__(self, key):
        self.key = key
        super().__init__(f"missing runtime value for parameter {key!r} (no default)")


class EmptyDesignSpaceError(ConfigurationError):
    """Constraints eliminated every design point."""


class ToolchainNotFoundError(ConfigurationError):
    """No usable C compiler was found."""

    def __init__(self, probed):
        self.probed = list(probed)
        super().__init__(
            "no C compiler found; probed: " + ", ".join(self.probed)
            + " (set the CC environment variable to override)"
        )


class RunError(MaestrinoError):
    """A co-simulation or external process failed at run time."""


class CompileError(RunError):
    """The C toolchain rejected a generated project."""

    def __init__(self, message, diagnostics=""):
        self.diagnostics = diagnostics
        super().__init__(message + ("\n" + diagnostics if diagnostics else ""))


class ObjectiveError(RunError):
    """An objective function could not produce a score."""


class LifecycleError(MaestrinoError):
    """An operation was called in a state that forbids it."""


class VariableKindError(MaestrinoError):
    """A variable was written in a way its kind forbids."""


class UnknownReferenceError(MaestrinoError):
    """A value reference does not exist in the model description."""


class SynchronizationError(MaestrinoError):
    """do_step was called with a time that disagrees with the instance clock."""
