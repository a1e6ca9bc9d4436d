"""maestrino: fixed-step co-simulation with native code generation and DSE."""

__version__ = "0.1.0"
