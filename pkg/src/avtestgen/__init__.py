"""Agent-directed test generation for a grid-world autonomous-vehicle testbench."""

__version__ = "0.1.0"
