"""Workbench for program schemas, loop separation, dependence analysis,
ring simulations, set-definition systems and dynamic process systems."""

__version__ = "0.1.0"
