"""Scenarios, configuration, output files and the command-line interface."""

from .config import ParseError, ValidationError, parse_config, parse_config_text
from .runner import RunFailure, RunOutput, Simulation, run, simulate, summarize
from .scenarios import PRESET_NAMES, Scenario, UnknownScenario, build_initial, expand, preset

__all__ = [
    "PRESET_NAMES",
    "ParseError",
    "RunFailure",
    "RunOutput",
    "Scenario",
    "Simulation",
    "UnknownScenario",
    "ValidationError",
    "build_initial",
    "expand",
    "parse_config",
    "parse_config_text",
    "preset",
    "run",
    "simulate",
    "summarize",
]
