"""Deterministic TTI-stepped simulator of 5G Mobile Cell deployments."""

from .arch import ArchKind, ArchModel, build_arch, compare_table, crt_check, path_rtt
from .channel import LinkState, Position, RadioConfig
from .config import load_config
from .linkadapt import CqiTable, McsDecision, build_cqi_table
from .sched import Policy, SchedulerKind, UeSchedState
from .sim import ResultRow, ScenarioConfig, ScenarioMode, run_position, run_scenario

__all__ = [
    "ArchKind",
    "ArchModel",
    "CqiTable",
    "LinkState",
    "McsDecision",
    "Policy",
    "Position",
    "RadioConfig",
    "ResultRow",
    "ScenarioConfig",
    "ScenarioMode",
    "SchedulerKind",
    "UeSchedState",
    "build_arch",
    "build_cqi_table",
    "compare_table",
    "crt_check",
    "load_config",
    "path_rtt",
    "run_position",
    "run_scenario",
]
