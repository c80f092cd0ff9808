"""Dolev-Yao channel and scripted attack scenarios."""

from .channel import (DELIVER, DROP, FORGERS, Action, ActionKind, AdversarialChannel,
                      ScriptExhausted, flip_bits, inject, modify, parse_action, parse_script,
                      replay)
from .scenarios import (REPORT_VERSION, AttackScenario, ScenarioError, ScenarioReport, Step,
                        StepReport, builtin_scenarios, copy_server, dumps_scenario, get_scenario,
                        load_scenario_file, loads_scenario, run_scenario, scenario_names)

__all__ = [name for name in dir() if not name.startswith("_")]
