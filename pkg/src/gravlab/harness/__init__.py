"""Configuration, scenario dispatch, records and the command line."""
from .config import ScenarioConfig, build_config, load_config
from .records import Observable, ResultRecord, emit, parse_jsonl
from .scenarios import run_scenario, summary_table

__all__ = ["ScenarioConfig", "build_config", "load_config", "Observable", "ResultRecord", "emit",
           "parse_jsonl", "run_scenario", "summary_table"]
