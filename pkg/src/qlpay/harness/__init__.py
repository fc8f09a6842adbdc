"""Execution environment: scenarios, adaptive corruption, bookkeeping and fuzzing."""

from qlpay.harness.fuzz import FuzzReport, Grammar, fuzz, generate_script, shrink, trial_scenario, violates
from qlpay.harness.scenario import (
    AdvanceTime,
    AdversaryAction,
    Corrupt,
    HonestAction,
    Invoke,
    Scenario,
    ScenarioError,
    Uncorrupt,
    parse_scenario,
    validate,
)
from qlpay.harness.security import SecurityLedger, Trace, TraceRecord, max_net_value
from qlpay.harness.sim import ADVERSARY, Simulation, run_scenario
