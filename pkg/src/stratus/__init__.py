"""Deterministic discrete-event cloud datacenter simulator.

Models datacenters, hosts, VMs, brokers and cloudlets; schedules
cloudlets time- or space-shared inside VMs; places VMs across hosts and
providers; accounts cost, energy and migrations; and exposes a
scenario-driven CLI. Hot progress kernels run from a compiled extension
when available, with a pure-Python fallback selected at import.
"""

from .backend import backend_name
from .engine import (Entity, Event, EventTag, Phase, RoutingError, Simulation,
                     SimulationError, UsageError)
from .entities import (Broker, Cloudlet, CloudletStatus, CONTROL_HOP, Datacenter,
                       DatacenterCharacteristics, Host, InformationService, Pe,
                       PeStatus, PriceVector, Vm)
from .metrics import (CloudletRecord, EmptyMetricError, SimulationReport,
                      average_execution_time, build_report, completion_rate,
                      render_csv, render_table, total_cost)
from .power import (ConsolidationConfig, PowerModel, UtilizationHistory,
                    integrate_power, lr_predict, mad_threshold, select_vm_mmt)
from .scenario import (ScenarioConfig, ScenarioError, build_simulation,
                       collect_report, parse_scenario, parse_scenario_dict,
                       resolve_config_path, run_scenario, sweep)
from .scheduling import CloudletScheduler, SchedulerPolicy, allocate_host

__version__ = "0.1.0"

__all__ = [
    "Broker", "Cloudlet", "CloudletRecord", "CloudletScheduler", "CloudletStatus",
    "ConsolidationConfig", "CONTROL_HOP", "Datacenter", "DatacenterCharacteristics",
    "EmptyMetricError", "Entity", "Event", "EventTag", "Host", "InformationService",
    "Pe", "PeStatus", "Phase", "PowerModel", "PriceVector", "RoutingError",
    "ScenarioConfig", "ScenarioError", "SchedulerPolicy", "Simulation",
    "SimulationError", "SimulationReport", "UsageError", "UtilizationHistory", "Vm",
    "allocate_host", "average_execution_time", "backend_name", "build_report",
    "build_simulation", "collect_report", "completion_rate", "integrate_power",
    "lr_predict", "mad_threshold", "parse_scenario", "parse_scenario_dict",
    "render_csv", "render_table", "resolve_config_path", "run_scenario",
    "select_vm_mmt", "sweep", "total_cost",
]
