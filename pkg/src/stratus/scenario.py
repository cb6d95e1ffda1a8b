"""Scenario ingestion and experiment execution.

Scenarios are JSON documents naming datacenters (hosts plus pricing),
a VM fleet, a cloudlet batch and optional consolidation settings. Two
golden scenarios ship with the package (``scenario_a``, ``scenario_b``)
along with ``sweep_base`` for the VM-count sweep.
"""

from __future__ import annotations

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any, Callable, Optional

from .backend import backend_name
from .engine import Simulation
from .entities import (Broker, Cloudlet, Datacenter, DatacenterCharacteristics,
                       Host, PriceVector, Vm)
from .metrics import SimulationReport, build_report
from .power import ConsolidationConfig, PowerModel
from .scheduling import SchedulerPolicy

log = logging.getLogger(__name__)

BUNDLED_SCENARIOS = ("scenario_a", "scenario_b", "sweep_base")


class ScenarioError(ValueError):
    """Configuration rejected; the message names the offending key."""


@dataclass(frozen=True)
class HostSpec:
    pe_count: int
    mips: float
    ram: int
    bw: int
    storage: int
    vm_scheduler: str = "space_shared"
    power: Optional[PowerModel] = None


@dataclass(frozen=True)
class DatacenterSpec:
    hosts: tuple[HostSpec, ...]
    characteristics: DatacenterCharacteristics = field(default_factory=DatacenterCharacteristics)
    vm_allocation: str = "most_free_pes"


@dataclass(frozen=True)
class VmFleetSpec:
    count: int
    mips: float = 1000.0
    pe_count: int = 1
    ram: int = 512
    bw: int = 1000
    image_size: int = 10000
    vmm: str = "Xen"
    scheduler: str = "time_shared"


@dataclass(frozen=True)
class CloudletBatchSpec:
    count: int
    length: float = 1000.0
    file_size: int = 300
    output_size: int = 300


@dataclass(frozen=True)
class OutputSpec:
    format: str = "table"
    paths: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True)
class ScenarioConfig:
    datacenters: tuple[DatacenterSpec, ...]
    vms: VmFleetSpec
    cloudlets: CloudletBatchSpec
    power: Optional[ConsolidationConfig] = None
    outputs: OutputSpec = field(default_factory=OutputSpec)

    def to_dict(self) -> dict:
        """Emit the JSON form; parse_scenario_dict round-trips it."""
        out: dict[str, Any] = {"datacenters": []}
        for dc in self.datacenters:
            hosts = []
            for h in dc.hosts:
                entry: dict[str, Any] = {"pe_count": h.pe_count, "mips": h.mips, "ram": h.ram,
                                         "bw": h.bw, "storage": h.storage,
                                         "vm_scheduler": h.vm_scheduler}
                if h.power is not None:
                    entry["power"] = {"p_idle": h.power.p_idle, "p_max": h.power.p_max}
                hosts.append(entry)
            ch = dc.characteristics
            out["datacenters"].append({
                "hosts": hosts,
                "characteristics": {
                    "arch": ch.arch, "os": ch.os, "vmm": ch.vmm, "time_zone": ch.time_zone,
                    "prices": {"per_cpu_second": ch.prices.per_cpu_second,
                               "per_mem_unit": ch.prices.per_mem_unit,
                               "per_storage_unit": ch.prices.per_storage_unit,
                               "per_bw_unit": ch.prices.per_bw_unit}},
                "vm_allocation": dc.vm_allocation})
        out["vms"] = dataclasses.asdict(self.vms)
        out["cloudlets"] = dataclasses.asdict(self.cloudlets)
        if self.power is not None:
            out["power"] = dataclasses.asdict(self.power)
        out["outputs"] = {"format": self.outputs.format, "paths": dict(self.outputs.paths)}
        return out


# -- validation helpers ---------------------------------------------------------


def _expect_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise ScenarioError(f"{path}: expected an object, got {value!r}")
    return value


def _expect_list(value, path: str) -> list:
    if not isinstance(value, list):
        raise ScenarioError(f"{path}: expected a list, got {value!r}")
    return value


def _number(data: dict, key: str, path: str, default=None, positive=False,
            nonnegative=False, integral=False):
    if key not in data:
        if default is None:
            raise ScenarioError(f"{path}.{key}: required key missing")
        return default
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{path}.{key}: expected a number, got {value!r}")
    if integral and int(value) != value:
        raise ScenarioError(f"{path}.{key}: expected an integer, got {value!r}")
    if positive and value <= 0:
        raise ScenarioError(f"{path}.{key}: expected a positive value, got {value!r}")
    if nonnegative and value < 0:
        raise ScenarioError(f"{path}.{key}: expected a nonnegative value, got {value!r}")
    return int(value) if integral else float(value)


def _string(data: dict, key: str, path: str, default=None, allowed=None) -> str:
    value = data.get(key, default)
    if value is None:
        raise ScenarioError(f"{path}.{key}: required key missing")
    if not isinstance(value, str):
        raise ScenarioError(f"{path}.{key}: expected a string, got {value!r}")
    if allowed is not None and value not in allowed:
        raise ScenarioError(f"{path}.{key}: expected one of {sorted(allowed)}, got {value!r}")
    return value


def _parse_host(data, path: str) -> HostSpec:
    data = _expect_mapping(data, path)
    power = None
    if data.get("power") is not None:
        pdata = _expect_mapping(data["power"], f"{path}.power")
        p_idle = _number(pdata, "p_idle", f"{path}.power", nonnegative=True)
        p_max = _number(pdata, "p_max", f"{path}.power", nonnegative=True)
        if p_idle > p_max:
            raise ScenarioError(f"{path}.power: p_idle {p_idle} exceeds p_max {p_max}")
        power = PowerModel(p_idle, p_max)
    return HostSpec(
        pe_count=_number(data, "pe_count", path, positive=True, integral=True),
        mips=_number(data, "mips", path, default=1000.0, positive=True),
        ram=_number(data, "ram", path, nonnegative=True, integral=True),
        bw=_number(data, "bw", path, nonnegative=True, integral=True),
        storage=_number(data, "storage", path, nonnegative=True, integral=True),
        vm_scheduler=_string(data, "vm_scheduler", path, default="space_shared",
                             allowed={"time_shared", "space_shared"}),
        power=power)


def _parse_prices(data, path: str) -> PriceVector:
    data = _expect_mapping(data, path)
    return PriceVector(
        per_cpu_second=_number(data, "per_cpu_second", path, default=0.0, nonnegative=True),
        per_mem_unit=_number(data, "per_mem_unit", path, default=0.0, nonnegative=True),
        per_storage_unit=_number(data, "per_storage_unit", path, default=0.0, nonnegative=True),
        per_bw_unit=_number(data, "per_bw_unit", path, default=0.0, nonnegative=True))


def _parse_datacenter(data, path: str) -> DatacenterSpec:
    data = _expect_mapping(data, path)
    hosts = _expect_list(data.get("hosts", []), f"{path}.hosts")
    if not hosts:
        raise ScenarioError(f"{path}.hosts: at least one host required")
    chdata = _expect_mapping(data.get("characteristics", {}), f"{path}.characteristics")
    prices = _parse_prices(chdata.get("prices", {}), f"{path}.characteristics.prices")
    characteristics = DatacenterCharacteristics(
        arch=_string(chdata, "arch", f"{path}.characteristics", default="x86"),
        os=_string(chdata, "os", f"{path}.characteristics", default="Windows"),
        vmm=_string(chdata, "vmm", f"{path}.characteristics", default="Xen"),
        time_zone=_number(chdata, "time_zone", f"{path}.characteristics", default=0.0),
        prices=prices)
    return DatacenterSpec(
        hosts=tuple(_parse_host(h, f"{path}.hosts[{i}]") for i, h in enumerate(hosts)),
        characteristics=characteristics,
        vm_allocation=_string(data, "vm_allocation", path, default="most_free_pes",
                              allowed={"most_free_pes"}))


def _parse_power(data, path: str) -> ConsolidationConfig:
    data = _expect_mapping(data, path)
    detector = _string(data, "detector", path, default="mad", allowed={"mad", "lr"})
    try:
        return ConsolidationConfig(
            detector=detector,
            mad_s=_number(data, "mad_s", path, default=2.5, positive=True),
            lr_safety=_number(data, "lr_safety", path, default=1.2),
            lr_window=_number(data, "lr_window", path, default=10, integral=True),
            selector=_string(data, "selector", path, default="mmt", allowed={"mmt"}),
            epoch=_number(data, "epoch", path, default=300.0, positive=True))
    except ValueError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc


def parse_scenario_dict(data: dict, source: str = "scenario") -> ScenarioConfig:
    data = _expect_mapping(data, source)
    known = {"datacenters", "vms", "cloudlets", "power", "outputs"}
    for key in data:
        if key not in known:
            raise ScenarioError(f"{source}.{key}: unknown key")
    dcs = _expect_list(data.get("datacenters", []), f"{source}.datacenters")
    datacenters = tuple(_parse_datacenter(dc, f"{source}.datacenters[{i}]")
                        for i, dc in enumerate(dcs))
    vmdata = _expect_mapping(data.get("vms", {}), f"{source}.vms")
    vms = VmFleetSpec(
        count=_number(vmdata, "count", f"{source}.vms", nonnegative=True, integral=True),
        mips=_number(vmdata, "mips", f"{source}.vms", default=1000.0, positive=True),
        pe_count=_number(vmdata, "pe_count", f"{source}.vms", default=1, positive=True, integral=True),
        ram=_number(vmdata, "ram", f"{source}.vms", default=512, nonnegative=True, integral=True),
        bw=_number(vmdata, "bw", f"{source}.vms", default=1000, nonnegative=True, integral=True),
        image_size=_number(vmdata, "image_size", f"{source}.vms", default=10000,
                           nonnegative=True, integral=True),
        vmm=_string(vmdata, "vmm", f"{source}.vms", default="Xen"),
        scheduler=_string(vmdata, "scheduler", f"{source}.vms", default="time_shared",
                          allowed={"time_shared", "space_shared"}))
    cldata = _expect_mapping(data.get("cloudlets", {}), f"{source}.cloudlets")
    cloudlets = CloudletBatchSpec(
        count=_number(cldata, "count", f"{source}.cloudlets", nonnegative=True, integral=True),
        length=_number(cldata, "length", f"{source}.cloudlets", default=1000.0, positive=True),
        file_size=_number(cldata, "file_size", f"{source}.cloudlets", default=300,
                          nonnegative=True, integral=True),
        output_size=_number(cldata, "output_size", f"{source}.cloudlets", default=300,
                            nonnegative=True, integral=True))
    power = None
    if data.get("power") is not None:
        power = _parse_power(data["power"], f"{source}.power")
    outdata = _expect_mapping(data.get("outputs", {}), f"{source}.outputs")
    outputs = OutputSpec(
        format=_string(outdata, "format", f"{source}.outputs", default="table",
                       allowed={"table", "csv"}),
        paths=tuple(sorted(_expect_mapping(outdata.get("paths", {}),
                                           f"{source}.outputs.paths").items())))
    return ScenarioConfig(datacenters, vms, cloudlets, power, outputs)


def bundled_scenario_path(name: str) -> Path:
    return Path(str(resources.files("stratus") / "scenarios" / f"{name}.json"))


def resolve_config_path(value: str) -> Path:
    """Accept a filesystem path or the bare name of a bundled scenario."""
    path = Path(value)
    if path.exists():
        return path
    if value in BUNDLED_SCENARIOS:
        return bundled_scenario_path(value)
    raise ScenarioError(f"config: no such file or bundled scenario {value!r}")


def parse_scenario(path) -> ScenarioConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ScenarioError(f"config: cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"config: {path} is not valid JSON: {exc}") from exc
    return parse_scenario_dict(data, source=path.name)


# -- execution ----------------------------------------------------------------


def build_simulation(config: ScenarioConfig, trace: Optional[Callable[[str], None]] = None):
    """Wire entities for one run; returns (sim, datacenters, broker,
    vms, cloudlets) so callers can pause/resume before collecting."""
    sim = Simulation(trace=trace)
    datacenters = []
    for dc_spec in config.datacenters:
        hosts = [Host(i, spec.pe_count, spec.mips, spec.ram, spec.bw, spec.storage,
                      SchedulerPolicy(spec.vm_scheduler), spec.power)
                 for i, spec in enumerate(dc_spec.hosts)]
        datacenters.append(Datacenter(sim, hosts, dc_spec.characteristics,
                                      dc_spec.vm_allocation, config.power))
    broker = Broker(sim)
    vms = [Vm(i, broker.id, config.vms.mips, config.vms.pe_count, config.vms.ram,
              config.vms.bw, config.vms.image_size, config.vms.vmm,
              SchedulerPolicy(config.vms.scheduler))
           for i in range(config.vms.count)]
    cloudlets = [Cloudlet(i, config.cloudlets.length, config.cloudlets.file_size,
                          config.cloudlets.output_size)
                 for i in range(config.cloudlets.count)]
    broker.submit_vm_list(vms)
    broker.submit_cloudlet_list(cloudlets)
    return sim, datacenters, broker, vms, cloudlets


def collect_report(sim: Simulation, datacenters: list[Datacenter], broker: Broker,
                   vms: list[Vm], cloudlets: list[Cloudlet]) -> SimulationReport:
    characteristics = {dc.id: dc.characteristics for dc in datacenters}
    energy = sum(host.energy_joules for dc in datacenters for host in dc.hosts)
    modeled = [host for dc in datacenters for host in dc.hosts if host.power_model is not None]
    unmodeled = [host for dc in datacenters for host in dc.hosts if host.power_model is None]
    if modeled and unmodeled:
        log.warning("%d host(s) lack a power model and contribute 0 J", len(unmodeled))
    migrations = sum(dc.migration_count for dc in datacenters)
    return build_report(cloudlets, characteristics, {vm.id: vm for vm in vms},
                        energy=energy, migrations=migrations,
                        final_clock=sim.clock, backend=backend_name())


def run_scenario(config: ScenarioConfig,
                 trace: Optional[Callable[[str], None]] = None) -> SimulationReport:
    sim, datacenters, broker, vms, cloudlets = build_simulation(config, trace)
    sim.run()
    return collect_report(sim, datacenters, broker, vms, cloudlets)


def sweep(base: ScenarioConfig, vm_counts) -> list[tuple[int, Optional[float], Optional[float]]]:
    """One independent simulation per VM count, in ascending order.
    A failing run yields a flagged (None) row and the sweep continues."""
    rows = []
    for count in sorted(vm_counts):
        config = dataclasses.replace(base, vms=dataclasses.replace(base.vms, count=count))
        try:
            report = run_scenario(config)
            rows.append((count, report.avg_exec_time, report.completion_rate))
        except Exception:
            log.exception("sweep run with %d VMs failed", count)
            rows.append((count, None, None))
    return rows
