"""Cloud model entities and their message protocol.

Flow per simulation: datacenters register with the information service
at clock 0; the broker queries it (one 0.1 s control hop), negotiates VM
creation with the providers at the instant the list arrives, then
submits all bound cloudlets one further hop later. Start times of 0.2
therefore come out of exactly two control hops. Completion
notifications travel back to the broker with one hop, after which it
destroys its VMs and ends the simulation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

from .engine import INFO_SERVICE_ID, MANAGER_ID, Entity, Event, EventTag, Simulation
from .power import ConsolidationConfig, PowerModel, UtilizationHistory, detect_overload, select_vm_mmt
from .scheduling import CloudletScheduler, SchedulerPolicy, allocate_host

log = logging.getLogger(__name__)

#: fixed inter-entity control-message latency, simulated seconds
CONTROL_HOP = 0.1


class PeStatus(Enum):
    FREE = "free"
    BUSY = "busy"


@dataclass
class Pe:
    """Processing element: one core with a MIPS rating."""

    id: int
    mips: float
    status: PeStatus = PeStatus.FREE

    def __post_init__(self):
        if self.mips <= 0:
            raise ValueError(f"pe mips must be positive, got {self.mips}")


@dataclass(frozen=True)
class PriceVector:
    per_cpu_second: float = 0.0
    per_mem_unit: float = 0.0
    per_storage_unit: float = 0.0
    per_bw_unit: float = 0.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value < 0:
                raise ValueError(f"price {name} must be >= 0, got {value}")

    def scaled(self, k: float) -> "PriceVector":
        return PriceVector(self.per_cpu_second * k, self.per_mem_unit * k,
                           self.per_storage_unit * k, self.per_bw_unit * k)


@dataclass(frozen=True)
class DatacenterCharacteristics:
    arch: str = "x86"
    os: str = "Windows"
    vmm: str = "Xen"
    time_zone: float = 0.0
    prices: PriceVector = field(default_factory=PriceVector)


class CloudletStatus(Enum):
    CREATED = "CREATED"
    QUEUED = "QUEUED"
    IN_EXEC = "INEXEC"
    SUCCESS = "SUCCESS"
    FAILED = "FAILED"
    CANCELED = "CANCELED"


_STATUS_ORDER = {
    CloudletStatus.CREATED: 0,
    CloudletStatus.QUEUED: 1,
    CloudletStatus.IN_EXEC: 2,
    CloudletStatus.SUCCESS: 3,
    CloudletStatus.FAILED: 3,
    CloudletStatus.CANCELED: 3,
}

TERMINAL_STATUSES = (CloudletStatus.SUCCESS, CloudletStatus.FAILED, CloudletStatus.CANCELED)


class Cloudlet:
    """An application unit: length in million instructions plus lifecycle
    timestamps filled in as it moves through the system."""

    def __init__(self, cloudlet_id: int, length: float, file_size: int = 300,
                 output_size: int = 300, pes_required: int = 1):
        if length <= 0:
            raise ValueError(f"cloudlet length must be positive, got {length}")
        if pes_required < 1:
            raise ValueError(f"pes_required must be positive, got {pes_required}")
        self.id = cloudlet_id
        self.length = float(length)
        self.file_size = int(file_size)
        self.output_size = int(output_size)
        self.pes_required = int(pes_required)
        self.status = CloudletStatus.CREATED
        self.bound_vm: Optional[int] = None
        self.datacenter: Optional[int] = None
        self.exec_start: Optional[float] = None
        self.finish: Optional[float] = None

    def set_status(self, status: CloudletStatus) -> None:
        """Statuses only move forward; terminal ones are absorbing."""
        if self.status in TERMINAL_STATUSES:
            raise ValueError(f"cloudlet {self.id} already terminal ({self.status.value})")
        if _STATUS_ORDER[status] < _STATUS_ORDER[self.status]:
            raise ValueError(f"illegal transition {self.status.value} -> {status.value}")
        self.status = status

    def mark_running(self, clock: float) -> None:
        self.set_status(CloudletStatus.IN_EXEC)
        if self.exec_start is None:
            self.exec_start = clock

    def mark_success(self, clock: float) -> None:
        self.set_status(CloudletStatus.SUCCESS)
        self.finish = clock

    def mark_failed(self) -> None:
        if self.status not in TERMINAL_STATUSES:
            self.set_status(CloudletStatus.FAILED)

    def __repr__(self):
        return f"Cloudlet({self.id}, {self.status.value})"


class Vm:
    """A provisioned compute container with a cloudlet scheduler."""

    def __init__(self, vm_id: int, owner: int, mips: float, pe_count: int = 1,
                 ram: int = 512, bw: int = 1000, image_size: int = 10000,
                 vmm: str = "Xen", scheduler: SchedulerPolicy = SchedulerPolicy.TIME_SHARED):
        self.id = vm_id
        self.owner = owner
        self.mips = float(mips)
        self.pe_count = int(pe_count)
        self.ram = int(ram)
        self.bw = int(bw)
        self.image_size = int(image_size)
        self.vmm = vmm
        self.scheduler = CloudletScheduler(scheduler, mips, pe_count)
        self.placement: Optional[tuple[int, int]] = None  # (datacenter id, host id)
        self.host: Optional["Host"] = None

    def __repr__(self):
        return f"Vm({self.id}, {self.mips}x{self.pe_count})"


class Host:
    """Physical machine: PEs, RAM, BW, storage, placed VMs and optional
    power accounting over its piecewise-constant utilization."""

    def __init__(self, host_id: int, pe_count: int, mips: float, ram: int, bw: int,
                 storage: int, vm_scheduler: SchedulerPolicy = SchedulerPolicy.SPACE_SHARED,
                 power_model: Optional[PowerModel] = None):
        self.id = host_id
        self.pes = [Pe(i, mips) for i in range(pe_count)]
        self.ram = int(ram)
        self.bw = int(bw)
        self.storage = int(storage)
        self.vm_scheduler = SchedulerPolicy(vm_scheduler)
        self.power_model = power_model
        self.placed_vms: list[Vm] = []
        self.free_pes = pe_count
        self.free_ram = int(ram)
        self.free_bw = int(bw)
        self._pe_assignment: dict[int, list[int]] = {}
        self.history = UtilizationHistory()
        self.energy_joules = 0.0
        self.mi_integral = 0.0
        self._seg_t = 0.0
        self._seg_u = 0.0

    @property
    def pe_mips(self) -> float:
        return min(pe.mips for pe in self.pes)

    @property
    def total_mips(self) -> float:
        return sum(pe.mips for pe in self.pes)

    def can_fit(self, vm: Vm) -> bool:
        return (self.free_pes >= vm.pe_count and self.free_ram >= vm.ram
                and self.free_bw >= vm.bw and self.pe_mips >= vm.mips)

    def place(self, vm: Vm) -> None:
        if not self.can_fit(vm):
            raise ValueError(f"vm {vm.id} does not fit on host {self.id}")
        taken = []
        for pe in self.pes:
            if len(taken) == vm.pe_count:
                break
            if pe.status is PeStatus.FREE:
                pe.status = PeStatus.BUSY
                taken.append(pe.id)
        self._pe_assignment[vm.id] = taken
        self.free_pes -= vm.pe_count
        self.free_ram -= vm.ram
        self.free_bw -= vm.bw
        self.placed_vms.append(vm)
        vm.host = self

    def remove(self, vm: Vm) -> None:
        for pe_id in self._pe_assignment.pop(vm.id):
            self.pes[pe_id].status = PeStatus.FREE
        self.free_pes += vm.pe_count
        self.free_ram += vm.ram
        self.free_bw += vm.bw
        self.placed_vms.remove(vm)
        vm.host = None

    # -- utilization and energy accounting ---------------------------------

    def utilization(self) -> float:
        granted = sum(vm.scheduler.granted_mips() for vm in self.placed_vms)
        return min(granted / self.total_mips, 1.0)

    def close_segment(self, clock: float) -> None:
        """Integrate the segment since the last change at the old rate.
        Must run before any scheduler state on this host mutates."""
        if clock > self._seg_t:
            dt = clock - self._seg_t
            if self.power_model is not None:
                self.energy_joules += self.power_model.power_draw(self._seg_u) * dt
            self.mi_integral += self._seg_u * self.total_mips * dt
            self._seg_t = clock

    def refresh_utilization(self, clock: float) -> None:
        u = self.utilization()
        if u != self._seg_u:
            self._seg_u = u
            self.history.append(clock, u)

    def sample_history(self, clock: float) -> None:
        self.history.append(clock, self.utilization())


class InformationService(Entity):
    """Registry with which datacenters register and from which brokers
    discover providers. Always entity id 1."""

    def __init__(self, sim: Simulation, name: str = ""):
        super().__init__(sim, name)
        self.registry: list[int] = []

    def register(self, dc_id: int) -> None:
        if dc_id in self.registry:
            log.warning("datacenter %d already registered, ignoring duplicate", dc_id)
            return
        self.registry.append(dc_id)

    def process(self, event: Event) -> None:
        if event.tag is EventTag.REGISTER:
            self.register(event.src)
        elif event.tag is EventTag.QUERY_PROVIDERS:
            self.send(event.src, EventTag.PROVIDER_LIST, list(self.registry))
        else:
            log.warning("cis ignoring %s from %d", event.tag, event.src)


class Datacenter(Entity):
    """Resource provider: owns hosts, places VMs, runs their cloudlets and
    reports completions back to the owning broker."""

    def __init__(self, sim: Simulation, hosts: list[Host],
                 characteristics: Optional[DatacenterCharacteristics] = None,
                 vm_allocation: str = "most_free_pes",
                 consolidation: Optional[ConsolidationConfig] = None, name: str = ""):
        super().__init__(sim, name)
        if vm_allocation != "most_free_pes":
            raise ValueError(f"unknown vm allocation policy {vm_allocation!r}")
        self.hosts = hosts
        self.characteristics = characteristics or DatacenterCharacteristics()
        self.vm_allocation = vm_allocation
        self.consolidation = consolidation
        self.migration_count = 0
        self._vms: dict[int, Vm] = {}
        self._update_version: dict[int, int] = {}

    def start(self) -> None:
        self.send(INFO_SERVICE_ID, EventTag.REGISTER)
        if self.consolidation is not None:
            self.send(self.id, EventTag.CONSOLIDATE, delay=self.consolidation.epoch)

    def process(self, event: Event) -> None:
        now = event.time
        if event.tag is EventTag.CREATE_VM:
            self._create_vm(event.payload, event.src)
        elif event.tag is EventTag.SUBMIT_CLOUDLET:
            self._submit_cloudlet(event.payload, event.src, now)
        elif event.tag is EventTag.UPDATE_PROCESSING:
            self._update_processing(event.payload, now)
        elif event.tag is EventTag.DESTROY_VM:
            self._destroy_vm(event.payload, now)
        elif event.tag is EventTag.CONSOLIDATE:
            self.consolidate_epoch(now)
            if self.consolidation is not None and any(
                    not vm.scheduler.is_idle() for vm in self._vms.values()):
                self.send(self.id, EventTag.CONSOLIDATE, delay=self.consolidation.epoch)
        else:
            log.warning("datacenter %d ignoring %s", self.id, event.tag)

    # -- VM lifecycle -------------------------------------------------------

    def _create_vm(self, vm: Vm, requester: int) -> None:
        host = allocate_host(self.hosts, vm)
        if host is None:
            self.send(requester, EventTag.CREATE_VM_ACK, (vm.id, False))
            return
        host.place(vm)
        vm.placement = (self.id, host.id)
        self._vms[vm.id] = vm
        self._update_version[vm.id] = 0
        self.send(requester, EventTag.CREATE_VM_ACK, (vm.id, True))

    def _destroy_vm(self, vm_id: int, now: float) -> None:
        vm = self._vms.pop(vm_id, None)
        if vm is None:
            log.warning("destroy for unknown vm %d at datacenter %d", vm_id, self.id)
            return
        if not vm.scheduler.is_idle():
            log.warning("destroying vm %d with unfinished cloudlets", vm_id)
        host = vm.host
        if host is not None:
            host.close_segment(now)
            host.remove(vm)
            host.refresh_utilization(now)
        vm.placement = None

    # -- cloudlet execution --------------------------------------------------

    def _submit_cloudlet(self, cloudlet: Cloudlet, src: int, now: float) -> None:
        vm = self._vms.get(cloudlet.bound_vm)
        if vm is None:
            log.warning("cloudlet %d bound to unknown vm %s, failing", cloudlet.id, cloudlet.bound_vm)
            cloudlet.mark_failed()
            self.send(src, EventTag.CLOUDLET_DONE, cloudlet, delay=CONTROL_HOP)
            return
        if cloudlet.pes_required > vm.pe_count:
            cloudlet.mark_failed()
            self.send(vm.owner, EventTag.CLOUDLET_DONE, cloudlet, delay=CONTROL_HOP)
            return
        cloudlet.datacenter = self.id
        self._touch_vm(vm, now)
        if cloudlet.status is CloudletStatus.CREATED:
            cloudlet.set_status(CloudletStatus.QUEUED)
        if vm.scheduler.submit(cloudlet, now):
            cloudlet.mark_running(now)
        self._reschedule(vm, now)

    def _update_processing(self, payload: tuple[int, int], now: float) -> None:
        vm_id, version = payload
        vm = self._vms.get(vm_id)
        if vm is None or version != self._update_version[vm_id]:
            return  # stale estimate, superseded by a later arrival/departure
        self._touch_vm(vm, now)
        self._reschedule(vm, now)

    def _touch_vm(self, vm: Vm, now: float) -> None:
        """Advance the VM's scheduler to ``now``, finishing and promoting
        cloudlets as needed. Host segment closes first so the utilization
        integral sees the old rate up to ``now``."""
        host = vm.host
        if host is not None:
            host.close_segment(now)
        for cloudlet in vm.scheduler.advance(now):
            cloudlet.mark_success(now)
            self.send(vm.owner, EventTag.CLOUDLET_DONE, cloudlet, delay=CONTROL_HOP)
        for cloudlet in vm.scheduler.promote_waiting():
            cloudlet.mark_running(now)

    def _reschedule(self, vm: Vm, now: float) -> None:
        self._update_version[vm.id] += 1
        dt = vm.scheduler.next_completion_dt()
        if dt is not None:
            self.send(self.id, EventTag.UPDATE_PROCESSING, (vm.id, self._update_version[vm.id]), delay=dt)
        if vm.host is not None:
            vm.host.refresh_utilization(now)

    # -- consolidation --------------------------------------------------------

    def consolidate_epoch(self, now: float) -> list[tuple[int, int, int]]:
        """One consolidation decision: sample utilization, detect
        overloaded hosts and unload them via MMT onto the feasible
        non-overloaded host with the smallest power-draw increase.
        Returns the migrations performed as (vm id, from host, to host)."""
        config = self.consolidation
        if config is None:
            return []
        for host in self.hosts:
            host.sample_history(now)
        flagged: dict[int, float] = {}
        for host in self.hosts:
            overloaded, bound = detect_overload(config, host.history, host.utilization())
            if overloaded:
                flagged[host.id] = bound
        migrations: list[tuple[int, int, int]] = []
        for host in self.hosts:
            if host.id in flagged:
                migrations.extend(self._unload_host(host, flagged[host.id], flagged, now))
        self.migration_count += len(migrations)
        return migrations

    def _unload_host(self, host: Host, bound: float, flagged: dict[int, float],
                     now: float) -> list[tuple[int, int, int]]:
        moved = []
        while host.placed_vms and host.utilization() >= bound:
            vm = select_vm_mmt(host.placed_vms)
            target = self._migration_target(vm, host, flagged)
            if target is None:
                log.info("no feasible migration target for vm %d off host %d", vm.id, host.id)
                break
            self._migrate(vm, host, target, now)
            moved.append((vm.id, host.id, target.id))
        return moved

    def _migration_target(self, vm: Vm, source: Host, flagged: dict[int, float]) -> Optional[Host]:
        load = vm.scheduler.granted_mips()
        best = None
        best_key = None
        for host in self.hosts:
            if host.id == source.id or host.id in flagged or not host.can_fit(vm):
                continue
            if host.power_model is not None:
                u = host.utilization()
                u_after = min(u + load / host.total_mips, 1.0)
                increase = host.power_model.power_draw(u_after) - host.power_model.power_draw(u)
            else:
                increase = 0.0
            key = (increase, host.id)
            if best_key is None or key < best_key:
                best, best_key = host, key
        return best

    def _migrate(self, vm: Vm, source: Host, target: Host, now: float) -> None:
        source.close_segment(now)
        target.close_segment(now)
        source.remove(vm)
        target.place(vm)
        vm.placement = (self.id, target.id)
        source.refresh_utilization(now)
        target.refresh_utilization(now)

    def finalize(self, clock: float) -> None:
        for host in self.hosts:
            host.close_segment(clock)


class Broker(Entity):
    """Acts for one user: discovers providers, creates VMs with per-VM
    retry across providers in registration order, binds cloudlets round
    robin over the created VMs and submits them all at once."""

    def __init__(self, sim: Simulation, name: str = ""):
        super().__init__(sim, name)
        self.requested_vms: list[Vm] = []
        self.created_vms: list[Vm] = []
        self.failed_vms: list[Vm] = []
        self.cloudlets: list[Cloudlet] = []
        self.provider_list: list[int] = []
        self.creation_results: dict[int, Optional[int]] = {}  # vm id -> datacenter or None
        self._vm_by_id: dict[int, Vm] = {}
        self._attempt: dict[int, int] = {}
        self._unresolved: set[int] = set()
        self._terminal = 0
        self._done = False

    def submit_vm_list(self, vms: list[Vm]) -> None:
        self.requested_vms.extend(vms)
        self._vm_by_id.update({vm.id: vm for vm in vms})

    def submit_cloudlet_list(self, cloudlets: list[Cloudlet]) -> None:
        self.cloudlets.extend(cloudlets)

    def start(self) -> None:
        self.send(INFO_SERVICE_ID, EventTag.QUERY_PROVIDERS, delay=CONTROL_HOP)

    def process(self, event: Event) -> None:
        if event.tag is EventTag.PROVIDER_LIST:
            self._on_providers(event.payload)
        elif event.tag is EventTag.CREATE_VM_ACK:
            self._on_ack(event.payload)
        elif event.tag is EventTag.CLOUDLET_DONE:
            self._terminal += 1
            self._finish_if_done()
        else:
            log.warning("broker %d ignoring %s", self.id, event.tag)

    # -- deployment -----------------------------------------------------------

    def _on_providers(self, providers: list[int]) -> None:
        self.provider_list = providers
        if not providers or not self.requested_vms:
            self._deployment_resolved()
            return
        self._unresolved = {vm.id for vm in self.requested_vms}
        for vm in sorted(self.requested_vms, key=lambda v: v.id):
            self._attempt[vm.id] = 0
            self.send(providers[0], EventTag.CREATE_VM, vm)

    def _on_ack(self, payload: tuple[int, bool]) -> None:
        vm_id, created = payload
        vm = self._vm_by_id[vm_id]
        if created:
            self.created_vms.append(vm)
            self.creation_results[vm_id] = vm.placement[0]
            self._unresolved.discard(vm_id)
        else:
            self._attempt[vm_id] += 1
            if self._attempt[vm_id] < len(self.provider_list):
                self.send(self.provider_list[self._attempt[vm_id]], EventTag.CREATE_VM, vm)
                return
            self.failed_vms.append(vm)
            self.creation_results[vm_id] = None
            self._unresolved.discard(vm_id)
        if not self._unresolved:
            self._deployment_resolved()

    def _deployment_resolved(self) -> None:
        self.created_vms.sort(key=lambda v: v.id)
        if not self.created_vms:
            for cloudlet in self.cloudlets:
                cloudlet.mark_failed()
                self._terminal += 1
            self._finish_if_done()
            return
        self._bind_and_submit()
        self._finish_if_done()  # covers an empty cloudlet list

    def _bind_and_submit(self) -> None:
        """Round robin: cloudlet i goes to created_vms[i mod n], submitted
        simultaneously one control hop after deployment resolves."""
        ring = self.created_vms
        for i, cloudlet in enumerate(self.cloudlets):
            if cloudlet.pes_required > 1:
                log.warning("cloudlet %d needs %d PEs, only single-PE cloudlets are supported",
                            cloudlet.id, cloudlet.pes_required)
                cloudlet.mark_failed()
                self._terminal += 1
                continue
            vm = ring[i % len(ring)]
            cloudlet.bound_vm = vm.id
            self.send(vm.placement[0], EventTag.SUBMIT_CLOUDLET, cloudlet, delay=CONTROL_HOP)

    # -- teardown ---------------------------------------------------------------

    def _finish_if_done(self) -> None:
        if self._done or self._terminal < len(self.cloudlets):
            return
        self._done = True
        for vm in self.created_vms:
            if vm.placement is not None:
                self.send(vm.placement[0], EventTag.DESTROY_VM, vm.id)
        self.send(MANAGER_ID, EventTag.END)
