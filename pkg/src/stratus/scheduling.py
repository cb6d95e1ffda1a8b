"""Cloudlet execution policies inside a VM, plus VM-to-host placement.

Time-shared is processor sharing: each of n concurrent cloudlets runs at
capacity / max(n, pe_count), so idle PEs never produce superlinear
speedup. Space-shared gives up to pe_count cloudlets a dedicated PE at
full rate and queues the rest FIFO.

Completion estimates are computed multiply-first (remaining * divisor /
capacity) so that whole-second batch durations come out exact in binary
floating point; estimates are recomputed on every arrival and departure,
and stale update events are ignored via a version counter kept by the
datacenter.
"""

from __future__ import annotations

from array import array
from collections import deque
from enum import Enum
from typing import TYPE_CHECKING, Optional

from .backend import advance_equal, min_active

if TYPE_CHECKING:
    from .entities import Cloudlet, Host, Vm

#: remaining work at or below this many MI counts as finished; absorbs
#: the subtraction dust of one advance step without moving any finish
#: time by more than ~1e-12 s at realistic rates
COMPLETION_EPS_MI = 1e-9


class SchedulerPolicy(str, Enum):
    TIME_SHARED = "time_shared"
    SPACE_SHARED = "space_shared"


class CloudletScheduler:
    """Execution state of one VM: running slots plus (space-shared only)
    a FIFO wait queue."""

    def __init__(self, policy: SchedulerPolicy, mips: float, pe_count: int):
        if mips <= 0:
            raise ValueError(f"mips must be positive, got {mips}")
        if pe_count < 1:
            raise ValueError(f"pe_count must be positive, got {pe_count}")
        self.policy = SchedulerPolicy(policy)
        self.mips = float(mips)
        self.pe_count = int(pe_count)
        self.capacity = float(mips) * pe_count
        self._running: list[Cloudlet] = []
        self._remaining = array("d")
        self._waiting: deque[Cloudlet] = deque()
        self._last_update = 0.0

    # -- inspection ---------------------------------------------------------

    @property
    def running_count(self) -> int:
        return len(self._running)

    @property
    def waiting_count(self) -> int:
        return len(self._waiting)

    def is_idle(self) -> bool:
        return not self._running and not self._waiting

    def remaining_of(self, cloudlet_id: int) -> Optional[float]:
        for i, c in enumerate(self._running):
            if c.id == cloudlet_id:
                return self._remaining[i]
        return None

    def granted_mips(self) -> float:
        """Total processing rate currently granted to cloudlets."""
        n = len(self._running)
        if n == 0:
            return 0.0
        if self.policy is SchedulerPolicy.TIME_SHARED:
            return self.capacity * n / max(n, self.pe_count)
        return self.mips * n

    def _divisor(self, n: int) -> int:
        return max(n, self.pe_count)

    # -- state transitions ---------------------------------------------------

    def advance(self, clock: float) -> list["Cloudlet"]:
        """Charge elapsed work against the running slots and pop the ones
        that finished. Must be called before any mutation at ``clock``."""
        dt = clock - self._last_update
        self._last_update = clock
        n = len(self._running)
        if n == 0 or dt <= 0.0:
            return []
        if self.policy is SchedulerPolicy.TIME_SHARED:
            dec = dt * self.capacity / self._divisor(n)
        else:
            dec = dt * self.mips
        done_idx = advance_equal(self._remaining, n, dec, COMPLETION_EPS_MI)
        if not done_idx:
            return []
        done_set = set(done_idx)
        finished = [self._running[i] for i in done_idx]
        keep = [i for i in range(n) if i not in done_set]
        self._running = [self._running[i] for i in keep]
        self._remaining = array("d", (self._remaining[i] for i in keep))
        return finished

    def submit(self, cloudlet: "Cloudlet", clock: float) -> bool:
        """Accept a cloudlet; returns True when it starts executing now."""
        if self.policy is SchedulerPolicy.SPACE_SHARED and len(self._running) >= self.pe_count:
            self._waiting.append(cloudlet)
            return False
        self._running.append(cloudlet)
        self._remaining.append(float(cloudlet.length))
        return True

    def promote_waiting(self) -> list["Cloudlet"]:
        """Move queued cloudlets onto freed PEs (space-shared only)."""
        started = []
        while self._waiting and len(self._running) < self.pe_count:
            cloudlet = self._waiting.popleft()
            self._running.append(cloudlet)
            self._remaining.append(float(cloudlet.length))
            started.append(cloudlet)
        return started

    def next_completion_dt(self) -> Optional[float]:
        """Time until the earliest running cloudlet finishes, or None."""
        n = len(self._running)
        if n == 0:
            return None
        m = min_active(self._remaining, n)
        if self.policy is SchedulerPolicy.TIME_SHARED:
            return m * self._divisor(n) / self.capacity
        return m / self.mips


def allocate_host(hosts: list["Host"], vm: "Vm") -> Optional["Host"]:
    """Pick the feasible host with the most free PEs (ties to the lowest
    host id). Feasibility: free PEs, RAM and BW cover the VM, and the
    host's PE rating covers vm.mips so PEs are never oversubscribed."""
    best = None
    for host in hosts:
        if host.free_pes < vm.pe_count or host.free_ram < vm.ram or host.free_bw < vm.bw:
            continue
        if host.pe_mips < vm.mips:
            continue
        if best is None or host.free_pes > best.free_pes:
            best = host
    return best
