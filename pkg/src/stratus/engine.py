"""Deterministic discrete-event engine.

Events are totally ordered by (time, seq) where seq is the insertion
counter, so ties at equal timestamps resolve FIFO. A simulation is
single-threaded and owns its entities; independent simulations share
nothing and may run side by side.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable, Optional

log = logging.getLogger(__name__)

#: ids reserved before any user entity is created
MANAGER_ID = 0
INFO_SERVICE_ID = 1


class SimulationError(Exception):
    """Base class for engine errors."""


class UsageError(SimulationError):
    """Lifecycle misuse: bad phase transition or invalid pause time."""


class RoutingError(SimulationError):
    """Message scheduled to an entity id that was never registered."""


class Phase(Enum):
    CREATED = "created"
    RUNNING = "running"
    PAUSED = "paused"
    FINISHED = "finished"


class EventTag(str, Enum):
    REGISTER = "REGISTER"
    QUERY_PROVIDERS = "QUERY_PROVIDERS"
    PROVIDER_LIST = "PROVIDER_LIST"
    CREATE_VM = "CREATE_VM"
    CREATE_VM_ACK = "CREATE_VM_ACK"
    SUBMIT_CLOUDLET = "SUBMIT_CLOUDLET"
    CLOUDLET_DONE = "CLOUDLET_DONE"
    UPDATE_PROCESSING = "UPDATE_PROCESSING"
    DESTROY_VM = "DESTROY_VM"
    CONSOLIDATE = "CONSOLIDATE"
    END = "END"


@dataclass(frozen=True)
class Event:
    time: float
    seq: int
    src: int
    dst: int
    tag: EventTag
    payload: Any = None


class Entity:
    """Base class for simulation actors.

    Registering with the simulation happens in the constructor; ids are
    assigned sequentially in creation order and never reused.
    """

    def __init__(self, sim: "Simulation", name: str = ""):
        self.sim = sim
        self.id = sim._register(self)
        self.name = name or f"{type(self).__name__}-{self.id}"

    def start(self) -> None:
        """Called once, in id order, when the simulation first runs."""

    def process(self, event: Event) -> None:
        raise NotImplementedError

    def finalize(self, clock: float) -> None:
        """Called once when the simulation finishes."""

    def send(self, dst: int, tag: EventTag, payload: Any = None, delay: float = 0.0) -> None:
        self.sim.schedule(delay, self.id, dst, tag, payload)


class _Manager(Entity):
    """Internal entity holding id 0; sink for END events."""

    def process(self, event: Event) -> None:
        if event.tag is not EventTag.END:
            log.warning("manager received unexpected %s from %d", event.tag, event.src)


class Simulation:
    """Future-event queue, clock, entity registry and run lifecycle.

    The constructor performs one-time initialization: it occupies id 0
    with the internal manager and id 1 with the information service, so
    entities created by the user number from 2 upward.
    """

    def __init__(self, trace: Optional[Callable[[str], None]] = None):
        self.clock: float = 0.0
        self.phase: Phase = Phase.CREATED
        self._queue: list[tuple[float, int, Event]] = []
        self._seq = 0
        self._entities: dict[int, Entity] = {}
        self._next_id = 0
        self._pause_until: Optional[float] = None
        self._trace = trace
        self.routing_errors: list[Event] = []

        from .entities import InformationService  # deferred: avoids import cycle

        _Manager(self, name="manager")
        InformationService(self, name="cis")

    # -- registry ---------------------------------------------------------

    def _register(self, entity: Entity) -> int:
        eid = self._next_id
        self._next_id += 1
        self._entities[eid] = entity
        return eid

    def entity(self, eid: int) -> Entity:
        return self._entities[eid]

    @property
    def entities(self) -> dict[int, Entity]:
        return dict(self._entities)

    # -- scheduling -------------------------------------------------------

    def schedule(self, delay: float, src: int, dst: int, tag: EventTag, payload: Any = None) -> None:
        if delay < 0:
            raise ValueError(f"negative delay {delay!r}")
        if dst not in self._entities:
            raise RoutingError(f"unknown destination entity {dst}")
        event = Event(self.clock + delay, self._seq, src, dst, tag, payload)
        self._seq += 1
        heapq.heappush(self._queue, (event.time, event.seq, event))

    def queue_length(self) -> int:
        return len(self._queue)

    # -- lifecycle --------------------------------------------------------

    def pause_at(self, t: float) -> None:
        if self.phase is Phase.FINISHED:
            raise UsageError("simulation already finished")
        if t <= self.clock:
            raise UsageError(f"pause time {t} not after clock {self.clock}")
        self._pause_until = t

    def resume(self) -> None:
        if self.phase is not Phase.PAUSED:
            raise UsageError(f"resume requires a paused simulation, phase is {self.phase.name}")
        self._pause_until = None
        self.phase = Phase.RUNNING
        self._loop()

    def run(self) -> float:
        """Deliver events in (time, seq) order until the queue empties or
        an END event arrives; returns the final clock."""
        if self.phase not in (Phase.CREATED, Phase.PAUSED):
            raise UsageError(f"run requires a created or paused simulation, phase is {self.phase.name}")
        if self.phase is Phase.CREATED:
            self.phase = Phase.RUNNING
            for eid in sorted(self._entities):
                self._entities[eid].start()
        else:
            self.phase = Phase.RUNNING
        self._loop()
        return self.clock

    def _loop(self) -> None:
        while self._queue:
            head_time = self._queue[0][0]
            if self._pause_until is not None and head_time > self._pause_until:
                self.clock = self._pause_until
                self._pause_until = None
                self.phase = Phase.PAUSED
                return
            _, _, event = heapq.heappop(self._queue)
            self.clock = event.time
            self._deliver(event)
            if event.tag is EventTag.END:
                break
        self._finish()

    def _deliver(self, event: Event) -> None:
        if self._trace is not None:
            self._trace(f"{event.time!r}\t{event.src}\t{event.dst}\t{event.tag.value}")
        target = self._entities.get(event.dst)
        if target is None:
            self.routing_errors.append(event)
            log.warning("event %s to removed entity %d dropped", event.tag, event.dst)
            return
        target.process(event)

    def _finish(self) -> None:
        self.phase = Phase.FINISHED
        self._pause_until = None
        for eid in sorted(self._entities):
            self._entities[eid].finalize(self.clock)
